#[derive(Debug, thiserror::Error)]
pub enum CvaeError {
    #[error("invalid architecture: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("training diverged at epoch {epoch}, batch {batch}: {message}")]
    Training { epoch: usize, batch: usize, message: String },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CvaeError>;
