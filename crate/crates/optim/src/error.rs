#[derive(Debug, thiserror::Error)]
pub enum OptimError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("kriging fit failed: {0}")]
    Fit(String),
    #[error("objective evaluation failed in generation {generation} at design {design:?}: {message}")]
    Evaluation {
        generation: usize,
        design: Vec<f64>,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, OptimError>;
