#[derive(Debug, thiserror::Error)]
pub enum TfError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("png encoding error: {0}")]
    Png(#[from] png::EncodingError),
    #[error("malformed image file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, TfError>;
