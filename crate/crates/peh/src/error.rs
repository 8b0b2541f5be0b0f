use sehs_numerics::NumericsError;

#[derive(Debug, thiserror::Error)]
pub enum PehError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] NumericsError),
    #[error("time integration failed for design {design}: {message}")]
    Integration { design: String, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PehError>;
