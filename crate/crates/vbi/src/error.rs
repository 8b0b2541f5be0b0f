use sehs_numerics::NumericsError;

#[derive(Debug, thiserror::Error)]
pub enum VbiError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] NumericsError),
    #[error("contact-force iteration did not converge at step {step} after {iterations} iterations (residual {residual:e})")]
    Convergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed record: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, VbiError>;
