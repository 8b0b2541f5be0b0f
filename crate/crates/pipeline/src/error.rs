use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("missing artifact {path}: {message}")]
    MissingArtifact { path: PathBuf, message: String },
    #[error("hash mismatch for {0}")]
    HashMismatch(PathBuf),
    #[error(transparent)]
    Vbi(#[from] sehs_vbi::VbiError),
    #[error(transparent)]
    Peh(#[from] sehs_peh::PehError),
    #[error(transparent)]
    Tf(#[from] sehs_tf::TfError),
    #[error(transparent)]
    Cvae(#[from] sehs_cvae::CvaeError),
    #[error(transparent)]
    Optim(#[from] sehs_optim::OptimError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const PARTIAL: i32 = 4;
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        use PipelineError::*;
        match self {
            Config(_) | Toml(_) => exit::CONFIG,
            Vbi(sehs_vbi::VbiError::Domain(_)) => exit::CONFIG,
            Peh(sehs_peh::PehError::Domain(_)) => exit::CONFIG,
            Tf(sehs_tf::TfError::Config(_)) => exit::CONFIG,
            Cvae(sehs_cvae::CvaeError::Config(_)) => exit::CONFIG,
            Optim(sehs_optim::OptimError::Config(_)) => exit::CONFIG,
            Numerical(_) | Vbi(_) | Peh(_) | Tf(_) | Cvae(_) | Optim(_) => exit::NUMERICAL,
            MissingArtifact { .. } | HashMismatch(_) | Io(_) | Json(_) | Csv(_) => exit::FAILURE,
        }
    }
}
