use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(#[from] ConfigError),

    #[error("resource cap: {0}")]
    ResourceCap(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] meanfield_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit status: 1 validation or runtime failure, 2 configuration,
    /// 3 resource cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::ResourceCap(_) => 3,
            HarnessError::Core(meanfield_core::Error::DimensionCap { .. })
            | HarnessError::Core(meanfield_core::Error::OracleCap(_)) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
