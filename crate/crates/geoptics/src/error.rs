use std::io;

use geoptics_core::Error as CoreError;

/// Exit status for a run that completed but whose trend checks failed.
pub const EXIT_TREND: i32 = 4;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad field file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Json(_) | Self::Format(_) | Self::Io(_) => EXIT_CONFIG,
            Self::Core(e) => match e {
                CoreError::NonFinite(_)
                | CoreError::NumericalInstability { .. }
                | CoreError::MassDrift { .. }
                | CoreError::Caustic { .. }
                | CoreError::Symmetrizer { .. }
                | CoreError::Curl { .. } => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            },
        }
    }
}
