use thiserror::Error;

use crate::config::ConfigError;
use crate::data::DataError;
use crate::models::ModelError;
use crate::numerics::NumericsError;
use crate::pipeline::TrainError;

/// Top-level error for the CLI and experiment harness.
///
/// Exit codes: 2 configuration, 3 data/I-O, 4 training.
#[derive(Debug, Error)]
pub enum ImaError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<crate::report::ReportError> for ImaError {
    fn from(e: crate::report::ReportError) -> Self {
        match e {
            crate::report::ReportError::Io { path, source } => ImaError::Io { path, source },
            crate::report::ReportError::Parse(msg) => ImaError::Config(ConfigError::Parse(msg)),
        }
    }
}

impl ImaError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ImaError::Config(_) => 2,
            ImaError::Data(_) | ImaError::Io { .. } => 3,
            ImaError::Model(_) | ImaError::Numerics(_) | ImaError::Train(_) => 4,
        }
    }
}
