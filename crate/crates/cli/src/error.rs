use std::path::PathBuf;

use scrl::dp::DpError;
use scrl::product::ProductError;
use scrl::qlearn::QLearnError;
use scrl::quantize::QuantizeError;
use scrl::scltl::ScltlError;
use scrl::system::SystemError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 3,
            CliError::Config(_) | CliError::Io { .. } => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<ScltlError> for CliError {
    fn from(e: ScltlError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SystemError> for CliError {
    fn from(e: SystemError) -> Self {
        match e {
            SystemError::NumericOverflow => CliError::Numeric(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<QuantizeError> for CliError {
    fn from(e: QuantizeError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ProductError> for CliError {
    fn from(e: ProductError) -> Self {
        match e {
            ProductError::System(s) => s.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<DpError> for CliError {
    fn from(e: DpError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<QLearnError> for CliError {
    fn from(e: QLearnError) -> Self {
        match e {
            QLearnError::Product(p) => p.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}
