use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl HarnessError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(vec![msg.into()])
    }

    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) | Self::Parse(_) => 2,
            Self::Numerical(_) => 3,
            Self::InsufficientData(_) | Self::Io(_) => 1,
        }
    }
}

impl From<longmem_core::Error> for HarnessError {
    fn from(err: longmem_core::Error) -> Self {
        match err {
            longmem_core::Error::InvalidInput(msg) => Self::Validation(vec![msg]),
            longmem_core::Error::DegenerateState(msg) | longmem_core::Error::Numerical(msg) => {
                Self::Numerical(msg)
            }
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
