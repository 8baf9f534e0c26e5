use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("config: {message}")]
    ConfigSyntax { message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] nlse_core::Error),
}

impl HarnessError {
    /// 2 for anything the user can fix in the config, 3 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        use nlse_core::Error as E;
        match self {
            HarnessError::Config { .. } | HarnessError::ConfigSyntax { .. } | HarnessError::Io { .. } => 2,
            HarnessError::Core(e) => match e {
                E::InvalidDomain { .. }
                | E::InvalidSize(_)
                | E::InvalidWidth(_)
                | E::LengthMismatch { .. }
                | E::InvalidParams(_)
                | E::InvalidAmplitude(_)
                | E::DefocusingRequested
                | E::InsufficientGrid(_)
                | E::Io { .. }
                | E::Parse { .. } => 2,
                _ => 3,
            },
        }
    }
}

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
