use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration does not fit the subcommand's schema.
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("{context}: {source}")]
    Module {
        context: String,
        #[source]
        source: pwsynth_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::ConfigInvalid(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error; 1 is reserved for failed checks.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigInvalid(_) => 2,
            CliError::Module { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}

/// Attaches context to module errors.
pub trait ModuleContext<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ModuleContext<T> for pwsynth_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| CliError::Module {
            context: what(),
            source,
        })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
