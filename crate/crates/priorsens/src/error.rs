use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CONTOUR: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// Malformed or inconsistent user input: files, flags, config values.
    #[error("{0}")]
    Input(String),

    #[error("{}:{line}: {message}", path.display())]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] priorsens_core::Error),

    #[error("serializing report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        use priorsens_core::Error as E;
        match self {
            CliError::Core(e) => match e.root_cause() {
                E::Unreachable { .. } | E::PartialGrid(_) => EXIT_CONTOUR,
                E::Saturated { .. } | E::ReweightInstability { .. } | E::Numerical(_) => {
                    EXIT_NUMERICAL
                }
                _ => EXIT_INPUT,
            },
            CliError::Json(_) => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
