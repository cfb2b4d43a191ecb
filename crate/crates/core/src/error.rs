use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// The variants group into the three failure classes the CLI reports as exit
/// codes: configuration problems, bad inputs and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("input: {0}")]
    Input(String),

    #[error("numerical: {0}")]
    Numerical(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("json error in {path} line {line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// The message without the class prefix.
    pub fn detail(&self) -> String {
        match self {
            Error::Config(m) | Error::Input(m) | Error::Numerical(m) => m.clone(),
            _ => self.to_string(),
        }
    }

    /// Process exit code: 2 config, 3 input, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Numerical(_) => 4,
            Error::Input(_) | Error::Io { .. } | Error::Image { .. } | Error::Json { .. } => 3,
        }
    }

    /// Short machine-parsable tag printed in front of the human message.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "E_CONFIG",
            Error::Input(_) => "E_INPUT",
            Error::Numerical(_) => "E_NUMERICAL",
            Error::Io { .. } => "E_IO",
            Error::Image { .. } => "E_IMAGE",
            Error::Json { .. } => "E_JSON",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
