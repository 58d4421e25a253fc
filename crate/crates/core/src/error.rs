use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rotor spec: {0}")]
    InvalidSpec(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("numerical failure: {message}{}", hint.as_ref().map(|h| format!(" (hint: {h})")).unwrap_or_default())]
    Numerical {
        message: String,
        hint: Option<String>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pulse reduction unavailable: {0}; use full-field propagation instead")]
    ReductionUnavailable(String),

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>) -> Self {
        Error::Numerical {
            message: message.into(),
            hint: None,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::Config(_)
                | Error::InvalidInput(_)
                | Error::Io { .. }
                | Error::Json(_)
                | Error::Unsupported(_)
        )
    }
}
