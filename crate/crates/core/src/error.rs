use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// `Domain` covers parameter ranges (s outside (0, d), K too small, ...);
/// `Singular` is reserved for configurations where an energy is infinite.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("did not converge: {0}")]
    NoConvergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Prefixes the message with `ctx`, keeping the variant.
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
            Error::Singular(m) => Error::Singular(format!("{ctx}: {m}")),
            Error::Parse { line, msg } => Error::Parse { line, msg: format!("{ctx}: {msg}") },
            Error::Invalid(m) => Error::Invalid(format!("{ctx}: {m}")),
            Error::NoConvergence(m) => Error::NoConvergence(format!("{ctx}: {m}")),
            Error::Io(e) => Error::Io(std::io::Error::new(e.kind(), format!("{ctx}: {e}"))),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
