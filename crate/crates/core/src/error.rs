use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("geodesic left the domain at arclength {at}")]
    DomainExit { at: f64 },

    #[error("insufficient good directions: {0}")]
    InsufficientDirections(String),

    #[error("disconnected configuration: {0}")]
    Disconnected(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
