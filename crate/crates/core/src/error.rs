use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported family: {0}")]
    Unsupported(String),
    #[error("NON_CONVERGED: {0}")]
    NonConverged(String),
    #[error("DIVERGENT_HEAD: {0}")]
    DivergentHead(String),
    #[error("P0_INFINITE: density is infinite at the origin")]
    P0Infinite,
    #[error("NOT_TRANSIENT: {0}")]
    NotTransient(String),
    #[error("REGIME_MISMATCH: {0}")]
    RegimeMismatch(String),
    #[error("REGIME_UNREACHABLE: {0}")]
    RegimeUnreachable(String),
    #[error("MISSING_NU: {0}")]
    MissingNu(String),
    #[error("OUT_OF_REGIME: {0}")]
    OutOfRegime(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DOMAIN",
            Error::Unsupported(_) => "UNSUPPORTED",
            Error::NonConverged(_) => "NON_CONVERGED",
            Error::DivergentHead(_) => "DIVERGENT_HEAD",
            Error::P0Infinite => "P0_INFINITE",
            Error::NotTransient(_) => "NOT_TRANSIENT",
            Error::RegimeMismatch(_) => "REGIME_MISMATCH",
            Error::RegimeUnreachable(_) => "REGIME_UNREACHABLE",
            Error::MissingNu(_) => "MISSING_NU",
            Error::OutOfRegime(_) => "OUT_OF_REGIME",
            Error::Parse(_) => "PARSE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
