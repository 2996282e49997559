use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("point {0} lies on the branch cut of sheet {1}")]
    Cut(crate::C64, usize),
    #[error("quadrature did not reach tolerance: {0}")]
    Quadrature(String),
    #[error("inner solver hit the iteration cap: {0}")]
    MaxIter(String),
    #[error("equilibrium solve did not converge: {0}")]
    NonConvergence(String),
    #[error("ambiguous support: {0}")]
    AmbiguousSupport(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("point too close to the support: {0}")]
    TooCloseToSupport(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("no phase boundary in the scanned rectangle")]
    EmptyBoundary,
    #[error("bimoment factorization lost precision at order {0}")]
    SingularMoment(usize),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
