//! Error type shared by all modules.

use thiserror::Error;

/// Library result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor or parser rejected its input.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// An operation was evaluated at a spectral parameter where it is
    /// singular (an eigenvalue, or z = 0 where excluded).
    #[error("singular spectral parameter: {0}")]
    SingularParameter(String),

    /// A requested point lies outside the domain of the geometry.
    #[error("argument outside the domain: {0}")]
    OutOfDomain(String),

    /// A root search window boundary collides with a root; the caller should
    /// perturb the window.
    #[error("window boundary within tolerance of a root near {at}; perturb the window")]
    BoundaryCollision { at: f64 },

    /// An iterative procedure failed to converge or to certify its result.
    #[error("numerical failure: {0}")]
    NonConvergence(String),

    /// A contract documented as a precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
