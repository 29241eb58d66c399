//! Error type shared by all solver modules.

use thiserror::Error;

/// Errors produced by grid construction, operator assembly, and solver runs.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated (sizes, signs, ranges).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A scattering kernel failed its construction-time validation.
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    /// The requested discretization cannot represent the operator faithfully.
    #[error("ill-posed discretization: {0}")]
    IllPosedDiscretization(String),

    /// A factorization or eigensolve lost the structure the method relies on.
    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    /// A denominator that must stay away from zero became too small.
    #[error("degenerate division: {0}")]
    DivisionDegenerate(String),

    /// An input lies outside the operator's domain (e.g. nonzero mean where a
    /// mean-zero function is required).
    #[error("not in range: {0}")]
    NotInRange(String),

    /// A time step violates a stability restriction.
    #[error("invalid timestep: {0}")]
    InvalidTimestep(String),

    /// Writing an output artifact failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
