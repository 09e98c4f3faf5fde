//! Error taxonomy shared by every module.
//!
//! The variants deliberately mirror how a front end must react: validation
//! and configuration problems are user-fixable, numerical failures are not,
//! and verification failures mean a self-check found a broken invariant.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A type invariant does not hold (bad covariance, weights off, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Arguments outside an operation's domain (negative λ, y ≥ 1, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed (non-convergence, singularity, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed configuration or input file.
    #[error("config error: {0}")]
    Config(String),

    /// A self-verification check did not pass.
    #[error("verification failure: {0}")]
    Verification(String),

    /// Underlying I/O problem.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code a CLI should use for this error class: 2 for
    /// anything the user can fix by editing inputs, 3 for numerical
    /// failures, 4 for failed self-verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Config(_) | Error::Io(_) | Error::Domain(_) => 2,
            Error::Numerical(_) => 3,
            Error::Verification(_) => 4,
        }
    }
}
