//! Error types shared across the library.

use thiserror::Error;

/// Errors surfaced by the numeric kernel and the deterministic-equivalent
/// solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A Cholesky factorization failed: the matrix is not Hermitian positive
    /// definite.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// A Hermitian matrix had an eigenvalue below the PSD clamp tolerance.
    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    /// Sign analysis over the search interval found no usable bracket for the
    /// cubic root (zero or multiple sign changes).
    #[error("no unique root bracket in the interval ({sign_changes} sign changes found)")]
    NoRootInInterval { sign_changes: usize },

    /// A fixed-point iteration hit its iteration cap before reaching the
    /// requested tolerance.
    #[error("fixed-point iteration did not converge after {iterations} iterations (last update {last_update:e})")]
    NonConvergence { iterations: u64, last_update: f64 },

    /// A configuration failed structural or semantic validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The transmit correlation and precoder of a transmitter do not share an
    /// eigenbasis, so the per-stream SINR form does not apply.
    #[error("T and Q of transmitter {transmitter} are not co-diagonalizable (commutator norm {commutator_norm:e})")]
    NotCodiagonalizable {
        transmitter: usize,
        commutator_norm: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
