//! Shared fixed-point solver knobs.

/// Tolerances and caps for the fixed-point iterations. The step tolerance is
/// deliberately tighter than the 1e-10 residual contract so converged values
/// satisfy their defining equations with margin.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Absolute tolerance on the largest componentwise update per sweep.
    pub tol: f64,
    /// Iteration cap per fixed point.
    pub max_iter: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}
