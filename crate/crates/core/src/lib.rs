//! Iterative deterministic equivalents for two random-matrix channel models
//! — the multi-hop amplify-and-forward MIMO relay chain and the
//! double-scattering MIMO multiple-access channel — together with a
//! seedable Monte Carlo oracle that simulates the exact random channels and
//! validates every approximation statistically.
//!
//! Crate layout:
//! - [`matrix`], [`rng`], [`linalg`], [`roots`]: the numeric kernel (dense
//!   complex matrices, ChaCha8-seeded Gaussian sampling, Hermitian
//!   factorizations, bracketed root finding).
//! - [`relay`]: recursive deterministic equivalents of the relay chain's
//!   per-hop mutual information.
//! - [`mac`]: the 3K fundamental equations of the double-scattering MAC and
//!   everything built on them (mutual information, MMSE SINR, sum-rate,
//!   iterative water-filling, Rayleigh-product closed forms, Kronecker
//!   cross-check).
//! - [`sim`]: exact channel sampling and ergodic Monte Carlo averaging.
//! - [`experiment`]: the JSON-spec driven CLI front end.

pub mod error;
pub mod experiment;
pub mod linalg;
pub mod mac;
pub mod matrix;
pub mod relay;
pub mod rng;
pub mod roots;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use rng::SimRng;
pub use solver::SolverOptions;
