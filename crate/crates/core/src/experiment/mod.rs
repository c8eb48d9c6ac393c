//! Configuration-driven experiment front end: JSON specs, sweep execution,
//! and the reference-figure reproductions.

pub mod figures;
pub mod runner;
pub mod spec;

pub use runner::{reproduce_figure, run_spec, run_spec_to_file, Figure, RunFailure, RunSettings};
pub use spec::{ExperimentSpec, OutputFormat, Units};
