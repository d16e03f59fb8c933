//! Sine-spectral IMEX simulation of the Cahn–Hilliard equation with a source
//! term, and an empirical harness for its dissipative estimates.

pub mod diagnostics;
pub mod error;
pub mod imex;
pub mod model;
pub mod spectral;

pub use error::{Error, Result};
pub use imex::{imex_step, run, ImexStepper, InitialCondition, SolverConfig, Trajectory};
pub use model::{DissipativityConstants, ModelParams, Source};
pub use spectral::{BoundaryCondition, Field, Grid, GridSpec, SpectralConstants, SpectralField};
