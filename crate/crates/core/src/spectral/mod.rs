//! Exact spectral representation of `A = -Δ` on a rectangle.

mod field;
mod grid;
mod transform;

pub use field::{forward_batch, inverse_batch, Field, SpectralField};
pub use grid::{BoundaryCondition, Grid, GridSpec, SpectralConstants};

#[cfg(test)]
mod tests;
