//! Fixtures shared by the benches.

use std::sync::Arc;

use chimex::imex::random_smooth;
use chimex::{BoundaryCondition, Field, Grid};

pub fn line(n: usize) -> Arc<Grid> {
    Grid::new(1, &[5.0], &[n], BoundaryCondition::DirichletSine).expect("valid grid")
}

pub fn square(n: usize) -> Arc<Grid> {
    Grid::new(2, &[1.0, 1.0], &[n, n], BoundaryCondition::DirichletSine).expect("valid grid")
}

/// `count` smooth random fields on `grid`, seeded from `seed`.
pub fn cloud(grid: &Arc<Grid>, count: usize, seed: u64) -> Vec<Field> {
    (0..count as u64).map(|i| random_smooth(grid, seed + i, 2.0, 1.0)).collect()
}
