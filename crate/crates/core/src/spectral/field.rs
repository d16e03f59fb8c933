use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use rayon::prelude::*;

use super::grid::Grid;
use super::transform::{transform, Direction};
use crate::error::{Error, Result};

const MEAN_ZERO_TOL: f64 = 1e-12;

/// A state given by its values at the interior sample points of a grid.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

/// A state given by its coefficients in the eigenbasis of `A`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<f64>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.grid.compatible(&other.grid) && self.values == other.values
    }
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.grid.compatible(&other.grid) && self.coeffs == other.coeffs
    }
}

impl Field {
    pub fn new(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Field {
            grid: Arc::clone(grid),
            values,
        })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Field {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `func` at every grid point.
    pub fn from_fn(grid: &Arc<Grid>, func: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|flat| func(&grid.point(&grid.unflatten(flat))))
            .collect();
        Field {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, func: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| func(v)).collect(),
        }
    }

    pub fn forward(&self) -> SpectralField {
        let mut coeffs = self.values.clone();
        transform(&self.grid, &mut coeffs, Direction::Forward);
        SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs,
        }
    }

    /// Exact `L²` inner product (the discrete sum equals the Parseval sum).
    pub fn inner(&self, other: &Field) -> Result<f64> {
        check_grid(&self.grid, &other.grid)?;
        let dot: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(self.grid.sample_weight() * dot)
    }

    /// `‖A^s u‖`.
    pub fn norm(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(self.l2());
        }
        self.forward().norm(s)
    }

    pub fn l2(&self) -> f64 {
        let sq: f64 = self.values.iter().map(|v| v * v).sum();
        (self.grid.sample_weight() * sq).sqrt()
    }

    /// `∫_Ω u`.
    pub fn mass(&self) -> f64 {
        self.grid.sample_weight() * self.values.iter().sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Field {
        self.map(|v| v * factor)
    }

    /// Rescales so that `‖A^s u‖ = target`. A zero field stays zero.
    pub fn scaled_to_norm(&self, s: f64, target: f64) -> Result<Field> {
        let n = self.norm(s)?;
        if n == 0.0 {
            return Ok(self.clone());
        }
        Ok(self.scaled(target / n))
    }
}

impl SpectralField {
    pub fn new(grid: &Arc<Grid>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpectralField {
            grid: Arc::clone(grid),
            coeffs: vec![0.0; grid.len()],
        }
    }

    /// `amplitude · φ_κ`.
    pub fn mode(grid: &Arc<Grid>, kappa: &[usize], amplitude: f64) -> Result<Self> {
        let idx = grid
            .mode_index(kappa)
            .ok_or_else(|| Error::InvalidParameter(format!("mode {kappa:?} not on grid")))?;
        let mut s = Self::zeros(grid);
        s.coeffs[idx] = amplitude;
        Ok(s)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn inverse(&self) -> Field {
        let mut values = self.coeffs.clone();
        transform(&self.grid, &mut values, Direction::Inverse);
        Field {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    /// True if the constant mode is nonzero beyond round-off (relative
    /// to the largest coefficient).
    fn has_constant_mode(&self) -> bool {
        self.grid
            .constant_mode()
            .is_some_and(|i| self.coeffs[i].abs() > MEAN_ZERO_TOL * self.max_abs())
    }

    /// Coefficient-wise multiplication by `λ_κ^s`.
    ///
    /// On a cosine grid the zero eigenvalue maps to zero for `s > 0`; a
    /// negative power requires the constant mode to vanish.
    pub fn apply_power(&self, s: f64) -> Result<SpectralField> {
        if s == 0.0 {
            return Ok(self.clone());
        }
        if s < 0.0 && self.has_constant_mode() {
            return Err(Error::ConstantModeNotInvertible(s));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.grid.eigenvalues())
            .map(|(&c, &lam)| if lam == 0.0 { 0.0 } else { c * lam.powf(s) })
            .collect();
        Ok(SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs,
        })
    }

    /// `‖A^s u‖`.
    pub fn norm(&self, s: f64) -> Result<f64> {
        if s < 0.0 && self.has_constant_mode() {
            return Err(Error::ConstantModeNotInvertible(s));
        }
        Ok(self.norm_sq_unchecked(s).sqrt())
    }

    /// `‖A^s u‖` restricted to the mean-zero part; equals [`Self::norm`]
    /// on sine grids.
    pub fn norm_mean_zero(&self, s: f64) -> f64 {
        self.norm_sq_unchecked(s).sqrt()
    }

    fn norm_sq_unchecked(&self, s: f64) -> f64 {
        let g = &self.grid;
        self.coeffs
            .iter()
            .zip(g.eigenvalues().iter().zip(g.coeff_weights()))
            .map(|(&c, (&lam, &w))| {
                if lam == 0.0 {
                    if s == 0.0 {
                        w * c * c
                    } else {
                        0.0
                    }
                } else {
                    w * c * c * lam.powf(2.0 * s)
                }
            })
            .sum()
    }

    /// Weighted coefficient sum `Σ ‖φ_κ‖² a_κ b_κ`.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        check_grid(&self.grid, &other.grid)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(self.grid.coeff_weights())
            .map(|((a, b), w)| w * a * b)
            .sum())
    }

    /// Solves `(I + δt A²) w = self` mode by mode.
    pub fn solve_implicit(&self, dt: f64) -> Result<SpectralField> {
        if !(dt > 0.0) {
            return Err(Error::NonPositiveTimeStep(dt));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.grid.eigenvalues())
            .map(|(&c, &lam)| c / (1.0 + dt * lam * lam))
            .collect();
        Ok(SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs,
        })
    }

    /// `(I + δt A²) w`.
    pub fn apply_implicit_operator(&self, dt: f64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.grid.eigenvalues())
            .map(|(&c, &lam)| c * (1.0 + dt * lam * lam))
            .collect();
        SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs,
        }
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Forward transforms of many fields; output order matches input order
/// regardless of the number of worker threads.
pub fn forward_batch(fields: &[Field]) -> Vec<SpectralField> {
    fields.par_iter().map(Field::forward).collect()
}

pub fn inverse_batch(specs: &[SpectralField]) -> Vec<Field> {
    specs.par_iter().map(SpectralField::inverse).collect()
}

fn check_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.compatible(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

macro_rules! elementwise_ops {
    ($ty:ident, $data:ident) => {
        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                assert!(self.grid.compatible(&rhs.grid), "grid mismatch");
                $ty {
                    grid: Arc::clone(&self.grid),
                    $data: self.$data.iter().zip(&rhs.$data).map(|(a, b)| a + b).collect(),
                }
            }
        }

        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                assert!(self.grid.compatible(&rhs.grid), "grid mismatch");
                $ty {
                    grid: Arc::clone(&self.grid),
                    $data: self.$data.iter().zip(&rhs.$data).map(|(a, b)| a - b).collect(),
                }
            }
        }

        impl Mul<&$ty> for f64 {
            type Output = $ty;
            fn mul(self, rhs: &$ty) -> $ty {
                rhs.scaled(self)
            }
        }
    };
}

elementwise_ops!(Field, values);
elementwise_ops!(SpectralField, coeffs);
