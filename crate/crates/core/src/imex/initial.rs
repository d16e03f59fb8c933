use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::snapshot::read_snapshot;
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, SpectralField};

/// Recipes for initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `amplitude · φ_κ`.
    SingleMode { mode: Vec<usize>, amplitude: f64 },
    /// Coefficients `amplitude · (λ_κ/λ₁)^{-decay} · ξ_κ` with i.i.d. standard
    /// normal `ξ_κ`. `decay ≥ 2` keeps the state in `D(A)` uniformly in `N`.
    RandomSmooth {
        seed: u64,
        #[serde(default = "default_decay")]
        decay: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// A snapshot file written by [`super::write_snapshot`].
    FromFile { path: PathBuf },
}

fn default_decay() -> f64 {
    2.0
}

fn default_amplitude() -> f64 {
    1.0
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialCondition::RandomSmooth { decay, amplitude, .. } => {
                if !(*decay >= 2.0) {
                    return Err(Error::InvalidParameter(format!(
                        "random_smooth decay must be >= 2 so that u0 lies in D(A), got {decay}"
                    )));
                }
                if !amplitude.is_finite() {
                    return Err(Error::InvalidParameter("amplitude must be finite".into()));
                }
                Ok(())
            }
            InitialCondition::SingleMode { amplitude, .. } if !amplitude.is_finite() => {
                Err(Error::InvalidParameter("amplitude must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Builds the initial field on `grid`.
pub fn make_initial(kind: &InitialCondition, grid: &Arc<Grid>) -> Result<Field> {
    kind.validate()?;
    match kind {
        InitialCondition::SingleMode { mode, amplitude } => {
            Ok(SpectralField::mode(grid, mode, *amplitude)?.inverse())
        }
        InitialCondition::RandomSmooth {
            seed,
            decay,
            amplitude,
        } => Ok(random_smooth(grid, *seed, *decay, *amplitude)),
        InitialCondition::FromFile { path } => {
            let field = read_snapshot(path)?;
            if !field.grid().compatible(grid) {
                return Err(Error::GridMismatch);
            }
            Ok(Field::new(grid, field.into_values())?)
        }
    }
}

pub fn random_smooth(grid: &Arc<Grid>, seed: u64, decay: f64, amplitude: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l1 = grid.lambda1();
    let coeffs = grid
        .eigenvalues()
        .iter()
        .map(|&lam| {
            let xi: f64 = StandardNormal.sample(&mut rng);
            let scale = if lam == 0.0 { 1.0 } else { (lam / l1).powf(-decay) };
            amplitude * scale * xi
        })
        .collect();
    SpectralField::new(grid, coeffs)
        .expect("coefficient count matches grid")
        .inverse()
}
