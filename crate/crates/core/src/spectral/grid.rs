use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustdct::{DctPlanner, Dst1, TransformType2And3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary-condition family, which fixes the eigenbasis of `A = -Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// `u = Δu = 0`; basis `sin(κπx/L)`, `κ ≥ 1`, samples at `x_j = j L/(N+1)`.
    DirichletSine,
    /// `∂ₙu = ∂ₙΔu = 0`; basis `cos(κπx/L)`, `κ ≥ 0`, samples at cell centres.
    NeumannCosine,
}

impl BoundaryCondition {
    pub fn tag(self) -> u8 {
        match self {
            BoundaryCondition::DirichletSine => 0,
            BoundaryCondition::NeumannCosine => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(BoundaryCondition::DirichletSine),
            1 => Some(BoundaryCondition::NeumannCosine),
            _ => None,
        }
    }
}

/// Serializable grid descriptor. Two grids are compatible iff their
/// descriptors are equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dimension: usize,
    pub lengths: Vec<f64>,
    pub modes: Vec<usize>,
    pub bc: BoundaryCondition,
}

/// Spectral constants of `A` on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralConstants {
    /// Smallest positive eigenvalue of `A`.
    pub lambda1: f64,
    /// Poincaré constant `λ₁^{-1/2}`: `‖v‖ ≤ c_P ‖∇v‖`.
    pub poincare: f64,
}

impl SpectralConstants {
    /// Embedding constant `‖v‖_{2s₁} ≤ c_S(s₁,s₂) ‖v‖_{2s₂}` for `s₁ ≤ s₂`,
    /// namely `λ₁^{s₁-s₂}`.
    pub fn embedding(&self, s1: f64, s2: f64) -> f64 {
        assert!(s1 <= s2, "embedding constant needs s1 <= s2");
        self.lambda1.powf(s1 - s2)
    }
}

#[derive(Clone)]
pub(crate) enum AxisPlan {
    Sine(Arc<dyn Dst1<f64>>),
    Cosine(Arc<dyn TransformType2And3<f64>>),
}

impl fmt::Debug for AxisPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisPlan::Sine(p) => write!(f, "Sine({})", p.len()),
            AxisPlan::Cosine(p) => write!(f, "Cosine({})", p.len()),
        }
    }
}

/// A rectangular spatial grid together with the eigen-data of `A = -Δ`.
#[derive(Debug)]
pub struct Grid {
    spec: GridSpec,
    shape: Vec<usize>,
    eigenvalues: Vec<f64>,
    coeff_weights: Vec<f64>,
    sample_weight: f64,
    constants: SpectralConstants,
    pub(crate) plans: Vec<AxisPlan>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Grid {
    /// Validates the descriptor and precomputes eigenvalues, quadrature
    /// weights and transform plans.
    pub fn new(
        dimension: usize,
        lengths: &[f64],
        modes: &[usize],
        bc: BoundaryCondition,
    ) -> Result<Arc<Grid>> {
        Self::from_spec(GridSpec {
            dimension,
            lengths: lengths.to_vec(),
            modes: modes.to_vec(),
            bc,
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Arc<Grid>> {
        let d = spec.dimension;
        if !(1..=2).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {d}")));
        }
        if spec.lengths.len() != d || spec.modes.len() != d {
            return Err(Error::InvalidGrid(format!(
                "expected {d} lengths and mode counts, got {} and {}",
                spec.lengths.len(),
                spec.modes.len()
            )));
        }
        if let Some(l) = spec.lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidGrid(format!("lengths must be positive, got {l}")));
        }
        if let Some(n) = spec.modes.iter().find(|n| **n < 2) {
            return Err(Error::InvalidGrid(format!("mode counts must be >= 2, got {n}")));
        }

        let mut planner = DctPlanner::new();
        let mut shape = Vec::with_capacity(d);
        let mut axis_eigs = Vec::with_capacity(d);
        let mut axis_weights = Vec::with_capacity(d);
        let mut plans = Vec::with_capacity(d);
        let mut sample_weight = 1.0;
        for (&len, &n) in spec.lengths.iter().zip(&spec.modes) {
            let (points, first_mode) = match spec.bc {
                BoundaryCondition::DirichletSine => (n, 1),
                BoundaryCondition::NeumannCosine => (n + 1, 0),
            };
            let eig: Vec<f64> = (0..points)
                .map(|i| {
                    let k = (i + first_mode) as f64 * PI / len;
                    k * k
                })
                .collect();
            let weights: Vec<f64> = (0..points)
                .map(|i| if i + first_mode == 0 { len } else { 0.5 * len })
                .collect();
            match spec.bc {
                BoundaryCondition::DirichletSine => {
                    sample_weight *= len / (points + 1) as f64;
                    plans.push(AxisPlan::Sine(planner.plan_dst1(points)));
                }
                BoundaryCondition::NeumannCosine => {
                    sample_weight *= len / points as f64;
                    plans.push(AxisPlan::Cosine(planner.plan_dct2(points)));
                }
            }
            shape.push(points);
            axis_eigs.push(eig);
            axis_weights.push(weights);
        }

        let len: usize = shape.iter().product();
        let mut eigenvalues = Vec::with_capacity(len);
        let mut coeff_weights = Vec::with_capacity(len);
        for flat in 0..len {
            let idx = unflatten(flat, &shape);
            eigenvalues.push(idx.iter().enumerate().map(|(a, &i)| axis_eigs[a][i]).sum());
            coeff_weights.push(idx.iter().enumerate().map(|(a, &i)| axis_weights[a][i]).product());
        }
        let lambda1 = eigenvalues
            .iter()
            .copied()
            .filter(|&l| l > 0.0)
            .fold(f64::INFINITY, f64::min);

        Ok(Arc::new(Grid {
            spec,
            shape,
            eigenvalues,
            coeff_weights,
            sample_weight,
            constants: SpectralConstants {
                lambda1,
                poincare: lambda1.powf(-0.5),
            },
            plans,
        }))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn lengths(&self) -> &[f64] {
        &self.spec.lengths
    }

    pub fn modes(&self) -> &[usize] {
        &self.spec.modes
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.spec.bc
    }

    /// Samples (and coefficients) per axis.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Total degrees of freedom.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalue of `A` for each flattened coefficient index.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `‖φ_κ‖²` for each flattened basis function.
    pub fn coeff_weights(&self) -> &[f64] {
        &self.coeff_weights
    }

    /// Product of the axis spacings; `(u,v) = w Σ u_j v_j` exactly for fields on this grid.
    pub fn sample_weight(&self) -> f64 {
        self.sample_weight
    }

    pub fn constants(&self) -> SpectralConstants {
        self.constants
    }

    pub fn lambda1(&self) -> f64 {
        self.constants.lambda1
    }

    /// `|Ω|`.
    pub fn volume(&self) -> f64 {
        self.spec.lengths.iter().product()
    }

    /// Coordinates of sample point `idx` (one index per axis).
    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(self.spec.lengths.iter().zip(&self.shape))
            .map(|(&j, (&len, &n))| match self.spec.bc {
                BoundaryCondition::DirichletSine => (j + 1) as f64 * len / (n + 1) as f64,
                BoundaryCondition::NeumannCosine => (j as f64 + 0.5) * len / n as f64,
            })
            .collect()
    }

    /// Multi-index (one entry per axis) of a flat storage index.
    pub fn unflatten(&self, flat: usize) -> Vec<usize> {
        unflatten(flat, &self.shape)
    }

    /// Flat storage index of the basis function with wave numbers `kappa`.
    /// Returns `None` if the mode is not represented on this grid.
    pub fn mode_index(&self, kappa: &[usize]) -> Option<usize> {
        if kappa.len() != self.spec.dimension {
            return None;
        }
        let first = match self.spec.bc {
            BoundaryCondition::DirichletSine => 1,
            BoundaryCondition::NeumannCosine => 0,
        };
        let mut flat = 0;
        for (&k, &n) in kappa.iter().zip(&self.shape) {
            if k < first || k - first >= n {
                return None;
            }
            flat = flat * n + (k - first);
        }
        Some(flat)
    }

    /// Flat index of the constant mode, if the basis has one.
    pub fn constant_mode(&self) -> Option<usize> {
        match self.spec.bc {
            BoundaryCondition::DirichletSine => None,
            BoundaryCondition::NeumannCosine => Some(0),
        }
    }

    pub fn compatible(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other) || self.spec == other.spec
    }
}

pub(crate) fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for a in (0..shape.len()).rev() {
        idx[a] = flat % shape[a];
        flat /= shape[a];
    }
    idx
}
