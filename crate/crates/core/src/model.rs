//! The regularised cubic nonlinearity `f_K`, its antiderivative, the symport
//! source term, and the constants derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// Source term `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// `g = 0`: the classical equation.
    None,
    /// `g(s) = k s / (k' + |s|)`.
    Symport { k: f64, k_prime: f64 },
}

/// Potential cutoff `K` and source term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(rename = "K")]
    pub cutoff: f64,
    pub source: Source,
}

impl ModelParams {
    pub fn new(cutoff: f64, source: Source) -> Result<Self> {
        let p = ModelParams { cutoff, source };
        p.validate()?;
        Ok(p)
    }

    pub fn classical(cutoff: f64) -> Result<Self> {
        Self::new(cutoff, Source::None)
    }

    pub fn symport(cutoff: f64, k: f64, k_prime: f64) -> Result<Self> {
        Self::new(cutoff, Source::Symport { k, k_prime })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff >= 1.0 && self.cutoff.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cutoff K must be >= 1, got {}",
                self.cutoff
            )));
        }
        if let Source::Symport { k, k_prime } = self.source {
            if !(k > 0.0 && k.is_finite() && k_prime > 0.0 && k_prime.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "symport needs k > 0 and k' > 0, got ({k}, {k_prime})"
                )));
            }
        }
        Ok(())
    }

    pub fn has_source(&self) -> bool {
        !matches!(self.source, Source::None)
    }

    /// `L_f = sup |f'| = 3K² - 1`.
    pub fn lip_f(&self) -> f64 {
        3.0 * self.cutoff * self.cutoff - 1.0
    }

    /// `sup |f''| = 6K` (attained at the corners from the middle branch).
    pub fn sup_f_second(&self) -> f64 {
        6.0 * self.cutoff
    }

    /// `L_g = k/k'`, zero without a source.
    pub fn lip_g(&self) -> f64 {
        match self.source {
            Source::None => 0.0,
            Source::Symport { k, k_prime } => k / k_prime,
        }
    }

    /// Pointwise bound `sup |g| = k`, zero without a source.
    pub fn c_g(&self) -> f64 {
        match self.source {
            Source::None => 0.0,
            Source::Symport { k, .. } => k,
        }
    }

    /// `L²` bound `‖g(v)‖ ≤ k |Ω|^{1/2}` on a given domain.
    pub fn g_l2_bound(&self, grid: &Grid) -> f64 {
        self.c_g() * grid.volume().sqrt()
    }

    /// Largest step for which the step map is guaranteed Lipschitz in `L²`:
    /// `1/(2 L_g)`, or infinity without a source.
    pub fn dt_guard(&self) -> f64 {
        let lg = self.lip_g();
        if lg == 0.0 {
            f64::INFINITY
        } else {
            0.5 / lg
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        let k = self.cutoff;
        if s > k {
            self.lip_f() * s - 2.0 * k * k * k
        } else if s < -k {
            self.lip_f() * s + 2.0 * k * k * k
        } else {
            s * s * s - s
        }
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        if s.abs() > self.cutoff {
            self.lip_f()
        } else {
            3.0 * s * s - 1.0
        }
    }

    /// `f''`, with the middle-branch value `6s` at the corners `±K`.
    pub fn f_second(&self, s: f64) -> f64 {
        if s.abs() > self.cutoff {
            0.0
        } else {
            6.0 * s
        }
    }

    /// `F(s) = ∫₀ˢ f`.
    pub fn big_f(&self, s: f64) -> f64 {
        let k = self.cutoff;
        let a = s.abs();
        if a <= k {
            let s2 = s * s;
            0.25 * s2 * s2 - 0.5 * s2
        } else {
            let fk = 0.25 * k.powi(4) - 0.5 * k * k;
            fk + 0.5 * self.lip_f() * (a * a - k * k) - 2.0 * k.powi(3) * (a - k)
        }
    }

    pub fn g(&self, s: f64) -> f64 {
        match self.source {
            Source::None => 0.0,
            Source::Symport { k, k_prime } => k * s / (k_prime + s.abs()),
        }
    }

    pub fn g_prime(&self, s: f64) -> f64 {
        match self.source {
            Source::None => 0.0,
            Source::Symport { k, k_prime } => {
                let d = k_prime + s.abs();
                k * k_prime / (d * d)
            }
        }
    }

    pub fn apply_f(&self, u: &Field) -> Field {
        u.map(|s| self.f(s))
    }

    pub fn apply_g(&self, u: &Field) -> Field {
        u.map(|s| self.g(s))
    }

    /// `(F(u), 1)` by the grid quadrature.
    pub fn potential_energy(&self, u: &Field) -> f64 {
        u.grid().sample_weight() * u.values().iter().map(|&s| self.big_f(s)).sum::<f64>()
    }
}

/// Constants of the quadratic bounds
/// `F ≥ γ₁s² - γ₂`, `F ≤ γ₃s² + γ₄`, `f(s)s ≥ γ₅s² - γ₆`, `f' ≥ -γ₇`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipativityConstants {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    pub gamma6: f64,
    pub gamma7: f64,
}

const SCAN_POINTS: usize = 400_001;
const VERIFY_POINTS: usize = 100_001;

impl DissipativityConstants {
    /// Derives constants valid on all of ℝ.
    ///
    /// Slopes are fixed (`γ₁ = L_f/4`, `γ₃ = L_f/2`, `γ₅ = L_f/2`); offsets
    /// come from a scan of `[-K-1, K+1]` padded by a Lipschitz margin, and
    /// from the closed-form maximum of each defect on the affine tails.
    pub fn derive(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let k = p.cutoff;
        let lf = p.lip_f();
        let window = k + 1.0;
        // F(s) = (L_f/2)s² - 2K³|s| + fc for |s| > K
        let fc = p.big_f(k) - 0.5 * lf * k * k + 2.0 * k.powi(4);
        let k3 = 2.0 * k.powi(3);
        let f_bound = lf * window + k3;

        let gamma1 = 0.25 * lf;
        let gamma3 = 0.5 * lf;
        let gamma5 = 0.5 * lf;

        let gamma2 = certified_sup(
            |s| gamma1 * s * s - p.big_f(s),
            2.0 * gamma1 * window + f_bound,
            window,
        )
        .max(quadratic_sup_from(gamma1 - 0.5 * lf, k3, -fc, window)?)
        .max(0.0);

        let gamma4 = certified_sup(
            |s| p.big_f(s) - gamma3 * s * s,
            2.0 * gamma3 * window + f_bound,
            window,
        )
        .max(quadratic_sup_from(0.5 * lf - gamma3, -k3, fc, window)?)
        .max(0.0);

        let gamma6 = certified_sup(
            |s| gamma5 * s * s - p.f(s) * s,
            2.0 * gamma5 * window + lf * window + f_bound,
            window,
        )
        .max(quadratic_sup_from(gamma5 - lf, k3, 0.0, window)?)
        .max(0.0);

        // min f' = f'(0) = -1 on the cubic branch; the tails have slope L_f > 0.
        let gamma7 = certified_sup(|s| -p.f_prime(s), 6.0 * k, window).max(0.0);

        let c = DissipativityConstants {
            gamma1,
            gamma2,
            gamma3,
            gamma4,
            gamma5,
            gamma6,
            gamma7,
        };
        let worst = c.worst_violation(p, 10.0 * window, VERIFY_POINTS);
        if worst > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "derived constants violated by {worst:e} on re-verification"
            )));
        }
        Ok(c)
    }

    /// Largest violation of any of the four inequalities on a uniform
    /// sample of `[-half_width, half_width]`; `<= 0` means all hold.
    pub fn worst_violation(&self, p: &ModelParams, half_width: f64, points: usize) -> f64 {
        let h = 2.0 * half_width / (points - 1) as f64;
        (0..points)
            .map(|i| {
                let s = -half_width + i as f64 * h;
                let big_f = p.big_f(s);
                [
                    self.gamma1 * s * s - self.gamma2 - big_f,
                    big_f - self.gamma3 * s * s - self.gamma4,
                    self.gamma5 * s * s - self.gamma6 - p.f(s) * s,
                    -self.gamma7 - p.f_prime(s),
                ]
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Upper bound for `sup φ` on `[-w, w]` from a uniform scan: the sampled
/// maximum plus `lip · h / 2`.
fn certified_sup(phi: impl Fn(f64) -> f64, lip: f64, w: f64) -> f64 {
    let h = 2.0 * w / (SCAN_POINTS - 1) as f64;
    let max = (0..SCAN_POINTS)
        .map(|i| phi(-w + i as f64 * h))
        .fold(f64::NEG_INFINITY, f64::max);
    max + 0.5 * lip * h
}

/// `sup_{s ≥ s0} (a s² + b s + c)`, or an error if unbounded.
fn quadratic_sup_from(a: f64, b: f64, c: f64, s0: f64) -> Result<f64> {
    let q = |s: f64| (a * s + b) * s + c;
    if a < 0.0 {
        let vertex = -b / (2.0 * a);
        Ok(q(vertex.max(s0)))
    } else if a == 0.0 && b <= 0.0 {
        Ok(q(s0))
    } else {
        Err(Error::InvalidParameter(
            "tail defect is unbounded above".into(),
        ))
    }
}
