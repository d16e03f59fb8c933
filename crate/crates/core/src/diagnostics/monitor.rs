use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{DissipativityConstants, ModelParams};
use crate::spectral::{Field, Grid, SpectralField};

/// Weights used in the monitored functionals `E₁` and `Ẽ₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma2: f64,
}

impl MonitorParams {
    /// `α = min(1, γ₅)/2` and the largest `β ≤ 1` with `β L_f² c_P² ≤ 1`.
    pub fn defaults(params: &ModelParams, grid: &Grid) -> Result<Self> {
        let c = DissipativityConstants::derive(params)?;
        let lf = params.lip_f();
        Ok(MonitorParams {
            alpha: 0.5 * c.gamma5.min(1.0),
            beta: (grid.lambda1() / (lf * lf)).min(1.0),
            gamma2: c.gamma2,
        })
    }
}

/// Norms and energies of one state, plus increments from the previous one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub step: usize,
    pub t: f64,
    /// `‖u‖`
    pub l2: f64,
    /// `‖∇u‖`
    pub h1: f64,
    /// `‖Δu‖`
    pub h2: f64,
    /// `‖u‖_{-1}` (mean-zero part on cosine grids)
    pub hm1: f64,
    /// `α‖u‖² + ‖u‖²_{-1}`
    pub e1: f64,
    /// `E₁ + β‖∇u‖² + 2β(F(u) + γ₂, 1)`
    pub e2_tilde: f64,
    /// `½‖∇u‖² + (F(u), 1)`
    pub lyapunov: f64,
    /// `‖uⁿ - uⁿ⁻¹‖`, zero at the first record
    pub d_l2: f64,
    /// `‖Δ(uⁿ - uⁿ⁻¹)‖`
    pub d_h2: f64,
    /// `‖uⁿ - uⁿ⁻¹‖_{-1}`
    pub d_hm1: f64,
}

pub const CSV_HEADER: &str = "t,L2,H1,H2,Hm1,E1,E2tilde,lyapunov,d_l2,d_h2,d_hm1";

impl MonitorRecord {
    pub fn compute(
        step: usize,
        t: f64,
        u: &Field,
        coeffs: &SpectralField,
        prev: Option<&SpectralField>,
        params: &ModelParams,
        mp: &MonitorParams,
    ) -> Self {
        let l2 = coeffs.norm_mean_zero(0.0);
        let h1 = coeffs.norm_mean_zero(0.5);
        let h2 = coeffs.norm_mean_zero(1.0);
        let hm1 = coeffs.norm_mean_zero(-0.5);
        let potential = params.potential_energy(u);
        let e1 = mp.alpha * l2 * l2 + hm1 * hm1;
        let e2_tilde = e1
            + mp.beta * h1 * h1
            + 2.0 * mp.beta * (potential + mp.gamma2 * u.grid().volume());
        let (d_l2, d_h2, d_hm1) = match prev {
            Some(p) => {
                let d = coeffs - p;
                (
                    d.norm_mean_zero(0.0),
                    d.norm_mean_zero(1.0),
                    d.norm_mean_zero(-0.5),
                )
            }
            None => (0.0, 0.0, 0.0),
        };
        MonitorRecord {
            step,
            t,
            l2,
            h1,
            h2,
            hm1,
            e1,
            e2_tilde,
            lyapunov: 0.5 * h1 * h1 + potential,
            d_l2,
            d_h2,
            d_hm1,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.l2,
            self.h1,
            self.h2,
            self.hm1,
            self.e1,
            self.e2_tilde,
            self.lyapunov,
            self.d_l2,
            self.d_h2,
            self.d_hm1
        )
    }
}

/// Renders monitor records as CSV with the fixed column order.
pub fn to_csv(records: &[MonitorRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 200);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
