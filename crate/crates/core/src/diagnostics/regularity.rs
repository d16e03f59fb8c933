//! One-step regularity bounds: `δt‖A²u^{n+1}‖²` and the growth of `‖Δuⁿ‖²`.
//!
//! Writing a step as `u^{n+1} - uⁿ + δt A²u^{n+1} = δt h` with
//! `h = Δf(uⁿ) - g(uⁿ)`, the discrete system satisfies exactly
//!
//! ```text
//! δt‖A²u^{n+1}‖² ≤ 2‖Δuⁿ‖² + 4δt‖h‖²,     ‖Δu^{n+1}‖² ≤ ‖Δuⁿ‖² + δt‖h‖²,
//! ```
//!
//! and in one dimension `‖h‖² ≤ C₀(‖Δuⁿ‖⁴ + 1)` with `C₀` assembled from
//! `sup|f'|`, `sup|f''|`, `‖g‖` and a 1D embedding constant for
//! `‖∇v‖²_{L⁴} ≤ c_{L⁴} ‖Δv‖²`.

use super::certificate::{CertificateReport, SlackLedger};
use crate::error::Result;
use crate::imex::{run_observed, SolverConfig};
use crate::model::ModelParams;
use crate::spectral::{Field, Grid, SpectralField};

/// `c_{L⁴}` in `‖∇v‖²_{L⁴} ≤ c_{L⁴}‖Δv‖²` on an interval of length `L`,
/// from `‖w‖²_∞ ≤ ‖w‖²/L + 2‖w‖‖w'‖` and `‖∇v‖ ≤ λ₁^{-1/2}‖Δv‖`.
pub fn l4_embedding_1d(grid: &Grid) -> Option<f64> {
    if grid.dimension() != 1 {
        return None;
    }
    let (len, l1) = (grid.lengths()[0], grid.lambda1());
    let r = l1.powf(-0.5);
    Some(r * (1.0 / (len * l1) + 2.0 * r).sqrt())
}

/// `C₀` with `‖h‖² ≤ C₀(‖Δu‖⁴ + 1)`, when an embedding constant is known.
pub fn assembled_h_constant(params: &ModelParams, grid: &Grid) -> Option<f64> {
    let c_l4 = l4_embedding_1d(grid)?;
    let a = params.lip_f();
    let b = params.sup_f_second() * c_l4;
    let c = params.g_l2_bound(grid);
    Some(3.0 * (0.5 * a * a + b * b).max(0.5 * a * a + c * c))
}

/// `h = -A f(uⁿ) - g(uⁿ)` in coefficient space.
pub fn explicit_forcing(u: &Field, params: &ModelParams) -> SpectralField {
    let grid = u.grid();
    let f_hat = params.apply_f(u).forward();
    let g_hat = params.has_source().then(|| params.apply_g(u).forward());
    let coeffs = f_hat
        .coeffs()
        .iter()
        .zip(grid.eigenvalues())
        .enumerate()
        .map(|(i, (f, lam))| -lam * f - g_hat.as_ref().map_or(0.0, |g| g.coeffs()[i]))
        .collect();
    SpectralField::new(grid, coeffs).expect("sizes match")
}

/// Checks the one-step bounds along the trajectory from `u0`.
pub fn regularity_check(u0: &Field, params: &ModelParams, cfg: &SolverConfig) -> Result<CertificateReport> {
    let dt = cfg.dt;
    let c0 = assembled_h_constant(params, u0.grid());
    let mut ledger = SlackLedger::new("regularity");
    ledger.constant("dt", dt);
    match c0 {
        Some(c0) => ledger.constant("C", 4.0 * c0),
        None => ledger.note("no embedding constant in this dimension; assembled-C checks skipped"),
    }
    let cfg = cfg.clone().monitors(false);
    let cfg = cfg.clone().stride(cfg.steps.max(1));
    let mut pending = Vec::new();
    run_observed(u0, params, &cfg, |v| {
        let h = explicit_forcing(v.u, params).norm_mean_zero(0.0).powi(2);
        let lap = v.coeffs.norm_mean_zero(1.0).powi(2);
        let lap_next = v.next_coeffs.norm_mean_zero(1.0).powi(2);
        let a2_next = v.next_coeffs.norm_mean_zero(2.0).powi(2);
        pending.push(("a2_sharp", v.n, dt * a2_next, 2.0 * lap + 4.0 * dt * h));
        pending.push(("laplacian_sharp", v.n, lap_next, lap + dt * h));
        if let Some(c0) = c0 {
            let q = lap * lap + 1.0;
            pending.push(("h_bound", v.n, h, c0 * q));
            pending.push(("a2_assembled", v.n, dt * a2_next, 2.0 * lap + 4.0 * c0 * dt * q));
            pending.push(("laplacian_assembled", v.n, lap_next, lap + 4.0 * c0 * dt * q));
        }
    })?;
    for (check, n, lhs, rhs) in pending {
        ledger.check(check, 0, n, lhs, rhs);
    }
    Ok(ledger.finish())
}
