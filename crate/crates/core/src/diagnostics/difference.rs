//! Growth of differences of two discrete trajectories: the exponential
//! contraction bound and the `L²`–`H¹` smoothing bound.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::certificate::{CertificateReport, SlackLedger};
use super::dissipative::RATIO_HEADROOM;
use crate::error::{Error, Result};
use crate::imex::{random_smooth, ImexStepper};
use crate::model::ModelParams;
use crate::spectral::{Field, Grid};

/// Additive floor on the fitted smoothing rate, so that a fit whose worst
/// case is nearly flat still leaves room for unseen pairs.
pub const SMOOTHING_RATE_FLOOR: f64 = 0.1;

/// `c_{f,g}` in `‖uⁿ‖² + Σ‖u^{k+1} - u^k‖² + δtΣ‖Δu^{k+1}‖² ≤ exp(c nδt)‖u⁰‖²`.
///
/// From `(1 - L_g δt) a_{n+1} + … ≤ (1 + (L_f² + L_g) δt) a_n`, dividing by
/// `1 - L_g δt` gives the rate `(L_f² + 2L_g)/(1 - L_g δt)`.
pub fn contraction_rate(p: &ModelParams, dt: f64) -> f64 {
    let (lf, lg) = (p.lip_f(), p.lip_g());
    (lf * lf + 2.0 * lg) / (1.0 - lg * dt)
}

/// Constant `c_S` with `‖∇v‖² ≤ c_S ‖Δv‖²`, i.e. `1/λ₁`.
pub fn smoothing_embedding(grid: &Grid) -> f64 {
    1.0 / grid.lambda1()
}

/// Per-step quantities of the difference `uⁿ = vⁿ - wⁿ`.
#[derive(Clone, Debug)]
pub struct DifferenceSeries {
    pub dt: f64,
    /// `‖uⁿ‖²`
    pub l2_sq: Vec<f64>,
    /// `‖∇uⁿ‖²`
    pub h1_sq: Vec<f64>,
    /// `Σ_{k<n} ‖u^{k+1} - u^k‖²`
    pub increments: Vec<f64>,
    /// `δt Σ_{k<n} ‖Δu^{k+1}‖²`
    pub laplacian_sum: Vec<f64>,
}

/// Iterates both initial data in lockstep for `steps` steps.
pub fn difference_series(
    v0: &Field,
    w0: &Field,
    params: &ModelParams,
    dt: f64,
    steps: usize,
) -> Result<DifferenceSeries> {
    if !v0.grid().compatible(w0.grid()) {
        return Err(Error::GridMismatch);
    }
    let stepper = ImexStepper::new(v0.grid(), params, dt, true)?;
    let (mut v, mut w) = (v0.clone(), w0.clone());
    let (mut cv, mut cw) = (v.forward(), w.forward());
    let mut d = &cv - &cw;
    let mut s = DifferenceSeries {
        dt,
        l2_sq: vec![d.norm_mean_zero(0.0).powi(2)],
        h1_sq: vec![d.norm_mean_zero(0.5).powi(2)],
        increments: vec![0.0],
        laplacian_sum: vec![0.0],
    };
    for n in 0..steps {
        let nv = stepper.step_spectral(&v, &cv)?.inverse();
        let nw = stepper.step_spectral(&w, &cw)?.inverse();
        if !(nv.is_finite() && nw.is_finite()) {
            return Err(Error::NonFinite { step: n + 1 });
        }
        cv = nv.forward();
        cw = nw.forward();
        let nd = &cv - &cw;
        let inc = (&nd - &d).norm_mean_zero(0.0).powi(2);
        s.l2_sq.push(nd.norm_mean_zero(0.0).powi(2));
        s.h1_sq.push(nd.norm_mean_zero(0.5).powi(2));
        s.increments.push(s.increments[n] + inc);
        s.laplacian_sum
            .push(s.laplacian_sum[n] + dt * nd.norm_mean_zero(1.0).powi(2));
        v = nv;
        w = nw;
        d = nd;
    }
    Ok(s)
}

/// Draws `count` pairs `(v, w)` with `‖A^s v‖ ≤ (1 - separation)·radius` and
/// `‖A^s (v - w)‖ ≤ separation·radius`, so both lie in the ball of the given
/// radius.
pub fn sample_pairs(
    grid: &Arc<Grid>,
    count: usize,
    seed: u64,
    s: f64,
    radius: f64,
    separation: f64,
) -> Result<Vec<(Field, Field)>> {
    if !(separation > 0.0 && separation < 1.0) {
        return Err(Error::InvalidParameter("separation must lie in (0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rho = rng.gen_range(0.2..1.0) * (1.0 - separation) * radius;
            let delta = rng.gen_range(0.1..1.0) * separation * radius;
            let v = random_smooth(grid, rng.gen(), 2.0, 1.0).scaled_to_norm(s, rho)?;
            let p = random_smooth(grid, rng.gen(), 2.0, 1.0).scaled_to_norm(s, delta)?;
            let w = &v + &p;
            Ok((v, w))
        })
        .collect()
}

fn run_pairs(
    pairs: &[(Field, Field)],
    params: &ModelParams,
    dt: f64,
    steps: usize,
) -> Result<Vec<DifferenceSeries>> {
    pairs
        .par_iter()
        .map(|(v, w)| difference_series(v, w, params, dt, steps))
        .collect()
}

/// Checks the exponential difference bound on every pair and step.
pub fn contraction_experiment(
    pairs: &[(Field, Field)],
    params: &ModelParams,
    dt: f64,
    steps: usize,
) -> Result<CertificateReport> {
    let c = contraction_rate(params, dt);
    let runs = run_pairs(pairs, params, dt, steps)?;
    let mut ledger = SlackLedger::new("contraction");
    ledger.constant("c_fg", c);
    ledger.constant("L_f", params.lip_f());
    ledger.constant("L_g", params.lip_g());
    ledger.constant("dt", dt);
    ledger.constant("pairs", pairs.len() as f64);
    for (i, s) in runs.iter().enumerate() {
        for n in 0..s.l2_sq.len() {
            let lhs = s.l2_sq[n] + s.increments[n] + s.laplacian_sum[n];
            let rhs = (c * n as f64 * dt).exp() * s.l2_sq[0];
            ledger.check("difference", i, n, lhs, rhs);
        }
    }
    Ok(ledger.finish())
}

/// Largest rate `c ≥ 0` needed for `nδt‖∇uⁿ‖² ≤ c_S e^{c nδt}‖u⁰‖²` on the
/// given runs, before headroom.
pub fn raw_smoothing_rate(runs: &[DifferenceSeries], c_s: f64) -> f64 {
    let mut c: f64 = 0.0;
    for s in runs {
        if s.l2_sq[0] <= 0.0 {
            continue;
        }
        for n in 1..s.h1_sq.len() {
            let t = n as f64 * s.dt;
            let ratio = t * s.h1_sq[n] / (c_s * s.l2_sq[0]);
            if ratio > 0.0 {
                c = c.max(ratio.ln() / t);
            }
        }
    }
    c
}

/// Fitted `c(R₂)` with headroom.
pub fn fit_smoothing_rate(runs: &[DifferenceSeries], c_s: f64) -> f64 {
    RATIO_HEADROOM * raw_smoothing_rate(runs, c_s) + SMOOTHING_RATE_FLOOR
}

fn check_radius(pairs: &[(Field, Field)], r2: f64) -> Result<()> {
    for (v, w) in pairs {
        for u in [v, w] {
            let n = u.norm(1.0)?;
            if n > r2 * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "initial datum with |Δu| = {n} outside the ball of radius {r2}"
                )));
            }
        }
    }
    Ok(())
}

/// Fits `c(R₂)` once on `calibration` and checks the smoothing bound on
/// `pairs` (and on the calibration pairs).
pub fn smoothing_experiment(
    calibration: &[(Field, Field)],
    pairs: &[(Field, Field)],
    params: &ModelParams,
    dt: f64,
    steps: usize,
    r2: f64,
) -> Result<CertificateReport> {
    check_radius(calibration, r2)?;
    check_radius(pairs, r2)?;
    let grid = calibration
        .first()
        .or(pairs.first())
        .ok_or(Error::Empty("pairs"))?
        .0
        .grid()
        .clone();
    let c_s = smoothing_embedding(&grid);
    let calib = run_pairs(calibration, params, dt, steps)?;
    let c = fit_smoothing_rate(&calib, c_s);
    let runs = run_pairs(pairs, params, dt, steps)?;

    let mut ledger = SlackLedger::new("smoothing");
    ledger.constant("R2", r2);
    ledger.constant("c_R2", c);
    ledger.constant("c_S", c_s);
    ledger.constant("dt", dt);
    ledger.constant("pairs", pairs.len() as f64);
    ledger.constant("calibration_pairs", calibration.len() as f64);
    for (i, s) in runs.iter().chain(&calib).enumerate() {
        for n in 0..s.h1_sq.len() {
            let t = n as f64 * dt;
            let lhs = t * s.h1_sq[n];
            let rhs = c_s * (c * t).exp() * s.l2_sq[0];
            ledger.check("smoothing", i, n, lhs, rhs);
        }
    }
    Ok(ledger.finish())
}

/// `c(R)` for each radius, fitted on the calibration pairs lying in that
/// ball, so the map is nondecreasing in `R` by construction of the pools.
pub fn smoothing_rate_sweep(
    pools: &[(f64, Vec<(Field, Field)>)],
    params: &ModelParams,
    dt: f64,
    steps: usize,
) -> Result<Vec<(f64, f64)>> {
    let mut radii: Vec<f64> = pools.iter().map(|p| p.0).collect();
    radii.sort_by(f64::total_cmp);
    let mut runs: Vec<(f64, DifferenceSeries)> = Vec::new();
    let mut c_s = None;
    for (r, pairs) in pools {
        check_radius(pairs, *r)?;
        if let Some((v, _)) = pairs.first() {
            c_s.get_or_insert_with(|| smoothing_embedding(v.grid()));
        }
        for s in run_pairs(pairs, params, dt, steps)? {
            runs.push((*r, s));
        }
    }
    let c_s = c_s.ok_or(Error::Empty("pairs"))?;
    Ok(radii
        .into_iter()
        .map(|r| {
            let inside: Vec<DifferenceSeries> = runs
                .iter()
                .filter(|(pr, _)| *pr <= r)
                .map(|(_, s)| s.clone())
                .collect();
            (r, fit_smoothing_rate(&inside, c_s))
        })
        .collect())
}
