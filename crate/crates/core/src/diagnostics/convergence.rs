//! Finite-time error of the scheme against a fine-step reference run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::least_squares;
use crate::error::{Error, Result};
use crate::imex::{run, run_observed, steps_for, SolverConfig};
use crate::model::ModelParams;
use crate::spectral::Field;

/// Acceptance threshold on the fitted order.
pub const MIN_ORDER: f64 = 0.45;
/// Smallest allowed ratio between a tested step and the reference step.
pub const MIN_REFERENCE_RATIO: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub steps: usize,
    /// `max_n ‖uⁿ - u_ref(nδt)‖` over the shared times.
    pub sup_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub horizon: f64,
    pub dt_ref: f64,
    pub reference_stride: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln e` against `ln δt`.
    pub order: Option<f64>,
    pub strictly_decreasing: bool,
    /// Estimated reference error `e_min (δt_ref/δt_min)^order`.
    pub reference_error_estimate: Option<f64>,
    pub reference_converged: bool,
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dt,sup_error\n");
        for r in &self.rows {
            out.push_str(&format!("{:e},{:e}\n", r.dt, r.sup_error));
        }
        out
    }
}

fn ratio(dt: f64, dt_ref: f64) -> Result<usize> {
    let r = dt / dt_ref;
    let k = r.round();
    if k < 1.0 || (r - k).abs() > 1e-9 * r {
        return Err(Error::NonNested(format!(
            "dt = {dt} is not an integer multiple of dt_ref = {dt_ref}"
        )));
    }
    Ok(k as usize)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Runs every `δt` in `dt_list` and the reference, and compares them at the
/// shared times `nδt ≤ T`. Entries equal to `dt_ref` compare the reference
/// with itself (error zero) and are left out of the fit.
///
/// `reference_stride` (default: the gcd of all step ratios) must divide
/// every ratio so that each coarse node is a stored reference time.
pub fn convergence_study(
    u0: &Field,
    params: &ModelParams,
    horizon: f64,
    dt_list: &[f64],
    dt_ref: f64,
    reference_stride: Option<usize>,
) -> Result<ConvergenceReport> {
    if dt_list.is_empty() {
        return Err(Error::Empty("dt list"));
    }
    if !(dt_ref > 0.0) {
        return Err(Error::NonPositiveTimeStep(dt_ref));
    }
    let ratios = dt_list
        .iter()
        .map(|&dt| ratio(dt, dt_ref))
        .collect::<Result<Vec<_>>>()?;
    if let Some(r) = ratios.iter().find(|&&r| r != 1 && r < MIN_REFERENCE_RATIO) {
        return Err(Error::InvalidParameter(format!(
            "dt_ref must be at most min(dt)/{MIN_REFERENCE_RATIO}; got ratio {r}"
        )));
    }
    let stride = match reference_stride {
        Some(s) => s,
        None => ratios.iter().copied().fold(0, gcd),
    };
    if stride == 0 || ratios.iter().any(|r| r % stride != 0) {
        return Err(Error::NonNested(format!(
            "reference stride {stride} does not divide every step ratio"
        )));
    }
    let steps: Vec<usize> = dt_list.iter().map(|&dt| steps_for(horizon, dt)).collect();
    let ref_steps = steps.iter().zip(&ratios).map(|(n, r)| n * r).max().unwrap();
    let reference = run(
        u0,
        params,
        &SolverConfig::new(dt_ref, ref_steps).stride(stride).monitors(false),
    )?;
    let ref_at = |k: usize| &reference.snapshots[k / stride].field;

    let rows = dt_list
        .par_iter()
        .zip(&steps)
        .zip(&ratios)
        .map(|((&dt, &n), &r)| {
            let mut err: f64 = (u0 - ref_at(0)).l2();
            if r == 1 {
                return Ok(ConvergenceRow {
                    dt,
                    steps: n,
                    sup_error: 0.0,
                });
            }
            let cfg = SolverConfig::new(dt, n).stride(n.max(1)).monitors(false);
            run_observed(u0, params, &cfg, |v| {
                err = err.max((v.next - ref_at((v.n + 1) * r)).l2());
            })?;
            Ok(ConvergenceRow {
                dt,
                steps: n,
                sup_error: err,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut tested: Vec<&ConvergenceRow> = rows
        .iter()
        .zip(&ratios)
        .filter(|(_, &r)| r != 1)
        .map(|(row, _)| row)
        .collect();
    tested.sort_by(|a, b| b.dt.total_cmp(&a.dt));
    let strictly_decreasing = tested.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
    let usable: Vec<&&ConvergenceRow> = tested.iter().filter(|r| r.sup_error > 0.0).collect();
    let order = least_squares(
        &usable.iter().map(|r| r.dt.ln()).collect::<Vec<_>>(),
        &usable.iter().map(|r| r.sup_error.ln()).collect::<Vec<_>>(),
    )
    .map(|(slope, _)| slope);
    let finest = tested.last();
    let reference_error_estimate = match (order, finest) {
        (Some(p), Some(row)) => Some(row.sup_error * (dt_ref / row.dt).powf(p)),
        _ => None,
    };
    let reference_converged = match (reference_error_estimate, finest) {
        (Some(est), Some(row)) => row.sup_error >= 10.0 * est,
        _ => false,
    };
    let pass = order.map_or(false, |p| p >= MIN_ORDER) && strictly_decreasing && reference_converged;
    Ok(ConvergenceReport {
        horizon,
        dt_ref,
        reference_stride: stride,
        rows,
        order,
        strictly_decreasing,
        reference_error_estimate,
        reference_converged,
        pass,
    })
}
