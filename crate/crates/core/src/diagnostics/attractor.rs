//! Desk-scale proxy for the robustness of attractors in `δt`: snapshot
//! clouds of matched ensembles at `δt` and `δt/2` should move closer as `δt`
//! shrinks. The check is qualitative; it does not bound the distance between attractors.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hausdorff::hausdorff_sym;
use crate::error::{Error, Result};
use crate::imex::{random_smooth, run, run_observed, steps_for, SolverConfig};
use crate::model::ModelParams;
use crate::spectral::{Field, Grid};

/// Allowed relative increase between consecutive distances.
pub const NOISE_BAND: f64 = 1.2;

#[derive(Clone, Debug)]
pub struct AttractorSpec {
    pub grid: Arc<Grid>,
    pub params: ModelParams,
    /// Coarsest step; the study uses `dt0 / 2^k` for `k = 0..=levels`.
    pub dt0: f64,
    pub levels: usize,
    pub burn_in: f64,
    pub sample_count: usize,
    pub sample_spacing: f64,
    pub seeds: Vec<u64>,
    /// Second ensemble run at `dt0` to measure sampling noise.
    pub control_seeds: Vec<u64>,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorLevel {
    pub dt: f64,
    pub distance_to_half: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub levels: Vec<AttractorLevel>,
    /// Distance between two independent ensembles at the same `δt`.
    pub control_distance: f64,
    pub noise_band: f64,
    pub pass: bool,
}

fn check_multiple(value: f64, dt: f64, what: &str) -> Result<usize> {
    let n = steps_for(value, dt);
    if (n as f64 * dt - value).abs() > 1e-9 * value.max(dt) {
        return Err(Error::NonNested(format!("{what} {value} is not a multiple of dt = {dt}")));
    }
    Ok(n)
}

/// Post-burn-in snapshots of every seed at step `dt`.
pub fn snapshot_cloud(spec: &AttractorSpec, seeds: &[u64], dt: f64) -> Result<Vec<Field>> {
    if spec.sample_count == 0 {
        return Err(Error::Empty("sample count"));
    }
    let burn = check_multiple(spec.burn_in, dt, "burn-in")?;
    let stride = check_multiple(spec.sample_spacing, dt, "sample spacing")?.max(1);
    let steps = burn + stride * (spec.sample_count - 1);
    let clouds = seeds
        .par_iter()
        .map(|&seed| {
            let u0 = random_smooth(&spec.grid, seed, 2.0, 1.0).scaled_to_norm(0.0, spec.amplitude)?;
            let cfg = SolverConfig::new(dt, steps).monitors(false).stride(stride);
            let traj = run(&u0, &spec.params, &cfg)?;
            Ok(traj
                .snapshots
                .into_iter()
                .filter(|s| s.step >= burn && (s.step - burn) % stride == 0)
                .map(|s| s.field)
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(clouds.into_iter().flatten().collect())
}

pub fn attractor_proxy_study(spec: &AttractorSpec) -> Result<AttractorReport> {
    if spec.levels == 0 {
        return Err(Error::InvalidParameter("at least one level is required".into()));
    }
    let dts: Vec<f64> = (0..=spec.levels).map(|k| spec.dt0 / f64::powi(2.0, k as i32)).collect();
    let clouds = dts
        .iter()
        .map(|&dt| snapshot_cloud(spec, &spec.seeds, dt))
        .collect::<Result<Vec<_>>>()?;
    let levels: Vec<AttractorLevel> = (0..spec.levels)
        .map(|k| {
            Ok(AttractorLevel {
                dt: dts[k],
                distance_to_half: hausdorff_sym(&clouds[k], &clouds[k + 1])?,
            })
        })
        .collect::<Result<_>>()?;
    let control = snapshot_cloud(spec, &spec.control_seeds, spec.dt0)?;
    let control_distance = hausdorff_sym(&clouds[0], &control)?;
    let pass = levels
        .windows(2)
        .all(|w| w[1].distance_to_half <= NOISE_BAND * w[0].distance_to_half);
    Ok(AttractorReport {
        levels,
        control_distance,
        noise_band: NOISE_BAND,
        pass,
    })
}

/// Largest `|(uⁿ, 1) - (u⁰, 1)|` over the trajectory.
pub fn mass_drift(u0: &Field, params: &ModelParams, cfg: &SolverConfig) -> Result<f64> {
    let m0 = u0.mass();
    let mut drift: f64 = 0.0;
    let cfg = cfg.clone().monitors(false);
    let cfg = cfg.clone().stride(cfg.steps.max(1));
    run_observed(u0, params, &cfg, |v| {
        drift = drift.max((v.next.mass() - m0).abs());
    })?;
    Ok(drift)
}
