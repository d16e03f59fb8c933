use serde::{Deserialize, Serialize};

use super::step::ImexStepper;
use crate::diagnostics::monitor::{MonitorParams, MonitorRecord};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{Field, SpectralField};

/// Default overflow guard on `‖uⁿ‖`.
pub const OVERFLOW_GUARD: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub steps: usize,
    /// Store every `stride`-th state as a snapshot.
    pub stride: usize,
    pub strict_guard: bool,
    pub overflow_guard: f64,
    pub record_monitors: bool,
    pub dealias: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        SolverConfig {
            dt,
            steps,
            stride: 1,
            strict_guard: false,
            overflow_guard: OVERFLOW_GUARD,
            record_monitors: true,
            dealias: false,
        }
    }

    /// `N = ⌊T/δt⌋` steps (robust to `T` being a float multiple of `δt`).
    pub fn with_horizon(dt: f64, horizon: f64) -> Self {
        Self::new(dt, steps_for(horizon, dt))
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict_guard = strict;
        self
    }

    pub fn monitors(mut self, on: bool) -> Self {
        self.record_monitors = on;
        self
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::NonPositiveTimeStep(self.dt));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        if !(self.overflow_guard > 0.0) {
            return Err(Error::InvalidParameter("overflow guard must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn stepper(&self, u0: &Field, params: &ModelParams) -> Result<ImexStepper> {
        self.validate()?;
        let s = ImexStepper::new(u0.grid(), params, self.dt, self.strict_guard)?;
        Ok(if self.dealias {
            s.with_two_thirds_dealiasing()
        } else {
            s
        })
    }
}

pub fn steps_for(horizon: f64, dt: f64) -> usize {
    let ratio = horizon / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded as usize
    } else {
        ratio.floor() as usize
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub field: Field,
}

/// Snapshots of an iterated IMEX map plus per-step monitor records.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SolverConfig,
    pub params: ModelParams,
    pub snapshots: Vec<Snapshot>,
    pub monitors: Vec<MonitorRecord>,
    pub monitor_params: Option<MonitorParams>,
    pub final_state: Field,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.config.dt
    }

    pub fn horizon(&self) -> f64 {
        self.config.horizon()
    }

    pub fn initial(&self) -> &Field {
        &self.snapshots[0].field
    }

    pub fn is_full_resolution(&self) -> bool {
        self.config.stride == 1
    }

    /// State `uⁿ`, if stored.
    pub fn state(&self, n: usize) -> Option<&Field> {
        if n % self.config.stride != 0 {
            return (n == self.config.steps).then_some(&self.final_state);
        }
        self.snapshots
            .get(n / self.config.stride)
            .map(|s| &s.field)
            .or_else(|| (n == self.config.steps).then_some(&self.final_state))
    }
}

/// Data handed to a step observer: `uⁿ` and `uⁿ⁺¹` in both representations.
pub struct StepView<'a> {
    pub n: usize,
    pub dt: f64,
    pub u: &'a Field,
    pub coeffs: &'a SpectralField,
    pub next: &'a Field,
    pub next_coeffs: &'a SpectralField,
}

/// Iterates the IMEX map from `u0`.
pub fn run(u0: &Field, params: &ModelParams, cfg: &SolverConfig) -> Result<Trajectory> {
    run_observed(u0, params, cfg, |_| {})
}

/// As [`run`], calling `observer` after every step.
pub fn run_observed(
    u0: &Field,
    params: &ModelParams,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&StepView<'_>),
) -> Result<Trajectory> {
    let stepper = cfg.stepper(u0, params)?;
    if !u0.is_finite() {
        return Err(Error::NonFinite { step: 0 });
    }
    let mp = if cfg.record_monitors {
        Some(MonitorParams::defaults(params, u0.grid())?)
    } else {
        None
    };

    let mut u = u0.clone();
    let mut c = u.forward();
    let mut monitors = Vec::with_capacity(if mp.is_some() { cfg.steps + 1 } else { 0 });
    if let Some(mp) = &mp {
        monitors.push(MonitorRecord::compute(0, 0.0, &u, &c, None, params, mp));
    }
    let mut snapshots = vec![Snapshot {
        step: 0,
        t: 0.0,
        field: u.clone(),
    }];

    for n in 0..cfg.steps {
        let next_c = stepper.step_spectral(&u, &c)?;
        let next = next_c.inverse();
        let t = (n + 1) as f64 * cfg.dt;
        if !next.is_finite() {
            return Err(Error::NonFinite { step: n + 1 });
        }
        let norm = next.l2();
        if norm > cfg.overflow_guard {
            return Err(Error::Overflow { step: n + 1, norm });
        }
        // monitors need the coefficients of uⁿ⁺¹ as transformed from its samples
        let next_c = next.forward();
        observer(&StepView {
            n,
            dt: cfg.dt,
            u: &u,
            coeffs: &c,
            next: &next,
            next_coeffs: &next_c,
        });
        if let Some(mp) = &mp {
            monitors.push(MonitorRecord::compute(n + 1, t, &next, &next_c, Some(&c), params, mp));
        }
        if (n + 1) % cfg.stride == 0 {
            snapshots.push(Snapshot {
                step: n + 1,
                t,
                field: next.clone(),
            });
        }
        u = next;
        c = next_c;
    }

    Ok(Trajectory {
        config: cfg.clone(),
        params: *params,
        snapshots,
        monitors,
        monitor_params: mp,
        final_state: u,
    })
}

/// The three piecewise interpolants of a trajectory at one time.
#[derive(Clone, Debug)]
pub struct Interpolants {
    /// Piecewise-linear `u_δt`.
    pub linear: Field,
    /// Right-constant `ū_δt = uⁿ⁺¹`.
    pub upper: Field,
    /// Left-constant `u̲_δt = uⁿ`.
    pub lower: Field,
}

/// Evaluates the interpolants at `t ∈ [nδt, (n+1)δt)`. At the final time
/// `Nδt` all three equal `u^N`.
pub fn interpolants(traj: &Trajectory, t: f64) -> Result<Interpolants> {
    if !traj.is_full_resolution() {
        return Err(Error::NotFullResolution(traj.config.stride));
    }
    let dt = traj.dt();
    let horizon = traj.horizon();
    let tol = 1e-12 * dt.max(horizon);
    if !(t >= -tol && t <= horizon + tol) {
        return Err(Error::OutOfHorizon { t, horizon });
    }
    let mut n = (t / dt).floor().max(0.0) as usize;
    if (n + 1) as f64 * dt - t <= 1e-12 * dt {
        n += 1;
    }
    let steps = traj.config.steps;
    if n >= steps {
        let last = traj.snapshots[steps].field.clone();
        return Ok(Interpolants {
            linear: last.clone(),
            upper: last.clone(),
            lower: last,
        });
    }
    let lower = &traj.snapshots[n].field;
    let upper = &traj.snapshots[n + 1].field;
    let theta = ((t - n as f64 * dt) / dt).clamp(0.0, 1.0);
    let linear = if theta == 0.0 {
        lower.clone()
    } else {
        let diff = upper - lower;
        lower + &diff.scaled(theta)
    };
    Ok(Interpolants {
        linear,
        upper: upper.clone(),
        lower: lower.clone(),
    })
}
