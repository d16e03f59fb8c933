//! Fitted dissipative estimates in `L²`, `H¹` and `H²`.
//!
//! Constants are fitted on one ensemble and then checked on it and on a
//! held-out ensemble: `M` is the tail supremum with 10% headroom, `ε` half the
//! slowest transient decay rate, and `C` the largest ratio needed, with
//! headroom.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::{CertificateReport, ManifestEntry, SlackLedger};
use super::fit::{tail_sup, transient_rate};
use super::monitor::MonitorRecord;
use crate::error::{Error, Result};
use crate::imex::{random_smooth, run, SolverConfig};
use crate::model::ModelParams;
use crate::spectral::Grid;

/// Headroom applied to the tail bound `M`.
pub const TAIL_HEADROOM: f64 = 1.1;
/// Headroom applied to fitted multiplicative constants.
pub const RATIO_HEADROOM: f64 = 1.25;
/// Tail bounds of different initial magnitudes may differ by this factor.
pub const UNIFORMITY_BAND: f64 = 1.1;
/// Fraction of the horizon treated as the tail.
pub const TAIL_FRACTION: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormLevel {
    L2,
    H1,
    H2,
}

impl NormLevel {
    /// Power `s` with `‖A^s u‖` the norm of this level.
    pub fn exponent(self) -> f64 {
        match self {
            NormLevel::L2 => 0.0,
            NormLevel::H1 => 0.5,
            NormLevel::H2 => 1.0,
        }
    }

    pub fn default_magnitudes(self) -> Vec<f64> {
        match self {
            NormLevel::L2 | NormLevel::H1 => vec![1.0, 10.0, 100.0],
            NormLevel::H2 => vec![1.0, 5.0, 25.0],
        }
    }

    fn id(self) -> &'static str {
        match self {
            NormLevel::L2 => "dissipative_l2",
            NormLevel::H1 => "dissipative_h1",
            NormLevel::H2 => "dissipative_h2",
        }
    }

    fn value(self, r: &MonitorRecord) -> f64 {
        match self {
            NormLevel::L2 => r.l2 * r.l2,
            NormLevel::H1 => r.h1 * r.h1,
            NormLevel::H2 => r.h2 * r.h2,
        }
    }

    /// The summed quantity paired with each level: `δtΣ‖Δu^{k+1}‖²`,
    /// `δtΣ‖u^{k+1} - u^k‖²_{-1}` and `Σ‖Δ(u^{k+1} - u^k)‖²`.
    fn increment(self, r: &MonitorRecord, dt: f64) -> f64 {
        match self {
            NormLevel::L2 => dt * r.h2 * r.h2,
            NormLevel::H1 => dt * r.d_hm1 * r.d_hm1,
            NormLevel::H2 => r.d_h2 * r.d_h2,
        }
    }

    /// Whether the summed bound grows like `nδt·M'` (otherwise it is a
    /// constant `M'`).
    fn sum_grows(self) -> bool {
        !matches!(self, NormLevel::H1)
    }

    /// The initial-data factor multiplying `C`: `‖A^s u⁰‖²`, or
    /// `1 + ‖Δu⁰‖⁴` for the quartic `Q₂` at `H²`.
    fn initial_factor(self, r: &MonitorRecord) -> f64 {
        match self {
            NormLevel::H2 => 1.0 + r.h2.powi(4),
            _ => self.value(r),
        }
    }
}

/// Parameters of a dissipativity ensemble.
#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub grid: Arc<Grid>,
    pub params: ModelParams,
    pub dt: f64,
    pub horizon: f64,
    pub level: NormLevel,
    pub magnitudes: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Spectral decay rate of the random initial data.
    pub decay: f64,
}

/// One trajectory of an ensemble, reduced to its monitor series.
#[derive(Clone, Debug)]
pub struct EnsembleMember {
    pub seed: u64,
    pub magnitude: f64,
    pub dt: f64,
    pub monitors: Vec<MonitorRecord>,
}

impl EnsembleMember {
    fn manifest(&self, label: &str) -> ManifestEntry {
        ManifestEntry {
            label: label.to_string(),
            seed: self.seed,
            magnitude: self.magnitude,
            dt: self.dt,
            steps: self.monitors.len().saturating_sub(1),
        }
    }
}

/// Runs one trajectory per (seed, magnitude), in parallel. Initial data are
/// random smooth fields rescaled so that `‖A^s u⁰‖` equals the magnitude.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<Vec<EnsembleMember>> {
    let cfg = SolverConfig::with_horizon(spec.dt, spec.horizon);
    let cfg = cfg.clone().stride(cfg.steps.max(1));
    let jobs: Vec<(u64, f64)> = spec
        .seeds
        .iter()
        .flat_map(|&s| spec.magnitudes.iter().map(move |&m| (s, m)))
        .collect();
    jobs.par_iter()
        .map(|&(seed, magnitude)| {
            let u0 = random_smooth(&spec.grid, seed, spec.decay, 1.0)
                .scaled_to_norm(spec.level.exponent(), magnitude)?;
            let traj = run(&u0, &spec.params, &cfg)?;
            Ok(EnsembleMember {
                seed,
                magnitude,
                dt: spec.dt,
                monitors: traj.monitors,
            })
        })
        .collect()
}

/// Constants fitted for one norm level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipativeFit {
    pub level: NormLevel,
    pub epsilon: f64,
    pub c: f64,
    pub m: f64,
    pub c_sum: f64,
    pub m_sum: f64,
    /// `(magnitude, tail supremum)` per initial magnitude.
    pub tail_sups: Vec<(f64, f64)>,
}

struct Series {
    t: Vec<f64>,
    y: Vec<f64>,
    sum: Vec<f64>,
    x: f64,
}

fn series(level: NormLevel, m: &EnsembleMember) -> Result<Series> {
    let first = m.monitors.first().ok_or(Error::Empty("monitor series"))?;
    let mut acc = 0.0;
    let sum = m
        .monitors
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if i > 0 {
                acc += level.increment(r, m.dt);
            }
            acc
        })
        .collect();
    Ok(Series {
        t: m.monitors.iter().map(|r| r.t).collect(),
        y: m.monitors.iter().map(|r| level.value(r)).collect(),
        sum,
        x: level.initial_factor(first),
    })
}

/// Fits the constants of one level on `members`.
pub fn fit_dissipative(level: NormLevel, members: &[EnsembleMember]) -> Result<DissipativeFit> {
    if members.is_empty() {
        return Err(Error::Empty("ensemble"));
    }
    let data = members
        .iter()
        .map(|m| series(level, m))
        .collect::<Result<Vec<_>>>()?;
    let horizon = data.iter().map(|s| *s.t.last().unwrap()).fold(0.0, f64::max);
    let t_tail = (1.0 - TAIL_FRACTION) * horizon;

    let mut tail_sups: Vec<(f64, f64)> = Vec::new();
    for (m, s) in members.iter().zip(&data) {
        let sup = tail_sup(&s.t, &s.y, t_tail);
        match tail_sups.iter_mut().find(|(mag, _)| *mag == m.magnitude) {
            Some(entry) => entry.1 = entry.1.max(sup),
            None => tail_sups.push((m.magnitude, sup)),
        }
    }
    tail_sups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = TAIL_HEADROOM * tail_sups.iter().map(|e| e.1).fold(0.0, f64::max);

    let rates: Vec<f64> = data
        .iter()
        .filter_map(|s| transient_rate(&s.t, &s.y, m, 1e-3))
        .collect();
    let epsilon = if rates.is_empty() {
        1.0
    } else {
        0.5 * rates.iter().copied().fold(f64::INFINITY, f64::min)
    };

    let mut c: f64 = 0.0;
    for s in &data {
        if s.x <= 0.0 {
            continue;
        }
        for (t, y) in s.t.iter().zip(&s.y) {
            c = c.max((y - m).max(0.0) / (s.x * (-epsilon * t).exp()));
        }
    }
    c *= RATIO_HEADROOM;

    let m_sum = if level.sum_grows() {
        let mut slope: f64 = 0.0;
        for s in &data {
            let n = s.t.len() - 1;
            let k = s.t.iter().position(|&t| t >= t_tail).unwrap_or(n);
            if n > k {
                slope = slope.max((s.sum[n] - s.sum[k]) / (s.t[n] - s.t[k]));
            }
        }
        RATIO_HEADROOM * slope
    } else {
        let x_min = data.iter().map(|s| s.x).fold(f64::INFINITY, f64::min);
        RATIO_HEADROOM
            * data
                .iter()
                .filter(|s| s.x == x_min)
                .map(|s| *s.sum.last().unwrap())
                .fold(0.0, f64::max)
    };
    let phi = |t: f64| if level.sum_grows() { t } else { 1.0 };
    let mut c_sum: f64 = 0.0;
    for s in &data {
        if s.x <= 0.0 {
            continue;
        }
        for (t, v) in s.t.iter().zip(&s.sum) {
            c_sum = c_sum.max((v - m_sum * phi(*t)).max(0.0) / s.x);
        }
    }
    c_sum *= RATIO_HEADROOM;
    if level == NormLevel::H2 {
        // both H² bounds share the same Q₂
        c = c.max(c_sum);
        c_sum = c;
    }

    Ok(DissipativeFit {
        level,
        epsilon,
        c,
        m,
        c_sum,
        m_sum,
        tail_sups,
    })
}

/// Checks a fit on the given members, appending to `ledger`.
fn check_members(
    fit: &DissipativeFit,
    members: &[EnsembleMember],
    label: &str,
    offset: usize,
    ledger: &mut SlackLedger,
) -> Result<()> {
    let level = fit.level;
    for (i, member) in members.iter().enumerate() {
        let s = series(level, member)?;
        ledger.manifest(member.manifest(label));
        for (n, t) in s.t.iter().enumerate() {
            let rhs = fit.c * s.x * (-fit.epsilon * t).exp() + fit.m;
            ledger.check("decay", offset + i, n, s.y[n], rhs);
            let growth = if level.sum_grows() { *t } else { 1.0 };
            let rhs = fit.c_sum * s.x + fit.m_sum * growth;
            ledger.check("sum", offset + i, n, s.sum[n], rhs);
        }
    }
    Ok(())
}

/// Fits on `fit_set` and certifies both sets. Structural requirements
/// (`ε > 0` and tail bounds uniform across magnitudes within 10%) enter as
/// additional slack samples.
pub fn certify_dissipative(
    level: NormLevel,
    fit_set: &[EnsembleMember],
    verify_set: &[EnsembleMember],
) -> Result<CertificateReport> {
    let fit = fit_dissipative(level, fit_set)?;
    let mut ledger = SlackLedger::new(level.id());
    let (c_name, m_name, e_name, cs_name, ms_name) = match level {
        NormLevel::L2 => ("C0", "M0", "eps0", "C0_prime", "M0_prime"),
        NormLevel::H1 => ("C1", "M1", "eps1", "C1_prime", "M1_prime"),
        NormLevel::H2 => ("Q2_coefficient", "M2", "eps2", "Q2_coefficient_sum", "M2_prime"),
    };
    ledger.constant(e_name, fit.epsilon);
    ledger.constant(c_name, fit.c);
    ledger.constant(m_name, fit.m);
    ledger.constant(cs_name, fit.c_sum);
    ledger.constant(ms_name, fit.m_sum);
    for (mag, sup) in &fit.tail_sups {
        ledger.constant(&format!("tail_sup@{mag}"), *sup);
    }
    if level == NormLevel::H2 {
        ledger.note("Q2(x) = c (1 + x^4)");
    }

    ledger.check("epsilon_positive", 0, 0, 0.0, fit.epsilon.min(1.0));
    let lo = fit.tail_sups.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let hi = fit.tail_sups.iter().map(|e| e.1).fold(0.0, f64::max);
    ledger.check("tail_uniformity", 0, 0, hi, UNIFORMITY_BAND * lo + 1e-12);
    let mags: Vec<f64> = fit.tail_sups.iter().map(|e| e.0).collect();
    let span = mags.last().unwrap() / mags.first().unwrap();
    ledger.constant("magnitude_span", span);

    check_members(&fit, fit_set, "fit", 0, &mut ledger)?;
    check_members(&fit, verify_set, "verify", fit_set.len(), &mut ledger)?;
    Ok(ledger.finish())
}

pub fn certify_dissipative_l2(
    fit_set: &[EnsembleMember],
    verify_set: &[EnsembleMember],
) -> Result<CertificateReport> {
    certify_dissipative(NormLevel::L2, fit_set, verify_set)
}

pub fn certify_dissipative_h1(
    fit_set: &[EnsembleMember],
    verify_set: &[EnsembleMember],
) -> Result<CertificateReport> {
    certify_dissipative(NormLevel::H1, fit_set, verify_set)
}

pub fn certify_dissipative_h2(
    fit_set: &[EnsembleMember],
    verify_set: &[EnsembleMember],
) -> Result<CertificateReport> {
    certify_dissipative(NormLevel::H2, fit_set, verify_set)
}
