use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::certificate::{slack, CertificateReport, SlackLedger};
use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

/// Result of checking the discrete Gronwall lemma on one pair of sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    /// First `n` with `a_{n+1} + δt b_{n+1} > (1 - γδt) a_n + δt C`.
    pub first_hypothesis_violation: Option<usize>,
    /// First `n` with `a_n > e^{-nγδt} a_0 + C/γ`.
    pub first_decay_violation: Option<usize>,
    /// First `n` with `δt Σ_{k<n} b_{k+1} > a_0 + nδt C`.
    pub first_sum_violation: Option<usize>,
    pub decay_slack_min: f64,
    pub sum_slack_min: f64,
}

impl GronwallReport {
    pub fn hypothesis_holds(&self) -> bool {
        self.first_hypothesis_violation.is_none()
    }

    pub fn conclusions_hold(&self) -> bool {
        self.first_decay_violation.is_none() && self.first_sum_violation.is_none()
    }

    /// The lemma is respected: the hypothesis fails or both conclusions hold.
    pub fn consistent(&self) -> bool {
        !self.hypothesis_holds() || self.conclusions_hold()
    }
}

/// Checks the recurrence `a_{n+1} + δt b_{n+1} ≤ (1 - γδt) a_n + δt C` and
/// the two conclusions of the discrete Gronwall lemma. `b[0]` is unused.
pub fn gronwall_check(a: &[f64], b: &[f64], gamma: f64, c: f64, dt: f64) -> Result<GronwallReport> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    if !(dt > 0.0 && dt <= 0.5 / gamma) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} outside (0, 1/(2 gamma)] = (0, {}]",
            0.5 / gamma
        )));
    }
    if !(c >= 0.0) {
        return Err(Error::InvalidParameter(format!("C must be nonnegative, got {c}")));
    }
    if a.is_empty() {
        return Err(Error::Empty("sequence a"));
    }
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.iter().chain(b).any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter("sequences must be finite and nonnegative".into()));
    }

    let mut report = GronwallReport {
        first_hypothesis_violation: None,
        first_decay_violation: None,
        first_sum_violation: None,
        decay_slack_min: f64::INFINITY,
        sum_slack_min: f64::INFINITY,
    };
    let mut sum_b = 0.0;
    for n in 0..a.len() {
        if n + 1 < a.len() {
            let lhs = a[n + 1] + dt * b[n + 1];
            let rhs = (1.0 - gamma * dt) * a[n] + dt * c;
            if slack(lhs, rhs) < -TOL && report.first_hypothesis_violation.is_none() {
                report.first_hypothesis_violation = Some(n);
            }
        }
        let t = n as f64 * dt;
        let decay = slack(a[n], (-gamma * t).exp() * a[0] + c / gamma);
        report.decay_slack_min = report.decay_slack_min.min(decay);
        if decay < -TOL && report.first_decay_violation.is_none() {
            report.first_decay_violation = Some(n);
        }
        let sum = slack(dt * sum_b, a[0] + t * c);
        report.sum_slack_min = report.sum_slack_min.min(sum);
        if sum < -TOL && report.first_sum_violation.is_none() {
            report.first_sum_violation = Some(n);
        }
        if n + 1 < a.len() {
            sum_b += b[n + 1];
        }
    }
    Ok(report)
}

/// Folds many instances into one certificate: an instance counts only if it
/// satisfies the hypothesis, and then both conclusions must hold.
pub fn gronwall_certificate<'a>(
    instances: impl IntoIterator<Item = &'a GronwallReport>,
) -> CertificateReport {
    let mut ledger = SlackLedger::new("discrete_gronwall").tolerance(TOL);
    let (mut admissible, mut rejected) = (0usize, 0usize);
    for (i, r) in instances.into_iter().enumerate() {
        if !r.hypothesis_holds() {
            rejected += 1;
            continue;
        }
        admissible += 1;
        ledger.push("decay", i, r.first_decay_violation.unwrap_or(0), r.decay_slack_min);
        ledger.push("sum", i, r.first_sum_violation.unwrap_or(0), r.sum_slack_min);
    }
    ledger.constant("admissible_instances", admissible as f64);
    ledger.constant("rejected_instances", rejected as f64);
    ledger.finish()
}

/// Sequences that satisfy the hypothesis by construction: each step spends a
/// random fraction of the admissible budget, split randomly between `a` and
/// `δt b`. Returns `(a, b, γ, C, δt)`.
pub fn admissible_instance(rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>, f64, f64, f64) {
    let gamma = rng.gen_range(0.01..10.0);
    let dt = rng.gen_range(1e-4..=0.5) / gamma;
    let c = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..5.0) };
    let len = rng.gen_range(2..300);
    let mut a = vec![rng.gen_range(0.0..100.0)];
    let mut b = vec![rng.gen_range(0.0..10.0)];
    for n in 0..len - 1 {
        let budget = (1.0 - gamma * dt) * a[n] + dt * c;
        let used = budget * rng.gen_range(0.0..=1.0);
        let share = rng.gen_range(0.0..=1.0);
        a.push(used * share);
        b.push(used * (1.0 - share) / dt);
    }
    (a, b, gamma, c, dt)
}

/// Checks `instances` generated admissible instances and folds them into one
/// certificate.
pub fn gronwall_selftest(instances: usize, seed: u64) -> Result<CertificateReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::with_capacity(instances);
    while reports.len() < instances {
        let (a, b, gamma, c, dt) = admissible_instance(&mut rng);
        let r = gronwall_check(&a, &b, gamma, c, dt)?;
        if r.hypothesis_holds() {
            reports.push(r);
        }
    }
    let mut cert = gronwall_certificate(&reports);
    cert.constants.insert("seed".into(), seed as f64);
    Ok(cert)
}
