use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Slack tolerance for inequality checks on order-one quantities.
pub const SLACK_TOLERANCE: f64 = 1e-9;

/// Relative slack of `lhs ≤ rhs`: negative when violated.
pub fn slack(lhs: f64, rhs: f64) -> f64 {
    if lhs.is_nan() || rhs.is_nan() {
        return f64::MIN;
    }
    (rhs - lhs) / rhs.abs().max(1.0)
}

/// Where the smallest slack was observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleLocation {
    pub check: String,
    pub member: usize,
    pub step: usize,
}

/// Identification of one trajectory that entered a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub label: String,
    pub seed: u64,
    pub magnitude: f64,
    pub dt: f64,
    pub steps: usize,
}

/// Outcome of one certified inequality family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub id: String,
    pub constants: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub samples: usize,
    pub slack_min: f64,
    pub slack_median: f64,
    pub worst: Option<SampleLocation>,
    pub pass: bool,
    pub notes: Vec<String>,
    pub manifest: Vec<ManifestEntry>,
}

impl CertificateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Re-evaluates the pass flag at another tolerance.
    pub fn passes_at(&self, tolerance: f64) -> bool {
        self.samples == 0 || self.slack_min >= -tolerance
    }
}

/// Accumulates slacks and assembles a [`CertificateReport`].
#[derive(Debug)]
pub struct SlackLedger {
    id: String,
    tolerance: f64,
    slacks: Vec<f64>,
    worst: Option<(f64, SampleLocation)>,
    constants: BTreeMap<String, f64>,
    notes: Vec<String>,
    manifest: Vec<ManifestEntry>,
}

impl SlackLedger {
    pub fn new(id: impl Into<String>) -> Self {
        SlackLedger {
            id: id.into(),
            tolerance: SLACK_TOLERANCE,
            slacks: Vec::new(),
            worst: None,
            constants: BTreeMap::new(),
            notes: Vec::new(),
            manifest: Vec::new(),
        }
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn manifest(&mut self, entry: ManifestEntry) {
        self.manifest.push(entry);
    }

    /// Records `lhs ≤ rhs`; returns the slack.
    pub fn check(&mut self, check: &str, member: usize, step: usize, lhs: f64, rhs: f64) -> f64 {
        let s = slack(lhs, rhs);
        self.push(check, member, step, s);
        s
    }

    /// Records a precomputed slack.
    pub fn push(&mut self, check: &str, member: usize, step: usize, s: f64) {
        let s = if s.is_nan() { f64::MIN } else { s };
        self.slacks.push(s);
        if self.worst.as_ref().map_or(true, |(w, _)| s < *w) {
            self.worst = Some((
                s,
                SampleLocation {
                    check: check.to_string(),
                    member,
                    step,
                },
            ));
        }
    }

    pub fn finish(mut self) -> CertificateReport {
        let samples = self.slacks.len();
        let (slack_min, slack_median) = if samples == 0 {
            (0.0, 0.0)
        } else {
            self.slacks.sort_by(f64::total_cmp);
            (self.slacks[0], self.slacks[samples / 2])
        };
        let pass = samples == 0 || slack_min >= -self.tolerance;
        CertificateReport {
            id: self.id,
            constants: self.constants,
            tolerance: self.tolerance,
            samples,
            slack_min,
            slack_median,
            worst: self.worst.map(|(_, loc)| loc),
            pass,
            notes: self.notes,
            manifest: self.manifest,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_sign_and_scale() {
        assert!(slack(1.0, 2.0) > 0.0);
        assert!(slack(2.0, 1.0) < 0.0);
        assert_eq!(slack(0.0, 0.0), 0.0);
        assert!((slack(200.0, 100.0) + 1.0).abs() < 1e-15);
        assert_eq!(slack(f64::NAN, 1.0), f64::MIN);
    }

    #[test]
    fn ledger_reports_worst_and_passes_iff_slack_above_tolerance() {
        let mut l = SlackLedger::new("demo");
        l.check("a", 0, 3, 1.0, 2.0);
        l.check("b", 1, 7, 1.0 + 1e-12, 1.0);
        let r = l.finish();
        assert!(r.pass);
        assert_eq!(r.worst.as_ref().unwrap().step, 7);
        let mut l = SlackLedger::new("demo");
        l.check("a", 0, 0, 1.1, 1.0);
        let r = l.finish();
        assert!(!r.pass);
        assert!(r.passes_at(0.2));
    }

    #[test]
    fn json_round_trip() {
        let mut l = SlackLedger::new("x");
        l.constant("eps", 0.5);
        l.check("a", 0, 0, 0.0, 1.0);
        let r = l.finish();
        let back: CertificateReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
