//! Empirical checks of the scheme's dissipative, contraction, smoothing and
//! convergence estimates.

pub mod attractor;
pub mod certificate;
pub mod convergence;
pub mod difference;
pub mod dissipative;
pub mod fit;
pub mod gronwall;
pub mod hausdorff;
pub mod monitor;
pub mod regularity;

pub use attractor::{attractor_proxy_study, mass_drift, AttractorReport, AttractorSpec};
pub use certificate::{slack, CertificateReport, SlackLedger, SLACK_TOLERANCE};
pub use convergence::{convergence_study, ConvergenceReport, ConvergenceRow};
pub use difference::{
    contraction_experiment, contraction_rate, sample_pairs, smoothing_experiment,
    smoothing_rate_sweep,
};
pub use dissipative::{
    certify_dissipative, certify_dissipative_h1, certify_dissipative_h2, certify_dissipative_l2,
    fit_dissipative, run_ensemble, DissipativeFit, EnsembleMember, EnsembleSpec, NormLevel,
};
pub use gronwall::{
    admissible_instance, gronwall_certificate, gronwall_check, gronwall_selftest, GronwallReport,
};
pub use hausdorff::{hausdorff_sym, hausdorff_sym_brute};
pub use monitor::{to_csv, MonitorParams, MonitorRecord, CSV_HEADER};
pub use regularity::regularity_check;
