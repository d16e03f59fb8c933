//! Strict JSON experiment configuration.
//!
//! Unknown keys are rejected everywhere. Omitted keys take the defaults
//! listed in `chimex --help`; [`ExperimentConfig::resolve`] writes every
//! default out explicitly so the echoed config reproduces the run on its own.

use std::fmt;
use std::path::{Path, PathBuf};

use chimex::diagnostics::NormLevel;
use chimex::imex::{steps_for, SolverConfig, OVERFLOW_GUARD};
use chimex::{BoundaryCondition, GridSpec, InitialCondition, ModelParams, Source};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Converge,
    Dissipate,
    Contract,
    Smooth,
    AttractCompare,
    GronwallSelftest,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Converge => "converge",
            ExperimentKind::Dissipate => "dissipate",
            ExperimentKind::Contract => "contract",
            ExperimentKind::Smooth => "smooth",
            ExperimentKind::AttractCompare => "attract_compare",
            ExperimentKind::GronwallSelftest => "gronwall_selftest",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A validation failure tied to the key that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub d: usize,
    pub lengths: Vec<f64>,
    pub modes: Vec<usize>,
    #[serde(default = "default_bc")]
    pub bc: BoundaryCondition,
}

fn default_bc() -> BoundaryCondition {
    BoundaryCondition::DirichletSine
}

impl GridBlock {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dimension: self.d,
            lengths: self.lengths.clone(),
            modes: self.modes.clone(),
            bc: self.bc,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    None,
    Symport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(rename = "K", default = "one")]
    pub cutoff: f64,
    #[serde(default = "default_source")]
    pub source: SourceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_prime: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_source() -> SourceKind {
    SourceKind::None
}

impl Default for ModelBlock {
    fn default() -> Self {
        ModelBlock {
            cutoff: 1.0,
            source: SourceKind::None,
            k: None,
            k_prime: None,
        }
    }
}

impl ModelBlock {
    pub fn params(&self) -> ModelParams {
        let source = match self.source {
            SourceKind::None => Source::None,
            SourceKind::Symport => Source::Symport {
                k: self.k.unwrap_or(1.0),
                k_prime: self.k_prime.unwrap_or(1.0),
            },
        };
        ModelParams {
            cutoff: self.cutoff,
            source,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(rename = "T", default = "one")]
    pub horizon: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub strict_guard: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dealias: bool,
    #[serde(default = "default_overflow")]
    pub overflow_guard: f64,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    100
}

fn default_overflow() -> f64 {
    OVERFLOW_GUARD
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock {
            dt: default_dt(),
            horizon: 1.0,
            stride: default_stride(),
            strict_guard: false,
            seed: 0,
            dealias: false,
            overflow_guard: OVERFLOW_GUARD,
        }
    }
}

impl SolverBlock {
    pub fn steps(&self) -> usize {
        steps_for(self.horizon, self.dt)
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.dt, self.steps())
            .stride(self.stride)
            .strict(self.strict_guard);
        cfg.dealias = self.dealias;
        cfg.overflow_guard = self.overflow_guard;
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeBlock {
    #[serde(default = "default_dt_list")]
    pub dt_list: Vec<f64>,
    #[serde(default = "default_dt_ref")]
    pub dt_ref: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_stride: Option<usize>,
}

fn default_dt_list() -> Vec<f64> {
    (6..=12).map(|k| 2f64.powi(-k)).collect()
}

fn default_dt_ref() -> f64 {
    2f64.powi(-17)
}

impl Default for ConvergeBlock {
    fn default() -> Self {
        ConvergeBlock {
            dt_list: default_dt_list(),
            dt_ref: default_dt_ref(),
            reference_stride: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipateBlock {
    #[serde(default = "all_levels")]
    pub levels: Vec<NormLevel>,
    /// Shared by every level; omitted means each level's own defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitudes: Option<Vec<f64>>,
    #[serde(default = "default_fit_seeds")]
    pub fit_seeds: Vec<u64>,
    #[serde(default = "default_verify_seeds")]
    pub verify_seeds: Vec<u64>,
    #[serde(default = "two")]
    pub decay: f64,
    #[serde(default)]
    pub write_monitors: bool,
}

fn all_levels() -> Vec<NormLevel> {
    vec![NormLevel::L2, NormLevel::H1, NormLevel::H2]
}

fn default_fit_seeds() -> Vec<u64> {
    vec![1, 2]
}

fn default_verify_seeds() -> Vec<u64> {
    vec![3, 4, 5]
}

fn two() -> f64 {
    2.0
}

impl Default for DissipateBlock {
    fn default() -> Self {
        DissipateBlock {
            levels: all_levels(),
            magnitudes: None,
            fit_seeds: default_fit_seeds(),
            verify_seeds: default_verify_seeds(),
            decay: 2.0,
            write_monitors: false,
        }
    }
}

impl DissipateBlock {
    pub fn magnitudes_for(&self, level: NormLevel) -> Vec<f64> {
        self.magnitudes.clone().unwrap_or_else(|| level.default_magnitudes())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractBlock {
    #[serde(default = "default_contract_pairs")]
    pub pairs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "five")]
    pub radius: f64,
    #[serde(default = "half")]
    pub separation: f64,
}

fn default_contract_pairs() -> usize {
    100
}

fn five() -> f64 {
    5.0
}

fn half() -> f64 {
    0.5
}

impl Default for ContractBlock {
    fn default() -> Self {
        ContractBlock {
            pairs: 100,
            seed: None,
            s: 0.0,
            radius: 5.0,
            separation: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothBlock {
    #[serde(default = "fifty")]
    pub pairs: usize,
    #[serde(default = "fifty")]
    pub calibration_pairs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_seed: Option<u64>,
    #[serde(default = "tenth")]
    pub separation: f64,
    /// H² ball radius `R₂`; omitted means `sqrt(M₂)` from an H² ensemble fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default = "default_fit_seeds")]
    pub fit_seeds: Vec<u64>,
    #[serde(default = "forty")]
    pub fit_horizon: f64,
}

fn fifty() -> usize {
    50
}

fn tenth() -> f64 {
    0.1
}

fn forty() -> f64 {
    40.0
}

impl Default for SmoothBlock {
    fn default() -> Self {
        SmoothBlock {
            pairs: 50,
            calibration_pairs: 50,
            pair_seed: None,
            calibration_seed: None,
            separation: 0.1,
            radius: None,
            fit_seeds: default_fit_seeds(),
            fit_horizon: 40.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttractBlock {
    /// Coarsest step; omitted means `solver.dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt0: Option<f64>,
    #[serde(default = "three")]
    pub levels: usize,
    #[serde(default = "one")]
    pub burn_in: f64,
    #[serde(default = "eight")]
    pub sample_count: usize,
    #[serde(default = "quarter")]
    pub sample_spacing: f64,
    #[serde(default = "default_attract_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_control_seeds")]
    pub control_seeds: Vec<u64>,
    #[serde(default = "two")]
    pub amplitude: f64,
}

fn three() -> usize {
    3
}

fn eight() -> usize {
    8
}

fn quarter() -> f64 {
    0.25
}

fn default_attract_seeds() -> Vec<u64> {
    (0..8).collect()
}

fn default_control_seeds() -> Vec<u64> {
    (100..108).collect()
}

impl Default for AttractBlock {
    fn default() -> Self {
        AttractBlock {
            dt0: None,
            levels: 3,
            burn_in: 1.0,
            sample_count: 8,
            sample_spacing: 0.25,
            seeds: default_attract_seeds(),
            control_seeds: default_control_seeds(),
            amplitude: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallBlock {
    #[serde(default = "ten_thousand")]
    pub instances: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn ten_thousand() -> usize {
    10_000
}

impl Default for GronwallBlock {
    fn default() -> Self {
        GronwallBlock {
            instances: 10_000,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    pub grid: GridBlock,
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialCondition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dissipate: Option<DissipateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract: Option<ContractBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth: Option<SmoothBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attract_compare: Option<AttractBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gronwall_selftest: Option<GronwallBlock>,
}

/// Parse failure: either malformed JSON / schema violation or a broken
/// invariant. Both carry the offending key path.
#[derive(Debug)]
pub enum ParseError {
    Io(PathBuf, std::io::Error),
    Schema(ConfigError),
    Invalid(ConfigError),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ParseError::Schema(e) => write!(f, "schema error at {e}"),
            ParseError::Invalid(e) => write!(f, "invalid config at {e}"),
        }
    }
}

impl std::error::Error for ParseError {}

/// Deserializes without validating.
pub fn parse_str(text: &str) -> Result<ExperimentConfig, ParseError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ParseError::Schema(ConfigError {
            path: if path.is_empty() { ".".into() } else { path },
            message: e.into_inner().to_string(),
        })
    })
}

/// Reads, validates and resolves the config for `kind`.
pub fn parse_config(path: &Path, kind: ExperimentKind) -> Result<ExperimentConfig, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|e| ParseError::Io(path.to_path_buf(), e))?;
    let cfg = parse_str(&text)?;
    cfg.validate(kind).map_err(ParseError::Invalid)?;
    Ok(cfg.resolve(kind))
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive and finite, got {v}")))
    }
}

fn nonempty<T>(path: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(invalid(path, "must not be empty"))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every invariant the experiment `kind` relies on.
    pub fn validate(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        if let Some(k) = self.experiment {
            if k != kind {
                return Err(invalid(
                    "experiment",
                    format!("config is for `{k}` but the subcommand is `{kind}`"),
                ));
            }
        }
        let blocks = [
            (ExperimentKind::Converge, self.converge.is_some()),
            (ExperimentKind::Dissipate, self.dissipate.is_some()),
            (ExperimentKind::Contract, self.contract.is_some()),
            (ExperimentKind::Smooth, self.smooth.is_some()),
            (ExperimentKind::AttractCompare, self.attract_compare.is_some()),
            (ExperimentKind::GronwallSelftest, self.gronwall_selftest.is_some()),
        ];
        for (k, present) in blocks {
            if present && k != kind {
                return Err(invalid(k.name(), format!("block does not apply to `{kind}`")));
            }
        }

        chimex::Grid::from_spec(self.grid.spec()).map_err(|e| invalid("grid", e.to_string()))?;

        let m = &self.model;
        match m.source {
            SourceKind::None => {
                if m.k.is_some() {
                    return Err(invalid("model.k", "only valid with source = symport"));
                }
                if m.k_prime.is_some() {
                    return Err(invalid("model.k_prime", "only valid with source = symport"));
                }
            }
            SourceKind::Symport => {
                if self.grid.bc == BoundaryCondition::NeumannCosine {
                    return Err(invalid(
                        "model.source",
                        "neumann_cosine boundary conditions require source = none",
                    ));
                }
                positive("model.k", m.k.unwrap_or(1.0))?;
                positive("model.k_prime", m.k_prime.unwrap_or(1.0))?;
            }
        }
        if !(m.cutoff >= 1.0 && m.cutoff.is_finite()) {
            return Err(invalid("model.K", format!("must be >= 1, got {}", m.cutoff)));
        }
        let params = m.params();

        let s = &self.solver;
        positive("solver.dt", s.dt)?;
        if !(s.horizon >= 0.0 && s.horizon.is_finite()) {
            return Err(invalid("solver.T", format!("must be >= 0, got {}", s.horizon)));
        }
        if s.stride == 0 {
            return Err(invalid("solver.stride", "must be >= 1"));
        }
        positive("solver.overflow_guard", s.overflow_guard)?;
        if s.strict_guard && s.dt > params.dt_guard() {
            return Err(invalid(
                "solver.dt",
                format!("{} exceeds the step-size guard {}", s.dt, params.dt_guard()),
            ));
        }

        if let Some(ic) = &self.initial {
            ic.validate().map_err(|e| invalid("initial", e.to_string()))?;
            if let InitialCondition::SingleMode { mode, .. } = ic {
                if mode.len() != self.grid.d {
                    return Err(invalid("initial.mode", format!("needs {} wave numbers", self.grid.d)));
                }
            }
        }

        match kind {
            ExperimentKind::Simulate | ExperimentKind::GronwallSelftest => {}
            ExperimentKind::Converge => {
                let b = self.converge.clone().unwrap_or_default();
                nonempty("converge.dt_list", &b.dt_list)?;
                for (i, dt) in b.dt_list.iter().enumerate() {
                    positive(&format!("converge.dt_list[{i}]"), *dt)?;
                }
                positive("converge.dt_ref", b.dt_ref)?;
                if b.reference_stride == Some(0) {
                    return Err(invalid("converge.reference_stride", "must be >= 1"));
                }
            }
            ExperimentKind::Dissipate => {
                let b = self.dissipate.clone().unwrap_or_default();
                nonempty("dissipate.levels", &b.levels)?;
                nonempty("dissipate.fit_seeds", &b.fit_seeds)?;
                nonempty("dissipate.verify_seeds", &b.verify_seeds)?;
                if let Some(mags) = &b.magnitudes {
                    nonempty("dissipate.magnitudes", mags)?;
                    for (i, v) in mags.iter().enumerate() {
                        positive(&format!("dissipate.magnitudes[{i}]"), *v)?;
                    }
                }
                if !(b.decay >= 2.0) {
                    return Err(invalid("dissipate.decay", "must be >= 2"));
                }
                positive("solver.T", s.horizon)?;
            }
            ExperimentKind::Contract => {
                let b = self.contract.clone().unwrap_or_default();
                positive("contract.radius", b.radius)?;
                if !(b.separation > 0.0 && b.separation < 1.0) {
                    return Err(invalid("contract.separation", "must lie in (0, 1)"));
                }
                if !(b.s >= 0.0 && b.s.is_finite()) {
                    return Err(invalid("contract.s", "must be >= 0"));
                }
                if s.dt > params.dt_guard() {
                    return Err(invalid(
                        "solver.dt",
                        format!("{} exceeds the step-size guard {}", s.dt, params.dt_guard()),
                    ));
                }
            }
            ExperimentKind::Smooth => {
                let b = self.smooth.clone().unwrap_or_default();
                if b.pairs + b.calibration_pairs == 0 {
                    return Err(invalid("smooth.pairs", "needs at least one pair"));
                }
                if b.calibration_pairs == 0 {
                    return Err(invalid("smooth.calibration_pairs", "must be >= 1"));
                }
                if !(b.separation > 0.0 && b.separation < 1.0) {
                    return Err(invalid("smooth.separation", "must lie in (0, 1)"));
                }
                if let Some(r) = b.radius {
                    positive("smooth.radius", r)?;
                } else {
                    nonempty("smooth.fit_seeds", &b.fit_seeds)?;
                    positive("smooth.fit_horizon", b.fit_horizon)?;
                }
                if s.dt > params.dt_guard() {
                    return Err(invalid(
                        "solver.dt",
                        format!("{} exceeds the step-size guard {}", s.dt, params.dt_guard()),
                    ));
                }
            }
            ExperimentKind::AttractCompare => {
                let b = self.attract_compare.clone().unwrap_or_default();
                positive("attract_compare.dt0", b.dt0.unwrap_or(s.dt))?;
                if b.sample_count == 0 {
                    return Err(invalid("attract_compare.sample_count", "must be >= 1"));
                }
                if !(b.burn_in >= 0.0) {
                    return Err(invalid("attract_compare.burn_in", "must be >= 0"));
                }
                positive("attract_compare.sample_spacing", b.sample_spacing)?;
                nonempty("attract_compare.seeds", &b.seeds)?;
                nonempty("attract_compare.control_seeds", &b.control_seeds)?;
                if !b.amplitude.is_finite() {
                    return Err(invalid("attract_compare.amplitude", "must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Fills in every default for `kind`. Idempotent.
    pub fn resolve(&self, kind: ExperimentKind) -> ExperimentConfig {
        let mut out = self.clone();
        out.experiment = Some(kind);
        if out.model.source == SourceKind::Symport {
            out.model.k.get_or_insert(1.0);
            out.model.k_prime.get_or_insert(1.0);
        }
        let seed = out.solver.seed;
        out.initial.get_or_insert(InitialCondition::RandomSmooth {
            seed,
            decay: 2.0,
            amplitude: 1.0,
        });
        match kind {
            ExperimentKind::Simulate => {}
            ExperimentKind::Converge => {
                out.converge.get_or_insert_with(Default::default);
            }
            ExperimentKind::Dissipate => {
                out.dissipate.get_or_insert_with(Default::default);
            }
            ExperimentKind::Contract => {
                out.contract.get_or_insert_with(Default::default).seed.get_or_insert(seed);
            }
            ExperimentKind::Smooth => {
                let b = out.smooth.get_or_insert_with(Default::default);
                b.calibration_seed.get_or_insert(seed);
                b.pair_seed.get_or_insert(seed.wrapping_add(1));
            }
            ExperimentKind::AttractCompare => {
                let dt = out.solver.dt;
                out.attract_compare.get_or_insert_with(Default::default).dt0.get_or_insert(dt);
            }
            ExperimentKind::GronwallSelftest => {
                out.gronwall_selftest.get_or_insert_with(Default::default).seed.get_or_insert(seed);
            }
        }
        out
    }

    /// Seed recorded in the manifest.
    pub fn seed(&self) -> u64 {
        self.solver.seed
    }
}

/// Text appended to `chimex --help`.
pub const DEFAULTS_HELP: &str = "\
Config (strict JSON; unknown keys are rejected):
  experiment        optional; must match the subcommand
  grid              {d, lengths, modes, bc = dirichlet_sine | neumann_cosine}
  model             {K = 1, source = none | symport, k = 1, k_prime = 1}
                    neumann_cosine requires source = none
  solver            {dt = 1e-3, T = 1, stride = 100, strict_guard = false,
                     seed = 0, dealias = false, overflow_guard = 1e12}
  initial           default {kind: random_smooth, seed: solver.seed, decay: 2, amplitude: 1};
                    also {kind: single_mode, mode, amplitude} and {kind: from_file, path}
  output            output root (overridden by --out)
Per-experiment blocks (only the one matching the subcommand is allowed):
  converge          {dt_list = 2^-6..2^-12, dt_ref = 2^-17, reference_stride = gcd of ratios}
                    horizon is solver.T
  dissipate         {levels = [l2, h1, h2], magnitudes = per level, fit_seeds = [1, 2],
                     verify_seeds = [3, 4, 5], decay = 2, write_monitors = false}
  contract          {pairs = 100, seed = solver.seed, s = 0, radius = 5, separation = 0.5}
  smooth            {pairs = 50, calibration_pairs = 50, calibration_seed = solver.seed,
                     pair_seed = solver.seed + 1, separation = 0.1,
                     radius = sqrt(M2) of an H2 fit, fit_seeds = [1, 2], fit_horizon = 40}
  attract_compare   {dt0 = solver.dt, levels = 3, burn_in = 1, sample_count = 8,
                     sample_spacing = 0.25, seeds = 0..8, control_seeds = 100..108, amplitude = 2}
  gronwall_selftest {instances = 10000, seed = solver.seed}
Outputs go to <root>/<config stem>-<experiment>/ where root is --out, then the
config's `output`, then $CHIMEX_OUT, then ./chimex-out.
Exit status: 0 all certificates pass, 1 a certificate failed, 2 error.";

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32]}}"#;

    #[test]
    fn minimal_config_resolves_to_defaults() {
        let cfg = parse_str(MINIMAL).unwrap();
        cfg.validate(ExperimentKind::Simulate).unwrap();
        let r = cfg.resolve(ExperimentKind::Simulate);
        assert_eq!(r.solver, SolverBlock::default());
        assert_eq!(r.model, ModelBlock::default());
        assert_eq!(r.grid.bc, BoundaryCondition::DirichletSine);
        assert_eq!(
            r.initial,
            Some(InitialCondition::RandomSmooth {
                seed: 0,
                decay: 2.0,
                amplitude: 1.0
            })
        );
        assert_eq!(r.resolve(ExperimentKind::Simulate), r);
    }

    #[test]
    fn unknown_key_reports_its_path() {
        let text = r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32]}, "solver": {"dtt": 0.1}}"#;
        match parse_str(text) {
            Err(ParseError::Schema(e)) => {
                assert_eq!(e.path, "solver.dtt");
                assert!(e.message.contains("dtt"), "{e}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn type_mismatch_reports_its_path() {
        let text = r#"{"grid": {"d": 1, "lengths": [5.0], "modes": ["x"]}}"#;
        match parse_str(text) {
            Err(ParseError::Schema(e)) => assert_eq!(e.path, "grid.modes[0]"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn neumann_with_symport_is_rejected() {
        let text = r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32], "bc": "neumann_cosine"},
                       "model": {"source": "symport", "k": 1.0, "k_prime": 2.0}}"#;
        let e = parse_str(text).unwrap().validate(ExperimentKind::Simulate).unwrap_err();
        assert_eq!(e.path, "model.source");
    }

    #[test]
    fn mismatched_experiment_and_stray_blocks_are_rejected() {
        let text = r#"{"experiment": "converge", "grid": {"d": 1, "lengths": [1.0], "modes": [8]}}"#;
        let e = parse_str(text).unwrap().validate(ExperimentKind::Simulate).unwrap_err();
        assert_eq!(e.path, "experiment");
        let text = r#"{"grid": {"d": 1, "lengths": [1.0], "modes": [8]}, "contract": {}}"#;
        let e = parse_str(text).unwrap().validate(ExperimentKind::Simulate).unwrap_err();
        assert_eq!(e.path, "contract");
    }

    #[test]
    fn invariant_errors_name_the_key() {
        let cases = [
            (r#"{"grid": {"d": 1, "lengths": [1.0], "modes": [8]}, "solver": {"dt": -1.0}}"#, "solver.dt"),
            (r#"{"grid": {"d": 1, "lengths": [1.0], "modes": [8]}, "model": {"K": 0.5}}"#, "model.K"),
            (r#"{"grid": {"d": 2, "lengths": [1.0], "modes": [8]}}"#, "grid"),
            (r#"{"grid": {"d": 1, "lengths": [1.0], "modes": [8]}, "model": {"k": 1.0}}"#, "model.k"),
            (
                r#"{"grid": {"d": 1, "lengths": [1.0], "modes": [8]}, "initial": {"kind": "random_smooth", "seed": 1, "decay": 1.0}}"#,
                "initial",
            ),
        ];
        for (text, path) in cases {
            let e = parse_str(text).unwrap().validate(ExperimentKind::Simulate).unwrap_err();
            assert_eq!(e.path, path, "{text}");
        }
    }

    #[test]
    fn every_kind_round_trips_through_json() {
        let kinds = [
            ExperimentKind::Simulate,
            ExperimentKind::Converge,
            ExperimentKind::Dissipate,
            ExperimentKind::Contract,
            ExperimentKind::Smooth,
            ExperimentKind::AttractCompare,
            ExperimentKind::GronwallSelftest,
        ];
        let text = r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32]},
                       "model": {"source": "symport"}, "solver": {"dt": 0.1, "seed": 9}}"#;
        let base = parse_str(text).unwrap();
        for kind in kinds {
            base.validate(kind).unwrap();
            let r = base.resolve(kind);
            let back = parse_str(&r.to_json()).unwrap();
            assert_eq!(back, r, "{kind}");
            back.validate(kind).unwrap();
        }
    }
}
