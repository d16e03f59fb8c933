//! One runner per subcommand. Each writes its artifacts into the run
//! directory and reports whether its certificates passed.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use chimex::diagnostics::*;
use chimex::imex::{make_initial, run, write_snapshot, SnapshotMeta};
use chimex::{Field, Grid, InitialCondition};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::heatmap::render_heatmap;

/// Result of a completed run.
#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    /// `None` when the experiment certifies nothing.
    pub pass: Option<bool>,
    /// Written files, relative to the run directory.
    pub files: Vec<String>,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn path(&mut self, rel: &str) -> Result<PathBuf> {
        let p = self.dir.join(rel);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        self.files.push(rel.to_string());
        Ok(p)
    }

    fn text(&mut self, rel: &str, contents: &str) -> Result<()> {
        let p = self.path(rel)?;
        std::fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))
    }

    fn json(&mut self, rel: &str, value: &impl Serialize) -> Result<()> {
        self.text(rel, &serde_json::to_string_pretty(value)?)
    }
}

fn grid_of(cfg: &ExperimentConfig) -> Result<Arc<Grid>> {
    Ok(Grid::from_spec(cfg.grid.spec())?)
}

fn initial_field(cfg: &ExperimentConfig, config_dir: &Path, grid: &Arc<Grid>) -> Result<Field> {
    let ic = match cfg.initial.clone().expect("resolved config has an initial condition") {
        InitialCondition::FromFile { path } if path.is_relative() => InitialCondition::FromFile {
            path: config_dir.join(path),
        },
        other => other,
    };
    make_initial(&ic, grid).context("building the initial condition")
}

/// Runs the resolved `cfg` and writes its artifacts under `run_dir`.
pub fn run_experiment(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    config_dir: &Path,
    run_dir: &Path,
) -> Result<RunOutcome> {
    let mut w = Writer {
        dir: run_dir,
        files: Vec::new(),
    };
    let pass = match kind {
        ExperimentKind::Simulate => simulate(cfg, config_dir, &mut w)?,
        ExperimentKind::Converge => Some(converge(cfg, config_dir, &mut w)?),
        ExperimentKind::Dissipate => Some(dissipate(cfg, &mut w)?),
        ExperimentKind::Contract => Some(contract(cfg, &mut w)?),
        ExperimentKind::Smooth => Some(smooth(cfg, &mut w)?),
        ExperimentKind::AttractCompare => Some(attract(cfg, &mut w)?),
        ExperimentKind::GronwallSelftest => Some(gronwall(cfg, &mut w)?),
    };
    Ok(RunOutcome { pass, files: w.files })
}

fn simulate(cfg: &ExperimentConfig, config_dir: &Path, w: &mut Writer<'_>) -> Result<Option<bool>> {
    let grid = grid_of(cfg)?;
    let params = cfg.model.params();
    let u0 = initial_field(cfg, config_dir, &grid)?;
    let solver = cfg.solver.solver_config();
    let traj = run(&u0, &params, &solver)?;
    w.text("monitors.csv", &to_csv(&traj.monitors))?;

    let seed = match cfg.initial {
        Some(InitialCondition::RandomSmooth { seed, .. }) => Some(seed),
        _ => None,
    };
    let mut states: Vec<(usize, &Field)> = traj.snapshots.iter().map(|s| (s.step, &s.field)).collect();
    if solver.steps % solver.stride != 0 {
        states.push((solver.steps, &traj.final_state));
    }
    for (step, field) in states {
        let meta = SnapshotMeta {
            t: step as f64 * solver.dt,
            dt: solver.dt,
            step,
            model: params,
            seed,
            grid: grid.spec().clone(),
        };
        let name = format!("snapshots/snap_{step:08}.bin");
        let path = w.path(&name)?;
        write_snapshot(&path, field, Some(&meta))?;
        w.files.push(format!("snapshots/snap_{step:08}.json"));
        if grid.dimension() == 2 {
            let path = w.path(&format!("heatmaps/snap_{step:08}.pgm"))?;
            render_heatmap(field, &path)?;
            w.files.push(format!("heatmaps/snap_{step:08}.json"));
        }
    }
    Ok(None)
}

#[derive(Serialize)]
struct OrderFooter {
    fitted_order: Option<f64>,
    pass: bool,
}

fn converge(cfg: &ExperimentConfig, config_dir: &Path, w: &mut Writer<'_>) -> Result<bool> {
    let b = cfg.converge.clone().unwrap_or_default();
    let grid = grid_of(cfg)?;
    let u0 = initial_field(cfg, config_dir, &grid)?;
    let report = convergence_study(
        &u0,
        &cfg.model.params(),
        cfg.solver.horizon,
        &b.dt_list,
        b.dt_ref,
        b.reference_stride,
    )?;
    let footer = OrderFooter {
        fitted_order: report.order,
        pass: report.pass,
    };
    let csv = format!("{}# {}\n", report.to_csv(), serde_json::to_string(&footer)?);
    w.text("convergence.csv", &csv)?;
    w.json("certificate.json", &report)?;
    Ok(report.pass)
}

#[derive(Serialize)]
struct CertificateBundle {
    pass: bool,
    certificates: Vec<CertificateReport>,
}

fn dissipate(cfg: &ExperimentConfig, w: &mut Writer<'_>) -> Result<bool> {
    let b = cfg.dissipate.clone().unwrap_or_default();
    let grid = grid_of(cfg)?;
    let mut certificates = Vec::new();
    for &level in &b.levels {
        let spec = |seeds: &[u64]| EnsembleSpec {
            grid: grid.clone(),
            params: cfg.model.params(),
            dt: cfg.solver.dt,
            horizon: cfg.solver.horizon,
            level,
            magnitudes: b.magnitudes_for(level),
            seeds: seeds.to_vec(),
            decay: b.decay,
        };
        let fit = run_ensemble(&spec(&b.fit_seeds))?;
        let verify = run_ensemble(&spec(&b.verify_seeds))?;
        if b.write_monitors {
            let tag = serde_json::to_value(level)?;
            let tag = tag.as_str().unwrap_or("level");
            for (set, members) in [("fit", &fit), ("verify", &verify)] {
                for m in members {
                    let name = format!("monitors/{tag}_{set}_seed{}_mag{}.csv", m.seed, m.magnitude);
                    w.text(&name, &to_csv(&m.monitors))?;
                }
            }
        }
        certificates.push(certify_dissipative(level, &fit, &verify)?);
    }
    let pass = certificates.iter().all(|c| c.pass);
    w.json("certificate.json", &CertificateBundle { pass, certificates })?;
    Ok(pass)
}

fn contract(cfg: &ExperimentConfig, w: &mut Writer<'_>) -> Result<bool> {
    let b = cfg.contract.clone().unwrap_or_default();
    let grid = grid_of(cfg)?;
    let seed = b.seed.unwrap_or(cfg.solver.seed);
    let pairs = sample_pairs(&grid, b.pairs, seed, b.s, b.radius, b.separation)?;
    let mut report = contraction_experiment(&pairs, &cfg.model.params(), cfg.solver.dt, cfg.solver.steps())?;
    report.constants.insert("radius".into(), b.radius);
    report.constants.insert("s".into(), b.s);
    w.json("certificate.json", &report)?;
    Ok(report.pass)
}

fn smooth(cfg: &ExperimentConfig, w: &mut Writer<'_>) -> Result<bool> {
    let b = cfg.smooth.clone().unwrap_or_default();
    let grid = grid_of(cfg)?;
    let params = cfg.model.params();
    let (r2, fitted) = match b.radius {
        Some(r) => (r, false),
        None => {
            let spec = EnsembleSpec {
                grid: grid.clone(),
                params,
                dt: cfg.solver.dt,
                horizon: b.fit_horizon,
                level: NormLevel::H2,
                magnitudes: NormLevel::H2.default_magnitudes(),
                seeds: b.fit_seeds.clone(),
                decay: 2.0,
            };
            let fit = fit_dissipative(NormLevel::H2, &run_ensemble(&spec)?)?;
            (fit.m.sqrt(), true)
        }
    };
    let cal_seed = b.calibration_seed.unwrap_or(cfg.solver.seed);
    let pair_seed = b.pair_seed.unwrap_or(cfg.solver.seed.wrapping_add(1));
    let calibration = sample_pairs(&grid, b.calibration_pairs, cal_seed, 1.0, r2, b.separation)?;
    let pairs = sample_pairs(&grid, b.pairs, pair_seed, 1.0, r2, b.separation)?;
    let mut report = smoothing_experiment(&calibration, &pairs, &params, cfg.solver.dt, cfg.solver.steps(), r2)?;
    if fitted {
        report.notes.push("R2 = sqrt(M2) from an H2 ensemble fit".into());
    }
    w.json("certificate.json", &report)?;
    Ok(report.pass)
}

fn attract(cfg: &ExperimentConfig, w: &mut Writer<'_>) -> Result<bool> {
    let b = cfg.attract_compare.clone().unwrap_or_default();
    let spec = AttractorSpec {
        grid: grid_of(cfg)?,
        params: cfg.model.params(),
        dt0: b.dt0.unwrap_or(cfg.solver.dt),
        levels: b.levels,
        burn_in: b.burn_in,
        sample_count: b.sample_count,
        sample_spacing: b.sample_spacing,
        seeds: b.seeds.clone(),
        control_seeds: b.control_seeds.clone(),
        amplitude: b.amplitude,
    };
    let report = attractor_proxy_study(&spec)?;
    w.json("certificate.json", &report)?;
    Ok(report.pass)
}

fn gronwall(cfg: &ExperimentConfig, w: &mut Writer<'_>) -> Result<bool> {
    let b = cfg.gronwall_selftest.clone().unwrap_or_default();
    let report = gronwall_selftest(b.instances, b.seed.unwrap_or(cfg.solver.seed))?;
    w.json("certificate.json", &report)?;
    Ok(report.pass)
}
