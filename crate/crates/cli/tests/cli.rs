use std::path::{Path, PathBuf};
use std::process::Command;

use chimex::imex::{random_smooth, read_sidecar, read_snapshot};
use chimex::{BoundaryCondition, Grid};
use chimex_cli::config::{parse_str, ExperimentKind};
use chimex_cli::heatmap::encode_heatmap;
use serde_json::Value;
use tempfile::TempDir;

fn chimex(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_chimex"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .env_remove("CHIMEX_OUT")
        .status()
        .expect("binary runs");
    status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn list(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    v.sort();
    v
}

#[test]
fn zero_step_simulation_stores_exactly_the_initial_state() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "zero.json",
        r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32]},
            "solver": {"T": 0.0, "seed": 3}}"#,
    );
    assert_eq!(chimex("simulate", &cfg, tmp.path(), &[]), 0);
    let run = tmp.path().join("zero-simulate");
    assert_eq!(list(&run.join("snapshots")), ["snap_00000000.bin", "snap_00000000.json"]);

    let u = read_snapshot(&run.join("snapshots/snap_00000000.bin")).unwrap();
    let grid = Grid::new(1, &[5.0], &[32], BoundaryCondition::DirichletSine).unwrap();
    assert_eq!(u.values(), random_smooth(&grid, 3, 2.0, 1.0).values());
    let meta = read_sidecar(&run.join("snapshots/snap_00000000.bin")).unwrap();
    assert_eq!((meta.step, meta.seed), (0, Some(3)));

    let csv = std::fs::read_to_string(run.join("monitors.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let manifest = read_json(&run.join("manifest.json"));
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn echoed_config_reparses_to_the_same_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "echo.json",
        r#"{"grid": {"d": 1, "lengths": [2.0], "modes": [16]},
            "model": {"source": "symport", "k": 0.5},
            "solver": {"dt": 0.01, "T": 0.05, "stride": 2}}"#,
    );
    assert_eq!(chimex("simulate", &cfg, tmp.path(), &[]), 0);
    let text = std::fs::read_to_string(tmp.path().join("echo-simulate/config.json")).unwrap();
    let echoed = parse_str(&text).unwrap();
    assert_eq!(echoed.resolve(ExperimentKind::Simulate), echoed);
    assert_eq!(echoed.model.k_prime, Some(1.0));
    assert_eq!(echoed.to_json(), text);
    // steps = 5 with stride 2: states 0, 2, 4 and the final one
    let snaps = list(&tmp.path().join("echo-simulate/snapshots"));
    assert_eq!(snaps.iter().filter(|s| s.ends_with(".bin")).count(), 4);
}

#[test]
fn two_dimensional_runs_are_bitwise_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "plane.json",
        r#"{"grid": {"d": 2, "lengths": [2.0, 1.0], "modes": [16, 8]},
            "solver": {"dt": 0.01, "T": 0.1, "stride": 5, "seed": 4}}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(chimex("simulate", &cfg, &a, &["--jobs", "1"]), 0);
    assert_eq!(chimex("simulate", &cfg, &b, &["--jobs", "3"]), 0);
    let (a, b) = (a.join("plane-simulate"), b.join("plane-simulate"));
    let heatmaps = list(&a.join("heatmaps"));
    assert_eq!(heatmaps.len(), 6);
    let manifest = read_json(&a.join("manifest.json"));
    for f in manifest["files"].as_array().unwrap() {
        let f = f.as_str().unwrap();
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let pgm = std::fs::read(a.join("heatmaps/snap_00000000.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n16 8\n255\n"));
    let range = read_json(&a.join("heatmaps/snap_00000000.json"));
    assert!(range["min"].as_f64().unwrap() < range["max"].as_f64().unwrap());
}

#[test]
fn snapshots_reload_as_initial_data() {
    let tmp = TempDir::new().unwrap();
    let first = write_config(
        tmp.path(),
        "first.json",
        r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32]},
            "solver": {"dt": 0.01, "T": 0.1, "stride": 10}}"#,
    );
    assert_eq!(chimex("simulate", &first, tmp.path(), &[]), 0);
    let second = write_config(
        tmp.path(),
        "second.json",
        r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32]},
            "solver": {"T": 0.0},
            "initial": {"kind": "from_file", "path": "first-simulate/snapshots/snap_00000010.bin"}}"#,
    );
    assert_eq!(chimex("simulate", &second, tmp.path(), &[]), 0);
    let a = std::fs::read(tmp.path().join("first-simulate/snapshots/snap_00000010.bin")).unwrap();
    let b = std::fs::read(tmp.path().join("second-simulate/snapshots/snap_00000000.bin")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn converge_writes_error_table_with_order_footer() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "conv.json",
        r#"{"grid": {"d": 1, "lengths": [1.0], "modes": [16]},
            "solver": {"T": 0.125, "seed": 5},
            "converge": {"dt_list": [0.00390625, 0.001953125, 0.0009765625, 0.00048828125],
                         "dt_ref": 0.0000152587890625}}"#,
    );
    assert_eq!(chimex("converge", &cfg, tmp.path(), &[]), 0);
    let csv = std::fs::read_to_string(tmp.path().join("conv-converge/convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "dt,sup_error");
    assert_eq!(lines.len(), 6);
    let errors: Vec<f64> = lines[1..5].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]));
    let footer: Value = serde_json::from_str(lines[5].strip_prefix("# ").unwrap()).unwrap();
    let order = footer["fitted_order"].as_f64().unwrap();
    assert!(order > 0.45, "order {order}");
    assert_eq!(footer["pass"], true);
}

#[test]
fn dissipate_with_three_magnitudes_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "diss.json",
        r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32]},
            "solver": {"dt": 0.01, "T": 40.0},
            "dissipate": {"levels": ["l2"], "magnitudes": [1.0, 10.0, 100.0],
                          "fit_seeds": [1], "verify_seeds": [2]}}"#,
    );
    assert_eq!(chimex("dissipate", &cfg, tmp.path(), &[]), 0);
    let run = tmp.path().join("diss-dissipate");
    let cert = read_json(&run.join("certificate.json"));
    assert_eq!(cert["pass"], true);
    let certs = cert["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 1);
    assert!(certs[0]["constants"]["eps0"].as_f64().unwrap() > 0.0);
    assert_eq!(certs[0]["manifest"].as_array().unwrap().len(), 6);
}

#[test]
fn failed_certificate_exits_with_status_one() {
    // far too short for the tails to settle: bounds are not uniform in the data
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "short.json",
        r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32]},
            "solver": {"dt": 0.01, "T": 0.5},
            "dissipate": {"levels": ["l2"], "fit_seeds": [1], "verify_seeds": [2]}}"#,
    );
    assert_eq!(chimex("dissipate", &cfg, tmp.path(), &[]), 1);
    let run = tmp.path().join("short-dissipate");
    assert_eq!(read_json(&run.join("certificate.json"))["pass"], false);
    assert_eq!(read_json(&run.join("manifest.json"))["exit_code"], 1);
}

#[test]
fn invalid_configs_exit_with_status_two_and_a_failure_record() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        (
            "neumann",
            r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32], "bc": "neumann_cosine"},
                "model": {"source": "symport"}}"#,
            "model.source",
        ),
        (
            "typo",
            r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32]}, "solver": {"stirde": 3}}"#,
            "solver.stirde",
        ),
        ("wrongtype", r#"{"grid": {"d": "one", "lengths": [5.0], "modes": [32]}}"#, "grid.d"),
    ];
    for (name, text, path) in cases {
        let cfg = write_config(tmp.path(), &format!("{name}.json"), text);
        assert_eq!(chimex("simulate", &cfg, tmp.path(), &[]), 2, "{name}");
        let failure = read_json(&tmp.path().join(format!("{name}-simulate/failure.json")));
        assert_eq!(failure["stage"], "config");
        let msg = failure["error"].as_str().unwrap();
        assert!(msg.contains(path), "{name}: {msg}");
    }
}

#[test]
fn runtime_errors_exit_with_status_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "nested.json",
        r#"{"grid": {"d": 1, "lengths": [1.0], "modes": [8]},
            "solver": {"T": 0.25},
            "converge": {"dt_list": [0.1], "dt_ref": 0.0003}}"#,
    );
    assert_eq!(chimex("converge", &cfg, tmp.path(), &[]), 2);
    let failure = read_json(&tmp.path().join("nested-converge/failure.json"));
    assert_eq!(failure["stage"], "run");
}

#[test]
fn job_count_does_not_change_certificates() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "pairs.json",
        r#"{"grid": {"d": 1, "lengths": [5.0], "modes": [32]},
            "model": {"source": "symport"},
            "solver": {"dt": 0.001, "T": 0.2, "seed": 7},
            "contract": {"pairs": 12}}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(chimex("contract", &cfg, &a, &["--jobs", "1"]), 0);
    assert_eq!(chimex("contract", &cfg, &b, &["--jobs", "4"]), 0);
    let read = |d: &Path| std::fs::read(d.join("pairs-contract/certificate.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn gronwall_selftest_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "gw.json",
        r#"{"grid": {"d": 1, "lengths": [1.0], "modes": [4]},
            "gronwall_selftest": {"instances": 500, "seed": 2}}"#,
    );
    assert_eq!(chimex("gronwall-selftest", &cfg, tmp.path(), &[]), 0);
    let cert = read_json(&tmp.path().join("gw-gronwall_selftest/certificate.json"));
    assert_eq!(cert["constants"]["admissible_instances"], 500.0);
}

#[test]
fn heatmap_matches_frozen_golden_file() {
    let grid = Grid::new(2, &[2.0, 1.0], &[24, 12], BoundaryCondition::DirichletSine).unwrap();
    let field = random_smooth(&grid, 7, 2.0, 1.0);
    let (bytes, _) = encode_heatmap(&field).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/heatmap_seed7.pgm");
    if std::env::var_os("CHIMEX_BLESS").is_some() {
        std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
        std::fs::write(&golden, &bytes).unwrap();
    }
    assert_eq!(bytes, std::fs::read(&golden).expect("golden file present"));
}
