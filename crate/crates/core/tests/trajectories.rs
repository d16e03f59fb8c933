use std::f64::consts::PI;

use chimex::diagnostics::regularity_check;
use chimex::imex::{
    interpolants, make_initial, random_smooth, run, write_snapshot, InitialCondition, SolverConfig,
};
use chimex::{BoundaryCondition, Error, Field, Grid, ModelParams};
use proptest::prelude::*;

fn line(len: f64, n: usize) -> std::sync::Arc<Grid> {
    Grid::new(1, &[len], &[n], BoundaryCondition::DirichletSine).unwrap()
}

#[test]
fn zero_steps_keep_only_the_initial_state() {
    let g = line(1.0, 16);
    let u0 = random_smooth(&g, 1, 2.0, 1.0);
    let traj = run(&u0, &ModelParams::classical(1.0).unwrap(), &SolverConfig::new(0.01, 0)).unwrap();
    assert_eq!(traj.snapshots.len(), 1);
    assert_eq!(traj.snapshots[0].field, u0);
    assert_eq!(traj.final_state, u0);
    assert_eq!(traj.monitors.len(), 1);
}

#[test]
fn runs_are_bitwise_deterministic() {
    let g = Grid::new(2, &[1.0, 2.0], &[15, 31], BoundaryCondition::DirichletSine).unwrap();
    let p = ModelParams::symport(1.5, 1.0, 0.5).unwrap();
    let u0 = random_smooth(&g, 77, 2.5, 2.0);
    let cfg = SolverConfig::new(1e-3, 200).stride(7);
    let a = run(&u0, &p, &cfg).unwrap();
    let b = run(&u0, &p, &cfg).unwrap();
    assert_eq!(a.snapshots.len(), b.snapshots.len());
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        assert_eq!(x.step, y.step);
        let bx: Vec<u64> = x.field.values().iter().map(|v| v.to_bits()).collect();
        let by: Vec<u64> = y.field.values().iter().map(|v| v.to_bits()).collect();
        assert_eq!(bx, by);
    }
    assert_eq!(a.monitors, b.monitors);
}

#[test]
fn snapshot_times_are_spaced_by_stride() {
    let g = line(1.0, 16);
    let u0 = random_smooth(&g, 3, 2.0, 1.0);
    let cfg = SolverConfig::new(0.01, 25).stride(5);
    let traj = run(&u0, &ModelParams::classical(1.0).unwrap(), &cfg).unwrap();
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    assert_eq!(times.len(), 6);
    for w in times.windows(2) {
        assert!((w[1] - w[0] - 0.05).abs() < 1e-12);
    }
    assert!(traj.snapshots.iter().all(|s| s.field.is_finite()));
}

#[test]
fn overflow_guard_aborts_unstable_runs() {
    let g = line(1.0, 16);
    let u0 = random_smooth(&g, 3, 2.0, 1.0);
    let mut cfg = SolverConfig::new(1e-3, 100);
    cfg.overflow_guard = 1e-3;
    let err = run(&u0, &ModelParams::classical(1.0).unwrap(), &cfg).unwrap_err();
    assert!(matches!(err, Error::Overflow { step: 1, .. }));
}

#[test]
fn strict_guard_rejects_large_steps() {
    let g = line(1.0, 16);
    let u0 = random_smooth(&g, 3, 2.0, 1.0);
    let p = ModelParams::symport(1.0, 1.0, 1.0).unwrap();
    let cfg = SolverConfig::new(0.6, 3).strict(true);
    assert!(matches!(run(&u0, &p, &cfg), Err(Error::GuardViolation { .. })));
    assert!(run(&u0, &p, &SolverConfig::new(0.6, 3)).is_ok());
}

#[test]
fn interpolants_follow_their_definitions() {
    let g = line(1.0, 32);
    let u0 = random_smooth(&g, 9, 2.0, 1.0);
    let dt = 0.01;
    let traj = run(&u0, &ModelParams::symport(1.0, 1.0, 1.0).unwrap(), &SolverConfig::new(dt, 10)).unwrap();
    let u = |n: usize| &traj.snapshots[n].field;

    let at_node = interpolants(&traj, 3.0 * dt).unwrap();
    assert!((&at_node.linear - u(3)).max_abs() < 1e-15);
    assert_eq!(&at_node.lower, u(3));
    assert_eq!(&at_node.upper, u(4));

    let mid = interpolants(&traj, 3.5 * dt).unwrap();
    let avg = (u(3) + u(4)).scaled(0.5);
    assert!((&mid.linear - &avg).max_abs() < 1e-14);

    for k in 0..10 {
        let t = (5.0 + 0.1 * k as f64) * dt;
        let i = interpolants(&traj, t).unwrap();
        assert!((&i.linear - &i.lower).l2() <= (u(6) - u(5)).l2() * (1.0 + 1e-12));
    }

    let end = interpolants(&traj, 10.0 * dt).unwrap();
    assert_eq!(&end.linear, u(10));
    assert!(matches!(interpolants(&traj, 0.2), Err(Error::OutOfHorizon { .. })));

    let coarse = run(&u0, &ModelParams::classical(1.0).unwrap(), &SolverConfig::new(dt, 10).stride(2)).unwrap();
    assert!(matches!(interpolants(&coarse, 0.0), Err(Error::NotFullResolution(2))));
}

#[test]
fn from_file_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let g = line(2.0, 24);
    let u = random_smooth(&g, 5, 3.0, 1.0);
    let path = dir.path().join("u0.bin");
    write_snapshot(&path, &u, None).unwrap();
    let back = make_initial(&InitialCondition::FromFile { path }, &g).unwrap();
    assert_eq!(back, u);
}

#[test]
fn energy_is_nonincreasing_without_source() {
    let g = line(5.0, 64);
    let p = ModelParams::classical(1.0).unwrap();
    for seed in 0..3 {
        let u0 = random_smooth(&g, seed, 2.0, 1.0).scaled_to_norm(0.0, 3.0).unwrap();
        let traj = run(&u0, &p, &SolverConfig::new(1e-2, 2000)).unwrap();
        for w in traj.monitors.windows(2) {
            assert!(w[1].lyapunov <= w[0].lyapunov + 1e-12 * w[0].lyapunov.abs().max(1.0));
        }
    }
}

#[test]
fn regularity_bounds_hold_along_trajectories() {
    let g = line(5.0, 64);
    for p in [
        ModelParams::classical(1.0).unwrap(),
        ModelParams::symport(1.0, 1.0, 1.0).unwrap(),
    ] {
        let u0 = random_smooth(&g, 4, 2.0, 1.0).scaled_to_norm(1.0, 5.0).unwrap();
        let r = regularity_check(&u0, &p, &SolverConfig::new(1e-3, 2000)).unwrap();
        assert!(r.pass, "{}", r.to_json());
    }
}

#[test]
fn single_mode_decays_at_the_linear_rate_in_the_cubic_regime() {
    // for tiny amplitude f(u) ≈ -u, so the mode multiplier is (1 + δtλ)/(1 + δtλ²)
    let g = line(1.0, 31);
    let p = ModelParams::classical(1.0).unwrap();
    let u0 = Field::from_fn(&g, |x| 1e-8 * (PI * x[0]).sin());
    let dt = 0.1;
    let next = chimex::imex_step(&u0, &p, dt).unwrap();
    let lam = PI * PI;
    let expected = (1.0 + dt * lam) / (1.0 + dt * lam * lam);
    let ratio = next.forward().coeffs()[0] / u0.forward().coeffs()[0];
    assert!((ratio - expected).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polarization_identity(seed_a in any::<u64>(), seed_b in any::<u64>(), scale in 0.1f64..10.0) {
        let g = line(1.0, 40);
        let a = random_smooth(&g, seed_a, 2.0, scale);
        let b = random_smooth(&g, seed_b, 2.0, 1.0);
        let d = &a - &b;
        let lhs = d.inner(&a).unwrap();
        let rhs = 0.5 * (a.l2().powi(2) - b.l2().powi(2) + d.l2().powi(2));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (a.l2().powi(2) + b.l2().powi(2)).max(1.0));
    }

    #[test]
    fn step_is_lipschitz_in_l2(seed in any::<u64>(), eps in 1e-6f64..1e-1) {
        let g = line(1.0, 32);
        let p = ModelParams::symport(1.0, 1.0, 1.0).unwrap();
        let dt = 1e-2;
        let v = random_smooth(&g, seed, 2.0, 2.0);
        let w = &v + &random_smooth(&g, seed ^ 1, 2.0, eps);
        let d0 = (&v - &w).l2();
        let d1 = (&chimex::imex_step(&v, &p, dt).unwrap() - &chimex::imex_step(&w, &p, dt).unwrap()).l2();
        let c = chimex::diagnostics::contraction_rate(&p, dt);
        prop_assert!(d1 * d1 <= (1.0 + c * dt) * d0 * d0 * (1.0 + 1e-12));
    }
}
