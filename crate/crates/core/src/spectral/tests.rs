use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn unit_sine(n: usize) -> Arc<Grid> {
    Grid::new(1, &[1.0], &[n], BoundaryCondition::DirichletSine).unwrap()
}

fn random_field(grid: &Arc<Grid>, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Direct evaluation of the basis expansion at arbitrary points.
fn synthesize(spec: &SpectralField, x: &[f64]) -> f64 {
    let g = spec.grid();
    let first = match g.bc() {
        BoundaryCondition::DirichletSine => 1,
        BoundaryCondition::NeumannCosine => 0,
    };
    spec.coeffs()
        .iter()
        .enumerate()
        .map(|(flat, &c)| {
            let idx = g.unflatten(flat);
            let mut phi = c;
            for (a, &i) in idx.iter().enumerate() {
                let k = (i + first) as f64 * PI / g.lengths()[a];
                phi *= match g.bc() {
                    BoundaryCondition::DirichletSine => (k * x[a]).sin(),
                    BoundaryCondition::NeumannCosine => (k * x[a]).cos(),
                };
            }
            phi
        })
        .sum()
}

#[test]
fn sin_pi_x_maps_to_first_mode() {
    let g = unit_sine(31);
    let u = Field::from_fn(&g, |x| (PI * x[0]).sin());
    let c = u.forward();
    assert!((c.coeffs()[0] - 1.0).abs() < 1e-12);
    assert!(c.coeffs()[1..].iter().all(|v| v.abs() <= 1e-12));
}

#[test]
fn zero_field_has_zero_coefficients() {
    let g = unit_sine(16);
    assert!(Field::zeros(&g).forward().coeffs().iter().all(|&c| c == 0.0));
}

#[test]
fn inverse_matches_direct_synthesis() {
    for bc in [BoundaryCondition::DirichletSine, BoundaryCondition::NeumannCosine] {
        for (d, lengths, modes) in [(1, vec![2.5], vec![9]), (2, vec![1.0, 3.0], vec![5, 7])] {
            let g = Grid::new(d, &lengths, &modes, bc).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let spec =
                SpectralField::new(&g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .unwrap();
            let u = spec.inverse();
            for flat in 0..g.len() {
                let x = g.point(&g.unflatten(flat));
                assert!((u.values()[flat] - synthesize(&spec, &x)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn round_trip_random_fields() {
    for g in [
        unit_sine(31),
        unit_sine(128),
        unit_sine(512),
        Grid::new(2, &[1.0, 2.0], &[63, 63], BoundaryCondition::DirichletSine).unwrap(),
        Grid::new(2, &[1.0, 1.0], &[20, 9], BoundaryCondition::NeumannCosine).unwrap(),
    ] {
        let u = random_field(&g, 3);
        let back = u.forward().inverse();
        let err = (&back - &u).max_abs();
        assert!(err <= 1e-12 * u.max_abs(), "round trip error {err}");
    }
}

#[test]
fn eigenfunction_powers() {
    let g = unit_sine(16);
    let m = SpectralField::mode(&g, &[1], 1.0).unwrap();
    assert_eq!(m.apply_power(0.0).unwrap(), m);
    assert_relative_eq!(m.apply_power(1.0).unwrap().coeffs()[0], PI * PI, max_relative = 1e-15);
    assert_relative_eq!(m.apply_power(-0.5).unwrap().coeffs()[0], 1.0 / PI, max_relative = 1e-15);
}

#[test]
fn norms_of_sin_pi_x() {
    let g = unit_sine(31);
    let u = Field::from_fn(&g, |x| (PI * x[0]).sin());
    assert_relative_eq!(u.norm(0.0).unwrap(), 0.707_106_781_186_547_5, max_relative = 1e-12);
    assert_relative_eq!(u.norm(0.5).unwrap(), 2.221_441_469_079_183, max_relative = 1e-12);
    assert_relative_eq!(u.norm(-0.5).unwrap(), 0.225_079_079_039_276_5, max_relative = 1e-12);
    assert_eq!(Field::zeros(&g).norm(0.5).unwrap(), 0.0);
}

#[test]
fn inner_orthogonality() {
    let g = unit_sine(31);
    let s1 = Field::from_fn(&g, |x| (PI * x[0]).sin());
    let s2 = Field::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
    assert!(s1.inner(&s2).unwrap().abs() < 1e-15);
    assert_relative_eq!(s1.inner(&s1).unwrap(), 0.5, max_relative = 1e-14);
}

/// Trapezoid rule on an 8x finer grid of the synthesized expansions.
fn fine_quadrature(u: &Field, v: &Field) -> f64 {
    let g = u.grid();
    let (cu, cv) = (u.forward(), v.forward());
    let len = g.lengths()[0];
    let m = 8 * (g.shape()[0] + 1);
    let h = len / m as f64;
    (1..m)
        .map(|j| {
            let x = [j as f64 * h];
            synthesize(&cu, &x) * synthesize(&cv, &x)
        })
        .sum::<f64>()
        * h
}

#[test]
fn inner_matches_fine_quadrature() {
    let g = Grid::new(1, &[1.7], &[24], BoundaryCondition::DirichletSine).unwrap();
    for seed in 0..5 {
        let u = random_field(&g, seed);
        let v = random_field(&g, seed + 100);
        let ip = u.inner(&v).unwrap();
        let q = fine_quadrature(&u, &v);
        assert!((ip - q).abs() <= 1e-10 * u.l2() * v.l2(), "{ip} vs {q}");
    }
}

#[test]
fn solve_implicit_closed_form() {
    let g = unit_sine(16);
    let m = SpectralField::mode(&g, &[1], 1.0).unwrap();
    let w = m.solve_implicit(0.1).unwrap();
    let expected = 1.0 / (1.0 + 0.1 * PI.powi(4));
    assert_relative_eq!(w.coeffs()[0], expected, max_relative = 1e-15);
    assert_relative_eq!(w.coeffs()[0], 0.093_101_9, max_relative = 1e-6);
    assert!(w.coeffs()[1..].iter().all(|&c| c == 0.0));
    let z = SpectralField::zeros(&g).solve_implicit(3.0).unwrap();
    assert!(z.coeffs().iter().all(|&c| c == 0.0));
    assert!(m.solve_implicit(0.0).is_err());
    assert!(m.solve_implicit(-1.0).is_err());
}

#[test]
fn solve_implicit_residual() {
    let g = Grid::new(2, &[1.0, 1.0], &[63, 63], BoundaryCondition::DirichletSine).unwrap();
    let rhs = random_field(&g, 11).forward();
    for dt in [1e-6, 1e-3, 1.0] {
        let w = rhs.solve_implicit(dt).unwrap();
        let back = w.apply_implicit_operator(dt);
        let res = (&back - &rhs).max_abs();
        assert!(res <= 1e-14 * rhs.max_abs() * 4.0, "residual {res}");
    }
}

#[test]
fn neumann_negative_power_needs_zero_mean() {
    let g = Grid::new(1, &[1.0], &[8], BoundaryCondition::NeumannCosine).unwrap();
    let c = Field::from_fn(&g, |_| 1.0);
    let spec = c.forward();
    assert_relative_eq!(spec.coeffs()[0], 1.0, max_relative = 1e-14);
    assert_relative_eq!(c.mass(), 1.0, max_relative = 1e-14);
    assert!(spec.apply_power(-0.5).is_err());
    assert!(spec.norm(-0.5).is_err());
    assert!(spec.norm_mean_zero(-0.5) < 1e-15);
    let cosine = Field::from_fn(&g, |x| (PI * x[0]).cos());
    assert_relative_eq!(cosine.norm(-0.5).unwrap(), 1.0 / (PI * 2f64.sqrt()), max_relative = 1e-12);
    assert_relative_eq!(cosine.norm(0.0).unwrap(), 0.5f64.sqrt(), max_relative = 1e-12);
}

#[test]
fn batch_transform_is_order_preserving() {
    let g = unit_sine(64);
    let fields: Vec<Field> = (0..16).map(|s| random_field(&g, s)).collect();
    let batch = forward_batch(&fields);
    for (f, c) in fields.iter().zip(&batch) {
        assert_eq!(&f.forward(), c);
    }
    let back = inverse_batch(&batch);
    assert_eq!(back.len(), fields.len());
}

fn grid_strategy() -> impl Strategy<Value = Arc<Grid>> {
    prop_oneof![
        (0.5f64..5.0, 2usize..64)
            .prop_map(|(l, n)| Grid::new(1, &[l], &[n], BoundaryCondition::DirichletSine).unwrap()),
        (0.5f64..5.0, 0.5f64..5.0, 2usize..16, 2usize..16).prop_map(|(a, b, n, m)| {
            Grid::new(2, &[a, b], &[n, m], BoundaryCondition::DirichletSine).unwrap()
        }),
    ]
}

proptest! {
    #[test]
    fn prop_round_trip(g in grid_strategy(), seed in any::<u64>()) {
        let u = random_field(&g, seed);
        let err = (&u.forward().inverse() - &u).max_abs();
        prop_assert!(err <= 1e-12 * u.max_abs());
    }

    #[test]
    fn prop_parseval(g in grid_strategy(), seed in any::<u64>()) {
        let u = random_field(&g, seed);
        let v = random_field(&g, seed ^ 0xabcdef);
        let physical = u.inner(&v).unwrap();
        let spectral = u.forward().inner(&v.forward()).unwrap();
        prop_assert!((physical - spectral).abs() <= 1e-12 * u.l2() * v.l2());
    }

    #[test]
    fn prop_power_composition(g in grid_strategy(), seed in any::<u64>(), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let c = random_field(&g, seed).forward();
        let two_step = c.apply_power(s).unwrap().apply_power(t).unwrap();
        let one_step = c.apply_power(s + t).unwrap();
        let scale = one_step.max_abs();
        prop_assert!((&two_step - &one_step).max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn prop_norm_monotone(g in grid_strategy(), seed in any::<u64>(), s1 in -1.0f64..1.0, gap in 0.0f64..1.0) {
        let c = random_field(&g, seed).forward();
        let s2 = s1 + gap;
        let lhs = c.norm(s1).unwrap();
        let rhs = g.constants().embedding(s1, s2) * c.norm(s2).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn prop_implicit_contraction(g in grid_strategy(), dt in 1e-8f64..10.0) {
        let ones = SpectralField::new(&g, vec![1.0; g.len()]).unwrap();
        let w = ones.solve_implicit(dt).unwrap();
        prop_assert!(w.coeffs().iter().all(|&m| m > 0.0 && m <= 1.0));
    }
}
