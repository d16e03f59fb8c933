//! Symmetric Hausdorff distance between finite sets of fields in `L²`.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::Field;

fn validate(a: &[Field], b: &[Field]) -> Result<f64> {
    let first = a.first().ok_or(Error::Empty("first set"))?;
    if b.is_empty() {
        return Err(Error::Empty("second set"));
    }
    let grid = first.grid();
    if a.iter().chain(b).any(|f| !f.grid().compatible(grid)) {
        return Err(Error::GridMismatch);
    }
    Ok(grid.sample_weight())
}

fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// `max_{a∈A} min_{b∈B} ‖a - b‖` by a plain double loop.
pub fn hausdorff_directed_brute(a: &[Field], b: &[Field]) -> Result<f64> {
    let h = validate(a, b)?;
    let worst = a
        .iter()
        .map(|x| {
            b.iter()
                .map(|y| dist_sq_capped(x.values(), y.values(), f64::INFINITY))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok((h * worst).sqrt())
}

/// `max(d_H(A, B), d_H(B, A))` by a plain double loop.
pub fn hausdorff_sym_brute(a: &[Field], b: &[Field]) -> Result<f64> {
    Ok(hausdorff_directed_brute(a, b)?.max(hausdorff_directed_brute(b, a)?))
}

/// Squared distance, abandoned once the partial sum exceeds `cap`.
fn dist_sq_capped(x: &[f64], y: &[f64], cap: f64) -> f64 {
    let mut acc = 0.0;
    for (xc, yc) in x.chunks(16).zip(y.chunks(16)) {
        acc += dist_sq(xc, yc);
        if acc > cap {
            return acc;
        }
    }
    acc
}

/// Directed distance in parallel over `A`. A point of `A` stops scanning `B`
/// once it is closer than the current maximum, and each distance stops
/// accumulating once it exceeds the point's running minimum. The result is
/// exact.
pub fn hausdorff_directed(a: &[Field], b: &[Field]) -> Result<f64> {
    let h = validate(a, b)?;
    let best = AtomicU64::new(0f64.to_bits());
    a.par_iter().for_each(|x| {
        let mut min = f64::INFINITY;
        for y in b {
            let d = dist_sq_capped(x.values(), y.values(), min);
            if d < min {
                min = d;
                if min <= f64::from_bits(best.load(Ordering::Relaxed)) {
                    return;
                }
            }
        }
        best.fetch_max(min.to_bits(), Ordering::Relaxed);
    });
    Ok((h * f64::from_bits(best.into_inner())).sqrt())
}

/// Symmetric Hausdorff distance `max(d_H(A, B), d_H(B, A))`.
pub fn hausdorff_sym(a: &[Field], b: &[Field]) -> Result<f64> {
    Ok(hausdorff_directed(a, b)?.max(hausdorff_directed(b, a)?))
}
