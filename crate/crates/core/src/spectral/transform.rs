//! Separable sine/cosine transforms between samples and coefficients.
//!
//! Normalisation is fixed so that the samples of `sin(κπx/L)` (resp.
//! `cos(κπx/L)`) map to the unit coefficient of mode `κ`.


use super::grid::{AxisPlan, Grid};

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

pub(crate) fn transform(grid: &Grid, data: &mut [f64], dir: Direction) {
    let shape = grid.shape();
    debug_assert_eq!(data.len(), grid.len());
    match shape.len() {
        1 => {
            let mut scratch = scratch_for(&grid.plans[0]);
            apply_axis(&grid.plans[0], data, &mut scratch, dir);
        }
        2 => {
            let (n0, n1) = (shape[0], shape[1]);
            let mut scratch = scratch_for(&grid.plans[1]);
            for row in data.chunks_exact_mut(n1) {
                apply_axis(&grid.plans[1], row, &mut scratch, dir);
            }
            let mut scratch = scratch_for(&grid.plans[0]);
            let mut column = vec![0.0; n0];
            for j in 0..n1 {
                for i in 0..n0 {
                    column[i] = data[i * n1 + j];
                }
                apply_axis(&grid.plans[0], &mut column, &mut scratch, dir);
                for i in 0..n0 {
                    data[i * n1 + j] = column[i];
                }
            }
        }
        _ => unreachable!("grid dimension is validated at construction"),
    }
}

fn scratch_for(plan: &AxisPlan) -> Vec<f64> {
    let len = match plan {
        AxisPlan::Sine(p) => p.get_scratch_len(),
        AxisPlan::Cosine(p) => p.get_scratch_len(),
    };
    vec![0.0; len]
}

fn apply_axis(plan: &AxisPlan, buf: &mut [f64], scratch: &mut [f64], dir: Direction) {
    let n = buf.len();
    match (plan, dir) {
        (AxisPlan::Sine(p), Direction::Forward) => {
            p.process_dst1_with_scratch(buf, scratch);
            let s = 2.0 / (n + 1) as f64;
            buf.iter_mut().for_each(|v| *v *= s);
        }
        (AxisPlan::Sine(p), Direction::Inverse) => {
            p.process_dst1_with_scratch(buf, scratch);
        }
        (AxisPlan::Cosine(p), Direction::Forward) => {
            p.process_dct2_with_scratch(buf, scratch);
            let s = 2.0 / n as f64;
            buf.iter_mut().for_each(|v| *v *= s);
            buf[0] *= 0.5;
        }
        (AxisPlan::Cosine(p), Direction::Inverse) => {
            buf[0] *= 2.0;
            p.process_dct3_with_scratch(buf, scratch);
        }
    }
}
