/// Least-squares line `y ≈ slope·x + intercept`. Needs two distinct `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..n {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Maximum of `y` over the indices with `t ≥ t_from`.
pub fn tail_sup(t: &[f64], y: &[f64], t_from: f64) -> f64 {
    t.iter()
        .zip(y)
        .filter(|(ti, _)| **ti >= t_from)
        .map(|(_, yi)| *yi)
        .fold(0.0, f64::max)
}

/// Exponential decay rate of `y - floor` over the initial transient, from a
/// log-linear fit on the points before the excess first drops below
/// `cutoff` times its initial value.
pub fn transient_rate(t: &[f64], y: &[f64], floor: f64, cutoff: f64) -> Option<f64> {
    let e0 = y.first()? - floor;
    if !(e0 > 0.0) {
        return None;
    }
    let (mut xs, mut ls) = (Vec::new(), Vec::new());
    for (ti, yi) in t.iter().zip(y) {
        let e = yi - floor;
        if !(e > cutoff * e0) {
            break;
        }
        xs.push(*ti);
        ls.push(e.ln());
    }
    if xs.len() < 3 {
        return None;
    }
    least_squares(&xs, &ls).map(|(slope, _)| -slope)
}
