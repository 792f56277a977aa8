//! Small shared numerics: least-squares line fits and log-log slopes.

/// Ordinary least squares fit y = intercept + slope * x.
/// Returns (slope, intercept, max absolute residual).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(n >= 2.0, "need at least two points to fit a line");
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    (slope, intercept, resid)
}

/// Fits ln y = a - beta * ln x over the given (x, y) points with y > 0,
/// returning (beta, residual). Points with y <= 0 are skipped.
pub fn log_log_decay_exponent(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let filtered: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if filtered.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = filtered.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = filtered.iter().map(|p| p.1).collect();
    let (slope, _, resid) = linear_fit(&xs, &ys);
    Some((-slope, resid))
}

/// Geometric growth rate of a positive sequence fitted over its last
/// `window` terms: exp(slope of ln y_n against n).
pub fn tail_growth_rate(values: &[f64], window: usize) -> Option<f64> {
    let pos: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (i as f64, v.ln()))
        .collect();
    if pos.len() < 2 {
        return None;
    }
    let tail = &pos[pos.len().saturating_sub(window)..];
    if tail.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let (slope, _, _) = linear_fit(&xs, &ys);
    Some(slope.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (s, i, r) = linear_fit(&xs, &ys);
        assert!((s - 2.0).abs() < 1e-12);
        assert!((i - 1.0).abs() < 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn recovers_power_law() {
        let pts: Vec<(f64, f64)> = (1..50).map(|m| (m as f64, (m as f64).powi(-3))).collect();
        let (beta, resid) = log_log_decay_exponent(&pts).unwrap();
        assert!((beta - 3.0).abs() < 1e-10);
        assert!(resid < 1e-10);
    }

    #[test]
    fn growth_rate_of_geometric_sequence() {
        let vals: Vec<f64> = (0..30).map(|n| 3.0f64.powi(n)).collect();
        let r = tail_growth_rate(&vals, 5).unwrap();
        assert!((r - 3.0).abs() < 1e-9);
    }
}
