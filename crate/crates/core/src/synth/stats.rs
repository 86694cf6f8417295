//! Small statistics helpers for the experiment reports.

/// Median of a sample (mean of the two middle values for even length);
/// `NaN` for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Fraction of indices where `pred` holds.
pub fn fraction(len: usize, mut pred: impl FnMut(usize) -> bool) -> f64 {
    if len == 0 {
        return f64::NAN;
    }
    (0..len).filter(|&i| pred(i)).count() as f64 / len as f64
}

/// Binomial standard error `sqrt(p(1−p)/n)`.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Least-squares slope of `log y` against `log x`, skipping pairs with a
/// nonpositive or non-finite coordinate. `NaN` with fewer than two points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Sorted copy, the x-axis of an empirical CDF.
pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1e-12, 1e-10, 1e-8];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.0 / 3.0)).collect();
        assert!((loglog_slope(&xs, &ys) - 1.0 / 3.0).abs() < 1e-12);
        assert!(loglog_slope(&[0.0, 1.0], &[1.0, 2.0]).is_nan());
    }

    #[test]
    fn fractions_and_sigma() {
        assert_eq!(fraction(4, |i| i % 2 == 0), 0.5);
        assert_eq!(binomial_sigma(0.5, 100), 0.05);
        assert_eq!(binomial_sigma(0.0, 10), 0.0);
    }
}
