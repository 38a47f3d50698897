//! Ordinary least-squares line fits.

/// Result of fitting `y ≈ slope · x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; `1` for an exact fit, `NaN` when `y`
    /// is constant.
    pub r2: f64,
    /// Standard error of the slope (`NaN` with fewer than three points).
    pub slope_stderr: f64,
}

/// Least-squares line through `(x, y)`; `None` with fewer than two
/// points or constant `x`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { f64::NAN } else { 1.0 - sse / syy };
    let slope_stderr = if n > 2 { (sse / (n - 2) as f64 / sxx).sqrt() } else { f64::NAN };
    Some(LineFit { slope, intercept, r2, slope_stderr })
}

/// Weighted least-squares line with weights `w` (inverse variances).
/// The slope standard error is the model-based `1/√Σw(x−x̄)²`.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n || w.len() != n {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - mx).powi(2)).sum();
    let sxy: f64 = (0..n).map(|k| w[k] * (x[k] - mx) * (y[k] - my)).sum();
    let syy: f64 = y.iter().zip(w).map(|(a, b)| b * (a - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = (0..n).map(|k| w[k] * (y[k] - slope * x[k] - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { f64::NAN } else { 1.0 - sse / syy };
    Some(LineFit { slope, intercept, r2, slope_stderr: (1.0 / sxx).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let f = line_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
        let g = weighted_line_fit(&x, &y, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((g.slope - 2.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(line_fit(&[1.0], &[2.0]).is_none());
        assert!(line_fit(&[1.0, 1.0], &[2.0, 3.0]).is_none());
        assert!(line_fit(&[1.0, 2.0], &[3.0, 3.0]).unwrap().r2.is_nan());
    }
}
