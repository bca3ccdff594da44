//! Least-squares line fits.

/// Slope and intercept of the least-squares line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Exponent `p` of the best fit `y ~ c x^p`; inputs must be positive.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x = [0.1, 0.2, 0.5, 1.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 2.5 * v.powf(1.7)).collect();
        assert!((loglog_slope(&x, &y) - 1.7).abs() < 1e-12);
    }
}
