//! Dormand–Prince 5(4) with step-size control, reporting the state at a
//! prescribed monotone list of output points.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-300,
            h0: None,
            max_steps: 2_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn combo<const N: usize>(y: &[f64; N], h: f64, ks: &[[f64; N]], w: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (k, &wi) in ks.iter().zip(w) {
        if wi != 0.0 {
            for i in 0..N {
                out[i] += h * wi * k[i];
            }
        }
    }
    out
}

/// Integrate `y' = f(t, y)` from `(t0, y0)` and return `y` at every entry of
/// `targets`, which must be monotone in the direction of integration.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    targets: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(targets.len());
    let Some(&last) = targets.last() else {
        return Ok(out);
    };
    let dir = if last >= t0 { 1.0 } else { -1.0 };
    let span = (last - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h0.unwrap_or(1e-3 * span.max(1e-12)).abs() * dir;
    let mut k1 = f(t, &y);
    let mut steps = 0usize;

    for &target in targets {
        assert!(
            (target - t) * dir >= -1e-15 * t.abs().max(1.0),
            "targets must be monotone"
        );
        while (target - t) * dir > 0.0 {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepLimit { steps, t });
            }
            let remaining = target - t;
            let landing = (h - remaining) * dir >= 0.0;
            let step = if landing { remaining } else { h };
            let k2 = f(t + C[0] * step, &combo(&y, step, &[k1], &A2));
            let k3 = f(t + C[1] * step, &combo(&y, step, &[k1, k2], &A3));
            let k4 = f(t + C[2] * step, &combo(&y, step, &[k1, k2, k3], &A4));
            let k5 = f(t + C[3] * step, &combo(&y, step, &[k1, k2, k3, k4], &A5));
            let k6 = f(t + C[4] * step, &combo(&y, step, &[k1, k2, k3, k4, k5], &A6));
            let y_new = combo(&y, step, &[k1, k2, k3, k4, k5, k6], &B);
            let k7 = f(t + step, &y_new);
            let ks = [k1, k2, k3, k4, k5, k6, k7];
            let mut err = 0.0_f64;
            for i in 0..N {
                let e: f64 = ks.iter().zip(E.iter()).map(|(k, w)| w * k[i]).sum::<f64>() * step;
                let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max(e.abs() / scale);
            }
            if !err.is_finite() {
                err = 1e10;
            }
            if err <= 1.0 {
                t = if landing { target } else { t + step };
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // A clipped landing step says little about the proposal.
                if !landing || step.abs() >= 0.99 * h.abs() {
                    h = step * fac;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            if h.abs() < 1e-15 * t.abs().max(1e-300) || h == 0.0 {
                return Err(Error::StepSizeUnderflow { t });
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let targets = [0.5, 1.0, 2.0];
        let ys = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &targets, &OdeOptions::default())
            .unwrap();
        for (t, y) in targets.iter().zip(&ys) {
            assert!((y[0] - t.exp()).abs() < 1e-10 * t.exp());
        }
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let ys = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            3.0,
            [3.0_f64.sin(), 3.0_f64.cos()],
            &[1.0, -2.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((ys[0][0] - 1.0_f64.sin()).abs() < 1e-10);
        assert!((ys[1][1] - (-2.0_f64).cos()).abs() < 1e-10);
    }
}
