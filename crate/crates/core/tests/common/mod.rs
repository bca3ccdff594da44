#![allow(dead_code)]

use blowup_core::SurfaceProfile;

/// `g = (sin rho + eps sin 3 rho) / (1 + 3 eps)`: a non-round surface with
/// `rho_M = pi` known exactly, given only through its series.
pub fn deformed_sphere(eps: f64) -> SurfaceProfile {
    let mut coeffs = Vec::new();
    let mut fact = 1.0;
    for k in 0..30 {
        let n = 2 * k + 1;
        if k > 0 {
            fact *= ((n - 1) * n) as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        coeffs.push(sign * (1.0 + eps * 3f64.powi(n as i32)) / (fact * (1.0 + 3.0 * eps)));
    }
    SurfaceProfile::from_series(&coeffs, 3.0).unwrap()
}

/// `g = sin(a rho) / a`, `rho_M = pi / a`, given through its series.
pub fn scaled_sphere(a: f64) -> SurfaceProfile {
    let mut coeffs = Vec::new();
    let mut term = 1.0;
    for k in 0..24 {
        if k > 0 {
            let n = (2 * k + 1) as f64;
            term *= -a * a / ((n - 1.0) * n);
        }
        coeffs.push(term);
    }
    SurfaceProfile::from_series(&coeffs, 3.0 / a).unwrap()
}

/// Harmonic map into the scaled sphere, `(2/a) arctan(r tan(a/2))`.
pub fn scaled_sphere_q(a: f64, r: f64) -> f64 {
    2.0 / a * (r * (0.5 * a).tan()).atan()
}

/// Sphere harmonic map `2 arctan(r tan(1/2))`.
pub fn sphere_q(r: f64) -> f64 {
    2.0 * (r * 0.5f64.tan()).atan()
}

/// `J_1(x) = (1/2pi) int_0^{2pi} cos(tau - x sin tau) d tau` by the
/// trapezoid rule, which converges geometrically for this periodic integrand.
pub fn bessel_j1(x: f64) -> f64 {
    let n = 64 + 2 * x.abs().ceil() as usize;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    (0..n)
        .map(|i| {
            let tau = i as f64 * h;
            (tau - x * tau.sin()).cos()
        })
        .sum::<f64>()
        / n as f64
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
