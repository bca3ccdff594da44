mod common;

use blowup_core::numerics::fit::loglog_slope;
use blowup_core::spectral::fundamental::FundamentalSystem;
use blowup_core::spectral::{log_grid, SpectralOperator, SpectralOptions};
use blowup_core::{HarmonicMap, SurfaceProfile};
use common::{bessel_j1, deformed_sphere, rel};
use num_complex::Complex64;
use std::sync::OnceLock;

fn sphere_op() -> &'static SpectralOperator {
    static OP: OnceLock<SpectralOperator> = OnceLock::new();
    OP.get_or_init(|| {
        let hm = HarmonicMap::solve_default(&SurfaceProfile::sphere()).unwrap();
        SpectralOperator::new(&hm, SpectralOptions::default())
    })
}

fn free_op() -> SpectralOperator {
    SpectralOperator::free(SpectralOptions::default())
}

#[test]
fn sphere_phi0_closed_form() {
    let fs = sphere_op().fundamental();
    let c = 0.5f64.tan();
    for r in [1e-3f64, 0.1, 1.0, 10.0, 1e3] {
        let exact = 2.0 * c * r.powf(1.5) / (1.0 + c * c * r * r);
        assert!(rel(fs.phi0(r), exact) < 1e-10, "{r}");
    }
    assert_eq!(fs.theta0(1.0), 0.0);
}

#[test]
fn wronskian_is_one() {
    let deformed = HarmonicMap::solve_default(&deformed_sphere(0.05)).unwrap();
    for fs in [sphere_op().fundamental().clone(), FundamentalSystem::new(&deformed)] {
        for r in [1e-2, 1.0, 1e2] {
            assert!((fs.wronskian(r) - 1.0).abs() <= 1e-9, "{r} {}", fs.wronskian(r));
        }
    }
}

#[test]
fn chi_two_routes_agree() {
    let fs = sphere_op().fundamental();
    for r in [0.2, 0.7, 3.0, 20.0] {
        let a = fs.chi(r);
        let b = fs.chi_via_target(r).unwrap();
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{r}: {a} {b}");
    }
}

#[test]
fn zero_parameter_gives_phi0() {
    let op = sphere_op();
    for r in [0.01, 0.5, 3.0] {
        let (phi, _) = op.phi_series(r, 0.0).unwrap();
        assert_eq!(phi, op.fundamental().phi0(r));
    }
    assert!(op.mode(0.0).is_err());
}

#[test]
fn free_modes_are_bessel_functions() {
    let op = free_op();
    for xi in [1e-2, 1.0, 1e2] {
        let k = f64::sqrt(xi);
        let rs: Vec<f64> = (0..=80).map(|i| (0.1 + 19.9 * i as f64 / 80.0) / k).collect();
        let mode = op.mode(xi).unwrap();
        let vals = op.phi_values(&mode, &rs).unwrap();
        for (r, v) in rs.iter().zip(&vals) {
            let exact = 2.0 / k * r.sqrt() * bessel_j1(k * r);
            assert!(
                (v[0] - exact).abs() <= 1e-7 * exact.abs().max(1e-2 * r.sqrt() / k),
                "xi {xi} r {r}: {} vs {exact}",
                v[0]
            );
        }
    }
}

#[test]
fn free_density_is_linear() {
    // Hankel transform normalization: rho(xi) = xi / 8
    let op = free_op();
    for xi in log_grid(0.1, 100.0, 25) {
        let rho = op.compute_rho(xi).unwrap();
        assert!(rel(rho, xi / 8.0) <= 1e-6, "{xi}: {rho}");
    }
}

/// `sqrt(pi x / 2) e^{-i(x - 3 pi / 4)} H_1(x)` by its asymptotic series,
/// truncated at the smallest term.
fn hankel_symbol(x: f64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..60 {
        let m = (2 * k - 1) as f64;
        let next = term * Complex64::new(0.0, 1.0) * ((4.0 - m * m) / (8.0 * k as f64 * x));
        if next.norm() > term.norm() {
            break;
        }
        term = next;
        sum += term;
    }
    sum
}

#[test]
fn free_outgoing_solution_matches_hankel() {
    let op = free_op();
    for xi in [0.5, 4.0] {
        let k = f64::sqrt(xi);
        for q in [10.0, 20.0, 60.0, 200.0] {
            let r = q / k;
            let (psi, _) = op.psi_plus(r, xi).unwrap();
            let sigma = psi * xi.powf(0.25) * Complex64::from_polar(1.0, -q);
            let exact = hankel_symbol(q);
            assert!((sigma - exact).norm() <= 1e-6, "xi {xi} q {q}: {sigma} {exact}");
        }
    }
}

#[test]
fn outgoing_solution_leading_order() {
    let op = sphere_op();
    for xi in [1e-2, 1.0, 50.0] {
        let k = f64::sqrt(xi);
        for q in [10.0, 30.0, 100.0, 1000.0] {
            let (psi, _) = op.psi_plus(q / k, xi).unwrap();
            let dev = (psi * xi.powf(0.25) * Complex64::from_polar(1.0, -q) - 1.0).norm();
            assert!(dev * q <= 1.0, "xi {xi} q {q}: {dev}");
        }
    }
}

#[test]
fn second_symbol_coefficient_limit() {
    let sym = sphere_op().symbols();
    let h1 = |y: f64| sym.coefficient(1, y) / y;
    assert!((h1(1e-4) - 0.375).abs() < 1e-6, "{}", h1(1e-4));
    // approach is O(y^2)
    let d1 = (h1(0.1) - 0.375).abs();
    let d2 = (h1(0.05) - 0.375).abs();
    assert!(d2 < 0.3 * d1, "{d1} {d2}");
}

#[test]
fn matching_is_radius_independent_and_density_positive() {
    let op = sphere_op();
    for m in op.modes(&log_grid(1e-6, 1e3, 37)).unwrap() {
        assert!(m.a_variation <= 1e-6, "{} {}", m.xi, m.a_variation);
        assert!(m.a.norm() > 0.0 && m.rho() > 0.0);
    }
}

#[test]
fn density_asymptotics() {
    let op = sphere_op();
    let hi = log_grid(10.0, 1e3, 21);
    let rho: Vec<f64> = hi.iter().map(|&x| op.compute_rho(x).unwrap()).collect();
    let slope = loglog_slope(&hi, &rho);
    assert!((slope - 1.0).abs() <= 0.05, "{slope}");
    // phi0 ~ q0 r^{3/2} at the origin fixes rho ~ xi / (8 q0^2)
    let q0 = 2.0 * 0.5f64.tan();
    assert!(rel(rho[20] / 1e3, 1.0 / (8.0 * q0 * q0)) < 0.02, "{}", rho[20] / 1e3);

    let lo = log_grid(1e-6, 1e-2, 21);
    let s: Vec<f64> = lo
        .iter()
        .map(|&x| x * op.compute_rho(x).unwrap() * x.ln().powi(2))
        .collect();
    let (mn, mx) = s.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(mn > 0.0 && mx / mn <= 10.0, "{mn} {mx}");
}

#[test]
fn regular_solution_lower_bound_shadow() {
    let op = sphere_op();
    let xi = 1e-4;
    let r = 0.1 / f64::sqrt(xi);
    let phi = op.compute_phi(r, xi).unwrap();
    let c = phi / (r.powf(-0.5) * r.ln());
    assert!(c > 0.0, "{c}");
}

#[test]
fn nonpositive_parameter_is_rejected() {
    let op = free_op();
    assert!(op.compute_rho(-1.0).is_err());
    assert!(op.compute_a(f64::NAN).is_err());
}
