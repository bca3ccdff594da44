use blowup_core::spectral::{log_grid, SpectralOperator, SpectralOptions};
use blowup_core::transference::{
    compute_f, diag_coefficient, diag_coefficient_from_a, fit_bounds, KernelOptions, KernelTable,
};
use blowup_core::{Error, HarmonicMap, SurfaceProfile};
use std::sync::OnceLock;

fn sphere_op() -> &'static SpectralOperator {
    static OP: OnceLock<SpectralOperator> = OnceLock::new();
    OP.get_or_init(|| {
        let hm = HarmonicMap::solve_default(&SurfaceProfile::sphere()).unwrap();
        SpectralOperator::new(&hm, SpectralOptions::default())
    })
}

fn small_table() -> &'static KernelTable {
    static T: OnceLock<KernelTable> = OnceLock::new();
    T.get_or_init(|| {
        KernelTable::build(sphere_op(), &log_grid(0.05, 5.0, 9), &KernelOptions::default()).unwrap()
    })
}

/// `V = -2 sin^2 Q / R^2` with `Q = 2 arctan(c R)`.
fn sphere_v(r: f64) -> f64 {
    let q = 2.0 * (0.5f64.tan() * r).atan();
    -2.0 * q.sin().powi(2) / (r * r)
}

fn sphere_w(r: f64) -> f64 {
    let h = 1e-5 * r;
    let vp = (sphere_v(r + h) - sphere_v(r - h)) / (2.0 * h);
    -(2.0 * sphere_v(r) + r * vp)
}

#[test]
fn commutator_potential_matches_closed_form() {
    let p = sphere_op().potential();
    for r in [1e-3, 0.1, 1.0, 3.0, 30.0, 300.0] {
        let (a, b) = (p.w(r), sphere_w(r));
        assert!((a - b).abs() <= 1e-7 * b.abs().max(1e-12), "{r}: {a} {b}");
    }
}

#[test]
fn pair_value_matches_independent_quadrature() {
    let op = sphere_op();
    let (xi, eta) = (0.5, 2.0);
    let f = compute_f(op, xi, eta, &KernelOptions::default()).unwrap();
    let modes = op.modes(&[xi, eta]).unwrap();
    let r_cut = 400.0;
    let n = 40000;
    let rs: Vec<f64> = (0..=n).map(|i| r_cut * i as f64 / n as f64).skip(1).collect();
    let px = op.phi_values(&modes[0], &rs).unwrap();
    let pe = op.phi_values(&modes[1], &rs).unwrap();
    let h = r_cut / n as f64;
    // trapezoid on a uniform grid; the integrand vanishes like R^3 at the origin
    let mut oracle = 0.0;
    for (k, r) in rs.iter().enumerate() {
        let w = if k + 1 == rs.len() { 0.5 * h } else { h };
        oracle += w * sphere_w(*r) * px[k][0] * pe[k][0];
    }
    assert!((f - oracle).abs() <= 1e-5 * f.abs().max(1e-3), "{f} {oracle}");
}

#[test]
fn kernel_is_symmetric() {
    let t = small_table();
    assert!(t.symmetry_defect() <= 1e-8, "{}", t.symmetry_defect());
    let op = sphere_op();
    let o = KernelOptions::default();
    let (a, b) = (compute_f(op, 0.3, 1.7, &o).unwrap(), compute_f(op, 1.7, 0.3, &o).unwrap());
    assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-6));
}

#[test]
fn diagonal_vanishes_at_low_frequency() {
    let op = sphere_op();
    let o = KernelOptions::default();
    // F(xi, xi)/xi levels off as xi -> 0
    let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&xi| compute_f(op, xi, xi, &o).unwrap().abs() / xi)
        .collect();
    for w in ratios.windows(3) {
        assert!((w[2] - w[1]).abs() < (w[1] - w[0]).abs(), "{ratios:?}");
    }
    assert!(ratios.iter().all(|r| *r < 20.0), "{ratios:?}");
}

#[test]
fn off_diagonal_kernel_excludes_band() {
    let t = small_table();
    assert!(matches!(t.k0(4, 4), Err(Error::DiagonalBand { .. })));
    assert!(matches!(t.k0(4, 5), Err(Error::DiagonalBand { .. })));
    let k = t.k0(1, 7).unwrap();
    let expect = t.rho[1] * t.f[1][7] / (t.xis[1] - t.xis[7]);
    assert_eq!(k, expect);
    assert!(k.is_finite());
}

#[test]
fn diagonal_coefficient_routes_agree() {
    let xis = log_grid(0.1, 10.0, 41);
    let op = sphere_op();
    let rho: Vec<f64> = xis.iter().map(|&x| op.compute_rho(x).unwrap()).collect();
    for eta in [0.3, 1.0, 3.0] {
        let g = diag_coefficient(&xis, &rho, eta).unwrap();
        let a = diag_coefficient_from_a(op, eta, 1e-3).unwrap();
        assert!((g - a).abs() < 1e-3, "{eta}: {g} {a}");
    }
}

#[test]
fn diagonal_coefficient_large_eta() {
    // rho ~ xi/(8 q0^2) at high frequency
    let d = diag_coefficient_from_a(sphere_op(), 1e4, 1e-3).unwrap();
    assert!((d + 2.5).abs() < 0.1, "{d}");
}

#[test]
fn free_density_gives_exact_coefficient() {
    let xis = log_grid(1e-3, 1e3, 13);
    let rho: Vec<f64> = xis.iter().map(|x| x / 8.0).collect();
    for &eta in &xis[1..12] {
        assert!((diag_coefficient(&xis, &rho, eta).unwrap() + 2.5).abs() < 1e-12);
    }
}

#[test]
fn grid_ends_are_rejected() {
    let xis = log_grid(0.1, 10.0, 5);
    let rho = vec![1.0; 5];
    for eta in [0.1, 10.0, 0.05, 20.0] {
        assert!(matches!(diag_coefficient(&xis, &rho, eta), Err(Error::GridEdge(_))), "{eta}");
    }
    assert!(KernelTable::build(sphere_op(), &[1.0, 0.5, 2.0], &KernelOptions::default()).is_err());
}

#[test]
fn tail_bound_respects_tolerance() {
    let t = small_table();
    assert!(t.tail_bound <= 1e-8 * (1.0 + 1e-12), "{}", t.tail_bound);
    assert!(t.r_cut >= 10.0);
}

#[test]
fn bound_constants_are_finite() {
    let b = fit_bounds(sphere_op(), &log_grid(0.05, 4.0, 4), 60.0).unwrap();
    for c in [b.value_small, b.value_large, b.first_small, b.first_large, b.second_small, b.second_large] {
        assert!(c.is_finite() && c >= 0.0);
    }
    assert!(b.value_small > 0.0 && b.value_large > 0.0);
}
