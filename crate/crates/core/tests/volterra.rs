use blowup_core::spectral::fundamental::FundamentalSystem;
use blowup_core::spectral::volterra::{VolterraTables, DEFAULT_S_HI, DEFAULT_S_LO};
use blowup_core::{HarmonicMap, SurfaceProfile};

fn fundamental() -> FundamentalSystem {
    FundamentalSystem::new(&HarmonicMap::solve_default(&SurfaceProfile::sphere()).unwrap())
}

/// `(C, C2)` with `|phi_j(u)| <= C2 C^j / (j-1)! log(1+u)` for `j = 1..=8`.
fn fitted_constants(t: &VolterraTables) -> (f64, f64) {
    let us: Vec<f64> = (0..=240).map(|i| (-22.0 + 44.0 * i as f64 / 240.0f64).exp()).collect();
    let mut m = Vec::new();
    let mut fact = 1.0;
    for j in 1..=8usize {
        if j > 1 {
            fact *= (j - 1) as f64;
        }
        let sup = us
            .iter()
            .map(|&u| t.phi_j(j, u).abs() * fact / u.ln_1p())
            .fold(0.0, f64::max);
        m.push(sup);
    }
    let c = (1..8).map(|j| (m[j] / m[0]).powf(1.0 / j as f64)).fold(0.0, f64::max);
    (c, m[0] / c)
}

#[test]
fn coefficients_vanish_at_the_origin() {
    let t = VolterraTables::build(&fundamental(), DEFAULT_S_LO, DEFAULT_S_HI, 14);
    let u0 = 1e-12;
    for j in 1..=8 {
        assert_eq!(t.phi_j(j, 0.0), 0.0);
        assert!(t.phi_j(j, u0).abs() <= 1e-10, "j {j}");
        // linear vanishing: phi_j(u)/u settles as u -> 0
        let u1 = DEFAULT_S_LO.exp().powi(2) * 4.0;
        let (a, b) = (t.phi_j(j, u1) / u1, t.phi_j(j, 4.0 * u1) / (4.0 * u1));
        assert!((a - b).abs() <= 1e-3 * a.abs(), "j {j}: {a} {b}");
    }
}

#[test]
fn factorial_bound_is_stable_under_refinement() {
    let fs = fundamental();
    let coarse = VolterraTables::build_with(&fs, DEFAULT_S_LO, DEFAULT_S_HI, 8, 0.2, 16);
    let fine = VolterraTables::build_with(&fs, DEFAULT_S_LO, DEFAULT_S_HI, 8, 0.1, 16);
    let (c1, k1) = fitted_constants(&coarse);
    let (c2, k2) = fitted_constants(&fine);
    assert!(c1.is_finite() && c1 > 0.0 && k1.is_finite() && k1 > 0.0);
    assert!((c1 - c2).abs() <= 0.2 * c2, "{c1} {c2}");
    assert!((k1 - k2).abs() <= 0.2 * k2, "{k1} {k2}");
}

#[test]
fn first_coefficient_grows_logarithmically() {
    // f_1(r) = r^2 phi_1(r^2) is negative with |f_1(u)| >= c u log u
    let t = VolterraTables::build(&fundamental(), DEFAULT_S_LO, DEFAULT_S_HI, 4);
    let c = (0..=40)
        .map(|i| 10f64.powf(2.0 + 2.0 * i as f64 / 40.0))
        .map(|u| {
            assert!(t.phi_j(1, u) < 0.0);
            t.phi_j(1, u).abs() / u.ln()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(c > 0.1, "{c}");
}

#[test]
fn free_coefficients_are_bessel_series() {
    // free: phi = (2/k) sqrt(r) J_1(k r) gives phi_j(u) = u (-1/4)^j / (j! (j+1)!)
    let t = VolterraTables::build(&FundamentalSystem::free(), DEFAULT_S_LO, DEFAULT_S_HI, 6);
    for j in 1..=6usize {
        let fj: f64 = (1..=j).map(|i| i as f64).product();
        let exact = (-0.25f64).powi(j as i32) / (fj * fj * (j + 1) as f64);
        for u in [1e-6, 1.0, 1e4] {
            let got = t.phi_j(j, u) / u;
            assert!((got - exact).abs() <= 1e-10 * exact.abs(), "j {j} u {u}: {got} {exact}");
        }
    }
}
