mod common;

use blowup_core::{HarmonicMap, SurfaceProfile};
use common::{deformed_sphere, rel, scaled_sphere, scaled_sphere_q, sphere_q};
use proptest::prelude::*;
use std::f64::consts::PI;

fn sphere() -> HarmonicMap {
    HarmonicMap::solve_default(&SurfaceProfile::sphere()).unwrap()
}

#[test]
fn sphere_matches_closed_form() {
    let hm = sphere();
    let mut worst: f64 = 0.0;
    for i in 0..=600 {
        let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 600.0);
        worst = worst.max((hm.q(r) - sphere_q(r)).abs());
    }
    assert!(worst <= 1e-8, "{worst:e}");
    assert_eq!(hm.q(1.0), 1.0);
}

#[test]
fn sphere_derivatives_match_closed_form() {
    let hm = sphere();
    let c = 0.5f64.tan();
    for r in [1e-2, 0.3, 1.0, 7.0, 300.0] {
        let qp = 2.0 * c / (1.0 + c * c * r * r);
        let qpp = -4.0 * c.powi(3) * r / (1.0 + c * c * r * r).powi(2);
        assert!(rel(hm.q_prime(r), qp) < 1e-9, "{r}");
        assert!((hm.q_second(r) - qpp).abs() < 1e-9 * qpp.abs().max(1e-6), "{r}");
    }
}

#[test]
fn asymptotic_coefficients() {
    let hm = sphere();
    let c = 0.5f64.tan();
    assert!(rel(hm.q0_coeff(), 2.0 * c) < 1e-10);
    assert!(rel(hm.qinf_coeff(), 2.0 / c) < 1e-10);
    assert!(rel(hm.q(1e-6) / 1e-6, 2.0 * c) < 1e-9);
    assert!(rel(1e6 * (PI - hm.q(1e6)), 2.0 / c) < 1e-6);
}

#[test]
fn scaled_sphere_matches_closed_form() {
    let a = 0.8;
    let hm = HarmonicMap::solve_default(&scaled_sphere(a)).unwrap();
    for i in 0..=60 {
        let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 60.0);
        assert!((hm.q(r) - scaled_sphere_q(a, r)).abs() <= 1e-8, "{r}");
    }
}

#[test]
fn energy_of_sphere_map() {
    // int_0^inf g(Q)^2 dr / r = int_0^pi sin = 2
    let e = sphere().energy().unwrap();
    assert!((e - 2.0).abs() < 1e-8, "{e}");
}

#[test]
fn monotonicity_on_the_grid() {
    for surface in [SurfaceProfile::sphere(), scaled_sphere(0.8), deformed_sphere(0.05)] {
        let hm = HarmonicMap::solve_default(&surface).unwrap();
        let rs: Vec<f64> = hm.s_nodes().iter().map(|s| s.exp()).collect();
        let mut violations = 0;
        for w in rs.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            // a violation is a change of the wrong sign; ties below rounding are not
            if hm.q_prime(b) > hm.q_prime(a) {
                violations += 1;
            }
            if b * b * hm.q_prime(b) < a * a * hm.q_prime(a) {
                violations += 1;
            }
            if !(hm.q(a) > 0.0 && hm.q(b) < surface.rho_m() && hm.q(b) > hm.q(a)) {
                violations += 1;
            }
        }
        assert_eq!(violations, 0);
    }
}

#[test]
fn out_of_range_radius_is_rejected() {
    let hm = sphere();
    assert!(hm.eval_q(-1.0).is_err());
    assert!(hm.eval_q(f64::NAN).is_err());
}

proptest! {
    #[test]
    fn solves_the_first_order_equation(s in -6.0..6.0f64) {
        let hm = HarmonicMap::solve_default(&deformed_sphere(0.05)).unwrap();
        let r = s.exp();
        let lhs = r * hm.q_prime(r);
        let rhs = hm.surface().g(hm.q(r));
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1e-3));
    }
}
