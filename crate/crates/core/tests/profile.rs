use blowup_core::profile::{
    self, residual, scaled_e0, scaled_e1, BlowupFrame, Corrector, ProfileEvaluator, StaticQ, U0, U1,
    DEFAULT_R_MATCH,
};
use blowup_core::{Error, HarmonicMap, SurfaceProfile};
use proptest::prelude::*;
use std::sync::OnceLock;

fn hm() -> &'static HarmonicMap {
    static HM: OnceLock<HarmonicMap> = OnceLock::new();
    HM.get_or_init(|| HarmonicMap::solve_default(&SurfaceProfile::sphere()).unwrap())
}

fn corrector_nu1() -> &'static Corrector {
    static C: OnceLock<Corrector> = OnceLock::new();
    C.get_or_init(|| corrector(1.0))
}

fn corrector(nu: f64) -> Corrector {
    Corrector::solve(nu, hm(), 2e3, DEFAULT_R_MATCH, 1e-12).unwrap()
}

#[test]
fn frame_rejects_bad_parameters() {
    assert!(matches!(BlowupFrame::new(0.5, 1.0), Err(Error::Domain(_))));
    assert!(matches!(BlowupFrame::new(1.0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(Corrector::solve(0.4, hm(), 10.0, 1.0, 1e-12), Err(Error::Domain(_))));
}

#[test]
fn u0_examples() {
    let f = BlowupFrame::new(1.0, 1.0).unwrap();
    assert_eq!(profile::eval_u0(&f, hm(), 1.0, 1.0), 1.0);
    assert_eq!(profile::eval_u0(&f, hm(), 0.5, 0.5), hm().q(2.0));
    assert_eq!(profile::eval_u0(&f, hm(), 0.5, 0.0), 0.0);
    let g = BlowupFrame::new(0.7, 1.0).unwrap();
    assert_eq!(profile::eval_u0(&g, hm(), 1.0, 1.0), 1.0);
}

#[test]
fn e0_examples() {
    let f = BlowupFrame::new(1.0, 1.0).unwrap();
    assert_eq!(profile::eval_e0(&f, hm(), 0.3, 0.0), 0.0);
    let s1 = 1f64.sin();
    let q2 = -s1 * (1.0 - 1f64.cos());
    let exact = -(6.0 * s1 + 4.0 * q2);
    assert!((profile::eval_e0(&f, hm(), 1.0, 1.0) - exact).abs() < 1e-12);
}

#[test]
fn e0_matches_generic_residual() {
    for nu in [0.6, 1.0, 1.5] {
        let f = BlowupFrame::new(nu, 1.0).unwrap();
        let p = U0 { frame: f, hm: hm() };
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let t = 10f64.powf(-3.0 + 3.0 * (i % 10) as f64 / 9.0);
            let r = t * (i / 10 + 1) as f64 / 100.0;
            let a = profile::eval_e0(&f, hm(), t, r);
            let b = residual(&p, hm().surface(), t, r);
            worst = worst.max(t * t * (a - b).abs());
        }
        assert!(worst <= 1e-10, "nu {nu}: {worst:e}");
    }
}

#[test]
fn static_map_is_a_solution() {
    let p = StaticQ { hm: hm() };
    for r in [1e-3, 0.1, 1.0, 10.0, 1e3] {
        let res = residual(&p, hm().surface(), 0.0, r);
        let scale = hm().q_prime(r) / r;
        assert!(res.abs() <= 1e-11 * scale.max(1.0), "{r}: {res}");
    }
    assert_eq!(residual(&p, hm().surface(), 0.0, 0.0), 0.0);
}

#[test]
fn corrector_solves_its_equation() {
    for nu in [0.6, 1.0, 1.5] {
        let c = corrector(nu);
        let worst = (0..=600)
            .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 600.0))
            .map(|r| c.residual(r).unwrap().abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "nu {nu}: {worst:e}");
        assert!(c.overlap_defect() <= 1e-8);
        assert!(c.residual(3e3).is_err());
    }
}

#[test]
fn corrector_vanishes_to_third_order() {
    let c = corrector(1.0);
    let v1 = c.cubic_coefficient();
    assert!(v1.is_finite() && v1.abs() > 1e-3);
    for r in [1e-3, 1e-2] {
        assert!(((c.w(r) / r.powi(3)) - v1).abs() <= 1e-3 * v1.abs() + 10.0 * r * r);
    }
    let (w, w1, _) = c.w_jet(1e-6);
    assert!(w.abs() < 1e-17 && w1.abs() < 1e-11);
}

#[test]
fn series_and_quadrature_branches_agree() {
    let c = corrector(0.8);
    for r in [0.4, 0.6, 0.9] {
        let (a, b) = (c.w_series(r), c.w_quadrature(r));
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-6), "{r}: {a} {b}");
    }
}

#[test]
fn rescaled_e1_matches_generic_residual() {
    let c = corrector(1.0);
    let p = U1 { corrector: &c };
    for t in [0.05f64, 0.2] {
        for big_r in [0.1, 1.0, 3.0] {
            let r = big_r * t.powf(2.0);
            let generic = t * t * residual(&p, hm().surface(), t, r);
            let scaled = scaled_e1(&c, t, big_r);
            assert!((generic - scaled).abs() <= 1e-6 * scaled.abs().max(1e-4), "{t} {big_r}: {generic} {scaled}");
        }
    }
}

#[test]
fn scaled_e0_decay_pattern_is_stable() {
    let fit = |n: usize| {
        (0..=n)
            .map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / n as f64))
            .map(|r| scaled_e0(1.0, hm(), r).abs() / r.min((1.0 + r.ln().max(0.0)) / r))
            .fold(0.0, f64::max)
    };
    let (c1, c2) = (fit(200), fit(400));
    assert!(c1.is_finite() && (c1 - c2).abs() <= 0.05 * c2, "{c1} {c2}");
}

#[test]
fn corrector_reduces_the_error() {
    // honest statement of what the corrector achieves in the sup norm over
    // the half cone: a gain growing as t decreases
    let c = Corrector::solve(1.0, hm(), profile::required_r_max(1.0, 1e-3), DEFAULT_R_MATCH, 1e-12).unwrap();
    let samples = profile::error_sweep(&c, &[1e-3, 1e-2, 1e-1], 300).unwrap();
    assert!(samples.iter().all(|s| s.ratio < 1.0));
    assert!(samples[0].ratio < samples[2].ratio);
    assert!(profile::improvement_exponent(&samples) > 0.5);
}

#[test]
fn local_energy_approaches_ground_state() {
    let e_q = hm().energy().unwrap();
    assert!((e_q - 2.0).abs() < 1e-8);
    let f = BlowupFrame::new(1.0, 0.5).unwrap();
    let mut prev = f64::INFINITY;
    for t in [0.5, 0.2, 0.1, 0.05, 0.02, 0.01] {
        let e = profile::local_energy_of_profile(&f, hm(), t).unwrap();
        assert!(e > 0.0);
        if t * f.lambda(t) >= 10.0 {
            assert!(e >= 0.9 * e_q, "{t}: {e}");
        }
        // the kinetic part overshoots E(Q) once the core fits in the cone, then decays
        if t * f.lambda(t) >= 5.0 {
            assert!(e >= e_q, "{t}: {e}");
            assert!(e <= prev + 1e-12, "{t}");
            prev = e;
        }
    }
    assert!((prev - e_q).abs() < 0.02, "{prev}");
    assert!(profile::local_energy_of_profile(&f, hm(), 0.6).is_err());
}

proptest! {
    #[test]
    fn frame_coordinates_are_consistent(nu in 0.55..2.0f64, t in 1e-3..1.0f64, s in 0.0..1.0f64) {
        let f = BlowupFrame::new(nu, 1.0).unwrap();
        let r = s * t;
        let c = f.coords(t, r);
        let l = (2.0 + c.big_r * c.big_r).ln();
        prop_assert!((c.b - c.b2 * l * l).abs() <= 1e-14 * c.b.abs().max(1e-300));
        prop_assert!((c.b1 - c.b2 * l).abs() <= 1e-14 * c.b1.abs().max(1e-300));
        prop_assert!((c.a * t * c.lambda - c.big_r).abs() <= 1e-12 * c.big_r.max(1e-300));
        prop_assert!(f.in_cone(t, r));
    }

    #[test]
    fn u1_at_unit_time_adds_w(r in 0.0..0.5f64) {
        // at t = 1 the frame has lambda = 1 and eps = 1, so u1 - u0 = w
        let c = corrector_nu1();
        let f = BlowupFrame::new(1.0, 1.0).unwrap();
        let j1 = U1 { corrector: c }.jet(1.0, r);
        let j0 = U0 { frame: f, hm: hm() }.jet(1.0, r);
        prop_assert!((j1.u - j0.u - c.w(r)).abs() <= 1e-14);
    }
}
