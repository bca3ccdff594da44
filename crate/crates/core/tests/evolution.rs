use blowup_core::evolution::{
    self, dyadic_times, evolve, init_from_profile, init_static, GridOptions, RadialField, RunOptions,
    RunStatus,
};
use blowup_core::profile::{BlowupFrame, Corrector, DEFAULT_R_MATCH};
use blowup_core::{Error, HarmonicMap, SurfaceProfile};
use proptest::prelude::*;
use std::sync::OnceLock;

fn hm() -> &'static HarmonicMap {
    static HM: OnceLock<HarmonicMap> = OnceLock::new();
    HM.get_or_init(|| HarmonicMap::solve_default(&SurfaceProfile::sphere()).unwrap())
}

fn bump(r: f64, a: f64, b: f64) -> f64 {
    if r <= a || r >= b {
        0.0
    } else {
        (std::f64::consts::PI * (r - a) / (b - a)).sin().powi(4)
    }
}

fn perturbed(n: usize, r_max: f64, eps: f64) -> RadialField {
    let grid = GridOptions { n, r_max };
    RadialField::from_fn(hm().surface(), grid, 0.0, |r| hm().q(r) + eps * bump(r, 1.0, 3.0), |_| 0.0).unwrap()
}

fn run_to(field: &mut RadialField, t_end: f64, cfl: f64) {
    let tr = evolve(field, t_end, cfl, &[], |_| vec![], |_| None).unwrap();
    assert_eq!(tr.status, RunStatus::Completed);
}

#[test]
fn static_solution_is_preserved() {
    let mut f = init_static(hm(), GridOptions { n: 2000, r_max: 100.0 }).unwrap();
    let e0 = f.energy();
    let u0 = f.u().to_vec();
    let dt = 0.5 * f.h();
    for _ in 0..10_000 {
        f.step(dt, 0.5).unwrap();
    }
    assert!(((f.energy() - e0) / e0).abs() <= 1e-4);
    let du = f.u().iter().zip(&u0).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    // Q is an equilibrium only up to the O(h^2) truncation error
    assert!(du <= 0.1, "{du}");
}

#[test]
fn discrete_energy_of_ground_state() {
    let f = init_static(hm(), GridOptions { n: 4000, r_max: 100.0 }).unwrap();
    // E(Q) = 2; the part beyond r = 100 is below 1e-3
    let e = f.energy();
    assert!((e - 2.0).abs() < 0.01 * 2.0, "{e}");
    assert!(e < 2.0);
}

#[test]
fn zero_field_has_zero_energy() {
    let mut f =
        RadialField::from_fn(hm().surface(), GridOptions { n: 100, r_max: 5.0 }, 0.0, |_| 0.0, |_| 0.0).unwrap();
    assert_eq!(f.energy(), 0.0);
    run_to(&mut f, 1.0, 0.5);
    assert_eq!(f.energy(), 0.0);
    assert_eq!(f.sup_abs(), 0.0);
}

#[test]
fn reversibility() {
    let mut f = perturbed(400, 20.0, 0.3);
    let (u0, v0) = (f.u().to_vec(), f.ut().to_vec());
    run_to(&mut f, 2.0, 0.5);
    run_to(&mut f, 0.0, 0.5);
    let du = f.u().iter().zip(&u0).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let dv = f.ut().iter().zip(&v0).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(du.max(dv) <= 1e-8, "{du} {dv}");
}

#[test]
fn energy_drift_is_second_order() {
    let drift = |n: usize| {
        let mut f = perturbed(n, 20.0, 0.3);
        let e0 = f.energy();
        run_to(&mut f, 2.0, 0.5);
        (f.energy() - e0).abs()
    };
    let (a, b) = (drift(800), drift(1600));
    let order = (a / b).log2();
    assert!((order - 2.0).abs() <= 0.2, "{a:e} {b:e} {order}");
}

#[test]
fn small_data_is_linear() {
    let run = |eps: f64| {
        let grid = GridOptions { n: 400, r_max: 10.0 };
        let mut f = RadialField::from_fn(hm().surface(), grid, 0.0, |r| eps * bump(r, 1.0, 3.0), |_| 0.0).unwrap();
        run_to(&mut f, 3.0, 0.5);
        f.u().to_vec()
    };
    let (a, b) = (run(1e-6), run(2e-6));
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let dev = a.iter().zip(&b).fold(0.0_f64, |m, (x, y)| m.max((2.0 * x - y).abs()));
    assert!(dev <= 1e-10 * scale, "{dev:e} {scale:e}");
}

#[test]
fn axis_behaviour() {
    let f = init_static(hm(), GridOptions { n: 2000, r_max: 20.0 }).unwrap();
    let q0 = 2.0 * 0.5f64.tan();
    assert!((f.axis_slope() - q0).abs() < 1e-3 * q0, "{}", f.axis_slope());
    let mut g = perturbed(400, 20.0, 0.3);
    run_to(&mut g, 3.0, 0.5);
    assert!(g.axis_slope().is_finite() && g.axis_slope().abs() < 10.0);
    assert!((g.radii()[0] - g.h()).abs() < 1e-15);
}

#[test]
fn cfl_violation_is_reported() {
    let mut f = perturbed(100, 5.0, 0.1);
    let h = f.h();
    assert!(matches!(f.step(0.6 * h, 0.5), Err(Error::Cfl { .. })));
    assert!(matches!(f.step(-1.1 * h, 2.0), Err(Error::Cfl { .. })));
    assert!(f.step(0.5 * h, 0.5).is_ok());
}

#[test]
fn non_finite_values_stop_the_run() {
    let grid = GridOptions { n: 100, r_max: 5.0 };
    let mut f =
        RadialField::from_fn(hm().surface(), grid, 0.0, |r| if r > 2.0 && r < 2.1 { f64::NAN } else { 0.0 }, |_| 0.0)
            .unwrap();
    let tr = evolve(&mut f, 1.0, 0.5, &[], |_| vec![], |_| None).unwrap();
    assert!(matches!(tr.status, RunStatus::NonFinite { .. }));
}

#[test]
fn under_resolved_core_is_rejected() {
    let frame = BlowupFrame::new(1.0, 1.0).unwrap();
    // core radius 1/lambda(0.1) = 0.01 on h = 1e-3
    let r = init_from_profile(&frame, hm(), None, 0.1, GridOptions { n: 1000, r_max: 1.0 });
    assert!(matches!(r, Err(Error::Resolution(_))));
    assert!(matches!(
        RadialField::from_fn(hm().surface(), GridOptions { n: 3, r_max: 1.0 }, 0.0, |_| 0.0, |_| 0.0),
        Err(Error::Resolution(_))
    ));
    let opts = RunOptions::default();
    let r = evolution::run_blowup_experiment(&frame, hm(), None, 0.2, 0.05, GridOptions { n: 2000, r_max: 1.0 }, opts);
    assert!(matches!(r, Err(Error::Resolution(_))));
}

#[test]
fn dyadic_report_times() {
    let t = dyadic_times(0.2, 0.05);
    assert_eq!(t.len(), 1);
    assert!((t[0] - 0.1).abs() < 1e-15);
    assert!(dyadic_times(0.2, 0.1).is_empty());
}

#[test]
fn short_blowup_run_keeps_energy_in_cone() {
    let frame = BlowupFrame::new(1.0, 1.0).unwrap();
    let (t_start, t_end) = (0.2, 0.1);
    let big_r = frame.lambda(t_start) * 1.01;
    let c = Corrector::solve(1.0, hm(), big_r.max(10.0), DEFAULT_R_MATCH, 1e-12).unwrap();
    let grid = GridOptions { n: 6000, r_max: 1.0 };
    let ex = evolution::run_blowup_experiment(&frame, hm(), Some(&c), t_start, t_end, grid, RunOptions::default())
        .unwrap();
    assert_eq!(ex.status, RunStatus::Completed);
    assert_eq!(ex.rows.len(), 2);
    for row in &ex.rows {
        assert!(row.e_loc_cone >= ex.e_q * 0.9, "{row:?}");
        assert!(row.min_dt.is_finite() || row.t == t_start);
    }
    let drift = (ex.rows[1].e_total - ex.rows[0].e_total).abs() / ex.rows[0].e_total;
    assert!(drift < 1e-3, "{drift}");
}

#[test]
fn control_run_disperses() {
    let frame = BlowupFrame::new(1.0, 1.0).unwrap();
    let grid = GridOptions { n: 4000, r_max: 1.0 };
    let ex = evolution::run_control(&frame, hm(), 0.1, 0.2, 0.05, grid, RunOptions::default()).unwrap();
    assert_eq!(ex.status, RunStatus::Completed);
    let last = ex.rows.last().unwrap();
    assert!(last.e_loc_cone < 0.1 * ex.rows[0].e_loc_cone.max(1e-3), "{:?}", ex.rows);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn local_energy_is_monotone_in_radius(eps in -0.5..0.5f64, t in 0.0..1.5f64) {
        let mut f = perturbed(200, 10.0, eps);
        if t > 0.0 {
            run_to(&mut f, t, 0.5);
        }
        let mut prev = 0.0;
        for k in 1..=20 {
            let e = f.local_energy(0.5 * k as f64);
            prop_assert!(e >= prev - 1e-14);
            prev = e;
        }
        prop_assert!(prev <= f.energy() + 1e-12);
    }

    #[test]
    fn energy_is_conserved_without_sponge(eps in -0.5..0.5f64) {
        let mut f = perturbed(400, 20.0, eps);
        let e0 = f.energy();
        run_to(&mut f, 1.0, 0.5);
        prop_assert!((f.energy() - e0).abs() <= 1e-3 * e0);
    }
}
