//! The blow-up ansatz `u0 = Q(lambda(t) r)`, `lambda = t^{-1-nu}`, its error
//! `e0`, the first corrector `v1 = (t lambda)^{-2} w(R)` and residuals of
//! profiles in the wave-map equation
//! `e = (-d_t^2 + d_r^2 + r^{-1} d_r) u - f(u)/r^2`.
//!
//! `t^2 e0` depends on `R` alone:
//! `t^2 e0 = -[(1+nu)(2+nu) R Q' + (1+nu)^2 R^2 Q''] = -(1+nu) g(Q) [1 + (1+nu) g'(Q)]`.
//! The corrector solves `w'' + w'/R - f'(Q) w/R^2 = -t^2 e0` with zero data at
//! the origin. With `phi0 = R^{1/2} g(Q)` this is
//! `w = -g(Q) C`, `C = int_0^R I / (S g(Q)^2) dS`, `I = int_0^R S g(Q) t^2 e0 dS`.

use crate::error::{Error, Result};
use crate::harmonic_map::HarmonicMap;
use crate::numerics::cheb::PanelTable;
use crate::numerics::fit::loglog_slope;
use crate::numerics::{quad, series};
use crate::surface::SurfaceProfile;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupFrame {
    nu: f64,
    t0: f64,
}

/// Self-similar coordinates of one point `(t, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameCoords {
    pub lambda: f64,
    pub big_r: f64,
    pub a: f64,
    pub tau: f64,
    pub b: f64,
    pub b1: f64,
    pub b2: f64,
}

impl BlowupFrame {
    pub fn new(nu: f64, t0: f64) -> Result<Self> {
        if !(nu > 0.5 && nu.is_finite()) {
            return Err(Error::Domain(format!("nu must exceed 1/2, got {nu}")));
        }
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::Domain(format!("t0 must be positive, got {t0}")));
        }
        Ok(Self { nu, t0 })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn lambda(&self, t: f64) -> f64 {
        t.powf(-1.0 - self.nu)
    }

    pub fn big_r(&self, t: f64, r: f64) -> f64 {
        self.lambda(t) * r
    }

    pub fn tau(&self, t: f64) -> f64 {
        t.powf(-self.nu) / self.nu
    }

    pub fn in_cone(&self, t: f64, r: f64) -> bool {
        t > 0.0 && t <= self.t0 && (0.0..=t).contains(&r)
    }

    pub fn coords(&self, t: f64, r: f64) -> FrameCoords {
        let lambda = self.lambda(t);
        let big_r = lambda * r;
        let b2 = (t * lambda).powi(-2);
        let l = (2.0 + big_r * big_r).ln();
        FrameCoords {
            lambda,
            big_r,
            a: r / t,
            tau: self.tau(t),
            b: b2 * l * l,
            b1: b2 * l,
            b2,
        }
    }
}

/// Value and the derivatives entering the residual.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub u: f64,
    pub u_t: f64,
    pub u_r: f64,
    pub u_tt: f64,
    pub u_rr: f64,
}

/// A profile with closed-form derivatives.
pub trait ProfileEvaluator {
    fn jet(&self, t: f64, r: f64) -> Jet;
}

/// Residual of a profile at `(t, r)`; the axis value is the analytic limit 0.
pub fn residual(p: &impl ProfileEvaluator, surface: &SurfaceProfile, t: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let j = p.jet(t, r);
    -j.u_tt + j.u_rr + j.u_r / r - surface.f(j.u) / (r * r)
}

/// `(Q, Q', Q'')` at `R >= 0`.
fn q_jet(hm: &HarmonicMap, big_r: f64) -> (f64, f64, f64) {
    (hm.q(big_r), hm.q_prime(big_r), hm.q_second(big_r))
}

/// The harmonic map as a static solution.
pub struct StaticQ<'a> {
    pub hm: &'a HarmonicMap,
}

impl ProfileEvaluator for StaticQ<'_> {
    fn jet(&self, _t: f64, r: f64) -> Jet {
        let (q, q1, q2) = q_jet(self.hm, r);
        Jet {
            u: q,
            u_r: q1,
            u_rr: q2,
            ..Jet::default()
        }
    }
}

pub struct U0<'a> {
    pub frame: BlowupFrame,
    pub hm: &'a HarmonicMap,
}

impl ProfileEvaluator for U0<'_> {
    fn jet(&self, t: f64, r: f64) -> Jet {
        let nu = self.frame.nu;
        let lambda = self.frame.lambda(t);
        let big_r = lambda * r;
        let (q, q1, q2) = q_jet(self.hm, big_r);
        Jet {
            u: q,
            u_r: lambda * q1,
            u_rr: lambda * lambda * q2,
            u_t: -(1.0 + nu) / t * big_r * q1,
            u_tt: ((1.0 + nu) * (2.0 + nu) * big_r * q1 + (1.0 + nu).powi(2) * big_r * big_r * q2)
                / (t * t),
        }
    }
}

/// `u1 = u0 + (t lambda)^{-2} w(lambda r)`.
pub struct U1<'a> {
    pub corrector: &'a Corrector,
}

impl U1<'_> {
    fn corrector_jet(&self, t: f64, r: f64) -> Jet {
        let c = self.corrector;
        let nu = c.nu;
        let lambda = t.powf(-1.0 - nu);
        let big_r = lambda * r;
        let eps = t.powf(2.0 * nu);
        let (w, w1, w2) = c.w_jet(big_r);
        let h = 2.0 * nu * w - (1.0 + nu) * big_r * w1;
        let h1 = (nu - 1.0) * w1 - (1.0 + nu) * big_r * w2;
        Jet {
            u: eps * w,
            u_r: eps * lambda * w1,
            u_rr: eps * lambda * lambda * w2,
            u_t: eps / t * h,
            u_tt: eps / (t * t) * ((2.0 * nu - 1.0) * h - (1.0 + nu) * big_r * h1),
        }
    }
}

impl ProfileEvaluator for U1<'_> {
    fn jet(&self, t: f64, r: f64) -> Jet {
        let c = self.corrector;
        let base = U0 {
            frame: BlowupFrame { nu: c.nu, t0: 1.0 },
            hm: &c.hm,
        }
        .jet(t, r);
        let v = self.corrector_jet(t, r);
        Jet {
            u: base.u + v.u,
            u_t: base.u_t + v.u_t,
            u_r: base.u_r + v.u_r,
            u_tt: base.u_tt + v.u_tt,
            u_rr: base.u_rr + v.u_rr,
        }
    }
}

pub fn eval_u0(frame: &BlowupFrame, hm: &HarmonicMap, t: f64, r: f64) -> f64 {
    hm.q(frame.big_r(t, r))
}

/// `t^2 e0` as a function of `R`.
pub fn scaled_e0(nu: f64, hm: &HarmonicMap, big_r: f64) -> f64 {
    if big_r == 0.0 {
        return 0.0;
    }
    -(1.0 + nu) * hm.g_of_q(big_r) * (1.0 + (1.0 + nu) * hm.g1_of_q(big_r))
}

pub fn eval_e0(frame: &BlowupFrame, hm: &HarmonicMap, t: f64, r: f64) -> f64 {
    scaled_e0(frame.nu, hm, frame.big_r(t, r)) / (t * t)
}

pub const DEFAULT_R_MATCH: f64 = 1.0;
const SERIES_TERMS: usize = 64;
const S_LO: f64 = -12.0;
const PANEL_WIDTH: f64 = 0.25;
const PANEL_ORDER: usize = 20;

/// The first corrector `w(R)`.
#[derive(Debug, Clone)]
pub struct Corrector {
    nu: f64,
    hm: HarmonicMap,
    r_match: f64,
    r_max: f64,
    /// `w = sum_k v[k] R^{2k+1}` below `r_match`.
    v: Vec<f64>,
    i_table: PanelTable,
    c_table: PanelTable,
    w_table: PanelTable,
    dw_table: PanelTable,
    ddw_table: PanelTable,
    overlap_defect: f64,
}

/// Coefficients of `w = sum V_k R^{2k+1}` from
/// `((2k+1)^2 - 1) V_k = -e_{k-1} + sum_{l=1}^{k-1} f_l V_{k-l}`, where
/// `t^2 e0 = sum e_k R^{2k+1}` and `f'(Q(R)) = 1 + sum f_l R^{2l}`.
pub fn corrector_series(nu: f64, hm: &HarmonicMap, n: usize) -> Vec<f64> {
    let sf = hm.surface();
    let a = series::odd_flow_coefficients(sf.series_g(), hm.q0_coeff(), n);
    let q2 = series::mul(&a, &a, n);
    let mut y = vec![0.0; n];
    y[1..].copy_from_slice(&q2[..n - 1]);
    let fl = series::compose(sf.series_f1(), &y, n);
    let e: Vec<f64> = (0..n)
        .map(|k| {
            let kf = k as f64;
            -a[k] * (2.0 * kf + 1.0) * ((1.0 + nu) * (2.0 + nu) + 2.0 * kf * (1.0 + nu).powi(2))
        })
        .collect();
    let mut v = vec![0.0; n];
    for k in 1..n {
        let mut rhs = -e[k - 1];
        for l in 1..k {
            rhs += fl[l] * v[k - l];
        }
        v[k] = rhs / ((2.0 * k as f64 + 1.0).powi(2) - 1.0);
    }
    v
}

impl Corrector {
    /// Build `w` on `[0, r_max]`; series below `r_match`, quadrature above.
    pub fn solve(nu: f64, hm: &HarmonicMap, r_max: f64, r_match: f64, tol: f64) -> Result<Self> {
        if !(nu > 0.5) {
            return Err(Error::Domain(format!("nu must exceed 1/2, got {nu}")));
        }
        if !(r_max > r_match && r_match > 0.0) {
            return Err(Error::Domain(format!(
                "need 0 < r_match < r_max, got {r_match}, {r_max}"
            )));
        }
        let v = corrector_series(nu, hm, SERIES_TERMS);
        let tail = v[SERIES_TERMS - 1].abs() * r_match.powi(2 * SERIES_TERMS as i32 - 1);
        if !(tail <= tol) {
            return Err(Error::Truncation {
                estimate: tail,
                tol,
            });
        }

        let s_hi = r_max.ln() + PANEL_WIDTH;
        let n_panels = ((s_hi - S_LO) / PANEL_WIDTH).ceil() as usize;
        let s_hi = S_LO + n_panels as f64 * PANEL_WIDTH;
        let layout = PanelTable::node_layout(S_LO, s_hi, n_panels, PANEL_ORDER);
        let di: Vec<Vec<f64>> = layout
            .iter()
            .map(|p| {
                p.iter()
                    .map(|&s| {
                        let r = s.exp();
                        r * r * hm.g_of_q(r) * scaled_e0(nu, hm, r)
                    })
                    .collect()
            })
            .collect();
        // I ~ R^4 and C ~ R^2 below the table
        let i_table =
            PanelTable::from_panel_values(S_LO, s_hi, &di).cumulative_integral(di[0][0] / 4.0);
        let dc: Vec<Vec<f64>> = layout
            .iter()
            .map(|p| {
                p.iter()
                    .map(|&s| i_table.eval(s) / hm.g_of_q(s.exp()).powi(2))
                    .collect()
            })
            .collect();
        let c_table =
            PanelTable::from_panel_values(S_LO, s_hi, &dc).cumulative_integral(dc[0][0] / 2.0);
        let wv: Vec<Vec<f64>> = layout
            .iter()
            .map(|p| p.iter().map(|&s| -hm.g_of_q(s.exp()) * c_table.eval(s)).collect())
            .collect();
        let w_table = PanelTable::from_panel_values(S_LO, s_hi, &wv);
        let dw_table = w_table.derivative();
        let ddw_table = dw_table.derivative();

        let mut c = Self {
            nu,
            hm: hm.clone(),
            r_match,
            r_max,
            v,
            i_table,
            c_table,
            w_table,
            dw_table,
            ddw_table,
            overlap_defect: 0.0,
        };
        // half-decade window below the matching radius
        let window: Vec<f64> = (0..=20)
            .map(|i| r_match * 10f64.powf(-0.5 * i as f64 / 20.0))
            .collect();
        let scale = window
            .iter()
            .fold(0.0_f64, |m, &r| m.max(c.w_series(r).abs()));
        let defect = window
            .iter()
            .fold(0.0_f64, |m, &r| m.max((c.w_series(r) - c.w_quadrature(r)).abs()))
            / scale;
        c.overlap_defect = defect;
        if !(defect <= 100.0 * tol) {
            return Err(Error::Inconsistency {
                what: format!("corrector branches at R = {r_match}"),
                value: defect,
                tol: 100.0 * tol,
            });
        }
        Ok(c)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn harmonic_map(&self) -> &HarmonicMap {
        &self.hm
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn r_match(&self) -> f64 {
        self.r_match
    }

    pub fn series_coefficients(&self) -> &[f64] {
        &self.v
    }

    /// `lim w/R^3`.
    pub fn cubic_coefficient(&self) -> f64 {
        self.v[1]
    }

    /// Relative disagreement of the two branches on the overlap window.
    pub fn overlap_defect(&self) -> f64 {
        self.overlap_defect
    }

    pub fn w_series(&self, r: f64) -> f64 {
        r * series::eval(&self.v, r * r)
    }

    pub fn w_quadrature(&self, r: f64) -> f64 {
        -self.hm.g_of_q(r) * self.c_table.eval(r.ln())
    }

    /// `(w, w', w'')`. Above `r_match` the derivatives follow from
    /// `C' = I/(R g^2)` and `I' = R g t^2 e0`.
    pub fn w_jet(&self, r: f64) -> (f64, f64, f64) {
        let r = r.abs();
        if r <= self.r_match {
            let x = r * r;
            let mut w1 = 0.0;
            let mut w2 = 0.0;
            for (k, &vk) in self.v.iter().enumerate().rev() {
                let kf = k as f64;
                w1 = w1 * x + (2.0 * kf + 1.0) * vk;
                if k >= 1 {
                    w2 = w2 * x + (2.0 * kf + 1.0) * 2.0 * kf * vk;
                }
            }
            return (self.w_series(r), w1, r * w2);
        }
        let s = r.ln();
        let hm = &self.hm;
        let g = hm.g_of_q(r);
        let g1 = hm.g1_of_q(r);
        let g2 = hm.surface().g2(hm.q(r));
        let (q1, q2) = (hm.q_prime(r), hm.q_second(r));
        let big_c = self.c_table.eval(s);
        let big_i = self.i_table.eval(s);
        let e0 = scaled_e0(self.nu, hm, r);
        let w = -g * big_c;
        let w1 = -g1 * q1 * big_c - big_i / (r * g);
        let w2 = -(g2 * q1 * q1 + g1 * q2) * big_c - e0 + big_i / (r * r * g);
        (w, w1, w2)
    }

    pub fn w(&self, r: f64) -> f64 {
        self.w_jet(r).0
    }

    /// `w'' + w'/R - f'(Q) w/R^2 + t^2 e0`, with derivatives taken from the
    /// stored representation (series below `r_match`, the interpolating
    /// table above) rather than from the equation.
    pub fn residual(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= self.r_max) {
            return Err(Error::Domain(format!("corrector residual at R = {r}")));
        }
        let (w, w1, w2) = if r <= self.r_match {
            self.w_jet(r)
        } else {
            let s = r.ln();
            let ws = self.dw_table.eval(s);
            let wss = self.ddw_table.eval(s);
            (self.w_table.eval(s), ws / r, (wss - ws) / (r * r))
        };
        let f1 = 1.0 - self.hm.one_minus_f1_of_q(r);
        Ok(w2 + w1 / r - f1 * w / (r * r) + scaled_e0(self.nu, &self.hm, r))
    }
}

/// `t^2 e1` at `(t, R)` for `u1 = u0 + v1`.
///
/// Expanding the residual of `u1` around the exact harmonic map leaves
/// `t^2 e1 = [L w + t^2 e0](R) - eps (f(Q + eps w) - f(Q) - eps f'(Q) w)/(eps R)^2 - t^2 d_t^2 v1`
/// with `eps = t^{2nu}`; the remainder is evaluated through its integral
/// form so that nothing of size `t^{-2nu}` is ever formed.
pub fn scaled_e1(corrector: &Corrector, t: f64, big_r: f64) -> f64 {
    if big_r == 0.0 {
        return 0.0;
    }
    let nu = corrector.nu;
    let hm = &corrector.hm;
    let sf = hm.surface();
    let eps = t.powf(2.0 * nu);
    let (w, w1, w2) = corrector.w_jet(big_r);
    let f1 = 1.0 - hm.one_minus_f1_of_q(big_r);
    let linear = w2 + w1 / big_r - f1 * w / (big_r * big_r) + scaled_e0(nu, hm, big_r);
    // f(Q + d) - f(Q) - f'(Q) d = d^2 int_0^1 (1 - s) f''(Q + s d) ds
    let q = hm.q(big_r);
    let d = eps * w;
    let (nodes, weights) = quad::gauss_legendre(8);
    let mut acc = 0.0;
    for (x, wt) in nodes.iter().zip(&weights) {
        let s = 0.5 * (x + 1.0);
        acc += 0.5 * wt * (1.0 - s) * sf.f2(q + s * d);
    }
    let nonlinear = eps * w * w * acc / (big_r * big_r);
    let h = 2.0 * nu * w - (1.0 + nu) * big_r * w1;
    let h1 = (nu - 1.0) * w1 - (1.0 + nu) * big_r * w2;
    let v_tt = eps * ((2.0 * nu - 1.0) * h - (1.0 + nu) * big_r * h1);
    linear - nonlinear - v_tt
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub t: f64,
    pub sup_e0: f64,
    pub sup_e1: f64,
    pub ratio: f64,
}

/// Radii `R` sampling `r <= t/2`: `n` log-spaced points from `1e-4`.
fn cone_radii(nu: f64, t: f64, n: usize) -> Vec<f64> {
    let r_end = 0.5 * t.powf(-nu);
    let (a, b) = (1e-4_f64.ln(), r_end.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `sup_{r <= t/2} |t^2 e0|`, `sup |t^2 e1|` and their ratio for each `t`.
pub fn error_sweep(corrector: &Corrector, ts: &[f64], n_radii: usize) -> Result<Vec<ErrorSample>> {
    let nu = corrector.nu;
    ts.par_iter()
        .map(|&t| {
            let rs = cone_radii(nu, t, n_radii);
            if *rs.last().unwrap() > corrector.r_max {
                return Err(Error::Domain(format!(
                    "t = {t} needs the corrector up to R = {}",
                    rs.last().unwrap()
                )));
            }
            let mut sup_e0 = 0.0_f64;
            let mut sup_e1 = 0.0_f64;
            for &r in &rs {
                sup_e0 = sup_e0.max(scaled_e0(nu, &corrector.hm, r).abs());
                sup_e1 = sup_e1.max(scaled_e1(corrector, t, r).abs());
            }
            Ok(ErrorSample {
                t,
                sup_e0,
                sup_e1,
                ratio: sup_e1 / sup_e0,
            })
        })
        .collect()
}

/// Fitted exponent `p` in `ratio ~ t^p`.
pub fn improvement_exponent(samples: &[ErrorSample]) -> f64 {
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    loglog_slope(&t, &y)
}

/// Corrector radius needed by `error_sweep` down to `t_min`.
pub fn required_r_max(nu: f64, t_min: f64) -> f64 {
    0.5 * t_min.powf(-nu) * 1.05
}

/// `E_loc(u0)(t) = int_{r<t} [(u_t^2 + u_r^2)/2 + g(u)^2/(2 r^2)] r dr`, written
/// in `s = log R` as `int^{log(t lambda)} g(Q)^2 [1 + (1+nu)^2 R^2/(2 (t lambda)^2)] ds`.
pub fn local_energy_of_profile(frame: &BlowupFrame, hm: &HarmonicMap, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= frame.t0) {
        return Err(Error::Domain(format!("t = {t} outside (0, {}]", frame.t0)));
    }
    let nu = frame.nu;
    let tl = t * frame.lambda(t);
    let s_end = tl.ln();
    let s_lo = hm.s_range().0.min(s_end - 1.0);
    let integrand = |s: f64| {
        let r = s.exp();
        hm.g_of_q(r).powi(2) * (1.0 + 0.5 * (1.0 + nu).powi(2) * (r / tl).powi(2))
    };
    let body = quad::adaptive(integrand, s_lo, s_end, 1e-14, 1e-11)?;
    // below s_lo the integrand is ~ q0^2 R^2
    Ok(body + 0.5 * integrand(s_lo))
}
