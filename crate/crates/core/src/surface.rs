//! Target surfaces of revolution `d rho^2 + g(rho)^2 d theta^2`.
//!
//! `g` is odd about `0` and about its first positive zero `rho_M`, with
//! `g'(0) = 1`. Everything downstream only needs `g`, `f = g g'` and a few
//! derivatives, plus accurate forms near both zeros.

use crate::error::{Error, Result};
use crate::numerics::series;

pub const DEFAULT_SERIES_TERMS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Sphere,
    Series,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceProfile {
    kind: SurfaceKind,
    rho_m: f64,
    /// `g(rho) = rho G(rho^2)`.
    g_coeffs: Vec<f64>,
    /// `f(rho) = rho F(rho^2)`.
    f_coeffs: Vec<f64>,
    /// `f'(rho) = P(rho^2)`.
    p_coeffs: Vec<f64>,
    /// `g(rho_M - e) = e H(e^2)`.
    h_coeffs: Vec<f64>,
    /// `f'(rho_M - e) = Pr(e^2)`.
    pr_coeffs: Vec<f64>,
}

/// `F = G (G + 2 y G')` and `P = F + 2 y F'` from the coefficients of `G`.
fn derived_series(g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = 2 * g.len() - 1;
    let dg = series::derivative(g);
    let mut two_y_dg = vec![0.0; g.len()];
    for (k, d) in dg.iter().enumerate() {
        two_y_dg[k + 1] = 2.0 * d;
    }
    let inner = series::add(g, &two_y_dg, g.len());
    let f = series::mul(g, &inner, n);
    let df = series::derivative(&f);
    let mut p = f.clone();
    for (k, d) in df.iter().enumerate() {
        p[k + 1] += 2.0 * d;
    }
    (f, p)
}

fn sine_series(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut fact = 1.0;
    for k in 0..n {
        out.push(if k % 2 == 0 { 1.0 } else { -1.0 } / fact);
        fact *= ((2 * k + 2) * (2 * k + 3)) as f64;
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn eval_odd(c: &[f64], x: f64) -> f64 {
    x * series::eval(c, x * x)
}

/// `sum_k (2k+1) c_k x^{2k}`.
fn eval_odd_d1(c: &[f64], x: f64) -> f64 {
    let x2 = x * x;
    c.iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (k, &ck)| acc * x2 + (2 * k + 1) as f64 * ck)
}

fn eval_odd_d2(c: &[f64], x: f64) -> f64 {
    let x2 = x * x;
    x * c
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &ck)| acc * x2 + ((2 * k + 1) * 2 * k) as f64 * ck)
}

fn eval_odd_d3(c: &[f64], x: f64) -> f64 {
    let x2 = x * x;
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &ck)| {
            acc * x2 + ((2 * k + 1) * (2 * k) * (2 * k - 1)) as f64 * ck
        })
}

/// Below this distance from a zero of `g` the series forms are used.
const NEAR_ZERO: f64 = 0.5;

impl SurfaceProfile {
    /// The round sphere, `g = sin`, `rho_M = pi`.
    pub fn sphere() -> Self {
        let g = sine_series(DEFAULT_SERIES_TERMS);
        let (f, p) = derived_series(&g);
        Self {
            kind: SurfaceKind::Sphere,
            rho_m: std::f64::consts::PI,
            h_coeffs: g.clone(),
            pr_coeffs: p.clone(),
            g_coeffs: g,
            f_coeffs: f,
            p_coeffs: p,
        }
    }

    /// Surface from the even coefficients of `G`, locating `rho_M` as the
    /// first positive zero of `g` below `2 * hint`.
    pub fn from_series(coeffs: &[f64], rho_m_hint: f64) -> Result<Self> {
        match coeffs.first() {
            None => return Err(Error::InvalidProfile("empty coefficient list".into())),
            Some(&c0) if c0 != 1.0 => {
                return Err(Error::InvalidProfile(format!("G(0) = {c0}, expected 1")))
            }
            _ => {}
        }
        if !(rho_m_hint.is_finite() && rho_m_hint > 0.0) {
            return Err(Error::InvalidProfile(format!("rho_m_hint = {rho_m_hint}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProfile("non-finite coefficient".into()));
        }
        let g = coeffs.to_vec();
        let rho_m = first_root(&g, rho_m_hint).ok_or(Error::RhoMNotBracketed { hint: rho_m_hint })?;
        let (f, p) = derived_series(&g);
        // Taylor coefficients of g about rho_M; only odd powers survive.
        let degree = 2 * g.len() - 1;
        let taylor: Vec<f64> = (0..=degree)
            .map(|j| {
                g.iter()
                    .enumerate()
                    .filter(|(k, _)| 2 * k + 1 >= j)
                    .map(|(k, &c)| c * binomial(2 * k + 1, j) * rho_m.powi((2 * k + 1 - j) as i32))
                    .sum()
            })
            .collect();
        let h: Vec<f64> = (0..g.len()).map(|k| -taylor[2 * k + 1]).collect();
        let (_, pr) = derived_series(&h);
        Ok(Self {
            kind: SurfaceKind::Series,
            rho_m,
            g_coeffs: g,
            f_coeffs: f,
            p_coeffs: p,
            h_coeffs: h,
            pr_coeffs: pr,
        })
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn rho_m(&self) -> f64 {
        self.rho_m
    }

    pub fn series_g(&self) -> &[f64] {
        &self.g_coeffs
    }

    pub fn series_f(&self) -> &[f64] {
        &self.f_coeffs
    }

    /// Coefficients of `P` with `f'(rho) = P(rho^2)`.
    pub fn series_f1(&self) -> &[f64] {
        &self.p_coeffs
    }

    /// Coefficients of `H` with `g(rho_M - e) = e H(e^2)`.
    pub fn reflected_series(&self) -> &[f64] {
        &self.h_coeffs
    }

    /// Coefficients of `Pr` with `f'(rho_M - e) = Pr(e^2)`.
    pub fn reflected_series_f1(&self) -> &[f64] {
        &self.pr_coeffs
    }

    pub fn g(&self, rho: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => rho.sin(),
            SurfaceKind::Series => eval_odd(&self.g_coeffs, rho),
        }
    }

    pub fn g1(&self, rho: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => rho.cos(),
            SurfaceKind::Series => eval_odd_d1(&self.g_coeffs, rho),
        }
    }

    pub fn g2(&self, rho: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => -rho.sin(),
            SurfaceKind::Series => eval_odd_d2(&self.g_coeffs, rho),
        }
    }

    pub fn g3(&self, rho: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => -rho.cos(),
            SurfaceKind::Series => eval_odd_d3(&self.g_coeffs, rho),
        }
    }

    pub fn f(&self, rho: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => 0.5 * (2.0 * rho).sin(),
            SurfaceKind::Series => eval_odd(&self.f_coeffs, rho),
        }
    }

    pub fn f1(&self, rho: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => (2.0 * rho).cos(),
            SurfaceKind::Series => series::eval(&self.p_coeffs, rho * rho),
        }
    }

    pub fn f2(&self, rho: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => -2.0 * (2.0 * rho).sin(),
            SurfaceKind::Series => {
                2.0 * rho * series::eval(&series::derivative(&self.p_coeffs), rho * rho)
            }
        }
    }

    /// `G(rho^2) = g(rho)/rho`, regular at `rho = 0`.
    pub fn g_over_rho(&self, rho: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere if rho.abs() > NEAR_ZERO => rho.sin() / rho,
            _ => series::eval(&self.g_coeffs, rho * rho),
        }
    }

    /// `F(rho^2) = f(rho)/rho`, regular at `rho = 0`.
    pub fn f_over_rho(&self, rho: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere if rho.abs() > NEAR_ZERO => 0.5 * (2.0 * rho).sin() / rho,
            _ => series::eval(&self.f_coeffs, rho * rho),
        }
    }

    /// `1 - f'(rho)` without cancellation near `rho = 0`.
    pub fn one_minus_f1(&self, rho: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => 2.0 * rho.sin().powi(2),
            SurfaceKind::Series if rho.abs() < NEAR_ZERO => {
                -rho * rho * series::eval(&self.p_coeffs[1..], rho * rho)
            }
            SurfaceKind::Series => 1.0 - self.f1(rho),
        }
    }

    /// `g(rho_M - e)`, accurate for small `e`.
    pub fn g_reflected(&self, e: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => e.sin(),
            SurfaceKind::Series if e.abs() < NEAR_ZERO => eval_odd(&self.h_coeffs, e),
            SurfaceKind::Series => self.g(self.rho_m - e),
        }
    }

    /// `g'(rho_M - e)`.
    pub fn g1_reflected(&self, e: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => -e.cos(),
            SurfaceKind::Series if e.abs() < NEAR_ZERO => -eval_odd_d1(&self.h_coeffs, e),
            SurfaceKind::Series => self.g1(self.rho_m - e),
        }
    }

    /// `1 - f'(rho_M - e)` without cancellation near `e = 0`.
    pub fn one_minus_f1_reflected(&self, e: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => 2.0 * e.sin().powi(2),
            SurfaceKind::Series if e.abs() < NEAR_ZERO => {
                -e * e * series::eval(&self.pr_coeffs[1..], e * e)
            }
            SurfaceKind::Series => 1.0 - self.f1(self.rho_m - e),
        }
    }

    /// `f''(rho_M - e)`.
    pub fn f2_reflected(&self, e: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => 2.0 * (2.0 * e).sin(),
            SurfaceKind::Series if e.abs() < NEAR_ZERO => {
                -2.0 * e * series::eval(&series::derivative(&self.pr_coeffs), e * e)
            }
            SurfaceKind::Series => self.f2(self.rho_m - e),
        }
    }

    /// Size of the last retained series term at `rho_M`.
    pub fn truncation_estimate(&self) -> f64 {
        let n = self.g_coeffs.len() - 1;
        self.g_coeffs[n].abs() * self.rho_m.powi((2 * n + 1) as i32)
    }

    pub fn validate(&self, n_samples: usize) -> ValidationReport {
        validate(self, n_samples)
    }
}

fn first_root(g: &[f64], hint: f64) -> Option<f64> {
    let n = 800;
    let step = 2.0 * hint / n as f64;
    let eval = |x: f64| eval_odd(g, x);
    let mut lo = step;
    let mut glo = eval(lo);
    for i in 2..=n {
        let hi = step * i as f64;
        let ghi = eval(hi);
        if ghi == 0.0 {
            return Some(hi);
        }
        if glo.signum() != ghi.signum() {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if eval(m).signum() == glo.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(0.5 * (a + b));
        }
        lo = hi;
        glo = ghi;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Info,
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub assumption: &'static str,
    pub status: CheckStatus,
    pub worst_rho: f64,
    pub worst_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn get(&self, assumption: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.assumption == assumption)
    }
}

fn check(assumption: &'static str, ok: bool, worst_rho: f64, worst_value: f64) -> Check {
    Check {
        assumption,
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        worst_rho,
        worst_value,
    }
}

/// Sample maximizing `|metric|`, as `(rho, value)`.
fn worst(points: impl Iterator<Item = f64>, metric: impl Fn(f64) -> f64) -> (f64, f64) {
    points.fold((f64::NAN, 0.0), |(wr, wv), x| {
        let v = metric(x);
        if wr.is_nan() || v.abs() > wv.abs() || v.is_nan() {
            (x, v)
        } else {
            (wr, wv)
        }
    })
}

fn validate(p: &SurfaceProfile, n_samples: usize) -> ValidationReport {
    let n = n_samples.max(16);
    let rm = p.rho_m;
    let interior = || (1..=n).map(move |i| rm * i as f64 / (n + 1) as f64);
    let mut checks = Vec::new();

    checks.push(check("g(0)=0", p.g(0.0) == 0.0, 0.0, p.g(0.0)));
    let g10 = p.g1(0.0);
    checks.push(check("g'(0)=1", (g10 - 1.0).abs() <= 1e-12, 0.0, g10));
    let grm = p.g(rm);
    checks.push(check("g(rho_M)=0", grm.abs() <= 1e-10, rm, grm));
    let g1rm = p.g1(rm);
    checks.push(check("g'(rho_M)=-1", (g1rm + 1.0).abs() <= 1e-8, rm, g1rm));

    let (wr, wv) = worst(interior(), |x| p.g1(x).abs());
    checks.push(check("|g'|<1 on (0,rho_M)", wv.abs() < 1.0, wr, wv));

    let scale = interior().fold(0.0_f64, |m, x| m.max(p.g(x).abs())).max(1.0);
    let (wr, wv) = worst(interior(), |x| p.g(x) + p.g(-x));
    checks.push(check("g odd about 0", wv.abs() <= 1e-12 * scale, wr, wv));
    let (wr, wv) = worst(interior(), |d| p.g(rm + d) + p.g(rm - d));
    checks.push(check("g odd about rho_M", wv.abs() <= 1e-8 * scale, rm + wr, wv));

    let (wr, wv) = worst(interior(), |x| p.f(x) - p.g(x) * p.g1(x));
    checks.push(check("f=g*g'", wv.abs() <= 1e-12, wr, wv));

    let lim0 = richardson_limit(|d| p.f(d) / d);
    checks.push(check("f(rho)/rho->1", (lim0 - 1.0).abs() <= 1e-8, 0.0, lim0));
    let lim_m = richardson_limit(|d| p.f(rm - d) / d);
    checks.push(check("f(rho_M-d)/d->-1", (lim_m + 1.0).abs() <= 1e-6, rm, lim_m));

    checks.push(Check {
        assumption: "series truncation at rho_M",
        status: CheckStatus::Info,
        worst_rho: rm,
        worst_value: p.truncation_estimate(),
    });
    ValidationReport { checks }
}

/// Limit as `d -> 0` of an even-in-`d` quantity sampled at `d = 1e-2, 1e-3`,
/// with `1e-4` used as a consistency point.
pub fn richardson_limit(q: impl Fn(f64) -> f64) -> f64 {
    let (d1, d2) = (1e-2_f64, 1e-3_f64);
    let (v1, v2) = (q(d1), q(d2));
    (d1 * d1 * v2 - d2 * d2 * v1) / (d1 * d1 - d2 * d2)
}
