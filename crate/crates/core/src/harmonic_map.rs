//! The harmonic map `r Q'(r) = g(Q)`, `Q(1) = 1`.
//!
//! In `s = log r` the equation is autonomous. `Q` is tabulated for `s <= 0`
//! and `eps = rho_M - Q` for `s >= 0`, so both ends keep full relative
//! precision; outside `[s_min, s_max]` the convergent odd expansions
//! `Q = r q(r^2)` and `eps = l qt(l^2)` (`l = 1/r`) take over.

use crate::error::{Error, Result};
use crate::numerics::cheb::PanelTable;
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::{quad, series};
use crate::surface::SurfaceProfile;

pub const DEFAULT_S_MIN: f64 = -14.0;
pub const DEFAULT_S_MAX: f64 = 14.0;
pub const DEFAULT_TOL: f64 = 1e-12;

const PANEL_WIDTH: f64 = 0.5;
const PANEL_ORDER: usize = 16;
const TAIL_TERMS: usize = 12;

#[derive(Debug, Clone)]
pub struct HarmonicMap {
    surface: SurfaceProfile,
    s_min: f64,
    s_max: f64,
    tol: f64,
    q_table: PanelTable,
    dq_table: PanelTable,
    e_table: PanelTable,
    de_table: PanelTable,
    q0: f64,
    qinf: f64,
    zero_series: Vec<f64>,
    inf_series: Vec<f64>,
    nodes: Vec<f64>,
}

fn tabulate(
    a: f64,
    b: f64,
    start: f64,
    y0: f64,
    rhs: impl Fn(f64) -> f64,
    tol: f64,
) -> Result<(PanelTable, Vec<f64>)> {
    let n_panels = (((b - a) / PANEL_WIDTH).ceil() as usize).max(1);
    let layout = PanelTable::node_layout(a, b, n_panels, PANEL_ORDER);
    let mut flat: Vec<f64> = layout.iter().flatten().copied().collect();
    if start > a {
        flat.reverse();
    }
    let opts = OdeOptions {
        rtol: tol,
        atol: 1e-300,
        h0: Some(1e-3),
        ..OdeOptions::default()
    };
    let ys = integrate(|_, y: &[f64; 1]| [rhs(y[0])], start, [y0], &flat, &opts)?;
    let mut values: Vec<f64> = ys.into_iter().map(|y| y[0]).collect();
    if start > a {
        values.reverse();
        flat.reverse();
    }
    let per = PANEL_ORDER + 1;
    let panel_values: Vec<Vec<f64>> = values.chunks(per).map(|c| c.to_vec()).collect();
    Ok((PanelTable::from_panel_values(a, b, &panel_values), flat))
}

/// Value at `x = 0` of the quadratic through three samples `(x_k, v_k)`.
fn extrapolate_to_zero(x: [f64; 3], v: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= (0.0 - x[j]) / (x[i] - x[j]);
            }
        }
        acc += w * v[i];
    }
    acc
}

impl HarmonicMap {
    pub fn solve(surface: &SurfaceProfile, s_min: f64, s_max: f64, tol: f64) -> Result<Self> {
        let rho_m = surface.rho_m();
        if rho_m <= 1.0 {
            return Err(Error::NormalizationInfeasible { rho_m });
        }
        if !(s_min < 0.0 && s_max > 0.0) {
            return Err(Error::Domain(format!(
                "need s_min < 0 < s_max, got [{s_min}, {s_max}]"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
        }
        let sf = surface.clone();
        let (q_table, mut nodes) = tabulate(s_min, 0.0, 0.0, 1.0, |q| sf.g(q), tol)?;
        let (e_table, e_nodes) =
            tabulate(0.0, s_max, 0.0, rho_m - 1.0, |e| -sf.g_reflected(e), tol)?;
        nodes.extend(e_nodes);
        nodes.dedup();

        let sk = [s_min, s_min + 1.0, s_min + 2.0];
        let q0 = extrapolate_to_zero(
            sk.map(|s| (2.0 * s).exp()),
            sk.map(|s| q_table.eval(s) * (-s).exp()),
        );
        let sk = [s_max, s_max - 1.0, s_max - 2.0];
        let qinf = extrapolate_to_zero(
            sk.map(|s| (-2.0 * s).exp()),
            sk.map(|s| e_table.eval(s) * s.exp()),
        );
        let zero_series = series::odd_flow_coefficients(surface.series_g(), q0, TAIL_TERMS);
        let inf_series =
            series::odd_flow_coefficients(surface.reflected_series(), qinf, TAIL_TERMS);
        Ok(Self {
            surface: surface.clone(),
            s_min,
            s_max,
            tol,
            dq_table: q_table.derivative(),
            de_table: e_table.derivative(),
            q_table,
            e_table,
            q0,
            qinf,
            zero_series,
            inf_series,
            nodes,
        })
    }

    pub fn solve_default(surface: &SurfaceProfile) -> Result<Self> {
        Self::solve(surface, DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_TOL)
    }

    pub fn surface(&self) -> &SurfaceProfile {
        &self.surface
    }

    pub fn s_range(&self) -> (f64, f64) {
        (self.s_min, self.s_max)
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Leading coefficient at the origin, `lim Q(r)/r`.
    pub fn q0_coeff(&self) -> f64 {
        self.q0
    }

    /// Leading coefficient at infinity, `lim r (rho_M - Q(r))`.
    pub fn qinf_coeff(&self) -> f64 {
        self.qinf
    }

    /// Coefficients `a_k` of `Q(r) = r sum a_k r^{2k}` near the origin.
    pub fn zero_series(&self) -> &[f64] {
        &self.zero_series
    }

    /// Coefficients `b_k` of `rho_M - Q(r) = l sum b_k l^{2k}`, `l = 1/r`.
    pub fn inf_series(&self) -> &[f64] {
        &self.inf_series
    }

    /// Interpolation nodes of the table, as values of `s = log r`.
    pub fn s_nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn eval_q(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("Q evaluated at r = {r}")));
        }
        Ok(self.q(r))
    }

    pub fn eval_qprime(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("Q' evaluated at r = {r}")));
        }
        Ok(self.q_prime(r))
    }

    pub fn eval_qsecond(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("Q'' evaluated at r = {r}")));
        }
        Ok(self.q_second(r))
    }

    /// Series representation near the origin.
    pub fn zero_tail(&self, r: f64) -> f64 {
        r * series::eval(&self.zero_series, r * r)
    }

    /// Series representation of `rho_M - Q` near infinity.
    pub fn inf_tail(&self, r: f64) -> f64 {
        let l = 1.0 / r;
        l * series::eval(&self.inf_series, l * l)
    }

    /// `Q(r)`; odd in `r`, `Q(0) = 0`.
    pub fn q(&self, r: f64) -> f64 {
        if r < 0.0 {
            return -self.q(-r);
        }
        if r == 0.0 {
            return 0.0;
        }
        let s = r.ln();
        if s == 0.0 {
            // the normalization point is a table node; return it exactly
            1.0
        } else if s < self.s_min || self.zero_series_converged(r) {
            self.zero_tail(r)
        } else if s <= 0.0 {
            self.q_table.eval(s)
        } else {
            self.surface.rho_m() - self.eps(r)
        }
    }

    /// `rho_M - Q(r)` with full relative accuracy at large `r`.
    pub fn eps(&self, r: f64) -> f64 {
        let s = r.ln();
        if s > self.s_max {
            self.inf_tail(r)
        } else if s >= 0.0 {
            self.e_table.eval(s)
        } else {
            self.surface.rho_m() - self.q(r)
        }
    }

    /// `g(Q(r))`, accurate at both ends.
    pub fn g_of_q(&self, r: f64) -> f64 {
        if r >= 1.0 {
            self.surface.g_reflected(self.eps(r))
        } else {
            self.surface.g(self.q(r))
        }
    }

    /// `g'(Q(r))`.
    pub fn g1_of_q(&self, r: f64) -> f64 {
        if r >= 1.0 {
            self.surface.g1_reflected(self.eps(r))
        } else {
            self.surface.g1(self.q(r))
        }
    }

    /// `1 - f'(Q(r))` without cancellation at either end.
    pub fn one_minus_f1_of_q(&self, r: f64) -> f64 {
        if r >= 1.0 {
            self.surface.one_minus_f1_reflected(self.eps(r))
        } else {
            self.surface.one_minus_f1(self.q(r))
        }
    }

    /// `f''(Q(r))`.
    pub fn f2_of_q(&self, r: f64) -> f64 {
        if r >= 1.0 {
            self.surface.f2_reflected(self.eps(r))
        } else {
            self.surface.f2(self.q(r))
        }
    }

    /// `Q'(r) = g(Q(r))/r`; the origin value is `lim Q/r`.
    pub fn q_prime(&self, r: f64) -> f64 {
        let r = r.abs();
        if r < self.s_min.exp() || self.zero_series_converged(r) {
            let x = r * r;
            let d = series::derivative(&self.zero_series);
            return series::eval(&self.zero_series, x) + 2.0 * x * series::eval(&d, x);
        }
        self.g_of_q(r) / r
    }

    /// Whether the last retained term of the zero series is below rounding.
    fn zero_series_converged(&self, r: f64) -> bool {
        let n = self.zero_series.len();
        n > 1 && (self.zero_series[n - 1] * (r * r).powi(n as i32 - 1)).abs() < 1e-17 * self.zero_series[0].abs()
    }

    /// `Q''(r) = -g(Q)(1 - g'(Q))/r^2`.
    pub fn q_second(&self, r: f64) -> f64 {
        if r < 0.0 {
            return -self.q_second(-r);
        }
        if r < self.s_min.exp() {
            // d^2/dr^2 [r q(r^2)] = 6 r q'(x) + 4 r^3 q''(x)
            let x = r * r;
            let d1 = series::derivative(&self.zero_series);
            let d2 = series::derivative(&d1);
            return 6.0 * r * series::eval(&d1, x) + 4.0 * r * x * series::eval(&d2, x);
        }
        -self.g_of_q(r) * (1.0 - self.g1_of_q(r)) / (r * r)
    }

    /// `Q'(r)` obtained by differentiating the stored table rather than from
    /// the equation; used to measure the equation residual.
    pub fn q_prime_from_table(&self, r: f64) -> f64 {
        let s = r.ln();
        if s <= 0.0 {
            self.dq_table.eval(s) / r
        } else {
            -self.de_table.eval(s) / r
        }
    }

    /// `E(Q) = int_0^inf [Q'^2/2 + g(Q)^2/(2 r^2)] r dr`, as `int g(Q)^2 ds`.
    pub fn energy(&self) -> Result<f64> {
        let sf = &self.surface;
        let inner = quad::adaptive(
            |s: f64| self.g_of_q(s.exp()).powi(2),
            self.s_min,
            self.s_max,
            1e-14,
            1e-12,
        )?;
        // Tails: g(Q)^2 ~ q0^2 e^{2s} below s_min and qinf^2 e^{-2s} above.
        let lo = 0.5 * sf.g(self.q((self.s_min).exp())).powi(2);
        let hi = 0.5 * self.g_of_q(self.s_max.exp()).powi(2);
        Ok(inner + lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_coefficients() {
        let hm = HarmonicMap::solve_default(&SurfaceProfile::sphere()).unwrap();
        let c = 0.5_f64.tan();
        assert!((hm.q0_coeff() - 2.0 * c).abs() < 1e-10);
        assert!((hm.qinf_coeff() - 2.0 / c).abs() < 1e-9);
        assert!((hm.q(1.0) - 1.0).abs() < 1e-15);
    }
}
