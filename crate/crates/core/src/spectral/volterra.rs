//! Small-`r^2 xi` expansion of the regular solution,
//! `phi(r, xi) = r^{-1/2} sum_j xi^j f_j(r)`, `f_0 = r^{1/2} phi0`.
//!
//! Each `f_j` solves `L (r^{-1/2} f_j) = r^{-1/2} f_{j-1}` with `f_j = O(r^{2j+2})`
//! at the origin:
//!
//! `f_j(r) = -r^{1/2} phi0(r) C_j(r)`, `C_j = int_0^r A_j / phi0^2`,
//! `A_j = int_0^r rho^{-1/2} phi0 f_{j-1} d rho`.
//!
//! Writing the kernel as two nested cumulative integrals (instead of
//! `Phi(r) A_j - int Phi ...`) keeps every integrand of one sign, so nothing
//! cancels at large `r`. Tables store `phi_j(r^2) = f_j / r^{2j}` and
//! `f_j' / r^{2j-1}` on narrow Chebyshev panels in `s = log r`.

use super::fundamental::FundamentalSystem;
use crate::error::{Error, Result};
use crate::numerics::cheb::PanelTable;

pub const DEFAULT_TERMS: usize = 14;
pub const DEFAULT_S_LO: f64 = -12.0;
pub const DEFAULT_S_HI: f64 = 12.0;
const PANEL_WIDTH: f64 = 0.1;
const PANEL_ORDER: usize = 16;

#[derive(Debug, Clone)]
pub struct VolterraTables {
    s_lo: f64,
    s_hi: f64,
    /// `phi_j` as a function of `s`, `j = 0..=terms` (entry 0 is unused).
    big_f: Vec<PanelTable>,
    big_g: Vec<PanelTable>,
}

/// Cumulative integral from `-inf` of samples `v` on the panel layout, with
/// the part below `a` taken from the leading power `e^{p s}`.
fn cumulative_with_tail(a: f64, b: f64, v: &[Vec<f64>], p: f64) -> PanelTable {
    let table = PanelTable::from_panel_values(a, b, v);
    table.cumulative_integral(v[0][0] / p)
}

impl VolterraTables {
    pub fn build(fs: &FundamentalSystem, s_lo: f64, s_hi: f64, terms: usize) -> Self {
        Self::build_with(fs, s_lo, s_hi, terms, PANEL_WIDTH, PANEL_ORDER)
    }

    pub fn build_with(
        fs: &FundamentalSystem,
        s_lo: f64,
        s_hi: f64,
        terms: usize,
        panel_width: f64,
        order: usize,
    ) -> Self {
        let n_panels = (((s_hi - s_lo) / panel_width).ceil() as usize).max(1);
        let layout = PanelTable::node_layout(s_lo, s_hi, n_panels, order);
        let map = |f: &dyn Fn(f64) -> f64| -> Vec<Vec<f64>> {
            layout
                .iter()
                .map(|p| p.iter().map(|&s| f(s)).collect())
                .collect()
        };
        let srp = map(&|s| fs.sqrt_r_phi0(s.exp()));
        let srp_d = map(&|s| fs.sqrt_r_phi0_prime(s.exp()));
        let phi0 = map(&|s| fs.phi0(s.exp()));
        let radius = map(&|s| s.exp());

        let mut f_prev = srp.clone();
        let mut big_f = vec![PanelTable::from_panel_values(s_lo, s_hi, &f_prev)];
        let mut big_g = vec![PanelTable::from_panel_values(s_lo, s_hi, &srp_d)];
        for j in 1..=terms {
            let jf = j as f64;
            let zip = |x: &[Vec<f64>], y: &[Vec<f64>], op: &dyn Fn(f64, f64, usize, usize) -> f64| {
                x.iter()
                    .zip(y)
                    .enumerate()
                    .map(|(pi, (a, b))| {
                        a.iter()
                            .zip(b)
                            .enumerate()
                            .map(|(k, (u, v))| op(*u, *v, pi, k))
                            .collect::<Vec<f64>>()
                    })
                    .collect::<Vec<_>>()
            };
            // d A_j / ds = r^{1/2} phi0 f_{j-1}
            let a_int = zip(&srp, &f_prev, &|u, v, _, _| u * v);
            let a_tab = cumulative_with_tail(s_lo, s_hi, &a_int, 2.0 * jf + 2.0);
            let a_vals = map(&|s| a_tab.eval(s));
            // d C_j / ds = r A_j / phi0^2
            let c_int = zip(&a_vals, &phi0, &|a, p, pi, k| radius[pi][k] * a / (p * p));
            let c_tab = cumulative_with_tail(s_lo, s_hi, &c_int, 2.0 * jf);
            let c_vals = map(&|s| c_tab.eval(s));

            let f_j = zip(&srp, &c_vals, &|u, c, _, _| -u * c);
            let f_scaled = zip(&f_j, &radius, &|f, r, _, _| f / r.powi(2 * j as i32));
            let g_scaled: Vec<Vec<f64>> = (0..layout.len())
                .map(|pi| {
                    (0..layout[pi].len())
                        .map(|k| {
                            let r = radius[pi][k];
                            let d = -srp_d[pi][k] * c_vals[pi][k]
                                - r.sqrt() * a_vals[pi][k] / phi0[pi][k];
                            d / r.powi(2 * j as i32 - 1)
                        })
                        .collect()
                })
                .collect();
            big_f.push(PanelTable::from_panel_values(s_lo, s_hi, &f_scaled));
            big_g.push(PanelTable::from_panel_values(s_lo, s_hi, &g_scaled));
            f_prev = f_j;
        }
        Self {
            s_lo,
            s_hi,
            big_f,
            big_g,
        }
    }

    pub fn terms(&self) -> usize {
        self.big_f.len() - 1
    }

    /// Largest radius covered by the tables.
    pub fn r_max(&self) -> f64 {
        self.s_hi.exp()
    }

    pub fn r_min(&self) -> f64 {
        self.s_lo.exp()
    }

    /// `phi_j(u)`, `u = r^2`, for `1 <= j <= terms`.
    pub fn phi_j(&self, j: usize, u: f64) -> f64 {
        self.scaled(j, u.sqrt()).0
    }

    /// `f_j(r) = r^{2j} phi_j(r^2)`.
    pub fn f_j(&self, j: usize, r: f64) -> f64 {
        r.powi(2 * j as i32) * self.scaled(j, r).0
    }

    /// `(phi_j(r^2), f_j'(r) / r^{2j-1})`.
    fn scaled(&self, j: usize, r: f64) -> (f64, f64) {
        assert!(j >= 1 && j <= self.terms());
        if r == 0.0 {
            return (0.0, 0.0);
        }
        let s = r.ln();
        if s < self.s_lo {
            // phi_j ~ c r^2 and f_j'/r^{2j-1} ~ (2j+2) c r^2 near the origin
            let (f, g) = (self.big_f[j].eval(self.s_lo), self.big_g[j].eval(self.s_lo));
            let w = (r / self.s_lo.exp()).powi(2);
            return (f * w, g * w);
        }
        (self.big_f[j].eval(s), self.big_g[j].eval(s))
    }

    /// `phi`, `d phi/dr` and their first two `xi`-derivatives from the truncated
    /// series, with the size of the last retained term relative to the sum.
    pub fn eval_series(
        &self,
        fs: &FundamentalSystem,
        r: f64,
        xi: f64,
        tol: f64,
    ) -> Result<SeriesValue> {
        if r > self.r_max() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "series tables end at r = {}, requested {r}",
                self.r_max()
            )));
        }
        let x = r * r * xi;
        let mut phi = fs.phi0(r);
        let mut dphi = fs.phi0_prime(r);
        let mut sum_f = 0.0;
        let mut sum_d = 0.0;
        let mut sum_fxi = 0.0;
        let mut sum_dxi = 0.0;
        let mut sum_fxx = 0.0;
        let mut sum_dxx = 0.0;
        let mut xpp = 0.0;
        let mut xp = 1.0;
        let mut last = 0.0;
        for j in 1..=self.terms() {
            let (f, g) = self.scaled(j, r);
            let xprev = xp;
            xp *= x;
            sum_f += xp * f;
            sum_d += xp * (g - 0.5 * f);
            sum_fxi += j as f64 * xprev * f;
            sum_dxi += j as f64 * xprev * (g - 0.5 * f);
            let jj = (j * (j - 1)) as f64;
            sum_fxx += jj * xpp * f;
            sum_dxx += jj * xpp * (g - 0.5 * f);
            xpp = xprev;
            last = xp * f;
        }
        let rm12 = 1.0 / r.sqrt();
        phi += rm12 * sum_f;
        dphi += rm12 / r * sum_d;
        let estimate = last.abs() * rm12 / phi.abs().max(fs.phi0(r).abs()).max(1e-300);
        if estimate > tol {
            return Err(Error::Truncation { estimate, tol });
        }
        Ok(SeriesValue {
            phi,
            dphi,
            phi_xi: rm12 * r * r * sum_fxi,
            dphi_xi: rm12 * r * sum_dxi,
            phi_xixi: rm12 * r.powi(4) * sum_fxx,
            dphi_xixi: rm12 * r.powi(3) * sum_dxx,
            estimate,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SeriesValue {
    pub phi: f64,
    pub dphi: f64,
    pub phi_xi: f64,
    pub dphi_xi: f64,
    pub phi_xixi: f64,
    pub dphi_xixi: f64,
    pub estimate: f64,
}
