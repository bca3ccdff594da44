//! The zero-energy solutions `phi0 = r^{3/2} Q'(r)` and
//! `theta0 = -phi0 Phi`, `Phi(r) = int_1^r phi0^{-2}`.
//!
//! `Phi` is tabulated in `s = log r` as `int_0^s g(Q)^{-2} ds`, integrating
//! outward from `s = 0` on each side so no large cancellations occur.

use crate::error::Result;
use crate::harmonic_map::HarmonicMap;
use crate::numerics::cheb::PanelTable;
use crate::numerics::quad;

const PANEL_WIDTH: f64 = 0.25;
const PANEL_ORDER: usize = 20;

#[derive(Debug, Clone)]
struct Tables {
    hm: HarmonicMap,
    neg: PanelTable,
    pos: PanelTable,
    integrand_neg: PanelTable,
    integrand_pos: PanelTable,
}

#[derive(Debug, Clone)]
pub struct FundamentalSystem {
    tables: Option<Tables>,
}

impl FundamentalSystem {
    pub fn new(hm: &HarmonicMap) -> Self {
        let (s_min, s_max) = hm.s_range();
        let integrand = |s: f64| hm.g_of_q(s.exp()).powi(-2);
        let n_neg = ((-s_min / PANEL_WIDTH).ceil() as usize).max(1);
        let n_pos = ((s_max / PANEL_WIDTH).ceil() as usize).max(1);
        let integrand_neg = PanelTable::from_fn(s_min, 0.0, n_neg, PANEL_ORDER, integrand);
        let integrand_pos = PanelTable::from_fn(0.0, s_max, n_pos, PANEL_ORDER, integrand);
        Self {
            tables: Some(Tables {
                hm: hm.clone(),
                neg: integrand_neg.cumulative_integral_from_right(0.0),
                pos: integrand_pos.cumulative_integral(0.0),
                integrand_neg,
                integrand_pos,
            }),
        }
    }

    /// Free operator: `phi0 = r^{3/2}`, `Phi = (1 - r^{-2})/2`.
    pub fn free() -> Self {
        Self { tables: None }
    }

    pub fn is_free(&self) -> bool {
        self.tables.is_none()
    }

    pub fn phi0(&self, r: f64) -> f64 {
        match &self.tables {
            None => r.powf(1.5),
            Some(t) => r.sqrt() * t.hm.g_of_q(r),
        }
    }

    pub fn phi0_prime(&self, r: f64) -> f64 {
        match &self.tables {
            None => 1.5 * r.sqrt(),
            Some(t) => t.hm.g_of_q(r) * (0.5 + t.hm.g1_of_q(r)) / r.sqrt(),
        }
    }

    /// `r^{1/2} phi0(r) = r g(Q(r))`.
    pub fn sqrt_r_phi0(&self, r: f64) -> f64 {
        match &self.tables {
            None => r * r,
            Some(t) => r * t.hm.g_of_q(r),
        }
    }

    /// Derivative of `r^{1/2} phi0`, equal to `g(Q)(1 + g'(Q))`.
    pub fn sqrt_r_phi0_prime(&self, r: f64) -> f64 {
        match &self.tables {
            None => 2.0 * r,
            Some(t) => t.hm.g_of_q(r) * (1.0 + t.hm.g1_of_q(r)),
        }
    }

    /// `Phi(r) = int_1^r phi0^{-2}`.
    pub fn big_phi(&self, r: f64) -> f64 {
        match &self.tables {
            None => 0.5 * (1.0 - 1.0 / (r * r)),
            Some(t) => {
                if r == 1.0 {
                    return 0.0;
                }
                let s = r.ln();
                let (s_min, s_max) = t.hm.s_range();
                if s < s_min {
                    let q0 = t.hm.q0_coeff();
                    t.neg.eval(s_min) - ((-2.0 * s).exp() - (-2.0 * s_min).exp()) / (2.0 * q0 * q0)
                } else if s <= 0.0 {
                    t.neg.eval(s)
                } else if s <= s_max {
                    t.pos.eval(s)
                } else {
                    let qi = t.hm.qinf_coeff();
                    t.pos.eval(s_max) + ((2.0 * s).exp() - (2.0 * s_max).exp()) / (2.0 * qi * qi)
                }
            }
        }
    }

    /// `Phi'(r)` read off the quadrature table, `phi0^{-2}` by construction.
    pub fn big_phi_prime(&self, r: f64) -> f64 {
        match &self.tables {
            None => 1.0 / (r * r * r),
            Some(t) => {
                let s = r.ln();
                let (s_min, s_max) = t.hm.s_range();
                if s < s_min || s > s_max {
                    self.phi0(r).powi(-2)
                } else if s <= 0.0 {
                    t.integrand_neg.eval(s) / r
                } else {
                    t.integrand_pos.eval(s) / r
                }
            }
        }
    }

    pub fn theta0(&self, r: f64) -> f64 {
        -self.phi0(r) * self.big_phi(r)
    }

    pub fn theta0_prime(&self, r: f64) -> f64 {
        -self.phi0_prime(r) * self.big_phi(r) - self.phi0(r) * self.big_phi_prime(r)
    }

    /// `chi(r) = r^2 Phi(r)`.
    pub fn chi(&self, r: f64) -> f64 {
        r * r * self.big_phi(r)
    }

    /// `chi` through the target-space form `r^2 int_{Q(1)}^{Q(r)} g^{-3}`.
    pub fn chi_via_target(&self, r: f64) -> Result<f64> {
        match &self.tables {
            None => Ok(self.chi(r)),
            Some(t) => {
                let sf = t.hm.surface();
                let q = t.hm.q(r);
                let v = quad::adaptive(|rho: f64| sf.g(rho).powi(-3), 1.0, q, 1e-15, 1e-13)?;
                Ok(r * r * v)
            }
        }
    }

    /// `phi0' theta0 - phi0 theta0'`, identically one.
    pub fn wronskian(&self, r: f64) -> f64 {
        self.phi0_prime(r) * self.theta0(r) - self.phi0(r) * self.theta0_prime(r)
    }
}
