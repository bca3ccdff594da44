//! Outgoing solution `psi+(r, xi) = xi^{-1/4} e^{i r k} sigma(r, k)`, `k = xi^{1/2}`,
//! with `sigma = sum_j (i/k)^j g_j(1/r)`.
//!
//! With `y = 1/r` and `p(y) = 3/4 + r^2 V(r)` the coefficients obey
//! `g_0 = 1`, `g_j = (-y^2 g_{j-1}' + int_0^y p g_{j-1}) / 2`, which is the
//! transport recursion `f_j = (i/2) f_{j-1}' + (i/2) int_r^inf (3/(4s^2) + V) f_{j-1}`
//! after `f_j = i^j g_j`. Since `g_j = O(y^j)` and small `k` multiplies it by
//! `k^{-j}`, the tables hold `h_j = g_j / y^j`, so that
//! `sigma = sum_j (i/q)^j h_j(y)` with `q = k r`, and
//! `h_j = (-(j-1) h_{j-1} - y h_{j-1}' + int_0^1 t^{j-1} (p h_{j-1})(y t) dt) / 2`.

use super::potential::Potential;
use crate::error::{Error, Result};
use crate::numerics::cheb::PanelTable;
use crate::numerics::quad::gauss_legendre;
use num_complex::Complex64;

pub const DEFAULT_J0: usize = 8;
pub const DEFAULT_R_FLOOR: f64 = 2.0;
const ORDER: usize = 40;
const CHOP: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct SymbolTables {
    r_floor: f64,
    h: Vec<PanelTable>,
    dh: Vec<PanelTable>,
}

impl SymbolTables {
    pub fn build(pot: &Potential, j0: usize, r_floor: f64) -> Self {
        let y_max = 1.0 / r_floor;
        let p = PanelTable::from_fn(0.0, y_max, 1, ORDER, |y| pot.p_tilde(y));
        let (gx, gw) = gauss_legendre(ORDER + j0 + 2);
        let mut h = vec![PanelTable::from_fn(0.0, y_max, 1, ORDER, |_| 1.0)];
        for j in 1..=j0 {
            let prev = h.last().unwrap();
            // rounding noise in the top coefficients would be amplified by
            // the repeated differentiation
            let mut smooth = prev.clone();
            smooth.chop(CHOP);
            let d = smooth.derivative();
            let jm1 = (j - 1) as f64;
            let mut next = PanelTable::from_fn(0.0, y_max, 1, ORDER, |y| {
                let moment: f64 = gx
                    .iter()
                    .zip(&gw)
                    .map(|(x, w)| {
                        let t = 0.5 * (x + 1.0);
                        0.5 * w * t.powi(j as i32 - 1) * p.eval(y * t) * smooth.eval(y * t)
                    })
                    .sum();
                0.5 * (-jm1 * smooth.eval(y) - y * d.eval(y) + moment)
            });
            next.chop(CHOP);
            h.push(next);
        }
        let dh = h.iter().map(PanelTable::derivative).collect();
        Self { r_floor, h, dh }
    }

    pub fn j0(&self) -> usize {
        self.h.len() - 1
    }

    pub fn r_floor(&self) -> f64 {
        self.r_floor
    }

    /// `g_j(y)`.
    pub fn coefficient(&self, j: usize, y: f64) -> f64 {
        y.powi(j as i32) * self.h[j].eval(y)
    }

    /// `(psi+, d psi+/dr)` and the relative size of the last symbol term.
    pub fn psi_plus(&self, r: f64, xi: f64) -> Result<(Complex64, Complex64, f64)> {
        if r < self.r_floor * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "symbol tables start at r = {}, requested {r}",
                self.r_floor
            )));
        }
        let k = xi.sqrt();
        let y = 1.0 / r;
        let step = Complex64::new(0.0, 1.0 / (k * r));
        let mut w = Complex64::new(1.0, 0.0);
        let mut sigma = Complex64::new(0.0, 0.0);
        let mut dsum = Complex64::new(0.0, 0.0);
        let mut last = 0.0;
        for (j, (h, dh)) in self.h.iter().zip(&self.dh).enumerate() {
            let hv = h.eval(y);
            sigma += w * hv;
            dsum += w * (j as f64 * hv + y * dh.eval(y));
            last = (w * hv).norm();
            w *= step;
        }
        let dsigma = -y * dsum;
        let phase = Complex64::new(0.0, k * r).exp() / k.sqrt();
        let psi = phase * sigma;
        let dpsi = phase * (Complex64::new(0.0, k) * sigma + dsigma);
        Ok((psi, dpsi, last / sigma.norm()))
    }
}
