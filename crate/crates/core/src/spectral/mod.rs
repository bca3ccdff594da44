//! Spectral theory of `L = -d^2/dR^2 + 3/(4R^2) + V(R)` on the half line.
//!
//! For each `xi > 0` the regular solution `phi(., xi)` (normalized like
//! `phi0 ~ r^{3/2}` at the origin) is assembled from three pieces:
//! the small-`r^2 xi` series up to `r_m = q_match / sqrt(xi)`, an outward ODE
//! continuation up to `r_a = max(q_anchor / sqrt(xi), r_floor)`, and beyond
//! `r_a` the representation `phi = 2 Re(a psi+)` with `psi+` from its symbol.
//! `a(xi) = (i/2) W(phi, psi-)` and the spectral density is
//! `rho = 1 / (4 pi |a|^2)`.

pub mod fundamental;
pub mod potential;
pub mod symbol;
pub mod transform;
pub mod volterra;

use crate::error::{Error, Result};
use crate::harmonic_map::HarmonicMap;
use crate::numerics::ode::{integrate, OdeOptions};
use fundamental::FundamentalSystem;
use num_complex::Complex64;
use potential::Potential;
use rayon::prelude::*;
use std::f64::consts::PI;
use symbol::SymbolTables;
use volterra::VolterraTables;

#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    /// Series used while `r sqrt(xi) <= q_match`.
    pub q_match: f64,
    /// Symbol used once `r sqrt(xi) >= q_anchor` and `r >= r_floor`.
    pub q_anchor: f64,
    pub r_floor: f64,
    pub j0: usize,
    pub series_terms: usize,
    pub s_lo: f64,
    pub s_hi: f64,
    pub series_tol: f64,
    pub ode_rtol: f64,
    /// Allowed relative change of `a(xi)` between `r_a` and `1.5 r_a`.
    pub wronskian_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            q_match: 1.0,
            q_anchor: 40.0,
            r_floor: symbol::DEFAULT_R_FLOOR,
            j0: symbol::DEFAULT_J0,
            series_terms: volterra::DEFAULT_TERMS,
            s_lo: volterra::DEFAULT_S_LO,
            s_hi: volterra::DEFAULT_S_HI,
            series_tol: 1e-10,
            ode_rtol: 1e-12,
            wronskian_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralOperator {
    pot: Potential,
    fs: FundamentalSystem,
    volterra: VolterraTables,
    symbols: SymbolTables,
    opts: SpectralOptions,
}

/// Data attached to one spectral parameter.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    pub xi: f64,
    pub r_match: f64,
    pub r_anchor: f64,
    /// `(phi, phi')` at `r_match`.
    pub phi_match: [f64; 2],
    pub a: Complex64,
    /// Relative change of `a` between `r_anchor` and `1.5 r_anchor`.
    pub a_variation: f64,
}

impl Mode {
    pub fn rho(&self) -> f64 {
        1.0 / (4.0 * PI * self.a.norm_sqr())
    }
}

impl SpectralOperator {
    pub fn new(hm: &HarmonicMap, opts: SpectralOptions) -> Self {
        let pot = Potential::new(hm);
        let fs = FundamentalSystem::new(hm);
        Self::assemble(pot, fs, opts)
    }

    pub fn free(opts: SpectralOptions) -> Self {
        Self::assemble(Potential::free(), FundamentalSystem::free(), opts)
    }

    fn assemble(pot: Potential, fs: FundamentalSystem, opts: SpectralOptions) -> Self {
        let volterra = VolterraTables::build(&fs, opts.s_lo, opts.s_hi, opts.series_terms);
        let symbols = SymbolTables::build(&pot, opts.j0, opts.r_floor);
        Self {
            pot,
            fs,
            volterra,
            symbols,
            opts,
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.pot
    }

    pub fn fundamental(&self) -> &FundamentalSystem {
        &self.fs
    }

    pub fn volterra(&self) -> &VolterraTables {
        &self.volterra
    }

    pub fn symbols(&self) -> &SymbolTables {
        &self.symbols
    }

    pub fn options(&self) -> &SpectralOptions {
        &self.opts
    }

    fn check_xi(xi: f64) -> Result<()> {
        if xi > 0.0 && xi.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("spectral parameter must be positive, got {xi}")))
        }
    }

    fn ode_opts(&self) -> OdeOptions {
        OdeOptions::with_tol(self.opts.ode_rtol, 1e-300)
    }

    /// Integrate `(L - xi) u = 0` from `(r0, y0)` to the sorted `targets`.
    fn continue_real(&self, xi: f64, r0: f64, y0: [f64; 2], targets: &[f64]) -> Result<Vec<[f64; 2]>> {
        let pot = &self.pot;
        let mut opts = self.ode_opts();
        opts.h0 = Some(1e-2 * r0.min(1.0 / xi.sqrt()));
        integrate(
            |r, y: &[f64; 2]| [y[1], (pot.total(r) - xi) * y[0]],
            r0,
            y0,
            targets,
            &opts,
        )
    }

    pub fn radii(&self, xi: f64) -> (f64, f64) {
        let k = xi.sqrt();
        let r_m = (self.opts.q_match / k).min(self.volterra.r_max());
        let r_a = (self.opts.q_anchor / k).max(self.opts.r_floor);
        (r_m, r_a)
    }

    /// `phi(r, xi)` and `d phi/dr` from the series; valid for `r^2 xi <= q_match^2`.
    pub fn phi_series(&self, r: f64, xi: f64) -> Result<(f64, f64)> {
        let v = self.volterra.eval_series(&self.fs, r, xi, self.opts.series_tol)?;
        Ok((v.phi, v.dphi))
    }

    /// `psi+(r, xi)` and its `r`-derivative.
    pub fn psi_plus(&self, r: f64, xi: f64) -> Result<(Complex64, Complex64)> {
        Self::check_xi(xi)?;
        let (_, r_a) = self.radii(xi);
        if r >= r_a {
            let (psi, dpsi, _) = self.symbols.psi_plus(r, xi)?;
            return Ok((psi, dpsi));
        }
        let (psi, dpsi, _) = self.symbols.psi_plus(r_a, xi)?;
        let pot = &self.pot;
        let mut opts = self.ode_opts();
        opts.h0 = Some(-1e-2 * r);
        let y = integrate(
            |r, y: &[f64; 4]| {
                let q = pot.total(r) - xi;
                [y[2], y[3], q * y[0], q * y[1]]
            },
            r_a,
            [psi.re, psi.im, dpsi.re, dpsi.im],
            &[r],
            &opts,
        )?[0];
        Ok((Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])))
    }

    /// Match the regular solution against `psi+` and extract `a(xi)`.
    pub fn mode(&self, xi: f64) -> Result<Mode> {
        Self::check_xi(xi)?;
        let (r_m, r_a) = self.radii(xi);
        let (phi, dphi) = self.phi_series(r_m, xi)?;
        let far = self.continue_real(xi, r_m, [phi, dphi], &[r_a, 1.5 * r_a])?;
        let a_at = |r: f64, y: [f64; 2]| -> Result<Complex64> {
            let (psi, dpsi, _) = self.symbols.psi_plus(r, xi)?;
            let (psi_m, dpsi_m) = (psi.conj(), dpsi.conj());
            let w = y[0] * dpsi_m - y[1] * psi_m;
            Ok(Complex64::new(0.0, 0.5) * w)
        };
        let a1 = a_at(r_a, far[0])?;
        let a2 = a_at(1.5 * r_a, far[1])?;
        let variation = (a1 - a2).norm() / a1.norm();
        if !(variation <= self.opts.wronskian_tol) {
            return Err(Error::Inconsistency {
                what: format!("a(xi) at r = {r_a} and {} (xi = {xi})", 1.5 * r_a),
                value: variation,
                tol: self.opts.wronskian_tol,
            });
        }
        Ok(Mode {
            xi,
            r_match: r_m,
            r_anchor: r_a,
            phi_match: [phi, dphi],
            a: a1,
            a_variation: variation,
        })
    }

    pub fn compute_a(&self, xi: f64) -> Result<Complex64> {
        Ok(self.mode(xi)?.a)
    }

    pub fn compute_rho(&self, xi: f64) -> Result<f64> {
        Ok(self.mode(xi)?.rho())
    }

    /// `(phi, phi')` at arbitrary radii for one mode.
    pub fn phi_values(&self, mode: &Mode, rs: &[f64]) -> Result<Vec<[f64; 2]>> {
        let mut out = vec![[0.0; 2]; rs.len()];
        let mut middle: Vec<(f64, usize)> = Vec::new();
        for (i, &r) in rs.iter().enumerate() {
            if !(r > 0.0) {
                return Err(Error::Domain(format!("phi evaluated at r = {r}")));
            }
            if r <= mode.r_match {
                let (p, d) = self.phi_series(r, mode.xi)?;
                out[i] = [p, d];
            } else if r >= mode.r_anchor {
                let (psi, dpsi, _) = self.symbols.psi_plus(r, mode.xi)?;
                out[i] = [2.0 * (mode.a * psi).re, 2.0 * (mode.a * dpsi).re];
            } else {
                middle.push((r, i));
            }
        }
        if !middle.is_empty() {
            middle.sort_by(|x, y| x.0.total_cmp(&y.0));
            let targets: Vec<f64> = middle.iter().map(|m| m.0).collect();
            let ys = self.continue_real(mode.xi, mode.r_match, mode.phi_match, &targets)?;
            for ((_, i), y) in middle.iter().zip(ys) {
                out[*i] = y;
            }
        }
        Ok(out)
    }

    /// `[phi, phi', phi_xi, phi_xi', phi_xixi, phi_xixi']` at the radii `rs`,
    /// from the series and then the ODE together with its two variational
    /// equations; the symbol is not used, so this stays accurate in `xi` at any
    /// radius at the price of integrating through the oscillatory region.
    pub fn phi_jets(&self, xi: f64, rs: &[f64]) -> Result<Vec<[f64; 6]>> {
        Self::check_xi(xi)?;
        let (r_m, _) = self.radii(xi);
        let v = self.volterra.eval_series(&self.fs, r_m, xi, self.opts.series_tol)?;
        let mut out = vec![[0.0; 6]; rs.len()];
        let mut far: Vec<(f64, usize)> = Vec::new();
        for (i, &r) in rs.iter().enumerate() {
            if !(r > 0.0) {
                return Err(Error::Domain(format!("phi evaluated at r = {r}")));
            }
            if r <= r_m {
                let s = self.volterra.eval_series(&self.fs, r, xi, self.opts.series_tol)?;
                out[i] = [s.phi, s.dphi, s.phi_xi, s.dphi_xi, s.phi_xixi, s.dphi_xixi];
            } else {
                far.push((r, i));
            }
        }
        if !far.is_empty() {
            far.sort_by(|x, y| x.0.total_cmp(&y.0));
            let targets: Vec<f64> = far.iter().map(|m| m.0).collect();
            let pot = &self.pot;
            let mut opts = self.ode_opts();
            opts.h0 = Some(1e-2 * r_m);
            let ys = integrate(
                |r, y: &[f64; 6]| {
                    let q = pot.total(r) - xi;
                    [y[1], q * y[0], y[3], q * y[2] - y[0], y[5], q * y[4] - 2.0 * y[2]]
                },
                r_m,
                [v.phi, v.dphi, v.phi_xi, v.dphi_xi, v.phi_xixi, v.dphi_xixi],
                &targets,
                &opts,
            )?;
            for ((_, i), y) in far.iter().zip(ys) {
                out[*i] = y;
            }
        }
        Ok(out)
    }

    pub fn compute_phi(&self, r: f64, xi: f64) -> Result<f64> {
        if xi == 0.0 {
            return Ok(self.fs.phi0(r));
        }
        let mode = self.mode(xi)?;
        Ok(self.phi_values(&mode, &[r])?[0][0])
    }

    /// Modes on a grid, computed in parallel; output order follows the grid.
    pub fn modes(&self, xis: &[f64]) -> Result<Vec<Mode>> {
        xis.par_iter().map(|&xi| self.mode(xi)).collect()
    }
}

/// `n` logarithmically spaced points from `a` to `b` inclusive.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
