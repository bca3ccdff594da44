//! Distorted Fourier transform `f^(xi) = int phi(r, xi) f(r) dr` and its
//! inverse `f(r) = int phi(r, xi) f^(xi) rho(xi) d xi`.
//!
//! The `xi`-integral uses Gauss–Legendre panels in `log xi` below `xi = 1`
//! and in `k = sqrt(xi)` above (where the integrand oscillates in `k`).
//! Below `xi_lo` the density is replaced by a fitted model and `phi` by
//! `phi0`, contributing `f^(xi_lo)^2 T` and `phi0(r) f^(xi_lo) T` with
//! `T = int_0^xi_lo rho`.

use super::{Mode, SpectralOperator};
use crate::error::{Error, Result};
use crate::numerics::quad::composite_gl;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
pub struct TransformOptions {
    pub xi_lo: f64,
    pub k_hi: f64,
    /// Panel width in `log xi` on `[xi_lo, 1]`.
    pub log_panel: f64,
    /// Panel width in `k` on `[1, k_hi]`.
    pub k_panel: f64,
    pub order: usize,
}

impl Default for TransformOptions {
    fn default() -> Self {
        Self {
            xi_lo: 1e-10,
            k_hi: 60.0,
            log_panel: 1.0,
            k_panel: 1.0,
            order: 14,
        }
    }
}

/// Small-`xi` model of the density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowModel {
    /// `rho = A / (xi ((log xi + B)^2 + C^2))`.
    Resonant { a: f64, b: f64, c: f64 },
    /// `rho = rho_lo (xi / xi_lo)^p`.
    Power { p: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct LowTail {
    pub xi_lo: f64,
    pub rho_lo: f64,
    pub model: LowModel,
    /// `int_0^xi_lo rho`.
    pub mass: f64,
}

impl LowTail {
    /// Fit from `(xi, rho)` at `xi_lo`, `10 xi_lo`, `100 xi_lo`.
    pub fn fit(samples: [(f64, f64); 3]) -> Self {
        let (xi_lo, rho_lo) = samples[0];
        let l: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
        let y: Vec<f64> = samples.iter().map(|s| 1.0 / (s.0 * s.1)).collect();
        let slope = (samples[1].1 / samples[0].1).ln() / (l[1] - l[0]);
        if slope > -0.5 {
            let mass = rho_lo * xi_lo / (slope + 1.0);
            return Self {
                xi_lo,
                rho_lo,
                model: LowModel::Power { p: slope },
                mass,
            };
        }
        // quadratic through three points
        let d01 = (y[1] - y[0]) / (l[1] - l[0]);
        let d12 = (y[2] - y[1]) / (l[2] - l[1]);
        let alpha = (d12 - d01) / (l[2] - l[0]);
        let beta = d01 - alpha * (l[0] + l[1]);
        let gamma = y[0] - alpha * l[0] * l[0] - beta * l[0];
        let a = 1.0 / alpha;
        let b = beta / (2.0 * alpha);
        let c2 = gamma / alpha - b * b;
        let c = c2.max(0.0).sqrt();
        let z = l[0] + b;
        let mass = if c > 1e-8 * z.abs() {
            a / c * ((z / c).atan() + 0.5 * PI)
        } else {
            a / z.abs()
        };
        Self {
            xi_lo,
            rho_lo,
            model: LowModel::Resonant { a, b, c },
            mass,
        }
    }

    pub fn rho(&self, xi: f64) -> f64 {
        match self.model {
            LowModel::Resonant { a, b, c } => a / (xi * ((xi.ln() + b).powi(2) + c * c)),
            LowModel::Power { p } => self.rho_lo * (xi / self.xi_lo).powf(p),
        }
    }
}

/// Quadrature for `int (.) rho(xi) d xi` together with the modes at its nodes.
#[derive(Debug, Clone)]
pub struct SpectralQuadrature {
    pub modes: Vec<Mode>,
    /// Weights including the density, `w_i = dxi_i * rho(xi_i)`.
    pub weights: Vec<f64>,
    pub tail: LowTail,
}

impl SpectralQuadrature {
    pub fn build(op: &SpectralOperator, opts: &TransformOptions) -> Result<Self> {
        if !(opts.xi_lo > 0.0 && opts.xi_lo < 1e-2 && opts.k_hi > 1.0) {
            return Err(Error::Domain(format!(
                "transform range xi_lo = {}, k_hi = {}",
                opts.xi_lo, opts.k_hi
            )));
        }
        let l_lo = opts.xi_lo.ln();
        let n_log = ((-l_lo / opts.log_panel).ceil() as usize).max(1);
        let (ln, lw) = composite_gl(l_lo, 0.0, n_log, opts.order);
        let n_k = (((opts.k_hi - 1.0) / opts.k_panel).ceil() as usize).max(1);
        let (kn, kw) = composite_gl(1.0, opts.k_hi, n_k, opts.order);
        // d xi = xi d(log xi) = 2 k dk
        let mut xis: Vec<f64> = ln.iter().map(|l| l.exp()).collect();
        let mut jac: Vec<f64> = ln.iter().zip(&lw).map(|(l, w)| l.exp() * w).collect();
        xis.extend(kn.iter().map(|k| k * k));
        jac.extend(kn.iter().zip(&kw).map(|(k, w)| 2.0 * k * w));
        let modes = op.modes(&xis)?;
        let weights = modes.iter().zip(&jac).map(|(m, j)| m.rho() * j).collect();
        let fit_modes = op.modes(&[opts.xi_lo, 10.0 * opts.xi_lo, 100.0 * opts.xi_lo])?;
        let tail = LowTail::fit([
            (fit_modes[0].xi, fit_modes[0].rho()),
            (fit_modes[1].xi, fit_modes[1].rho()),
            (fit_modes[2].xi, fit_modes[2].rho()),
        ]);
        Ok(Self {
            modes,
            weights,
            tail,
        })
    }

    pub fn xis(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.xi).collect()
    }
}

/// Radial quadrature: composite Gauss–Legendre on `[a, b]`.
#[derive(Debug, Clone)]
pub struct RadialQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialQuadrature {
    pub fn new(a: f64, b: f64, panel: f64, order: usize) -> Self {
        let n = (((b - a) / panel).ceil() as usize).max(1);
        let (nodes, weights) = composite_gl(a, b, n, order);
        Self { nodes, weights }
    }

    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v * v).sum()
    }
}

/// `phi(r_j, xi_i)` for all quadrature modes (rows) and radii (columns).
pub fn phi_matrix(op: &SpectralOperator, sq: &SpectralQuadrature, rs: &[f64]) -> Result<Vec<Vec<f64>>> {
    sq.modes
        .par_iter()
        .map(|m| Ok(op.phi_values(m, rs)?.into_iter().map(|v| v[0]).collect()))
        .collect()
}

/// Forward transform at the quadrature modes, plus its value at `xi_lo`.
pub fn forward(
    op: &SpectralOperator,
    sq: &SpectralQuadrature,
    rq: &RadialQuadrature,
    f: &[f64],
) -> Result<ForwardTransform> {
    let m = phi_matrix(op, sq, &rq.nodes)?;
    forward_with(op, sq, rq, f, &m)
}

#[derive(Debug, Clone)]
pub struct ForwardTransform {
    pub values: Vec<f64>,
    pub at_xi_lo: f64,
}

pub fn forward_with(
    op: &SpectralOperator,
    sq: &SpectralQuadrature,
    rq: &RadialQuadrature,
    f: &[f64],
    phi: &[Vec<f64>],
) -> Result<ForwardTransform> {
    let dot = |row: &[f64]| -> f64 {
        row.iter()
            .zip(&rq.weights)
            .zip(f)
            .map(|((p, w), v)| p * w * v)
            .sum()
    };
    let values = phi.iter().map(|row| dot(row)).collect();
    let lo = op.mode(sq.tail.xi_lo)?;
    let lo_row: Vec<f64> = op.phi_values(&lo, &rq.nodes)?.into_iter().map(|v| v[0]).collect();
    Ok(ForwardTransform {
        values,
        at_xi_lo: dot(&lo_row),
    })
}

/// `int |f^|^2 rho d xi`.
pub fn plancherel(sq: &SpectralQuadrature, fhat: &ForwardTransform) -> f64 {
    let body: f64 = sq
        .weights
        .iter()
        .zip(&fhat.values)
        .map(|(w, v)| w * v * v)
        .sum();
    body + fhat.at_xi_lo.powi(2) * sq.tail.mass
}

/// Inverse transform evaluated at `rs`.
pub fn inverse(
    op: &SpectralOperator,
    sq: &SpectralQuadrature,
    fhat: &ForwardTransform,
    rs: &[f64],
) -> Result<Vec<f64>> {
    let m = phi_matrix(op, sq, rs)?;
    Ok(inverse_with(op, sq, fhat, rs, &m))
}

pub fn inverse_with(
    op: &SpectralOperator,
    sq: &SpectralQuadrature,
    fhat: &ForwardTransform,
    rs: &[f64],
    phi: &[Vec<f64>],
) -> Vec<f64> {
    let mut out: Vec<f64> = rs
        .iter()
        .map(|&r| op.fundamental().phi0(r) * fhat.at_xi_lo * sq.tail.mass)
        .collect();
    for ((row, w), v) in phi.iter().zip(&sq.weights).zip(&fhat.values) {
        for (o, p) in out.iter_mut().zip(row) {
            *o += w * v * p;
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct PlancherelReport {
    pub norm_sq: f64,
    pub spectral_norm_sq: f64,
    pub defect: f64,
}

/// Compare `||f||^2` with `int |f^|^2 rho`; faults if the defect exceeds `tol`.
pub fn check_plancherel(
    op: &SpectralOperator,
    sq: &SpectralQuadrature,
    rq: &RadialQuadrature,
    f: &[f64],
    tol: f64,
) -> Result<PlancherelReport> {
    let fhat = forward(op, sq, rq, f)?;
    let norm_sq = rq.norm_sq(f);
    let spectral_norm_sq = plancherel(sq, &fhat);
    let defect = (spectral_norm_sq - norm_sq).abs() / norm_sq;
    if defect > tol {
        return Err(Error::Inconsistency {
            what: "Plancherel identity".into(),
            value: defect,
            tol,
        });
    }
    Ok(PlancherelReport {
        norm_sq,
        spectral_norm_sq,
        defect,
    })
}

/// Smooth bump supported in `[a, b]`.
pub fn bump(a: f64, b: f64, r: f64) -> f64 {
    let x = (2.0 * r - a - b) / (b - a);
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Share of `int |f^|^2 rho` carried by `xi < xi_cut` (the low tail included).
pub fn mass_fraction_below(sq: &SpectralQuadrature, fhat: &ForwardTransform, xi_cut: f64) -> f64 {
    let low: f64 = sq
        .modes
        .iter()
        .zip(&sq.weights)
        .zip(&fhat.values)
        .filter(|((m, _), _)| m.xi < xi_cut)
        .map(|((_, w), v)| w * v * v)
        .sum();
    (low + fhat.at_xi_lo.powi(2) * sq.tail.mass) / plancherel(sq, fhat)
}
