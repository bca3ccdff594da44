//! Transference kernel data: `F(xi, eta) = <W phi(., xi), phi(., eta)>`,
//! the off-diagonal kernel `K0(xi, eta) = rho(xi) F(xi, eta)/(xi - eta)` and
//! the diagonal coefficient `-(3/2 + eta rho'(eta)/rho(eta))`.
//!
//! All `F` values of a table share one radial quadrature, cut at `R_cut`
//! where the `R^{-4}` decay of `W` bounds the remainder below the tolerance.

use crate::error::{Error, Result};
use crate::numerics::fit::loglog_slope;
use crate::numerics::quad::composite_gl;
use crate::spectral::{Mode, SpectralOperator};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct KernelOptions {
    /// Below this radius the integrand (`~ R^3`) is dropped.
    pub r_min: f64,
    /// Absolute bound on the discarded tail `int_{R_cut}^inf |W phi phi|`.
    pub tail_tol: f64,
    pub order: usize,
    /// Panel width in `log R` on `[r_min, 1]`.
    pub log_panel: f64,
    /// Largest phase change of `phi(., xi) phi(., eta)` over one linear panel.
    pub phase_per_panel: f64,
    pub max_r_cut: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            r_min: 1e-4,
            tail_tol: 1e-8,
            order: 16,
            log_panel: 0.5,
            phase_per_panel: 3.0,
            max_r_cut: 1e4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub r_cut: f64,
    pub tail_bound: f64,
}

/// `sup_{R >= r} |W(R)| R^4`, sampled.
fn w_decay_constant(op: &SpectralOperator, r: f64) -> f64 {
    (0..=40)
        .map(|i| r * 10f64.powf(i as f64 / 10.0))
        .fold(0.0_f64, |m, x| m.max(op.potential().w(x).abs() * x.powi(4)))
}

/// Amplitude bound `2 |a| xi^{-1/4}` of `phi` beyond the anchor radius.
fn amplitude(m: &Mode) -> f64 {
    2.0 * m.a.norm() * m.xi.powf(-0.25)
}

/// Radial quadrature shared by all pairs drawn from `modes`.
pub fn radial_grid(op: &SpectralOperator, modes: &[Mode], opts: &KernelOptions) -> Result<RadialGrid> {
    let k_max = modes.iter().fold(0.0_f64, |m, x| m.max(x.xi.sqrt()));
    let amp = modes.iter().fold(0.0_f64, |m, x| m.max(amplitude(x)));
    let r_anchor = modes.iter().fold(1.0_f64, |m, x| m.max(x.r_anchor));
    let c_w = w_decay_constant(op, r_anchor);
    let mut r_cut = (c_w * amp * amp / (3.0 * opts.tail_tol)).cbrt().max(r_anchor).max(10.0);
    if op.potential().is_free() {
        r_cut = 10.0;
    }
    if r_cut > opts.max_r_cut {
        return Err(Error::Domain(format!(
            "tail bound {} needs R_cut = {r_cut:.3e} beyond {}",
            opts.tail_tol, opts.max_r_cut
        )));
    }
    let tail_bound = c_w * amp * amp / (3.0 * r_cut.powi(3));
    let n_log = ((-opts.r_min.ln() / opts.log_panel).ceil() as usize).max(1);
    let (ls, lw) = composite_gl(opts.r_min.ln(), 0.0, n_log, opts.order);
    let mut nodes: Vec<f64> = ls.iter().map(|s| s.exp()).collect();
    let mut weights: Vec<f64> = ls.iter().zip(&lw).map(|(s, w)| s.exp() * w).collect();
    let width = (opts.phase_per_panel / (2.0 * k_max)).min(1.0);
    let n_lin = ((r_cut - 1.0) / width).ceil() as usize;
    let (rs, rw) = composite_gl(1.0, r_cut, n_lin.max(1), opts.order);
    nodes.extend(rs);
    weights.extend(rw);
    Ok(RadialGrid {
        nodes,
        weights,
        r_cut,
        tail_bound,
    })
}

fn phi_rows(op: &SpectralOperator, modes: &[Mode], grid: &RadialGrid) -> Result<Vec<Vec<f64>>> {
    modes
        .par_iter()
        .map(|m| Ok(op.phi_values(m, &grid.nodes)?.iter().map(|p| p[0]).collect()))
        .collect()
}

/// Quadrature weights times `W` at the nodes.
fn weighted_w(op: &SpectralOperator, grid: &RadialGrid) -> Vec<f64> {
    grid.nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&r, w)| w * op.potential().w(r))
        .collect()
}

fn dot3(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), z)| x * y * z).sum()
}

/// `F(xi, eta)` for one pair.
pub fn compute_f(op: &SpectralOperator, xi: f64, eta: f64, opts: &KernelOptions) -> Result<f64> {
    let modes = op.modes(&[xi, eta])?;
    let grid = radial_grid(op, &modes, opts)?;
    let rows = phi_rows(op, &modes, &grid)?;
    Ok(dot3(&rows[0], &rows[1], &weighted_w(op, &grid)))
}

#[derive(Debug, Clone)]
pub struct KernelTable {
    pub xis: Vec<f64>,
    pub rho: Vec<f64>,
    /// `f[i][j] = F(xi_i, xi_j)`.
    pub f: Vec<Vec<f64>>,
    /// Diagonal coefficient at interior grid points, NaN at the two ends.
    pub diag: Vec<f64>,
    pub r_cut: f64,
    pub tail_bound: f64,
}

impl KernelTable {
    /// Kernel on an increasing grid of spectral parameters.
    pub fn build(op: &SpectralOperator, xis: &[f64], opts: &KernelOptions) -> Result<Self> {
        if xis.len() < 3 || xis.windows(2).any(|w| !(w[1] > w[0])) || !(xis[0] > 0.0) {
            return Err(Error::Domain("kernel grid must be positive, increasing, n >= 3".into()));
        }
        let modes = op.modes(xis)?;
        let grid = radial_grid(op, &modes, opts)?;
        let rows = phi_rows(op, &modes, &grid)?;
        let ww = weighted_w(op, &grid);
        let n = xis.len();
        let f: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| dot3(&rows[i], &rows[j], &ww))
                    .collect()
            })
            .collect();
        let rho: Vec<f64> = modes.iter().map(Mode::rho).collect();
        let diag = (0..n)
            .map(|i| diag_coefficient(xis, &rho, xis[i]).unwrap_or(f64::NAN))
            .collect();
        Ok(Self {
            xis: xis.to_vec(),
            rho,
            f,
            diag,
            r_cut: grid.r_cut,
            tail_bound: grid.tail_bound,
        })
    }

    /// `max |F(xi, eta) - F(eta, xi)|` relative to `max |F|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.xis.len();
        let scale = self
            .f
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut d = 0.0_f64;
        for i in 0..n {
            for j in 0..i {
                d = d.max((self.f[i][j] - self.f[j][i]).abs());
            }
        }
        d / scale
    }

    /// Width of the excluded band around `xi_i`: two local grid spacings.
    pub fn band(&self, i: usize) -> f64 {
        let n = self.xis.len();
        let h = if i + 1 < n {
            self.xis[i + 1] - self.xis[i]
        } else {
            self.xis[i] - self.xis[i - 1]
        };
        2.0 * h
    }

    /// `K0(xi_i, xi_j) = rho(xi_i) F(xi_i, xi_j) / (xi_i - xi_j)`.
    pub fn k0(&self, i: usize, j: usize) -> Result<f64> {
        let gap = (self.xis[i] - self.xis[j]).abs();
        let band = self.band(i);
        if gap < band {
            return Err(Error::DiagonalBand { gap, band });
        }
        Ok(self.rho[i] * self.f[i][j] / (self.xis[i] - self.xis[j]))
    }
}

/// `-(3/2 + eta rho'(eta)/rho(eta))` with the log-derivative from the three
/// grid points nearest to `eta` (quadratic in `log xi`).
pub fn diag_coefficient(xis: &[f64], rho: &[f64], eta: f64) -> Result<f64> {
    let n = xis.len();
    if n < 3 || !(eta >= xis[0] && eta <= xis[n - 1]) {
        return Err(Error::GridEdge(eta));
    }
    let i = xis
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - eta).abs().total_cmp(&(b.1 - eta).abs()))
        .map(|(i, _)| i)
        .unwrap();
    if i == 0 || i == n - 1 {
        return Err(Error::GridEdge(eta));
    }
    let x = [xis[i - 1].ln(), xis[i].ln(), xis[i + 1].ln()];
    let y = [rho[i - 1].ln(), rho[i].ln(), rho[i + 1].ln()];
    let at = eta.ln();
    // derivative of the interpolating quadratic
    let mut d = 0.0;
    for k in 0..3 {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        d += y[k] * ((at - x[a]) + (at - x[b])) / ((x[k] - x[a]) * (x[k] - x[b]));
    }
    Ok(-(1.5 + d))
}

/// The same coefficient from `rho = 1/(4 pi |a|^2)`, differencing `log |a|`
/// at `eta e^{+-h}` with freshly computed modes.
pub fn diag_coefficient_from_a(op: &SpectralOperator, eta: f64, h: f64) -> Result<f64> {
    let ap = op.compute_a(eta * h.exp())?.norm().ln();
    let am = op.compute_a(eta * (-h).exp())?.norm().ln();
    let dlog_rho = -2.0 * (ap - am) / (2.0 * h);
    Ok(-(1.5 + dlog_rho))
}

/// `F` and its first and second derivatives at one pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct FDerivatives {
    pub f: f64,
    pub f_xi: f64,
    pub f_eta: f64,
    pub f_xixi: f64,
    pub f_xieta: f64,
    pub f_etaeta: f64,
}

/// Derivatives of `F` by quadrature of `W` against `xi`-derivatives of `phi`
/// obtained from the variational equations; integrated to `r_cut`.
pub fn f_derivatives(op: &SpectralOperator, xi: f64, eta: f64, r_cut: f64) -> Result<FDerivatives> {
    let opts = KernelOptions::default();
    let k = xi.sqrt() + eta.sqrt();
    let n_log = ((-opts.r_min.ln() / opts.log_panel).ceil() as usize).max(1);
    let (ls, lw) = composite_gl(opts.r_min.ln(), 0.0, n_log, opts.order);
    let mut nodes: Vec<f64> = ls.iter().map(|s| s.exp()).collect();
    let mut weights: Vec<f64> = ls.iter().zip(&lw).map(|(s, w)| s.exp() * w).collect();
    let width = (opts.phase_per_panel / k).min(1.0);
    let (rs, rw) = composite_gl(1.0, r_cut, (((r_cut - 1.0) / width).ceil() as usize).max(1), opts.order);
    nodes.extend(rs);
    weights.extend(rw);
    let jx = op.phi_jets(xi, &nodes)?;
    let je = op.phi_jets(eta, &nodes)?;
    let mut d = FDerivatives::default();
    for ((r, w), (a, b)) in nodes.iter().zip(&weights).zip(jx.iter().zip(&je)) {
        let ww = w * op.potential().w(*r);
        d.f += ww * a[0] * b[0];
        d.f_xi += ww * a[2] * b[0];
        d.f_eta += ww * a[0] * b[2];
        d.f_xixi += ww * a[4] * b[0];
        d.f_xieta += ww * a[2] * b[2];
        d.f_etaeta += ww * a[0] * b[4];
    }
    Ok(d)
}

/// Fitted constants of the three bound families on a sample grid; `N = 4`
/// in the off-diagonal decay factor.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundConstants {
    /// `sup |F| / (xi + eta)` over `xi + eta <= 1`.
    pub value_small: f64,
    /// `sup |F| (xi + eta)^{3/2} (1 + |sqrt xi - sqrt eta|)^4` over `xi + eta >= 1`.
    pub value_large: f64,
    pub first_small: f64,
    pub first_large: f64,
    /// `sup |D^2 F| / |log(xi + eta)|^3` over `xi + eta <= 1`.
    pub second_small: f64,
    pub second_large: f64,
}

pub fn fit_bounds(op: &SpectralOperator, xis: &[f64], r_cut: f64) -> Result<BoundConstants> {
    let pairs: Vec<(f64, f64)> = xis
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| xis[..=i].iter().map(move |&y| (x, y)))
        .collect();
    let ds = pairs
        .par_iter()
        .map(|&(x, y)| Ok(((x, y), f_derivatives(op, x, y, r_cut)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut b = BoundConstants::default();
    for ((x, y), d) in ds {
        let s = x + y;
        let first = d.f_xi.abs() + d.f_eta.abs();
        let second = d.f_xixi.abs().max(d.f_xieta.abs()).max(d.f_etaeta.abs());
        if s <= 1.0 {
            b.value_small = b.value_small.max(d.f.abs() / s);
            b.first_small = b.first_small.max(first);
            b.second_small = b.second_small.max(second / s.ln().abs().max(1.0).powi(3));
        } else {
            let off = (1.0 + (x.sqrt() - y.sqrt()).abs()).powi(4);
            b.value_large = b.value_large.max(d.f.abs() * s.powf(1.5) * off);
            b.first_large = b.first_large.max(first * s * s * off);
            b.second_large = b.second_large.max(second * s.powf(2.5) * off);
        }
    }
    Ok(b)
}

/// Exponent of `|F(xi, xi)|` in `xi` on a grid; used for the decay shadow.
pub fn diagonal_decay_exponent(table: &KernelTable) -> f64 {
    let n = table.xis.len();
    let d: Vec<f64> = (0..n).map(|i| table.f[i][i].abs()).collect();
    loglog_slope(&table.xis, &d)
}
