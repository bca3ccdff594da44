//! Radial wave maps `u_tt = u_rr + u_r/r - f(u)/r^2` on `(0, r_max]`.
//!
//! Cell values `u_i = u(i h)`, `i = 1..=n`, with `u_0 = 0` on the axis and the
//! outer ghost value `u_{n+1}` pinned to its initial value. The spatial
//! operator is the Euler–Lagrange operator of the discrete energy
//!
//! `E_h = sum_i h r_i ut_i^2/2 + sum_{i+1/2} h r_{i+1/2} (D u)^2/2 + sum_i h r_i (g(u_i)/r_i)^2/2`,
//!
//! so velocity Verlet conserves `E_h` up to bounded `O(dt^2)` oscillation
//! and is exactly reversible. Axis terms use `g(u) = u G(u^2)` and
//! `f(u) = u F(u^2)`, so `u/r` is the only quotient ever formed.

use crate::error::{Error, Result};
use crate::harmonic_map::HarmonicMap;
use crate::profile::{BlowupFrame, Corrector, ProfileEvaluator, U0, U1};
use crate::surface::SurfaceProfile;

/// Cells across the soliton core `r = lambda(t)^{-1}` required by the runs.
pub const CORE_CELLS: f64 = 32.0;

#[derive(Debug, Clone)]
pub struct RadialField {
    h: f64,
    u: Vec<f64>,
    ut: Vec<f64>,
    /// Pinned value just outside `r_max`.
    u_outer: f64,
    t: f64,
    surface: SurfaceProfile,
    /// Damping rates `sigma_i` of the optional outer sponge.
    sponge: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub n: usize,
    pub r_max: f64,
}

impl GridOptions {
    pub fn spacing(&self) -> f64 {
        self.r_max / self.n as f64
    }
}

impl RadialField {
    /// Field from samples `u(r_i)`, `ut(r_i)` at `r_i = i h`, `i = 1..=n`; the
    /// outer pin takes the value of `u` at `r_max + h`.
    pub fn from_fn(
        surface: &SurfaceProfile,
        grid: GridOptions,
        t: f64,
        u: impl Fn(f64) -> f64,
        ut: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if grid.n < 4 || !(grid.r_max > 0.0) {
            return Err(Error::Resolution(format!(
                "grid needs n >= 4 and r_max > 0, got n = {}, r_max = {}",
                grid.n, grid.r_max
            )));
        }
        let h = grid.spacing();
        let rs: Vec<f64> = (1..=grid.n).map(|i| i as f64 * h).collect();
        Ok(Self {
            h,
            u: rs.iter().map(|&r| u(r)).collect(),
            ut: rs.iter().map(|&r| ut(r)).collect(),
            u_outer: u((grid.n + 1) as f64 * h),
            t,
            surface: surface.clone(),
            sponge: Vec::new(),
        })
    }

    /// Absorbing layer on `[r_max - width, r_max]` with damping rate rising
    /// quadratically to `strength`. Replaces the reflecting pin for
    /// outgoing waves; breaks exact reversibility and energy conservation.
    pub fn set_sponge(&mut self, width: f64, strength: f64) {
        let r0 = self.r_max() - width;
        self.sponge = self
            .radii()
            .iter()
            .map(|&r| if r > r0 { strength * ((r - r0) / width).powi(2) } else { 0.0 })
            .collect();
    }

    fn damp(&mut self, dt: f64) {
        for (v, s) in self.ut.iter_mut().zip(&self.sponge) {
            *v *= (-s * dt.abs()).exp();
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn r_max(&self) -> f64 {
        self.h * self.n() as f64
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn ut(&self) -> &[f64] {
        &self.ut
    }

    pub fn radii(&self) -> Vec<f64> {
        (1..=self.n()).map(|i| i as f64 * self.h).collect()
    }

    fn acceleration(&self, out: &mut [f64]) {
        let h = self.h;
        let n = self.n();
        let sf = &self.surface;
        for i in 0..n {
            let r = (i + 1) as f64 * h;
            let left = if i == 0 { 0.0 } else { self.u[i - 1] };
            let right = if i + 1 == n { self.u_outer } else { self.u[i + 1] };
            let u = self.u[i];
            let flux = (r + 0.5 * h) * (right - u) - (r - 0.5 * h) * (u - left);
            let q = u / r;
            out[i] = flux / (r * h * h) - q * sf.f_over_rho(u) / r;
        }
    }

    /// One velocity-Verlet step; `dt` may be negative.
    pub fn step(&mut self, dt: f64, cfl_max: f64) -> Result<()> {
        let limit = cfl_max.min(1.0) * self.h;
        if !(dt.abs() <= limit * (1.0 + 1e-12)) {
            return Err(Error::Cfl { dt, limit });
        }
        let n = self.n();
        let mut a = vec![0.0; n];
        self.damp(0.5 * dt);
        self.acceleration(&mut a);
        for i in 0..n {
            self.ut[i] += 0.5 * dt * a[i];
            self.u[i] += dt * self.ut[i];
        }
        self.acceleration(&mut a);
        for i in 0..n {
            self.ut[i] += 0.5 * dt * a[i];
        }
        self.damp(0.5 * dt);
        self.t += dt;
        if self.u.iter().chain(&self.ut).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: self.t });
        }
        Ok(())
    }

    /// Energy density contributions `(kinetic + potential at cell i,
    /// gradient across the edge i+1/2)`, each already multiplied by `h r`.
    fn cell_energy(&self, i: usize) -> (f64, f64) {
        let h = self.h;
        let n = self.n();
        let r = (i + 1) as f64 * h;
        let u = self.u[i];
        let q = u / r;
        let g = q * self.surface.g_over_rho(u);
        let cell = 0.5 * h * r * (self.ut[i] * self.ut[i] + g * g);
        let right = if i + 1 == n { self.u_outer } else { self.u[i + 1] };
        let du = (right - u) / h;
        let edge = 0.5 * h * (r + 0.5 * h) * du * du;
        (cell, edge)
    }

    /// Gradient energy across the axis edge `[0, h]`.
    fn axis_edge(&self) -> f64 {
        let du = self.u[0] / self.h;
        0.25 * self.h * self.h * du * du
    }

    pub fn energy(&self) -> f64 {
        self.local_energy(f64::INFINITY)
    }

    /// Partial sum of the discrete energy over cells and edges inside `radius`.
    pub fn local_energy(&self, radius: f64) -> f64 {
        let h = self.h;
        let mut e = if 0.5 * h < radius { self.axis_edge() } else { 0.0 };
        for i in 0..self.n() {
            let r = (i + 1) as f64 * h;
            if r >= radius {
                break;
            }
            let (cell, edge) = self.cell_energy(i);
            e += cell;
            if r + 0.5 * h < radius {
                e += edge;
            }
        }
        e
    }

    pub fn sup_abs(&self) -> f64 {
        self.u.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `max |u_i / r_i|` over the three innermost cells.
    pub fn axis_slope(&self) -> f64 {
        (0..3.min(self.n()))
            .map(|i| (self.u[i] / ((i + 1) as f64 * self.h)).abs())
            .fold(0.0, f64::max)
    }

    /// Energy flux `-r u_t u_r` through the outer edge.
    pub fn outer_flux(&self) -> f64 {
        let n = self.n();
        let r = self.r_max() + 0.5 * self.h;
        -r * self.ut[n - 1] * (self.u_outer - self.u[n - 1]) / self.h
    }

    pub fn report(&self, radii: &[f64], dt: f64) -> EnergyReport {
        EnergyReport {
            t: self.t,
            e_total: self.energy(),
            e_loc: radii.iter().map(|&r| (r, self.local_energy(r))).collect(),
            flux: self.outer_flux(),
            sup_u: self.sup_abs(),
            dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub e_total: f64,
    /// `(radius, E_loc)` pairs.
    pub e_loc: Vec<(f64, f64)>,
    pub flux: f64,
    pub sup_u: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// Non-finite values appeared; blow-up of the discrete solution suspected.
    NonFinite { t: f64 },
    /// The soliton core dropped below `CORE_CELLS` cells.
    ResolutionExhausted { t: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub reports: Vec<EnergyReport>,
    pub status: RunStatus,
}

/// Step from the current time to `t_end` with `|dt| = cfl h` (the last step
/// shortened), recording a report at each of `report_times` crossed, and at
/// `t_end`. `radii` maps the current time to the local-energy radii.
pub fn evolve(
    field: &mut RadialField,
    t_end: f64,
    cfl: f64,
    report_times: &[f64],
    radii: impl Fn(f64) -> Vec<f64>,
    core_radius: impl Fn(f64) -> Option<f64>,
) -> Result<Trajectory> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::Cfl {
            dt: cfl * field.h,
            limit: field.h,
        });
    }
    let dir = if t_end >= field.t { 1.0 } else { -1.0 };
    let dt_full = cfl * field.h;
    let mut pending: Vec<f64> = report_times
        .iter()
        .copied()
        .filter(|&t| (t - field.t) * dir > 0.0 && (t_end - t) * dir >= 0.0)
        .collect();
    pending.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    pending.push(t_end);
    pending.dedup();
    let mut reports = vec![field.report(&radii(field.t), 0.0)];
    let mut min_dt = f64::INFINITY;
    for target in pending {
        // uniform steps per segment, landing exactly on the target
        let span = target - field.t;
        let steps = (span.abs() / dt_full.abs() * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        for _ in 0..steps {
            match field.step(dt, cfl) {
                Ok(()) => {}
                Err(Error::NonFinite { t }) => {
                    return Ok(Trajectory {
                        reports,
                        status: RunStatus::NonFinite { t },
                    })
                }
                Err(e) => return Err(e),
            }
        }
        min_dt = min_dt.min(dt.abs());
        field.t = target;
        reports.push(field.report(&radii(field.t), min_dt));
        if let Some(core) = core_radius(field.t) {
            if core < CORE_CELLS * field.h {
                return Ok(Trajectory {
                    reports,
                    status: RunStatus::ResolutionExhausted { t: field.t },
                });
            }
        }
    }
    Ok(Trajectory {
        reports,
        status: RunStatus::Completed,
    })
}

/// `u = Q(r)`, `u_t = 0`.
pub fn init_static(hm: &HarmonicMap, grid: GridOptions) -> Result<RadialField> {
    RadialField::from_fn(hm.surface(), grid, 0.0, |r| hm.q(r), |_| 0.0)
}

/// `u = u1(t_start, .)` (or `u0` without a corrector) and its exact time
/// derivative inside the cone `r <= t_start`, blended smoothly into `u0` on
/// `[t_start, 2 t_start]`. Data beyond the cone cannot reach the shrinking
/// cone `r < t` before `t = 0`.
pub fn init_from_profile(
    frame: &BlowupFrame,
    hm: &HarmonicMap,
    corrector: Option<&Corrector>,
    t_start: f64,
    grid: GridOptions,
) -> Result<RadialField> {
    if !(t_start > 0.0 && t_start <= frame.t0()) {
        return Err(Error::Domain(format!("t_start = {t_start} outside (0, {}]", frame.t0())));
    }
    if grid.r_max < t_start {
        return Err(Error::Domain(format!(
            "r_max = {} does not cover the cone r < {t_start}",
            grid.r_max
        )));
    }
    let core = 1.0 / frame.lambda(t_start);
    if core < CORE_CELLS * grid.spacing() {
        return Err(Error::Resolution(format!(
            "core radius {core:.3e} spans fewer than {CORE_CELLS} cells of width {:.3e}",
            grid.spacing()
        )));
    }
    let p0 = U0 { frame: *frame, hm };
    let jet0 = |r: f64| p0.jet(t_start, r);
    match corrector {
        Some(c) => {
            let p1 = U1 { corrector: c };
            // u1 only inside the cone of dependence r <= t_start; u0 beyond
            let blend = |r: f64| {
                let chi = smooth_step(r / t_start - 1.0);
                let (a, b) = (p1.jet(t_start, r), jet0(r));
                (chi * a.u + (1.0 - chi) * b.u, chi * a.u_t + (1.0 - chi) * b.u_t)
            };
            RadialField::from_fn(hm.surface(), grid, t_start, |r| blend(r).0, |r| blend(r).1)
        }
        None => RadialField::from_fn(hm.surface(), grid, t_start, |r| jet0(r).u, |r| jet0(r).u_t),
    }
}

/// Smooth `1 -> 0` transition on `x in [0, 1]`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        b / (a + b)
    }
}

/// Dyadic report times `t_start / 2^k` strictly between the ends.
pub fn dyadic_times(t_start: f64, t_end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.5 * t_start;
    while t > t_end * (1.0 + 1e-12) {
        out.push(t);
        t *= 0.5;
    }
    out
}

/// Step control shared by the experiment and the control run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub cfl: f64,
    /// Width of an absorbing outer sponge; `None` keeps the reflecting pin.
    pub sponge: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { cfl: 0.5, sponge: None }
    }
}

impl RunOptions {
    fn apply(&self, field: &mut RadialField) {
        if let Some(w) = self.sponge {
            let w = w.min(field.r_max());
            field.set_sponge(w, 20.0 / w);
        }
    }
}

/// Row of the blow-up experiment output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRow {
    pub t: f64,
    pub e_total: f64,
    pub e_loc_cone: f64,
    pub sup_u: f64,
    pub min_dt: f64,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub rows: Vec<ExperimentRow>,
    pub status: RunStatus,
    /// `E(Q)` for reference.
    pub e_q: f64,
}

fn rows_of(tr: &Trajectory) -> Vec<ExperimentRow> {
    tr.reports
        .iter()
        .map(|r| ExperimentRow {
            t: r.t,
            e_total: r.e_total,
            e_loc_cone: r.e_loc[0].1,
            sup_u: r.sup_u,
            min_dt: r.dt,
        })
        .collect()
}

/// Evolve `u1` from `t_start` backwards to `t_end`, logging `E_loc` over the
/// cone `r < t` at dyadic times.
pub fn run_blowup_experiment(
    frame: &BlowupFrame,
    hm: &HarmonicMap,
    corrector: Option<&Corrector>,
    t_start: f64,
    t_end: f64,
    grid: GridOptions,
    opts: RunOptions,
) -> Result<Experiment> {
    if !(t_end > 0.0 && t_end < t_start) {
        return Err(Error::Domain(format!("need 0 < t_end < t_start, got {t_end}, {t_start}")));
    }
    let core_end = 1.0 / frame.lambda(t_end);
    if core_end < CORE_CELLS * grid.spacing() {
        return Err(Error::Resolution(format!(
            "core radius {core_end:.3e} at t_end spans fewer than {CORE_CELLS} cells"
        )));
    }
    let mut field = init_from_profile(frame, hm, corrector, t_start, grid)?;
    opts.apply(&mut field);
    let f = *frame;
    let tr = evolve(
        &mut field,
        t_end,
        opts.cfl,
        &dyadic_times(t_start, t_end),
        |t| vec![t],
        move |t| Some(1.0 / f.lambda(t)),
    )?;
    Ok(Experiment {
        rows: rows_of(&tr),
        status: tr.status,
        e_q: hm.energy()?,
    })
}

/// Sub-threshold control: `amplitude * Q(lambda(t_start) r)` smoothly cut
/// off to zero on `[t_start, 2 t_start]`, at rest, evolved like the
/// experiment.
pub fn run_control(
    frame: &BlowupFrame,
    hm: &HarmonicMap,
    amplitude: f64,
    t_start: f64,
    t_end: f64,
    grid: GridOptions,
    opts: RunOptions,
) -> Result<Experiment> {
    if !(t_end > 0.0 && t_end < t_start) {
        return Err(Error::Domain(format!("need 0 < t_end < t_start, got {t_end}, {t_start}")));
    }
    let lambda = frame.lambda(t_start);
    let cut = |r: f64| smooth_step(r / t_start - 1.0);
    let mut field = RadialField::from_fn(
        hm.surface(),
        grid,
        t_start,
        |r| amplitude * hm.q(lambda * r) * cut(r),
        |_| 0.0,
    )?;
    opts.apply(&mut field);
    let tr = evolve(
        &mut field,
        t_end,
        opts.cfl,
        &dyadic_times(t_start, t_end),
        |t| vec![t],
        |_| None,
    )?;
    Ok(Experiment {
        rows: rows_of(&tr),
        status: tr.status,
        e_q: hm.energy()?,
    })
}
