//! Chebyshev interpolation on single intervals and on uniform panel chains.

use std::f64::consts::PI;

/// Chebyshev–Lobatto nodes on `[a, b]` in increasing order.
pub fn lobatto_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    (0..=n)
        .map(|k| {
            if k == 0 {
                a
            } else if k == n {
                b
            } else {
                let x = -(PI * k as f64 / n as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * x
            }
        })
        .collect()
}

/// Polynomial on `[a, b]` stored through its Chebyshev coefficients,
/// `p(x) = sum c_k T_k(t)` with `t` the affine image of `x` in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebPanel {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl ChebPanel {
    /// Interpolate values given at `lobatto_nodes(a, b, values.len() - 1)`.
    pub fn from_values(a: f64, b: f64, values: &[f64]) -> Self {
        let n = values.len() - 1;
        assert!(n >= 1, "need at least two nodes");
        // Nodes are ordered by increasing x, i.e. t_k = -cos(pi k / n).
        // With theta_k = pi k / n we have T_j(t_k) = (-1)^j cos(j theta_k).
        let mut coeffs = vec![0.0; n + 1];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for (k, v) in values.iter().enumerate() {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                s += w * v * (PI * ((j * k) % (2 * n)) as f64 / n as f64).cos();
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let scale = if j == 0 || j == n { 1.0 } else { 2.0 };
            *c = sign * scale * s / n as f64;
        }
        Self { a, b, coeffs }
    }

    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = lobatto_nodes(a, b, n).into_iter().map(f).collect();
        Self::from_values(a, b, &values)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    /// Clenshaw summation.
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.to_unit(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len() - 1;
        let mut d = vec![0.0; n + 1];
        if n >= 1 {
            // d_{k-1} = d_{k+1} + 2 k c_k, then halve d_0.
            for k in (1..=n).rev() {
                let next = if k + 1 <= n { d[k + 1] } else { 0.0 };
                d[k - 1] = next + 2.0 * k as f64 * self.coeffs[k];
            }
            d[0] *= 0.5;
        }
        let scale = 2.0 / (self.b - self.a);
        for v in d.iter_mut() {
            *v *= scale;
        }
        Self {
            a: self.a,
            b: self.b,
            coeffs: d,
        }
    }

    /// Antiderivative vanishing at the left end `a`.
    pub fn integral(&self) -> Self {
        let n = self.coeffs.len() - 1;
        let mut out = vec![0.0; n + 2];
        for (k, &c) in self.coeffs.iter().enumerate() {
            match k {
                0 => out[1] += c,
                1 => out[2] += 0.25 * c,
                _ => {
                    out[k + 1] += c / (2.0 * (k + 1) as f64);
                    out[k - 1] -= c / (2.0 * (k - 1) as f64);
                }
            }
        }
        let half = 0.5 * (self.b - self.a);
        for v in out.iter_mut() {
            *v *= half;
        }
        // Fix the constant so that the value at t = -1 is zero.
        let at_left: f64 = out
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { *c } else { -*c })
            .sum();
        out[0] -= at_left;
        Self {
            a: self.a,
            b: self.b,
            coeffs: out,
        }
    }

    /// Magnitude of the trailing coefficients, a cheap resolution indicator.
    pub fn tail_magnitude(&self) -> f64 {
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(3)..]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// Piecewise Chebyshev interpolant on equal-width panels covering `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelTable {
    a: f64,
    b: f64,
    panels: Vec<ChebPanel>,
}

impl PanelTable {
    pub fn breakpoints(a: f64, b: f64, n_panels: usize) -> Vec<f64> {
        (0..=n_panels)
            .map(|i| a + (b - a) * i as f64 / n_panels as f64)
            .collect()
    }

    /// All interpolation nodes, panel by panel (shared endpoints repeated).
    pub fn node_layout(a: f64, b: f64, n_panels: usize, order: usize) -> Vec<Vec<f64>> {
        let br = Self::breakpoints(a, b, n_panels);
        br.windows(2)
            .map(|w| lobatto_nodes(w[0], w[1], order))
            .collect()
    }

    pub fn from_panel_values(a: f64, b: f64, values: &[Vec<f64>]) -> Self {
        let br = Self::breakpoints(a, b, values.len());
        let panels = br
            .windows(2)
            .zip(values)
            .map(|(w, v)| ChebPanel::from_values(w[0], w[1], v))
            .collect();
        Self { a, b, panels }
    }

    pub fn from_fn(a: f64, b: f64, n_panels: usize, order: usize, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<Vec<f64>> = Self::node_layout(a, b, n_panels, order)
            .into_iter()
            .map(|nodes| nodes.into_iter().map(&f).collect())
            .collect();
        Self::from_panel_values(a, b, &values)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn panels(&self) -> &[ChebPanel] {
        &self.panels
    }

    fn locate(&self, x: f64) -> usize {
        let n = self.panels.len();
        let idx = ((x - self.a) / (self.b - self.a) * n as f64).floor();
        if idx.is_nan() || idx < 0.0 {
            0
        } else {
            (idx as usize).min(n - 1)
        }
    }

    /// Evaluation; points outside `[a, b]` are extrapolated from the end panels.
    pub fn eval(&self, x: f64) -> f64 {
        self.panels[self.locate(x)].eval(x)
    }

    pub fn derivative(&self) -> Self {
        Self {
            a: self.a,
            b: self.b,
            panels: self.panels.iter().map(ChebPanel::derivative).collect(),
        }
    }

    /// Cumulative integral from `a`, plus `offset`.
    pub fn cumulative_integral(&self, offset: f64) -> Self {
        let mut acc = offset;
        let mut panels = Vec::with_capacity(self.panels.len());
        for p in &self.panels {
            let mut q = p.integral();
            q.coeffs[0] += acc;
            acc = q.eval(p.b);
            panels.push(q);
        }
        Self {
            a: self.a,
            b: self.b,
            panels,
        }
    }

    /// Cumulative integral towards the left, `-int_x^b`, plus `offset`
    /// (so the value at `b` is `offset`).
    pub fn cumulative_integral_from_right(&self, offset: f64) -> Self {
        let mut acc = offset;
        let mut panels: Vec<ChebPanel> = Vec::with_capacity(self.panels.len());
        for p in self.panels.iter().rev() {
            let mut q = p.integral();
            let at_right = q.eval(p.b);
            q.coeffs[0] += acc - at_right;
            acc = q.eval(p.a);
            panels.push(q);
        }
        panels.reverse();
        Self {
            a: self.a,
            b: self.b,
            panels,
        }
    }

    /// Drop trailing coefficients below `rel * max|c|` on every panel.
    pub fn chop(&mut self, rel: f64) {
        for p in &mut self.panels {
            let m = p.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
            for c in p.coeffs.iter_mut() {
                if c.abs() < rel * m {
                    *c = 0.0;
                }
            }
        }
    }

    /// Pointwise product with a function sampled at fresh nodes of the same
    /// order as the first panel.
    pub fn map_nodes(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let order = self.panels[0].coeffs.len() - 1;
        let values: Vec<Vec<f64>> = self
            .panels
            .iter()
            .map(|p| {
                lobatto_nodes(p.a, p.b, order)
                    .into_iter()
                    .map(|x| f(x, p.eval(x)))
                    .collect()
            })
            .collect();
        Self::from_panel_values(self.a, self.b, &values)
    }

    pub fn add(&self, other: &Self, scale: f64) -> Self {
        let panels = self
            .panels
            .iter()
            .zip(&other.panels)
            .map(|(p, q)| {
                let n = p.coeffs.len().max(q.coeffs.len());
                let coeffs = (0..n)
                    .map(|k| {
                        p.coeffs.get(k).copied().unwrap_or(0.0)
                            + scale * q.coeffs.get(k).copied().unwrap_or(0.0)
                    })
                    .collect();
                ChebPanel {
                    a: p.a,
                    b: p.b,
                    coeffs,
                }
            })
            .collect();
        Self {
            a: self.a,
            b: self.b,
            panels,
        }
    }

    pub fn max_tail_magnitude(&self) -> f64 {
        self.panels
            .iter()
            .fold(0.0_f64, |m, p| m.max(p.tail_magnitude()))
    }
}
