//! Truncated power series `sum c_k x^k` as plain coefficient vectors.

pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

/// Derivative coefficients.
pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

pub fn mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate().take(n) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(0.0) + b.get(k).copied().unwrap_or(0.0))
        .collect()
}

/// `outer(inner(x))` truncated to `n` terms; requires `inner[0] == 0`.
pub fn compose(outer: &[f64], inner: &[f64], n: usize) -> Vec<f64> {
    assert!(inner.first().map_or(true, |v| *v == 0.0));
    let mut acc = vec![0.0; n];
    for &ck in outer.iter().rev() {
        acc = mul(&acc, inner, n);
        acc[0] += ck;
    }
    acc
}

/// Coefficients `a_k` of `q(x)` with `Q(r) = r q(r^2)` solving `r Q' = Q G(Q^2)`,
/// given `q(0) = a0` and the coefficients of `G`.
pub fn odd_flow_coefficients(g: &[f64], a0: f64, n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n];
    q[0] = a0;
    let mut gm1 = g.to_vec();
    gm1[0] -= 1.0;
    for k in 1..n {
        // y = x q^2 has zero constant term
        let q2 = mul(&q, &q, k + 1);
        let mut y = vec![0.0; k + 1];
        y[1..].copy_from_slice(&q2[..k]);
        let gy = compose(&gm1, &y, k + 1);
        let rhs = mul(&q, &gy, k + 1);
        q[k] = rhs[k] / (2.0 * k as f64);
    }
    q
}
