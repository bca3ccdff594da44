//! The potential `V(R) = -(1 - f'(Q(R)))/R^2` of the operator
//! `L = -d^2/dR^2 + 3/(4R^2) + V`, and `W = -(2V + R V')`, defined by
//! `[L, R d/dR] = 2L + W`.

use crate::harmonic_map::HarmonicMap;

#[derive(Debug, Clone)]
pub struct Potential {
    hm: Option<HarmonicMap>,
}

impl Potential {
    pub fn new(hm: &HarmonicMap) -> Self {
        Self {
            hm: Some(hm.clone()),
        }
    }

    /// `V = 0`: the operator reduces to the order-one Bessel operator.
    pub fn free() -> Self {
        Self { hm: None }
    }

    pub fn is_free(&self) -> bool {
        self.hm.is_none()
    }

    pub fn harmonic_map(&self) -> Option<&HarmonicMap> {
        self.hm.as_ref()
    }

    /// `1 - f'(Q(r))`.
    fn defect(&self, r: f64) -> f64 {
        match &self.hm {
            None => 0.0,
            Some(hm) => hm.one_minus_f1_of_q(r),
        }
    }

    pub fn v(&self, r: f64) -> f64 {
        match &self.hm {
            None => 0.0,
            Some(hm) if r == 0.0 => {
                // V(0) = P_1 Q'(0)^2 with f'(rho) = sum P_k rho^{2k}
                hm.surface().series_f1()[1] * hm.q0_coeff().powi(2)
            }
            Some(_) => -self.defect(r) / (r * r),
        }
    }

    pub fn v_prime(&self, r: f64) -> f64 {
        match &self.hm {
            None => 0.0,
            Some(_) if r == 0.0 => 0.0,
            Some(hm) => {
                2.0 * self.defect(r) / (r * r * r) + hm.f2_of_q(r) * hm.q_prime(r) / (r * r)
            }
        }
    }

    pub fn w(&self, r: f64) -> f64 {
        -(2.0 * self.v(r) + r * self.v_prime(r))
    }

    /// Full potential `3/(4r^2) + V(r)`.
    pub fn total(&self, r: f64) -> f64 {
        0.75 / (r * r) + self.v(r)
    }

    /// `3/4 + r^2 V(r)` as a function of `y = 1/r`; regular at `y = 0`.
    pub fn p_tilde(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 0.75;
        }
        0.75 - self.defect(1.0 / y)
    }
}
