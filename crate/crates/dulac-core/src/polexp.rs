//! Finite pol-exp sums `Σ P_λ(z) e^{-λz}` keyed by the exponent λ ≥ 0.
//!
//! This is the shared carrier for the tails of Dulac series and the
//! coefficients of nilpotent derivations.

use alloc::vec::Vec;

use crate::num::{Cx, Qd};
use crate::poly::PolyZ;

/// Sorted by ascending λ; no two keys coincide within the merge tolerance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolExp {
    terms: Vec<(Qd, PolyZ)>,
}

/// Relative slack used when comparing a key against a validity order.
const CUT_SLACK: f64 = 1e-12;

#[inline]
pub(crate) fn within(key: Qd, cutoff: f64) -> bool {
    key.hi() <= cutoff + CUT_SLACK * cutoff.abs().max(1.0)
}

#[inline]
fn same_key(a: Qd, b: Qd, eps: f64) -> bool {
    (a - b).abs().hi() <= eps * 1f64.max(a.hi().abs())
}

impl PolExp {
    pub fn new() -> PolExp {
        PolExp { terms: Vec::new() }
    }

    /// Sorts and merges; zero polynomials are dropped.
    pub fn from_terms(mut v: Vec<(Qd, PolyZ)>, eps: f64) -> PolExp {
        v.retain(|(_, p)| !p.is_zero());
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
        let mut out: Vec<(Qd, PolyZ)> = Vec::with_capacity(v.len());
        for (k, p) in v {
            match out.last_mut() {
                Some((k0, p0)) if same_key(*k0, k, eps) => p0.add_scaled(&p, Cx::ONE),
                _ => out.push((k, p)),
            }
        }
        let mut r = PolExp { terms: out };
        r.drop_zero();
        r
    }

    pub fn single(lambda: Qd, p: PolyZ) -> PolExp {
        PolExp::from_terms(alloc::vec![(lambda, p)], 0.0)
    }

    pub fn terms(&self) -> &[(Qd, PolyZ)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Qd, PolyZ)> {
        self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Smallest key, if any.
    pub fn flatness(&self) -> Option<Qd> {
        self.terms.first().map(|t| t.0)
    }

    pub fn max_key(&self) -> Option<Qd> {
        self.terms.last().map(|t| t.0)
    }

    pub fn get(&self, lambda: Qd, eps: f64) -> Option<&PolyZ> {
        self.terms.iter().find(|(k, _)| same_key(*k, lambda, eps)).map(|(_, p)| p)
    }

    fn drop_zero(&mut self) {
        self.terms.retain(|(_, p)| !p.is_zero());
    }

    /// Drops coefficients at or below `eps` and empty terms.
    pub fn chop(self, eps: f64) -> PolExp {
        let mut terms: Vec<(Qd, PolyZ)> =
            self.terms.into_iter().map(|(k, p)| (k, p.chop(eps))).collect();
        terms.retain(|(_, p)| !p.is_zero());
        PolExp { terms }
    }

    /// Keeps keys `<= cutoff`.
    pub fn truncate(mut self, cutoff: f64) -> PolExp {
        self.terms.retain(|(k, _)| within(*k, cutoff));
        self
    }

    pub fn truncated(&self, cutoff: f64) -> PolExp {
        PolExp { terms: self.terms.iter().filter(|(k, _)| within(*k, cutoff)).cloned().collect() }
    }

    pub fn add(&self, o: &PolExp, eps: f64) -> PolExp {
        let mut v = self.terms.clone();
        v.extend(o.terms.iter().cloned());
        PolExp::from_terms(v, eps)
    }

    pub fn sub(&self, o: &PolExp, eps: f64) -> PolExp {
        self.add(&o.neg(), eps)
    }

    pub fn neg(&self) -> PolExp {
        self.scale(-Cx::ONE)
    }

    pub fn scale(&self, s: Cx) -> PolExp {
        if s.is_zero() {
            return PolExp::new();
        }
        PolExp { terms: self.terms.iter().map(|(k, p)| (*k, p.scale(s))).collect() }
    }

    pub fn mul_poly(&self, q: &PolyZ) -> PolExp {
        let mut terms: Vec<(Qd, PolyZ)> = self.terms.iter().map(|(k, p)| (*k, p.mul(q))).collect();
        terms.retain(|(_, p)| !p.is_zero());
        PolExp { terms }
    }

    /// Multiplies by `e^{-δz}`.
    pub fn shift_keys(&self, delta: Qd) -> PolExp {
        PolExp { terms: self.terms.iter().map(|(k, p)| (*k + delta, p.clone())).collect() }
    }

    /// Scales every key by `a` (substitution `z -> a z` in the exponentials only).
    pub fn scale_keys(&self, a: Qd) -> PolExp {
        PolExp { terms: self.terms.iter().map(|(k, p)| (*k * a, p.clone())).collect() }
    }

    /// Product truncated to keys `<= cutoff`.
    pub fn mul(&self, o: &PolExp, cutoff: f64, eps: f64) -> PolExp {
        let mut v = Vec::new();
        for (k1, p1) in &self.terms {
            if !within(*k1, cutoff) {
                break;
            }
            for (k2, p2) in &o.terms {
                let k = *k1 + *k2;
                if !within(k, cutoff) {
                    break;
                }
                v.push((k, p1.mul(p2)));
            }
        }
        PolExp::from_terms(v, eps)
    }

    /// `d/dz`, term by term `(P' - λP) e^{-λz}`.
    pub fn derivative(&self) -> PolExp {
        let mut terms: Vec<(Qd, PolyZ)> = self
            .terms
            .iter()
            .map(|(k, p)| {
                let mut d = p.derivative();
                d.add_scaled(p, -Cx::real(*k));
                (*k, d)
            })
            .collect();
        terms.retain(|(_, p)| !p.is_zero());
        PolExp { terms }
    }

    /// `S(z - 2πi)`: each term becomes `e^{2πiλ} P(z-2πi) e^{-λz}`.
    pub fn tau_inverse_shift(&self) -> PolExp {
        let tpi = Cx::two_pi_i();
        PolExp {
            terms: self
                .terms
                .iter()
                .map(|(k, p)| (*k, p.shift(-tpi).scale((tpi.scale(*k)).exp())))
                .collect(),
        }
    }

    /// `S(z + s)` for a complex shift.
    pub fn shift_arg(&self, s: Cx) -> PolExp {
        PolExp {
            terms: self
                .terms
                .iter()
                .map(|(k, p)| (*k, p.shift(s).scale((-s.scale(*k)).exp())))
                .collect(),
        }
    }

    pub fn eval(&self, z: Cx) -> Cx {
        self.terms.iter().fold(Cx::ZERO, |acc, (k, p)| acc + p.eval(z) * (-z.scale(*k)).exp())
    }

    /// Largest coefficientwise distance over keys `<= cutoff` (relative rule).
    pub fn distance(&self, o: &PolExp, cutoff: f64, eps: f64) -> f64 {
        let d = self.sub(o, eps * 1e-6);
        d.terms
            .iter()
            .filter(|(k, _)| within(*k, cutoff))
            .map(|(k, p)| {
                let scale = self
                    .get(*k, eps)
                    .map(|q| q.max_abs())
                    .unwrap_or(0.0)
                    .max(o.get(*k, eps).map(|q| q.max_abs()).unwrap_or(0.0))
                    .max(1.0);
                p.max_abs() / scale
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|(_, p)| p.max_abs()).fold(0.0, f64::max)
    }
}
