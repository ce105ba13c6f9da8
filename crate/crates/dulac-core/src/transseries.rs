//! Truncated formal Dulac series `a z + b + Σ P_λ(z) e^{-λz}`.
//!
//! Group law is composition. A series is trusted modulo `o(e^{-Λz})`
//! where `Λ` is its validity; every operation propagates it.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::{Cx, Prec, Qd};
use crate::polexp::{within, PolExp};
use crate::poly::PolyZ;

#[derive(Clone, Debug, PartialEq)]
pub struct DulacSeries {
    a: Qd,
    b: Cx,
    tail: PolExp,
    validity: f64,
    prec: Prec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynType {
    SuperAttracting,
    SuperRepelling,
    HypAttracting,
    HypRepelling,
    Indifferent,
}

/// Dynamic type plus a flag raised when `Re b` sits within tolerance of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub kind: DynType,
    pub boundary: bool,
}

impl DulacSeries {
    /// Builds a series. Keys must be positive; keys above `validity` are dropped.
    ///
    /// An infinite validity is only kept for affine series; otherwise it is
    /// replaced by the largest key.
    pub fn new(a: Qd, b: Cx, terms: Vec<(Qd, PolyZ)>, validity: f64, prec: Prec) -> Result<DulacSeries> {
        if !(a.hi() > 0.0) || !a.is_finite() {
            return Err(Error::Invalid("multiplier must be a positive real"));
        }
        if !(validity > 0.0) {
            return Err(Error::Invalid("validity must be positive"));
        }
        if terms.iter().any(|(k, _)| !(k.hi() > 0.0) || !k.is_finite()) {
            return Err(Error::Invalid("exponents must be positive"));
        }
        let tail = PolExp::from_terms(terms, prec.eps());
        let validity = if validity.is_infinite() {
            tail.max_key().map_or(f64::INFINITY, |k| k.hi())
        } else {
            validity
        };
        Ok(DulacSeries { a, b, tail: tail.truncate(validity), validity, prec })
    }

    pub(crate) fn from_parts(a: Qd, b: Cx, tail: PolExp, validity: f64, prec: Prec) -> DulacSeries {
        DulacSeries { a, b, tail: tail.truncate(validity), validity, prec }
    }

    pub fn identity(prec: Prec) -> DulacSeries {
        DulacSeries::affine(Qd::ONE, Cx::ZERO, prec)
    }

    /// Exact `a z + b`.
    pub fn affine(a: Qd, b: Cx, prec: Prec) -> DulacSeries {
        DulacSeries { a, b, tail: PolExp::new(), validity: f64::INFINITY, prec }
    }

    /// The deck translation `z + 2πi`.
    pub fn tau(prec: Prec) -> DulacSeries {
        DulacSeries::affine(Qd::ONE, Cx::two_pi_i(), prec)
    }

    pub fn multiplier(&self) -> Qd {
        self.a
    }

    pub fn constant(&self) -> Cx {
        self.b
    }

    pub fn tail(&self) -> &PolExp {
        &self.tail
    }

    pub fn terms(&self) -> &[(Qd, PolyZ)] {
        self.tail.terms()
    }

    pub fn validity(&self) -> f64 {
        self.validity
    }

    pub fn prec(&self) -> Prec {
        self.prec
    }

    pub fn eps(&self) -> f64 {
        self.prec.eps()
    }

    /// Lowers the validity (never raises it) and drops terms beyond it.
    pub fn truncate(&self, validity: f64) -> DulacSeries {
        let v = self.validity.min(validity);
        DulacSeries::from_parts(self.a, self.b, self.tail.truncated(v), v, self.prec)
    }

    pub fn with_prec(mut self, prec: Prec) -> DulacSeries {
        self.prec = prec;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.approx_eq(&DulacSeries::identity(self.prec))
    }

    /// Numeric value of the truncated sum at `z`.
    pub fn eval(&self, z: Cx) -> Cx {
        z.scale(self.a) + self.b + self.tail.eval(z)
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &DulacSeries) -> DulacSeries {
        let prec = self.prec.join(g.prec);
        let eps = prec.eps();
        let cut = g.validity.min(g.a.hi() * self.validity);
        let inner = subst_tail(&self.tail, g.a, g.b, &g.tail, cut, eps);
        let tail = g.tail.scale(Cx::real(self.a)).add(&inner, eps).truncate(cut);
        DulacSeries::from_parts(self.a * g.a, g.b.scale(self.a) + self.b, tail, cut, prec)
    }

    /// Compositional inverse, valid to `Λ/a`.
    pub fn invert(&self) -> DulacSeries {
        let eps = self.eps();
        let ai = self.a.recip();
        let bi = -self.b.scale(ai);
        let cut = self.validity / self.a.hi();
        let Some(lmin) = self.tail.flatness() else {
            return DulacSeries::from_parts(ai, bi, PolExp::new(), cut, self.prec);
        };
        // u = -(1/a) t(g0 + u); each pass fixes one more slice of width δ.
        let delta = lmin.hi() / self.a.hi();
        let mut u = PolExp::new();
        let mut j = 1.0;
        loop {
            let c = cut.min(j * delta);
            u = subst_tail(&self.tail, ai, bi, &u, c, eps).scale(Cx::real(-ai)).truncate(c);
            if j * delta >= cut * (1.0 - 1e-12) {
                break;
            }
            j += 1.0;
        }
        DulacSeries::from_parts(ai, bi, u, cut, self.prec)
    }

    /// `τ ∘ self ∘ τ^{-1}`, computed without compositions.
    pub fn conj_tau(&self) -> DulacSeries {
        let b = self.b + Cx::two_pi_i().scale(Qd::ONE - self.a);
        DulacSeries::from_parts(self.a, b, self.tail.tau_inverse_shift(), self.validity, self.prec)
    }

    /// The variation `f ∘ τ ∘ f^{-1} ∘ τ^{-1}`; multiplier is exactly 1.
    pub fn variation(&self) -> DulacSeries {
        let mut v = self.compose(&self.invert().conj_tau());
        v.a = Qd::ONE;
        v
    }

    /// Support and degree criterion: `a = 1`, integer keys, constant polynomials.
    pub fn is_unramified(&self) -> bool {
        let eps = self.eps();
        if (self.a - Qd::ONE).abs().hi() > eps {
            return false;
        }
        let tol = eps * self.tail.max_abs().max(1.0);
        self.tail.terms().iter().all(|(k, p)| {
            let p = p.clone().chop(tol);
            p.is_zero() || (p.degree() == Some(0) && is_integer(*k, eps))
        })
    }

    pub fn is_mildly_ramified(&self) -> bool {
        self.variation().is_unramified()
    }

    pub fn classify(&self) -> Classification {
        let eps = self.eps();
        let d = (self.a - Qd::ONE).hi();
        if d.abs() > eps {
            let kind = if d > 0.0 { DynType::SuperAttracting } else { DynType::SuperRepelling };
            return Classification { kind, boundary: false };
        }
        let re = self.b.re.hi();
        if re.abs() <= eps {
            Classification { kind: DynType::Indifferent, boundary: true }
        } else if re > 0.0 {
            Classification { kind: DynType::HypAttracting, boundary: false }
        } else {
            Classification { kind: DynType::HypRepelling, boundary: false }
        }
    }

    /// Largest coefficientwise relative difference up to the common validity.
    pub fn residual(&self, o: &DulacSeries) -> f64 {
        let cut = self.validity.min(o.validity);
        let ra = (self.a - o.a).abs().hi() / self.a.hi().abs().max(o.a.hi().abs()).max(1.0);
        let rb = (self.b - o.b).abs_f64() / self.b.abs_f64().max(o.b.abs_f64()).max(1.0);
        let eps = self.prec.join(o.prec).eps();
        ra.max(rb).max(self.tail.distance(&o.tail, cut, eps))
    }

    pub fn approx_eq(&self, o: &DulacSeries) -> bool {
        self.residual(o) <= self.prec.join(o.prec).eps()
    }

    /// Integer power under composition; negative powers go through the inverse.
    pub fn iterate(&self, n: i32) -> DulacSeries {
        let base = if n < 0 { self.invert() } else { self.clone() };
        let mut r = DulacSeries::identity(self.prec);
        for _ in 0..n.unsigned_abs() {
            r = base.compose(&r);
        }
        r
    }
}

pub(crate) fn is_integer(k: Qd, eps: f64) -> bool {
    let r = k.round();
    (k - r).abs().hi() <= eps * k.hi().abs().max(1.0) && r.hi() >= 1.0
}

/// `Σ P_λ(g) e^{-λ g}` with `g = a z + b + t`, keys up to `cut`.
pub(crate) fn subst_tail(tf: &PolExp, a: Qd, b: Cx, t: &PolExp, cut: f64, eps: f64) -> PolExp {
    let Some(lmin) = tf.flatness() else {
        return PolExp::new();
    };
    let base_min = a * lmin;
    let mut powers: Vec<PolExp> = Vec::new();
    powers.push(PolExp::single(Qd::ZERO, PolyZ::constant(Cx::ONE)));
    if !t.is_empty() {
        let pcut = cut - base_min.hi();
        loop {
            let next = powers.last().unwrap().mul(t, pcut, eps);
            if next.is_empty() {
                break;
            }
            powers.push(next);
        }
    }
    let mut out = Vec::new();
    for (lam, p) in tf.terms() {
        let base = a * *lam;
        if !within(base, cut) {
            break;
        }
        let scale = (-b.scale(*lam)).exp();
        let q: Vec<PolyZ> = p.taylor_polys().iter().map(|x| x.affine(a, b)).collect();
        // e^{-λt} coefficients (-λ)^j / j!
        let mut ej = Vec::with_capacity(powers.len());
        let mut c = Qd::ONE;
        for j in 0..powers.len() {
            ej.push(c);
            c = c * (-*lam) / Qd::from_f64((j + 1) as f64);
        }
        for (n, tn) in powers.iter().enumerate() {
            if tn.flatness().is_some_and(|f| !within(base + f, cut)) {
                break;
            }
            let mut r = PolyZ::zero();
            for (m, qm) in q.iter().enumerate().take(n + 1) {
                r.add_scaled(qm, Cx::real(ej[n - m]));
            }
            if r.is_zero() {
                continue;
            }
            let r = r.scale(scale);
            for (k, pk) in tn.terms() {
                let key = base + *k;
                if within(key, cut) {
                    out.push((key, pk.mul(&r)));
                }
            }
        }
    }
    PolExp::from_terms(out, eps)
}
