//! Polynomials in `z` with working-precision complex coefficients.

use alloc::vec;
use alloc::vec::Vec;

use crate::num::{Cx, Qd};

/// Ascending coefficients; the zero polynomial is the empty vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolyZ {
    c: Vec<Cx>,
}

impl PolyZ {
    pub fn zero() -> PolyZ {
        PolyZ { c: Vec::new() }
    }

    pub fn constant(c: Cx) -> PolyZ {
        PolyZ::from_coeffs(vec![c])
    }

    /// `z` itself.
    pub fn z() -> PolyZ {
        PolyZ::from_coeffs(vec![Cx::ZERO, Cx::ONE])
    }

    /// Drops exactly-zero trailing coefficients only; see [`PolyZ::trim`].
    pub fn from_coeffs(mut c: Vec<Cx>) -> PolyZ {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        PolyZ { c }
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Cx {
        self.c.get(k).copied().unwrap_or(Cx::ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|x| x.abs_f64()).fold(0.0, f64::max)
    }

    /// Strips trailing coefficients with `|c| <= eps`.
    pub fn trim(mut self, eps: f64) -> PolyZ {
        while self.c.last().is_some_and(|x| x.abs_f64() <= eps) {
            self.c.pop();
        }
        self
    }

    /// Zeroes every coefficient with `|c| <= eps`, then trims.
    pub fn chop(mut self, eps: f64) -> PolyZ {
        for x in self.c.iter_mut() {
            if x.abs_f64() <= eps {
                *x = Cx::ZERO;
            }
        }
        PolyZ::from_coeffs(self.c)
    }

    pub fn neg(&self) -> PolyZ {
        PolyZ { c: self.c.iter().map(|&x| -x).collect() }
    }

    pub fn scale(&self, s: Cx) -> PolyZ {
        if s.is_zero() {
            return PolyZ::zero();
        }
        PolyZ { c: self.c.iter().map(|&x| x * s).collect() }
    }

    /// `self += s * o`.
    pub fn add_scaled(&mut self, o: &PolyZ, s: Cx) {
        if self.c.len() < o.c.len() {
            self.c.resize(o.c.len(), Cx::ZERO);
        }
        for (x, &y) in self.c.iter_mut().zip(&o.c) {
            *x += y * s;
        }
        let c = core::mem::take(&mut self.c);
        *self = PolyZ::from_coeffs(c);
    }

    pub fn add(&self, o: &PolyZ) -> PolyZ {
        let mut r = self.clone();
        r.add_scaled(o, Cx::ONE);
        r
    }

    pub fn sub(&self, o: &PolyZ) -> PolyZ {
        let mut r = self.clone();
        r.add_scaled(o, -Cx::ONE);
        r
    }

    pub fn mul(&self, o: &PolyZ) -> PolyZ {
        if self.is_zero() || o.is_zero() {
            return PolyZ::zero();
        }
        let mut c = vec![Cx::ZERO; self.c.len() + o.c.len() - 1];
        for (i, &x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in o.c.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        PolyZ::from_coeffs(c)
    }

    pub fn eval(&self, z: Cx) -> Cx {
        self.c.iter().rev().fold(Cx::ZERO, |acc, &x| acc * z + x)
    }

    pub fn derivative(&self) -> PolyZ {
        PolyZ::from_coeffs(
            self.c.iter().enumerate().skip(1).map(|(k, &x)| x.scale(Qd::from_f64(k as f64))).collect(),
        )
    }

    /// Taylor coefficients `P^{(m)}/m!` as polynomials, `m = 0..=deg`.
    pub fn taylor_polys(&self) -> Vec<PolyZ> {
        let mut out = Vec::with_capacity(self.c.len());
        let mut cur = self.clone();
        let mut m = 0usize;
        while !cur.is_zero() {
            out.push(cur.clone());
            m += 1;
            cur = cur.derivative().scale(Cx::real(Qd::ONE / Qd::from_f64(m as f64)));
        }
        out
    }

    /// `P(z + s)`.
    pub fn shift(&self, s: Cx) -> PolyZ {
        if s.is_zero() || self.c.len() <= 1 {
            return self.clone();
        }
        // Horner in the ring of polynomials: P(z+s) = (...(c_n (z+s) + c_{n-1})(z+s) + ...)
        let n = self.c.len();
        let mut r = vec![Cx::ZERO; n];
        for &x in self.c.iter().rev() {
            // r <- r * (z + s) + x
            for k in (1..n).rev() {
                r[k] = r[k - 1] + r[k] * s;
            }
            r[0] = r[0] * s + x;
        }
        PolyZ::from_coeffs(r)
    }

    /// `P(a z + b)` for real `a`.
    pub fn affine(&self, a: Qd, b: Cx) -> PolyZ {
        let p = self.shift(b);
        if a == Qd::ONE {
            return p;
        }
        let mut pw = Qd::ONE;
        let mut c = p.c;
        for x in c.iter_mut() {
            *x = x.scale(pw);
            pw *= a;
        }
        PolyZ::from_coeffs(c)
    }

    /// Maximum coefficientwise distance under the relative rule.
    pub fn distance(&self, o: &PolyZ) -> f64 {
        let n = self.c.len().max(o.c.len());
        (0..n)
            .map(|k| {
                let (u, v) = (self.coeff(k), o.coeff(k));
                (u - v).abs_f64() / 1f64.max(u.abs_f64()).max(v.abs_f64())
            })
            .fold(0.0, f64::max)
    }
}
