//! Germs `F(x) = c_1 x + c_2 x² + …` at the origin, formal fields `a(x) x ∂/∂x`,
//! and the projection `Π` from unramified Dulac series (`x = e^{-z}`).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::{Cx, Prec, Qd};
use crate::poly::PolyZ;
use crate::transseries::DulacSeries;

/// Order used for germs that are exact polynomials.
pub const EXACT: usize = usize::MAX;

/// Truncated power series helpers on `Vec<Cx>` indexed by degree.
pub mod ps {
    use super::*;

    pub fn mul(a: &[Cx], b: &[Cx], n: usize) -> Vec<Cx> {
        let mut r = vec![Cx::ZERO; n + 1];
        for (i, &x) in a.iter().enumerate().take(n + 1) {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(n + 1 - i) {
                r[i + j] += x * y;
            }
        }
        r
    }

    /// `exp(s)` for `s(0) = 0`, via `n e_n = Σ k s_k e_{n-k}`.
    pub fn exp(s: &[Cx], n: usize) -> Vec<Cx> {
        let mut e = vec![Cx::ZERO; n + 1];
        e[0] = Cx::ONE;
        for m in 1..=n {
            let mut acc = Cx::ZERO;
            for k in 1..=m.min(s.len().saturating_sub(1)) {
                acc += s[k].scale(Qd::from_f64(k as f64)) * e[m - k];
            }
            e[m] = acc.scale(Qd::ONE / Qd::from_f64(m as f64));
        }
        e
    }

    /// `log(u)` for `u(0) = 1`, via `u L' = u'`.
    pub fn log1(u: &[Cx], n: usize) -> Vec<Cx> {
        let mut l = vec![Cx::ZERO; n + 1];
        let uc = |k: usize| u.get(k).copied().unwrap_or(Cx::ZERO);
        for m in 1..=n {
            // m l_m = m u_m - Σ_{k=1}^{m-1} k l_k u_{m-k}
            let mut acc = uc(m).scale(Qd::from_f64(m as f64));
            for k in 1..m {
                acc = acc - l[k].scale(Qd::from_f64(k as f64)) * uc(m - k);
            }
            l[m] = acc.scale(Qd::ONE / Qd::from_f64(m as f64));
        }
        l
    }

    /// `f(g(x))` with `g(0) = 0`.
    pub fn compose(f: &[Cx], g: &[Cx], n: usize) -> Vec<Cx> {
        let mut r = vec![Cx::ZERO; n + 1];
        let mut pw = vec![Cx::ZERO; n + 1];
        pw[0] = Cx::ONE;
        for (j, &c) in f.iter().enumerate() {
            if j > 0 {
                pw = mul(&pw, g, n);
            }
            if j > n {
                break;
            }
            if !c.is_zero() {
                for (x, &p) in r.iter_mut().zip(&pw) {
                    *x += c * p;
                }
            }
        }
        r
    }

    pub fn deriv(f: &[Cx]) -> Vec<Cx> {
        f.iter().enumerate().skip(1).map(|(k, &c)| c.scale(Qd::from_f64(k as f64))).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoGerm {
    /// `c[0] = 0`, `c[k]` is the coefficient of `x^k`.
    c: Vec<Cx>,
    order: usize,
    prec: Prec,
}

impl DiffeoGerm {
    /// `coeffs = [c_1, c_2, …]`; `order` is the truncation degree.
    pub fn new(coeffs: Vec<Cx>, order: usize, prec: Prec) -> Result<DiffeoGerm> {
        if coeffs.first().is_none_or(|c| c.abs_f64() <= prec.eps()) {
            return Err(Error::Invalid("linear coefficient must be nonzero"));
        }
        if order == 0 {
            return Err(Error::Invalid("order must be at least 1"));
        }
        let mut c = Vec::with_capacity(coeffs.len() + 1);
        c.push(Cx::ZERO);
        c.extend(coeffs);
        Ok(DiffeoGerm::from_raw(c, order, prec))
    }

    fn from_raw(mut c: Vec<Cx>, order: usize, prec: Prec) -> DiffeoGerm {
        if order != EXACT {
            c.resize(order + 1, Cx::ZERO);
        } else {
            while c.len() > 2 && c.last().is_some_and(|x| x.is_zero()) {
                c.pop();
            }
        }
        DiffeoGerm { c, order, prec }
    }

    pub fn identity(order: usize, prec: Prec) -> DiffeoGerm {
        DiffeoGerm::linear(Cx::ONE, order, prec)
    }

    pub fn linear(c1: Cx, order: usize, prec: Prec) -> DiffeoGerm {
        DiffeoGerm::from_raw(vec![Cx::ZERO, c1], order, prec)
    }

    /// Coefficients `c_1..` (trailing zeros included up to the order).
    pub fn coeffs(&self) -> &[Cx] {
        &self.c[1..]
    }

    pub fn coeff(&self, k: usize) -> Cx {
        self.c.get(k).copied().unwrap_or(Cx::ZERO)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn prec(&self) -> Prec {
        self.prec
    }

    pub fn with_order(&self, order: usize) -> DiffeoGerm {
        let n = self.order.min(order);
        let mut c = self.c.clone();
        if n != EXACT {
            c.truncate(n + 1);
        }
        DiffeoGerm::from_raw(c, n, self.prec)
    }

    /// Degree of the stored polynomial part.
    fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn is_exact(&self) -> bool {
        self.order == EXACT
    }

    /// Effective working degree: the order, or the polynomial degree for exact germs.
    pub fn work_order(&self) -> usize {
        if self.is_exact() { self.degree() } else { self.order }
    }

    pub fn eval(&self, x: Cx) -> Cx {
        self.c.iter().rev().fold(Cx::ZERO, |acc, &c| acc * x + c)
    }

    pub fn compose(&self, g: &DiffeoGerm) -> DiffeoGerm {
        let n = self.order.min(g.order);
        let prec = self.prec.join(g.prec);
        let work = if n == EXACT { self.degree() * g.degree() } else { n };
        DiffeoGerm::from_raw(ps::compose(&self.c, &g.c, work), n, prec)
    }

    /// Compositional inverse by Newton-free fixed point `G = (x - N(G)) / c_1`.
    pub fn invert(&self) -> DiffeoGerm {
        let c1 = self.c[1];
        if self.degree() <= 1 {
            return DiffeoGerm::from_raw(vec![Cx::ZERO, c1.recip()], self.order, self.prec);
        }
        let n = self.work_order();
        let mut nonlin = self.c.clone();
        nonlin[1] = Cx::ZERO;
        let inv1 = c1.recip();
        let mut g = vec![Cx::ZERO, inv1];
        for _ in 0..n {
            let t = ps::compose(&nonlin, &g, n);
            let mut next = vec![Cx::ZERO; n + 1];
            next[1] = inv1;
            for k in 2..=n {
                next[k] = -(t[k] * inv1);
            }
            g = next;
        }
        DiffeoGerm::from_raw(g, n, self.prec)
    }

    pub fn iterate(&self, m: i32) -> DiffeoGerm {
        let base = if m < 0 { self.invert() } else { self.clone() };
        let mut r = DiffeoGerm::identity(base.order, self.prec);
        for _ in 0..m.unsigned_abs() {
            r = base.compose(&r);
        }
        r
    }

    /// Relative coefficient distance up to the common order.
    pub fn residual(&self, o: &DiffeoGerm) -> f64 {
        let n = if self.is_exact() && o.is_exact() {
            self.degree().max(o.degree())
        } else {
            self.order.min(o.order)
        };
        (1..=n)
            .map(|k| {
                let (u, v) = (self.coeff(k), o.coeff(k));
                (u - v).abs_f64() / 1f64.max(u.abs_f64()).max(v.abs_f64())
            })
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, o: &DiffeoGerm) -> bool {
        self.residual(o) <= self.prec.join(o.prec).eps()
    }

    pub fn is_tangent_to_identity(&self) -> bool {
        (self.c[1] - Cx::ONE).abs_f64() <= self.prec.eps()
    }

    /// Least `k ≥ 1` with `c_{k+1} ≠ 0`; `None` when identity to the order.
    pub fn tangency_order(&self) -> Option<usize> {
        let eps = self.prec.eps();
        (2..=self.work_order()).find(|&j| self.coeff(j).abs_f64() > eps).map(|j| j - 1)
    }
}

/// `a(x) x d/dx` with `a = a_0 + a_1 x + …`, known through `x^{order}` in the field.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalField {
    a: Vec<Cx>,
    order: usize,
    prec: Prec,
}

impl FormalField {
    pub fn new(a: Vec<Cx>, order: usize, prec: Prec) -> FormalField {
        let mut a = a;
        a.resize(order, Cx::ZERO);
        FormalField { a, order, prec }
    }

    /// `2πi t x^k / (1 + μ x^k) x∂x`.
    pub fn rational(k: usize, t: Cx, mu: Cx, order: usize, prec: Prec) -> FormalField {
        let mut a = vec![Cx::ZERO; order];
        let mut c = Cx::two_pi_i() * t;
        let mut j = k;
        while j < order {
            a[j] = c;
            c = -(c * mu);
            j += k;
        }
        FormalField { a, order, prec }
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.a
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn scale(&self, s: Cx) -> FormalField {
        FormalField { a: self.a.iter().map(|&x| x * s).collect(), order: self.order, prec: self.prec }
    }

    /// Coefficients of `v(x) = x a(x)` indexed by degree.
    fn v(&self) -> Vec<Cx> {
        let mut v = vec![Cx::ZERO; self.order + 1];
        for (k, &x) in self.a.iter().enumerate() {
            v[k + 1] = x;
        }
        v
    }

    /// Time-one flow by the Lie series `x + Vx + V²x/2 + …`.
    pub fn exp_field(&self) -> DiffeoGerm {
        let n = self.order;
        let v = self.v();
        let eps = self.prec.eps();
        let mut sum = vec![Cx::ZERO; n + 1];
        sum[1] = Cx::ONE;
        let mut term = v.clone();
        let mut m = 1.0;
        for _ in 0..4000 {
            let size = term.iter().map(|x| x.abs_f64()).fold(0.0, f64::max);
            if size == 0.0 || (m > 8.0 && size < eps * 1e-20) {
                break;
            }
            for (s, &t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
            m += 1.0;
            let d = ps::deriv(&term);
            term = ps::mul(&v, &d, n);
            term.truncate(n + 1);
            let inv = Qd::ONE / Qd::from_f64(m);
            for t in term.iter_mut() {
                *t = t.scale(inv);
            }
        }
        DiffeoGerm::from_raw(sum, n, self.prec)
    }

    pub fn residual(&self, o: &FormalField) -> f64 {
        let n = self.order.min(o.order);
        (0..n)
            .map(|k| {
                let (u, v) = (self.a[k], o.a[k]);
                (u - v).abs_f64() / 1f64.max(u.abs_f64()).max(v.abs_f64())
            })
            .fold(0.0, f64::max)
    }

    /// Least `j` with `a_j ≠ 0`.
    pub fn flatness(&self) -> Option<usize> {
        let eps = self.prec.eps();
        self.a.iter().position(|x| x.abs_f64() > eps)
    }
}

/// The formal field `V` with `exp_field(V) = F` through the order of `F`.
pub fn infinitesimal_generator(f: &DiffeoGerm) -> Result<FormalField> {
    if !f.is_tangent_to_identity() || f.tangency_order().is_none() {
        return Err(Error::NotTangentToIdentity);
    }
    let n = f.work_order();
    let k = f.tangency_order().unwrap();
    let mut a = vec![Cx::ZERO; n];
    let target: Vec<Cx> = (0..=n).map(|j| f.coeff(j)).collect();
    // each pass fixes k more coefficients
    for _ in 0..=n / k.max(1) + 1 {
        let e = FormalField { a: a.clone(), order: n, prec: f.prec }.exp_field();
        for j in 2..=n {
            a[j - 1] += target[j] - e.coeff(j);
        }
    }
    Ok(FormalField { a, order: n, prec: f.prec })
}

/// `Π(f)(x) = e^{-f(z)}` at `x = e^{-z}` for unramified `f`.
pub fn project_pi(f: &DulacSeries) -> Result<DiffeoGerm> {
    if !f.is_unramified() {
        return Err(Error::NotUnramified);
    }
    let prec = f.prec();
    let lam = (-f.constant()).exp();
    if f.terms().is_empty() && f.validity().is_infinite() {
        return Ok(DiffeoGerm::linear(lam, EXACT, prec));
    }
    let n = libm::floor(f.validity() + 1e-9) as usize + 1;
    let mut s = vec![Cx::ZERO; n];
    for (k, p) in f.terms() {
        let j = k.round().hi() as usize;
        if j < n {
            s[j] = -p.coeff(0);
        }
    }
    let e = ps::exp(&s, n - 1);
    let mut c = vec![Cx::ZERO; n + 1];
    for j in 0..n {
        c[j + 1] = e[j] * lam;
    }
    Ok(DiffeoGerm::from_raw(c, n, prec))
}

/// Unramified lift with `b = -Log c_1 - 2πi·branch`.
pub fn lift_pi(f: &DiffeoGerm, branch: i64) -> DulacSeries {
    let prec = f.prec();
    let c1 = f.coeff(1);
    let b = -c1.ln() - Cx::two_pi_i().scale(Qd::from_i64(branch));
    let n = f.work_order();
    if n <= 1 {
        let validity = if f.is_exact() { f64::INFINITY } else { 0.5 };
        let s = DulacSeries::affine(Qd::ONE, b, prec);
        return if validity.is_finite() { s.truncate(validity) } else { s };
    }
    let inv = c1.recip();
    let u: Vec<Cx> = (0..n).map(|j| f.coeff(j + 1) * inv).collect();
    let l = ps::log1(&u, n - 1);
    let terms = (1..n).map(|j| (Qd::from_f64(j as f64), PolyZ::constant(-l[j]))).collect();
    DulacSeries::new(Qd::ONE, b, terms, (n - 1) as f64, prec).expect("valid lift")
}

/// `(Π var f, Π var f^{-1})` for mildly ramified `f`.
pub fn variation_pair(f: &DulacSeries) -> Result<(DiffeoGerm, DiffeoGerm)> {
    let g = f.variation();
    let h = f.invert().variation();
    if !g.is_unramified() || !h.is_unramified() {
        return Err(Error::NotMildlyRamified);
    }
    Ok((project_pi(&g)?, project_pi(&h)?))
}

#[derive(Clone, Debug, PartialEq)]
pub enum GhVerdict {
    /// Leading term `c x^d` of `[H,G] - id` with `[H,G] = H^{-1}∘G^{-1}∘H∘G`.
    NonCommuting { degree: usize, coefficient: Cx },
    EmbeddedFlow { k: usize, nu: Cx },
    /// `k = 0` when both germs are the identity to the order.
    IdenticalVariations { k: usize },
}

/// The verdict only speaks about the formal germs through `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct GhReport {
    pub verdict: GhVerdict,
    pub order: usize,
    pub formal_only: bool,
    pub commutator_residual: f64,
}

/// Leading non-identity term of `F`, if any.
fn leading(f: &DiffeoGerm, eps: f64) -> Option<(usize, Cx)> {
    (2..=f.work_order()).map(|j| (j, f.coeff(j))).find(|(_, c)| c.abs_f64() > eps)
}

pub fn gh_dichotomy(g: &DiffeoGerm, h: &DiffeoGerm) -> Result<GhReport> {
    if !g.is_tangent_to_identity() || !h.is_tangent_to_identity() {
        return Err(Error::NotTangentToIdentity);
    }
    let n = g.work_order().min(h.work_order());
    let (g, h) = (g.with_order(n), h.with_order(n));
    let prec = g.prec().join(h.prec());
    let eps = prec.eps();
    let comm = h.invert().compose(&g.invert()).compose(&h).compose(&g);
    let id = DiffeoGerm::identity(n, prec);
    let res = comm.residual(&id);
    let report = |verdict| GhReport { verdict, order: n, formal_only: true, commutator_residual: res };
    if let Some((degree, coefficient)) = leading(&comm, eps * 1e6) {
        return Ok(report(GhVerdict::NonCommuting { degree, coefficient }));
    }
    if g.residual(&h) <= eps * 1e6 {
        let k = g.tangency_order().unwrap_or(0);
        return Ok(report(GhVerdict::IdenticalVariations { k }));
    }
    let (Some(k), Some(_)) = (g.tangency_order(), h.tangency_order()) else {
        // one side is the identity: it commutes but carries no generator
        return Ok(report(GhVerdict::NonCommuting { degree: 0, coefficient: Cx::ZERO }));
    };
    let vg = infinitesimal_generator(&g)?;
    let vh = infinitesimal_generator(&h)?;
    let t = vh.coeffs()[k] / vg.coeffs()[k];
    let mismatch = vh.residual(&vg.scale(t));
    if mismatch <= eps * 1e6 {
        Ok(report(GhVerdict::EmbeddedFlow { k, nu: -t.recip() }))
    } else {
        let j = (0..n)
            .find(|&j| (vh.coeffs()[j] - vg.coeffs()[j] * t).abs_f64() > eps * 1e6)
            .unwrap_or(0);
        Ok(report(GhVerdict::NonCommuting { degree: j + 1, coefficient: vh.coeffs()[j] - vg.coeffs()[j] * t }))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FatouCheck {
    pub f: Cx,
    pub nu: Cx,
    /// `|Fatou(f(z)) + Fatou(z)/ν|`, relative.
    pub residual: f64,
    /// `|Fatou(f(z)) - Fatou(z)/ν|`, relative.
    pub residual_plus: f64,
    pub passed: bool,
}

/// `-(e^{kz} + c z) / (2πi k)` with `c = k/(1-ν)`.
pub fn fatou_coordinate(k: u32, nu: Cx, z: Cx) -> Cx {
    let kq = Qd::from_f64(k as f64);
    let c = Cx::real(kq) / (Cx::ONE - nu);
    -((z.scale(kq)).exp() + c * z) / Cx::two_pi_i().scale(kq)
}

/// Solves `e^{kf} + c f = (e^{kz} + c z)/ν`, `c = k/(1-ν)`, `ν = e^{-2πikβ}`, by damped Newton.
pub fn fatou_model_map(k: u32, beta: f64, z: Cx, prec: Prec) -> Result<FatouCheck> {
    let kq = Qd::from_f64(k as f64);
    let beta = Qd::from_f64(beta);
    let nu = (-Cx::two_pi_i().scale(kq * beta)).exp();
    if (nu - Cx::ONE).abs_f64() <= prec.eps() {
        return Err(Error::PreconditionFailed("nu must differ from 1"));
    }
    let c = Cx::real(kq) / (Cx::ONE - nu);
    let rhs = ((z.scale(kq)).exp() + c * z) / nu;
    let func = |f: Cx| (f.scale(kq)).exp() + c * f - rhs;
    let tol = libm::pow(10.0, -(prec.digits() as f64) / 2.0);
    let mut f = z + Cx::two_pi_i().scale(beta);
    let mut fv = func(f);
    let scale = rhs.abs_f64().max(1.0);
    let mut converged = false;
    for _ in 0..200 {
        let d = (f.scale(kq)).exp().scale(kq) + c;
        let step = fv / d;
        let mut t = Qd::ONE;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = f - step.scale(t);
            let cv = func(cand);
            if cv.abs_f64() < fv.abs_f64() || cv.abs_f64() <= scale * 1e-60 {
                f = cand;
                fv = cv;
                accepted = true;
                break;
            }
            t = t.mul_pwr2(0.5);
        }
        let small = step.abs_f64() * t.hi() <= tol * f.abs_f64().max(1.0);
        if small || fv.abs_f64() <= scale * 1e-60 {
            converged = true;
            break;
        }
        if !accepted {
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence);
    }
    let wz = fatou_coordinate(k, nu, z);
    let wf = fatou_coordinate(k, nu, f);
    let target = -(wz / nu);
    let denom = wf.abs_f64().max(1.0);
    let residual = (wf - target).abs_f64() / denom;
    let residual_plus = (wf - wz / nu).abs_f64() / denom;
    Ok(FatouCheck { f, nu, residual, residual_plus, passed: residual <= 1e-8 })
}
