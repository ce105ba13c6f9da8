//! Nilpotent derivations `Σ P_λ(z) e^{-λz} ∂` of the Dulac ring.
//!
//! Conventions, all as maps:
//! * `exp_derivation(X)` is the time-one flow, so `h ∘ Exp(X) = e^X h`.
//! * `pullback(X, g)` is `X∘g / g'`, and `Exp(pullback(X, g)) = g^{-1} ∘ Exp(X) ∘ g`.
//! * `lvar(X) = log(var(Exp X))` with `var(f) = f ∘ τ ∘ f^{-1} ∘ τ^{-1}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::{Cx, Prec, Qd};
use crate::polexp::{within, PolExp};
use crate::poly::PolyZ;
use crate::transseries::{is_integer, subst_tail, DulacSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct NilpotentDerivation {
    tail: PolExp,
    validity: f64,
    prec: Prec,
}

impl NilpotentDerivation {
    pub fn new(terms: Vec<(Qd, PolyZ)>, validity: f64, prec: Prec) -> Result<NilpotentDerivation> {
        if !(validity > 0.0) || validity.is_infinite() {
            return Err(Error::Invalid("validity must be positive and finite"));
        }
        if terms.iter().any(|(k, _)| !(k.hi() > 0.0) || !k.is_finite()) {
            return Err(Error::Invalid("exponents must be positive"));
        }
        Ok(NilpotentDerivation::from_parts(PolExp::from_terms(terms, prec.eps()), validity, prec))
    }

    pub fn zero(validity: f64, prec: Prec) -> NilpotentDerivation {
        NilpotentDerivation { tail: PolExp::new(), validity, prec }
    }

    pub(crate) fn from_parts(tail: PolExp, validity: f64, prec: Prec) -> NilpotentDerivation {
        NilpotentDerivation { tail: tail.truncate(validity), validity, prec }
    }

    /// Single term `P e^{-λz} ∂`.
    pub fn monomial(lambda: Qd, p: PolyZ, validity: f64, prec: Prec) -> NilpotentDerivation {
        NilpotentDerivation::from_parts(PolExp::single(lambda, p), validity, prec)
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

    pub fn coeff(&self, lambda: f64) -> PolyZ {
        self.tail.get(Qd::from_f64(lambda), 1e-9).cloned().unwrap_or_default()
    }

    pub fn flatness(&self) -> Option<Qd> {
        self.tail.flatness()
    }

    pub fn truncate(&self, validity: f64) -> NilpotentDerivation {
        let v = self.validity.min(validity);
        NilpotentDerivation::from_parts(self.tail.truncated(v), v, self.prec)
    }

    /// Zero up to the relative tolerance.
    pub fn is_zero(&self) -> bool {
        self.tail.max_abs() <= self.eps()
    }

    pub fn add(&self, o: &NilpotentDerivation) -> NilpotentDerivation {
        let prec = self.prec.join(o.prec);
        let v = self.validity.min(o.validity);
        NilpotentDerivation::from_parts(self.tail.add(&o.tail, prec.eps()), v, prec)
    }

    pub fn sub(&self, o: &NilpotentDerivation) -> NilpotentDerivation {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> NilpotentDerivation {
        self.scale(-Cx::ONE)
    }

    pub fn scale(&self, s: Cx) -> NilpotentDerivation {
        NilpotentDerivation { tail: self.tail.scale(s), validity: self.validity, prec: self.prec }
    }

    pub fn residual(&self, o: &NilpotentDerivation) -> f64 {
        let eps = self.prec.join(o.prec).eps();
        self.tail.distance(&o.tail, self.validity.min(o.validity), eps)
    }

    pub fn approx_eq(&self, o: &NilpotentDerivation) -> bool {
        self.residual(o) <= self.prec.join(o.prec).eps()
    }

    /// Integer support with constant coefficients.
    pub fn is_unramified(&self) -> bool {
        let eps = self.eps();
        let tol = eps * self.tail.max_abs().max(1.0);
        self.tail.terms().iter().all(|(k, p)| {
            let p = p.clone().chop(tol);
            p.is_zero() || (p.degree() == Some(0) && is_integer(*k, eps))
        })
    }

    /// `X h = c h'` for a function given by its pol-exp expansion.
    pub fn apply(&self, h: &PolExp, cut: f64) -> PolExp {
        self.tail.mul(&h.derivative(), cut, self.eps())
    }

    /// Time-one flow `z + Xz + X²z/2 + …`.
    pub fn exp_derivation(&self) -> DulacSeries {
        let cut = self.validity;
        let mut sum = PolExp::new();
        let mut term = self.tail.clone();
        let mut n = 1.0;
        while !term.is_empty() {
            sum = sum.add(&term, self.eps());
            n += 1.0;
            term = self.apply(&term, cut).scale(Cx::real(Qd::ONE / Qd::from_f64(n)));
        }
        DulacSeries::from_parts(Qd::ONE, Cx::ZERO, sum, cut, self.prec)
    }

    /// `e^{2πiλ} P(z-2πi)` termwise.
    pub fn conj_tau(&self) -> NilpotentDerivation {
        NilpotentDerivation { tail: self.tail.tau_inverse_shift(), validity: self.validity, prec: self.prec }
    }

    /// `log(var(Exp X))` by the BCH series of `Exp(X) ∘ Exp(-X^τ)`.
    pub fn lvar(&self) -> NilpotentDerivation {
        bch(&self.conj_tau().neg(), self)
    }

    /// `X∘g / g'`.
    pub fn pullback(&self, g: &DulacSeries) -> NilpotentDerivation {
        let prec = self.prec.join(g.prec());
        let eps = prec.eps();
        let lmin = self.flatness().map_or(0.0, |q| q.hi());
        let cut = (g.multiplier().hi() * self.validity).min(g.validity() + lmin);
        let top = subst_tail(&self.tail, g.multiplier(), g.constant(), g.tail(), cut, eps);
        let ai = g.multiplier().recip();
        // 1/g' = (1/a) Σ (-t'/a)^n
        let d = g.tail().derivative().scale(Cx::real(-ai));
        let rcut = cut - lmin;
        let mut inv = PolExp::single(Qd::ZERO, PolyZ::constant(Cx::ONE));
        let mut pw = inv.clone();
        while !d.is_empty() {
            pw = pw.mul(&d, rcut, eps);
            if pw.is_empty() {
                break;
            }
            inv = inv.add(&pw, eps);
        }
        let tail = top.mul(&inv, cut, eps).scale(Cx::real(ai));
        NilpotentDerivation::from_parts(tail, cut, prec)
    }
}

/// `[X, Y]` with `[P e^{-λz}∂, Q e^{-μz}∂] = (P(Q'-μQ) - (P'-λP)Q) e^{-(λ+μ)z}∂`.
pub fn bracket(x: &NilpotentDerivation, y: &NilpotentDerivation) -> NilpotentDerivation {
    let prec = x.prec.join(y.prec);
    let eps = prec.eps();
    let cut = x.validity.min(y.validity);
    let dx = x.tail.derivative();
    let dy = y.tail.derivative();
    let t = x.tail.mul(&dy, cut, eps).sub(&dx.mul(&y.tail, cut, eps), eps);
    NilpotentDerivation::from_parts(t, cut, prec)
}

/// `log(Exp f)` for `f = z + …` with `a = 1`, `b = 0`.
pub fn log_series(f: &DulacSeries) -> Result<NilpotentDerivation> {
    let eps = f.eps();
    if (f.multiplier() - Qd::ONE).abs().hi() > eps || f.constant().abs_f64() > eps {
        return Err(Error::NotTangent);
    }
    let t = NilpotentDerivation::from_parts(f.tail().clone(), f.validity(), f.prec());
    let Some(lmin) = t.flatness() else {
        return Ok(t);
    };
    let rounds = libm::ceil(f.validity() / lmin.hi()) as usize + 1;
    let mut x = t.clone();
    for _ in 0..rounds {
        let e = x.exp_derivation();
        let extra = NilpotentDerivation::from_parts(e.tail().clone(), e.validity(), e.prec()).sub(&x);
        x = t.sub(&extra);
    }
    Ok(x)
}

/// Bernoulli numbers `B_0..=B_n` in working precision.
fn bernoulli(n: usize) -> Vec<Qd> {
    let mut b = vec![Qd::ZERO; n + 1];
    b[0] = Qd::ONE;
    for m in 1..=n {
        let mut s = Qd::ZERO;
        let mut binom = Qd::ONE; // C(m+1, k)
        for (k, bk) in b.iter().enumerate().take(m) {
            s += binom * *bk;
            binom = binom * Qd::from_f64((m + 1 - k) as f64) / Qd::from_f64((k + 1) as f64);
        }
        b[m] = -s / Qd::from_f64((m + 1) as f64);
    }
    b
}

/// `log(e^A e^B)`, i.e. the generator of `Exp(B) ∘ Exp(A)`.
pub fn bch(a: &NilpotentDerivation, b: &NilpotentDerivation) -> NilpotentDerivation {
    let prec = a.prec.join(b.prec);
    let cut = a.validity.min(b.validity);
    let s = a.add(b).truncate(cut);
    let lmin = match (a.flatness(), b.flatness()) {
        (Some(x), Some(y)) => x.min(y).hi(),
        (Some(x), None) | (None, Some(x)) => x.hi(),
        (None, None) => return NilpotentDerivation::zero(cut, prec),
    };
    let nmax = libm::floor(cut / lmin * (1.0 + 1e-12)) as usize;
    let half_diff = a.sub(b).scale(Cx::real(Qd::from_f64(0.5)));
    let bern = bernoulli(nmax + 1);
    let mut fact = Qd::ONE;
    let mut kcoef = vec![Qd::ZERO; nmax + 2]; // B_{2p}/(2p)!
    for (m, bm) in bern.iter().enumerate().skip(1) {
        fact = fact * Qd::from_f64(m as f64);
        if m % 2 == 0 {
            kcoef[m] = *bm / fact;
        }
    }
    // z[n] = Z_n; w[j][m] = Σ_{k_1+…+k_j=m} [Z_{k_1},[…,[Z_{k_j}, A+B]]]
    let zero = NilpotentDerivation::zero(cut, prec);
    let size = nmax + 1;
    let mut w = vec![vec![zero.clone(); size]; size];
    w[0][0] = s.clone();
    let mut z = vec![zero.clone(), s.clone()];
    let mut total = s;
    for n in 1..nmax {
        for j in 1..=n {
            let mut acc = zero.clone();
            for k in 1..=n + 1 - j {
                let rest = &w[j - 1][n - k];
                if !rest.tail.is_empty() && !z[k].tail.is_empty() {
                    acc = acc.add(&bracket(&z[k], rest));
                }
            }
            w[j][n] = acc;
        }
        let mut next = bracket(&half_diff, &z[n]);
        for p in 1..=n / 2 {
            if !w[2 * p][n].tail.is_empty() {
                next = next.add(&w[2 * p][n].scale(Cx::real(kcoef[2 * p])));
            }
        }
        let next = next.scale(Cx::real(Qd::ONE / Qd::from_f64((n + 1) as f64)));
        total = total.add(&next);
        z.push(next);
    }
    total
}

/// `P(z) - P(z - 2πi)`.
pub fn delta(p: &PolyZ) -> PolyZ {
    p.sub(&p.shift(-Cx::two_pi_i()))
}

/// `P(z) - e^{2πiλ} P(z - 2πi)`.
pub fn delta_twisted(p: &PolyZ, lambda: Qd) -> PolyZ {
    let w = Cx::two_pi_i().scale(lambda).exp();
    p.sub(&p.shift(-Cx::two_pi_i()).scale(w))
}

/// `P_k = z(z+2πi)…(z+2πi(k-1)) / (2πi)^k`.
pub fn basis_poly(k: usize) -> PolyZ {
    let tpi = Cx::two_pi_i();
    let inv = tpi.recip();
    let mut p = PolyZ::constant(Cx::ONE);
    for j in 0..k {
        let lin = PolyZ::from_coeffs(vec![tpi.scale(Qd::from_f64(j as f64)), Cx::ONE]);
        p = p.mul(&lin).scale(inv);
    }
    p
}

/// Solves `Δ^λ P = r`; for integer λ the constant term of `P` is `c0`.
pub fn solve_delta(r: &PolyZ, lambda: Qd, c0: Cx, eps: f64) -> PolyZ {
    let d = match r.degree() {
        Some(d) => d,
        None => return if is_integer(lambda, eps) { PolyZ::constant(c0) } else { PolyZ::zero() },
    };
    let mtpi = -Cx::two_pi_i();
    // binom[m][i] (-2πi)^{m-i}
    let n = d + 2;
    let mut pw = vec![Cx::ONE; n + 1];
    for i in 1..=n {
        pw[i] = pw[i - 1] * mtpi;
    }
    let binom = |m: usize, i: usize| -> Qd {
        let mut c = Qd::ONE;
        for t in 0..i {
            c = c * Qd::from_f64((m - t) as f64) / Qd::from_f64((t + 1) as f64);
        }
        c
    };
    if is_integer(lambda, eps) {
        // coefficient of z^{m-1} in ΔP is -Σ_{m'≥m} p_{m'} C(m', m-1)(-2πi)^{m'-m+1}
        let mut p = vec![Cx::ZERO; d + 2];
        for m in (1..=d + 1).rev() {
            let mut s = r.coeff(m - 1);
            for (mp, &pm) in p.iter().enumerate().skip(m + 1) {
                s = s + pm * pw[mp - m + 1] * Cx::real(binom(mp, m - 1));
            }
            let diag = -(pw[1] * Cx::real(Qd::from_f64(m as f64)));
            p[m] = s / diag;
        }
        p[0] = c0;
        PolyZ::from_coeffs(p)
    } else {
        let w = Cx::two_pi_i().scale(lambda).exp();
        let diag = Cx::ONE - w;
        let mut p = vec![Cx::ZERO; d + 1];
        for m in (0..=d).rev() {
            let mut s = r.coeff(m);
            for (mp, &pm) in p.iter().enumerate().skip(m + 1) {
                s = s + w * pm * pw[mp - m] * Cx::real(binom(mp, m));
            }
            p[m] = s / diag;
        }
        PolyZ::from_coeffs(p)
    }
}

/// Free constants of `lvar^{-1}` at integer exponents; unspecified ones are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstantChoice {
    values: Vec<(Qd, Cx)>,
}

impl ConstantChoice {
    pub fn new(values: Vec<(Qd, Cx)>) -> ConstantChoice {
        ConstantChoice { values }
    }

    /// Reads the constants at integer exponents of `x`.
    pub fn from_derivation(x: &NilpotentDerivation) -> ConstantChoice {
        let eps = x.eps();
        ConstantChoice {
            values: x
                .terms()
                .iter()
                .filter(|(k, _)| is_integer(*k, eps))
                .map(|(k, p)| (*k, p.coeff(0)))
                .collect(),
        }
    }

    pub fn get(&self, lambda: Qd) -> Cx {
        self.values
            .iter()
            .find(|(k, _)| (*k - lambda).abs().hi() < 1e-9)
            .map_or(Cx::ZERO, |(_, c)| *c)
    }

    pub fn is_default(&self) -> bool {
        self.values.iter().all(|(_, c)| c.is_zero())
    }
}

/// `X` with `lvar(X) = Z`, integer-exponent constants fixed by `section`.
pub fn lvar_inverse(z: &NilpotentDerivation, section: &ConstantChoice) -> Result<NilpotentDerivation> {
    let eps = z.eps();
    let cut = z.validity;
    let Some(lmin) = z.flatness() else {
        return Ok(fix_constants(&NilpotentDerivation::zero(cut, z.prec), section));
    };
    let mut x = NilpotentDerivation::zero(cut, z.prec);
    let rounds = libm::ceil(cut / lmin.hi()) as usize + 2;
    for _ in 0..rounds {
        let r = z.sub(&x.lvar());
        let scale = z.tail.max_abs().max(1.0);
        let r = NilpotentDerivation::from_parts(r.tail.clone().chop(eps * 1e-3 * scale), cut, z.prec);
        if r.tail.is_empty() {
            break;
        }
        let corr: Vec<(Qd, PolyZ)> = r
            .terms()
            .iter()
            .map(|(k, p)| (*k, solve_delta(p, *k, Cx::ZERO, eps)))
            .collect();
        x = x.add(&NilpotentDerivation::from_parts(PolExp::from_terms(corr, eps), cut, z.prec));
        x = fix_constants(&x, section);
    }
    Ok(fix_constants(&x, section))
}

fn fix_constants(x: &NilpotentDerivation, section: &ConstantChoice) -> NilpotentDerivation {
    let eps = x.eps();
    let mut terms: Vec<(Qd, PolyZ)> = x.terms().to_vec();
    for (k, p) in terms.iter_mut() {
        if is_integer(*k, eps) {
            let mut c = p.coeffs().to_vec();
            if c.is_empty() {
                c.push(Cx::ZERO);
            }
            c[0] = section.get(*k);
            *p = PolyZ::from_coeffs(c);
        }
    }
    // section constants at exponents the solution does not reach yet
    for (k, c) in &section.values {
        let fresh = is_integer(*k, eps) && within(*k, x.validity) && !terms.iter().any(|(t, _)| (*t - *k).abs().hi() < 1e-9);
        if fresh && !c.is_zero() {
            terms.push((*k, PolyZ::constant(*c)));
        }
    }
    NilpotentDerivation::from_parts(PolExp::from_terms(terms, eps), x.validity, x.prec)
}

/// `-2πi e^{-kz}/(1+μe^{-kz}) ∂` expanded to `validity`.
pub fn residue_model(k: u32, mu: Cx, validity: f64, prec: Prec) -> NilpotentDerivation {
    let mut terms = Vec::new();
    let mut c = -Cx::two_pi_i();
    let mut n = 1u32;
    while within(Qd::from_f64((n * k) as f64), validity) {
        terms.push((Qd::from_f64((n * k) as f64), PolyZ::constant(c)));
        c = -(c * mu);
        n += 1;
    }
    NilpotentDerivation::from_parts(PolExp::from_terms(terms, prec.eps()), validity, prec)
}

#[derive(Clone, Debug)]
pub struct UnramifiedNormalForm {
    /// `g` with `pullback(Z, g)` equal to the model up to `o(e^{-3kz})`.
    pub conjugator: DulacSeries,
    pub k: u32,
    pub mu: Cx,
    /// `pullback(Z, g)` minus the expanded model.
    pub remainder: NilpotentDerivation,
    pub reduced: NilpotentDerivation,
}

fn leading_order(z: &NilpotentDerivation) -> Option<(Qd, Cx)> {
    let m = z.tail.max_abs();
    z.terms().iter().find(|(_, p)| p.max_abs() > z.eps() * m.max(1.0)).map(|(k, p)| (*k, p.coeff(0)))
}

pub fn normal_form_unramified(z: &NilpotentDerivation) -> Result<UnramifiedNormalForm> {
    let eps = z.eps();
    if !z.is_unramified() {
        return Err(Error::PreconditionFailed("derivation is not unramified"));
    }
    let Some((kq, ck)) = leading_order(z) else {
        return Err(Error::ZeroDerivation);
    };
    let k = kq.round().hi() as u32;
    let kf = Qd::from_f64(k as f64);
    let tpi = Cx::two_pi_i();
    let shift = -((-tpi) / ck).ln().scale(kf.recip());
    let mut g = DulacSeries::affine(Qd::ONE, shift, z.prec);
    let mut cur = z.pullback(&g);
    let mut mu = Cx::ZERO;
    for j in 1..=2 * k {
        let key = (k + j) as f64;
        if !within(Qd::from_f64(key), z.validity) {
            break;
        }
        let have = cur.coeff(key).coeff(0);
        if j == k {
            mu = have / tpi;
            continue;
        }
        let target = if j == 2 * k { -(tpi * mu * mu) } else { Cx::ZERO };
        let beta = (target - have) / (-tpi).scale(Qd::from_f64(j as f64 - k as f64));
        if beta.abs_f64() <= eps {
            continue;
        }
        let y = NilpotentDerivation::monomial(Qd::from_f64(j as f64), PolyZ::constant(beta), z.validity, z.prec);
        let gj = y.exp_derivation();
        cur = cur.pullback(&gj);
        g = g.compose(&gj);
    }
    let model = residue_model(k, mu, cur.validity, z.prec);
    Ok(UnramifiedNormalForm { conjugator: g, k, mu, remainder: cur.sub(&model), reduced: cur })
}

#[derive(Clone, Debug)]
pub struct MildNormalForm {
    pub conjugator: DulacSeries,
    pub k: u32,
    pub a: Cx,
    pub b: Cx,
    pub mu: Cx,
    /// The conjugated derivation `-(z+a)e^{-kz}∂ + ((μ-½)z+b)e^{-2kz}∂ + …`.
    pub form: NilpotentDerivation,
}

pub fn normal_form_mildly_ramified(x: &NilpotentDerivation) -> Result<MildNormalForm> {
    let z = x.lvar();
    if z.is_zero() {
        return Err(Error::Unramified);
    }
    if !z.is_unramified() {
        return Err(Error::NotMildlyRamified);
    }
    let nf = normal_form_unramified(&z)?;
    let xg = x.pullback(&nf.conjugator);
    let form = lvar_inverse(&nf.reduced, &ConstantChoice::from_derivation(&xg))?;
    let k = nf.k as f64;
    let pk = form.coeff(k);
    let q2k = form.coeff(2.0 * k);
    Ok(MildNormalForm {
        conjugator: nf.conjugator,
        k: nf.k,
        a: -pk.coeff(0),
        b: q2k.coeff(0),
        mu: nf.mu,
        form,
    })
}
