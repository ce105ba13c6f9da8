//! Loop germs: formal Poincaré maps, determinations of the corner map, and the
//! integrability classifier.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::diffeo::{infinitesimal_generator, lift_pi, ps, DiffeoGerm, FormalField, EXACT};
use crate::error::{Error, Result};
use crate::num::{Cx, Prec, Qd};
use crate::saddlenum::{dopri, LiftOptions, State};
use crate::transseries::DulacSeries;

/// `lift(R) ∘ d`.
pub fn poincare_formal(d: &DulacSeries, r: &DiffeoGerm, branch: i64) -> DulacSeries {
    lift_pi(r, branch).compose(d)
}

/// `(h_Σ, h_Ω)` read off a corner determination: `h_Σ = d⁻¹τ⁻¹dτ`, `h_Ω = dτ⁻¹d⁻¹τ`.
pub fn formal_holonomies(d0: &DulacSeries) -> (DulacSeries, DulacSeries) {
    let prec = d0.prec();
    let tau = DulacSeries::tau(prec);
    let taui = tau.invert();
    let di = d0.invert();
    let hs = di.compose(&taui.compose(&d0.compose(&tau)));
    let ho = d0.compose(&taui.compose(&di.compose(&tau)));
    (hs, ho)
}

/// `d_n = h_Ω^{-n} ∘ d_0 = d_0 ∘ h_Σ^n`; both sides are computed and compared.
pub fn determination_formal(
    d0: &DulacSeries,
    h_sigma: &DulacSeries,
    h_omega: &DulacSeries,
    n: i32,
) -> Result<DulacSeries> {
    if !h_sigma.is_unramified() || !h_omega.is_unramified() {
        return Err(Error::NotUnramified);
    }
    let left = h_omega.iterate(-n).compose(d0);
    let right = d0.compose(&h_sigma.iterate(n));
    let cut = left.validity().min(right.validity());
    let (left, right) = (left.truncate(cut), right.truncate(cut));
    let residual = left.residual(&right);
    if residual > d0.eps() * 1e3 {
        return Err(Error::DeterminationMismatch { residual });
    }
    Ok(left)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliCheck {
    pub alpha: Cx,
    /// Largest coefficient of the logarithmic-derivative defect.
    pub residual: f64,
    /// Highest Laurent degree compared.
    pub degree: usize,
}

/// Tests `R'·F(R) = α F` for `F = A(y) y^{-a} Π exp(b_j y^{-j})`.
///
/// Works with `L = log(R'·F(R)/F)`, a Laurent series; `α = exp L_0` and the
/// residual is the largest `|p L_p|`, `p ≠ 0`, i.e. the coefficients of `y L'`.
pub fn bernoulli_functional_check(r: &DiffeoGerm, a: Cx, b: &[Cx], unit: &[Cx]) -> Result<BernoulliCheck> {
    let a0 = unit.first().copied().unwrap_or(Cx::ZERO);
    if a0.abs_f64() <= r.prec().eps() {
        return Err(Error::PreconditionFailed("A(0) must be nonzero"));
    }
    let m = b.len();
    let top = if r.is_exact() { 16 } else { r.order().saturating_sub(1 + m) };
    // R is needed through degree n = top + m + 1
    let n = top + m + 1;
    let c = r.coeff(1);
    let ci = c.recip();
    let rv: Vec<Cx> = (0..=n).map(|j| r.coeff(j)).collect();
    let u: Vec<Cx> = (0..n).map(|j| rv[j + 1] * ci).collect();
    let rp: Vec<Cx> = (0..n).map(|j| rv[j + 1] * ci.scale(Qd::from_f64((j + 1) as f64))).collect();
    let lu = ps::log1(&u, n - 1);
    let lrp = ps::log1(&rp, n - 1);
    let ai = a0.recip();
    let an: Vec<Cx> = (0..=n).map(|j| unit.get(j).copied().unwrap_or(Cx::ZERO) * ai).collect();
    let la = ps::log1(&an, n);
    let lar = ps::compose(&la, &rv, n - 1);

    // index p + m holds the coefficient of y^p
    let mut lau = vec![Cx::ZERO; n + m];
    for j in 0..n {
        lau[j + m] = lrp[j] + lar[j] - la[j] - a * lu[j];
    }
    lau[m] += (Cx::ONE - a) * c.ln();
    for (jm1, &bj) in b.iter().enumerate() {
        let j = jm1 + 1;
        if bj.is_zero() {
            continue;
        }
        let s: Vec<Cx> = lu.iter().map(|x| -x.scale(Qd::from_f64(j as f64))).collect();
        let pj = ps::exp(&s, n - 1);
        let cj = ci.powi(j as i32);
        for (sidx, &p) in pj.iter().enumerate() {
            let mut v = cj * p;
            if sidx == 0 {
                v = v - Cx::ONE;
            }
            lau[sidx + m - j] += bj * v;
        }
    }
    let alpha = lau[m].exp();
    let residual = (0..=top + m)
        .filter(|&i| i != m)
        .map(|i| (lau[i] * Cx::from_f64(i as f64 - m as f64, 0.0)).abs_f64())
        .fold(0.0, f64::max);
    Ok(BernoulliCheck { alpha, residual, degree: top })
}

/// `y^{k+1} dx = x(1 + a y^k + x^d y^σ Q(y)) dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliEquation {
    pub k: u32,
    pub a: C64,
    pub d: i32,
    pub sigma: u32,
    pub q: Vec<C64>,
}

impl BernoulliEquation {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::BadParameters("k must be positive"));
        }
        if self.d < -1 || self.d == 0 {
            return Err(Error::BadParameters("d must lie in {-1, 1, 2, ...}"));
        }
        // the constraint only concerns the x^d y^σ Q term
        let s = self.a * self.d as f64 + self.sigma as f64;
        let has_q = self.q.iter().any(|c| c.norm() > 0.0);
        if has_q && s.im.abs() <= 1e-12 && s.re <= 1e-12 {
            return Err(Error::BadParameters("sigma + a d must not be a nonpositive real"));
        }
        if self.q.len() > self.k as usize {
            return Err(Error::BadParameters("deg Q must be at most k-1"));
        }
        Ok(())
    }

    /// `dy/dt` along `x = e^{2πit}`.
    fn rhs(&self, t: f64, y: C64) -> C64 {
        let tpi = C64::new(0.0, 2.0 * core::f64::consts::PI);
        let x = (tpi * t).exp();
        let yk = y.powu(self.k);
        let qv = self.q.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * y + c);
        let den = C64::new(1.0, 0.0) + self.a * yk + x.powi(self.d) * y.powu(self.sigma) * qv;
        tpi * yk * y / den
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyFit {
    pub radius: f64,
    pub samples: usize,
    pub degree: usize,
}

impl Default for HolonomyFit {
    fn default() -> Self {
        HolonomyFit { radius: 0.05, samples: 32, degree: 12 }
    }
}

/// Return map of one positive turn of `x` on `{x = 1}`.
pub fn bernoulli_holonomy_point(eq: &BernoulliEquation, y0: C64, bound: f64) -> Result<C64> {
    let opts = LiftOptions { rtol: 1e-13, atol: 1e-18, ..LiftOptions::default() };
    let mut left = false;
    let (y, t, _) = dopri(
        |t, s: &State| [eq.rhs(t, s[0]), C64::new(0.0, 0.0)],
        1.0,
        [y0, C64::new(0.0, 0.0)],
        &opts,
        |_, s| {
            left = !s[0].is_finite() || s[0].norm() > bound;
            !left
        },
    )?;
    if left || t < 1.0 - 1e-12 {
        return Err(Error::LiftExited("holonomy orbit left the disc"));
    }
    Ok(y[0])
}

/// Samples the holonomy on a circle and fits a germ by discrete Fourier transform.
pub fn bernoulli_holonomy_numeric(eq: &BernoulliEquation, fit: &HolonomyFit) -> Result<DiffeoGerm> {
    eq.validate()?;
    let (rho, m) = (fit.radius, fit.samples);
    if fit.degree == 0 || 2 * fit.degree > m {
        return Err(Error::BadParameters("need 1 <= degree <= samples/2"));
    }
    let w = |j: usize| C64::from_polar(1.0, 2.0 * core::f64::consts::PI * j as f64 / m as f64);
    let vals: Vec<C64> = (0..m)
        .map(|j| bernoulli_holonomy_point(eq, w(j) * rho, 8.0 * rho))
        .collect::<Result<_>>()?;
    let coef: Vec<C64> = (0..m)
        .map(|p| {
            let s: C64 = vals.iter().enumerate().map(|(j, &v)| v * w((j * p) % m).conj()).sum();
            s / (m as f64 * libm::pow(rho, p as f64))
        })
        .collect();
    // the part beyond the fitted degree must be negligible on the circle
    let tail = (fit.degree + 1..m).map(|p| coef[p].norm() * libm::pow(rho, p as f64)).fold(0.0, f64::max);
    let lead = coef[1].norm() * rho;
    if !(lead > 0.0) || coef[0].norm() > 1e-6 * lead || tail > 1e-4 * lead {
        return Err(Error::FitIllConditioned);
    }
    let cs = coef[1..=fit.degree].iter().map(|&z| Cx::from_c64(z)).collect();
    DiffeoGerm::new(cs, fit.degree, Prec::new(16))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Saddle {
    Linearizable { lambda: Qd },
    /// 1:1 resonant normal form `ω_{k,μ}`.
    PoincareDulac { k: usize, mu: Cx },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopGermSpec {
    pub saddle: Saddle,
    pub gluing: DiffeoGerm,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IntegrabilityClass {
    Linear,
    Bernoulli { order: usize },
    PoincareDulac { k: usize, mu: Cx, nu: Cx },
    NotIntegrable,
    /// Undecided from the first degree given.
    Inconclusive { degree: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrabilityVerdict {
    pub class: IntegrabilityClass,
    pub certificate: Vec<(&'static str, f64)>,
    pub degree: usize,
    pub caveat: Option<&'static str>,
}

/// `p/q` with `q ≤ max_den` matching `x` to `tol`, by continued fractions.
pub fn rational_approx(x: Qd, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        let ai = a.hi() as i64;
        let h = ai.checked_mul(h1)?.checked_add(h0)?;
        let k = ai.checked_mul(k1)?.checked_add(k0)?;
        if k > max_den {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h, k1, k);
        let err = (x - Qd::from_i64(h) / Qd::from_i64(k)).abs().hi();
        if err <= tol * x.abs().hi().max(1.0) {
            return Some((h, k));
        }
        let frac = y - a;
        if frac.hi() <= tol {
            return None;
        }
        y = frac.recip();
    }
    None
}

fn root_of_unity_order(theta: Cx, max: usize, tol: f64) -> Option<usize> {
    (1..=max).find(|&q| (theta.powi(q as i32) - Cx::ONE).abs_f64() <= tol)
}

fn nonlinear_size(r: &DiffeoGerm) -> f64 {
    (2..=r.work_order()).map(|j| r.coeff(j).abs_f64()).fold(0.0, f64::max)
}

/// Fit of `V = infinitesimal_generator(r0)` to `t x^k/(1 + ν x^k) x∂x`.
struct FlowFit {
    t: Cx,
    nu: Cx,
    residual: f64,
    first_bad: Option<usize>,
}

fn fit_flow(r0: &DiffeoGerm, k: usize, tol: f64) -> Result<FlowFit> {
    let v = infinitesimal_generator(r0)?;
    let a = v.coeffs();
    let n = v.order();
    let t = a[k];
    let nu = if 2 * k < n { -(a[2 * k] / t) } else { Cx::ZERO };
    let model = FormalField::rational(k, t / Cx::two_pi_i(), nu, n, r0.prec());
    let residual = v.residual(&model);
    let first_bad = (0..n).find(|&j| (a[j] - model.coeffs()[j]).abs_f64() > tol).map(|j| j + 1);
    Ok(FlowFit { t, nu, residual, first_bad })
}

/// Gluing map `y/(1 + y log α)` of the Bernoulli example, to `order`.
pub fn bernoulli_example_gluing(alpha: Cx, order: usize, prec: Prec) -> DiffeoGerm {
    let l = -alpha.ln();
    let mut cs = Vec::with_capacity(order);
    let mut p = Cx::ONE;
    for _ in 0..order {
        cs.push(p);
        p = p * l;
    }
    DiffeoGerm::new(cs, order, prec).expect("unit linear part")
}

/// Time-one map of `t y^{k+1}/(1 + ν y^k) ∂y`.
pub fn flow_gluing(k: usize, t: Cx, nu: Cx, order: usize, prec: Prec) -> DiffeoGerm {
    FormalField::rational(k, t / Cx::two_pi_i(), nu, order, prec).exp_field()
}

pub fn classify_integrability(spec: &LoopGermSpec) -> IntegrabilityVerdict {
    let r = &spec.gluing;
    let prec = r.prec();
    let tol = prec.eps() * 1e3;
    let degree = if r.is_exact() { r.work_order() } else { r.order() };
    let verdict = |class, certificate, caveat| IntegrabilityVerdict { class, certificate, degree, caveat };
    let nl = nonlinear_size(r);
    match &spec.saddle {
        Saddle::Linearizable { lambda } => {
            let one = (*lambda - Qd::ONE).abs().hi() <= tol;
            if !one {
                // both irrational and p/q ≠ 1 force R ∈ GL(1)
                let cert = vec![("nonlinear_part", nl)];
                let class = if nl <= tol { IntegrabilityClass::Linear } else { IntegrabilityClass::NotIntegrable };
                return verdict(class, cert, None);
            }
            classify_resonant_linear(r, tol, degree)
        }
        Saddle::PoincareDulac { k, mu } => {
            let (k, mu) = (*k, *mu);
            if (r.coeff(1) - Cx::ONE).abs_f64() > tol {
                return verdict(
                    IntegrabilityClass::NotIntegrable,
                    vec![("multiplier_defect", (r.coeff(1) - Cx::ONE).abs_f64())],
                    None,
                );
            }
            if nl <= tol {
                return verdict(IntegrabilityClass::PoincareDulac { k, mu, nu: Cx::ZERO }, vec![("nonlinear_part", nl)], None);
            }
            let caveat = ((mu - Cx::from_f64(0.5, 0.0)).abs_f64() <= tol)
                .then_some("identical-variations branch: decided on truncated data, convergence not checked");
            if r.tangency_order() != Some(k) {
                let t = r.tangency_order().unwrap_or(0) as f64;
                return verdict(IntegrabilityClass::NotIntegrable, vec![("tangency_order", t)], caveat);
            }
            match fit_flow(r, k, tol) {
                Ok(fit) if fit.first_bad.is_none() => verdict(
                    IntegrabilityClass::PoincareDulac { k, mu, nu: fit.nu },
                    vec![("generator_residual", fit.residual), ("time", fit.t.abs_f64())],
                    None,
                ),
                Ok(fit) => verdict(
                    IntegrabilityClass::NotIntegrable,
                    vec![("generator_residual", fit.residual), ("first_mismatch", fit.first_bad.unwrap_or(0) as f64)],
                    caveat,
                ),
                Err(_) => verdict(IntegrabilityClass::Inconclusive { degree: 2 }, Vec::new(), None),
            }
        }
    }
}

fn classify_resonant_linear(r: &DiffeoGerm, tol: f64, degree: usize) -> IntegrabilityVerdict {
    let verdict = |class, certificate| IntegrabilityVerdict { class, certificate, degree, caveat: None };
    let theta = r.coeff(1);
    let nl = nonlinear_size(r);
    if nl <= tol {
        return verdict(IntegrabilityClass::Linear, vec![("nonlinear_part", nl)]);
    }
    let modulus = theta.abs_f64();
    if (modulus - 1.0).abs() > tol {
        // hyperbolic multiplier: linearizable
        return verdict(IntegrabilityClass::Linear, vec![("log_modulus", libm::log(modulus))]);
    }
    let Some(q) = root_of_unity_order(theta, 64, tol) else {
        // formally linearizable; analytic linearization is a small-divisor question
        return verdict(IntegrabilityClass::Inconclusive { degree: 2 }, vec![("nonlinear_part", nl)]);
    };
    let rq = r.iterate(q as i32);
    let per = nonlinear_size(&rq);
    if per <= tol {
        return verdict(IntegrabilityClass::Linear, vec![("periodicity_defect", per)]);
    }
    let r0 = DiffeoGerm::linear(theta.recip(), EXACT, r.prec()).compose(r);
    let Some(k) = r0.tangency_order() else {
        return verdict(IntegrabilityClass::Linear, vec![("nonlinear_part", nonlinear_size(&r0))]);
    };
    if (theta.powi(k as i32) - Cx::ONE).abs_f64() > tol {
        return verdict(IntegrabilityClass::Inconclusive { degree: k + 1 }, vec![("rotation_defect", (theta.powi(k as i32) - Cx::ONE).abs_f64())]);
    }
    let Ok(fit) = fit_flow(&r0, k, tol) else {
        return verdict(IntegrabilityClass::Inconclusive { degree: k + 1 }, Vec::new());
    };
    if let Some(j) = fit.first_bad {
        return verdict(IntegrabilityClass::Inconclusive { degree: j }, vec![("generator_residual", fit.residual)]);
    }
    // R preserves y^{-(k+1)}(1 + ν y^k) dy
    let mut unit = vec![Cx::ZERO; k + 1];
    unit[0] = Cx::ONE;
    unit[k] = fit.nu;
    let a = Cx::from_f64((k + 1) as f64, 0.0);
    let chk = bernoulli_functional_check(r, a, &[], &unit);
    let (alpha_defect, fres) = match chk {
        Ok(c) => ((c.alpha - Cx::ONE).abs_f64(), c.residual),
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };
    let cert = vec![("generator_residual", fit.residual), ("functional_residual", fres), ("alpha_defect", alpha_defect)];
    if fres <= tol * 1e3 {
        verdict(IntegrabilityClass::Bernoulli { order: k }, cert)
    } else {
        verdict(IntegrabilityClass::Inconclusive { degree: k + 1 }, cert)
    }
}

/// Checks the two generators `G = e^{2πiq/p} x` and `H = e^{2πip/q} x (1 + εx^k)^{-1/k}`
/// through degree `4k + 2`: `G^p = H^q = id`, and `[G, H] = id` exactly when `ε = 0`.
pub fn solvable_pq_check(p: u32, q: u32, k: u32, epsilon: u8) -> Result<bool> {
    if p == 0 || q == 0 || k == 0 {
        return Err(Error::BadParameters("p, q, k must be positive"));
    }
    if gcd(p, q) != 1 {
        return Err(Error::BadParameters("p and q must be coprime"));
    }
    if k % p == 0 || k % q == 0 {
        return Err(Error::BadParameters("k must avoid pZ and qZ"));
    }
    if epsilon > 1 {
        return Err(Error::BadParameters("epsilon must be 0 or 1"));
    }
    let prec = Prec::default();
    let tol = prec.eps() * 1e3;
    let n = (4 * k + 2) as usize;
    let root = |a: u32, b: u32| (Cx::two_pi_i().scale(Qd::from_f64(a as f64) / Qd::from_f64(b as f64))).exp();
    let g = DiffeoGerm::linear(root(q, p), n, prec);
    // (1 + εx^k)^{-1/k} = exp(-(1/k) log(1 + εx^k))
    let mut u = vec![Cx::ZERO; n + 1];
    u[0] = Cx::ONE;
    u[k as usize] = Cx::from_f64(epsilon as f64, 0.0);
    let s: Vec<Cx> = ps::log1(&u, n).iter().map(|x| x.scale(-Qd::from_f64(k as f64).recip())).collect();
    let e = ps::exp(&s, n);
    let beta = root(p, q);
    let h = DiffeoGerm::new((0..n).map(|j| e[j] * beta).collect(), n, prec)?;
    let id = DiffeoGerm::identity(n, prec);
    let gp = g.iterate(p as i32).residual(&id) <= tol;
    let hq = h.iterate(q as i32).residual(&id) <= tol;
    let comm = h.invert().compose(&g.invert()).compose(&h).compose(&g);
    let commutes = comm.residual(&id) <= tol;
    Ok(gp && hq && (commutes == (epsilon == 0)))
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Largest coefficient of `exp(1/R - 1/y) - α` through `y^degree` for `R = y/(1 + y log α)`
/// truncated at `degree + 2`.
pub fn bernoulli_example_residual(alpha: Cx, degree: usize, prec: Prec) -> f64 {
    let r = bernoulli_example_gluing(alpha, degree + 2, prec);
    // R = y s(y) with s(0) = 1; 1/R - 1/y = (1/s - 1)/y
    let s: Vec<Cx> = (0..=degree + 1).map(|j| r.coeff(j + 1)).collect();
    let mut inv = vec![Cx::ZERO; degree + 2];
    inv[0] = Cx::ONE;
    for m in 1..=degree + 1 {
        let mut acc = Cx::ZERO;
        for j in 1..=m {
            acc += s[j] * inv[m - j];
        }
        inv[m] = -acc;
    }
    let c0 = inv[1];
    let mut rest = vec![Cx::ZERO; degree + 1];
    for j in 1..=degree {
        rest[j] = inv[j + 1];
    }
    let e = ps::exp(&rest, degree);
    let base = c0.exp();
    (0..=degree)
        .map(|j| {
            let want = if j == 0 { alpha } else { Cx::ZERO };
            (e[j] * base - want).abs_f64()
        })
        .fold(0.0, f64::max)
}
