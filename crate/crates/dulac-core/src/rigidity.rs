//! Conjugation of attracting and repelling Dulac series to their linear models,
//! centralizers of the models, and the algebraic steps of the rigidity arguments.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::{Cx, Prec, Qd};
use crate::polexp::PolExp;
use crate::poly::PolyZ;
use crate::transseries::{subst_tail, DulacSeries, DynType};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelGerm {
    /// `a z`, `a > 0`, `a ≠ 1`.
    Scaling(Qd),
    /// `z + b`.
    Translation(Cx),
}

impl ModelGerm {
    pub fn to_series(self, prec: Prec) -> DulacSeries {
        match self {
            ModelGerm::Scaling(a) => DulacSeries::affine(a, Cx::ZERO, prec),
            ModelGerm::Translation(b) => DulacSeries::affine(Qd::ONE, b, prec),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Conjugation {
    pub phi: DulacSeries,
    pub model: ModelGerm,
    /// Residual of `phi^{-1} ∘ f ∘ phi` against the model.
    pub residual: f64,
}

const MAX_PASSES: usize = 400;

/// `phi` with `phi^{-1} ∘ f ∘ phi = model`.
pub fn conjugate_to_model(f: &DulacSeries) -> Result<Conjugation> {
    let cls = f.classify();
    let (phi, model) = match cls.kind {
        DynType::Indifferent => return Err(Error::Indifferent),
        DynType::SuperAttracting => (super_phi(f)?, ModelGerm::Scaling(f.multiplier())),
        DynType::SuperRepelling => {
            let phi = super_phi(&f.invert())?;
            (phi.truncate(f.validity()), ModelGerm::Scaling(f.multiplier()))
        }
        DynType::HypAttracting | DynType::HypRepelling => {
            (hyperbolic_phi(f)?, ModelGerm::Translation(f.constant()))
        }
    };
    let g = model.to_series(f.prec());
    let residual = phi.invert().compose(&f.compose(&phi)).residual(&g);
    Ok(Conjugation { phi, model, residual })
}

/// Multiplier `a > 1`: `phi = z + c + Φ` with `Φ(az) = aΦ + T(z + c + Φ)`.
fn super_phi(f: &DulacSeries) -> Result<DulacSeries> {
    let (a, prec) = (f.multiplier(), f.prec());
    let eps = prec.eps();
    let cut = f.validity();
    let c = f.constant() / Cx::real(Qd::ONE - a);
    let ai = Cx::real(a.recip());
    let empty = PolExp::new();
    let mut phi = PolExp::new();
    for _ in 0..MAX_PASSES {
        let scaled = subst_tail(&phi, a, Cx::ZERO, &empty, cut, eps);
        let tt = subst_tail(f.tail(), Qd::ONE, c, &phi, cut, eps);
        let next = scaled.sub(&tt, eps).scale(ai).truncate(cut);
        let done = next.distance(&phi, cut, eps) <= eps * 1e-3;
        phi = next;
        if done {
            return Ok(DulacSeries::from_parts(Qd::ONE, c, phi, cut, prec));
        }
    }
    Err(Error::NoConvergence)
}

/// `phi = z + Φ` with `Φ(z + b) - Φ(z) = T(z + Φ)`.
fn hyperbolic_phi(f: &DulacSeries) -> Result<DulacSeries> {
    let (b, prec) = (f.constant(), f.prec());
    let eps = prec.eps();
    let cut = f.validity();
    let mut phi = PolExp::new();
    for _ in 0..MAX_PASSES {
        let rhs = subst_tail(f.tail(), Qd::ONE, Cx::ZERO, &phi, cut, eps);
        let mut terms = Vec::with_capacity(rhs.len());
        for (lam, r) in rhs.terms() {
            terms.push((*lam, solve_shift(r, *lam, b, eps)?));
        }
        let next = PolExp::from_terms(terms, eps);
        let done = next.distance(&phi, cut, eps) <= eps * 1e-3;
        phi = next;
        if done {
            return Ok(DulacSeries::from_parts(Qd::ONE, Cx::ZERO, phi, cut, prec));
        }
    }
    Err(Error::NoConvergence)
}

/// `Q` with `e^{-λb} Q(z+b) - Q(z) = R`, solved from the top degree down.
pub fn solve_shift(r: &PolyZ, lambda: Qd, b: Cx, eps: f64) -> Result<PolyZ> {
    let e = (-b.scale(lambda)).exp();
    let diag = e - Cx::ONE;
    if diag.abs_f64() <= eps * 1e3 {
        return Err(Error::ResonanceResidual { lambda: lambda.hi(), residual: diag.abs_f64() });
    }
    let Some(d) = r.degree() else {
        return Ok(PolyZ::zero());
    };
    let mut q = alloc::vec![Cx::ZERO; d + 1];
    for j in (0..=d).rev() {
        let above = PolyZ::from_coeffs(q.clone()).shift(b).coeff(j);
        q[j] = (r.coeff(j) - e * above) / diag;
    }
    Ok(PolyZ::from_coeffs(q))
}

fn tol(prec: Prec) -> f64 {
    prec.eps() * 1e3
}

/// `g` commutes with the model and has the closed form of its centralizer
/// (`μz`, `μ > 0`, for scalings; `z + d` for translations).
pub fn centralizer_membership(g: &DulacSeries, model: ModelGerm) -> bool {
    let prec = g.prec();
    let m = model.to_series(prec);
    let commutes = g.compose(&m).residual(&m.compose(g)) <= tol(prec);
    let eps = prec.eps();
    let flat = g.tail().clone().chop(eps).is_empty();
    let shape = match model {
        ModelGerm::Scaling(_) => flat && g.constant().abs_f64() <= eps,
        ModelGerm::Translation(_) => flat && (g.multiplier() - Qd::ONE).abs().hi() <= eps,
    };
    commutes && shape
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub phi: DulacSeries,
    /// `psi^{-1} ∘ phi`, an element of the model's centralizer.
    pub c: DulacSeries,
    pub model: ModelGerm,
    pub psi_unramified: bool,
}

/// Splits a conjugacy `psi` of `f` to its model as `phi ∘ c^{-1}`.
pub fn rigidity_decompose(f: &DulacSeries, psi: &DulacSeries) -> Result<Decomposition> {
    let conj = match conjugate_to_model(f) {
        Ok(c) => c,
        Err(Error::Indifferent) => return Err(Error::PreconditionFailed("f must be attracting or repelling")),
        Err(e) => return Err(e),
    };
    let prec = f.prec().join(psi.prec());
    let m = conj.model.to_series(prec);
    let back = psi.invert().compose(&f.compose(psi));
    if back.residual(&m) > tol(prec) {
        return Err(Error::PreconditionFailed("psi does not conjugate f to its model"));
    }
    let c = psi.invert().compose(&conj.phi);
    if !centralizer_membership(&c, conj.model) {
        return Err(Error::PreconditionFailed("psi^{-1} phi is not in the model centralizer"));
    }
    Ok(Decomposition { phi: conj.phi, c, model: conj.model, psi_unramified: psi.is_unramified() })
}

/// Checks `var(g^{-1} f g) = g^{-1} var(f) g` and the same for `f^{-1}`.
pub fn variation_group_conjugation_check(f: &DulacSeries, g: &DulacSeries) -> Result<bool> {
    if !g.is_unramified() {
        return Err(Error::NotUnramified);
    }
    let gi = g.invert();
    let conj = |x: &DulacSeries| gi.compose(&x.compose(g));
    let fc = conj(f);
    let t = tol(f.prec().join(g.prec()));
    let direct = fc.variation().residual(&conj(&f.variation()));
    let inverse = fc.invert().variation().residual(&conj(&f.invert().variation()));
    Ok(direct <= t && inverse <= t)
}

/// When `var f = var f^{-1}`, reports whether `f ∘ f` is unramified.
pub fn square_unramified_if_identical(f: &DulacSeries) -> Result<bool> {
    let t = tol(f.prec());
    if f.variation().residual(&f.invert().variation()) > t {
        return Err(Error::PreconditionFailed("variations of f and f^{-1} differ"));
    }
    Ok(f.compose(f).is_unramified())
}
