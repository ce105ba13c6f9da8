#![allow(dead_code)]

use dulac_core::{Cx, DulacSeries, PolyZ, Prec, Qd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn prec() -> Prec {
    Prec::default()
}

pub fn c(re: f64, im: f64) -> Cx {
    Cx::from_f64(re, im)
}

pub fn q(x: f64) -> Qd {
    Qd::from_f64(x)
}

pub fn rc(r: &mut impl Rng, s: f64) -> Cx {
    c(r.gen_range(-s..s), r.gen_range(-s..s))
}

pub fn poly(cs: &[Cx]) -> PolyZ {
    PolyZ::from_coeffs(cs.to_vec())
}

pub fn series(a: f64, b: Cx, terms: &[(f64, &[Cx])], validity: f64) -> DulacSeries {
    let t = terms.iter().map(|(k, p)| (q(*k), poly(p))).collect();
    DulacSeries::new(q(a), b, t, validity, prec()).unwrap()
}

pub fn random_poly(r: &mut impl Rng, max_deg: usize, s: f64) -> PolyZ {
    let d = r.gen_range(0..=max_deg);
    PolyZ::from_coeffs((0..=d).map(|_| rc(r, s)).collect())
}

/// Keys on the half-integer lattice, mostly multiplier 1.
pub fn random_series(r: &mut impl Rng, validity: f64) -> DulacSeries {
    let a = match r.gen_range(0..10) {
        0 => 2.0,
        1 => 0.5,
        _ => 1.0,
    };
    let b = rc(r, 1.0);
    let nterms = r.gen_range(1..=3);
    let mut terms = Vec::new();
    for _ in 0..nterms {
        let k = r.gen_range(1..=(2.0 * validity) as u32) as f64 / 2.0;
        terms.push((q(k), random_poly(r, 1, 1.0)));
    }
    DulacSeries::new(q(a), b, terms, validity, prec()).unwrap()
}

/// Unramified: integer keys, constant polynomials.
pub fn random_unramified(r: &mut impl Rng, validity: f64) -> DulacSeries {
    let b = rc(r, 1.0);
    let mut terms = Vec::new();
    for k in 1..=(validity as u32) {
        if r.gen_bool(0.6) {
            terms.push((q(k as f64), PolyZ::constant(rc(r, 1.0))));
        }
    }
    DulacSeries::new(Qd::ONE, b, terms, validity, prec()).unwrap()
}

pub fn assert_close(got: &DulacSeries, want: &DulacSeries, tol: f64) {
    let r = got.residual(want);
    assert!(r < tol, "residual {r:e}\n got {got:?}\nwant {want:?}");
}

pub fn cfg(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { failure_persistence: None, ..proptest::test_runner::Config::with_cases(cases) }
}

pub fn deriv(terms: &[(f64, &[Cx])], validity: f64) -> dulac_core::derivations::NilpotentDerivation {
    let t = terms.iter().map(|(k, p)| (q(*k), poly(p))).collect();
    dulac_core::derivations::NilpotentDerivation::new(t, validity, prec()).unwrap()
}

/// Random derivation with keys on the half-integer lattice.
pub fn random_deriv(r: &mut impl Rng, validity: f64, max_deg: usize) -> dulac_core::derivations::NilpotentDerivation {
    let mut terms = Vec::new();
    for _ in 0..r.gen_range(1..=3) {
        let k = r.gen_range(1..=(2.0 * validity) as u32) as f64 / 2.0;
        terms.push((q(k), random_poly(r, max_deg, 1.0)));
    }
    dulac_core::derivations::NilpotentDerivation::new(terms, validity, prec()).unwrap()
}

pub fn random_unramified_deriv(r: &mut impl Rng, validity: f64) -> dulac_core::derivations::NilpotentDerivation {
    let mut terms = Vec::new();
    for k in 1..=(validity as u32) {
        if r.gen_bool(0.6) || terms.is_empty() {
            terms.push((q(k as f64), PolyZ::constant(rc(r, 1.0))));
        }
    }
    dulac_core::derivations::NilpotentDerivation::new(terms, validity, prec()).unwrap()
}

/// `Exp(X)` with `lvar X` unramified, composed with a random unramified series.
pub fn mildly_ramified(r: &mut impl Rng) -> DulacSeries {
    let z = random_unramified_deriv(r, 4.0);
    let section = dulac_core::derivations::ConstantChoice::new((1..=4).map(|k| (q(k as f64), rc(r, 1.0))).collect());
    let x = dulac_core::derivations::lvar_inverse(&z, &section).unwrap();
    x.exp_derivation().compose(&random_unramified(r, 4.0))
}
