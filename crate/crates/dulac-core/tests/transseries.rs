mod common;

use common::*;
use dulac_core::{Cx, DulacSeries, DynType, Qd};
use proptest::prelude::*;

const TOL: f64 = 1e-38;

fn two_pi_i() -> Cx {
    Cx::two_pi_i()
}

#[test]
fn compose_translations() {
    let t = DulacSeries::tau(prec());
    let got = t.compose(&t);
    let want = DulacSeries::affine(Qd::ONE, two_pi_i().scale(q(2.0)), prec());
    assert_close(&got, &want, TOL);
}

#[test]
fn compose_exponential_into_affine() {
    let b = c(0.3, -1.1);
    let f = series(1.0, Cx::ZERO, &[(1.0, &[Cx::ONE])], 3.0);
    let g = DulacSeries::affine(q(2.0), b, prec());
    let got = f.compose(&g);
    let want = series(2.0, b, &[(2.0, &[(-b).exp()])], 6.0);
    assert_close(&got, &want, TOL);
    assert_eq!(got.validity(), 6.0);
}

#[test]
fn compose_polynomial_with_tau() {
    let f = series(1.0, Cx::ZERO, &[(1.0, &[Cx::ZERO, Cx::ONE])], 3.0);
    let got = f.compose(&DulacSeries::tau(prec()));
    let want = series(1.0, two_pi_i(), &[(1.0, &[two_pi_i(), Cx::ONE])], 3.0);
    assert_close(&got, &want, TOL);
}

#[test]
fn invert_examples() {
    let t = DulacSeries::tau(prec());
    assert_close(&t.invert(), &DulacSeries::affine(Qd::ONE, -two_pi_i(), prec()), TOL);
    let s = DulacSeries::affine(q(3.0), Cx::ZERO, prec());
    assert_close(&s.invert(), &DulacSeries::affine(Qd::ONE / q(3.0), Cx::ZERO, prec()), TOL);

    let k = c(0.4, 0.9);
    let f = series(1.0, Cx::ZERO, &[(1.0, &[k])], 2.0);
    let g = f.invert();
    let want = series(1.0, Cx::ZERO, &[(1.0, &[-k]), (2.0, &[-(k * k)])], 2.0);
    assert_close(&g, &want, TOL);
    assert!(f.compose(&g).is_identity());
    assert!(g.compose(&f).is_identity());
}

// Numeric oracle: z + k e^{-z} evaluated at the truncated inverse returns z up to e^{-3 Re z}.
#[test]
fn invert_matches_pointwise_evaluation() {
    let k = c(0.4, 0.9);
    let f = series(1.0, Cx::ZERO, &[(1.0, &[k])], 2.0);
    let g = f.invert();
    let z = c(25.0, 0.7);
    let back = f.eval(g.eval(z));
    assert!((back - z).abs_f64() < 1e-30);
}

#[test]
fn variation_examples() {
    let t = DulacSeries::tau(prec());
    assert!(t.variation().is_identity());

    let f = series(1.0, Cx::ZERO, &[(1.0, &[Cx::ZERO, Cx::ONE])], 1.0);
    let want = series(1.0, Cx::ZERO, &[(1.0, &[two_pi_i()])], 1.0);
    assert_close(&f.variation(), &want, TOL);
}

// Direct evaluation of f∘τ∘f^{-1}∘τ^{-1} on the scaling λz gives a translation by 2πi(λ-1).
#[test]
fn variation_of_scaling_is_translation() {
    for lam in [2.0, 0.5, 3.0] {
        let f = DulacSeries::affine(q(lam), Cx::ZERO, prec());
        let v = f.variation();
        let want = DulacSeries::affine(Qd::ONE, two_pi_i().scale(q(lam - 1.0)), prec());
        assert_close(&v, &want, TOL);
        let z = c(1.3, 0.2);
        let tpi = two_pi_i();
        let direct = (z - tpi).scale(Qd::ONE / q(lam)) + tpi;
        assert!((v.eval(z) - direct.scale(q(lam))).abs_f64() < 1e-55);
    }
}

#[test]
fn unramified_examples() {
    assert!(DulacSeries::tau(prec()).is_unramified());
    assert!(series(1.0, Cx::ZERO, &[(2.0, &[c(3.0, 0.0)])], 3.0).is_unramified());
    let f = series(1.0, Cx::ZERO, &[(1.0, &[Cx::ZERO, Cx::ONE])], 3.0);
    assert!(!f.is_unramified());
    assert!(!series(1.0, Cx::ZERO, &[(0.5, &[Cx::ONE])], 3.0).is_unramified());
    assert!(!DulacSeries::affine(q(2.0), Cx::ZERO, prec()).is_unramified());
}

#[test]
fn roundoff_at_fractional_keys_is_ignored() {
    let f = series(1.0, c(0.2, 0.0), &[(0.5, &[c(1e-62, 0.0)]), (1.0, &[c(0.3, 0.1), c(0.0, 1e-63)])], 3.0);
    assert!(f.is_unramified());
    assert!(f.variation().is_identity());
}

#[test]
fn mildly_ramified_examples() {
    let mut r = rng(7);
    assert!(random_unramified(&mut r, 4.0).is_mildly_ramified());
    assert!(DulacSeries::affine(q(2.5), c(0.1, 0.0), prec()).is_mildly_ramified());
    let f = series(1.0, Cx::ZERO, &[(0.5, &[Cx::ONE]), (1.0, &[Cx::ZERO, Cx::ONE])], 3.0);
    assert!(!f.is_mildly_ramified());
}

#[test]
fn classify_examples() {
    let k = |a: f64, b: Cx| DulacSeries::affine(q(a), b, prec()).classify();
    assert_eq!(k(2.0, Cx::ZERO).kind, DynType::SuperAttracting);
    assert_eq!(k(0.5, Cx::ZERO).kind, DynType::SuperRepelling);
    assert_eq!(k(1.0, c(1.0, 0.0)).kind, DynType::HypAttracting);
    assert_eq!(k(1.0, c(-1.0, 0.0)).kind, DynType::HypRepelling);
    let t = DulacSeries::tau(prec()).classify();
    assert_eq!(t.kind, DynType::Indifferent);
    assert!(t.boundary);
}

#[test]
fn validity_propagation() {
    let f = series(1.0, Cx::ZERO, &[(1.0, &[Cx::ONE])], 4.0);
    let g = series(2.0, Cx::ZERO, &[(0.5, &[Cx::ONE])], 5.0);
    assert_eq!(f.compose(&g).validity(), 5.0);
    assert_eq!(g.compose(&f).validity(), 4.0);
    assert_eq!(g.invert().validity(), 2.5);
    assert!(DulacSeries::new(q(-1.0), Cx::ZERO, vec![], 1.0, prec()).is_err());
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn group_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y, z) = (random_series(&mut r, 5.0), random_series(&mut r, 5.0), random_series(&mut r, 5.0));
        let id = DulacSeries::identity(prec());
        prop_assert!(x.compose(&id).residual(&x) < TOL);
        prop_assert!(id.compose(&x).residual(&x) < TOL);
        let l = x.compose(&y).compose(&z);
        let rr = x.compose(&y.compose(&z));
        prop_assert!(l.residual(&rr) < 1e-36, "assoc {:e}", l.residual(&rr));
        prop_assert!(x.compose(&x.invert()).residual(&id) < 1e-36);
        prop_assert!(x.invert().compose(&x).residual(&id) < 1e-36);
        let m = x.compose(&y).multiplier();
        prop_assert_eq!(m, x.multiplier() * y.multiplier());
    }

    #[test]
    fn composition_matches_pointwise(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, g) = (random_series(&mut r, 3.0), random_series(&mut r, 3.0));
        let h = f.compose(&g);
        let z = c(40.0, 1.0);
        let want = f.eval(g.eval(z));
        // dropped terms are below e^{-Λ Re z}
        let err = (h.eval(z) - want).abs_f64() / want.abs_f64();
        let bound = (-40.0 * h.validity()).exp() * 1e6 + 1e-55;
        prop_assert!(err < bound, "err {:e} bound {:e}", err, bound);
    }

    #[test]
    fn unramified_iff_trivial_variation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = if r.gen_bool(0.5) { random_unramified(&mut r, 4.0) } else { random_series(&mut r, 4.0) };
        prop_assert_eq!(f.is_unramified(), f.variation().is_identity());
    }
}

use rand::Rng;
