mod common;

use common::*;
use dulac_core::diffeo::*;
use dulac_core::{Cx, DulacSeries, Error, Qd};
use proptest::prelude::*;
use rand::Rng;

fn germ(cs: &[Cx], order: usize) -> DiffeoGerm {
    DiffeoGerm::new(cs.to_vec(), order, prec()).unwrap()
}

fn close(got: &DiffeoGerm, want: &DiffeoGerm, tol: f64) {
    let r = got.residual(want);
    assert!(r < tol, "residual {r:e}\n got {got:?}\nwant {want:?}");
}

#[test]
fn projection_examples() {
    let id = DiffeoGerm::identity(EXACT, prec());
    close(&project_pi(&DulacSeries::tau(prec())).unwrap(), &id, 1e-40);

    let b = c(0.3, -1.1);
    let g = project_pi(&DulacSeries::affine(Qd::ONE, b, prec())).unwrap();
    close(&g, &DiffeoGerm::linear((-b).exp(), EXACT, prec()), 1e-40);

    let f = series(1.0, Cx::ZERO, &[(1.0, &[Cx::two_pi_i()])], 1.0);
    let g = project_pi(&f).unwrap();
    assert_eq!(g.order(), 2);
    close(&g, &germ(&[Cx::ONE, -Cx::two_pi_i()], 2), 1e-40);

    let ram = series(1.0, Cx::ZERO, &[(0.5, &[Cx::ONE])], 2.0);
    assert_eq!(project_pi(&ram), Err(Error::NotUnramified));
}

#[test]
fn projection_against_closed_form() {
    // z + ln(1 + e^{-z}) projects to x/(1+x)
    let mut terms = Vec::new();
    for k in 1..=6 {
        let s = if k % 2 == 1 { 1.0 } else { -1.0 };
        terms.push((k as f64, vec![Cx::real(q(s) / q(k as f64))]));
    }
    let t: Vec<(f64, &[Cx])> = terms.iter().map(|(k, v)| (*k, v.as_slice())).collect();
    let g = project_pi(&series(1.0, Cx::ZERO, &t, 6.0)).unwrap();
    let want: Vec<Cx> = (0..7).map(|j| c(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
    close(&g, &germ(&want, 7), 1e-40);
}

#[test]
fn lift_examples() {
    let x = DiffeoGerm::identity(EXACT, prec());
    assert!(lift_pi(&x, 0).is_identity());
    assert_close(&lift_pi(&x, 1), &DulacSeries::affine(Qd::ONE, -Cx::two_pi_i(), prec()), 1e-40);

    let beta = 0.3;
    let g = DiffeoGerm::linear((Cx::two_pi_i().scale(q(beta))).exp(), EXACT, prec());
    let want = DulacSeries::affine(Qd::ONE, -Cx::two_pi_i().scale(q(beta)), prec());
    assert_close(&lift_pi(&g, 0), &want, 1e-40);
}

#[test]
fn exp_field_examples() {
    let zero = FormalField::new(vec![], 6, prec());
    close(&zero.exp_field(), &DiffeoGerm::identity(6, prec()), 1e-40);

    for k in 1..4 {
        let a = c(0.4, 0.9);
        let mut v = vec![Cx::ZERO; 8];
        v[k] = a;
        let g = FormalField::new(v, 8, prec()).exp_field();
        assert_eq!(g.tangency_order(), Some(k));
        assert!((g.coeff(k + 1) - a).abs_f64() < 1e-40);
    }

    // x^2 d/dx has flow x/(1-x)
    let g = FormalField::new(vec![Cx::ZERO, Cx::ONE], 9, prec()).exp_field();
    close(&g, &germ(&[Cx::ONE; 9], 9), 1e-40);
}

#[test]
fn generator_of_x_plus_x2() {
    let f = germ(&[Cx::ONE, Cx::ONE], 8);
    let v = infinitesimal_generator(&f).unwrap();
    let want = [0.0, 1.0, -1.0, 1.5, -8.0 / 3.0, 31.0 / 6.0, -157.0 / 15.0, 649.0 / 30.0];
    for (j, w) in want.iter().enumerate() {
        assert!((v.coeffs()[j] - c(*w, 0.0)).abs_f64() < 1e-13, "a_{j} = {:?}", v.coeffs()[j]);
    }
    close(&v.exp_field(), &f, 1e-40);
}

#[test]
fn generator_rejects_non_tangent() {
    let id = DiffeoGerm::identity(5, prec());
    assert_eq!(infinitesimal_generator(&id), Err(Error::NotTangentToIdentity));
    let lin = germ(&[c(2.0, 0.0), Cx::ONE], 5);
    assert_eq!(infinitesimal_generator(&lin), Err(Error::NotTangentToIdentity));
}

fn embedded_pair(k: usize, nu: Cx, n: usize) -> (DiffeoGerm, DiffeoGerm) {
    let d = FormalField::rational(k, Cx::ONE, (Cx::ONE - nu).recip(), n, prec());
    (d.exp_field(), d.scale(-nu.recip()).exp_field())
}

#[test]
fn gh_embedded_flow() {
    for k in 1..=3 {
        let nu = c(0.3, 0.4);
        let (g, h) = embedded_pair(k, nu, 3 * k + 2);
        let rep = gh_dichotomy(&g, &h).unwrap();
        assert!(rep.formal_only);
        assert_eq!(rep.order, 3 * k + 2);
        match rep.verdict {
            GhVerdict::EmbeddedFlow { k: kk, nu: got } => {
                assert_eq!(kk, k);
                assert!((got - nu).abs_f64() < 1e-35);
            }
            v => panic!("{v:?}"),
        }
        assert!(rep.commutator_residual < 1e-40);
    }
}

#[test]
fn gh_identical() {
    let d = FormalField::rational(2, Cx::ONE, c(0.5, 0.0), 9, prec());
    let g = d.exp_field();
    let rep = gh_dichotomy(&g, &g).unwrap();
    assert_eq!(rep.verdict, GhVerdict::IdenticalVariations { k: 2 });
    let id = DiffeoGerm::identity(5, prec());
    assert_eq!(gh_dichotomy(&id, &id).unwrap().verdict, GhVerdict::IdenticalVariations { k: 0 });
}

#[test]
fn gh_generic_commutator() {
    for k in 1..=3 {
        let mu = c(0.37, -0.21);
        let n = 3 * k + 2;
        let g = FormalField::rational(k, Cx::ONE, mu, n, prec()).exp_field();
        let h = FormalField::rational(k, -Cx::ONE, mu - Cx::ONE, n, prec()).exp_field();
        match gh_dichotomy(&g, &h).unwrap().verdict {
            GhVerdict::NonCommuting { degree, coefficient } => {
                assert_eq!(degree, 3 * k + 1);
                let want = Cx::real(Qd::PI.sqr().mul_pwr2(4.0) * q(k as f64));
                assert!((coefficient - want).abs_f64() < 1e-25, "{coefficient:?}");
            }
            v => panic!("{v:?}"),
        }
    }
}

#[test]
fn gh_rejects_non_tangent() {
    let g = germ(&[c(0.5, 0.0)], 4);
    let id = DiffeoGerm::identity(4, prec());
    assert_eq!(gh_dichotomy(&g, &id).map(|r| r.verdict), Err(Error::NotTangentToIdentity));
}

#[test]
fn variation_pair_examples() {
    let mut r = rng(11);
    let u = random_unramified(&mut r, 4.0);
    let (g, h) = variation_pair(&u).unwrap();
    assert_eq!(g.tangency_order(), None);
    assert_eq!(h.tangency_order(), None);

    let f = deriv(&[(1.0, &[Cx::ZERO, Cx::ONE])], 2.0).exp_derivation();
    let (g, h) = variation_pair(&f).unwrap();
    assert!((g.coeff(2) + Cx::two_pi_i()).abs_f64() < 1e-40);
    assert_eq!(g.tangency_order(), Some(1));
    assert_eq!(h.tangency_order(), Some(1));
}

#[test]
fn variation_pair_translation_twist() {
    // f = f0 ∘ (z + 2πiβ): G is unchanged, H is conjugated by x -> B x
    let beta = 0.23;
    let f0 = mildly_ramified(&mut rng(5));
    let t = DulacSeries::affine(Qd::ONE, Cx::two_pi_i().scale(q(beta)), prec());
    let f = f0.compose(&t);
    let (g0, h0) = variation_pair(&f0).unwrap();
    let (g, h) = variation_pair(&f).unwrap();
    close(&g, &g0, 1e-38);
    let bb = (Cx::two_pi_i().scale(q(beta))).exp();
    let n = h0.order();
    let s = DiffeoGerm::linear(bb, n, prec());
    let sinv = DiffeoGerm::linear(bb.recip(), n, prec());
    let conj = s.compose(&h0).compose(&sinv);
    let conj2 = sinv.compose(&h0).compose(&s);
    assert!(h.residual(&conj) < 1e-38 || h.residual(&conj2) < 1e-38, "{h:?}\n{conj:?}");
}

#[test]
fn fatou_model_plus_sign() {
    let nu = (-Cx::two_pi_i().scale(q(1.0 / 3.0))).exp();
    for j in 0..8 {
        let z = c(3.0 + 0.7 * j as f64, -1.0 + 0.3 * j as f64);
        let chk = fatou_model_map(1, 1.0 / 3.0, z, prec()).unwrap();
        assert!((chk.nu - nu).abs_f64() < 1e-40);
        assert!(chk.residual_plus < 1e-20, "{chk:?}");
    }
    // e^{kz} dominant: f ≈ z + 2πiβ
    let z = c(30.0, 0.5);
    let chk = fatou_model_map(1, 1.0 / 3.0, z, prec()).unwrap();
    let seed = z + Cx::two_pi_i().scale(q(1.0 / 3.0));
    assert!((chk.f - seed).abs_f64() < 1e-10, "{chk:?}");
}

#[test]
fn fatou_rejects_trivial_nu() {
    assert!(matches!(fatou_model_map(2, 0.5, c(3.0, 0.0), prec()), Err(Error::PreconditionFailed(_))));
}

fn random_germ(r: &mut impl Rng, n: usize, tangent: bool) -> DiffeoGerm {
    let mut cs: Vec<Cx> = (0..n).map(|_| rc(r, 1.0)).collect();
    cs[0] = if tangent { Cx::ONE } else { c(r.gen_range(0.5..1.5), r.gen_range(-0.5..0.5)) };
    germ(&cs, n)
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn projection_is_a_morphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_unramified(&mut r, 4.0);
        let g = random_unramified(&mut r, 4.0);
        let lhs = project_pi(&f.compose(&g)).unwrap();
        let rhs = project_pi(&f).unwrap().compose(&project_pi(&g).unwrap());
        prop_assert!(lhs.residual(&rhs) < 1e-38);
        let tf = DulacSeries::tau(prec()).compose(&f);
        prop_assert!(project_pi(&tf).unwrap().residual(&project_pi(&f).unwrap()) < 1e-38);
    }

    #[test]
    fn lift_is_a_section(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_unramified(&mut r, 4.0);
        let g = project_pi(&f).unwrap();
        let l = lift_pi(&g, 0);
        prop_assert!(project_pi(&l).unwrap().residual(&g) < 1e-38);
        // f and its lift differ by a power of τ
        let d = (f.constant() - l.constant()) / Cx::two_pi_i();
        prop_assert!((d - Cx::real(d.re.round())).abs_f64() < 1e-38);
        let back = lift_pi(&g, -d.re.round().to_f64() as i64);
        prop_assert!(back.residual(&f) < 1e-38);
    }

    #[test]
    fn germ_group_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_germ(&mut r, 7, false);
        let g = random_germ(&mut r, 7, false);
        let h = random_germ(&mut r, 7, false);
        let id = DiffeoGerm::identity(7, prec());
        prop_assert!(f.compose(&g).compose(&h).residual(&f.compose(&g.compose(&h))) < 1e-36);
        prop_assert!(f.compose(&f.invert()).residual(&id) < 1e-36);
        prop_assert!(f.invert().compose(&f).residual(&id) < 1e-36);
        let x = c(1e-3, 2e-3);
        let lhs = f.compose(&g).eval(x);
        let rhs = f.eval(g.eval(x));
        prop_assert!((lhs - rhs).abs_f64() < 1e-16);
    }

    #[test]
    fn flows_and_generators(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..4usize);
        let n = 10;
        let mut a = vec![Cx::ZERO; n];
        for x in a.iter_mut().skip(k) {
            *x = rc(&mut r, 1.0);
        }
        let v = FormalField::new(a, n, prec());
        let g = v.exp_field();
        let id = DiffeoGerm::identity(n, prec());
        prop_assert!(g.compose(&v.scale(-Cx::ONE).exp_field()).residual(&id) < 1e-34);
        let half = v.scale(c(0.5, 0.0)).exp_field();
        prop_assert!(half.compose(&half).residual(&g) < 1e-34);
        let w = infinitesimal_generator(&g).unwrap();
        prop_assert!(w.residual(&v) < 1e-30);
        prop_assert_eq!(g.tangency_order(), Some(k));
    }

    #[test]
    fn variation_orders_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = mildly_ramified(&mut r);
        prop_assert!(f.is_mildly_ramified());
        prop_assert!(!f.is_unramified());
        let (g, h) = variation_pair(&f).unwrap();
        prop_assert!(g.tangency_order().is_some());
        prop_assert_eq!(g.tangency_order(), h.tangency_order());
    }
}
