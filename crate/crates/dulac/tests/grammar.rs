use dulac::grammar::{parse_derivation, parse_germ, parse_series, print_derivation, print_germ, print_series};
use dulac_core::derivations::NilpotentDerivation;
use dulac_core::diffeo::EXACT;
use dulac_core::{Cx, DulacSeries, PolyZ, Prec, Qd};
use proptest::prelude::*;

fn p50() -> Prec {
    Prec::new(50)
}

fn cx(re: f64, im: f64) -> Cx {
    Cx::from_f64(re, im)
}

#[test]
fn tau_from_text() {
    let f = parse_series("1*z + (0,6.2831853071795864769252867665590057683943387987502116419)", None, p50()).unwrap();
    assert!(f.residual(&DulacSeries::tau(p50())) < 1e-45);
    assert!(f.validity().is_infinite());
}

#[test]
fn one_exponential_term() {
    let f = parse_series("2*z + (1,0) + (z^2-1)*E[1.5]", None, p50()).unwrap();
    assert_eq!(f.multiplier(), Qd::from_f64(2.0));
    assert_eq!(f.constant(), Cx::ONE);
    assert_eq!(f.terms().len(), 1);
    let (k, p) = &f.terms()[0];
    assert_eq!(*k, Qd::from_f64(1.5));
    assert_eq!(p, &PolyZ::from_coeffs(vec![cx(-1.0, 0.0), Cx::ZERO, Cx::ONE]));
}

#[test]
fn running_ramified_example() {
    let f = parse_series("z + z*E[1]", None, p50()).unwrap();
    assert_eq!(f.multiplier(), Qd::ONE);
    assert!(f.constant().is_zero());
    assert_eq!(f.terms(), &[(Qd::ONE, PolyZ::z())]);
    assert!(!f.is_unramified());
}

#[test]
fn whitespace_and_explicit_validity() {
    let a = parse_series("  2 * z+( 1 , 0 )+( z ^ 2 - 1 ) * E [ 1.5 ] + O(E[3])", None, p50()).unwrap();
    let b = parse_series("2*z+(1,0)+(z^2-1)*E[1.5]+O(E[3])", None, p50()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.validity(), 3.0);
}

#[test]
fn like_terms_collect() {
    let f = parse_series("z + E[1] + 2*z*E[1] - (0,1)*E[1]", Some(2.0), p50()).unwrap();
    assert_eq!(f.terms()[0].1, PolyZ::from_coeffs(vec![cx(1.0, -1.0), cx(2.0, 0.0)]));
    assert_eq!(f.validity(), 2.0);
}

#[test]
fn error_position_and_expectations() {
    let e = parse_series("2*z + (1,0) + (z^2-1)*E[", None, p50()).unwrap_err();
    assert_eq!(e.pos, 24);
    assert!(e.expected.iter().any(|x| x.contains("number")), "{e}");
    let e = parse_series("2*z + # 1", None, p50()).unwrap_err();
    assert_eq!(e.pos, 6);
    assert_eq!(e.found, "#");
}

#[test]
fn semantic_rejections() {
    assert!(parse_series("z^2 + E[1]", None, p50()).is_err());
    assert!(parse_series("-z + E[1]", None, p50()).is_err());
    assert!(parse_series("(0,1)*z", None, p50()).is_err());
    assert!(parse_derivation("z + E[1]", None, p50()).is_err());
    assert!(parse_derivation("0", None, p50()).is_err());
    assert!(parse_germ("1 + x", p50()).is_err());
    assert!(parse_germ("x + x^5 + O(x^3)", p50()).is_err());
}

#[test]
fn derivation_validity_defaults() {
    let x = parse_derivation("z*E[1] + (0,2)*E[2.5]", None, p50()).unwrap();
    assert_eq!(x.validity(), 2.5);
    let x = parse_derivation("E[1] + O(E[4])", Some(9.0), p50()).unwrap();
    assert_eq!(x.validity(), 4.0);
    let zero = parse_derivation("0", Some(3.0), p50()).unwrap();
    assert!(zero.is_zero());
}

#[test]
fn germ_orders() {
    let g = parse_germ("x - x^2 + (0,0.5)*x^3 + O(x^6)", p50()).unwrap();
    assert_eq!(g.order(), 5);
    assert_eq!(g.coeff(3), cx(0.0, 0.5));
    let h = parse_germ("(2,0)*x", p50()).unwrap();
    assert_eq!(h.order(), EXACT);
    assert_eq!(print_germ(&g), "(1,0)*x + (-1,0)*x^2 + (0,5e-1)*x^3 + O(x^6)");
}

fn small() -> impl Strategy<Value = f64> {
    (-40i32..=40).prop_map(|n| n as f64 / 8.0)
}

fn series() -> impl Strategy<Value = DulacSeries> {
    let term = (1u32..12, prop::collection::vec((small(), small()), 1..4));
    (1u32..16, small(), small(), prop::collection::btree_map(1u32..12, term, 0..4), 13u32..20).prop_map(
        |(a, br, bi, terms, v)| {
            let terms = terms
                .into_iter()
                .map(|(k, (_, cs))| {
                    let poly = PolyZ::from_coeffs(cs.into_iter().map(|(r, i)| cx(r, i)).collect());
                    (Qd::from_f64(k as f64 / 4.0), poly)
                })
                .filter(|(_, p)| !p.is_zero())
                .collect();
            DulacSeries::new(Qd::from_f64(a as f64 / 4.0), cx(br, bi), terms, v as f64 / 4.0, p50()).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_inverts_print(f in series()) {
        let text = print_series(&f);
        let g = parse_series(&text, None, p50()).unwrap();
        prop_assert_eq!(&g, &f);
        prop_assert_eq!(print_series(&g), text);
    }

    #[test]
    fn derivation_text_is_stable(f in series()) {
        prop_assume!(!f.terms().is_empty());
        let x = NilpotentDerivation::new(f.terms().to_vec(), f.validity(), p50()).unwrap();
        let text = print_derivation(&x);
        let y = parse_derivation(&text, None, p50()).unwrap();
        prop_assert_eq!(&y, &x);
        prop_assert_eq!(print_derivation(&y), text);
    }
}
