use dulac::json::*;
use dulac_core::diffeo::{DiffeoGerm, EXACT};
use dulac_core::loopclass::{classify_integrability, bernoulli_example_gluing, LoopGermSpec, Saddle};
use dulac_core::saddlenum::PathSpec;
use dulac_core::{Cx, DulacSeries, PolyZ, Prec, Qd};
use num_complex::Complex64 as C64;
use serde_json::json;

fn p50() -> Prec {
    Prec::new(50)
}

#[test]
fn numbers_keep_all_digits() {
    let tau = DulacSeries::tau(p50());
    let v = series_to_json(&tau);
    let im = v["constant"][1].to_string();
    assert!(im.starts_with("6.28318530717958647692528676655900576839433879875"), "{im}");
    assert!(v["validity"].is_null());
    assert_eq!(v["precision"], 50);
    let back = series_from_json(&v, Prec::new(20)).unwrap();
    assert_eq!(back.prec().digits(), 50);
    assert!(back.residual(&tau) < 1e-47);
}

#[test]
fn series_reads_strings_and_defaults() {
    let v = json!({
        "multiplier": "2",
        "terms": [{"lambda": 1.5, "poly": [[-1, 0], [0, 0], ["1", "0"]]}],
        "validity": 3
    });
    let f = series_from_json(&v, p50()).unwrap();
    assert_eq!(f.multiplier(), Qd::from_f64(2.0));
    assert!(f.constant().is_zero());
    assert_eq!(f.validity(), 3.0);
    assert_eq!(f.terms()[0].1.coeff(2), Cx::ONE);
}

#[test]
fn field_errors_name_the_field() {
    let e = series_from_json(&json!({"terms": []}), p50()).unwrap_err();
    assert!(e.to_string().contains("multiplier"), "{e}");
    let e = series_from_json(&json!({"multiplier": 1, "constant": [1], "terms": []}), p50()).unwrap_err();
    assert!(e.to_string().contains("constant"), "{e}");
    let e = germ_from_json(&json!({"coeffs": [[0, 0]]}), p50()).unwrap_err();
    assert!(matches!(e, FormatError::Core(_)), "{e}");
}

#[test]
fn derivation_and_germ_shapes() {
    let x = dulac_core::derivations::NilpotentDerivation::new(vec![(Qd::ONE, PolyZ::z())], 2.0, p50()).unwrap();
    let v = derivation_to_json(&x);
    assert_eq!(v["validity"], 2.0);
    assert_eq!(derivation_from_json(&v, p50()).unwrap(), x);

    let g = DiffeoGerm::new(vec![Cx::ONE, Cx::from_f64(0.0, -1.0)], 6, p50()).unwrap();
    let v = germ_to_json(&g);
    assert_eq!(v["order"], 6);
    assert_eq!(germ_from_json(&v, p50()).unwrap(), g);
    let exact = germ_to_json(&DiffeoGerm::linear(Cx::from_f64(3.0, 0.0), EXACT, p50()));
    assert!(exact["order"].is_null());
}

#[test]
fn saddles() {
    let s = saddle_from_json(&json!({"lambda": 1.3, "k": [[0, 0, [0.3, 0.1]]], "eps": 0.3163, "b": 3})).unwrap();
    assert_eq!(s.n(), 2);
    assert_eq!((s.a(), s.b()), (2.0, 3.0));
    assert!(!s.k().is_zero());
    let lin = saddle_from_json(&json!({"lambda": 0.5, "sigma": [0.5, 0]})).unwrap();
    assert!(lin.k().is_zero());
    assert_eq!(lin.sigma(), C64::new(0.5, 0.0));
    assert!(saddle_from_json(&json!({"lambda": 1.0, "k": [[0, 0, [5, 0]]], "eps": 0.1})).is_err());
    assert!(saddle_from_json(&json!({"lambda": 1.0, "k": [[0, -1, [0, 0]]], "eps": 0.1})).is_err());
}

#[test]
fn paths() {
    let p = path_from_json(&json!({"kind": "exponential", "alpha": 0.5, "c": -1, "t": 4, "backward": true})).unwrap();
    assert_eq!(p, PathSpec::Exponential { alpha: 0.5, c: -1, t: 4.0, backward: true });
    let p = path_from_json(&json!({"kind": "radial", "t": 2})).unwrap();
    assert_eq!(p, PathSpec::Radial { z0: C64::new(0.0, 0.0), t: 2.0 });
    assert!(path_from_json(&json!({"kind": "spiral", "t": 1})).is_err());
}

#[test]
fn verdicts() {
    let spec = LoopGermSpec {
        saddle: Saddle::Linearizable { lambda: Qd::ONE },
        gluing: bernoulli_example_gluing(Cx::from_f64(2.0, 0.0), 16, p50()),
    };
    let v = verdict_to_json(&classify_integrability(&spec), 50);
    assert_eq!(v["class"], "Bernoulli");
    assert!(v["certificate"].is_object());
    assert!(v["degree"].as_u64().unwrap() >= 1);
}
