use std::path::Path;

use dulac::config::{parse_config, pool_map, run, ConfigError};
use dulac_core::Prec;
use proptest::prelude::*;

fn parse(text: &str) -> Result<dulac::config::Config, ConfigError> {
    parse_config(text, Path::new("/tmp"), Prec::new(50))
}

fn invalid(text: &str) -> String {
    match parse(text) {
        Err(ConfigError::Invalid(m)) => m,
        other => panic!("expected ConfigInvalid, got {other:?}"),
    }
}

#[test]
fn malformed_json() {
    assert!(invalid("{\"version\": ").contains("malformed JSON"));
}

#[test]
fn version_and_shape() {
    assert!(invalid(r#"{"experiments": []}"#).contains("version"));
    assert!(invalid(r#"{"version": "dulac-run-config/0", "experiments": []}"#).contains("unsupported"));
    assert!(invalid(r#"{"version": "dulac-run-config/1"}"#).contains("experiments"));
    let m = invalid(r#"{"version": "dulac-run-config/1", "experiments": [{"kind": "criterion", "id": 11}]}"#);
    assert!(m.contains("1..=10"), "{m}");
    let m = invalid(r#"{"version": "dulac-run-config/1", "experiments": [{"kind": "teleport"}]}"#);
    assert!(m.contains("teleport"), "{m}");
    let m = invalid(r#"{"version": "dulac-run-config/1", "experiments": [{"kind": "lift", "name": "l", "saddle": {"lambda": 1}}]}"#);
    assert!(m.contains("l: missing `path`"), "{m}");
}

#[test]
fn output_is_relative_to_config() {
    let c = parse(r#"{"version": "dulac-run-config/1", "output": "r.json", "seed": 7, "experiments": []}"#).unwrap();
    assert_eq!(c.output.as_deref(), Some(Path::new("/tmp/r.json")));
    assert_eq!(c.seed, 7);
}

#[test]
fn strong_perturbation_over_three_laps_exits() {
    let text = r#"{
        "version": "dulac-run-config/1",
        "experiments": [{
            "kind": "lift",
            "saddle": {"lambda": 1.3, "n": 2, "k": [[0, 0, [0.4, 0.1]]], "eps": 0.45},
            "path": {"kind": "circular", "t": 18.84955592153876},
            "w0": [0.5, 0]
        }]
    }"#;
    let rep = run(&parse(text).unwrap(), 1);
    let o = &rep.experiments[0];
    assert_eq!(o.outcome, "LiftExited");
    assert!(o.detail.contains("clause"), "{}", o.detail);
    assert!(!rep.passed);
}

#[test]
fn classify_expectation() {
    let text = r#"{
        "version": "dulac-run-config/1",
        "experiments": [
            {"kind": "classify", "saddle": {"linear": 1.4142135623730951}, "gluing": "(3,0)*x", "expect": "Linear"},
            {"kind": "classify", "saddle": {"poincare_dulac": {"k": 1, "mu": [0.25, 0]}}, "gluing": "x + x^2 + O(x^3)", "expect": "Linear"}
        ]
    }"#;
    let rep = run(&parse(text).unwrap(), 2);
    assert!(rep.experiments[0].passed);
    assert!(!rep.experiments[1].passed);
    assert_ne!(rep.experiments[1].outcome, "Linear");
}

proptest! {
    #[test]
    fn pool_matches_sequential(xs in prop::collection::vec(any::<u32>(), 0..64), jobs in 1usize..9) {
        let got = pool_map(&xs, jobs, |&x| x.wrapping_mul(2654435761));
        let want: Vec<u32> = xs.iter().map(|&x| x.wrapping_mul(2654435761)).collect();
        prop_assert_eq!(got, want);
    }
}
