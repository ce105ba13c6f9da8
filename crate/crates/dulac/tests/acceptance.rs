//! One line per acceptance criterion: `criterion N [PASS|FAIL] name: detail`.

use dulac::suite::{criterion, CriterionReport};

const SEED: u64 = 20240611;

fn run(id: u8) -> CriterionReport {
    let rep = criterion(id, SEED).expect("known criterion");
    let mark = if rep.passed { "PASS" } else { "FAIL" };
    println!("criterion {id} [{mark}] {}: {}", rep.name, rep.detail);
    rep
}

macro_rules! criteria {
    ($($name:ident => $id:expr),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                let rep = run($id);
                assert!(rep.passed, "criterion {} failed: {}", $id, rep.detail);
            }
        )*
    };
}

criteria! {
    criterion_01_commutator_identities => 1,
    criterion_02_support_criterion => 2,
    criterion_03_model_conjugation => 3,
    criterion_04_derivation_calculus => 4,
    criterion_05_variation_pairs => 5,
    criterion_06_fatou_model => 6,
    criterion_07_saddle_numerics => 7,
    criterion_08_determinations => 8,
    criterion_09_integrability => 9,
    criterion_10_poincare_cross_check => 10,
}
