use std::path::PathBuf;
use std::process::Command;

use dulac::cli::main_with;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(std::iter::once("dulac").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let mut a = vec!["--format", "json"];
    a.extend_from_slice(args);
    let (code, out, err) = run(&a);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("dulac-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn compose_prints_in_the_grammar() {
    let (code, out, _) = run(&["compose", "2*z + (1,0)", "z + z*E[1] + O(E[2])"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "2*z + (1,0) + ((2,0)*z)*E[1] + O(E[2])");
}

#[test]
fn var_of_tau_is_identity() {
    let v = json(&["var", "z + (0,6.28318530717958647692528676655900576839433879875021)"]);
    assert_eq!(v["multiplier"], 1);
    assert!(v["terms"].as_array().unwrap().is_empty());
    assert!(v["constant"][1].as_f64().unwrap().abs() < 1e-40);
}

#[test]
fn self_describing_precision() {
    let v = json(&["--precision", "20", "invert", "2*z + (1,0) + E[1]"]);
    assert_eq!(v["precision"], 20);
    assert_eq!(v["validity"], 0.5);
}

#[test]
fn env_precision_default() {
    let out = Command::new(env!("CARGO_BIN_EXE_dulac"))
        .args(["--format", "json", "invert", "3*z"])
        .env("DULAC_PRECISION", "24")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["precision"], 24);
}

#[test]
fn files_and_json_inputs() {
    let d = scratch("inputs");
    let f = d.join("f.txt");
    std::fs::write(&f, "z + (0.5,0)").unwrap();
    let g = d.join("g.json");
    std::fs::write(&g, r#"{"multiplier": 2, "terms": []}"#).unwrap();
    let (code, out, err) = run(&["compose", &format!("@{}", f.display()), &format!("@{}", g.display())]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("2*z + (5e-1,0)"), "{out}");
}

#[test]
fn lvar_inverse_with_constants() {
    let v = json(&["lvar-inv", "E[1] + O(E[3])", "--constant", "2=1.5,0"]);
    let terms = v["terms"].as_array().unwrap();
    let t2 = terms.iter().find(|t| t["lambda"] == 2).expect("section constant at key 2");
    assert_eq!(t2["poly"][0][0], 1.5);
    let (code, _, err) = run(&["lvar-inv", "E[1]", "--constant", "oops"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn csv_corner_table() {
    let mut a = vec!["--format", "csv", "corner", r#"{"lambda": 1.5}"#, "1,0.5", "2,0"];
    let (code, out, err) = run(&a);
    assert_eq!(code, 0, "{err}");
    let mut rows = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(rows.headers().unwrap(), vec!["z_re", "z_im", "d_re", "d_im"]);
    let r: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(r.len(), 2);
    assert!((r[0][2].parse::<f64>().unwrap() - 1.5).abs() < 1e-9);
    a[3] = "{";
    assert_eq!(run(&a).0, 2);
}

#[test]
fn integrability_verdict() {
    let v = json(&["integrability", r#"{"linear": 1}"#, "x - x^2 + x^3 - x^4 + x^5 - x^6 + O(x^7)"]);
    assert_eq!(v["class"], "Bernoulli");
    assert!(v["certificate"].is_object());
}

#[test]
fn exit_codes() {
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    assert!(err.contains("Usage"), "{err}");
    let (code, _, err) = run(&["invert", "2*z +"]);
    assert_eq!(code, 2);
    assert!(err.contains("parse error at 5"), "{err}");
    let (code, _, err) = run(&["gh", "z + z*E[1]", "--validity", "4"]);
    assert_eq!(code, 1, "{err}");
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("conjugate-model"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dulac");
    let st = Command::new(bin).args(["classify", "z + (1,0)"]).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let st = Command::new(bin).args(["log", "z + (1,0)"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1), "{}", String::from_utf8_lossy(&st.stderr));
    let st = Command::new(bin).args(["lift-path"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn malformed_config_is_invalid() {
    let d = scratch("malformed");
    let p = d.join("bad.json");
    std::fs::write(&p, "{\"version\": \"dulac-run-config/1\", \"experiments\": [").unwrap();
    let (code, _, err) = run(&["run", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("config invalid"), "{err}");
}

#[test]
fn lift_exit_config_reports_clause() {
    let v = json(&["run", configs().join("lift-exit.json").to_str().unwrap()]);
    let first = &v["experiments"][0];
    assert_eq!(first["outcome"], "LiftExited");
    assert!(first["detail"].as_str().unwrap().contains("clause"));
    assert_eq!(v["passed"], true);
}

#[test]
fn check_suite_single_criterion() {
    let (code, out, _) = run(&["check-suite", "--criterion", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("criterion 2 [PASS]"));
}

#[test]
fn acceptance_config_exits_zero() {
    let d = scratch("acceptance");
    let p = d.join("acceptance.json");
    std::fs::copy(configs().join("acceptance.json"), &p).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dulac")).args(["run", p.to_str().unwrap()]).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    println!("{stdout}");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(d.join("acceptance-report.json")).unwrap()).unwrap();
    assert_eq!(report["experiments"].as_array().unwrap().len(), 10);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
}
