//! Experiment configs: `{"version": "dulac-run-config/1", "experiments": [...]}`.
//!
//! Kinds: `criterion` (`id`), `lift` (`saddle`, `path`, `w0`, optional
//! `expect` of `"inside"` or `"exit"`), `corner` (`saddle`, `points`,
//! optional `tolerance` against `λz`), `classify` (`saddle`, `gluing`,
//! optional `expect`). The schema lives in `schemas/run-config.schema.json`.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use dulac_core::loopclass::{classify_integrability, LoopGermSpec, Saddle};
use dulac_core::saddlenum::{corner_map_numeric, lift_path, LiftOptions, PathSpec, PreparedSaddle};
use dulac_core::Prec;
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::grammar::parse_germ;
use crate::json::{class_name, germ_from_json, path_from_json, read_c64, read_cx, read_f64, read_qd, saddle_from_json};
use crate::suite::criterion;

pub const VERSION: &str = "dulac-run-config/1";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config invalid: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Debug)]
enum Experiment {
    Criterion { id: u8 },
    Lift { saddle: PreparedSaddle, path: PathSpec, w0: C64, expect_exit: bool, opts: LiftOptions },
    Corner { saddle: PreparedSaddle, points: Vec<C64>, tolerance: Option<f64>, opts: LiftOptions },
    Classify { spec: LoopGermSpec, expect: Option<String> },
}

#[derive(Clone, Debug)]
pub struct Config {
    pub seed: u64,
    pub output: Option<PathBuf>,
    names: Vec<String>,
    experiments: Vec<Experiment>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub name: String,
    pub kind: &'static str,
    pub passed: bool,
    /// `"ok"`, `"LiftExited"`, `"Error"` or a class name.
    pub outcome: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub experiments: Vec<Outcome>,
}

fn lift_options(v: &Value) -> Result<LiftOptions, ConfigError> {
    let mut o = LiftOptions::default();
    if let Some(r) = v.get("rtol") {
        o.rtol = read_f64(r, "rtol").map_err(|e| invalid(e.to_string()))?;
    }
    if let Some(p) = v.get("predictive") {
        o.predictive = p.as_bool().ok_or_else(|| invalid("predictive must be a boolean"))?;
    }
    Ok(o)
}

fn loop_saddle(v: &Value) -> Result<Saddle, ConfigError> {
    let e = |e: crate::json::FormatError| invalid(e.to_string());
    if let Some(l) = v.get("linear") {
        return Ok(Saddle::Linearizable { lambda: read_qd(l, "linear").map_err(e)? });
    }
    if let Some(pd) = v.get("poincare_dulac") {
        let k = pd.get("k").and_then(Value::as_u64).filter(|&k| k > 0).ok_or_else(|| invalid("poincare_dulac.k must be a positive integer"))?;
        let mu = read_cx(pd.get("mu").ok_or_else(|| invalid("poincare_dulac.mu missing"))?, "mu").map_err(e)?;
        return Ok(Saddle::PoincareDulac { k: k as usize, mu });
    }
    Err(invalid("saddle needs `linear` or `poincare_dulac`"))
}

fn parse_experiment(v: &Value, prec: Prec) -> Result<(String, Experiment), ConfigError> {
    let e = |e: crate::json::FormatError| invalid(e.to_string());
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| invalid("experiment without `kind`"))?;
    let name = v.get("name").and_then(Value::as_str).unwrap_or(kind).to_string();
    let field = |f: &str| v.get(f).ok_or_else(|| invalid(format!("{name}: missing `{f}`")));
    let exp = match kind {
        "criterion" => {
            let id = field("id")?.as_u64().filter(|i| (1..=10).contains(i)).ok_or_else(|| invalid(format!("{name}: id must be 1..=10")))?;
            Experiment::Criterion { id: id as u8 }
        }
        "lift" => {
            let expect_exit = match v.get("expect").and_then(Value::as_str) {
                None | Some("inside") => false,
                Some("exit") => true,
                Some(x) => return Err(invalid(format!("{name}: unknown expectation {x:?}"))),
            };
            Experiment::Lift {
                saddle: saddle_from_json(field("saddle")?).map_err(e)?,
                path: path_from_json(field("path")?).map_err(e)?,
                w0: read_c64(field("w0")?, "w0").map_err(e)?,
                expect_exit,
                opts: lift_options(v)?,
            }
        }
        "corner" => {
            let pts = field("points")?.as_array().ok_or_else(|| invalid(format!("{name}: points must be an array")))?;
            Experiment::Corner {
                saddle: saddle_from_json(field("saddle")?).map_err(e)?,
                points: pts.iter().map(|p| read_c64(p, "points")).collect::<Result<_, _>>().map_err(e)?,
                tolerance: v.get("tolerance").map(|t| read_f64(t, "tolerance")).transpose().map_err(e)?,
                opts: lift_options(v)?,
            }
        }
        "classify" => {
            let gluing = match field("gluing")? {
                Value::String(s) => parse_germ(s, prec).map_err(|err| invalid(format!("{name}: {err}")))?,
                g => germ_from_json(g, prec).map_err(e)?,
            };
            let expect = v.get("expect").and_then(Value::as_str).map(str::to_string);
            Experiment::Classify { spec: LoopGermSpec { saddle: loop_saddle(field("saddle")?)?, gluing }, expect }
        }
        other => return Err(invalid(format!("{name}: unknown kind {other:?}"))),
    };
    Ok((name, exp))
}

/// Parses and validates a config document; `base` resolves a relative `output`.
pub fn parse_config(text: &str, base: &Path, prec: Prec) -> Result<Config, ConfigError> {
    let v: Value = serde_json::from_str(text).map_err(|e| invalid(format!("malformed JSON: {e}")))?;
    match v.get("version").and_then(Value::as_str) {
        Some(VERSION) => {}
        Some(other) => return Err(invalid(format!("unsupported version {other:?}"))),
        None => return Err(invalid("missing `version`")),
    }
    let prec = match v.get("precision") {
        Some(p) => Prec::new(p.as_u64().ok_or_else(|| invalid("precision must be an integer"))? as u32),
        None => prec,
    };
    let seed = match v.get("seed") {
        Some(s) => s.as_u64().ok_or_else(|| invalid("seed must be a nonnegative integer"))?,
        None => 1,
    };
    let output = match v.get("output") {
        Some(Value::String(s)) => Some(base.join(s)),
        Some(_) => return Err(invalid("output must be a path string")),
        None => None,
    };
    let list = v.get("experiments").and_then(Value::as_array).ok_or_else(|| invalid("`experiments` must be an array"))?;
    let (names, experiments) = list.iter().map(|x| parse_experiment(x, prec)).collect::<Result<Vec<_>, _>>()?.into_iter().unzip();
    Ok(Config { seed, output, names, experiments })
}

fn run_one(name: &str, exp: &Experiment, seed: u64) -> Outcome {
    let out = |kind, passed, outcome: &str, detail: String| Outcome {
        name: name.to_string(),
        kind,
        passed,
        outcome: outcome.to_string(),
        detail,
    };
    match exp {
        Experiment::Criterion { id } => {
            let rep = criterion(*id, seed).expect("validated id");
            out("criterion", rep.passed, if rep.passed { "ok" } else { "failed" }, format!("criterion {id}: {}", rep.detail))
        }
        Experiment::Lift { saddle, path, w0, expect_exit, opts } => match lift_path(saddle, path, *w0, opts) {
            Ok(l) => {
                let est = format!(
                    "length {:.6e}, estimate {} (max violation {:.2e}, {} samples), drift {:.2e}",
                    l.length,
                    if l.estimate.holds { "holds" } else { "violated" },
                    l.estimate.max_violation,
                    l.estimate.checked,
                    l.quasi_integral_drift()
                );
                match l.exit {
                    Some(x) => out("lift", *expect_exit, "LiftExited", format!("clause {} at t={:.6}; {est}", x.clause, x.t)),
                    None => out("lift", !expect_exit && l.estimate.holds, "ok", est),
                }
            }
            Err(dulac_core::Error::LiftExited(c)) => out("lift", *expect_exit, "LiftExited", format!("clause {c}")),
            Err(err) => out("lift", false, "Error", err.to_string()),
        },
        Experiment::Corner { saddle, points, tolerance, opts } => match corner_map_numeric(saddle, points, opts) {
            Ok(v) => {
                let dev = v.iter().map(|(z, d)| (d - z * saddle.lambda()).norm()).fold(0.0, f64::max);
                let passed = tolerance.is_none_or(|t| dev < t);
                out("corner", passed, "ok", format!("max |d(z) - lambda z| = {dev:.3e} over {} points", v.len()))
            }
            Err(dulac_core::Error::LiftExited(c)) => out("corner", false, "LiftExited", format!("clause {c}")),
            Err(err) => out("corner", false, "Error", err.to_string()),
        },
        Experiment::Classify { spec, expect } => {
            let v = classify_integrability(spec);
            let class = class_name(&v.class);
            let passed = expect.as_deref().is_none_or(|e| e == class);
            out("classify", passed, class, format!("{:?} to degree {}", v.class, v.degree))
        }
    }
}

/// Runs `items` on at most `jobs` threads, preserving order.
pub fn pool_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            let tx = tx.clone();
            let (next, f) = (&next, &f);
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                if tx.send((i, f(&items[i]))).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);
    let mut out: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    for (i, r) in rx {
        out[i] = Some(r);
    }
    out.into_iter().map(|r| r.expect("every item ran")).collect()
}

pub fn run(cfg: &Config, jobs: usize) -> RunReport {
    let idx: Vec<usize> = (0..cfg.experiments.len()).collect();
    let experiments = pool_map(&idx, jobs, |&i| run_one(&cfg.names[i], &cfg.experiments[i], cfg.seed));
    RunReport { version: VERSION, seed: cfg.seed, passed: experiments.iter().all(|o| o.passed), experiments }
}

/// Reads, runs and (if the config names one) writes the report next to the config.
pub fn run_config(path: &Path, prec: Prec, jobs: usize) -> Result<RunReport, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let cfg = parse_config(&text, base, prec)?;
    let report = run(&cfg, jobs);
    if let Some(out) = &cfg.output {
        let body = serde_json::to_string_pretty(&report).expect("serializable report");
        std::fs::write(out, body + "\n").map_err(|source| ConfigError::Io { path: out.clone(), source })?;
    }
    Ok(report)
}

pub fn report_json(r: &RunReport) -> Value {
    json!(r)
}
