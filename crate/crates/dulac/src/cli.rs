//! The `dulac` command line.
//!
//! Series, derivation and germ arguments are inline text in the series grammar,
//! `@path` to read a file, or a JSON object (anything starting with `{`).
//! Saddles, paths and gluings for the numeric verbs are JSON.
//!
//! Exit codes: 0 success, 1 failed operation or assertion, 2 usage, parse or config error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use dulac_core::derivations::{self as der, ConstantChoice, NilpotentDerivation};
use dulac_core::diffeo::{gh_dichotomy, lift_pi, project_pi, variation_pair, DiffeoGerm, GhVerdict};
use dulac_core::loopclass::{classify_integrability, LoopGermSpec, Saddle};
use dulac_core::rigidity::{conjugate_to_model, ModelGerm};
use dulac_core::saddlenum::{self as sn, LiftOptions, PreparedSaddle, Transversal};
use dulac_core::{Cx, DulacSeries, Prec, Qd};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use crate::config::{self, ConfigError};
use crate::grammar::{self, ParseError};
use crate::json::{self as js, FormatError};
use crate::suite::{criterion, CRITERIA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "dulac", version, about = "Formal Dulac series, nilpotent derivations and saddle-loop numerics")]
pub struct Cli {
    /// Working precision in decimal digits (16..=60).
    #[arg(long, global = true, env = "DULAC_PRECISION", default_value_t = 50)]
    pub precision: u32,
    /// Default validity for series and derivations without an `O(E[v])` term.
    #[arg(long, global = true)]
    pub validity: Option<f64>,
    /// Truncation order applied to germ inputs.
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    #[arg(long, global = true, default_value_t = 20240611)]
    pub seed: u64,
    /// Worker threads for batch runs.
    #[arg(long, global = true, default_value_t = default_jobs())]
    pub jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Sigma,
    Omega,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// f ∘ g.
    Compose { f: String, g: String },
    Invert { f: String },
    /// f ∘ τ ∘ f⁻¹ ∘ τ⁻¹.
    Var { f: String },
    /// Dynamic type and ramification.
    Classify { f: String },
    /// Normal form of a derivation (unramified, or mildly ramified otherwise).
    NormalForm { x: String },
    Lvar { x: String },
    LvarInv {
        z: String,
        /// Section constant `LAMBDA=RE,IM` at an integer key; repeatable.
        #[arg(long = "constant", value_name = "LAMBDA=RE,IM")]
        constants: Vec<String>,
    },
    Exp { x: String },
    Log { f: String },
    /// Unramified series to a germ at 0.
    Project { f: String },
    /// Germ at 0 to a series.
    Lift {
        g: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        branch: i64,
    },
    ConjugateModel { f: String },
    /// Commutation test: one mildly ramified series, or two germs.
    Gh {
        #[arg(num_args = 1..=2, required = true)]
        inputs: Vec<String>,
    },
    LiftPath {
        /// Saddle JSON.
        saddle: String,
        /// Path JSON.
        path: String,
        /// Initial `w = -ln y` as `RE,IM`.
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        w0: String,
        /// Disable the length-based exit prediction.
        #[arg(long)]
        reactive: bool,
    },
    /// Corner map in the log chart at the given `RE,IM` points.
    Corner {
        saddle: String,
        #[arg(required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// One lap holonomy at points of a transversal.
    Holonomy {
        saddle: String,
        #[arg(long, value_enum, default_value_t = Which::Omega)]
        transversal: Which,
        #[arg(required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Poincaré map `R ∘ D` at points `x`.
    Poincare {
        saddle: String,
        gluing: String,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        #[arg(required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Integrability class of a saddle loop.
    Integrability {
        /// `{"linear": λ}` or `{"poincare_dulac": {"k": k, "mu": [re, im]}}`.
        saddle: String,
        gluing: String,
    },
    /// Run acceptance criteria (all by default).
    CheckSuite {
        #[arg(long = "criterion", value_parser = clap::value_parser!(u8).range(1..=10))]
        criteria: Vec<u8>,
    },
    /// Run an experiment config.
    Run { config: PathBuf },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Op(#[from] dulac_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Op(_) => 1,
            CliError::Format(FormatError::Core(_)) => 1,
            _ => 2,
        }
    }
}

/// One command's result in all three output shapes.
struct Out {
    text: String,
    json: Value,
    csv: Vec<Vec<String>>,
    ok: bool,
}

impl Out {
    fn new(text: String, json: Value, csv: Vec<Vec<String>>) -> Out {
        Out { text, json, csv, ok: true }
    }
}

struct Ctx {
    prec: Prec,
    validity: Option<f64>,
    degree: Option<usize>,
    seed: u64,
    jobs: usize,
}

fn load(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix('@') {
        Some(p) => Ok(std::fs::read_to_string(p)?),
        None => Ok(arg.to_string()),
    }
}

fn as_json(text: &str) -> Result<Option<Value>, CliError> {
    if text.trim_start().starts_with('{') {
        Ok(Some(serde_json::from_str(text).map_err(FormatError::from)?))
    } else {
        Ok(None)
    }
}

impl Ctx {
    fn series(&self, arg: &str) -> Result<DulacSeries, CliError> {
        let t = load(arg)?;
        match as_json(&t)? {
            Some(v) => Ok(js::series_from_json(&v, self.prec)?),
            None => Ok(grammar::parse_series(&t, self.validity, self.prec)?),
        }
    }

    fn derivation(&self, arg: &str) -> Result<NilpotentDerivation, CliError> {
        let t = load(arg)?;
        match as_json(&t)? {
            Some(v) => Ok(js::derivation_from_json(&v, self.prec)?),
            None => Ok(grammar::parse_derivation(&t, self.validity, self.prec)?),
        }
    }

    fn germ(&self, arg: &str) -> Result<DiffeoGerm, CliError> {
        let t = load(arg)?;
        let g = match as_json(&t)? {
            Some(v) => js::germ_from_json(&v, self.prec)?,
            None => grammar::parse_germ(&t, self.prec)?,
        };
        Ok(match self.degree {
            Some(d) => g.with_order(d),
            None => g,
        })
    }

    fn value(&self, arg: &str) -> Result<Value, CliError> {
        let t = load(arg)?;
        Ok(serde_json::from_str(&t).map_err(FormatError::from)?)
    }

    fn saddle(&self, arg: &str) -> Result<PreparedSaddle, CliError> {
        Ok(js::saddle_from_json(&self.value(arg)?)?)
    }

    fn digits(&self) -> u32 {
        self.prec.digits()
    }
}

fn point(s: &str) -> Result<C64, CliError> {
    let bad = || CliError::Usage(format!("expected a complex point RE,IM, got {s:?}"));
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    Ok(C64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?))
}

fn points(v: &[String]) -> Result<Vec<C64>, CliError> {
    v.iter().map(|s| point(s)).collect()
}

fn sci(x: Qd, digits: u32) -> String {
    let mut s = String::new();
    x.write_sci(&mut s, digits as usize).expect("string write");
    s
}

fn cx_text(z: Cx, digits: u32) -> String {
    format!("({},{})", sci(z.re, digits), sci(z.im, digits))
}

fn terms_csv(terms: &[(Qd, dulac_core::PolyZ)], digits: u32) -> Vec<Vec<String>> {
    let mut rows = vec![vec!["lambda".into(), "degree".into(), "re".into(), "im".into()]];
    for (k, p) in terms {
        for (j, c) in p.coeffs().iter().enumerate() {
            rows.push(vec![sci(*k, digits), j.to_string(), sci(c.re, digits), sci(c.im, digits)]);
        }
    }
    rows
}

fn series_out(f: &DulacSeries) -> Out {
    let d = f.prec().digits();
    let mut csv = terms_csv(f.terms(), d);
    csv.insert(1, vec!["multiplier".into(), "0".into(), sci(f.multiplier(), d), "0".into()]);
    csv.insert(2, vec!["constant".into(), "0".into(), sci(f.constant().re, d), sci(f.constant().im, d)]);
    Out::new(grammar::print_series(f), js::series_to_json(f), csv)
}

fn derivation_out(x: &NilpotentDerivation) -> Out {
    Out::new(grammar::print_derivation(x), js::derivation_to_json(x), terms_csv(x.terms(), x.prec().digits()))
}

fn germ_out(g: &DiffeoGerm) -> Out {
    let d = g.prec().digits();
    let mut csv = vec![vec!["degree".into(), "re".into(), "im".into()]];
    for (j, c) in g.coeffs().iter().enumerate() {
        csv.push(vec![(j + 1).to_string(), sci(c.re, d), sci(c.im, d)]);
    }
    Out::new(grammar::print_germ(g), js::germ_to_json(g), csv)
}

/// Key/value records: text lines, a JSON object, two-column CSV.
fn record(fields: Vec<(&str, Value)>) -> Out {
    let text = fields.iter().map(|(k, v)| format!("{k}: {}", plain(v))).collect::<Vec<_>>().join("\n");
    let mut csv = vec![vec!["key".into(), "value".into()]];
    csv.extend(fields.iter().map(|(k, v)| vec![k.to_string(), plain(v)]));
    let json = Value::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect());
    Out::new(text, json, csv)
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn point_table(header: [&str; 2], rows: &[(C64, C64)], extra: Vec<(&str, Value)>) -> Out {
    let text = rows.iter().map(|(a, b)| format!("{} {} -> {} {}", a.re, a.im, b.re, b.im)).collect::<Vec<_>>().join("\n");
    let mut csv = vec![vec![format!("{}_re", header[0]), format!("{}_im", header[0]), format!("{}_re", header[1]), format!("{}_im", header[1])]];
    csv.extend(rows.iter().map(|(a, b)| vec![a.re.to_string(), a.im.to_string(), b.re.to_string(), b.im.to_string()]));
    let list: Vec<Value> = rows.iter().map(|(a, b)| json!({ header[0]: js::c64(*a), header[1]: js::c64(*b) })).collect();
    let mut obj = serde_json::Map::new();
    for (k, v) in extra {
        obj.insert(k.to_string(), v);
    }
    obj.insert("points".into(), Value::Array(list));
    Out::new(text, Value::Object(obj), csv)
}

fn constant_choice(specs: &[String]) -> Result<ConstantChoice, CliError> {
    let mut v = Vec::new();
    for s in specs {
        let bad = || CliError::Usage(format!("expected LAMBDA=RE,IM, got {s:?}"));
        let (k, c) = s.split_once('=').ok_or_else(bad)?;
        let k = Qd::parse(k.trim()).ok_or_else(bad)?;
        let (re, im) = c.split_once(',').unwrap_or((c, "0"));
        let re = Qd::parse(re.trim()).ok_or_else(bad)?;
        let im = Qd::parse(im.trim()).ok_or_else(bad)?;
        v.push((k, Cx::new(re, im)));
    }
    Ok(ConstantChoice::new(v))
}

fn loop_saddle(v: &Value) -> Result<Saddle, CliError> {
    if let Some(l) = v.get("linear") {
        return Ok(Saddle::Linearizable { lambda: js::read_qd(l, "linear")? });
    }
    if let Some(pd) = v.get("poincare_dulac") {
        let k = pd.get("k").and_then(Value::as_u64).filter(|&k| k > 0);
        let k = k.ok_or_else(|| CliError::Usage("poincare_dulac.k must be a positive integer".into()))?;
        let mu = js::read_cx(pd.get("mu").unwrap_or(&Value::Null), "mu")?;
        return Ok(Saddle::PoincareDulac { k: k as usize, mu });
    }
    Err(CliError::Usage("saddle needs `linear` or `poincare_dulac`".into()))
}

fn execute(cmd: &Command, cx: &Ctx) -> Result<Out, CliError> {
    let d = cx.digits();
    Ok(match cmd {
        Command::Compose { f, g } => series_out(&cx.series(f)?.compose(&cx.series(g)?)),
        Command::Invert { f } => series_out(&cx.series(f)?.invert()),
        Command::Var { f } => series_out(&cx.series(f)?.variation()),
        Command::Classify { f } => {
            let f = cx.series(f)?;
            let c = f.classify();
            record(vec![
                ("type", json!(format!("{:?}", c.kind))),
                ("boundary", json!(c.boundary)),
                ("unramified", json!(f.is_unramified())),
                ("mildly_ramified", json!(f.is_mildly_ramified())),
                ("validity", json!(f.validity())),
                ("precision", json!(d)),
            ])
        }
        Command::NormalForm { x } => {
            let x = cx.derivation(x)?;
            if x.is_unramified() {
                let nf = der::normal_form_unramified(&x)?;
                record(vec![
                    ("kind", json!("unramified")),
                    ("k", json!(nf.k)),
                    ("mu", js::cx(nf.mu, d)),
                    ("conjugator", json!(grammar::print_series(&nf.conjugator))),
                    ("remainder", json!(grammar::print_derivation(&nf.remainder))),
                    ("precision", json!(d)),
                ])
            } else {
                let nf = der::normal_form_mildly_ramified(&x)?;
                record(vec![
                    ("kind", json!("mildly_ramified")),
                    ("k", json!(nf.k)),
                    ("a", js::cx(nf.a, d)),
                    ("b", js::cx(nf.b, d)),
                    ("mu", js::cx(nf.mu, d)),
                    ("conjugator", json!(grammar::print_series(&nf.conjugator))),
                    ("form", json!(grammar::print_derivation(&nf.form))),
                    ("precision", json!(d)),
                ])
            }
        }
        Command::Lvar { x } => derivation_out(&cx.derivation(x)?.lvar()),
        Command::LvarInv { z, constants } => {
            derivation_out(&der::lvar_inverse(&cx.derivation(z)?, &constant_choice(constants)?)?)
        }
        Command::Exp { x } => series_out(&cx.derivation(x)?.exp_derivation()),
        Command::Log { f } => derivation_out(&der::log_series(&cx.series(f)?)?),
        Command::Project { f } => germ_out(&project_pi(&cx.series(f)?)?),
        Command::Lift { g, branch } => series_out(&lift_pi(&cx.germ(g)?, *branch)),
        Command::ConjugateModel { f } => {
            let c = conjugate_to_model(&cx.series(f)?)?;
            let model = match c.model {
                ModelGerm::Scaling(a) => format!("{} z", sci(a, d)),
                ModelGerm::Translation(b) => format!("z + {}", cx_text(b, d)),
            };
            record(vec![
                ("model", json!(model)),
                ("phi", json!(grammar::print_series(&c.phi))),
                ("residual", json!(c.residual)),
                ("precision", json!(d)),
            ])
        }
        Command::Gh { inputs } => {
            let (g, h) = match inputs.as_slice() {
                [f] => variation_pair(&cx.series(f)?)?,
                [g, h] => (cx.germ(g)?, cx.germ(h)?),
                _ => unreachable!("clap enforces one or two inputs"),
            };
            let r = gh_dichotomy(&g, &h)?;
            let mut fields = match r.verdict {
                GhVerdict::NonCommuting { degree, coefficient } => vec![
                    ("verdict", json!("NonCommuting")),
                    ("degree", json!(degree)),
                    ("coefficient", js::cx(coefficient, d)),
                ],
                GhVerdict::EmbeddedFlow { k, nu } => {
                    vec![("verdict", json!("EmbeddedFlow")), ("k", json!(k)), ("nu", js::cx(nu, d))]
                }
                GhVerdict::IdenticalVariations { k } => vec![("verdict", json!("IdenticalVariations")), ("k", json!(k))],
            };
            fields.push(("order", json!(r.order)));
            fields.push(("formal_only", json!(r.formal_only)));
            fields.push(("commutator_residual", json!(r.commutator_residual)));
            record(fields)
        }
        Command::LiftPath { saddle, path, w0, reactive } => {
            let s = cx.saddle(saddle)?;
            let p = js::path_from_json(&cx.value(path)?)?;
            let opts = LiftOptions { predictive: !reactive, ..LiftOptions::default() };
            let l = sn::lift_path(&s, &p, point(w0)?, &opts)?;
            let end = l.end();
            let exit = l.exit.map_or(Value::Null, |x| json!({ "clause": x.clause.name(), "t": x.t, "z": js::c64(x.z) }));
            let mut out = record(vec![
                ("end_z", js::c64(end.z)),
                ("end_w", js::c64(end.phi)),
                ("length", json!(l.length)),
                ("exit", exit),
                ("estimate_applicable", json!(l.estimate.applicable)),
                ("estimate_holds", json!(l.estimate.holds)),
                ("estimate_max_violation", json!(l.estimate.max_violation)),
                ("quasi_integral_drift", json!(l.quasi_integral_drift())),
                ("samples", json!(l.samples.len())),
            ]);
            out.ok = l.exit.is_none();
            out
        }
        Command::Corner { saddle, points: ps } => {
            let s = cx.saddle(saddle)?;
            let v = sn::corner_map_numeric(&s, &points(ps)?, &LiftOptions::default())?;
            point_table(["z", "d"], &v, vec![("lambda", json!(s.lambda()))])
        }
        Command::Holonomy { saddle, transversal, points: ps } => {
            let s = cx.saddle(saddle)?;
            let which = match transversal {
                Which::Sigma => Transversal::Sigma,
                Which::Omega => Transversal::Omega,
            };
            let opts = LiftOptions::default();
            let v = points(ps)?
                .into_iter()
                .map(|p| sn::holonomy_numeric(&s, which, p, &opts).map(|h| (p, h)))
                .collect::<Result<Vec<_>, _>>()?;
            point_table(["x", "h"], &v, vec![("transversal", json!(format!("{transversal:?}").to_lowercase()))])
        }
        Command::Poincare { saddle, gluing, radius, points: ps } => {
            let s = cx.saddle(saddle)?;
            let r = cx.germ(gluing)?;
            let v = sn::poincare_numeric(&s, &r, &points(ps)?, *radius, &LiftOptions::default())?;
            point_table(["x", "p"], &v, vec![("radius", json!(radius)), ("gluing_order", json!(r.order()))])
        }
        Command::Integrability { saddle, gluing } => {
            let spec = LoopGermSpec { saddle: loop_saddle(&cx.value(saddle)?)?, gluing: cx.germ(gluing)? };
            let v = classify_integrability(&spec);
            let j = js::verdict_to_json(&v, d);
            let mut fields: Vec<(&str, Value)> = vec![("class", j["class"].clone()), ("degree", j["degree"].clone())];
            for (k, x) in &v.certificate {
                fields.push((k, json!(x)));
            }
            if let Some(c) = v.caveat {
                fields.push(("caveat", json!(c)));
            }
            let mut out = record(fields);
            out.json = j;
            out
        }
        Command::CheckSuite { criteria } => {
            let ids: Vec<u8> = if criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { criteria.clone() };
            let reps = config::pool_map(&ids, cx.jobs, |&id| criterion(id, cx.seed).expect("id in range"));
            let text = reps
                .iter()
                .map(|r| format!("criterion {} [{}] {}: {}", r.id, if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail))
                .collect::<Vec<_>>()
                .join("\n");
            let mut csv = vec![vec!["id".into(), "name".into(), "passed".into(), "detail".into()]];
            csv.extend(reps.iter().map(|r| vec![r.id.to_string(), r.name.to_string(), r.passed.to_string(), r.detail.clone()]));
            let ok = reps.iter().all(|r| r.passed);
            Out { text, json: json!({ "seed": cx.seed, "passed": ok, "criteria": reps }), csv, ok }
        }
        Command::Run { config: path } => {
            let rep = config::run_config(path, cx.prec, cx.jobs)?;
            let text = rep
                .experiments
                .iter()
                .map(|o| format!("{} [{}] {}: {}", o.name, if o.passed { "PASS" } else { "FAIL" }, o.outcome, o.detail))
                .collect::<Vec<_>>()
                .join("\n");
            let mut csv = vec![vec!["name".into(), "kind".into(), "passed".into(), "outcome".into(), "detail".into()]];
            csv.extend(rep.experiments.iter().map(|o| {
                vec![o.name.clone(), o.kind.into(), o.passed.to_string(), o.outcome.clone(), o.detail.clone()]
            }));
            Out { text, json: config::report_json(&rep), csv, ok: rep.passed }
        }
    })
}

fn emit(out: &Out, format: Format, w: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Text => writeln!(w, "{}", out.text),
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&out.json).expect("serializable")),
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            for row in &out.csv {
                c.write_record(row)?;
            }
            c.flush()
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            let code = match e.kind() {
                DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 2,
            };
            let _ = if code == 0 { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    let cx = Ctx {
        prec: Prec::new(cli.precision),
        validity: cli.validity,
        degree: cli.degree,
        seed: cli.seed,
        jobs: cli.jobs.max(1),
    };
    match execute(&cli.command, &cx) {
        Ok(o) => {
            if let Err(e) = emit(&o, cli.format, out) {
                let _ = writeln!(err, "dulac: {e}");
                return 2;
            }
            i32::from(!o.ok)
        }
        Err(e) => {
            let _ = writeln!(err, "dulac: {e}");
            e.code()
        }
    }
}
