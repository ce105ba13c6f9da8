//! JSON forms of series, derivations, germs, saddles, paths and verdicts.
//!
//! Extended-precision reals are written as JSON numbers carrying all working
//! digits; on input either a number or a decimal string is accepted.

use std::str::FromStr;

use dulac_core::derivations::NilpotentDerivation;
use dulac_core::diffeo::{DiffeoGerm, EXACT};
use dulac_core::loopclass::{IntegrabilityClass, IntegrabilityVerdict};
use dulac_core::saddlenum::{BiPoly, PathSpec, PreparedSaddle};
use dulac_core::{Cx, DulacSeries, PolyZ, Prec, Qd};
use num_complex::Complex64 as C64;
use serde_json::{json, Map, Number, Value};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {msg}")]
    Field { field: String, msg: String },
    #[error(transparent)]
    Core(#[from] dulac_core::Error),
}

fn bad(field: &str, msg: impl Into<String>) -> FormatError {
    FormatError::Field { field: field.to_string(), msg: msg.into() }
}

pub fn qd(x: Qd, digits: u32) -> Value {
    let mut s = String::new();
    x.write_sci(&mut s, digits as usize).expect("string write");
    match Number::from_str(&s) {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null,
    }
}

pub fn cx(z: Cx, digits: u32) -> Value {
    json!([qd(z.re, digits), qd(z.im, digits)])
}

pub fn c64(z: C64) -> Value {
    json!([z.re, z.im])
}

fn get<'a>(v: &'a Value, field: &str) -> Result<&'a Value, FormatError> {
    v.get(field).ok_or_else(|| bad(field, "missing"))
}

pub fn read_qd(v: &Value, field: &str) -> Result<Qd, FormatError> {
    let s = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(bad(field, "expected a number")),
    };
    Qd::parse(&s).ok_or_else(|| bad(field, format!("cannot parse {s:?}")))
}

pub fn read_f64(v: &Value, field: &str) -> Result<f64, FormatError> {
    Ok(read_qd(v, field)?.hi())
}

pub fn read_cx(v: &Value, field: &str) -> Result<Cx, FormatError> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(Cx::new(read_qd(re, field)?, read_qd(im, field)?)),
        _ => Err(bad(field, "expected [re, im]")),
    }
}

pub fn read_c64(v: &Value, field: &str) -> Result<C64, FormatError> {
    read_cx(v, field).map(|z| C64::new(z.re.hi(), z.im.hi()))
}

fn read_prec(v: &Value, default: Prec) -> Result<Prec, FormatError> {
    match v.get("precision") {
        None | Some(Value::Null) => Ok(default),
        Some(p) => p.as_u64().map(|d| Prec::new(d as u32)).ok_or_else(|| bad("precision", "expected digits")),
    }
}

fn validity_json(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn terms_json(terms: &[(Qd, PolyZ)], digits: u32) -> Value {
    Value::Array(
        terms
            .iter()
            .map(|(k, p)| {
                let poly: Vec<Value> = p.coeffs().iter().map(|&c| cx(c, digits)).collect();
                json!({ "lambda": qd(*k, digits), "poly": poly })
            })
            .collect(),
    )
}

fn read_terms(v: &Value) -> Result<Vec<(Qd, PolyZ)>, FormatError> {
    let Some(arr) = get(v, "terms")?.as_array() else {
        return Err(bad("terms", "expected an array"));
    };
    arr.iter()
        .map(|t| {
            let k = read_qd(get(t, "lambda")?, "lambda")?;
            let Some(cs) = get(t, "poly")?.as_array() else {
                return Err(bad("poly", "expected an array"));
            };
            let cs = cs.iter().map(|c| read_cx(c, "poly")).collect::<Result<Vec<_>, _>>()?;
            Ok((k, PolyZ::from_coeffs(cs)))
        })
        .collect()
}

fn read_validity(v: &Value) -> Result<f64, FormatError> {
    match v.get("validity") {
        None | Some(Value::Null) => Ok(f64::INFINITY),
        Some(x) => read_f64(x, "validity"),
    }
}

pub fn series_to_json(f: &DulacSeries) -> Value {
    let d = f.prec().digits();
    json!({
        "multiplier": qd(f.multiplier(), d),
        "constant": cx(f.constant(), d),
        "terms": terms_json(f.terms(), d),
        "validity": validity_json(f.validity()),
        "precision": d,
    })
}

pub fn series_from_json(v: &Value, prec: Prec) -> Result<DulacSeries, FormatError> {
    let prec = read_prec(v, prec)?;
    let a = read_qd(get(v, "multiplier")?, "multiplier")?;
    let b = match v.get("constant") {
        Some(c) => read_cx(c, "constant")?,
        None => Cx::ZERO,
    };
    Ok(DulacSeries::new(a, b, read_terms(v)?, read_validity(v)?, prec)?)
}

pub fn derivation_to_json(x: &NilpotentDerivation) -> Value {
    let d = x.prec().digits();
    json!({
        "terms": terms_json(x.terms(), d),
        "validity": validity_json(x.validity()),
        "precision": d,
    })
}

pub fn derivation_from_json(v: &Value, prec: Prec) -> Result<NilpotentDerivation, FormatError> {
    let prec = read_prec(v, prec)?;
    Ok(NilpotentDerivation::new(read_terms(v)?, read_validity(v)?, prec)?)
}

pub fn germ_to_json(g: &DiffeoGerm) -> Value {
    let d = g.prec().digits();
    let order = if g.is_exact() { Value::Null } else { json!(g.order()) };
    let coeffs: Vec<Value> = g.coeffs().iter().map(|&c| cx(c, d)).collect();
    json!({ "coeffs": coeffs, "order": order, "precision": d })
}

pub fn germ_from_json(v: &Value, prec: Prec) -> Result<DiffeoGerm, FormatError> {
    let prec = read_prec(v, prec)?;
    let Some(cs) = get(v, "coeffs")?.as_array() else {
        return Err(bad("coeffs", "expected an array"));
    };
    let cs = cs.iter().map(|c| read_cx(c, "coeffs")).collect::<Result<Vec<_>, _>>()?;
    let order = match v.get("order") {
        None | Some(Value::Null) => EXACT,
        Some(o) => o.as_u64().ok_or_else(|| bad("order", "expected a positive integer"))? as usize,
    };
    Ok(DiffeoGerm::new(cs, order, prec)?)
}

/// `{"lambda", "n", "k": [[i, j, [re, im]], …], "eps", "a", "b", "sigma"}`; `k` absent means linear.
pub fn saddle_from_json(v: &Value) -> Result<PreparedSaddle, FormatError> {
    let lambda = read_f64(get(v, "lambda")?, "lambda")?;
    let Some(k) = v.get("k") else {
        let s = PreparedSaddle::linear(lambda)?;
        return Ok(match v.get("sigma") {
            Some(sg) => s.with_sigma(read_c64(sg, "sigma")?),
            None => s,
        });
    };
    let Some(terms) = k.as_array() else {
        return Err(bad("k", "expected an array of [i, j, [re, im]]"));
    };
    let terms = terms
        .iter()
        .map(|t| match t.as_array().map(Vec::as_slice) {
            Some([i, j, c]) => {
                let i = i.as_u64().ok_or_else(|| bad("k", "exponent must be a nonnegative integer"))?;
                let j = j.as_u64().ok_or_else(|| bad("k", "exponent must be a nonnegative integer"))?;
                Ok((i as u32, j as u32, read_c64(c, "k")?))
            }
            _ => Err(bad("k", "expected [i, j, [re, im]]")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let num = |f: &str, d: f64| v.get(f).map_or(Ok(d), |x| read_f64(x, f));
    let n = match v.get("n") {
        Some(n) => n.as_u64().ok_or_else(|| bad("n", "expected a positive integer"))? as u32,
        None => (lambda.ceil() as u32).max(1),
    };
    let s = PreparedSaddle::new(lambda, n, BiPoly::new(terms), num("eps", 0.0)?, num("a", 2.0)?, num("b", 2.0)?)?;
    Ok(match v.get("sigma") {
        Some(sg) => s.with_sigma(read_c64(sg, "sigma")?),
        None => s,
    })
}

/// `{"kind": "radial"|"circular", "z0", "t"}`, `{"kind": "exponential", "alpha", "c", "t", "backward"}`
/// or `{"kind": "polyline", "points"}`.
pub fn path_from_json(v: &Value) -> Result<PathSpec, FormatError> {
    let kind = get(v, "kind")?.as_str().ok_or_else(|| bad("kind", "expected a string"))?;
    let t = || read_f64(get(v, "t")?, "t");
    let z0 = || v.get("z0").map_or(Ok(C64::new(0.0, 0.0)), |z| read_c64(z, "z0"));
    Ok(match kind {
        "radial" => PathSpec::Radial { z0: z0()?, t: t()? },
        "circular" => PathSpec::Circular { z0: z0()?, t: t()? },
        "exponential" => PathSpec::Exponential {
            alpha: read_f64(get(v, "alpha")?, "alpha")?,
            c: get(v, "c")?.as_i64().ok_or_else(|| bad("c", "expected +1 or -1"))? as i8,
            t: t()?,
            backward: v.get("backward").and_then(Value::as_bool).unwrap_or(false),
        },
        "polyline" => {
            let Some(pts) = get(v, "points")?.as_array() else {
                return Err(bad("points", "expected an array"));
            };
            PathSpec::Polyline(pts.iter().map(|p| read_c64(p, "points")).collect::<Result<_, _>>()?)
        }
        other => return Err(bad("kind", format!("unknown path kind {other:?}"))),
    })
}

pub fn class_name(c: &IntegrabilityClass) -> &'static str {
    match c {
        IntegrabilityClass::Linear => "Linear",
        IntegrabilityClass::Bernoulli { .. } => "Bernoulli",
        IntegrabilityClass::PoincareDulac { .. } => "PoincareDulac",
        IntegrabilityClass::NotIntegrable => "NotIntegrable",
        IntegrabilityClass::Inconclusive { .. } => "Inconclusive",
    }
}

pub fn verdict_to_json(v: &IntegrabilityVerdict, digits: u32) -> Value {
    let mut cert = Map::new();
    for (k, x) in &v.certificate {
        cert.insert((*k).to_string(), json!(x));
    }
    let params = match &v.class {
        IntegrabilityClass::Bernoulli { order } => json!({ "order": order }),
        IntegrabilityClass::PoincareDulac { k, mu, nu } => json!({ "k": k, "mu": cx(*mu, digits), "nu": cx(*nu, digits) }),
        IntegrabilityClass::Inconclusive { degree } => json!({ "degree": degree }),
        _ => json!({}),
    };
    json!({
        "class": class_name(&v.class),
        "certificate": cert,
        "degree": v.degree,
        "params": params,
        "caveat": v.caveat,
    })
}
