//! Text grammar for series, derivations and germs.
//!
//! ```text
//! expr    := ['+'|'-'] product (('+'|'-') product)*
//! product := factor ('*' factor)*
//! factor  := NUMBER | 'i' | '(' NUMBER ',' NUMBER ')' | VAR ['^' INT]
//!          | 'E' '[' NUMBER ']' | '(' expr ')' | 'O' '(' ... ')'
//! ```
//!
//! `VAR` is `z` for series and derivations and `x` for germs. `E[λ]` is
//! `e^{-λz}`. A trailing `O(E[Λ])` (or `O(x^N)`) records the truncation.
//! Whitespace is ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dulac_core::derivations::NilpotentDerivation;
use dulac_core::diffeo::{DiffeoGerm, EXACT};
use dulac_core::{Cx, DulacSeries, PolyZ, Prec, Qd};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("parse error at {pos}: expected {}, found {found:?}", expected.join(" or "))]
pub struct ParseError {
    pub pos: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tok {
    Num(usize, usize),
    Ident(char),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    at: usize,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let ch = b[i] as char;
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            // exponent, but not the series marker `E[`
            if i < b.len() && (b[i] == b'e' || (b[i] == b'E' && b.get(i + 1) != Some(&b'['))) {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            out.push((s, Tok::Num(s, i)));
        } else if "+-*^(),[]".contains(ch) {
            out.push((i, Tok::Sym(ch)));
            i += 1;
        } else if "zxiEO".contains(ch) {
            out.push((i, Tok::Ident(ch)));
            i += 1;
        } else {
            let found = src[i..].chars().next().map(String::from).unwrap_or_default();
            return Err(ParseError { pos: i, expected: vec!["a number, symbol or variable"], found });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

/// Sum of `P_λ(var) E[λ]`; key `None` is the part without `E`.
type Expr = BTreeMap<Key, PolyZ>;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
struct Key(Option<Qd>);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.partial_cmp(o).unwrap_or(std::cmp::Ordering::Equal)
    }
}

enum Trunc {
    Exp(Qd),
    Pow(u32),
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Tok {
        self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn fail<T>(&self, expected: &[&'static str]) -> Result<T, ParseError> {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Num(s, e) => self.src[s..e].to_string(),
            Tok::Ident(c) | Tok::Sym(c) => c.to_string(),
        };
        Err(ParseError { pos: self.pos(), expected: expected.to_vec(), found })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Tok::Sym(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, name: &'static str) -> Result<(), ParseError> {
        if self.eat(c) { Ok(()) } else { self.fail(&[name]) }
    }

    fn number(&mut self) -> Result<Qd, ParseError> {
        let neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        match self.peek() {
            Tok::Num(s, e) => {
                let Some(v) = Qd::parse(&self.src[s..e]) else {
                    return self.fail(&["a decimal number"]);
                };
                self.at += 1;
                Ok(if neg { -v } else { v })
            }
            _ => self.fail(&["a number"]),
        }
    }

    fn int(&mut self) -> Result<u32, ParseError> {
        let p = self.pos();
        let v = self.number()?;
        if v.hi() < 0.0 || v.hi().fract() != 0.0 || v.hi() > 1e6 {
            return Err(ParseError { pos: p, expected: vec!["a nonnegative integer"], found: v.to_string() });
        }
        Ok(v.hi() as u32)
    }

    fn expr(&mut self, var: char, trunc: &mut Option<Trunc>) -> Result<Expr, ParseError> {
        let mut acc = Expr::new();
        let mut sign = if self.eat('-') {
            -1.0
        } else {
            self.eat('+');
            1.0
        };
        loop {
            if self.peek() == Tok::Ident('O') {
                if trunc.is_some() {
                    return self.fail(&["at most one O(...) term"]);
                }
                *trunc = Some(self.big_o(var)?);
            } else {
                let t = self.product(var, trunc)?;
                for (k, p) in t {
                    let e = acc.entry(k).or_insert_with(PolyZ::zero);
                    e.add_scaled(&p, Cx::from_f64(sign, 0.0));
                }
            }
            sign = if self.eat('+') {
                1.0
            } else if self.eat('-') {
                -1.0
            } else {
                return Ok(acc);
            };
        }
    }

    fn big_o(&mut self, var: char) -> Result<Trunc, ParseError> {
        self.at += 1;
        self.expect('(', "'('")?;
        let t = if var == 'x' {
            if self.peek() != Tok::Ident('x') {
                return self.fail(&["'x'"]);
            }
            self.at += 1;
            self.expect('^', "'^'")?;
            Trunc::Pow(self.int()?)
        } else {
            if self.peek() != Tok::Ident('E') {
                return self.fail(&["'E'"]);
            }
            self.at += 1;
            self.expect('[', "'['")?;
            let v = self.number()?;
            self.expect(']', "']'")?;
            Trunc::Exp(v)
        };
        self.expect(')', "')'")?;
        Ok(t)
    }

    fn product(&mut self, var: char, trunc: &mut Option<Trunc>) -> Result<Expr, ParseError> {
        let mut acc = self.factor(var, trunc)?;
        while self.eat('*') {
            let f = self.factor(var, trunc)?;
            acc = mul(&acc, &f);
        }
        Ok(acc)
    }

    fn factor(&mut self, var: char, trunc: &mut Option<Trunc>) -> Result<Expr, ParseError> {
        let unit = |p: PolyZ| Expr::from([(Key(None), p)]);
        match self.peek() {
            Tok::Num(..) => Ok(unit(PolyZ::constant(Cx::real(self.number()?)))),
            Tok::Ident('i') => {
                self.at += 1;
                Ok(unit(PolyZ::constant(Cx::I)))
            }
            Tok::Ident(v) if v == var => {
                self.at += 1;
                let e = if self.eat('^') { self.int()? as usize } else { 1 };
                let mut cs = vec![Cx::ZERO; e + 1];
                cs[e] = Cx::ONE;
                Ok(unit(PolyZ::from_coeffs(cs)))
            }
            Tok::Ident('E') if var == 'z' => {
                self.at += 1;
                self.expect('[', "'['")?;
                let p = self.pos();
                let l = self.number()?;
                if l.hi() <= 0.0 {
                    return Err(ParseError { pos: p, expected: vec!["a positive exponent"], found: l.to_string() });
                }
                self.expect(']', "']'")?;
                Ok(Expr::from([(Key(Some(l)), PolyZ::constant(Cx::ONE))]))
            }
            Tok::Sym('(') => {
                // complex literal or parenthesized expression
                let save = self.at;
                self.at += 1;
                if let Ok(re) = self.number() {
                    if self.eat(',') {
                        let im = self.number()?;
                        self.expect(')', "')'")?;
                        return Ok(unit(PolyZ::constant(Cx::new(re, im))));
                    }
                }
                self.at = save + 1;
                let e = self.expr(var, trunc)?;
                self.expect(')', "')'")?;
                Ok(e)
            }
            _ => self.fail(&["a number", "'('", if var == 'x' { "'x'" } else { "'z' or 'E[...]'" }]),
        }
    }
}

fn mul(a: &Expr, b: &Expr) -> Expr {
    let mut out = Expr::new();
    for (ka, pa) in a {
        for (kb, pb) in b {
            let k = match (ka.0, kb.0) {
                (None, k) | (k, None) => k,
                (Some(x), Some(y)) => Some(x + y),
            };
            let e = out.entry(Key(k)).or_insert_with(PolyZ::zero);
            *e = e.add(&pa.mul(pb));
        }
    }
    out
}

fn parse_expr(text: &str, var: char) -> Result<(Expr, Option<Trunc>), ParseError> {
    let mut lx = Lexer { src: text, toks: lex(text)?, at: 0 };
    let mut trunc = None;
    let e = lx.expr(var, &mut trunc)?;
    if lx.peek() != Tok::End {
        return lx.fail(&["'+'", "'-'", "'*'", "end of input"]);
    }
    Ok((e, trunc))
}

fn whole(found: &str, expected: &'static str) -> ParseError {
    ParseError { pos: 0, expected: vec![expected], found: found.to_string() }
}

fn tail_terms(e: &Expr) -> Vec<(Qd, PolyZ)> {
    e.iter().filter_map(|(k, p)| k.0.map(|l| (l, p.clone()))).collect()
}

fn validity_of(trunc: &Option<Trunc>, default: Option<f64>) -> Option<f64> {
    match trunc {
        Some(Trunc::Exp(v)) => Some(v.hi()),
        _ => default,
    }
}

/// Parses `a*z + b + Σ P(z)*E[λ] [+ O(E[Λ])]`.
///
/// Without an `O` term the validity is `default_validity`, else the largest key;
/// a series with no exponential terms is then exact.
pub fn parse_series(text: &str, default_validity: Option<f64>, prec: Prec) -> Result<DulacSeries, ParseError> {
    let (e, trunc) = parse_expr(text, 'z')?;
    let plain = e.get(&Key(None)).cloned().unwrap_or_else(PolyZ::zero);
    if plain.degree().unwrap_or(0) > 1 {
        return Err(whole(text, "a*z + b with polynomial parts only in front of E[...]"));
    }
    let a = plain.coeff(1);
    if a.im.hi().abs() > prec.eps() || a.re.hi() <= 0.0 {
        return Err(whole(text, "a positive real multiplier of z"));
    }
    let v = validity_of(&trunc, default_validity).unwrap_or(f64::INFINITY);
    DulacSeries::new(a.re, plain.coeff(0), tail_terms(&e), v, prec).map_err(|err| whole(text, leak(err.to_string())))
}

/// Parses `Σ P(z)*E[λ] [+ O(E[Λ])]`, the coefficient of `∂/∂z`.
pub fn parse_derivation(text: &str, default_validity: Option<f64>, prec: Prec) -> Result<NilpotentDerivation, ParseError> {
    let (e, trunc) = parse_expr(text, 'z')?;
    if e.get(&Key(None)).is_some_and(|p| !p.clone().chop(prec.eps()).is_zero()) {
        return Err(whole(text, "only E[...] terms in a derivation"));
    }
    let terms = tail_terms(&e);
    let Some(v) = validity_of(&trunc, default_validity).or_else(|| terms.iter().map(|(k, _)| k.hi()).reduce(f64::max))
    else {
        return Err(whole(text, "O(E[...]) or a validity for the zero derivation"));
    };
    NilpotentDerivation::new(terms, v, prec).map_err(|err| whole(text, leak(err.to_string())))
}

/// Parses `c1*x + c2*x^2 + … [+ O(x^N)]`; without `O` the germ is exact.
pub fn parse_germ(text: &str, prec: Prec) -> Result<DiffeoGerm, ParseError> {
    let (e, trunc) = parse_expr(text, 'x')?;
    let p = e.get(&Key(None)).cloned().unwrap_or_else(PolyZ::zero);
    if p.coeff(0).abs_f64() > prec.eps() {
        return Err(whole(text, "a germ fixing the origin"));
    }
    let order = match trunc {
        Some(Trunc::Pow(n)) if n >= 2 => n as usize - 1,
        Some(_) => return Err(whole(text, "O(x^N) with N >= 2")),
        None => EXACT,
    };
    let deg = p.degree().unwrap_or(0);
    if order != EXACT && deg > order {
        return Err(whole(text, "no terms at or beyond the O(x^N) term"));
    }
    let cs: Vec<Cx> = (1..=deg.max(1)).map(|j| p.coeff(j)).collect();
    DiffeoGerm::new(cs, order, prec).map_err(|err| whole(text, leak(err.to_string())))
}

fn leak(s: String) -> &'static str {
    // error messages are few and short-lived processes print them once
    Box::leak(s.into_boxed_str())
}

fn num(out: &mut String, x: Qd, digits: usize) {
    x.write_sci(out, digits).expect("string write");
}

fn complex(out: &mut String, c: Cx, digits: usize) {
    out.push('(');
    num(out, c.re, digits);
    out.push(',');
    num(out, c.im, digits);
    out.push(')');
}

fn poly(out: &mut String, p: &PolyZ, var: char, digits: usize) {
    let mut first = true;
    for (j, &c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if !first {
            out.push_str(" + ");
        }
        first = false;
        complex(out, c, digits);
        match j {
            0 => {}
            1 => {
                let _ = write!(out, "*{var}");
            }
            _ => {
                let _ = write!(out, "*{var}^{j}");
            }
        }
    }
    if first {
        out.push('0');
    }
}

fn tail(out: &mut String, terms: &[(Qd, PolyZ)], digits: usize) {
    for (k, p) in terms {
        if !out.is_empty() {
            out.push_str(" + ");
        }
        out.push('(');
        poly(out, p, 'z', digits);
        out.push_str(")*E[");
        num(out, *k, digits);
        out.push(']');
    }
}

fn validity(out: &mut String, v: f64) {
    if v.is_finite() {
        let _ = write!(out, " + O(E[{v}])");
    }
}

pub fn print_series(f: &DulacSeries) -> String {
    let d = f.prec().digits() as usize;
    let mut out = String::new();
    num(&mut out, f.multiplier(), d);
    out.push_str("*z + ");
    complex(&mut out, f.constant(), d);
    tail(&mut out, f.terms(), d);
    validity(&mut out, f.validity());
    out
}

pub fn print_derivation(x: &NilpotentDerivation) -> String {
    let d = x.prec().digits() as usize;
    let mut out = String::new();
    tail(&mut out, x.terms(), d);
    if out.is_empty() {
        out.push('0');
    }
    validity(&mut out, x.validity());
    out
}

pub fn print_germ(g: &DiffeoGerm) -> String {
    let d = g.prec().digits() as usize;
    let mut p = vec![Cx::ZERO];
    p.extend_from_slice(g.coeffs());
    let mut out = String::new();
    poly(&mut out, &PolyZ::from_coeffs(p), 'x', d);
    if !g.is_exact() {
        let _ = write!(out, " + O(x^{})", g.order() + 1);
    }
    out
}
