//! Algebra definition files and a small expression language for polynomials.
//!
//! Schema (rationals are "p/q" strings, indices 0-based):
//! `{ "name", "basis": [..], "brackets": {"[i,j]": {"k": "p/q"}}, "sigma": [[..]],
//!    "adapted"?: {"p": [..], "k": [..]}, "definitions"?: {name: expr | {monomial: "p/q"}},
//!    "characters"?: {name: [..]}, "iwasawa"?: {"p0", "n_plus", "k0", "r"}, "weyl"?: [matrix] }`

use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::lie::{build_symmetric_pair, build_symmetric_pair_adapted, Character, LieAlgebraDef, SymmetricPair};
use crate::linalg::Mat;
use crate::poly::Poly;
use crate::rat::{fmt_q, parse_q, Q};

#[derive(Clone, Debug)]
pub struct AlgebraFile {
    pub def: LieAlgebraDef,
    pub sigma: Option<Mat>,
    pub raw: Value,
}

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn rational(v: &Value) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s),
        Value::Number(n) if n.is_i64() => Ok(crate::rat::q(n.as_i64().unwrap())),
        _ => Err(perr(format!("expected a rational, got {v}"))),
    }
}

pub fn rational_matrix(v: &Value) -> Result<Mat> {
    let rows = v.as_array().ok_or_else(|| perr("matrix must be an array of rows"))?;
    rows.iter()
        .map(|r| r.as_array().ok_or_else(|| perr("matrix row must be an array"))?.iter().map(rational).collect())
        .collect()
}

pub fn parse_algebra(text: &str) -> Result<AlgebraFile> {
    let raw: Value = serde_json::from_str(text).map_err(|e| perr(e.to_string()))?;
    let name = raw.get("name").and_then(Value::as_str).unwrap_or("unnamed").to_string();
    let basis: Vec<String> = raw
        .get("basis")
        .and_then(Value::as_array)
        .ok_or_else(|| perr("missing basis"))?
        .iter()
        .map(|b| b.as_str().map(String::from).ok_or_else(|| perr("basis names must be strings")))
        .collect::<Result<_>>()?;
    let n = basis.len();
    let index = |tok: &str| -> Result<usize> {
        let tok = tok.trim();
        if let Ok(i) = tok.parse::<usize>() {
            if i < n {
                return Ok(i);
            }
        }
        basis.iter().position(|b| b == tok).ok_or_else(|| Error::UnknownName(tok.into()))
    };
    let mut brackets: BTreeMap<(usize, usize), Vec<Q>> = BTreeMap::new();
    if let Some(obj) = raw.get("brackets").and_then(Value::as_object) {
        for (key, val) in obj {
            let inner = key.trim().trim_start_matches('[').trim_end_matches(']');
            let (a, b) = inner.split_once(',').ok_or_else(|| perr(format!("bad bracket key {key}")))?;
            let (i, j) = (index(a)?, index(b)?);
            if i == j {
                return Err(perr(format!("bracket key {key} repeats an index")));
            }
            let mut v = vec![Q::from_integer(0.into()); n];
            for (k, c) in val.as_object().ok_or_else(|| perr("bracket value must be an object"))? {
                v[index(k)?] = rational(c)?;
            }
            let (key, v) = if i < j { ((i, j), v) } else { ((j, i), v.into_iter().map(|x| -x).collect()) };
            if brackets.insert(key, v).is_some() {
                return Err(perr(format!("bracket [{},{}] given twice", key.0, key.1)));
            }
        }
    }
    let def = LieAlgebraDef::new(&name, basis, brackets)?;
    let sigma = raw.get("sigma").map(rational_matrix).transpose()?;
    Ok(AlgebraFile { def, sigma, raw })
}

pub fn load_algebra(path: &str) -> Result<AlgebraFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    parse_algebra(&text)
}

impl AlgebraFile {
    pub fn pair(&self) -> Result<SymmetricPair> {
        let sigma = self.sigma.clone().ok_or_else(|| perr("missing sigma"))?;
        match self.raw.get("adapted") {
            None => build_symmetric_pair(self.def.clone(), sigma),
            Some(a) => {
                let vecs = |key: &str| -> Result<Vec<Vec<Q>>> {
                    a.get(key)
                        .and_then(Value::as_array)
                        .ok_or_else(|| perr(format!("adapted.{key} missing")))?
                        .iter()
                        .map(|v| file_vector(&self.def.basis, v))
                        .collect()
                };
                build_symmetric_pair_adapted(self.def.clone(), sigma, vecs("p")?, vecs("k")?)
            }
        }
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(self.pair()?, &self.raw)
    }
}

/// A vector over the file basis, written as an expression ("X-Y") or a list of rationals.
pub fn file_vector(basis: &[String], v: &Value) -> Result<Vec<Q>> {
    match v {
        Value::Array(xs) => {
            if xs.len() != basis.len() {
                return Err(Error::DimensionMismatch(format!("vector needs {} entries", basis.len())));
            }
            xs.iter().map(rational).collect()
        }
        Value::String(s) => linear_expr(basis, s),
        _ => Err(perr("vector must be a string or array")),
    }
}

/// Parses a linear combination of names into a coefficient vector.
pub fn linear_expr(names: &[String], s: &str) -> Result<Vec<Q>> {
    let scope = Scope { vars: names, file: None, defs: &BTreeMap::new() };
    let p = scope.parse(s)?;
    if p.degree().unwrap_or(1) > 1 || !p.constant_term().eq(&Q::from_integer(0.into())) {
        return Err(perr(format!("{s:?} is not a linear combination of basis elements")));
    }
    Ok((0..names.len())
        .map(|i| {
            let mut e = vec![0; names.len()];
            e[i] = 1;
            p.coeff(&e)
        })
        .collect())
}

/// A pair together with the named polynomials and characters from its file.
#[derive(Clone, Debug)]
pub struct Model {
    pub pair: SymmetricPair,
    /// Definitions as polynomials over the full adapted basis.
    pub defs: BTreeMap<String, Poly>,
    pub characters: BTreeMap<String, Character>,
    pub raw: Value,
}

impl Model {
    pub fn new(pair: SymmetricPair, raw: &Value) -> Result<Self> {
        let mut m = Model { pair, defs: BTreeMap::new(), characters: BTreeMap::new(), raw: raw.clone() };
        if let Some(obj) = raw.get("definitions").and_then(Value::as_object) {
            for (name, val) in obj {
                let p = match val {
                    Value::String(s) => m.parse_g(s)?,
                    Value::Object(terms) => {
                        let mut acc = Poly::zero(m.pair.dim());
                        for (mono, c) in terms {
                            acc = &acc + &m.parse_g(mono)?.scale(&rational(c)?);
                        }
                        acc
                    }
                    _ => return Err(perr(format!("definition {name} must be a string or object"))),
                };
                m.defs.insert(name.clone(), p);
            }
        }
        if let Some(obj) = raw.get("characters").and_then(Value::as_object) {
            for (name, val) in obj {
                let vals: Vec<Q> = val
                    .as_array()
                    .ok_or_else(|| perr(format!("character {name} must be an array")))?
                    .iter()
                    .map(rational)
                    .collect::<Result<_>>()?;
                m.characters.insert(name.clone(), Character::new(&m.pair, vals)?);
            }
        }
        Ok(m)
    }

    fn scope(&self) -> Scope<'_> {
        Scope { vars: &self.pair.names, file: Some(&self.pair), defs: &self.defs }
    }

    /// Polynomial over the full adapted basis of g.
    pub fn parse_g(&self, s: &str) -> Result<Poly> {
        self.scope().parse(s)
    }

    /// Polynomial over p; fails if a k-variable survives.
    pub fn parse_p(&self, s: &str) -> Result<Poly> {
        let g = self.parse_g(s)?;
        to_p(&self.pair, &g).ok_or_else(|| perr(format!("{s:?} is not a polynomial on p")))
    }

    /// Resolves "zero", "trk", "half-trk" or a named character.
    pub fn character(&self, spec: &str) -> Result<Character> {
        let trk = self.pair.tr_k();
        match spec {
            "zero" | "0" => Ok(Character::zero(self.pair.nk)),
            "trk" => Ok(trk),
            "half-trk" => Ok(trk.scale(&crate::rat::qr(1, 2))),
            name => self.characters.get(name).cloned().ok_or_else(|| Error::UnknownName(name.into())),
        }
    }

    /// Writes p in terms of the named definitions when possible, e.g. "omega^2 + 16/15".
    pub fn express(&self, p: &Poly, max_deg: u32) -> String {
        express_in_definitions(&self.pair, &self.defs, p, max_deg).unwrap_or_else(|| p.fmt_with(&self.pair.p_names()))
    }
}

pub fn to_p(pair: &SymmetricPair, g: &Poly) -> Option<Poly> {
    if g.nvars == pair.np {
        return Some(g.clone());
    }
    if g.terms.keys().any(|e| e[pair.np..].iter().any(|&k| k > 0)) {
        return None;
    }
    Some(g.restrict(0, pair.np))
}

/// Tries to write p as a polynomial in the p-valued definitions by exact linear algebra.
pub fn express_in_definitions(
    pair: &SymmetricPair,
    defs: &BTreeMap<String, Poly>,
    p: &Poly,
    max_deg: u32,
) -> Option<String> {
    let gens: Vec<(String, Poly)> = defs
        .iter()
        .filter_map(|(n, d)| to_p(pair, d).filter(|d| d.degree().unwrap_or(0) > 0).map(|d| (n.clone(), d)))
        .collect();
    if gens.is_empty() {
        return None;
    }
    // Products of generators with bounded total degree.
    let mut monos: Vec<(Vec<u32>, Poly)> = vec![(vec![0; gens.len()], Poly::one(pair.np))];
    let mut frontier = monos.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (e, m) in &frontier {
            let start = e.iter().rposition(|&x| x > 0).unwrap_or(0);
            for (i, (_, g)) in gens.iter().enumerate().skip(start) {
                let prod = m * g;
                if prod.degree().unwrap_or(0) <= max_deg {
                    let mut e2 = e.clone();
                    e2[i] += 1;
                    next.push((e2, prod));
                }
            }
        }
        monos.extend(next.iter().cloned());
        frontier = next;
    }
    let mut keys: Vec<Vec<u32>> = monos.iter().flat_map(|(_, m)| m.terms.keys().cloned()).collect();
    keys.extend(p.terms.keys().cloned());
    keys.sort();
    keys.dedup();
    let a: Mat = keys.iter().map(|k| monos.iter().map(|(_, m)| m.coeff(k)).collect()).collect();
    let b: Vec<Q> = keys.iter().map(|k| p.coeff(k)).collect();
    let x = crate::linalg::solve(&a, &b)?;
    let names: Vec<String> = gens.iter().map(|(n, _)| n.clone()).collect();
    let mut out = Poly::zero(gens.len());
    for ((e, _), c) in monos.iter().zip(x) {
        out.add_term(e.clone(), c);
    }
    Some(out.fmt_with(&names))
}

struct Scope<'a> {
    vars: &'a [String],
    file: Option<&'a SymmetricPair>,
    defs: &'a BTreeMap<String, Poly>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Name(String),
    Group(String),
    Op(char),
}

impl Scope<'_> {
    fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn parse(&self, s: &str) -> Result<Poly> {
        let toks = tokenize(s)?;
        let mut pos = 0;
        let p = self.expr(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(perr(format!("unexpected token in {s:?}")));
        }
        Ok(p)
    }

    fn expr(&self, t: &[Tok], pos: &mut usize) -> Result<Poly> {
        let mut acc = Poly::zero(self.nvars());
        let mut sign = Q::from_integer(1.into());
        if let Some(Tok::Op(c @ ('+' | '-'))) = t.get(*pos) {
            if *c == '-' {
                sign = -sign;
            }
            *pos += 1;
        }
        loop {
            let term = self.term(t, pos)?;
            acc = &acc + &term.scale(&sign);
            match t.get(*pos) {
                Some(Tok::Op('+')) => sign = Q::from_integer(1.into()),
                Some(Tok::Op('-')) => sign = Q::from_integer((-1).into()),
                _ => return Ok(acc),
            }
            *pos += 1;
        }
    }

    fn term(&self, t: &[Tok], pos: &mut usize) -> Result<Poly> {
        let mut acc = self.factor(t, pos)?;
        while let Some(Tok::Op('*')) = t.get(*pos) {
            *pos += 1;
            acc = &acc * &self.factor(t, pos)?;
        }
        Ok(acc)
    }

    fn factor(&self, t: &[Tok], pos: &mut usize) -> Result<Poly> {
        let base = match t.get(*pos) {
            Some(Tok::Num(c)) => Poly::constant(self.nvars(), c.clone()),
            Some(Tok::Name(n)) => self.resolve(n)?,
            Some(Tok::Group(inner)) => {
                let compact: String = inner.chars().filter(|c| !c.is_whitespace()).collect();
                match self.vars.iter().position(|v| *v == compact) {
                    Some(i) => Poly::var(self.nvars(), i),
                    None => self.parse(inner)?,
                }
            }
            _ => return Err(perr("expected a factor")),
        };
        *pos += 1;
        if let Some(Tok::Op('^')) = t.get(*pos) {
            *pos += 1;
            match t.get(*pos) {
                Some(Tok::Num(e)) if e.is_integer() && *e >= Q::from_integer(0.into()) => {
                    *pos += 1;
                    let k: u32 = e.numer().to_string().parse().map_err(|_| perr("exponent too large"))?;
                    return Ok(base.pow(k));
                }
                _ => return Err(perr("exponent must be a non-negative integer")),
            }
        }
        Ok(base)
    }

    fn resolve(&self, name: &str) -> Result<Poly> {
        if let Some(i) = self.vars.iter().position(|v| v == name) {
            return Ok(Poly::var(self.nvars(), i));
        }
        if let Some(d) = self.defs.get(name) {
            return Ok(d.clone());
        }
        if let Some(pair) = self.file {
            if let Some(i) = pair.def.basis.iter().position(|b| b == name) {
                let mut e = vec![Q::from_integer(0.into()); pair.dim()];
                e[i] = Q::from_integer(1.into());
                return Ok(Poly::linear(&pair.to_adapted(&e)));
            }
        }
        Err(Error::UnknownName(name.into()))
    }
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let c: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < c.len() {
        let ch = c[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() {
            let start = i;
            while i < c.len() && c[i].is_ascii_digit() {
                i += 1;
            }
            // A slash directly after digits and before digits makes a rational literal.
            if i + 1 < c.len() && c[i] == '/' && c[i + 1].is_ascii_digit() {
                i += 1;
                while i < c.len() && c[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit: String = c[start..i].iter().collect();
            out.push(Tok::Num(parse_q(&lit)?));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < c.len() && (c[i].is_alphanumeric() || c[i] == '_' || c[i] == '\'') {
                i += 1;
            }
            out.push(Tok::Name(c[start..i].iter().collect()));
        } else if ch == '(' {
            let mut depth = 0;
            let start = i + 1;
            loop {
                match c.get(i) {
                    Some('(') => depth += 1,
                    Some(')') => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    None => return Err(perr(format!("unbalanced parentheses in {s:?}"))),
                    _ => {}
                }
                i += 1;
            }
            out.push(Tok::Group(c[start..i].iter().collect()));
            i += 1;
        } else if "+-*^".contains(ch) {
            out.push(Tok::Op(ch));
            i += 1;
        } else {
            return Err(perr(format!("unexpected character {ch:?} in {s:?}")));
        }
    }
    Ok(out)
}

/// `{"monomial": "p/q"}` map over the given variable names.
pub fn poly_to_json(p: &Poly, names: &[String]) -> Value {
    let mut obj = serde_json::Map::new();
    for (e, c) in &p.terms {
        let mono = crate::poly::fmt_monomial(e, names);
        obj.insert(if mono.is_empty() { "1".into() } else { mono }, Value::String(fmt_q(c)));
    }
    Value::Object(obj)
}
