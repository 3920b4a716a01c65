//! Lie algebras, involutions and the Cartan split g = k + p.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::poly::Poly;
use crate::rat::{fmt_q, Q};

/// Structure constants in a fixed basis: `c[i][j]` is the vector of [e_i, e_j].
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    pub names: Vec<String>,
    pub c: Vec<Vec<Vec<Q>>>,
}

impl LieAlgebra {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn abelian(names: Vec<String>) -> Self {
        let n = names.len();
        LieAlgebra { names, c: vec![vec![vec![Q::zero(); n]; n]; n] }
    }

    pub fn basis_vec(&self, i: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.dim()];
        v[i] = Q::one();
        v
    }

    pub fn bracket(&self, u: &[Q], v: &[Q]) -> Vec<Q> {
        let n = self.dim();
        let mut out = vec![Q::zero(); n];
        for i in 0..n {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if v[j].is_zero() || i == j {
                    continue;
                }
                let f = &u[i] * &v[j];
                for (o, c) in out.iter_mut().zip(&self.c[i][j]) {
                    if !c.is_zero() {
                        *o += &f * c;
                    }
                }
            }
        }
        out
    }

    /// Matrix of ad u: column j holds [u, e_j].
    pub fn ad(&self, u: &[Q]) -> Mat {
        let n = self.dim();
        let cols: Vec<Vec<Q>> = (0..n).map(|j| self.bracket(u, &self.basis_vec(j))).collect();
        linalg::from_columns(&cols, n)
    }

    pub fn bracket_poly(&self, u: &[Poly], v: &[Poly]) -> Vec<Poly> {
        let n = self.dim();
        let nv = u[0].nvars;
        let mut out = vec![Poly::zero(nv); n];
        for i in 0..n {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if v[j].is_zero() || i == j {
                    continue;
                }
                if self.c[i][j].iter().all(|c| c.is_zero()) {
                    continue;
                }
                let f = &u[i] * &v[j];
                for (k, c) in self.c[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        out[k] = &out[k] + &f.scale(c);
                    }
                }
            }
        }
        out
    }

    /// ad of an element with polynomial coordinates; entry [row][col].
    pub fn ad_poly(&self, u: &[Poly]) -> Vec<Vec<Poly>> {
        let n = self.dim();
        let nv = u[0].nvars;
        let mut m = vec![vec![Poly::zero(nv); n]; n];
        for i in 0..n {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..n {
                for (k, c) in self.c[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        m[k][j] = &m[k][j] + &u[i].scale(c);
                    }
                }
            }
        }
        m
    }

    pub fn check_jacobi(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (self.basis_vec(i), self.basis_vec(j), self.basis_vec(k));
                    let t1 = self.bracket(&a, &self.bracket(&b, &c));
                    let t2 = self.bracket(&b, &self.bracket(&c, &a));
                    let t3 = self.bracket(&c, &self.bracket(&a, &b));
                    if (0..n).any(|l| !(&t1[l] + &t2[l] + &t3[l]).is_zero()) {
                        return Err(Error::JacobiViolation(
                            self.names[i].clone(),
                            self.names[j].clone(),
                            self.names[k].clone(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Structure constants in the basis given by the columns of `b`.
    pub fn change_basis(&self, b: &Mat, names: Vec<String>) -> Result<LieAlgebra> {
        let inv = linalg::inverse(b).ok_or_else(|| Error::DimensionMismatch("singular change of basis".into()))?;
        let n = self.dim();
        let cols: Vec<Vec<Q>> = (0..n).map(|j| b.iter().map(|r| r[j].clone()).collect()).collect();
        let mut c = vec![vec![vec![Q::zero(); n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    c[i][j] = linalg::mat_vec(&inv, &self.bracket(&cols[i], &cols[j]));
                }
            }
        }
        Ok(LieAlgebra { names, c })
    }

    /// tr(ad u ad v) over the whole algebra.
    pub fn killing(&self, u: &[Q], v: &[Q]) -> Q {
        linalg::trace(&linalg::mat_mul(&self.ad(u), &self.ad(v)))
    }
}

/// A Lie algebra as read from a definition file.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraDef {
    pub name: String,
    pub basis: Vec<String>,
    pub brackets: BTreeMap<(usize, usize), Vec<Q>>,
    pub alg: LieAlgebra,
}

impl LieAlgebraDef {
    /// Builds and validates; only pairs i < j may be given.
    pub fn new(name: &str, basis: Vec<String>, brackets: BTreeMap<(usize, usize), Vec<Q>>) -> Result<Self> {
        let n = basis.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("empty basis".into()));
        }
        let mut c = vec![vec![vec![Q::zero(); n]; n]; n];
        for (&(i, j), v) in &brackets {
            if i >= j || j >= n || v.len() != n {
                return Err(Error::DimensionMismatch(format!("bracket entry [{i},{j}]")));
            }
            c[i][j] = v.clone();
            c[j][i] = v.iter().map(|x| -x.clone()).collect();
        }
        let alg = LieAlgebra { names: basis.clone(), c };
        alg.check_jacobi()?;
        Ok(LieAlgebraDef { name: name.into(), basis, brackets, alg })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Space {
    P,
    K,
    G,
}

impl Space {
    pub fn label(self) -> &'static str {
        match self {
            Space::P => "p",
            Space::K => "k",
            Space::G => "g",
        }
    }
}

/// g = k + p for an involutive automorphism sigma.
///
/// Computations happen in the adapted basis: p-vectors first, then k-vectors.
#[derive(Clone, Debug)]
pub struct SymmetricPair {
    pub def: LieAlgebraDef,
    /// `sigma[i][j]` is the coefficient of e_i in sigma(e_j).
    pub sigma: Mat,
    /// Columns are the adapted basis vectors in file coordinates.
    pub change: Mat,
    pub change_inv: Mat,
    pub np: usize,
    pub nk: usize,
    pub names: Vec<String>,
    pub alg: LieAlgebra,
}

pub fn build_symmetric_pair(def: LieAlgebraDef, sigma: Mat) -> Result<SymmetricPair> {
    let n = def.basis.len();
    check_sigma(&def, &sigma)?;
    let neg: Mat = sigma
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().enumerate().map(|(j, x)| if i == j { x + Q::one() } else { x.clone() }).collect())
        .collect();
    let pos: Mat = sigma
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().enumerate().map(|(j, x)| if i == j { x - Q::one() } else { x.clone() }).collect())
        .collect();
    let p: Vec<Vec<Q>> = linalg::nullspace(&neg, n).into_iter().map(normalize_leading).collect();
    let k: Vec<Vec<Q>> = linalg::nullspace(&pos, n).into_iter().map(normalize_leading).collect();
    assemble(def, sigma, p, k)
}

/// Variant where the adapted basis is supplied; it is validated, not computed.
pub fn build_symmetric_pair_adapted(
    def: LieAlgebraDef,
    sigma: Mat,
    p: Vec<Vec<Q>>,
    k: Vec<Vec<Q>>,
) -> Result<SymmetricPair> {
    check_sigma(&def, &sigma)?;
    for v in &p {
        let s = linalg::mat_vec(&sigma, v);
        if s.iter().zip(v).any(|(a, b)| a != &-b.clone()) {
            return Err(Error::NotCartan("supplied p-vector is not in the -1 eigenspace".into()));
        }
    }
    for v in &k {
        if &linalg::mat_vec(&sigma, v) != v {
            return Err(Error::NotCartan("supplied k-vector is not in the +1 eigenspace".into()));
        }
    }
    assemble(def, sigma, p, k)
}

fn check_sigma(def: &LieAlgebraDef, sigma: &Mat) -> Result<()> {
    let n = def.basis.len();
    if sigma.len() != n || sigma.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("sigma must be {n}x{n}")));
    }
    if linalg::mat_mul(sigma, sigma) != linalg::identity(n) {
        return Err(Error::NotInvolution);
    }
    let col = |j: usize| -> Vec<Q> { sigma.iter().map(|r| r[j].clone()).collect() };
    for i in 0..n {
        for j in i + 1..n {
            let lhs = linalg::mat_vec(sigma, &def.alg.c[i][j]);
            let rhs = def.alg.bracket(&col(i), &col(j));
            if lhs != rhs {
                return Err(Error::NotAutomorphism(def.basis[i].clone(), def.basis[j].clone()));
            }
        }
    }
    Ok(())
}

fn normalize_leading(v: Vec<Q>) -> Vec<Q> {
    match v.iter().find(|x| !x.is_zero()).cloned() {
        Some(lead) => v.into_iter().map(|x| x / &lead).collect(),
        None => v,
    }
}

/// Name of a vector written in the file basis, e.g. "X+Y" or "2*H-X".
pub fn vector_name(v: &[Q], basis: &[String]) -> String {
    let mut s = String::new();
    for (c, name) in v.iter().zip(basis) {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push(if neg { '-' } else { '+' });
        }
        if !a.is_one() {
            s.push_str(&fmt_q(&a));
            s.push('*');
        }
        s.push_str(name);
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn assemble(def: LieAlgebraDef, sigma: Mat, p: Vec<Vec<Q>>, k: Vec<Vec<Q>>) -> Result<SymmetricPair> {
    let n = def.basis.len();
    if p.len() + k.len() != n {
        return Err(Error::NotCartan("eigenspaces do not span g".into()));
    }
    let mut cols = p.clone();
    cols.extend(k.iter().cloned());
    let change = linalg::from_columns(&cols, n);
    let change_inv =
        linalg::inverse(&change).ok_or_else(|| Error::NotCartan("adapted vectors are dependent".into()))?;
    let names: Vec<String> = cols.iter().map(|v| vector_name(v, &def.basis)).collect();
    let alg = def.alg.change_basis(&change, names.clone())?;
    let pair = SymmetricPair { np: p.len(), nk: k.len(), def, sigma, change, change_inv, names, alg };
    pair.check_cartan()?;
    Ok(pair)
}

impl SymmetricPair {
    pub fn dim(&self) -> usize {
        self.np + self.nk
    }

    pub fn p_range(&self) -> std::ops::Range<usize> {
        0..self.np
    }

    pub fn k_range(&self) -> std::ops::Range<usize> {
        self.np..self.dim()
    }

    pub fn range(&self, s: Space) -> std::ops::Range<usize> {
        match s {
            Space::P => self.p_range(),
            Space::K => self.k_range(),
            Space::G => 0..self.dim(),
        }
    }

    pub fn p_names(&self) -> Vec<String> {
        self.names[..self.np].to_vec()
    }

    pub fn to_adapted(&self, file: &[Q]) -> Vec<Q> {
        linalg::mat_vec(&self.change_inv, file)
    }

    pub fn to_file(&self, adapted: &[Q]) -> Vec<Q> {
        linalg::mat_vec(&self.change, adapted)
    }

    /// Full adapted vector from p-coordinates.
    pub fn from_p(&self, x: &[Q]) -> Vec<Q> {
        let mut v = x.to_vec();
        v.resize(self.dim(), Q::zero());
        v
    }

    pub fn from_k(&self, x: &[Q]) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.np];
        v.extend_from_slice(x);
        v
    }

    fn check_cartan(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            for j in i + 1..n {
                let v = &self.alg.c[i][j];
                let ip = i < self.np;
                let jp = j < self.np;
                let target = if ip == jp { self.k_range() } else { self.p_range() };
                if (0..n).any(|l| !target.contains(&l) && !v[l].is_zero()) {
                    return Err(Error::NotCartan(format!(
                        "[{}, {}] leaves its block",
                        self.names[i], self.names[j]
                    )));
                }
            }
        }
        Ok(())
    }

    /// The character X -> tr(ad X restricted to k) on k.
    pub fn tr_k(&self) -> Character {
        let lambda = self
            .k_range()
            .map(|i| {
                let ad = self.alg.ad(&self.alg.basis_vec(i));
                self.k_range().fold(Q::zero(), |acc, l| acc + &ad[l][l])
            })
            .collect();
        Character { lambda }
    }

    /// Symbolic element of p with coordinates x_0..x_{np-1} in a ring of `nvars` variables.
    pub fn generic_p(&self, nvars: usize, offset: usize) -> Vec<Poly> {
        (0..self.dim())
            .map(|i| if i < self.np { Poly::var(nvars, offset + i) } else { Poly::zero(nvars) })
            .collect()
    }

    pub fn generic_g(&self, nvars: usize, offset: usize) -> Vec<Poly> {
        (0..self.dim()).map(|i| Poly::var(nvars, offset + i)).collect()
    }
}

/// A linear form on k, given on the adapted k-basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Character {
    pub lambda: Vec<Q>,
}

impl Character {
    pub fn zero(nk: usize) -> Self {
        Character { lambda: vec![Q::zero(); nk] }
    }

    pub fn new(pair: &SymmetricPair, lambda: Vec<Q>) -> Result<Self> {
        if lambda.len() != pair.nk {
            return Err(Error::DimensionMismatch(format!("character needs {} values", pair.nk)));
        }
        let ch = Character { lambda };
        for a in pair.k_range() {
            for b in a + 1..pair.dim() {
                let v = &pair.alg.c[a][b];
                if !ch.eval_k(&v[pair.np..]).is_zero() {
                    return Err(Error::InvalidCharacter(format!(
                        "does not vanish on [{}, {}]",
                        pair.names[a], pair.names[b]
                    )));
                }
            }
        }
        Ok(ch)
    }

    pub fn eval_k(&self, k_coords: &[Q]) -> Q {
        self.lambda.iter().zip(k_coords).fold(Q::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn scale(&self, c: &Q) -> Character {
        Character { lambda: self.lambda.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, o: &Character) -> Character {
        Character { lambda: self.lambda.iter().zip(&o.lambda).map(|(a, b)| a + b).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.iter().all(|x| x.is_zero())
    }
}

/// tr over `space` of ad w_1 o ... o ad w_n (elements in adapted coordinates).
pub fn trace_word(pair: &SymmetricPair, space: Space, word: &[Vec<Q>]) -> Q {
    let n = pair.dim();
    let mut m = linalg::identity(n);
    for w in word {
        m = linalg::mat_mul(&m, &pair.alg.ad(w));
    }
    pair.range(space).fold(Q::zero(), |acc, i| acc + &m[i][i])
}

/// Lie word in the letters X and Y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LieWord {
    X,
    Y,
    Br(Box<LieWord>, Box<LieWord>),
}

impl LieWord {
    pub fn br(a: LieWord, b: LieWord) -> LieWord {
        LieWord::Br(Box::new(a), Box::new(b))
    }

    pub fn parse(s: &str) -> Result<LieWord> {
        let t: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let w = Self::parse_at(&t, &mut pos)?;
        if pos != t.len() {
            return Err(Error::Parse(format!("trailing input in Lie word {s:?}")));
        }
        Ok(w)
    }

    fn parse_at(t: &[char], pos: &mut usize) -> Result<LieWord> {
        let err = || Error::Parse("malformed Lie word".into());
        match t.get(*pos) {
            Some('X') => {
                *pos += 1;
                Ok(LieWord::X)
            }
            Some('Y') => {
                *pos += 1;
                Ok(LieWord::Y)
            }
            Some('[') => {
                *pos += 1;
                let a = Self::parse_at(t, pos)?;
                if t.get(*pos) != Some(&',') {
                    return Err(err());
                }
                *pos += 1;
                let b = Self::parse_at(t, pos)?;
                if t.get(*pos) != Some(&']') {
                    return Err(err());
                }
                *pos += 1;
                Ok(LieWord::br(a, b))
            }
            _ => Err(err()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LieWord::X | LieWord::Y => 1,
            LieWord::Br(a, b) => a.len() + b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval(&self, alg: &LieAlgebra, x: &[Q], y: &[Q]) -> Vec<Q> {
        match self {
            LieWord::X => x.to_vec(),
            LieWord::Y => y.to_vec(),
            LieWord::Br(a, b) => alg.bracket(&a.eval(alg, x, y), &b.eval(alg, x, y)),
        }
    }
}

/// tr_p(x_1...x_n) + (-1)^(n-1) tr_k(x_n...x_1) with x_i = ad(word_i(X, Y)).
pub fn trace_alternation(pair: &SymmetricPair, words: &[LieWord], x: &[Q], y: &[Q]) -> Q {
    let xs: Vec<Vec<Q>> = words.iter().map(|w| w.eval(&pair.alg, x, y)).collect();
    let mut rev = xs.clone();
    rev.reverse();
    let tp = trace_word(pair, Space::P, &xs);
    let tk = trace_word(pair, Space::K, &rev);
    if xs.len() % 2 == 1 {
        tp + tk
    } else {
        tp - tk
    }
}
