//! Truncated free associative and free Lie series on two letters X < Y.
//!
//! Lie series are stored on the Lyndon basis with the standard bracketing:
//! a Lyndon word w = uv, v its longest proper Lyndon suffix, stands for [b(u), b(v)].

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::poly::Poly;
use crate::rat::{fmt_q, q, qr, Q};

pub const DEFAULT_MAX_ORDER: usize = 8;
pub const X: u8 = 0;
pub const Y: u8 = 1;

pub type Word = Vec<u8>;

#[derive(Clone, Debug, PartialEq)]
pub struct FreeAssocSeries {
    pub order: usize,
    pub terms: BTreeMap<Word, Q>,
}

impl FreeAssocSeries {
    pub fn zero(order: usize) -> Self {
        FreeAssocSeries { order, terms: BTreeMap::new() }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.add_term(vec![], Q::one());
        s
    }

    pub fn letter(l: u8, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.add_term(vec![l], Q::one());
        s
    }

    pub fn add_term(&mut self, w: Word, c: Q) {
        if c.is_zero() || w.len() > self.order {
            return;
        }
        let e = self.terms.entry(w.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&q(-1)))
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.order);
        for (w, x) in &self.terms {
            out.add_term(w.clone(), x * c);
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.order.min(o.order));
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                if w1.len() + w2.len() <= out.order {
                    let mut w = w1.clone();
                    w.extend_from_slice(w2);
                    out.add_term(w, c1 * c2);
                }
            }
        }
        out
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn constant(&self) -> Q {
        self.terms.get(&vec![]).cloned().unwrap_or_else(Q::zero)
    }

    pub fn exp(&self) -> Self {
        assert!(self.constant().is_zero(), "exp needs zero constant term");
        let mut acc = Self::one(self.order);
        let mut pow = Self::one(self.order);
        for k in 1..=self.order {
            pow = pow.mul(self).scale(&qr(1, k as i64));
            acc = acc.add(&pow);
        }
        acc
    }

    pub fn log(&self) -> Self {
        assert!(self.constant().is_one(), "log needs constant term 1");
        let u = self.sub(&Self::one(self.order));
        let mut acc = Self::zero(self.order);
        let mut pow = Self::one(self.order);
        for k in 1..=self.order {
            pow = pow.mul(&u);
            let s = if k % 2 == 1 { q(1) } else { q(-1) };
            acc = acc.add(&pow.scale(&(s / q(k as i64))));
        }
        acc
    }

    pub fn homogeneous(&self, n: usize) -> Self {
        let mut out = Self::zero(self.order);
        for (w, c) in self.terms.iter().filter(|(w, _)| w.len() == n) {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    /// Substitutes X -> images[0], Y -> images[1].
    pub fn subst(&self, images: &[FreeAssocSeries; 2]) -> Self {
        let mut out = Self::zero(self.order);
        for (w, c) in &self.terms {
            let mut t = Self::one(self.order);
            for &l in w {
                t = t.mul(&images[l as usize]);
            }
            out = out.add(&t.scale(c));
        }
        out
    }

    pub fn swap_letters(&self) -> Self {
        let mut out = Self::zero(self.order);
        for (w, c) in &self.terms {
            out.add_term(w.iter().map(|l| 1 - l).collect(), c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

pub fn is_lyndon(w: &[u8]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w < &w[i..] && {
        let mut rot = w[i..].to_vec();
        rot.extend_from_slice(&w[..i]);
        w < rot.as_slice()
    })
}

pub fn lyndon_words(n: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for code in 0..(1u32 << n) {
        let w: Word = (0..n).rev().map(|i| ((code >> i) & 1) as u8).collect();
        if is_lyndon(&w) {
            out.push(w);
        }
    }
    out
}

/// w = uv with v the longest proper Lyndon suffix.
pub fn standard_factorization(w: &[u8]) -> (Word, Word) {
    for i in 1..w.len() {
        if is_lyndon(&w[i..]) {
            return (w[..i].to_vec(), w[i..].to_vec());
        }
    }
    unreachable!("words of length >= 2 always have a Lyndon suffix")
}

/// Associative expansion of the standard bracketing of a Lyndon word.
pub fn bracketing(w: &[u8], order: usize) -> FreeAssocSeries {
    if w.len() == 1 {
        return FreeAssocSeries::letter(w[0], order);
    }
    let (u, v) = standard_factorization(w);
    bracketing(&u, order).commutator(&bracketing(&v, order))
}

pub fn bracket_string(w: &[u8]) -> String {
    if w.len() == 1 {
        return if w[0] == X { "X".into() } else { "Y".into() };
    }
    let (u, v) = standard_factorization(w);
    format!("[{},{}]", bracket_string(&u), bracket_string(&v))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeLieSeries {
    pub order: usize,
    pub terms: BTreeMap<Word, Q>,
}

impl FreeLieSeries {
    pub fn zero(order: usize) -> Self {
        FreeLieSeries { order, terms: BTreeMap::new() }
    }

    pub fn coeff(&self, w: &[u8]) -> Q {
        self.terms.get(w).cloned().unwrap_or_else(Q::zero)
    }

    pub fn to_assoc(&self) -> FreeAssocSeries {
        let mut out = FreeAssocSeries::zero(self.order);
        for (w, c) in &self.terms {
            out = out.add(&bracketing(w, self.order).scale(c));
        }
        out
    }

    /// Decomposes an associative series on the Lyndon basis; fails if it is not Lie.
    pub fn from_assoc(s: &FreeAssocSeries) -> Result<Self> {
        let mut rest = s.clone();
        let mut out = FreeLieSeries::zero(s.order);
        if !rest.constant().is_zero() {
            return Err(Error::Parse("series has a constant term, not a Lie element".into()));
        }
        // The least word of minimal length leads; BTreeMap order alone would put "XY" before "Y".
        while let Some(n) = rest.terms.keys().map(|w| w.len()).min() {
            let (w, c) = rest.terms.iter().find(|(w, _)| w.len() == n).map(|(w, c)| (w.clone(), c.clone())).unwrap();
            if !is_lyndon(&w) {
                return Err(Error::Parse(format!("leading word {} is not Lyndon: not a Lie series", word_string(&w))));
            }
            rest = rest.sub(&bracketing(&w, s.order).scale(&c));
            out.terms.insert(w, c);
        }
        Ok(out)
    }

    pub fn part(&self, n: usize) -> Self {
        FreeLieSeries {
            order: self.order,
            terms: self.terms.iter().filter(|(w, _)| w.len() == n).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    pub fn even_part(&self) -> Self {
        FreeLieSeries {
            order: self.order,
            terms: self.terms.iter().filter(|(w, _)| w.len() % 2 == 0).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    pub fn swap_letters(&self) -> Result<Self> {
        Self::from_assoc(&self.to_assoc().swap_letters())
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            let e = out.terms.entry(w.clone()).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                out.terms.remove(w);
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        FreeLieSeries {
            order: self.order,
            terms: self.terms.iter().map(|(w, x)| (w.clone(), x * c)).filter(|(_, x)| !x.is_zero()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Substitutes concrete elements (with polynomial coordinates) for X and Y.
    pub fn eval(&self, alg: &LieAlgebra, x: &[Poly], y: &[Poly]) -> Vec<Poly> {
        let nv = x[0].nvars;
        let mut memo: BTreeMap<Word, Vec<Poly>> = BTreeMap::new();
        let mut out = vec![Poly::zero(nv); alg.dim()];
        for (w, c) in &self.terms {
            let v = eval_word(alg, w, x, y, &mut memo);
            for (o, vi) in out.iter_mut().zip(v) {
                *o = &*o + &vi.scale(c);
            }
        }
        out
    }
}

fn eval_word(alg: &LieAlgebra, w: &[u8], x: &[Poly], y: &[Poly], memo: &mut BTreeMap<Word, Vec<Poly>>) -> Vec<Poly> {
    if w.len() == 1 {
        return if w[0] == X { x.to_vec() } else { y.to_vec() };
    }
    if let Some(v) = memo.get(w) {
        return v.clone();
    }
    let (u, v) = standard_factorization(w);
    let a = eval_word(alg, &u, x, y, memo);
    let b = eval_word(alg, &v, x, y, memo);
    let r = alg.bracket_poly(&a, &b);
    memo.insert(w.to_vec(), r.clone());
    r
}

pub fn word_string(w: &[u8]) -> String {
    w.iter().map(|&l| if l == X { 'X' } else { 'Y' }).collect()
}

impl fmt::Display for FreeLieSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<&Word> = self.terms.keys().collect();
        keys.sort_by_key(|w| (w.len(), (*w).clone()));
        if keys.is_empty() {
            return write!(f, "0");
        }
        for (i, w) in keys.into_iter().enumerate() {
            let c = &self.terms[w];
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if a.is_one() {
                write!(f, "{}", bracket_string(w))?;
            } else {
                write!(f, "({})*{}", fmt_q(&a), bracket_string(w))?;
            }
        }
        Ok(())
    }
}

/// Left-normed bracketing [..[[w1,w2],w3]..,wn] extended linearly.
pub fn dynkin_left_normed(s: &FreeAssocSeries) -> FreeAssocSeries {
    let mut out = FreeAssocSeries::zero(s.order);
    for (w, c) in &s.terms {
        if w.is_empty() {
            continue;
        }
        let mut acc = FreeAssocSeries::letter(w[0], s.order);
        for &l in &w[1..] {
            acc = acc.commutator(&FreeAssocSeries::letter(l, s.order));
        }
        out = out.add(&acc.scale(c));
    }
    out
}

/// Checks D(s_n) = n s_n on every homogeneous component.
pub fn passes_dynkin(s: &FreeAssocSeries) -> bool {
    (1..=s.order).all(|n| {
        let h = s.homogeneous(n);
        dynkin_left_normed(&h) == h.scale(&q(n as i64))
    })
}

fn check_order(order: usize, max: usize) -> Result<()> {
    if order == 0 || order > max {
        return Err(Error::OrderTooHigh { requested: order, max });
    }
    Ok(())
}

pub fn bch(order: usize) -> Result<FreeLieSeries> {
    bch_capped(order, DEFAULT_MAX_ORDER)
}

/// log(e^X e^Y) on the Lyndon basis.
pub fn bch_capped(order: usize, max: usize) -> Result<FreeLieSeries> {
    check_order(order, max)?;
    let x = FreeAssocSeries::letter(X, order);
    let y = FreeAssocSeries::letter(Y, order);
    FreeLieSeries::from_assoc(&x.exp().mul(&y.exp()).log())
}

pub fn sym_factorize(order: usize) -> Result<(FreeLieSeries, FreeLieSeries)> {
    sym_factorize_capped(order, DEFAULT_MAX_ORDER)
}

/// e^X e^Y = e^P e^K with P odd (p-valued) and K even (k-valued), degree by degree.
pub fn sym_factorize_capped(order: usize, max: usize) -> Result<(FreeLieSeries, FreeLieSeries)> {
    check_order(order, max)?;
    let z = bch_capped(order, max)?.to_assoc();
    let mut p = FreeLieSeries::from_assoc(&FreeAssocSeries::letter(X, order).add(&FreeAssocSeries::letter(Y, order)))?;
    let mut k = FreeLieSeries::zero(order);
    for n in 2..=order {
        let b = p.to_assoc().exp().mul(&k.to_assoc().exp()).log();
        let d = FreeLieSeries::from_assoc(&z.sub(&b).homogeneous(n))?;
        if n % 2 == 1 {
            p = p.add(&d);
        } else {
            k = k.add(&d);
        }
    }
    Ok((p, k))
}

pub fn z_sym(order: usize) -> Result<FreeLieSeries> {
    z_sym_capped(order, DEFAULT_MAX_ORDER)
}

/// Z_sym = (1/2) log(e^X e^{2Y} e^X).
pub fn z_sym_capped(order: usize, max: usize) -> Result<FreeLieSeries> {
    check_order(order, max)?;
    let ex = FreeAssocSeries::letter(X, order).exp();
    let e2y = FreeAssocSeries::letter(Y, order).scale(&q(2)).exp();
    FreeLieSeries::from_assoc(&ex.mul(&e2y).mul(&ex).log().scale(&qr(1, 2)))
}
