//! Sparse multivariate polynomials with rational coefficients.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use crate::rat::{fmt_q, pow_q, Q};

pub type Exps = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Exps, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Q::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly::monomial(e, Q::one())
    }

    pub fn monomial(exps: Exps, c: Q) -> Self {
        let mut p = Poly::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// Linear form sum_i v_i x_i.
    pub fn linear(v: &[Q]) -> Self {
        let mut p = Poly::zero(v.len());
        for (i, c) in v.iter().enumerate() {
            let mut e = vec![0; v.len()];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn add_term(&mut self, exps: Exps, c: Q) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn coeff(&self, exps: &[u32]) -> Q {
        self.terms.get(exps).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect() }
    }

    pub fn homogeneous(&self, d: u32) -> Poly {
        self.filter(|e| e.iter().sum::<u32>() == d)
    }

    pub fn truncate(&self, max_deg: u32) -> Poly {
        self.filter(|e| e.iter().sum::<u32>() <= max_deg)
    }

    pub fn filter(&self, keep: impl Fn(&[u32]) -> bool) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Product keeping only terms of total degree <= max_deg.
    pub fn mul_trunc(&self, other: &Poly, max_deg: u32) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            let d1: u32 = e1.iter().sum();
            if d1 > max_deg {
                continue;
            }
            for (e2, c2) in &other.terms {
                if d1 + e2.iter().sum::<u32>() > max_deg {
                    continue;
                }
                let e: Exps = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn deriv(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.add_term(e2, c * Q::from_integer(e[i].into()));
            }
        }
        out
    }

    /// Applies the constant-coefficient operator d^alpha.
    pub fn deriv_multi(&self, alpha: &[u32]) -> Poly {
        let mut out = Poly::zero(self.nvars);
        'terms: for (e, c) in &self.terms {
            let mut factor = c.clone();
            let mut e2 = e.clone();
            for (k, &a) in alpha.iter().enumerate() {
                if e[k] < a {
                    continue 'terms;
                }
                for j in 0..a {
                    factor *= Q::from_integer((e[k] - j).into());
                }
                e2[k] -= a;
            }
            out.add_term(e2, factor);
        }
        out
    }

    /// phi(d) applied to self, where phi is a polynomial in the dual variables.
    pub fn apply_operator(&self, phi: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        let top = self.degree().unwrap_or(0);
        for (alpha, c) in &phi.terms {
            if alpha.iter().sum::<u32>() > top {
                continue;
            }
            for (e, x) in self.deriv_multi(alpha).terms {
                out.add_term(e, x * c);
            }
        }
        out
    }

    pub fn eval(&self, point: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= pow_q(x, k);
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitutes variable i by images[i] (all in a common ring).
    pub fn compose(&self, images: &[Poly]) -> Poly {
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut out = Poly::zero(target);
        let mut cache: Vec<Vec<Poly>> = images.iter().map(|p| vec![Poly::one(target), p.clone()]).collect();
        for (e, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while cache[i].len() <= k as usize {
                    let next = cache[i].last().unwrap() * &images[i];
                    cache[i].push(next);
                }
                t = &t * &cache[i][k as usize];
            }
            out = &out + &t;
        }
        out
    }

    /// Re-embeds into a ring with `nvars` variables, variable i going to slot offset + i.
    pub fn embed(&self, nvars: usize, offset: usize) -> Poly {
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            e2[offset..offset + e.len()].copy_from_slice(e);
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Keeps variables [offset, offset+n) and drops terms involving any other variable.
    pub fn restrict(&self, offset: usize, n: usize) -> Poly {
        let mut out = Poly::zero(n);
        for (e, c) in &self.terms {
            let outside = e.iter().enumerate().any(|(i, &k)| k > 0 && (i < offset || i >= offset + n));
            if !outside {
                out.add_term(e[offset..offset + n].to_vec(), c.clone());
            }
        }
        out
    }

    /// Human-readable form using variable names.
    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut keys: Vec<&Exps> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let mut s = String::new();
        for (n, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let mono = fmt_monomial(e, names);
            let neg = c.is_negative();
            let a = c.abs();
            if n == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            match (mono.is_empty(), a.is_one()) {
                (true, _) => s.push_str(&fmt_q(&a)),
                (false, true) => s.push_str(&mono),
                (false, false) => {
                    let _ = write!(s, "{}*{}", fmt_q(&a), mono);
                }
            }
        }
        s
    }

    pub fn default_names(&self) -> Vec<String> {
        (0..self.nvars).map(|i| format!("x{i}")).collect()
    }
}

pub fn fmt_monomial(e: &[u32], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let n = &names[i];
        let n = if n.contains(['+', '-', '*', ' ']) { format!("({n})") } else { n.clone() };
        parts.push(if k == 1 { n } else { format!("{n}^{k}") });
    }
    parts.join("*")
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Q::one())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Exps = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

/// All exponent vectors in `nvars` variables with total degree `d`.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Exps> {
    fn rec(i: usize, left: u32, cur: &mut Exps, out: &mut Vec<Exps>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
    }
    if nvars == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(0, d, &mut vec![0; nvars], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::q;
    use proptest::prelude::*;

    fn arb_poly(nvars: usize) -> impl Strategy<Value = Poly> {
        prop::collection::vec((prop::collection::vec(0u32..3, nvars), -5i64..5), 0..6).prop_map(move |ts| {
            let mut p = Poly::zero(nvars);
            for (e, c) in ts {
                p.add_term(e, q(c));
            }
            p
        })
    }

    #[test]
    fn display_sorts_by_degree() {
        let names = vec!["H".to_string(), "X+Y".to_string()];
        let mut p = Poly::constant(2, q(-2));
        p.add_term(vec![2, 0], q(1));
        p.add_term(vec![0, 2], q(3));
        assert_eq!(p.fmt_with(&names), "H^2 + 3*(X+Y)^2 - 2");
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomials_of_degree(3, 2).len(), 6);
        assert_eq!(monomials_of_degree(0, 0).len(), 1);
    }

    #[test]
    fn laplacian_of_r4() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let r2 = &(&x * &x) + &(&y * &y);
        let r4 = &r2 * &r2;
        let lap = &Poly::monomial(vec![2, 0], q(1)) + &Poly::monomial(vec![0, 2], q(1));
        assert_eq!(r4.apply_operator(&lap), r2.scale(&q(16)));
    }

    proptest! {
        #[test]
        fn product_rule(a in arb_poly(3), b in arb_poly(3), i in 0usize..3) {
            let lhs = (&a * &b).deriv(i);
            let rhs = &(&a.deriv(i) * &b) + &(&a * &b.deriv(i));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn compose_with_variables_is_identity(a in arb_poly(3)) {
            let vars: Vec<Poly> = (0..3).map(|i| Poly::var(3, i)).collect();
            prop_assert_eq!(a.compose(&vars), a);
        }

        #[test]
        fn eval_is_multiplicative(a in arb_poly(2), b in arb_poly(2), x in -3i64..3, y in -3i64..3) {
            let pt = [q(x), q(y)];
            prop_assert_eq!((&a * &b).eval(&pt), a.eval(&pt) * b.eval(&pt));
        }
    }
}
