//! U(g) in PBW normal form over an ordered basis, symmetrization, projections
//! modulo U(g).k^lambda and the products built from them.
//!
//! A PBW monomial is a non-decreasing word of basis indices. For a symmetric
//! pair the adapted basis lists p before k, so k-letters sit on the right.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::lie::{Character, LieAlgebra, SymmetricPair};
use crate::linalg::{self, Mat};
use crate::poly::Poly;
use crate::polyops::{apply_density, is_k_invariant};
use crate::rat::{factorial, q, Q};
use crate::trace::DensityKind;

pub type Mono = Vec<u8>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Uea {
    pub terms: BTreeMap<Mono, Q>,
}

impl Uea {
    pub fn zero() -> Self {
        Uea::default()
    }

    pub fn scalar(c: Q) -> Self {
        let mut u = Uea::zero();
        u.add_term(vec![], c);
        u
    }

    pub fn one() -> Self {
        Uea::scalar(Q::one())
    }

    pub fn letter(i: usize) -> Self {
        let mut u = Uea::zero();
        u.add_term(vec![i as u8], Q::one());
        u
    }

    /// Linear element sum v_i e_i.
    pub fn linear(v: &[Q]) -> Self {
        let mut u = Uea::zero();
        for (i, c) in v.iter().enumerate() {
            u.add_term(vec![i as u8], c.clone());
        }
        u
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &Uea) -> Uea {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Uea) -> Uea {
        self.add(&o.scale(&q(-1)))
    }

    pub fn scale(&self, c: &Q) -> Uea {
        let mut out = Uea::zero();
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x * c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.len()).max()
    }

    /// Top-degree part read as a commutative polynomial in `nvars` variables.
    pub fn top_symbol(&self, nvars: usize) -> Poly {
        let mut p = Poly::zero(nvars);
        if let Some(d) = self.degree() {
            for (m, c) in self.terms.iter().filter(|(m, _)| m.len() == d) {
                p.add_term(counts(m, nvars), c.clone());
            }
        }
        p
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        let mut p = Poly::zero(names.len());
        for (m, c) in &self.terms {
            p.add_term(counts(m, names.len()), c.clone());
        }
        p.fmt_with(names)
    }
}

fn counts(m: &[u8], nvars: usize) -> Vec<u32> {
    let mut e = vec![0u32; nvars];
    for &l in m {
        e[l as usize] += 1;
    }
    e
}

/// Straightening context with per-instance memo tables.
pub struct Pbw<'a> {
    pub alg: &'a LieAlgebra,
    right: RefCell<HashMap<(Mono, u8), Uea>>,
    arrangements: RefCell<HashMap<Vec<u32>, Uea>>,
}

impl<'a> Pbw<'a> {
    pub fn new(alg: &'a LieAlgebra) -> Self {
        assert!(alg.dim() < 256, "PBW letters are stored as u8");
        Pbw { alg, right: RefCell::new(HashMap::new()), arrangements: RefCell::new(HashMap::new()) }
    }

    /// m . e_x in normal form, using m'.y.x = (m'.x).y + m'.[y, x] for y > x.
    pub fn mono_times_letter(&self, m: &[u8], x: u8) -> Uea {
        match m.last() {
            None => return Uea::letter(x as usize),
            Some(&y) if y <= x => {
                let mut w = m.to_vec();
                w.push(x);
                let mut u = Uea::zero();
                u.add_term(w, Q::one());
                return u;
            }
            _ => {}
        }
        let key = (m.to_vec(), x);
        if let Some(u) = self.right.borrow().get(&key) {
            return u.clone();
        }
        let (head, y) = (&m[..m.len() - 1], m[m.len() - 1]);
        let mut out = self.times_letter(&self.mono_times_letter(head, x), y);
        let br = &self.alg.c[y as usize][x as usize];
        for (l, c) in br.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&self.mono_times_letter(head, l as u8).scale(c));
            }
        }
        self.right.borrow_mut().insert(key, out.clone());
        out
    }

    pub fn times_letter(&self, u: &Uea, x: u8) -> Uea {
        let mut out = Uea::zero();
        for (m, c) in &u.terms {
            out = out.add(&self.mono_times_letter(m, x).scale(c));
        }
        out
    }

    pub fn mul(&self, a: &Uea, b: &Uea) -> Uea {
        let mut out = Uea::zero();
        for (m2, c2) in &b.terms {
            let mut t = a.clone();
            for &x in m2 {
                t = self.times_letter(&t, x);
            }
            out = out.add(&t.scale(c2));
        }
        out
    }

    pub fn commutator(&self, a: &Uea, b: &Uea) -> Uea {
        self.mul(a, b).sub(&self.mul(b, a))
    }

    /// Sum of all distinct orderings of the multiset x^alpha.
    fn arrangement_sum(&self, alpha: &[u32]) -> Uea {
        if alpha.iter().all(|&a| a == 0) {
            return Uea::one();
        }
        if let Some(u) = self.arrangements.borrow().get(alpha) {
            return u.clone();
        }
        let mut out = Uea::zero();
        for i in 0..alpha.len() {
            if alpha[i] > 0 {
                let mut rest = alpha.to_vec();
                rest[i] -= 1;
                out = out.add(&self.times_letter(&self.arrangement_sum(&rest), i as u8));
            }
        }
        self.arrangements.borrow_mut().insert(alpha.to_vec(), out.clone());
        out
    }

    /// Symmetrization of a polynomial over the full basis.
    pub fn beta(&self, f: &Poly) -> Uea {
        assert_eq!(f.nvars, self.alg.dim());
        let mut out = Uea::zero();
        for (alpha, c) in &f.terms {
            let n: u32 = alpha.iter().sum();
            let w = alpha.iter().fold(Q::one(), |acc, &a| acc * factorial(a)) / factorial(n);
            out = out.add(&self.arrangement_sum(alpha).scale(&(w * c)));
        }
        out
    }

    pub fn beta_inverse(&self, u: &Uea) -> Poly {
        let n = self.alg.dim();
        let mut rest = u.clone();
        let mut out = Poly::zero(n);
        while !rest.is_zero() {
            let top = rest.top_symbol(n);
            out = &out + &top;
            rest = rest.sub(&self.beta(&top));
        }
        out
    }
}

/// Drops trailing k-letters using m.K = -lambda(K) m modulo U(g).k^lambda.
pub fn reduce_mod_k(pair: &SymmetricPair, u: &Uea, lambda: &Character) -> Uea {
    let np = pair.np as u8;
    let mut out = Uea::zero();
    for (m, c) in &u.terms {
        let mut w = m.clone();
        let mut c = c.clone();
        while let Some(&l) = w.last() {
            if l < np {
                break;
            }
            c = -c * &lambda.lambda[(l - np) as usize];
            w.pop();
            if c.is_zero() {
                break;
            }
        }
        out.add_term(w, c);
    }
    out
}

/// The S in S(p) with u = beta(S) modulo U(g).k^lambda, k^lambda = {K + lambda(K)}.
pub fn project_mod_k_lambda(pbw: &Pbw, pair: &SymmetricPair, u: &Uea, lambda: &Character) -> Poly {
    let mut rest = reduce_mod_k(pair, u, lambda);
    let mut out = Poly::zero(pair.np);
    while !rest.is_zero() {
        let top = rest.top_symbol(pair.dim());
        let top_p = top.restrict(0, pair.np);
        out = &out + &top_p;
        rest = rest.sub(&reduce_mod_k(pair, &pbw.beta(&top), lambda));
    }
    out
}

/// The S' in S(p) with u = beta(d_{q^{1/2}} S') modulo U(g).k^lambda.
pub fn project_mod_k_lambda_q(pbw: &Pbw, pair: &SymmetricPair, u: &Uea, lambda: &Character) -> Result<Poly> {
    apply_density(pair, DensityKind::QInvHalf, &project_mod_k_lambda(pbw, pair, u, lambda))
}

/// P # Q: beta(d_{J^{1/2}} R) = beta(d_{J^{1/2}} P) . beta(d_{J^{1/2}} Q) modulo U(g).k^{-lambda}.
pub fn rouviere_sharp(pair: &SymmetricPair, p: &Poly, qq: &Poly, lambda: &Character) -> Result<Poly> {
    for (name, f) in [("P", p), ("Q", qq)] {
        if f.nvars != pair.np {
            return Err(Error::DimensionMismatch(format!("{name} must be a polynomial on p")));
        }
        if !is_k_invariant(pair, f) {
            return Err(Error::NotInvariant(name.into()));
        }
    }
    let pbw = Pbw::new(&pair.alg);
    let n = pair.dim();
    let a = pbw.beta(&apply_density(pair, DensityKind::JHalf, p)?.embed(n, 0));
    let b = pbw.beta(&apply_density(pair, DensityKind::JHalf, qq)?.embed(n, 0));
    let s = project_mod_k_lambda(&pbw, pair, &pbw.mul(&a, &b), &lambda.scale(&q(-1)));
    apply_density(pair, DensityKind::JInvHalf, &s)
}

/// f *_DK g with beta(d_{q^{1/2}}(f * g)) = beta(d_{q^{1/2}} f) . beta(d_{q^{1/2}} g), over g.
pub fn star_dk(pair: &SymmetricPair, f: &Poly, g: &Poly) -> Result<Poly> {
    let n = pair.dim();
    if f.nvars != n || g.nvars != n {
        return Err(Error::DimensionMismatch("star_dk takes polynomials on g".into()));
    }
    let pbw = Pbw::new(&pair.alg);
    let a = pbw.beta(&apply_density(pair, DensityKind::QHalf, f)?);
    let b = pbw.beta(&apply_density(pair, DensityKind::QHalf, g)?);
    let prod = pbw.beta_inverse(&pbw.mul(&a, &b));
    apply_density(pair, DensityKind::QInvHalf, &prod)
}

/// All PBW monomials of length at most d.
pub fn pbw_monomials(dim: usize, d: usize) -> Vec<Mono> {
    let mut out: Vec<Mono> = vec![vec![]];
    let mut frontier: Vec<Mono> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for m in &frontier {
            let start = m.last().copied().unwrap_or(0);
            for x in start..dim as u8 {
                let mut w = m.clone();
                w.push(x);
                next.push(w);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct DufloReport {
    pub degree: usize,
    /// dim of k^{-lambda}.U(g) intersected with U(g)^k, filtration <= degree.
    pub left_dim: usize,
    /// dim of U(g)^k intersected with U(g).k^{-lambda + tr_k}.
    pub right_dim: usize,
    pub invariant_dim: usize,
    pub equal: bool,
}

/// Compares k^{-lambda}.U(g) and U(g).k^{-lambda+tr_k} on the k-invariants of U(g)_{<= degree}.
pub fn duflo_relation_check(pair: &SymmetricPair, lambda: &Character, degree: usize) -> DufloReport {
    let right = lambda.scale(&q(-1)).add(&pair.tr_k());
    compare_ideals(pair, &lambda.scale(&q(-1)), &right, degree)
}

/// k^mu.U(g) against U(g).k^nu on the invariants, with k^mu = {K + mu(K)}.
fn compare_ideals(pair: &SymmetricPair, mu: &Character, nu: &Character, degree: usize) -> DufloReport {
    let pbw = Pbw::new(&pair.alg);
    let basis = pbw_monomials(pair.dim(), degree);
    let index: HashMap<&Mono, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let vec_of = |u: &Uea| -> Vec<Q> {
        let mut v = vec![Q::zero(); basis.len()];
        for (m, c) in &u.terms {
            v[index[m]] = c.clone();
        }
        v
    };
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut ad_rows: Mat = Vec::new();
    for i in 0..pair.nk {
        let k = Uea::letter(pair.np + i);
        let l_gen = k.add(&Uea::scalar(mu.lambda[i].clone()));
        let r_gen = k.add(&Uea::scalar(nu.lambda[i].clone()));
        for m in basis.iter().filter(|m| m.len() < degree) {
            let mu = {
                let mut u = Uea::zero();
                u.add_term(m.clone(), Q::one());
                u
            };
            left.push(vec_of(&pbw.mul(&l_gen, &mu)));
            right.push(vec_of(&pbw.mul(&mu, &r_gen)));
        }
        let cols: Vec<Vec<Q>> = basis
            .iter()
            .map(|m| {
                let mut u = Uea::zero();
                u.add_term(m.clone(), Q::one());
                vec_of(&pbw.commutator(&k, &u))
            })
            .collect();
        ad_rows.extend(linalg::transpose(&cols));
    }
    let n = basis.len();
    let inv = if ad_rows.is_empty() { linalg::identity(n) } else { linalg::nullspace(&ad_rows, n) };
    let span = |vs: &[Vec<Q>]| if vs.is_empty() { vec![] } else { linalg::span_basis(vs) };
    let li = if inv.is_empty() { vec![] } else { linalg::intersect(&span(&left), &inv, n) };
    let ri = if inv.is_empty() { vec![] } else { linalg::intersect(&span(&right), &inv, n) };
    let equal = li.len() == ri.len() && (li.is_empty() || linalg::same_span(&li, &ri));
    DufloReport { degree, left_dim: li.len(), right_dim: ri.len(), invariant_dim: inv.len(), equal }
}
