//! Constant-coefficient operators from trace series, the k-action on S(p),
//! invariants and the Cartan-Eilenberg complex S(p) (x) Lambda k*.

use std::collections::BTreeMap;

use num::Zero;

use crate::error::Result;
use crate::lie::{LieAlgebra, SymmetricPair};
use crate::linalg::{self, Mat};
use crate::poly::{monomials_of_degree, Poly};
use crate::rat::Q;
use crate::trace::{universal_density, DensityKind, TraceSeries};

/// d_series applied to f. Polynomials over p use the p-variables; over g, all of them.
pub fn apply_series_operator(pair: &SymmetricPair, series: &TraceSeries, f: &Poly) -> Poly {
    let on_p = f.nvars == pair.np;
    let phi = series.eval(pair, on_p);
    f.apply_operator(&phi)
}

/// d_D f for a density D, with the series taken to the order deg f.
pub fn apply_density(pair: &SymmetricPair, kind: DensityKind, f: &Poly) -> Result<Poly> {
    let order = f.degree().unwrap_or(0) as usize;
    let s = universal_density(kind, order, order.max(1))?;
    Ok(apply_series_operator(pair, &s, f))
}

/// Derivation action of x on S(h), h spanned by `vars` (indices into alg), assuming [x, h] in h.
fn derivation(alg: &LieAlgebra, x: &[Q], vars: std::ops::Range<usize>, f: &Poly) -> Poly {
    let mut out = Poly::zero(f.nvars);
    for (slot, i) in vars.clone().enumerate() {
        let d = f.deriv(slot);
        if d.is_zero() {
            continue;
        }
        let br = alg.bracket(x, &alg.basis_vec(i));
        let lin: Vec<Q> = vars.clone().map(|l| br[l].clone()).collect();
        if lin.iter().all(|c| c.is_zero()) {
            continue;
        }
        out = &out + &(&d * &Poly::linear(&lin));
    }
    out
}

/// K . f for K in k (adapted k-coordinates) and f over p.
pub fn k_action(pair: &SymmetricPair, k: &[Q], f: &Poly) -> Poly {
    derivation(&pair.alg, &pair.from_k(k), pair.p_range(), f)
}

/// ad x extended to S(g) as a derivation.
pub fn adjoint_action(alg: &LieAlgebra, x: &[Q], f: &Poly) -> Poly {
    derivation(alg, x, 0..alg.dim(), f)
}

pub fn is_k_invariant(pair: &SymmetricPair, f: &Poly) -> bool {
    (0..pair.nk).all(|i| {
        let mut k = vec![Q::zero(); pair.nk];
        k[i] = Q::from_integer(1.into());
        k_action(pair, &k, f).is_zero()
    })
}

/// Basis of the k-invariants of degree `degree` in S(p).
pub fn invariant_subspace(pair: &SymmetricPair, degree: u32) -> Vec<Poly> {
    let monos = monomials_of_degree(pair.np, degree);
    let images: Vec<Vec<Poly>> = (0..pair.nk)
        .map(|i| {
            let mut k = vec![Q::zero(); pair.nk];
            k[i] = Q::from_integer(1.into());
            monos.iter().map(|m| k_action(pair, &k, &Poly::monomial(m.clone(), Q::from_integer(1.into())))).collect()
        })
        .collect();
    let mut rows: Mat = Vec::new();
    for per_k in &images {
        for target in &monos {
            rows.push(per_k.iter().map(|img| img.coeff(target)).collect());
        }
    }
    let null = if rows.is_empty() {
        linalg::identity(monos.len())
    } else {
        linalg::nullspace(&rows, monos.len())
    };
    null.into_iter().map(|c| combine(&monos, &c, pair.np)).collect()
}

fn combine(monos: &[Vec<u32>], c: &[Q], nvars: usize) -> Poly {
    let mut p = Poly::zero(nvars);
    for (m, x) in monos.iter().zip(c) {
        p.add_term(m.clone(), x.clone());
    }
    p
}

/// An element of S(p) (x) Lambda^q k*: sorted k-index subsets mapped to polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct CEChain {
    pub q: usize,
    pub comps: BTreeMap<Vec<usize>, Poly>,
}

impl CEChain {
    pub fn zero(q: usize) -> Self {
        CEChain { q, comps: BTreeMap::new() }
    }

    pub fn insert(&mut self, subset: Vec<usize>, f: Poly) {
        let (sign, sorted) = match sort_with_sign(&subset) {
            Some(x) => x,
            None => return,
        };
        let f = f.scale(&Q::from_integer(sign.into()));
        let e = self.comps.entry(sorted.clone()).or_insert_with(|| Poly::zero(f.nvars));
        *e = &*e + &f;
        if e.is_zero() {
            self.comps.remove(&sorted);
        }
    }

    /// c(K_{i_1}, ..., K_{i_q}) on basis indices, any order.
    pub fn value(&self, args: &[usize], nvars: usize) -> Poly {
        match sort_with_sign(args) {
            Some((s, sorted)) => self
                .comps
                .get(&sorted)
                .map(|p| p.scale(&Q::from_integer(s.into())))
                .unwrap_or_else(|| Poly::zero(nvars)),
            None => Poly::zero(nvars),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }
}

/// Sign of the sorting permutation; None on a repeated index.
fn sort_with_sign(v: &[usize]) -> Option<(i64, Vec<usize>)> {
    let mut w = v.to_vec();
    let mut sign = 1;
    for i in 0..w.len() {
        for j in 0..w.len() - 1 - i {
            if w[j] > w[j + 1] {
                w.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if w.windows(2).any(|p| p[0] == p[1]) {
        return None;
    }
    Some((sign, w))
}

/// Increasing q-subsets of 0..n.
pub fn subsets(n: usize, q: usize) -> Vec<Vec<usize>> {
    if q == 0 {
        return vec![vec![]];
    }
    if q > n {
        return vec![];
    }
    let mut out = Vec::new();
    for mut s in subsets(n - 1, q - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out.extend(subsets(n - 1, q));
    out.sort();
    out
}

/// (dc)(K_0..K_q) = sum_i (-1)^i K_i . c(..^i..) + sum_{i<j} (-1)^{i+j} c([K_i, K_j], ..^i..^j..).
pub fn cartan_eilenberg_diff(pair: &SymmetricPair, c: &CEChain) -> CEChain {
    let nv = pair.np;
    let nk = pair.nk;
    let unit = |i: usize| {
        let mut k = vec![Q::zero(); nk];
        k[i] = Q::from_integer(1.into());
        k
    };
    let mut out = CEChain::zero(c.q + 1);
    for s in subsets(nk, c.q + 1) {
        let mut acc = Poly::zero(nv);
        for (i, &ki) in s.iter().enumerate() {
            let rest: Vec<usize> = s.iter().enumerate().filter(|&(l, _)| l != i).map(|(_, &x)| x).collect();
            let term = k_action(pair, &unit(ki), &c.value(&rest, nv));
            acc = if i % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                let br = &pair.alg.c[pair.np + s[i]][pair.np + s[j]];
                let rest: Vec<usize> = s.iter().enumerate().filter(|&(l, _)| l != i && l != j).map(|(_, &x)| x).collect();
                for (l, coef) in br[pair.np..].iter().enumerate() {
                    if coef.is_zero() {
                        continue;
                    }
                    let mut args = vec![l];
                    args.extend_from_slice(&rest);
                    let term = c.value(&args, nv).scale(coef);
                    acc = if (i + j) % 2 == 0 { &acc + &term } else { &acc - &term };
                }
            }
        }
        if !acc.is_zero() {
            out.comps.insert(s, acc);
        }
    }
    out
}

/// Degree-0 cocycles of polynomial degree d, i.e. ker d on C^0 restricted to S^d(p).
pub fn h0(pair: &SymmetricPair, degree: u32) -> Vec<Poly> {
    let monos = monomials_of_degree(pair.np, degree);
    let mut targets: Vec<(Vec<usize>, Vec<u32>)> = Vec::new();
    let images: Vec<CEChain> = monos
        .iter()
        .map(|m| {
            let mut c = CEChain::zero(0);
            c.insert(vec![], Poly::monomial(m.clone(), Q::from_integer(1.into())));
            cartan_eilenberg_diff(pair, &c)
        })
        .collect();
    for img in &images {
        for (s, p) in &img.comps {
            for e in p.terms.keys() {
                targets.push((s.clone(), e.clone()));
            }
        }
    }
    targets.sort();
    targets.dedup();
    if targets.is_empty() {
        return monos.iter().map(|m| Poly::monomial(m.clone(), Q::from_integer(1.into()))).collect();
    }
    let rows: Mat = targets
        .iter()
        .map(|(s, e)| images.iter().map(|img| img.comps.get(s).map(|p| p.coeff(e)).unwrap_or_else(Q::zero)).collect())
        .collect();
    linalg::nullspace(&rows, monos.len()).into_iter().map(|c| combine(&monos, &c, pair.np)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rat::{q, qr};
    use proptest::prelude::*;

    fn polys_same_span(a: &[Poly], b: &[Poly]) -> bool {
        let mut keys: Vec<Vec<u32>> = a.iter().chain(b).flat_map(|p| p.terms.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        let va: Vec<Vec<Q>> = a.iter().map(|p| keys.iter().map(|k| p.coeff(k)).collect()).collect();
        let vb: Vec<Vec<Q>> = b.iter().map(|p| keys.iter().map(|k| p.coeff(k)).collect()).collect();
        a.len() == b.len() && (a.is_empty() || linalg::same_span(&va, &vb))
    }

    #[test]
    fn sl2_invariants() {
        let m = catalog::sl2_model();
        let omega = m.parse_p("omega").unwrap();
        let inv = invariant_subspace(&m.pair, 2);
        assert!(polys_same_span(&inv, &[omega.clone()]));
        assert!(polys_same_span(&invariant_subspace(&m.pair, 4), &[omega.pow(2)]));
        assert!(invariant_subspace(&m.pair, 3).is_empty());
        assert_eq!(invariant_subspace(&m.pair, 0), vec![Poly::one(2)]);
    }

    #[test]
    fn solvable_invariants() {
        let m = catalog::solvable_model();
        let z = m.parse_p("z").unwrap();
        let w = m.parse_p("w").unwrap();
        let inv2 = invariant_subspace(&m.pair, 2);
        assert!(polys_same_span(&inv2, &[z.pow(2), w.clone()]));
        // z . S(p)^k_d lands in S(p)^k_{d+1}.
        for d in 0..4 {
            let next = invariant_subspace(&m.pair, d + 1);
            for f in invariant_subspace(&m.pair, d) {
                assert!(is_k_invariant(&m.pair, &(&f * &z)));
            }
            assert!(next.len() >= invariant_subspace(&m.pair, d).len());
        }
    }

    #[test]
    fn j_half_on_omega_squared() {
        let m = catalog::sl2_model();
        let omega = m.parse_p("omega").unwrap();
        let got = apply_density(&m.pair, DensityKind::JHalf, &omega.pow(2)).unwrap();
        // With the determinant series J^{1/2} = 1 + (a^2+b^2)/3 + (a^2+b^2)^2/90 + ...
        let want = &(&omega.pow(2) + &omega.scale(&qr(16, 3))) + &Poly::constant(2, qr(32, 45));
        assert_eq!(got, want);
        assert_eq!(apply_density(&m.pair, DensityKind::JHalf, &omega).unwrap(), &omega + &Poly::constant(2, qr(4, 3)));
    }

    #[test]
    fn densities_trivial_cases() {
        let pair = catalog::abelian(2);
        let f = Poly::var(2, 0).pow(4);
        for kind in [DensityKind::JHalf, DensityKind::J, DensityKind::QHalf] {
            assert_eq!(apply_density(&pair, kind, &f).unwrap(), f);
        }
        let sl2 = catalog::sl2();
        let one = TraceSeries::one(6);
        let g = Poly::var(2, 1).pow(3);
        assert_eq!(apply_series_operator(&sl2, &one, &g), g);
    }

    #[test]
    fn half_density_inverse() {
        let pair = catalog::sl2();
        let f = &Poly::var(2, 0).pow(4) + &Poly::var(2, 1).pow(2).scale(&q(3));
        let a = apply_density(&pair, DensityKind::JHalf, &f).unwrap();
        let back = apply_series_operator(&pair, &universal_density(DensityKind::JInvHalf, 4, 4).unwrap(), &a);
        assert_eq!(back, f);
        let g = &Poly::var(3, 0).pow(2) * &Poly::var(3, 2).pow(2);
        let a = apply_density(&pair, DensityKind::QHalf, &g).unwrap();
        assert_ne!(a, g);
        let back = apply_series_operator(&pair, &universal_density(DensityKind::QInvHalf, 4, 4).unwrap(), &a);
        assert_eq!(back, g);
    }

    #[test]
    fn h0_is_the_invariant_ring() {
        for pair in [catalog::sl2(), catalog::solvable(), catalog::semidirect()] {
            for d in 0..=4 {
                assert!(polys_same_span(&h0(&pair, d), &invariant_subspace(&pair, d)));
            }
        }
        let m = catalog::sl2_model();
        let mut c = CEChain::zero(0);
        c.insert(vec![], m.parse_p("omega").unwrap());
        assert!(cartan_eilenberg_diff(&m.pair, &c).is_zero());
    }

    #[test]
    fn chain_sign_normal_form() {
        let mut c = CEChain::zero(2);
        c.insert(vec![1, 0], Poly::one(1));
        assert_eq!(c.comps[&vec![0, 1]], Poly::constant(1, q(-1)));
        c.insert(vec![0, 0], Poly::one(1));
        assert_eq!(c.comps.len(), 1);
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    fn random_chain(np: usize, nk: usize, qd: usize, coeffs: &[i64]) -> CEChain {
        let monos: Vec<Vec<u32>> = (0..=2).flat_map(|d| monomials_of_degree(np, d)).collect();
        let mut c = CEChain::zero(qd);
        let mut it = coeffs.iter().cycle();
        for s in subsets(nk, qd) {
            let mut p = Poly::zero(np);
            for m in &monos {
                p.add_term(m.clone(), q(*it.next().unwrap()));
            }
            c.insert(s, p);
        }
        c
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn d_squared_is_zero(coeffs in prop::collection::vec(-3i64..4, 1..40), qd in 0usize..3) {
            for pair in [catalog::sl2(), catalog::diag_sl2(), catalog::semidirect(), catalog::solvable()] {
                let c = random_chain(pair.np, pair.nk, qd, &coeffs);
                let dd = cartan_eilenberg_diff(&pair, &cartan_eilenberg_diff(&pair, &c));
                prop_assert!(dd.is_zero());
            }
        }

        #[test]
        fn series_operator_is_linear(a in -5i64..5, b in -5i64..5) {
            let pair = catalog::sl2();
            let s = universal_density(DensityKind::JHalf, 4, 8).unwrap();
            let f = Poly::var(2, 0).pow(4);
            let g = &Poly::var(2, 0) * &Poly::var(2, 1).pow(3);
            let lhs = apply_series_operator(&pair, &s, &(&f.scale(&q(a)) + &g.scale(&q(b))));
            let rhs = &apply_series_operator(&pair, &s, &f).scale(&q(a)) + &apply_series_operator(&pair, &s, &g).scale(&q(b));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
