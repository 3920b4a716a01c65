//! Isotropic subalgebras for B_f(X, Y) = f([X, Y]) and the Pukanszky condition.

use num::Zero;

use crate::lie::{LieAlgebra, SymmetricPair};
use crate::linalg::{self, Mat};
use crate::rat::Q;

#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationCandidate {
    /// Linear form on g, as values on the basis.
    pub f: Vec<Q>,
    pub b: Vec<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationReport {
    pub is_subalgebra: bool,
    pub is_isotropic: bool,
    pub is_maximal_isotropic: bool,
    /// None when b is not solvable or its unipotent part cannot be isolated.
    pub pukanszky: Option<bool>,
    pub note: Option<String>,
}

impl PolarizationReport {
    pub fn is_polarization(&self) -> bool {
        self.is_subalgebra && self.is_isotropic && self.is_maximal_isotropic
    }
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// g(f) = {X : f([X, Y]) = 0 for all Y}.
pub fn stabilizer(g: &LieAlgebra, f: &[Q]) -> Vec<Vec<Q>> {
    let n = g.dim();
    let m: Mat = (0..n)
        .map(|j| (0..n).map(|i| dot(f, &g.c[i][j])).collect())
        .collect();
    linalg::nullspace(&m, n)
}

fn in_span(basis: &[Vec<Q>], v: &[Q]) -> bool {
    v.iter().all(|x| x.is_zero()) || linalg::coords_in_span(basis, v).is_some()
}

fn span_of_brackets(g: &LieAlgebra, a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut vs = Vec::new();
    for x in a {
        for y in b {
            vs.push(g.bracket(x, y));
        }
    }
    if vs.is_empty() {
        return vs;
    }
    linalg::span_basis(&vs)
}

fn is_nilpotent(m: &Mat) -> bool {
    let n = m.len();
    let mut p = m.clone();
    for _ in 1..n {
        p = linalg::mat_mul(&p, m);
    }
    p.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

pub fn polarization_check(g: &LieAlgebra, cand: &PolarizationCandidate) -> PolarizationReport {
    let b = linalg::span_basis(&cand.b);
    let is_subalgebra = span_of_brackets(g, &b, &b).iter().all(|v| in_span(&b, v));
    let is_isotropic = b.iter().all(|x| b.iter().all(|y| dot(&cand.f, &g.bracket(x, y)).is_zero()));
    let gf = stabilizer(g, &cand.f);
    let twice = g.dim() + gf.len();
    let is_maximal_isotropic = is_isotropic && twice % 2 == 0 && b.len() == twice / 2;
    let (pukanszky, note) = match unipotent_part(g, &b) {
        Ok(bu) => {
            let mut sum = gf.clone();
            sum.extend(bu);
            (Some(linalg::same_span(&sum, &b)), None)
        }
        Err(why) => (None, Some(why)),
    };
    PolarizationReport { is_subalgebra, is_isotropic, is_maximal_isotropic, pukanszky, note }
}

/// Unipotent radical of a solvable subalgebra b: the radical of the trace form
/// tr(ad X ad Y) on b, accepted only if every basis element acts nilpotently on g.
pub fn unipotent_part(g: &LieAlgebra, b: &[Vec<Q>]) -> Result<Vec<Vec<Q>>, String> {
    if b.is_empty() {
        return Ok(vec![]);
    }
    let mut d = b.to_vec();
    for _ in 0..=g.dim() {
        if d.is_empty() {
            break;
        }
        d = span_of_brackets(g, &d, &d);
    }
    if !d.is_empty() {
        return Err("b is not solvable".into());
    }
    let ads: Vec<Mat> = b.iter().map(|x| g.ad(x)).collect();
    let gram: Mat = ads
        .iter()
        .map(|a| ads.iter().map(|c| linalg::trace(&linalg::mat_mul(a, c))).collect())
        .collect();
    let rad: Vec<Vec<Q>> = linalg::nullspace(&gram, b.len())
        .iter()
        .map(|c| {
            let mut v = vec![Q::zero(); g.dim()];
            for (ci, bi) in c.iter().zip(b) {
                for (x, y) in v.iter_mut().zip(bi) {
                    *x += ci * y;
                }
            }
            v
        })
        .collect();
    if rad.iter().any(|v| !is_nilpotent(&g.ad(v))) {
        return Err("trace-form radical is not ad-nilpotent (non-split torus?)".into());
    }
    Ok(rad)
}

/// Subspaces of Q^n spanned by {-1, 0, 1}-vectors, deduplicated, of dimension `dim`.
fn small_subspaces(n: usize, dim: usize) -> Vec<Vec<Vec<Q>>> {
    let mut cands: Vec<Vec<Q>> = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 1..total {
        let mut c = code;
        let v: Vec<Q> = (0..n)
            .map(|_| {
                let d = (c % 3) as i64 - 1;
                c /= 3;
                Q::from_integer(d.into())
            })
            .collect();
        let lead = v.iter().find(|x| !x.is_zero()).cloned();
        if lead == Some(Q::from_integer(1.into())) {
            cands.push(v);
        }
    }
    let mut out: Vec<Vec<Vec<Q>>> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    if dim == 0 {
        return vec![vec![]];
    }
    if dim > cands.len() {
        return out;
    }
    loop {
        let vs: Vec<Vec<Q>> = idx.iter().map(|&i| cands[i].clone()).collect();
        let basis = linalg::span_basis(&vs);
        if basis.len() == dim {
            let key = format!("{basis:?}");
            if seen.insert(key) {
                out.push(basis);
            }
        }
        // Next combination.
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < cands.len() - dim + i {
                idx[i] += 1;
                for j in i + 1..dim {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Searches sigma-stable polarizations at f (file coordinates) among small integer subspaces.
pub fn find_sigma_stable_polarization(pair: &SymmetricPair, f: &[Q]) -> Option<Vec<Vec<Q>>> {
    let g = &pair.def.alg;
    let gf = stabilizer(g, f);
    let twice = g.dim() + gf.len();
    if twice % 2 == 1 {
        return None;
    }
    let target = twice / 2;
    let col = |i: usize| -> Vec<Q> { pair.change.iter().map(|r| r[i].clone()).collect() };
    let lift = |coords: &[Q], block: std::ops::Range<usize>| -> Vec<Q> {
        let mut v = vec![Q::zero(); g.dim()];
        for (c, i) in coords.iter().zip(block) {
            for (x, y) in v.iter_mut().zip(col(i)) {
                *x += c * &y;
            }
        }
        v
    };
    for dk in 0..=pair.nk.min(target) {
        let dp = target - dk;
        if dp > pair.np {
            continue;
        }
        for sk in small_subspaces(pair.nk, dk) {
            for sp in small_subspaces(pair.np, dp) {
                let mut b: Vec<Vec<Q>> = sk.iter().map(|c| lift(c, pair.k_range())).collect();
                b.extend(sp.iter().map(|c| lift(c, pair.p_range())));
                let rep = polarization_check(g, &PolarizationCandidate { f: f.to_vec(), b: b.clone() });
                if rep.is_polarization() && rep.pukanszky != Some(false) {
                    return Some(b);
                }
            }
        }
    }
    None
}

pub fn is_sigma_stable(pair: &SymmetricPair, b: &[Vec<Q>]) -> bool {
    let images: Vec<Vec<Q>> = b.iter().map(|v| linalg::mat_vec(&pair.sigma, v)).collect();
    linalg::same_span(b, &images)
}
