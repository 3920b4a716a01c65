//! Dense linear algebra over the rationals.

use num::{One, Zero};

use crate::rat::Q;

pub type Mat = Vec<Vec<Q>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect()
}

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![Q::zero(); c]; r]
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (r, k) = (a.len(), b.len());
    let c = if k == 0 { 0 } else { b[0].len() };
    let mut out = zeros(r, c);
    for i in 0..r {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..c {
                if !b[l][j].is_zero() {
                    out[i][j] += &a[i][l] * &b[l][j];
                }
            }
        }
    }
    out
}

pub fn mat_vec(a: &Mat, v: &[Q]) -> Vec<Q> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(Q::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Column matrix from a list of vectors.
pub fn from_columns(cols: &[Vec<Q>], n: usize) -> Mat {
    (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut Mat) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Mat) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Rank of the span of a set of vectors.
pub fn span_rank(vs: &[Vec<Q>]) -> usize {
    rank(&vs.to_vec())
}

/// Basis of {x : m x = 0}, one vector per free column with that entry set to 1.
pub fn nullspace(m: &Mat, cols: usize) -> Vec<Vec<Q>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); cols];
        v[free] = Q::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[row][free].clone();
        }
        out.push(v);
    }
    out
}

/// Solves a x = b; None if inconsistent. Free variables are set to 0.
pub fn solve(a: &Mat, b: &[Q]) -> Option<Vec<Q>> {
    let cols = if a.is_empty() { 0 } else { a[0].len() };
    let mut aug: Mat = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[row][cols].clone();
    }
    Some(x)
}

/// Coordinates of v in the span of `basis`, if it lies there.
pub fn coords_in_span(basis: &[Vec<Q>], v: &[Q]) -> Option<Vec<Q>> {
    let a = from_columns(basis, v.len());
    solve(&a, v)
}

pub fn inverse(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn trace(a: &Mat) -> Q {
    (0..a.len()).fold(Q::zero(), |acc, i| acc + &a[i][i])
}

/// Row-reduced basis of the span of `vs`.
pub fn span_basis(vs: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut a = vs.to_vec();
    let p = rref(&mut a);
    a.truncate(p.len());
    a
}

/// Basis of the intersection of two subspaces of Q^n.
pub fn intersect(a: &[Vec<Q>], b: &[Vec<Q>], n: usize) -> Vec<Vec<Q>> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    // Solve sum x_i a_i - sum y_j b_j = 0.
    let mut cols: Vec<Vec<Q>> = a.to_vec();
    cols.extend(b.iter().map(|v| v.iter().map(|x| -x.clone()).collect::<Vec<_>>()));
    let m = from_columns(&cols, n);
    let ns = nullspace(&m, cols.len());
    let vs: Vec<Vec<Q>> = ns
        .iter()
        .map(|c| {
            let mut v = vec![Q::zero(); n];
            for (ci, ai) in c.iter().zip(a) {
                if !ci.is_zero() {
                    for (x, y) in v.iter_mut().zip(ai) {
                        *x += ci * y;
                    }
                }
            }
            v
        })
        .collect();
    span_basis(&vs)
}

pub fn same_span(a: &[Vec<Q>], b: &[Vec<Q>]) -> bool {
    let ra = span_rank(a);
    let rb = span_rank(b);
    let mut both = a.to_vec();
    both.extend_from_slice(b);
    ra == rb && span_rank(&both) == ra
}
