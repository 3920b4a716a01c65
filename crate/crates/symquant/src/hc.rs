//! Iwasawa data and the Harish-Chandra projection, as a restriction S(p) -> S(p0)
//! and as a factor projection U(g)/U(g)k -> U(g0)/U(g0)k0.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::file_vector;
use crate::lie::{vector_name, LieAlgebra, SymmetricPair};
use crate::linalg::{self, Mat};
use crate::poly::Poly;
use crate::polyops::is_k_invariant;
use crate::rat::Q;
use crate::uea::{Pbw, Uea};
use num::{One, Zero};

/// Subspaces in adapted coordinates: g = k + p0 + n_plus, k = k0 + r.
#[derive(Clone, Debug)]
pub struct IwasawaData {
    pub pair: SymmetricPair,
    pub p0: Vec<Vec<Q>>,
    pub n_plus: Vec<Vec<Q>>,
    pub k0: Vec<Vec<Q>>,
    pub r: Vec<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IwasawaReport {
    pub dim_p0: usize,
    pub dim_k0: usize,
    pub dim_n_plus: usize,
    /// sigma(n_plus), adapted coordinates.
    pub n_minus: Vec<Vec<Q>>,
}

fn invalid(s: String) -> Error {
    Error::InvalidIwasawa(s)
}

impl IwasawaData {
    /// Vectors given over the file basis.
    pub fn from_file_vectors(
        pair: &SymmetricPair,
        p0: &[Vec<Q>],
        n_plus: &[Vec<Q>],
        k0: &[Vec<Q>],
        r: &[Vec<Q>],
    ) -> IwasawaData {
        let conv = |vs: &[Vec<Q>]| vs.iter().map(|v| pair.to_adapted(v)).collect();
        IwasawaData { pair: pair.clone(), p0: conv(p0), n_plus: conv(n_plus), k0: conv(k0), r: conv(r) }
    }

    /// Reads the "iwasawa" block of an algebra file.
    pub fn from_json(pair: &SymmetricPair, raw: &Value) -> Result<IwasawaData> {
        let block = raw.get("iwasawa").ok_or_else(|| Error::Parse("no iwasawa block".into()))?;
        let list = |key: &str| -> Result<Vec<Vec<Q>>> {
            let items = block
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("iwasawa.{key} must be a list")))?;
            items.iter().map(|v| file_vector(&pair.def.basis, v)).collect()
        };
        Ok(IwasawaData::from_file_vectors(pair, &list("p0")?, &list("n_plus")?, &list("k0")?, &list("r")?))
    }

    fn name(&self, v: &[Q]) -> String {
        vector_name(&self.pair.to_file(v), &self.pair.def.basis)
    }

    fn g0(&self) -> Vec<Vec<Q>> {
        self.p0.iter().chain(&self.k0).cloned().collect()
    }

    /// Columns n_plus, p0, k0, r: the PBW order used for the factor projection.
    fn iwasawa_basis(&self) -> Vec<Vec<Q>> {
        self.n_plus.iter().chain(&self.p0).chain(&self.k0).chain(&self.r).cloned().collect()
    }
}

fn sigma_adapted(pair: &SymmetricPair, v: &[Q]) -> Vec<Q> {
    v.iter().enumerate().map(|(i, c)| if i < pair.np { -c.clone() } else { c.clone() }).collect()
}

/// Decides every inclusion and direct-sum condition exactly.
pub fn validate_iwasawa(data: &IwasawaData) -> Result<IwasawaReport> {
    let pair = &data.pair;
    let n = pair.dim();
    let all = data.p0.iter().chain(&data.n_plus).chain(&data.k0).chain(&data.r);
    if all.clone().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!("Iwasawa vectors need {n} coordinates")));
    }
    for v in &data.p0 {
        if pair.k_range().any(|i| !v[i].is_zero()) {
            return Err(invalid(format!("p0 vector {} is not in p", data.name(v))));
        }
    }
    for v in data.k0.iter().chain(&data.r) {
        if pair.p_range().any(|i| !v[i].is_zero()) {
            return Err(invalid(format!("k0/r vector {} is not in k", data.name(v))));
        }
    }
    let kr: Vec<Vec<Q>> = data.k0.iter().chain(&data.r).cloned().collect();
    if kr.len() != pair.nk || linalg::span_rank(&kr) != pair.nk {
        return Err(invalid("k0 and r do not form a direct sum equal to k".into()));
    }
    let k_basis: Vec<Vec<Q>> = (0..pair.nk).map(|i| pair.from_k(&unit(pair.nk, i))).collect();
    let mut total = k_basis.clone();
    total.extend(data.p0.iter().cloned());
    total.extend(data.n_plus.iter().cloned());
    if total.len() != n || linalg::span_rank(&total) != n {
        return Err(invalid("k + p0 + n_plus is not a direct sum equal to g".into()));
    }
    let g0 = data.g0();
    let alg = &pair.alg;
    let inside = |span: &[Vec<Q>], v: &[Q]| v.iter().all(Q::is_zero) || linalg::coords_in_span(span, v).is_some();
    for a in &g0 {
        for b in &g0 {
            let c = alg.bracket(a, b);
            if !inside(&g0, &c) {
                return Err(invalid(format!("g0 is not a subalgebra: [{}, {}] = {}", data.name(a), data.name(b), data.name(&c))));
            }
        }
        if !inside(&g0, &sigma_adapted(pair, a)) {
            return Err(invalid(format!("g0 is not sigma-stable at {}", data.name(a))));
        }
    }
    for (label, src) in [("p0", &data.p0), ("k0", &data.k0), ("n_plus", &data.n_plus)] {
        for a in src {
            for b in &data.n_plus {
                let c = alg.bracket(a, b);
                if !inside(&data.n_plus, &c) {
                    return Err(invalid(format!(
                        "[{label}, n_plus] leaves n_plus: [{}, {}] = {}",
                        data.name(a),
                        data.name(b),
                        data.name(&c)
                    )));
                }
            }
        }
    }
    let n_minus: Vec<Vec<Q>> = data.n_plus.iter().map(|v| sigma_adapted(pair, v)).collect();
    let mut tri = n_minus.clone();
    tri.extend(g0.iter().cloned());
    tri.extend(data.n_plus.iter().cloned());
    if tri.len() != n || linalg::span_rank(&tri) != n {
        return Err(invalid("n_minus + g0 + n_plus is not a direct sum equal to g".into()));
    }
    Ok(IwasawaReport { dim_p0: data.p0.len(), dim_k0: data.k0.len(), dim_n_plus: data.n_plus.len(), n_minus })
}

fn unit(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

/// The k0 action on S(p0) as derivations, one per k0 basis vector.
fn k0_invariant(data: &IwasawaData, f: &Poly) -> Result<bool> {
    let d = data.p0.len();
    for k in &data.k0 {
        let mut out = Poly::zero(d);
        for (j, y) in data.p0.iter().enumerate() {
            let c = data.pair.alg.bracket(k, y);
            let coords = if c.iter().all(Q::is_zero) {
                vec![Q::zero(); d]
            } else {
                linalg::coords_in_span(&data.p0, &c).ok_or_else(|| invalid("[k0, p0] leaves p0".into()))?
            };
            out = &out + &(&f.deriv(j) * &Poly::linear(&coords));
        }
        if !out.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Substitutes each p-basis vector by its p0-component along g = (k + n_plus) + p0.
pub fn hc_restrict(data: &IwasawaData, f: &Poly, require_invariant: bool) -> Result<Poly> {
    let pair = &data.pair;
    if f.nvars != pair.np {
        return Err(Error::DimensionMismatch("hc_restrict takes a polynomial on p".into()));
    }
    if require_invariant && !is_k_invariant(pair, f) {
        return Err(Error::NotInvariant("input is not k-invariant".into()));
    }
    let mut cols: Vec<Vec<Q>> = data.p0.clone();
    cols.extend((0..pair.nk).map(|i| pair.from_k(&unit(pair.nk, i))));
    cols.extend(data.n_plus.iter().cloned());
    let m = linalg::from_columns(&cols, pair.dim());
    let d = data.p0.len();
    let images: Vec<Poly> = (0..pair.np)
        .map(|i| {
            let x = linalg::solve(&m, &unit(pair.dim(), i)).ok_or_else(|| invalid("decomposition is singular".into()))?;
            Ok(Poly::linear(&x[..d]))
        })
        .collect::<Result<_>>()?;
    let out = f.compose(&images);
    if require_invariant && !k0_invariant(data, &out)? {
        return Err(Error::NotInvariant("image is not k0-invariant".into()));
    }
    Ok(out)
}

/// g0 with basis p0 then k0, and g with basis n_plus, p0, k0, r.
fn iwasawa_algebras(data: &IwasawaData) -> Result<(LieAlgebra, Mat, LieAlgebra)> {
    let pair = &data.pair;
    let basis = data.iwasawa_basis();
    let names: Vec<String> = basis.iter().map(|v| data.name(v)).collect();
    let b = linalg::from_columns(&basis, pair.dim());
    let inv = linalg::inverse(&b).ok_or_else(|| invalid("Iwasawa basis is singular".into()))?;
    let g = pair.alg.change_basis(&b, names)?;
    let np0 = data.p0.len();
    let nn = data.n_plus.len();
    let d0 = np0 + data.k0.len();
    // g0 is a subalgebra spanned by letters nn..nn+d0, so its constants are a block of g's.
    let c = (0..d0)
        .map(|i| (0..d0).map(|j| (0..d0).map(|l| g.c[nn + i][nn + j][nn + l].clone()).collect()).collect())
        .collect();
    let g0 = LieAlgebra { names: g.names[nn..nn + d0].to_vec(), c };
    Ok((g, inv, g0))
}

/// Drops every monomial whose trailing letters include one at index >= `first_killed` (lambda = 0).
fn kill_trailing(u: &Uea, first_killed: usize) -> Uea {
    let mut out = Uea::zero();
    for (m, c) in &u.terms {
        if m.last().map_or(true, |&l| (l as usize) < first_killed) {
            out.add_term(m.clone(), c.clone());
        }
    }
    out
}

/// Symmetrized coordinates over p0 of a class in U(g0)/U(g0)k0 written in p0 letters.
fn g0_coordinates(pbw0: &Pbw, np0: usize, u: &Uea) -> Poly {
    let d0 = pbw0.alg.dim();
    let mut rest = kill_trailing(u, np0);
    let mut out = Poly::zero(np0);
    while !rest.is_zero() {
        let top = rest.top_symbol(d0);
        out = &out + &top.restrict(0, np0);
        rest = kill_trailing(&rest.sub(&pbw0.beta(&top)), np0);
    }
    out
}

/// HC projection of u in U(g), u in the adapted basis: straighten with n_plus leftmost and
/// k rightmost, reduce mod U(g)k, keep the n_plus-free part, reduce mod U(g0)k0.
pub fn hc_project_element(data: &IwasawaData, u: &Uea) -> Result<Poly> {
    validate_iwasawa(data)?;
    let (g, inv, g0) = iwasawa_algebras(data)?;
    let pbw = Pbw::new(&g);
    let nn = data.n_plus.len() as u8;
    let np0 = data.p0.len();
    // Rewrite each adapted letter in the Iwasawa basis.
    let letters: Vec<Uea> = (0..data.pair.dim()).map(|i| Uea::linear(&inv.iter().map(|r| r[i].clone()).collect::<Vec<_>>())).collect();
    let mut w = Uea::zero();
    for (m, c) in &u.terms {
        let mut t = Uea::one();
        for &x in m {
            t = pbw.mul(&t, &letters[x as usize]);
        }
        w = w.add(&t.scale(c));
    }
    let w = kill_trailing(&w, nn as usize + np0);
    let mut kept = Uea::zero();
    for (m, c) in &w.terms {
        if m.first().map_or(true, |&l| l >= nn) {
            kept.add_term(m.iter().map(|&l| l - nn).collect(), c.clone());
        }
    }
    Ok(g0_coordinates(&Pbw::new(&g0), np0, &kept))
}

/// The HC projection of the class of beta(f), f on p.
pub fn hc_projection_uea(data: &IwasawaData, f: &Poly) -> Result<Poly> {
    let pair = &data.pair;
    if f.nvars != pair.np {
        return Err(Error::DimensionMismatch("hc_projection_uea takes a polynomial on p".into()));
    }
    let pbw = Pbw::new(&pair.alg);
    hc_project_element(data, &pbw.beta(&f.embed(pair.dim(), 0)))
}

/// Product in U(g0)/U(g0)k0 of two classes given by symmetrized p0-coordinates.
pub fn g0_product(data: &IwasawaData, a: &Poly, b: &Poly) -> Result<Poly> {
    let (_, _, g0) = iwasawa_algebras(data)?;
    let pbw0 = Pbw::new(&g0);
    let d0 = g0.dim();
    let np0 = data.p0.len();
    let u = pbw0.mul(&pbw0.beta(&a.embed(d0, 0)), &pbw0.beta(&b.embed(d0, 0)));
    Ok(g0_coordinates(&pbw0, np0, &u))
}

/// Reads the "weyl" list of matrices (file basis) from an algebra file.
pub fn weyl_matrices(raw: &Value) -> Result<Vec<Mat>> {
    match raw.get("weyl") {
        None => Ok(vec![]),
        Some(Value::Array(ms)) => ms.iter().map(crate::io::rational_matrix).collect(),
        Some(_) => Err(Error::Parse("weyl must be a list of matrices".into())),
    }
}

/// Whether every image is fixed by the induced action of each matrix on S(p0).
pub fn weyl_invariance_check(data: &IwasawaData, images: &[Poly], weyl: &[Mat]) -> Result<bool> {
    let pair = &data.pair;
    let n = pair.dim();
    let d = data.p0.len();
    let mut subs = Vec::new();
    for w in weyl {
        if w.len() != n || w.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("Weyl matrices must be {n} x {n}")));
        }
        let mut cols = Vec::new();
        for y in &data.p0 {
            let img = pair.to_adapted(&linalg::mat_vec(w, &pair.to_file(y)));
            let c = if img.iter().all(Q::is_zero) { None } else { linalg::coords_in_span(&data.p0, &img) };
            match c {
                Some(c) => cols.push(c),
                None => return Err(Error::NotNormalizing(format!("{} leaves p0", data.name(y)))),
            }
        }
        // y_j -> sum_i M_ij y_i acting on the symbols.
        subs.push((0..d).map(|j| Poly::linear(&cols[j])).collect::<Vec<_>>());
    }
    for f in images {
        if f.nvars != d {
            return Err(Error::DimensionMismatch("images are polynomials on p0".into()));
        }
        if subs.iter().any(|s| f.compose(s) != *f) {
            return Ok(false);
        }
    }
    Ok(true)
}
