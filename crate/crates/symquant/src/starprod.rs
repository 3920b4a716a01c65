//! The order-4 E_lambda series, the product it induces on S(p)^k, the wheel
//! factor A and the exponential-coordinate formula.

use num::Zero;

use crate::error::{Error, Result};
use crate::freelie::{self, FreeAssocSeries, FreeLieSeries, X, Y};
use crate::lie::{Character, LieAlgebra, Space, SymmetricPair};
use crate::linalg;
use crate::polarization::{is_sigma_stable, polarization_check, PolarizationCandidate};
use crate::poly::Poly;
use crate::polyops::is_k_invariant;
use crate::rat::{factorial, q, qr, Q};
use crate::trace::{power_traces, universal_density, DensityKind, TraceSeries};

/// Highest order for which the E coefficients are known.
pub const E_MAX_ORDER: usize = 4;

/// The constant in ln E = c (tr_p - tr_k)(ad [X, Y])^2.
pub fn ln_e_constant() -> Q {
    qr(1, 240)
}

fn nested(letters: &[u8], order: usize) -> FreeAssocSeries {
    // [l0, [l1, ... [l_{n-2}, l_{n-1}]]]
    let n = letters.len();
    let mut acc = FreeAssocSeries::letter(letters[n - 1], order);
    for &l in letters[..n - 1].iter().rev() {
        acc = FreeAssocSeries::letter(l, order).commutator(&acc);
    }
    acc
}

/// The k-valued series H(X, Y) with E_lambda = exp(lambda(H)) E, through `order`.
pub fn h_component(order: usize) -> Result<FreeLieSeries> {
    if order > E_MAX_ORDER {
        return Err(Error::OrderTooHigh { requested: order, max: E_MAX_ORDER });
    }
    let n = order.max(1);
    let mut s = FreeAssocSeries::zero(n);
    let terms: [(&[u8], Q); 5] = [
        (&[X, Y], qr(1, 2)),
        (&[X, X, X, Y], qr(-1, 24)),
        (&[Y, Y, X, Y], qr(-1, 24)),
        (&[X, Y, X, Y], qr(-1, 48)),
        (&[Y, X, X, Y], qr(-1, 48)),
    ];
    for (w, c) in terms {
        if w.len() <= order {
            s = s.add(&nested(w, n).scale(&c));
        }
    }
    FreeLieSeries::from_assoc(&s)
}

fn bracket_xy(alg: &LieAlgebra, pair: &SymmetricPair, nvars: usize) -> Vec<Poly> {
    alg.bracket_poly(&pair.generic_p(nvars, 0), &pair.generic_p(nvars, pair.np))
}

/// (tr_p - tr_k)(ad [X, Y])^2 as a polynomial in (x, y) coordinates of p x p.
pub fn b_form_poly(pair: &SymmetricPair) -> Poly {
    let a = bracket_xy(&pair.alg, pair, 2 * pair.np);
    let t = power_traces(pair, &a, 2);
    &t[&(Space::P, 2)] - &t[&(Space::K, 2)]
}

/// ln E(X, Y) at order 4 for X, Y in p (p-coordinates).
pub fn ln_e_scalar(pair: &SymmetricPair, x: &[Q], y: &[Q]) -> Q {
    let mut pt = x.to_vec();
    pt.extend_from_slice(y);
    b_form_poly(pair).eval(&pt) * ln_e_constant()
}

/// E_lambda(X, Y) truncated at total degree `order`, in 2 np variables (x first, then y).
pub fn e_series(pair: &SymmetricPair, lambda: &Character, order: usize) -> Result<Poly> {
    if order > E_MAX_ORDER {
        return Err(Error::OrderTooHigh { requested: order, max: E_MAX_ORDER });
    }
    let nv = 2 * pair.np;
    let mut log = Poly::zero(nv);
    if order >= 2 && !lambda.is_zero() {
        let h = h_component(order)?.eval(&pair.alg, &pair.generic_p(nv, 0), &pair.generic_p(nv, pair.np));
        for (i, c) in lambda.lambda.iter().enumerate() {
            log = &log + &h[pair.np + i].scale(c);
        }
    }
    if order >= 4 {
        log = &log + &b_form_poly(pair).scale(&ln_e_constant());
    }
    let mut e = Poly::one(nv);
    let mut pow = Poly::one(nv);
    for k in 1..=order / 2 {
        pow = pow.mul_trunc(&log, order as u32);
        e = &e + &pow.scale(&(q(1) / factorial(k as u32)));
    }
    Ok(e.truncate(order as u32))
}

/// Result of the order-4 product. `truncated` is set when order-6 terms of E could contribute.
#[derive(Clone, Debug, PartialEq)]
pub struct CfProduct {
    pub value: Poly,
    pub truncated: bool,
}

/// E(d_X, d_Y) applied to f (x) g, then restricted to the diagonal.
pub fn bidifferential(e: &Poly, f: &Poly, g: &Poly) -> Poly {
    let np = f.nvars;
    let mut out = Poly::zero(np);
    for (exps, c) in &e.terms {
        let df = f.deriv_multi(&exps[..np]);
        if df.is_zero() {
            continue;
        }
        let dg = g.deriv_multi(&exps[np..]);
        if dg.is_zero() {
            continue;
        }
        out = &out + &(&df * &dg).scale(c);
    }
    out
}

/// f *_{CF, lambda} g on k-invariant polynomials over p.
pub fn star_cf(pair: &SymmetricPair, f: &Poly, g: &Poly, lambda: &Character) -> Result<CfProduct> {
    for (name, h) in [("f", f), ("g", g)] {
        if h.nvars != pair.np {
            return Err(Error::DimensionMismatch(format!("{name} must be a polynomial on p")));
        }
        if !is_k_invariant(pair, h) {
            return Err(Error::NotInvariant(name.into()));
        }
    }
    let e = e_series(pair, lambda, E_MAX_ORDER)?;
    let df = f.degree().unwrap_or(0);
    let dg = g.degree().unwrap_or(0);
    // Every term of ln E and lambda(H) has positive degree in both X and Y.
    let truncated = df > 0 && dg > 0 && df + dg > E_MAX_ORDER as u32 + 1;
    Ok(CfProduct { value: bidifferential(&e, f, g), truncated })
}

/// A = q^{1/2} / J^{1/2} restricted to p, as a universal trace series.
pub fn wheel_factor_a(order: usize) -> Result<TraceSeries> {
    let max = crate::trace::DEFAULT_MAX_ORDER;
    let qh = universal_density(DensityKind::QHalf, order, max)?.restrict_to_p();
    let jinv = universal_density(DensityKind::JInvHalf, order, max)?;
    Ok(qh.mul(&jinv))
}

pub fn wheel_factor_b() -> Q {
    q(1)
}

fn trunc_xy(p: &Poly, split: usize, n: u32) -> Poly {
    p.filter(|e| e[..split].iter().sum::<u32>() <= n)
}

fn mul_xy(a: &Poly, b: &Poly, split: usize, n: u32) -> Poly {
    trunc_xy(&(a * b), split, n)
}

/// exp(u) truncated in the (x, y) degree, for u without constant term.
fn exp_xy(u: &Poly, split: usize, n: u32) -> Poly {
    let mut acc = Poly::one(u.nvars);
    let mut pow = Poly::one(u.nvars);
    for k in 1..=n {
        pow = mul_xy(&pow, u, split, n).scale(&qr(1, k as i64));
        if pow.is_zero() {
            break;
        }
        acc = &acc + &pow;
    }
    acc
}

/// Factors of the exp-coordinate formula over variables (x, y, xi), each np wide.
struct ExpCoord {
    np: usize,
    n: u32,
    jx: Poly,
    jy: Poly,
    j_inv_p: Poly,
    e_shift: Poly,
}

fn exp_coord_parts(pair: &SymmetricPair, n: usize) -> Result<ExpCoord> {
    let np = pair.np;
    let nv = 3 * np;
    let split = 2 * np;
    let nn = n as u32;
    let x = pair.generic_p(nv, 0);
    let y = pair.generic_p(nv, np);
    let z = freelie::z_sym_capped(n.max(1), n.max(1))?.eval(&pair.alg, &x, &y);
    let zp: Vec<Poly> = z[..np].iter().map(|c| trunc_xy(c, split, nn)).collect();
    let jh = universal_density(DensityKind::JHalf, n, n.max(1))?.eval(pair, true);
    let jih = universal_density(DensityKind::JInvHalf, n, n.max(1))?.eval(pair, true);
    let xs: Vec<Poly> = (0..np).map(|i| Poly::var(nv, i)).collect();
    let ys: Vec<Poly> = (0..np).map(|i| Poly::var(nv, np + i)).collect();
    let mut shift = Poly::zero(nv);
    for i in 0..np {
        shift = &shift + &(&Poly::var(nv, split + i) * &(&zp[i] - &xs[i]));
    }
    Ok(ExpCoord {
        np,
        n: nn,
        jx: jh.compose(&xs),
        jy: jh.compose(&ys),
        j_inv_p: trunc_xy(&jih.compose(&zp), split, nn),
        e_shift: exp_xy(&shift, split, nn),
    })
}

/// Applies r(d_y) and sets y = 0; the result lives in (x, xi), 2 np variables.
fn apply_in_y(parts: &ExpCoord, r: &Poly, body: &Poly) -> Poly {
    let np = parts.np;
    let mut out = Poly::zero(2 * np);
    for (alpha, c) in &r.terms {
        let mut full = vec![0u32; 3 * np];
        full[np..2 * np].copy_from_slice(alpha);
        let d = body.deriv_multi(&full);
        for (e, x) in &d.terms {
            if e[np..2 * np].iter().all(|&k| k == 0) {
                let mut e2 = e[..np].to_vec();
                e2.extend_from_slice(&e[2 * np..]);
                out.add_term(e2, x * c);
            }
        }
    }
    out
}

/// Symbol s(X, xi) with e^X * R = e^{xi(X)} s(X, xi):
/// s = R(d_Y)[J^{1/2}(Y) J^{1/2}(X) J^{-1/2}(Z) e^{xi(Z) - xi(X)}] at Y = 0, Z = Z_sym(X, Y), B = 1.
/// Terms of X-degree up to jet_order - deg R are complete; the rest is dropped.
pub fn exp_coord_operator(pair: &SymmetricPair, r: &Poly, jet_order: usize) -> Result<Poly> {
    if r.nvars != pair.np {
        return Err(Error::DimensionMismatch("R must be a polynomial on p".into()));
    }
    if !is_k_invariant(pair, r) {
        return Err(Error::NotInvariant("R".into()));
    }
    let dr = r.degree().unwrap_or(0) as usize;
    if dr > jet_order || jet_order > freelie::DEFAULT_MAX_ORDER {
        return Err(Error::TruncationTooLow(format!(
            "jet order {jet_order} must lie between deg R = {dr} and {}",
            freelie::DEFAULT_MAX_ORDER
        )));
    }
    let parts = exp_coord_parts(pair, jet_order)?;
    let split = 2 * pair.np;
    let n = parts.n;
    let body = mul_xy(
        &mul_xy(&mul_xy(&parts.jy, &parts.jx, split, n), &parts.j_inv_p, split, n),
        &parts.e_shift,
        split,
        n,
    );
    let keep = (jet_order - dr) as u32;
    Ok(apply_in_y(&parts, r, &body).filter(|e| e[..pair.np].iter().sum::<u32>() <= keep))
}

/// chi(P) = P(f) for a sigma-stable polarization b at f in k-perp (f in file coordinates).
pub fn character_sigma_stable(pair: &SymmetricPair, p: &Poly, f: &[Q], b: &[Vec<Q>]) -> Result<Q> {
    let n = pair.dim();
    if f.len() != n || b.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch("f and b live in g".into()));
    }
    if p.nvars != pair.np {
        return Err(Error::DimensionMismatch("P must be a polynomial on p".into()));
    }
    if !is_k_invariant(pair, p) {
        return Err(Error::NotInvariant("P".into()));
    }
    let col = |i: usize| -> Vec<Q> { pair.change.iter().map(|row| row[i].clone()).collect() };
    let pairing = |v: &[Q]| f.iter().zip(v).fold(Q::zero(), |acc, (a, b)| acc + a * b);
    if pair.k_range().any(|i| !pairing(&col(i)).is_zero()) {
        return Err(Error::NotPolarization("f does not vanish on k".into()));
    }
    let rep = polarization_check(&pair.def.alg, &PolarizationCandidate { f: f.to_vec(), b: b.to_vec() });
    if !rep.is_polarization() {
        return Err(Error::NotPolarization(format!("{rep:?}")));
    }
    if !is_sigma_stable(pair, b) {
        return Err(Error::NotSigmaStable);
    }
    let point: Vec<Q> = pair.p_range().map(|i| pairing(&col(i))).collect();
    Ok(p.eval(&point))
}

/// The coadjoint action f -> f o exp(-ad K) for nilpotent ad K (file coordinates).
pub fn coadjoint_exp(alg: &LieAlgebra, k: &[Q], f: &[Q]) -> Option<Vec<Q>> {
    let n = alg.dim();
    let ad: Vec<Vec<Q>> = alg.ad(k).into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect();
    let mut term = linalg::identity(n);
    let mut total = linalg::identity(n);
    for j in 1..=n {
        term = linalg::mat_mul(&term, &ad).into_iter().map(|r| r.into_iter().map(|x| x / q(j as i64)).collect()).collect();
        total = total.iter().zip(&term).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
    }
    if linalg::mat_mul(&term, &ad).iter().any(|r| r.iter().any(|x| !x.is_zero())) {
        return None;
    }
    // (f o M)(e_j) = sum_i f_i M_ij.
    Some((0..n).map(|j| (0..n).fold(Q::zero(), |acc, i| acc + &f[i] * &total[i][j])).collect())
}
