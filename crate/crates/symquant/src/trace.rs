//! Formal series in power traces tr_S((ad X)^n) and the densities q, J.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::lie::{Space, SymmetricPair};
use crate::poly::Poly;
use crate::rat::{fmt_q, pow_q, q, qr, Q};

pub const DEFAULT_MAX_ORDER: usize = 8;

/// Sorted multiset of trace symbols tr_S((ad X)^n).
pub type TraceKey = Vec<(Space, u32)>;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceSeries {
    pub order: u32,
    pub terms: BTreeMap<TraceKey, Q>,
}

fn weight(k: &TraceKey) -> u32 {
    k.iter().map(|(_, n)| n).sum()
}

impl TraceSeries {
    pub fn zero(order: u32) -> Self {
        TraceSeries { order, terms: BTreeMap::new() }
    }

    pub fn one(order: u32) -> Self {
        let mut s = Self::zero(order);
        s.terms.insert(vec![], Q::one());
        s
    }

    pub fn symbol(space: Space, n: u32, order: u32) -> Self {
        let mut s = Self::zero(order);
        if n <= order {
            s.terms.insert(vec![(space, n)], Q::one());
        }
        s
    }

    pub fn coeff(&self, key: &[(Space, u32)]) -> Q {
        self.terms.get(key).cloned().unwrap_or_else(Q::zero)
    }

    fn add_term(&mut self, key: TraceKey, c: Q) {
        if c.is_zero() || weight(&key) > self.order {
            return;
        }
        let e = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, o: &TraceSeries) -> TraceSeries {
        let mut out = self.clone();
        out.order = self.order.min(o.order);
        out.terms.retain(|k, _| weight(k) <= out.order);
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> TraceSeries {
        let mut out = Self::zero(self.order);
        for (k, x) in &self.terms {
            out.add_term(k.clone(), x * c);
        }
        out
    }

    pub fn mul(&self, o: &TraceSeries) -> TraceSeries {
        let mut out = Self::zero(self.order.min(o.order));
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                if weight(k1) + weight(k2) > out.order {
                    continue;
                }
                let mut k = k1.clone();
                k.extend(k2.iter().cloned());
                k.sort();
                out.add_term(k, c1 * c2);
            }
        }
        out
    }

    pub fn constant(&self) -> Q {
        self.coeff(&[])
    }

    /// exp of a series with zero constant term.
    pub fn exp(&self) -> Result<TraceSeries> {
        if !self.constant().is_zero() {
            return Err(Error::Parse("exp needs a series without constant term".into()));
        }
        let mut acc = Self::one(self.order);
        let mut pow = Self::one(self.order);
        for k in 1..=self.order {
            pow = pow.mul(self).scale(&qr(1, k as i64));
            acc = acc.add(&pow);
        }
        Ok(acc)
    }

    /// log of a series with constant term 1.
    pub fn log(&self) -> Result<TraceSeries> {
        if !self.constant().is_one() {
            return Err(Error::Parse("log needs constant term 1".into()));
        }
        let u = self.add(&Self::one(self.order).scale(&q(-1)));
        let mut acc = Self::zero(self.order);
        let mut pow = Self::one(self.order);
        for k in 1..=self.order {
            pow = pow.mul(&u);
            let sign = if k % 2 == 1 { q(1) } else { q(-1) };
            acc = acc.add(&pow.scale(&(sign / q(k as i64))));
        }
        Ok(acc)
    }

    pub fn powr(&self, r: &Q) -> Result<TraceSeries> {
        self.log()?.scale(r).exp()
    }

    pub fn inverse(&self) -> Result<TraceSeries> {
        self.powr(&q(-1))
    }

    /// Substitutes X -> cX, multiplying each symbol of power n by c^n.
    pub fn scale_arg(&self, c: &Q) -> TraceSeries {
        let mut out = Self::zero(self.order);
        for (k, x) in &self.terms {
            out.add_term(k.clone(), x * pow_q(c, weight(k)));
        }
        out
    }

    /// Rewrites for X in p: odd powers vanish, tr_k and tr_g reduce to tr_p.
    pub fn restrict_to_p(&self) -> TraceSeries {
        let mut out = Self::zero(self.order);
        'terms: for (k, x) in &self.terms {
            let mut c = x.clone();
            let mut key = Vec::new();
            for &(s, n) in k {
                if n % 2 == 1 {
                    continue 'terms;
                }
                if s == Space::G {
                    c *= q(2);
                }
                key.push((Space::P, n));
            }
            key.sort();
            out.add_term(key, c);
        }
        out
    }

    pub fn truncate(&self, order: u32) -> TraceSeries {
        let mut out = Self::zero(order.min(self.order));
        for (k, x) in &self.terms {
            out.add_term(k.clone(), x.clone());
        }
        out
    }

    /// Polynomial in the coordinates of X, for X in p (`x_in_p`) or in g.
    pub fn eval(&self, pair: &SymmetricPair, x_in_p: bool) -> Poly {
        let nv = if x_in_p { pair.np } else { pair.dim() };
        let x = if x_in_p { pair.generic_p(nv, 0) } else { pair.generic_g(nv, 0) };
        let syms = power_traces(pair, &x, self.order);
        let mut out = Poly::zero(nv);
        for (k, c) in &self.terms {
            let mut t = Poly::constant(nv, c.clone());
            for &(s, n) in k {
                t = &t * &syms[&(s, n)];
            }
            out = &out + &t;
        }
        out
    }

    /// Drops every term containing a symbol that vanishes identically on the pair.
    pub fn prune(&self, pair: &SymmetricPair, x_in_p: bool) -> TraceSeries {
        let nv = if x_in_p { pair.np } else { pair.dim() };
        let x = if x_in_p { pair.generic_p(nv, 0) } else { pair.generic_g(nv, 0) };
        let syms = power_traces(pair, &x, self.order);
        let mut out = Self::zero(self.order);
        for (k, c) in &self.terms {
            if k.iter().all(|s| !syms[s].is_zero()) {
                out.add_term(k.clone(), c.clone());
            }
        }
        out
    }
}

/// tr_S((ad x)^n) for all spaces and 1 <= n <= order; x has polynomial coordinates.
pub fn power_traces(pair: &SymmetricPair, x: &[Poly], order: u32) -> BTreeMap<(Space, u32), Poly> {
    let nv = x[0].nvars;
    let d = pair.dim();
    let ad = pair.alg.ad_poly(x);
    let mut pow = ad.clone();
    let mut out = BTreeMap::new();
    for n in 1..=order {
        if n > 1 {
            let mut next = vec![vec![Poly::zero(nv); d]; d];
            for i in 0..d {
                for l in 0..d {
                    if pow[i][l].is_zero() {
                        continue;
                    }
                    for j in 0..d {
                        if !ad[l][j].is_zero() {
                            next[i][j] = &next[i][j] + &(&pow[i][l] * &ad[l][j]);
                        }
                    }
                }
            }
            pow = next;
        }
        for s in [Space::P, Space::K, Space::G] {
            let t = pair.range(s).fold(Poly::zero(nv), |acc, i| &acc + &pow[i][i]);
            out.insert((s, n), t);
        }
    }
    out
}

impl fmt::Display for TraceSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<&TraceKey> = self.terms.keys().collect();
        keys.sort_by_key(|k| (weight(k), (*k).clone()));
        let parts: Vec<String> = keys
            .iter()
            .map(|k| {
                let c = fmt_q(&self.terms[*k]);
                if k.is_empty() {
                    return c;
                }
                let sym: Vec<String> = k.iter().map(|(s, n)| format!("tr_{}(adX^{n})", s.label())).collect();
                format!("{c}*{}", sym.join("*"))
            })
            .collect();
        if parts.is_empty() {
            return write!(f, "0");
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => out.push_str(&format!(" - {rest}")),
                None => out.push_str(&format!(" + {p}")),
            }
        }
        write!(f, "{out}")
    }
}

/// Coefficients a_n of log(sinh x / x) = sum a_n x^n, for n <= order.
pub fn log_sinhc(order: u32) -> Vec<Q> {
    let n = order as usize;
    // u = sinh x / x - 1
    let mut u = vec![Q::zero(); n + 1];
    let mut k = 1;
    while 2 * k <= n {
        u[2 * k] = Q::one() / crate::rat::factorial(2 * k as u32 + 1);
        k += 1;
    }
    let mut acc = vec![Q::zero(); n + 1];
    let mut pow = vec![Q::zero(); n + 1];
    pow[0] = Q::one();
    for m in 1..=n {
        let mut next = vec![Q::zero(); n + 1];
        for i in 0..=n {
            if pow[i].is_zero() {
                continue;
            }
            for j in 0..=n - i {
                if !u[j].is_zero() {
                    next[i + j] += &pow[i] * &u[j];
                }
            }
        }
        pow = next;
        let sign = if m % 2 == 1 { q(1) } else { q(-1) };
        for i in 0..=n {
            acc[i] += &pow[i] * &sign / q(m as i64);
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    /// det_g(sinh(ad X/2)/(ad X/2)), X in g.
    Q,
    /// det_p(sinh ad X / ad X), X in p.
    J,
    JHalf,
    QHalf,
    JInvHalf,
    QInvHalf,
}

impl DensityKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "q" => DensityKind::Q,
            "J" | "j" => DensityKind::J,
            "J_half" | "j_half" => DensityKind::JHalf,
            "q_half" => DensityKind::QHalf,
            "J_inv_half" | "j_inv_half" => DensityKind::JInvHalf,
            "q_inv_half" => DensityKind::QInvHalf,
            _ => return Err(Error::Parse(format!("unknown density {s:?}"))),
        })
    }

    /// Whether the argument lives in p (true) or in g.
    pub fn on_p(self) -> bool {
        matches!(self, DensityKind::J | DensityKind::JHalf | DensityKind::JInvHalf)
    }
}

/// The universal series for a density kind, before specialization to a pair.
pub fn universal_density(kind: DensityKind, order: usize, max_order: usize) -> Result<TraceSeries> {
    if order > max_order {
        return Err(Error::OrderTooHigh { requested: order, max: max_order });
    }
    let order = order as u32;
    let a = log_sinhc(order);
    let (space, halve, r) = match kind {
        DensityKind::Q => (Space::G, true, q(1)),
        DensityKind::QHalf => (Space::G, true, qr(1, 2)),
        DensityKind::QInvHalf => (Space::G, true, qr(-1, 2)),
        DensityKind::J => (Space::P, false, q(1)),
        DensityKind::JHalf => (Space::P, false, qr(1, 2)),
        DensityKind::JInvHalf => (Space::P, false, qr(-1, 2)),
    };
    let mut exponent = TraceSeries::zero(order);
    for (n, an) in a.iter().enumerate() {
        if an.is_zero() {
            continue;
        }
        let mut c = an * &r;
        if halve {
            c *= pow_q(&qr(1, 2), n as u32);
        }
        exponent.add_term(vec![(space, n as u32)], c);
    }
    exponent.exp()
}

/// Density series specialized to the pair: symbols vanishing on it are dropped.
pub fn density_series(pair: &SymmetricPair, kind: DensityKind, order: usize) -> Result<TraceSeries> {
    density_series_capped(pair, kind, order, DEFAULT_MAX_ORDER)
}

pub fn density_series_capped(
    pair: &SymmetricPair,
    kind: DensityKind,
    order: usize,
    max_order: usize,
) -> Result<TraceSeries> {
    Ok(universal_density(kind, order, max_order)?.prune(pair, kind.on_p()))
}
