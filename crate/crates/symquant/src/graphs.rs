//! Colored Kontsevich graphs: angle forms, admissibility, canonical labels,
//! Monte-Carlo weights on gauge-fixed configuration spaces and the operators B_Gamma.
//!
//! Vertices 0..n are aerial, n..n+m are ground. Coordinates of the gauge slice
//! are ordered aerial (x, y) pairs first, then free ground abscissas; with this
//! orientation the (+,+) wedge has weight +1/2.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use num::complex::Complex64;
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lie::{LieAlgebra, SymmetricPair};
use crate::poly::Poly;
use crate::rat::qr;

pub const MAX_AERIAL: usize = 3;
pub const MAX_GROUND: usize = 3;
/// Aerial vertices allowed in weight integration.
pub const MAX_INTEGRATED_AERIAL: usize = 2;
const STREAMS: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Plus,
    Minus,
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl Color {
    pub const TWO: [Color; 2] = [Color::Plus, Color::Minus];
    pub const FOUR: [Color; 4] = [Color::PlusPlus, Color::PlusMinus, Color::MinusPlus, Color::MinusMinus];

    pub fn parse(s: &str) -> Result<Color> {
        Ok(match s {
            "+" => Color::Plus,
            "-" => Color::Minus,
            "++" => Color::PlusPlus,
            "+-" => Color::PlusMinus,
            "-+" => Color::MinusPlus,
            "--" => Color::MinusMinus,
            _ => return Err(Error::Parse(format!("unknown color {s:?}"))),
        })
    }

    pub fn is_four(self) -> bool {
        !matches!(self, Color::Plus | Color::Minus)
    }

    /// (eps1, eps2) for four colors; two colors report (eps, 0).
    pub fn signs(self) -> (i8, i8) {
        match self {
            Color::Plus => (1, 0),
            Color::Minus => (-1, 0),
            Color::PlusPlus => (1, 1),
            Color::PlusMinus => (1, -1),
            Color::MinusPlus => (-1, 1),
            Color::MinusMinus => (-1, -1),
        }
    }

    fn code(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Color::Plus => "+",
            Color::Minus => "-",
            Color::PlusPlus => "++",
            Color::PlusMinus => "+-",
            Color::MinusPlus => "-+",
            Color::MinusMinus => "--",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dst {
    Vertex(usize),
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub dst: Dst,
    pub color: Color,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Palette {
    TwoColor,
    FourColor,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColoredGraph {
    pub n: usize,
    pub m: usize,
    pub edges: Vec<Edge>,
}

fn into_ground_ok(c: Color) -> bool {
    c.signs().0 == 1
}

fn from_ground_ok(c: Color) -> bool {
    c.signs().0 == -1
}

fn to_infinity_ok(c: Color) -> bool {
    matches!(c, Color::Minus | Color::MinusMinus)
}

impl ColoredGraph {
    /// Validates the admissibility rules.
    pub fn new(n: usize, m: usize, edges: Vec<Edge>) -> Result<Self> {
        let g = ColoredGraph { n, m, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(true)
    }

    /// With `colors` false only the structure is checked, as for operators on all of g*.
    fn validate_with(&self, colors: bool) -> Result<()> {
        let bad = |s: String| Err(Error::ColorArityMismatch(s));
        let total = self.n + self.m;
        let four = self.edges.first().map(|e| e.color.is_four());
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if e.src >= total {
                return bad(format!("source {} out of range", e.src));
            }
            if Some(e.color.is_four()) != four {
                return bad("mixed two- and four-color edges".into());
            }
            if !seen.insert(*e) {
                return bad(format!("double edge {e:?}"));
            }
            if colors && self.is_ground(e.src) && !from_ground_ok(e.color) {
                return bad(format!("edge from ground vertex {} must carry a minus color", e.src));
            }
            match e.dst {
                Dst::Vertex(t) => {
                    if t >= total {
                        return bad(format!("target {t} out of range"));
                    }
                    if t == e.src {
                        return bad(format!("loop at {t}"));
                    }
                    if colors && self.is_ground(t) && !into_ground_ok(e.color) {
                        return bad(format!("edge into ground vertex {t} must carry a plus color"));
                    }
                }
                Dst::Infinity => {
                    if colors && !to_infinity_ok(e.color) {
                        return bad("edges to infinity carry the color - or --".into());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_ground(&self, v: usize) -> bool {
        v >= self.n && v < self.n + self.m
    }

    pub fn palette(&self) -> Palette {
        match self.edges.first() {
            Some(e) if e.color.is_four() => Palette::FourColor,
            _ => Palette::TwoColor,
        }
    }

    /// Edges that enter the form Omega_Gamma.
    pub fn finite_edges(&self) -> Vec<Edge> {
        self.edges.iter().copied().filter(|e| e.dst != Dst::Infinity).collect()
    }

    pub fn config_dim(&self) -> i64 {
        2 * self.n as i64 + self.m as i64 - 2
    }

    /// Renumbers aerial vertices by `perm` (old index -> new index).
    pub fn relabel(&self, perm: &[usize]) -> ColoredGraph {
        let map = |v: usize| if v < self.n { perm[v] } else { v };
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                src: map(e.src),
                dst: match e.dst {
                    Dst::Vertex(t) => Dst::Vertex(map(t)),
                    Dst::Infinity => Dst::Infinity,
                },
                color: e.color,
            })
            .collect();
        ColoredGraph { n: self.n, m: self.m, edges }
    }

    fn encoding(&self) -> Vec<(usize, usize, u8)> {
        let inf = self.n + self.m;
        let mut v: Vec<(usize, usize, u8)> = self
            .edges
            .iter()
            .map(|e| {
                let t = match e.dst {
                    Dst::Vertex(t) => t,
                    Dst::Infinity => inf,
                };
                (e.src, t, e.color.code())
            })
            .collect();
        v.sort();
        v
    }

    /// Lexicographically least sorted edge list over all aerial renumberings.
    pub fn canonical(&self) -> ColoredGraph {
        let mut best: Option<(Vec<(usize, usize, u8)>, ColoredGraph)> = None;
        for perm in permutations(self.n) {
            let g = self.relabel(&perm);
            let enc = g.encoding();
            if best.as_ref().map_or(true, |(b, _)| enc < *b) {
                let mut g = g;
                g.edges.sort();
                best = Some((enc, g));
            }
        }
        best.map(|(_, g)| g).unwrap_or_else(|| self.clone())
    }

    /// Reflection z -> -conj(z): ground order reversed, edge order kept.
    pub fn mirror(&self) -> ColoredGraph {
        let map = |v: usize| if self.is_ground(v) { self.n + (self.n + self.m - 1 - v) } else { v };
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                src: map(e.src),
                dst: match e.dst {
                    Dst::Vertex(t) => Dst::Vertex(map(t)),
                    Dst::Infinity => Dst::Infinity,
                },
                color: e.color,
            })
            .collect();
        ColoredGraph { n: self.n, m: self.m, edges }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let perr = |s: &str| Error::Parse(s.to_string());
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| perr("graph needs an integer n"))? as usize;
        let m = v.get("m").and_then(Value::as_u64).ok_or_else(|| perr("graph needs an integer m"))? as usize;
        let mut edges = Vec::new();
        for e in v.get("edges").and_then(Value::as_array).ok_or_else(|| perr("graph needs an edges array"))? {
            let a = e.as_array().filter(|a| a.len() == 3).ok_or_else(|| perr("edge must be [src, dst, color]"))?;
            let src = a[0].as_u64().ok_or_else(|| perr("edge source must be an integer"))? as usize;
            let dst = match &a[1] {
                Value::String(s) if s == "inf" => Dst::Infinity,
                x => Dst::Vertex(x.as_u64().ok_or_else(|| perr("edge target must be an integer or \"inf\""))? as usize),
            };
            let color = Color::parse(a[2].as_str().ok_or_else(|| perr("edge color must be a string"))?)?;
            edges.push(Edge { src, dst, color });
        }
        ColoredGraph::new(n, m, edges)
    }

    pub fn to_json(&self) -> Value {
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                let dst = match e.dst {
                    Dst::Vertex(t) => json!(t),
                    Dst::Infinity => json!("inf"),
                };
                json!([e.src, dst, e.color.to_string()])
            })
            .collect();
        json!({"n": self.n, "m": self.m, "edges": edges})
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Sign with w(mirror(G)) = sign * w(G) in this module's orientation:
/// each angle form changes sign, and the reflection has degree
/// (-1)^(n + m + 1 + m(m-1)/2) on the quotient by the affine group.
pub fn mirror_sign(g: &ColoredGraph) -> f64 {
    let e = g.finite_edges().len();
    let k = e + g.n + g.m + 1 + g.m * g.m.saturating_sub(1) / 2;
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeroReason {
    DimensionMismatch,
    /// A vertex z with exactly two edges, x <- z (solid) and z -> y (dashed), y aerial.
    PatternBulletLeftarrowDashrightarrow,
    DoubleEdgeSameColor,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeroVerdict {
    Zero(ZeroReason),
    Unknown,
}

pub fn zero_weight_predicate(g: &ColoredGraph) -> ZeroVerdict {
    let mut seen = BTreeSet::new();
    if g.edges.iter().any(|e| !seen.insert(*e)) {
        return ZeroVerdict::Zero(ZeroReason::DoubleEdgeSameColor);
    }
    if g.finite_edges().len() as i64 != g.config_dim() {
        return ZeroVerdict::Zero(ZeroReason::DimensionMismatch);
    }
    if has_lemma_pattern(g) {
        return ZeroVerdict::Zero(ZeroReason::PatternBulletLeftarrowDashrightarrow);
    }
    ZeroVerdict::Unknown
}

/// The vertex pattern x <- z -> y (second edge dashed) with no other edge at z.
pub fn has_lemma_pattern(g: &ColoredGraph) -> bool {
    if g.palette() != Palette::TwoColor {
        return false;
    }
    (0..g.n).any(|z| {
        let incoming = g.edges.iter().any(|e| e.dst == Dst::Vertex(z));
        let out: Vec<&Edge> = g.edges.iter().filter(|e| e.src == z).collect();
        if incoming || out.len() != 2 {
            return false;
        }
        let plus = out.iter().find(|e| e.color == Color::Plus);
        let minus = out.iter().find(|e| e.color == Color::Minus);
        match (plus, minus) {
            (Some(p), Some(mi)) => match (p.dst, mi.dst) {
                (Dst::Vertex(x), Dst::Vertex(y)) => x != y && y < g.n,
                _ => false,
            },
            _ => false,
        }
    })
}

/// Angle value and its partial derivatives in (Re, Im) of both points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleForm {
    pub value: f64,
    pub dp: [f64; 2],
    pub dq: [f64; 2],
}

/// phi_color(p, q) as a sum of arguments of p - q, p - conj q, p + conj q, p + q.
pub fn angle(p: Complex64, q: Complex64, color: Color) -> Result<AngleForm> {
    let (e1, e2) = color.signs();
    let (e1, e2) = (e1 as f64, e2 as f64);
    // (coefficient, w, d w / d(q_x, q_y) factors)
    let terms: Vec<(f64, Complex64, [f64; 2])> = if color.is_four() {
        vec![
            (1.0, p - q, [-1.0, -1.0]),
            (e1, p - q.conj(), [-1.0, 1.0]),
            (e2, p + q.conj(), [1.0, -1.0]),
            (e1 * e2, p + q, [1.0, 1.0]),
        ]
    } else {
        vec![(1.0, p - q, [-1.0, -1.0]), (e1, p - q.conj(), [-1.0, 1.0])]
    };
    let mut out = AngleForm { value: 0.0, dp: [0.0; 2], dq: [0.0; 2] };
    for (c, w, fq) in terms {
        let r2 = w.norm_sqr();
        if r2 == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        let g = [-w.im / r2, w.re / r2];
        out.value += c * w.im.atan2(w.re);
        for k in 0..2 {
            out.dp[k] += c * g[k];
            out.dq[k] += c * g[k] * fq[k];
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// One sampled point: position plus its dependence on the slice coordinates.
struct Placed {
    z: Complex64,
    /// (coordinate column, d z / d coordinate)
    deps: Vec<(usize, Complex64)>,
}

fn draw_radius(rng: &mut ChaCha8Rng) -> f64 {
    // density 1/(1+r)^2 on (0, inf)
    let u: f64 = rng.gen();
    u / (1.0 - u)
}

fn radial(r: f64) -> f64 {
    1.0 / ((1.0 + r) * (1.0 + r))
}

/// Mixture over half-disk kernels at ground centers and full-disk kernels at aerial centers.
fn mixture_density(z: Complex64, ground: &[f64], aerial: &[Complex64]) -> f64 {
    let k = (ground.len() + aerial.len()) as f64;
    let mut d = 0.0;
    for &c in ground {
        let r = (z - Complex64::new(c, 0.0)).norm();
        d += radial(r) / (PI * r);
    }
    for &a in aerial {
        let r = (z - a).norm();
        d += radial(r) / (2.0 * PI * r);
    }
    d / k
}

fn sample_aerial(rng: &mut ChaCha8Rng, ground: &[f64], aerial: &[Complex64]) -> Complex64 {
    let k = ground.len() + aerial.len();
    let pick = rng.gen_range(0..k);
    let r = draw_radius(rng);
    if pick < ground.len() {
        let th = rng.gen::<f64>() * PI;
        Complex64::new(ground[pick], 0.0) + Complex64::from_polar(r, th)
    } else {
        let th = rng.gen::<f64>() * 2.0 * PI;
        aerial[pick - ground.len()] + Complex64::from_polar(r, th)
    }
}

/// Draws a point of the gauge slice; returns placements (aerial then ground) and the proposal density.
fn sample_slice(g: &ColoredGraph, rng: &mut ChaCha8Rng) -> (Vec<Placed>, f64) {
    let mut density = 1.0;
    let mut col = 0usize;
    let mut ground_pos: Vec<f64> = Vec::new();
    let mut ground_placed: Vec<Placed> = Vec::new();
    let mut aerial: Vec<Placed> = Vec::new();
    let mut aerial_start = 0usize;
    match g.m {
        0 => {
            aerial.push(Placed { z: Complex64::new(0.0, 1.0), deps: vec![] });
            aerial_start = 1;
        }
        1 => {
            ground_pos.push(0.0);
            ground_placed.push(Placed { z: Complex64::zero(), deps: vec![] });
            let th = rng.gen::<f64>() * PI;
            density *= 1.0 / PI;
            let z = Complex64::from_polar(1.0, th);
            aerial.push(Placed { z, deps: vec![(col, Complex64::new(-th.sin(), th.cos()))] });
            col += 1;
            aerial_start = 1;
        }
        _ => {
            ground_pos.extend([0.0, 1.0]);
            ground_placed.push(Placed { z: Complex64::zero(), deps: vec![] });
            ground_placed.push(Placed { z: Complex64::new(1.0, 0.0), deps: vec![] });
        }
    }
    let aerial_cols = col;
    col += 2 * (g.n - aerial_start);
    if g.m >= 3 {
        let mut t = 1.0;
        for _ in 2..g.m {
            let s = draw_radius(rng);
            density *= radial(s);
            t += s;
            ground_pos.push(t);
            ground_placed.push(Placed { z: Complex64::new(t, 0.0), deps: vec![] });
        }
        // t_j = 1 + s_3 + ... + s_j, so d t_j / d s_i = 1 for i <= j.
        for j in 2..g.m {
            ground_placed[j].deps = (2..=j).map(|i| (col + i - 2, Complex64::new(1.0, 0.0))).collect();
        }
    }
    let mut c = aerial_cols;
    for _ in aerial_start..g.n {
        let centers: Vec<Complex64> = aerial.iter().map(|a| a.z).collect();
        let z = sample_aerial(rng, &ground_pos, &centers);
        density *= mixture_density(z, &ground_pos, &centers);
        aerial.push(Placed { z, deps: vec![(c, Complex64::new(1.0, 0.0)), (c + 1, Complex64::new(0.0, 1.0))] });
        c += 2;
    }
    aerial.extend(ground_placed);
    (aerial, density)
}

fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for i in 0..n {
        let piv = (i..n).max_by(|&x, &y| a[x][i].abs().total_cmp(&a[y][i].abs())).unwrap();
        if a[piv][i] == 0.0 {
            return 0.0;
        }
        if piv != i {
            a.swap(piv, i);
            det = -det;
        }
        det *= a[i][i];
        for r in i + 1..n {
            let f = a[r][i] / a[i][i];
            for k in i..n {
                a[r][k] -= f * a[i][k];
            }
        }
    }
    det
}

/// Omega_Gamma / proposal density at one sample; zero outside the domain.
fn sample_value(g: &ColoredGraph, edges: &[Edge], dim: usize, rng: &mut ChaCha8Rng) -> f64 {
    let (pts, density) = sample_slice(g, rng);
    if pts[..g.n].iter().any(|p| p.z.im <= 0.0) {
        return 0.0;
    }
    let mut jac = vec![vec![0.0; dim]; edges.len()];
    for (row, e) in edges.iter().enumerate() {
        let t = match e.dst {
            Dst::Vertex(t) => t,
            Dst::Infinity => unreachable!(),
        };
        let (p, q) = (&pts[e.src], &pts[t]);
        let a = match angle(p.z, q.z, e.color) {
            Ok(a) => a,
            Err(_) => return 0.0,
        };
        for &(c, dz) in &p.deps {
            jac[row][c] += a.dp[0] * dz.re + a.dp[1] * dz.im;
        }
        for &(c, dz) in &q.deps {
            jac[row][c] += a.dq[0] * dz.re + a.dq[1] * dz.im;
        }
    }
    determinant(jac) / density
}

/// w_Gamma = (2 pi)^{-#E} times the integral of Omega_Gamma, by importance sampling.
pub fn weight_mc(g: &ColoredGraph, samples: u64, seed: u64) -> Result<WeightEstimate> {
    g.validate()?;
    if g.palette() == Palette::FourColor {
        return Err(Error::ColorArityMismatch("weights are integrated for two-color graphs only".into()));
    }
    if g.n > MAX_INTEGRATED_AERIAL || g.m > MAX_GROUND {
        return Err(Error::CapExceeded(format!(
            "integration supports n <= {MAX_INTEGRATED_AERIAL}, m <= {MAX_GROUND}"
        )));
    }
    let dim = g.config_dim();
    if dim <= 0 || (g.m <= 1 && g.n == 0) {
        return Err(Error::GaugeUnderdetermined(dim));
    }
    let edges = g.finite_edges();
    if edges.len() as i64 != dim {
        return Ok(WeightEstimate { value: 0.0, std_error: 0.0, samples, seed });
    }
    if samples < 2 {
        return Err(Error::CapExceeded("at least two samples are needed".into()));
    }
    let dim = dim as usize;
    let norm = (2.0 * PI).powi(edges.len() as i32);
    let sums: Vec<(f64, f64)> = (0..STREAMS)
        .into_par_iter()
        .map(|s| {
            let count = samples / STREAMS + u64::from(s < samples % STREAMS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let mut acc = (0.0, 0.0);
            for _ in 0..count {
                let v = sample_value(g, &edges, dim, &mut rng) / norm;
                acc.0 += v;
                acc.1 += v * v;
            }
            acc
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(WeightEstimate { value: mean, std_error: (var / n).sqrt(), samples, seed })
}

/// Options for `enumerate_graphs`.
#[derive(Clone, Debug)]
pub struct EnumerationSpec {
    pub n: usize,
    pub m: usize,
    pub out_degrees: Vec<usize>,
    pub palette: Palette,
    pub allow_infinity: bool,
}

/// All admissible graphs with aerial out-edges only, up to aerial renumbering.
pub fn enumerate_graphs(spec: &EnumerationSpec) -> Result<Vec<ColoredGraph>> {
    let (n, m) = (spec.n, spec.m);
    if n > MAX_AERIAL || m > MAX_GROUND {
        return Err(Error::CapExceeded(format!("enumeration supports n <= {MAX_AERIAL}, m <= {MAX_GROUND}")));
    }
    if spec.out_degrees.len() != n {
        return Err(Error::DimensionMismatch("one out-degree per aerial vertex".into()));
    }
    // Aerial vertices carry a bivector.
    if spec.out_degrees.iter().any(|&d| d != 2) {
        return Ok(vec![]);
    }
    let colors: &[Color] = match spec.palette {
        Palette::TwoColor => &Color::TWO,
        Palette::FourColor => &Color::FOUR,
    };
    let options = |v: usize| -> Vec<Edge> {
        let mut out = Vec::new();
        for t in 0..n + m {
            if t == v {
                continue;
            }
            for &c in colors {
                if t >= n && !into_ground_ok(c) {
                    continue;
                }
                out.push(Edge { src: v, dst: Dst::Vertex(t), color: c });
            }
        }
        if spec.allow_infinity {
            for &c in colors.iter().filter(|c| to_infinity_ok(**c)) {
                out.push(Edge { src: v, dst: Dst::Infinity, color: c });
            }
        }
        out
    };
    let per_vertex: Vec<Vec<[Edge; 2]>> = (0..n)
        .map(|v| {
            let o = options(v);
            let mut pairs = Vec::new();
            for i in 0..o.len() {
                for j in i + 1..o.len() {
                    pairs.push([o[i], o[j]]);
                }
            }
            pairs
        })
        .collect();
    let mut found: BTreeMap<Vec<(usize, usize, u8)>, ColoredGraph> = BTreeMap::new();
    let mut idx = vec![0usize; n];
    loop {
        let edges: Vec<Edge> = (0..n).flat_map(|v| per_vertex[v][idx[v]].to_vec()).collect();
        let g = ColoredGraph { n, m, edges }.canonical();
        found.entry(g.encoding()).or_insert(g);
        // Odometer over the per-vertex choices.
        let mut v = 0;
        loop {
            if v == n {
                return Ok(found.into_values().collect());
            }
            idx[v] += 1;
            if idx[v] < per_vertex[v].len() {
                break;
            }
            idx[v] = 0;
            v += 1;
        }
    }
}

/// B_Gamma with pi = (1/2)[ , ] at aerial vertices and `args` at ground vertices.
///
/// + edges carry p-indices, - edges k-indices. Arguments are polynomials on p
/// (extended constantly along k*) or on g*. The result maps the k-indices of the
/// infinity edges, in edge order, to a polynomial; with `restrict` it is restricted to k-perp
/// and the color rules are enforced.
pub fn compile_operator(
    g: &ColoredGraph,
    pair: &SymmetricPair,
    args: &[Poly],
    restrict: bool,
) -> Result<BTreeMap<Vec<usize>, Poly>> {
    g.validate_with(restrict)?;
    if g.palette() == Palette::FourColor {
        return Err(Error::ColorArityMismatch("operators are compiled for two-color graphs".into()));
    }
    if args.len() != g.m {
        return Err(Error::ColorArityMismatch(format!("{} arguments for {} ground vertices", args.len(), g.m)));
    }
    let dim = pair.dim();
    for v in 0..g.n + g.m {
        let out = g.edges.iter().filter(|e| e.src == v).count();
        if v < g.n && out != 2 {
            return Err(Error::ColorArityMismatch(format!("aerial vertex {v} needs 2 outgoing edges")));
        }
        if v >= g.n && out != 0 {
            return Err(Error::ColorArityMismatch(format!("ground vertex {v} holds a function")));
        }
    }
    let args: Vec<Poly> = args
        .iter()
        .map(|a| {
            if a.nvars == dim {
                Ok(a.clone())
            } else if a.nvars == pair.np {
                Ok(a.embed(dim, 0))
            } else {
                Err(Error::DimensionMismatch("arguments live on p or g".into()))
            }
        })
        .collect::<Result<_>>()?;
    let alg: &LieAlgebra = &pair.alg;
    let ranges: Vec<std::ops::Range<usize>> =
        g.edges.iter().map(|e| if e.color == Color::Plus { pair.p_range() } else { pair.k_range() }).collect();
    let mut out: BTreeMap<Vec<usize>, Poly> = BTreeMap::new();
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.start).collect();
    if ranges.iter().any(|r| r.is_empty()) {
        return Ok(out);
    }
    loop {
        if let Some(term) = contract(g, alg, &args, &idx, dim) {
            let key: Vec<usize> = g
                .edges
                .iter()
                .zip(&idx)
                .filter(|(e, _)| e.dst == Dst::Infinity)
                .map(|(_, &i)| i - pair.np)
                .collect();
            let e = out.entry(key.clone()).or_insert_with(|| Poly::zero(dim));
            *e = &*e + &term;
            if e.is_zero() {
                out.remove(&key);
            }
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(finish(out, pair, restrict));
            }
            idx[k] += 1;
            if idx[k] < ranges[k].end {
                break;
            }
            idx[k] = ranges[k].start;
            k += 1;
        }
    }
}

fn finish(out: BTreeMap<Vec<usize>, Poly>, pair: &SymmetricPair, restrict: bool) -> BTreeMap<Vec<usize>, Poly> {
    if !restrict {
        return out;
    }
    out.into_iter()
        .map(|(k, p)| {
            let r = p.filter(|e| e[pair.np..].iter().all(|&x| x == 0)).restrict(0, pair.np);
            (k, r)
        })
        .filter(|(_, p)| !p.is_zero())
        .collect()
}

/// One index assignment: product of differentiated bivectors and arguments.
fn contract(g: &ColoredGraph, alg: &LieAlgebra, args: &[Poly], idx: &[usize], dim: usize) -> Option<Poly> {
    let incoming = |v: usize| -> Vec<u32> {
        let mut alpha = vec![0u32; dim];
        for (e, &i) in g.edges.iter().zip(idx) {
            if e.dst == Dst::Vertex(v) {
                alpha[i] += 1;
            }
        }
        alpha
    };
    let mut acc = Poly::one(dim);
    for v in 0..g.n {
        let outs: Vec<usize> = g.edges.iter().zip(idx).filter(|(e, _)| e.src == v).map(|(_, &i)| i).collect();
        let pi = Poly::linear(&alg.c[outs[0]][outs[1]]).scale(&qr(1, 2));
        let d = pi.deriv_multi(&incoming(v));
        if d.is_zero() {
            return None;
        }
        acc = &acc * &d;
    }
    for (j, f) in args.iter().enumerate() {
        let d = f.deriv_multi(&incoming(g.n + j));
        if d.is_zero() {
            return None;
        }
        acc = &acc * &d;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::lie::{trace_word, Space};
    use crate::rat::q;
    use proptest::prelude::{prop_assert_eq, proptest, ProptestConfig};

    fn e(src: usize, dst: usize, c: Color) -> Edge {
        Edge { src, dst: Dst::Vertex(dst), color: c }
    }

    pub(crate) fn wedge() -> ColoredGraph {
        ColoredGraph::new(1, 2, vec![e(0, 1, Color::Plus), e(0, 2, Color::Plus)]).unwrap()
    }

    #[test]
    fn admissibility() {
        assert!(ColoredGraph::new(1, 2, vec![e(0, 1, Color::Minus), e(0, 2, Color::Plus)]).is_err());
        assert!(ColoredGraph::new(1, 1, vec![e(0, 0, Color::Plus)]).is_err());
        assert!(ColoredGraph::new(2, 0, vec![e(0, 1, Color::Plus), e(0, 1, Color::Plus)]).is_err());
        assert!(ColoredGraph::new(2, 0, vec![e(0, 1, Color::Plus), e(0, 1, Color::Minus)]).is_ok());
        assert!(ColoredGraph::new(1, 1, vec![e(1, 0, Color::Plus)]).is_err());
        assert!(ColoredGraph::new(1, 1, vec![e(1, 0, Color::Minus)]).is_ok());
        let inf = Edge { src: 0, dst: Dst::Infinity, color: Color::Plus };
        assert!(ColoredGraph::new(1, 0, vec![inf]).is_err());
        let mixed = vec![e(0, 1, Color::Plus), e(0, 2, Color::PlusPlus)];
        assert!(ColoredGraph::new(1, 2, mixed).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n": 1, "m": 2, "edges": [[0, 1, "+"], [0, "inf", "-"]]}"#;
        let g = ColoredGraph::from_json(&serde_json::from_str(text).unwrap()).unwrap();
        assert_eq!(g.edges[1].dst, Dst::Infinity);
        assert_eq!(ColoredGraph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn angle_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.01..2.0));
            let q = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.01..2.0));
            let a = angle(p, q, Color::Minus).unwrap();
            let b = angle(q, p, Color::Plus).unwrap();
            for k in 0..2 {
                assert!((a.dp[k] - b.dq[k]).abs() < 1e-12);
                assert!((a.dq[k] - b.dp[k]).abs() < 1e-12);
            }
            // Quadrant points for the four-color forms.
            let pq = Complex64::new(p.re.abs() + 0.01, p.im);
            let qh = Complex64::new(q.re.abs() + 0.01, 0.0);
            let qv = Complex64::new(0.0, q.im);
            for c in [Color::MinusPlus, Color::MinusMinus] {
                let f = angle(pq, qh, c).unwrap();
                assert!(f.dp.iter().all(|x| x.abs() < 1e-12));
            }
            let f = angle(pq, qv, Color::PlusMinus).unwrap();
            assert!(f.dp.iter().all(|x| x.abs() < 1e-12));
        }
        assert_eq!(angle(Complex64::new(1.0, 1.0), Complex64::new(1.0, 1.0), Color::Plus), Err(Error::CoincidentPoints));
    }

    #[test]
    fn angle_gradients_match_differences() {
        // Only a test-side check; the implementation never differences.
        let p = Complex64::new(0.3, 0.7);
        let q = Complex64::new(-0.4, 1.1);
        let h = 1e-6;
        for c in [Color::Plus, Color::Minus, Color::PlusMinus, Color::MinusMinus] {
            let a = angle(p, q, c).unwrap();
            let dx = (angle(p + h, q, c).unwrap().value - angle(p - h, q, c).unwrap().value) / (2.0 * h);
            let dy = (angle(p + Complex64::new(0.0, h), q, c).unwrap().value
                - angle(p - Complex64::new(0.0, h), q, c).unwrap().value)
                / (2.0 * h);
            assert!((a.dp[0] - dx).abs() < 1e-6 && (a.dp[1] - dy).abs() < 1e-6);
            let qx = (angle(p, q + h, c).unwrap().value - angle(p, q - h, c).unwrap().value) / (2.0 * h);
            assert!((a.dq[0] - qx).abs() < 1e-6);
        }
    }

    #[test]
    fn four_color_degenerates_near_horizontal_axis() {
        let d = 1e-3;
        let p = Complex64::new(1.0, 2.0 * d);
        let q = Complex64::new(1.0 + d, d);
        for (four, two) in [(Color::PlusPlus, Color::Plus), (Color::MinusMinus, Color::Minus), (Color::PlusMinus, Color::Plus)] {
            let a = angle(p, q, four).unwrap();
            let b = angle(p, q, two).unwrap();
            for k in 0..2 {
                assert!((d * (a.dp[k] - b.dp[k])).abs() < 1e-3);
                assert!((d * (a.dq[k] - b.dq[k])).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn enumeration_small_cases() {
        let spec = |n, m, inf| EnumerationSpec {
            n,
            m,
            out_degrees: vec![2; n],
            palette: Palette::TwoColor,
            allow_infinity: inf,
        };
        let w = enumerate_graphs(&spec(1, 2, false)).unwrap();
        assert!(w.contains(&wedge().canonical()));
        let empty = enumerate_graphs(&spec(0, 2, false)).unwrap();
        assert_eq!(empty, vec![ColoredGraph { n: 0, m: 2, edges: vec![] }]);
        let mut bad = spec(1, 2, false);
        bad.out_degrees = vec![3];
        assert!(enumerate_graphs(&bad).unwrap().is_empty());
        assert!(matches!(enumerate_graphs(&spec(4, 1, false)), Err(Error::CapExceeded(_))));
        for g in enumerate_graphs(&spec(2, 2, true)).unwrap() {
            assert!(g.validate().is_ok());
        }
    }

    /// Oracle: orbits of labelled graphs under aerial swaps, by union-find.
    #[test]
    fn enumeration_matches_orbit_count() {
        for (m, inf) in [(1, false), (2, false), (2, true), (0, true)] {
            let spec = EnumerationSpec { n: 2, m, out_degrees: vec![2, 2], palette: Palette::TwoColor, allow_infinity: inf };
            let got = enumerate_graphs(&spec).unwrap().len();
            let mut opts: Vec<Vec<Edge>> = vec![vec![]; 2];
            for v in 0..2 {
                for t in 0..2 + m {
                    for c in Color::TWO {
                        if t != v && (t < 2 || c == Color::Plus) {
                            opts[v].push(e(v, t, c));
                        }
                    }
                }
                if inf {
                    opts[v].push(Edge { src: v, dst: Dst::Infinity, color: Color::Minus });
                }
            }
            let mut labelled: Vec<BTreeSet<Edge>> = Vec::new();
            let pairs = |o: &Vec<Edge>| -> Vec<BTreeSet<Edge>> {
                let mut out = Vec::new();
                for i in 0..o.len() {
                    for j in i + 1..o.len() {
                        out.push([o[i], o[j]].into_iter().collect());
                    }
                }
                out
            };
            for a in pairs(&opts[0]) {
                for b in pairs(&opts[1]) {
                    labelled.push(a.union(&b).copied().collect());
                }
            }
            let swap = |s: &BTreeSet<Edge>| -> BTreeSet<Edge> {
                let g = ColoredGraph { n: 2, m, edges: s.iter().copied().collect() };
                g.relabel(&[1, 0]).edges.into_iter().collect()
            };
            let mut orbits: BTreeSet<BTreeSet<BTreeSet<Edge>>> = BTreeSet::new();
            for s in &labelled {
                orbits.insert([s.clone(), swap(s)].into_iter().collect());
            }
            assert_eq!(got, orbits.len(), "m = {m}, inf = {inf}");
        }
    }

    #[test]
    fn zero_predicate() {
        assert_eq!(zero_weight_predicate(&wedge()), ZeroVerdict::Unknown);
        let g = ColoredGraph::new(1, 1, vec![e(0, 1, Color::Plus), e(0, 1, Color::Minus)]);
        assert!(g.is_err());
        let short = ColoredGraph::new(1, 2, vec![e(0, 1, Color::Plus)]).unwrap();
        assert_eq!(zero_weight_predicate(&short), ZeroVerdict::Zero(ZeroReason::DimensionMismatch));
        let lemma = ColoredGraph::new(
            2,
            2,
            vec![e(0, 2, Color::Plus), e(0, 1, Color::Minus), e(1, 2, Color::Plus), e(1, 3, Color::Plus)],
        )
        .unwrap();
        assert_eq!(zero_weight_predicate(&lemma), ZeroVerdict::Zero(ZeroReason::PatternBulletLeftarrowDashrightarrow));
        let doubled = ColoredGraph { n: 1, m: 2, edges: vec![e(0, 1, Color::Plus), e(0, 1, Color::Plus)] };
        assert_eq!(zero_weight_predicate(&doubled), ZeroVerdict::Zero(ZeroReason::DoubleEdgeSameColor));
    }

    #[test]
    fn wedge_weight_and_determinism() {
        let a = weight_mc(&wedge(), 200_000, 11).unwrap();
        assert!((a.value - 0.5).abs() < 5.0 * a.std_error + 1e-3, "{a:?}");
        assert!(a.std_error < 5e-3);
        let b = weight_mc(&wedge(), 200_000, 11).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let m = weight_mc(&wedge().mirror(), 200_000, 12).unwrap();
        assert!((m.value - mirror_sign(&wedge()) * 0.5).abs() < 5.0 * m.std_error + 1e-3);
        assert_eq!(mirror_sign(&wedge()), -1.0);
    }

    #[test]
    fn gauge_errors() {
        let g = ColoredGraph::new(0, 2, vec![]).unwrap();
        assert_eq!(weight_mc(&g, 100, 0).unwrap_err(), Error::GaugeUnderdetermined(0));
        let g = ColoredGraph::new(1, 0, vec![]).unwrap();
        assert_eq!(weight_mc(&g, 100, 0).unwrap_err(), Error::GaugeUnderdetermined(0));
    }

    #[test]
    fn one_ground_point_weights() {
        // n = 1, m = 1: the only form is the angle from the aerial point to the ground, over a half circle.
        let g = ColoredGraph::new(1, 1, vec![e(0, 1, Color::Plus)]).unwrap();
        let w = weight_mc(&g, 20_000, 5).unwrap();
        // phi = 2 arg(p) runs over (0, 2 pi) as theta runs over (0, pi).
        assert!((w.value - 1.0).abs() < 1e-9, "{w:?}");
    }

    #[test]
    fn canonical_form_is_permutation_invariant() {
        let g = ColoredGraph::new(
            3,
            1,
            vec![e(0, 1, Color::Plus), e(0, 3, Color::Plus), e(1, 2, Color::Minus), e(1, 3, Color::Plus), e(2, 0, Color::Minus), e(2, 3, Color::Plus)],
        )
        .unwrap();
        let c = g.canonical();
        for p in permutations(3) {
            assert_eq!(g.relabel(&p).canonical(), c);
        }
    }

    #[test]
    fn wedge_operator() {
        let m = catalog::sl2_model();
        let pair = &m.pair;
        let omega = m.parse_p("omega").unwrap();
        let h = m.parse_p("H").unwrap();
        // (+,+) on a symmetric pair: [p, p] lies in k, so the restriction vanishes.
        assert!(compile_operator(&wedge(), pair, &[omega.clone(), h.clone()], true).unwrap().is_empty());
        // Summing the four colorings recovers (1/2){f, g} on g*.
        let f = &Poly::var(3, 0) * &Poly::var(3, 1);
        let gg = &Poly::var(3, 2).pow(2) + &Poly::var(3, 0);
        let mut total = Poly::zero(3);
        for c1 in Color::TWO {
            for c2 in Color::TWO {
                let g = ColoredGraph { n: 1, m: 2, edges: vec![e(0, 1, c1), e(0, 2, c2)] };
                if let Some(p) = compile_operator(&g, pair, &[f.clone(), gg.clone()], false).unwrap().get(&vec![]) {
                    total = &total + p;
                }
            }
        }
        let mut poisson = Poly::zero(3);
        for i in 0..3 {
            for j in 0..3 {
                let t = &(&f.deriv(i) * &gg.deriv(j)) * &Poly::linear(&pair.alg.c[i][j]);
                poisson = &poisson + &t;
            }
        }
        assert_eq!(total, poisson.scale(&qr(1, 2)));
        let empty = ColoredGraph::new(0, 2, vec![]).unwrap();
        assert_eq!(compile_operator(&empty, pair, &[omega.clone(), h.clone()], true).unwrap()[&vec![]], &omega * &h);
        assert!(matches!(compile_operator(&wedge(), pair, &[omega], true), Err(Error::ColorArityMismatch(_))));
    }

    #[test]
    fn two_cycle_wheel_is_a_trace() {
        let pair = catalog::diag_sl2();
        let g = ColoredGraph::new(
            2,
            2,
            vec![e(0, 1, Color::Plus), e(0, 2, Color::Plus), e(1, 0, Color::Minus), e(1, 3, Color::Plus)],
        )
        .unwrap();
        let x = vec![q(1), q(2), q(-1)];
        let y = vec![q(0), q(3), q(1)];
        let out = compile_operator(&g, &pair, &[Poly::linear(&x), Poly::linear(&y)], true).unwrap();
        let want = trace_word(&pair, Space::P, &[pair.from_p(&y), pair.from_p(&x)]) * qr(1, 4);
        assert!(!want.is_zero());
        assert_eq!(out[&vec![]], Poly::constant(3, want));
    }

    #[test]
    fn infinity_edges_give_forms() {
        let pair = catalog::sl2();
        let g = ColoredGraph::new(
            1,
            1,
            vec![e(0, 1, Color::Plus), Edge { src: 0, dst: Dst::Infinity, color: Color::Minus }],
        )
        .unwrap();
        let out = compile_operator(&g, &pair, &[Poly::var(2, 0)], true).unwrap();
        // (1/2) xi([H, K]) with K = X - Y is -(X+Y) coordinate.
        assert_eq!(out.keys().cloned().collect::<Vec<_>>(), vec![vec![0]]);
        assert_eq!(out[&vec![0]], Poly::linear(&pair.alg.c[0][2][..2]).scale(&qr(1, 2)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn operator_is_multilinear(a in -3i64..4, b in -3i64..4) {
            let pair = catalog::solvable();
            let g = ColoredGraph::new(
                2, 2,
                vec![e(0, 1, Color::Plus), e(0, 2, Color::Plus), e(1, 0, Color::Minus), e(1, 3, Color::Plus)],
            ).unwrap();
            let f1 = &Poly::var(3, 0) * &Poly::var(3, 2);
            let f2 = Poly::var(3, 1).pow(2);
            let h = &Poly::var(3, 2) + &Poly::var(3, 0).pow(2);
            let comb = &f1.scale(&q(a)) + &f2.scale(&q(b));
            let lhs = compile_operator(&g, &pair, &[comb, h.clone()], true).unwrap();
            let r1 = compile_operator(&g, &pair, &[f1, h.clone()], true).unwrap();
            let r2 = compile_operator(&g, &pair, &[f2, h], true).unwrap();
            let get = |m: &BTreeMap<Vec<usize>, Poly>| m.get(&vec![]).cloned().unwrap_or_else(|| Poly::zero(3));
            prop_assert_eq!(get(&lhs), &get(&r1).scale(&q(a)) + &get(&r2).scale(&q(b)));
        }
    }
}
