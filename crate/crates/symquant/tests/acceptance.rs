//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symquant::catalog;
use symquant::freelie::{bch, sym_factorize, z_sym, FreeAssocSeries, X, Y};
use symquant::graphs::{
    enumerate_graphs, has_lemma_pattern, mirror_sign, weight_mc, zero_weight_predicate, ColoredGraph, Color, Dst, Edge,
    EnumerationSpec, Palette, ZeroVerdict,
};
use symquant::hc::{hc_projection_uea, hc_restrict, weyl_invariance_check, weyl_matrices, IwasawaData};
use symquant::lie::{Character, LieAlgebra, SymmetricPair};
use symquant::linalg;
use symquant::poly::{monomials_of_degree, Poly};
use symquant::polyops::{apply_density, cartan_eilenberg_diff, invariant_subspace, subsets, CEChain};
use symquant::rat::{q, qr};
use symquant::starprod::{b_form_poly, bidifferential, e_series, star_cf};
use symquant::trace::{universal_density, DensityKind};
use symquant::uea::{duflo_relation_check, project_mod_k_lambda, rouviere_sharp, star_dk, Pbw, Uea};
use symquant::Q;

type Outcome = Result<String, String>;

/// Wedge tolerance and the mirror-relation width in standard errors.
const WEDGE_TOL: f64 = 0.01;
const WEDGE_SAMPLES: u64 = 1_000_000;
const LEMMA_TOL: f64 = 0.01;
const MIRROR_SIGMAS: f64 = 3.0;
const CORPUS_SAMPLES: u64 = 400_000;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_density_action() -> Outcome {
    let m = catalog::sl2_model();
    let omega = m.parse_p("omega").unwrap();
    let got = apply_density(&m.pair, DensityKind::JHalf, &omega.pow(2)).unwrap();
    let want = &(&omega.pow(2) + &omega.scale(&qr(16, 3))) + &Poly::constant(2, qr(128, 45));
    ensure(got == want, || format!("got {}, expected omega^2 + 16/3*omega + 128/45", m.express(&got, 4)))?;
    Ok(m.express(&got, 4))
}

fn c2_symmetrization() -> Outcome {
    let m = catalog::sl2_model();
    let pair = &m.pair;
    let pbw = Pbw::new(&pair.alg);
    let omega = m.parse_g("omega").unwrap();
    let big = pbw.beta(&omega);
    let zero = Character::zero(pair.nk);
    let lhs = project_mod_k_lambda(&pbw, pair, &pbw.beta(&omega.pow(2)), &zero);
    let rhs = project_mod_k_lambda(&pbw, pair, &pbw.mul(&big, &big).sub(&big.scale(&qr(8, 3))), &zero);
    ensure(lhs == rhs, || format!("classes differ: {} vs {}", m.express(&lhs, 4), m.express(&rhs, 4)))?;
    Ok("beta(omega^2) = Omega^2 - 8/3 Omega mod U(g)k".into())
}

fn c3_rouviere() -> Outcome {
    let m = catalog::sl2_model();
    let pair = &m.pair;
    let omega = m.parse_p("omega").unwrap();
    let zero = Character::zero(pair.nk);
    let sharp = rouviere_sharp(pair, &omega, &omega, &zero).unwrap();
    let want = &omega.pow(2) - &Poly::constant(2, qr(16, 15));
    let pbw = Pbw::new(&pair.alg);
    let d = apply_density(pair, DensityKind::JHalf, &omega).unwrap().embed(3, 0);
    let b = pbw.beta(&d);
    let big = pbw.beta(&omega.embed(3, 0));
    let lhs = project_mod_k_lambda(&pbw, pair, &pbw.mul(&b, &b), &zero);
    let paper = pbw.mul(&big, &big).add(&big.scale(&qr(8, 3))).add(&Uea::scalar(qr(16, 3)));
    let rhs = project_mod_k_lambda(&pbw, pair, &paper, &zero);
    let first = sharp == want;
    let second = lhs == rhs;
    let diff = project_mod_k_lambda(&pbw, pair, &pbw.mul(&b, &b).sub(&paper), &zero);
    let report = format!(
        "omega#omega = {} (expected omega^2 - 16/15: {}); UEA identity {} (difference of classes: {})",
        m.express(&sharp, 4),
        if first { "ok" } else { "differs" },
        if second { "ok" } else { "differs" },
        m.express(&diff, 4)
    );
    ensure(first && second, || report.clone())?;
    Ok(report)
}

fn c4_calibration() -> Outcome {
    let m = catalog::sl2_model();
    let pair = &m.pair;
    let omega = m.parse_p("omega").unwrap();
    let bidiff = bidifferential(&b_form_poly(pair), &omega, &omega);
    let cf = star_cf(pair, &omega, &omega, &Character::zero(pair.nk)).unwrap();
    let sharp = rouviere_sharp(pair, &omega, &omega, &Character::zero(pair.nk)).unwrap();
    let want = &omega.pow(2) - &Poly::constant(2, qr(16, 15));
    let a = bidiff == Poly::constant(2, q(-256));
    let b = cf.value == want;
    let c = cf.value == sharp;
    let report = format!(
        "bidifferential = {} ({}); star_cf = {} ({}); rouviere = {} (agreement {})",
        m.express(&bidiff, 4),
        if a { "ok" } else { "differs" },
        m.express(&cf.value, 4),
        if b { "ok" } else { "differs" },
        m.express(&sharp, 4),
        if c { "ok" } else { "fails" }
    );
    ensure(a && b && c, || report.clone())?;
    Ok(report)
}

fn same_span(a: &[Poly], b: &[Poly]) -> bool {
    let nv = a.iter().chain(b).map(|p| p.nvars).next().unwrap_or(0);
    let monos: Vec<Vec<u32>> = (0..=4).flat_map(|d| monomials_of_degree(nv, d)).collect();
    let vecs = |ps: &[Poly]| -> Vec<Vec<Q>> { ps.iter().map(|p| monos.iter().map(|e| p.coeff(e)).collect()).collect() };
    linalg::same_span(&vecs(a), &vecs(b))
}

fn c5_solvable() -> Outcome {
    let m = catalog::solvable_model();
    let pair = &m.pair;
    let z = m.parse_p("z").unwrap();
    let w = m.parse_p("4*z*t + (x-y)^2").unwrap();
    let d1 = invariant_subspace(pair, 1);
    let d2 = invariant_subspace(pair, 2);
    ensure(same_span(&d1, &[z.clone()]), || format!("degree 1 invariants: {d1:?}"))?;
    ensure(same_span(&d2, &[z.pow(2), w.clone()]), || format!("degree 2 invariants: {d2:?}"))?;
    let invs: Vec<Poly> = (1..=4).flat_map(|d| invariant_subspace(pair, d)).collect();
    let zero = Character::zero(pair.nk);
    let mut flagged = 0;
    for a in &invs {
        for b in &invs {
            let p = star_cf(pair, a, b, &zero).unwrap();
            flagged += usize::from(p.truncated);
            ensure(p.value == a * b, || format!("star_cf differs from the product on {} and {}", m.express(a, 4), m.express(b, 4)))?;
        }
    }
    Ok(format!("{} invariant pairs; {flagged} carried the truncation flag and still matched", invs.len().pow(2)))
}

fn c6_commutativity() -> Outcome {
    let mut count = 0;
    for m in [catalog::sl2_model(), catalog::solvable_model()] {
        let pair = &m.pair;
        let invs: Vec<Poly> = (1..=4).flat_map(|d| invariant_subspace(pair, d)).collect();
        for lam in ["zero", "trk", "half-trk"] {
            let lambda = m.character(lam).unwrap();
            for (i, a) in invs.iter().enumerate() {
                for b in &invs[i + 1..] {
                    let ab = rouviere_sharp(pair, a, b, &lambda).unwrap();
                    let ba = rouviere_sharp(pair, b, a, &lambda).unwrap();
                    ensure(ab == ba, || format!("{} {lam}: {} # {} not symmetric", pair.def.name, m.express(a, 4), m.express(b, 4)))?;
                    count += 1;
                }
            }
        }
    }
    let mut duflo = 0;
    for m in [catalog::sl2_model(), catalog::solvable_model(), catalog::semidirect_model()] {
        for lam in ["zero", "trk", "half-trk"] {
            let r = duflo_relation_check(&m.pair, &m.character(lam).unwrap(), 3);
            ensure(r.equal, || format!("Duflo relation fails on {} with {lam}: {r:?}", m.pair.def.name))?;
            duflo += 1;
        }
    }
    Ok(format!("{count} commutator checks, {duflo} Duflo subspace checks at degree 3"))
}

fn c7_densities() -> Outcome {
    const ORDER: usize = 6;
    let qh = universal_density(DensityKind::QHalf, ORDER, ORDER).unwrap();
    let j = universal_density(DensityKind::J, ORDER, ORDER).unwrap().scale_arg(&qr(1, 2));
    let jh = universal_density(DensityKind::JHalf, ORDER, ORDER).unwrap();
    let a = symquant::starprod::wheel_factor_a(ORDER).unwrap();
    let b = symquant::starprod::wheel_factor_b();
    ensure(b == q(1), || "B is not 1".into())?;
    for pair in [catalog::sl2(), catalog::solvable(), catalog::diag_sl2()] {
        let lhs = qh.eval(&pair, true);
        ensure(lhs == j.eval(&pair, true), || format!("q^(1/2)(X) != J(X/2) on {}", pair.def.name))?;
        let prod = a.mul(&jh).scale(&b).eval(&pair, true);
        ensure(prod == lhs, || format!("A J^(1/2) != q^(1/2) on {}", pair.def.name))?;
    }
    Ok(format!("order {ORDER} on sl2, solvable, diagonal"))
}

fn c8_free_lie() -> Outcome {
    const ORDER: usize = 6;
    let z = bch(ORDER).unwrap();
    let x = FreeAssocSeries::letter(X, ORDER);
    let y = FreeAssocSeries::letter(Y, ORDER);
    ensure(z.to_assoc().exp() == x.exp().mul(&y.exp()), || "exp(bch) != e^X e^Y".into())?;
    ensure(z_sym(ORDER).unwrap().even_part().is_zero(), || "z_sym has an even part".into())?;
    let (_, k) = sym_factorize(ORDER).unwrap();
    let swapped = k.swap_letters().unwrap();
    ensure(swapped.add(&k).is_zero(), || "K(X,Y) + K(Y,X) != 0".into())?;
    Ok(format!("order {ORDER}"))
}

fn c9_graphs() -> Outcome {
    let plus = |s, t| Edge { src: s, dst: Dst::Vertex(t), color: Color::Plus };
    let wedge = ColoredGraph::new(1, 2, vec![plus(0, 1), plus(0, 2)]).unwrap();
    let w = weight_mc(&wedge, WEDGE_SAMPLES, 2024).unwrap();
    ensure((w.value - 0.5).abs() <= WEDGE_TOL, || format!("wedge weight {w:?}"))?;
    let spec = EnumerationSpec { n: 2, m: 2, out_degrees: vec![2, 2], palette: Palette::TwoColor, allow_infinity: false };
    let corpus = enumerate_graphs(&spec).unwrap();
    let mut lemma_max: f64 = 0.0;
    let mut lemma_count = 0;
    let mut mirror_count = 0;
    let mut worst: f64 = 0.0;
    for (i, g) in corpus.iter().enumerate() {
        let seed = 100 + 2 * i as u64;
        if has_lemma_pattern(g) {
            let w = weight_mc(g, CORPUS_SAMPLES, seed).unwrap();
            ensure(w.value.abs() <= LEMMA_TOL, || format!("lemma graph {:?} has weight {w:?}", g.to_json()))?;
            lemma_max = lemma_max.max(w.value.abs());
            lemma_count += 1;
        } else if zero_weight_predicate(g) == ZeroVerdict::Unknown {
            let a = weight_mc(g, CORPUS_SAMPLES, seed).unwrap();
            let b = weight_mc(&g.mirror(), CORPUS_SAMPLES, seed + 1).unwrap();
            let sigma = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            let dev = (b.value - mirror_sign(g) * a.value).abs();
            if sigma > 0.0 {
                worst = worst.max(dev / sigma);
            }
            ensure(dev <= MIRROR_SIGMAS * sigma + 1e-12, || {
                format!("mirror relation off by {dev:.5} (sigma {sigma:.5}) on {}", g.to_json())
            })?;
            mirror_count += 1;
        }
    }
    ensure(mirror_count >= 5 && lemma_count > 0, || "corpus too small".into())?;
    Ok(format!(
        "wedge {:.4} +- {:.4}; {lemma_count} lemma graphs, max |w| {lemma_max:.4}; {mirror_count} mirror pairs, worst {worst:.2} sigma",
        w.value, w.std_error
    ))
}

fn c10_hc() -> Outcome {
    let m = catalog::sl2_model();
    let data = IwasawaData::from_json(&m.pair, &m.raw).unwrap();
    let omega = m.parse_p("omega").unwrap();
    let h = Poly::var(1, 0);
    let r = hc_restrict(&data, &omega, true).unwrap();
    ensure(r == h.pow(2), || format!("hc_restrict(omega) = {r:?}"))?;
    let invs = [Poly::one(2), omega.clone()];
    for a in &invs {
        for b in &invs {
            let lhs = hc_restrict(&data, &(a * b), true).unwrap();
            let rhs = &hc_restrict(&data, a, true).unwrap() * &hc_restrict(&data, b, true).unwrap();
            ensure(lhs == rhs, || "restriction is not multiplicative".into())?;
        }
    }
    let top = hc_projection_uea(&data, &omega).unwrap().homogeneous(2);
    ensure(top == h.pow(2), || "UEA route has a different symbol".into())?;
    let weyl = weyl_matrices(&m.raw).unwrap();
    ensure(weyl_invariance_check(&data, &[r], &weyl).unwrap(), || "image is not Weyl invariant".into())?;
    Ok("omega -> H^2; multiplicative; Weyl invariant".into())
}

/// Straightens a word by swapping random adjacent inversions.
fn straighten_random(alg: &LieAlgebra, word: &[u8], rng: &mut ChaCha8Rng) -> Uea {
    let mut work: Vec<(Vec<u8>, Q)> = vec![(word.to_vec(), q(1))];
    let mut out = Uea::zero();
    while let Some((w, c)) = work.pop() {
        let inv: Vec<usize> = (0..w.len().saturating_sub(1)).filter(|&i| w[i] > w[i + 1]).collect();
        if inv.is_empty() {
            out.add_term(w, c);
            continue;
        }
        let i = inv[rng.gen_range(0..inv.len())];
        let mut s = w.clone();
        s.swap(i, i + 1);
        work.push((s, c.clone()));
        for (l, b) in alg.c[w[i] as usize][w[i + 1] as usize].iter().enumerate() {
            if *b != q(0) {
                let mut v = w[..i].to_vec();
                v.push(l as u8);
                v.extend_from_slice(&w[i + 2..]);
                work.push((v, &c * b));
            }
        }
    }
    out
}

fn random_poly(rng: &mut ChaCha8Rng, nv: usize, max_deg: u32) -> Poly {
    let mut p = Poly::zero(nv);
    for d in 0..=max_deg {
        for e in monomials_of_degree(nv, d) {
            p.add_term(e, q(rng.gen_range(-2..=2)));
        }
    }
    p
}

fn c11_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pairs: Vec<SymmetricPair> = vec![catalog::sl2(), catalog::solvable(), catalog::diag_sl2(), catalog::semidirect()];
    for t in 0..1000 {
        let pair = &pairs[t % pairs.len()];
        let pbw = Pbw::new(&pair.alg);
        let len = rng.gen_range(0..=5);
        let w: Vec<u8> = (0..len).map(|_| rng.gen_range(0..pair.dim() as u8)).collect();
        let direct = w.iter().fold(Uea::one(), |acc, &x| pbw.times_letter(&acc, x));
        ensure(direct == straighten_random(&pair.alg, &w, &mut rng), || format!("confluence fails on {w:?}"))?;
    }
    let sl2 = catalog::sl2();
    for _ in 0..100 {
        let (a, b, c) = (random_poly(&mut rng, 3, 2), random_poly(&mut rng, 3, 2), random_poly(&mut rng, 3, 2));
        let l = star_dk(&sl2, &star_dk(&sl2, &a, &b).unwrap(), &c).unwrap();
        let r = star_dk(&sl2, &a, &star_dk(&sl2, &b, &c).unwrap()).unwrap();
        ensure(l == r, || "star_dk is not associative".into())?;
    }
    let mut chains = 0;
    for pair in &pairs {
        for qd in 0..=pair.nk {
            for s in subsets(pair.nk, qd) {
                for d in 0..=3 {
                    for e in monomials_of_degree(pair.np, d) {
                        let mut c = CEChain::zero(qd);
                        c.insert(s.clone(), Poly::monomial(e, q(1)));
                        let dd = cartan_eilenberg_diff(pair, &cartan_eilenberg_diff(pair, &c));
                        ensure(dd.is_zero(), || format!("d^2 != 0 on {}", pair.def.name))?;
                        chains += 1;
                    }
                }
            }
        }
    }
    for m in [catalog::sl2_model(), catalog::solvable_model(), catalog::diag_sl2_model(), catalog::semidirect_model()] {
        let pair = &m.pair;
        for lam in ["zero", "trk"] {
            let e = e_series(pair, &m.character(lam).unwrap(), 4).unwrap();
            for sign in [1, -1] {
                let mut subs: Vec<Poly> = (0..pair.np).map(|i| Poly::var(pair.np, i)).collect();
                subs.extend((0..pair.np).map(|i| Poly::var(pair.np, i).scale(&q(sign))));
                let on_diag = e.compose(&subs);
                ensure(on_diag.homogeneous(4).is_zero() && on_diag == Poly::one(pair.np), || {
                    format!("E(X, {sign}X) != 1 on {}", pair.def.name)
                })?;
            }
        }
    }
    Ok(format!("1000 straightenings, 100 triples, {chains} basis cochains, E on 4 pairs"))
}

fn main() {
    let checks: Vec<(u32, &str, Duration, fn() -> Outcome)> = vec![
        (1, "sl2 density action on omega^2", Duration::from_secs(1), c1_density_action),
        (2, "sl2 symmetrization of omega^2", Duration::from_secs(1), c2_symmetrization),
        (3, "sl2 Rouviere product and UEA identity", Duration::from_secs(5), c3_rouviere),
        (4, "E calibration and star_cf = Rouviere", Duration::from_secs(5), c4_calibration),
        (5, "solvable invariants and star_cf", Duration::from_secs(5), c5_solvable),
        (6, "commutativity across lambda, Duflo relation", Duration::from_secs(30), c6_commutativity),
        (7, "density identities", Duration::from_secs(5), c7_densities),
        (8, "free Lie identities", Duration::from_secs(10), c8_free_lie),
        (9, "graph weights", Duration::from_secs(300), c9_graphs),
        (10, "Harish-Chandra restriction", Duration::from_secs(1), c10_hc),
        (11, "property suites", Duration::from_secs(120), c11_properties),
    ];
    let mut failed = 0;
    for (id, name, budget, f) in checks {
        let t = Instant::now();
        let out = f();
        let el = t.elapsed();
        let (ok, detail) = match out {
            Ok(d) if el <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget {budget:?}")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} {id:>2} {name} [{:.3}s / {}s]: {detail}",
            if ok { "PASS" } else { "FAIL" },
            el.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
