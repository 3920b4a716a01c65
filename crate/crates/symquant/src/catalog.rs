//! The bundled example algebras.

use crate::io::{parse_algebra, Model};
use crate::lie::{build_symmetric_pair, LieAlgebraDef, SymmetricPair};
use crate::linalg;
use crate::rat::q;

pub const SL2: &str = include_str!("../../../data/sl2.json");
pub const SOLVABLE: &str = include_str!("../../../data/solvable.json");
pub const DIAG_SL2: &str = include_str!("../../../data/diag_sl2.json");
pub const SEMIDIRECT: &str = include_str!("../../../data/semidirect.json");
pub const HEISENBERG: &str = include_str!("../../../data/heisenberg.json");

fn model(text: &str) -> Model {
    parse_algebra(text).and_then(|f| f.model()).expect("bundled algebra is valid")
}

pub fn sl2_model() -> Model {
    model(SL2)
}

pub fn solvable_model() -> Model {
    model(SOLVABLE)
}

pub fn diag_sl2_model() -> Model {
    model(DIAG_SL2)
}

pub fn semidirect_model() -> Model {
    model(SEMIDIRECT)
}

/// sl(2) with sigma(H) = -H, sigma(X) = -Y.
pub fn sl2() -> SymmetricPair {
    sl2_model().pair
}

/// t, x, y, z with [x,y] = z, [t,x] = -x, [t,y] = y.
pub fn solvable() -> SymmetricPair {
    solvable_model().pair
}

/// sl(2) + sl(2) with the swap involution.
pub fn diag_sl2() -> SymmetricPair {
    diag_sl2_model().pair
}

/// k + k* for k = <a, b>, [a, b] = b; tr_k is nonzero here.
pub fn semidirect() -> SymmetricPair {
    semidirect_model().pair
}

pub fn heisenberg() -> LieAlgebraDef {
    parse_algebra(HEISENBERG).expect("bundled algebra is valid").def
}

/// Abelian algebra with sigma = -1.
pub fn abelian(n: usize) -> SymmetricPair {
    let names = (0..n).map(|i| format!("a{i}")).collect();
    let def = LieAlgebraDef::new("abelian", names, Default::default()).expect("abelian is valid");
    let sigma = linalg::identity(n).into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect();
    build_symmetric_pair(def, sigma).expect("abelian pair is valid")
}

/// Abelian algebra whose involution keeps `nk` directions.
pub fn abelian_split(np: usize, nk: usize) -> SymmetricPair {
    let n = np + nk;
    let names = (0..n).map(|i| format!("a{i}")).collect();
    let def = LieAlgebraDef::new("abelian", names, Default::default()).expect("abelian is valid");
    let sigma = (0..n)
        .map(|i| (0..n).map(|j| if i != j { q(0) } else if i < np { q(-1) } else { q(1) }).collect())
        .collect();
    build_symmetric_pair(def, sigma).expect("abelian pair is valid")
}
