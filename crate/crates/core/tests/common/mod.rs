#![allow(dead_code)]

use std::collections::BTreeMap;

use ptwall_core::classlat::{GeometryModel, KClass};
use ptwall_core::quasipoly::{Poly, QuasiPoly, Vector};
use ptwall_core::rat::{frac, int};
use ptwall_core::vertexmodel::{
    CoeffRing, Parity, RingElem, SymbolTable, VertexConfig, WeightPoly, WeightTable,
};
use ptwall_core::wallcross::{Basis, DtEntry, ModVal, Scenario};
use ptwall_core::Q;

pub fn a(q: Q) -> ModVal {
    Vector::from_entry(Basis::symbol("a"), q)
}

pub fn ab(x: Q, y: Q) -> ModVal {
    let mut v = a(x);
    v.add_entry(Basis::symbol("b"), y);
    v
}

/// Rank-1 Fano geometry with symbols `a`, `b` (sheaf, degree 2) and `pt`.
pub fn fano_vertex(ring: CoeffRing) -> VertexConfig {
    let geometry = GeometryModel::new(vec![1], vec![int(1)], vec![2]).unwrap();
    let mut symbols = SymbolTable::new();
    symbols.add("a", KClass::sheaf(vec![0], 0), 2).unwrap();
    symbols.add("b", KClass::sheaf(vec![0], 0), 2).unwrap();
    symbols.add("pt", KClass::pair(vec![0], 0), 0).unwrap();
    let mut weights = WeightTable::new();
    let mut anti = WeightPoly::new();
    anti.add((1, 0), RingElem::constant(frac(1, 2)));
    anti.add((0, 1), RingElem::constant(frac(-1, 2)));
    weights.insert_default(1, 0, 0, anti).unwrap();
    let mut ps = WeightPoly::constant(frac(1, 3));
    if ring.truncation() > 0 {
        ps.add((0, 0), RingElem::monomial(int(2), 1));
    }
    weights.insert_default(1, 0, 1, ps).unwrap();
    weights.set_zero_above(1);
    VertexConfig {
        geometry,
        ring,
        symbols,
        weights,
        parity: Parity::ChiSym,
    }
}

/// Period-2 DT input for the irreducible class with degree 6 on the even residue.
pub fn degree_six_dt() -> QuasiPoly<ModVal> {
    let even = Poly::new(vec![
        ab(int(1), int(0)),
        a(int(2)),
        ab(int(0), int(1)),
        a(frac(-1, 3)),
        a(int(0)),
        ab(int(0), frac(1, 7)),
        a(frac(1, 720)),
    ]);
    let odd = Poly::new(vec![a(int(-1)), ab(int(0), int(3)), a(frac(1, 2))]);
    QuasiPoly::new(vec![even, odd]).unwrap()
}

fn middle(lo: i64, hi: i64) -> BTreeMap<i64, ModVal> {
    (lo..=hi).map(|n| (n, ab(int(n), int(1)))).collect()
}

/// DT data for the classes 1 (irreducible) and 2 (split count two).
pub fn fano_dt(beta1: QuasiPoly<ModVal>) -> BTreeMap<Vec<i64>, DtEntry> {
    let mut dt = BTreeMap::new();
    dt.insert(
        vec![1],
        DtEntry {
            values: beta1,
            threshold: int(-3),
            vanish_below: -6,
            middle: middle(-5, -3),
        },
    );
    let two = QuasiPoly::new(vec![
        Poly::new(vec![a(int(1)), ab(int(1), int(-1))]),
        Poly::new(vec![ab(int(2), int(0)), a(int(0)), a(frac(1, 4))]),
    ])
    .unwrap();
    dt.insert(
        vec![2],
        DtEntry {
            values: two,
            threshold: int(-3),
            vanish_below: -8,
            middle: middle(-7, -6),
        },
    );
    dt
}

pub fn fano() -> Scenario {
    Scenario::new(
        fano_vertex(CoeffRing::rational()),
        "pt",
        fano_dt(degree_six_dt()),
    )
    .unwrap()
}

/// Low-degree input so that the class-2 series stays within order 7.
pub fn fano_low_degree(ring: CoeffRing) -> Scenario {
    let one = QuasiPoly::new(vec![
        Poly::new(vec![a(int(1)), ab(int(0), int(1))]),
        Poly::new(vec![ab(int(-1), int(2))]),
    ])
    .unwrap();
    Scenario::new(fano_vertex(ring), "pt", fano_dt(one)).unwrap()
}
