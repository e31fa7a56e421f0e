//! Quasi-polynomials, chamber decompositions and lattice sums.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{Debug, Display};

use num_traits::{One, Zero};

use crate::error::{bail, Result};
use crate::rat::{ceil_q, divisors, factorial, floor_q, int, lcm, show, to_i64};
use crate::Q;

/// Module of values: rationals or finitely supported rational vectors.
pub trait Value: Clone + PartialEq + Debug {
    fn nil() -> Self;
    fn is_nil(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, q: &Q) -> Self;
    fn text(&self) -> String;
    /// Scalar coordinates keyed by basis label.
    fn coords(&self) -> BTreeMap<String, Q>;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }
}

impl Value for Q {
    fn nil() -> Self {
        Zero::zero()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, q: &Q) -> Self {
        self * q
    }
    fn text(&self) -> String {
        show(self)
    }
    fn coords(&self) -> BTreeMap<String, Q> {
        let mut m = BTreeMap::new();
        if !Zero::is_zero(self) {
            m.insert(String::new(), self.clone());
        }
        m
    }
}

/// Finitely supported vector with basis labels `K`; zero entries are dropped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vector<K: Ord>(BTreeMap<K, Q>);

impl<K: Ord + Clone> Vector<K> {
    pub fn new() -> Self {
        Self(BTreeMap::new())
    }

    pub fn basis(k: K) -> Self {
        Self::from_entry(k, Q::one())
    }

    pub fn from_entry(k: K, q: Q) -> Self {
        let mut v = Self::new();
        v.add_entry(k, q);
        v
    }

    pub fn add_entry(&mut self, k: K, q: Q) {
        if q.is_zero() {
            return;
        }
        let merged = match self.0.remove(&k) {
            Some(old) => old + q,
            None => q,
        };
        if !merged.is_zero() {
            self.0.insert(k, merged);
        }
    }

    pub fn get(&self, k: &K) -> Q {
        self.0.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&K, &Q)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Ord + Clone> Default for Vector<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Clone + Debug + Display> Value for Vector<K> {
    fn nil() -> Self {
        Self::new()
    }
    fn is_nil(&self) -> bool {
        self.0.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, q) in &other.0 {
            out.add_entry(k.clone(), q.clone());
        }
        out
    }
    fn scale(&self, q: &Q) -> Self {
        if q.is_zero() {
            return Self::new();
        }
        Self(self.0.iter().map(|(k, v)| (k.clone(), v * q)).collect())
    }
    fn text(&self) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, q)| alloc::format!("{}*[{}]", show(q), k))
            .collect();
        parts.join(" + ")
    }
    fn coords(&self) -> BTreeMap<String, Q> {
        self.0
            .iter()
            .map(|(k, q)| (alloc::format!("{k}"), q.clone()))
            .collect()
    }
}

/// Polynomial in one variable, coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<V: Value>(Vec<V>);

impl<V: Value> Poly<V> {
    pub fn new(mut coeffs: Vec<V>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_nil()) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn constant(v: V) -> Self {
        Self::new(vec![v])
    }

    pub fn coeffs(&self) -> &[V] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval_q(&self, x: &Q) -> V {
        let mut acc = V::nil();
        for c in self.0.iter().rev() {
            acc = acc.scale(x).add(c);
        }
        acc
    }

    pub fn eval(&self, x: i64) -> V {
        self.eval_q(&int(x))
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let get = |p: &Self, i: usize| p.0.get(i).cloned().unwrap_or_else(V::nil);
        Self::new((0..n).map(|i| get(self, i).add(&get(other, i))).collect())
    }

    pub fn scale(&self, q: &Q) -> Self {
        Self::new(self.0.iter().map(|c| c.scale(q)).collect())
    }

    /// `x -> P(a x + b)`.
    pub fn compose_affine(&self, a: &Q, b: &Q) -> Self {
        let mut acc = Poly::zero();
        let lin = vec![b.clone(), a.clone()];
        let mut power: Vec<Q> = vec![Q::one()];
        for c in &self.0 {
            acc = acc.add(&Poly::new(power.iter().map(|p| c.scale(p)).collect()));
            power = qpoly_mul(&power, &lin);
        }
        acc
    }

    fn text_var(&self, var: &str) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, c) in self.0.iter().enumerate() {
            if c.is_nil() {
                continue;
            }
            parts.push(match i {
                0 => alloc::format!("({})", c.text()),
                1 => alloc::format!("({})*{var}", c.text()),
                _ => alloc::format!("({})*{var}^{i}", c.text()),
            });
        }
        parts.join(" + ")
    }

    pub fn text(&self) -> String {
        self.text_var("n")
    }
}

fn qpoly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Newton interpolation through `values[j]` at `x0 + j h`.
pub fn newton_fit<V: Value>(x0: i64, h: i64, values: &[V]) -> Poly<V> {
    let mut diffs: Vec<V> = values.to_vec();
    let mut leading = Vec::with_capacity(values.len());
    for _ in 0..values.len() {
        leading.push(diffs[0].clone());
        diffs = diffs.windows(2).map(|w| w[1].sub(&w[0])).collect();
    }
    let mut acc = Poly::zero();
    let mut basis: Vec<Q> = vec![Q::one()];
    for (j, dj) in leading.iter().enumerate() {
        let denom = Q::from_integer(factorial(j as u64)) * int(h).pow(j as i32);
        let term: Vec<V> = basis.iter().map(|b| dj.scale(&(b / &denom))).collect();
        acc = acc.add(&Poly::new(term));
        basis = qpoly_mul(&basis, &[int(-(x0 + j as i64 * h)), Q::one()]);
    }
    acc
}

/// Function on Z equal to `polys[n mod period]` at `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiPoly<V: Value> {
    period: u64,
    polys: Vec<Poly<V>>,
}

impl<V: Value> QuasiPoly<V> {
    pub fn new(polys: Vec<Poly<V>>) -> Result<Self> {
        if polys.is_empty() {
            bail!(Input, "quasi-polynomial needs a positive period");
        }
        Ok(Self {
            period: polys.len() as u64,
            polys,
        }
        .canonical())
    }

    pub fn polynomial(p: Poly<V>) -> Self {
        Self {
            period: 1,
            polys: vec![p],
        }
    }

    pub fn zero() -> Self {
        Self::polynomial(Poly::zero())
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn polys(&self) -> &[Poly<V>] {
        &self.polys
    }

    pub fn branch(&self, n: i64) -> &Poly<V> {
        &self.polys[n.rem_euclid(self.period as i64) as usize]
    }

    pub fn eval(&self, n: i64) -> V {
        self.branch(n).eval(n)
    }

    pub fn degree(&self) -> usize {
        self.polys.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.polys.iter().all(Poly::is_zero)
    }

    /// Same function with the least period.
    pub fn canonical(&self) -> Self {
        for d in divisors(self.period) {
            let ok = (0..self.period as usize).all(|a| self.polys[a] == self.polys[a % d as usize]);
            if ok {
                return Self {
                    period: d,
                    polys: self.polys[..d as usize].to_vec(),
                };
            }
        }
        self.clone()
    }

    pub fn with_period(&self, d: u64) -> Self {
        let polys = (0..d as usize)
            .map(|a| self.polys[a % self.period as usize].clone())
            .collect();
        Self { period: d, polys }
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = lcm(self.period, other.period);
        let (a, b) = (self.with_period(d), other.with_period(d));
        let polys = a
            .polys
            .iter()
            .zip(&b.polys)
            .map(|(x, y)| x.add(y))
            .collect();
        Self { period: d, polys }.canonical()
    }

    pub fn scale(&self, q: &Q) -> Self {
        Self {
            period: self.period,
            polys: self.polys.iter().map(|p| p.scale(q)).collect(),
        }
        .canonical()
    }

    pub fn text(&self) -> String {
        let mut s = alloc::format!("period {}", self.period);
        for (a, p) in self.polys.iter().enumerate() {
            s.push_str(&alloc::format!("; n%{}={}: {}", self.period, a, p.text()));
        }
        s
    }
}

/// Polynomial in `k` variables, keyed by exponent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MPoly<V: Value> {
    dim: usize,
    terms: BTreeMap<Vec<u32>, V>,
}

impl<V: Value> MPoly<V> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, v: V) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], v);
        p
    }

    pub fn add_term(&mut self, exps: Vec<u32>, v: V) {
        assert_eq!(exps.len(), self.dim, "exponent vector length");
        let merged = match self.terms.remove(&exps) {
            Some(old) => old.add(&v),
            None => v,
        };
        if !merged.is_nil() {
            self.terms.insert(exps, merged);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[i64]) -> V {
        let mut acc = V::nil();
        for (e, c) in &self.terms {
            let mut m = Q::one();
            for (xi, &ei) in x.iter().zip(e) {
                if ei > 0 {
                    m *= int(*xi).pow(ei as i32);
                }
            }
            acc = acc.add(&c.scale(&m));
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    /// `x_i -> offset_i + step x_i` for all `i`.
    pub fn substitute(&self, offset: &[i64], step: i64) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let mut partial: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
            partial.insert(vec![0; self.dim], Q::one());
            for i in 0..self.dim {
                let ei = e[i] as i64;
                let mut next = BTreeMap::new();
                for (pe, pc) in &partial {
                    for j in 0..=ei {
                        let coef = Q::from_integer(crate::rat::binomial(ei, j))
                            * int(offset[i]).pow((ei - j) as i32)
                            * int(step).pow(j as i32);
                        if coef.is_zero() {
                            continue;
                        }
                        let mut ne = pe.clone();
                        ne[i] = j as u32;
                        *next.entry(ne).or_insert_with(Q::zero) += pc * coef;
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                out.add_term(pe, c.scale(&pc));
            }
        }
        out
    }

    pub fn from_poly(p: &Poly<V>) -> Self {
        let mut out = Self::zero(1);
        for (i, c) in p.coeffs().iter().enumerate() {
            out.add_term(vec![i as u32], c.clone());
        }
        out
    }

    pub fn text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| {
                        if k == 1 {
                            alloc::format!("x{}", i + 1)
                        } else {
                            alloc::format!("x{}^{k}", i + 1)
                        }
                    })
                    .collect();
                if mono.is_empty() {
                    alloc::format!("({})", c.text())
                } else {
                    alloc::format!("({})*{}", c.text(), mono.join("*"))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// Quasi-polynomial on `Z^k` with one shared period and a polynomial per residue vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiQP<V: Value> {
    dim: usize,
    period: u64,
    polys: BTreeMap<Vec<u64>, MPoly<V>>,
}

fn residue_vectors(dim: usize, d: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..d).map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out
}

impl<V: Value> MultiQP<V> {
    /// Polynomials listed for every residue vector in `{0..d-1}^k`.
    pub fn new(dim: usize, period: u64, polys: BTreeMap<Vec<u64>, MPoly<V>>) -> Result<Self> {
        if period == 0 {
            bail!(Input, "period must be positive");
        }
        for r in residue_vectors(dim, period) {
            match polys.get(&r) {
                Some(p) if p.dim() == dim => {}
                Some(_) => bail!(Input, "polynomial for residue {r:?} has wrong dimension"),
                None => bail!(Input, "missing polynomial for residue {r:?}"),
            }
        }
        if polys.len() as u64 != period.pow(dim as u32) {
            bail!(Input, "unexpected residue vectors for period {period}");
        }
        Ok(Self { dim, period, polys })
    }

    pub fn polynomial(p: MPoly<V>) -> Self {
        let dim = p.dim();
        let mut polys = BTreeMap::new();
        polys.insert(vec![0; dim], p);
        Self {
            dim,
            period: 1,
            polys,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::polynomial(MPoly::zero(dim))
    }

    pub fn from_qp(f: &QuasiPoly<V>) -> Self {
        let polys = f
            .polys()
            .iter()
            .enumerate()
            .map(|(a, p)| (vec![a as u64], MPoly::from_poly(p)))
            .collect();
        Self {
            dim: 1,
            period: f.period(),
            polys,
        }
    }

    /// Back to a one-variable quasi-polynomial when `k = 1`.
    pub fn to_qp(&self) -> Result<QuasiPoly<V>> {
        if self.dim != 1 {
            bail!(Input, "not a one-variable quasi-polynomial");
        }
        let polys = (0..self.period)
            .map(|a| {
                let p = &self.polys[&vec![a]];
                let deg = p.degree() as usize;
                Poly::new(
                    (0..=deg)
                        .map(|i| p.terms.get(&vec![i as u32]).cloned().unwrap_or_else(V::nil))
                        .collect(),
                )
            })
            .collect();
        QuasiPoly::new(polys)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn residues(&self) -> impl Iterator<Item = (&Vec<u64>, &MPoly<V>)> {
        self.polys.iter()
    }

    pub fn eval(&self, x: &[i64]) -> V {
        let r: Vec<u64> = x
            .iter()
            .map(|v| v.rem_euclid(self.period as i64) as u64)
            .collect();
        self.polys[&r].eval(x)
    }

    pub fn is_zero(&self) -> bool {
        self.polys.values().all(MPoly::is_zero)
    }

    pub fn degree(&self) -> u32 {
        self.polys.values().map(MPoly::degree).max().unwrap_or(0)
    }

    pub fn with_period(&self, d: u64) -> Self {
        let polys = residue_vectors(self.dim, d)
            .into_iter()
            .map(|r| {
                let base: Vec<u64> = r.iter().map(|a| a % self.period).collect();
                (r, self.polys[&base].clone())
            })
            .collect();
        Self {
            dim: self.dim,
            period: d,
            polys,
        }
    }

    pub fn canonical(&self) -> Self {
        for d in divisors(self.period) {
            let ok = self.polys.iter().all(|(r, p)| {
                let base: Vec<u64> = r.iter().map(|a| a % d).collect();
                self.polys[&base] == *p
            });
            if ok {
                let polys = residue_vectors(self.dim, d).into_iter().map(|r| {
                    let p = self.polys[&r].clone();
                    (r, p)
                });
                return Self {
                    dim: self.dim,
                    period: d,
                    polys: polys.collect(),
                };
            }
        }
        self.clone()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            bail!(Input, "dimension mismatch {} vs {}", self.dim, other.dim);
        }
        let d = lcm(self.period, other.period);
        let (a, b) = (self.with_period(d), other.with_period(d));
        let polys = a
            .polys
            .iter()
            .map(|(r, p)| (r.clone(), p.add(&b.polys[r])))
            .collect();
        Ok(Self {
            dim: self.dim,
            period: d,
            polys,
        }
        .canonical())
    }

    pub fn text(&self) -> String {
        let mut s = alloc::format!("period {}", self.period);
        for (r, p) in &self.polys {
            s.push_str(&alloc::format!("; x%{}={:?}: {}", self.period, r, p.text()));
        }
        s
    }
}

/// Relation symbol of a chamber constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(&self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn parse(s: &str) -> Option<Rel> {
        Some(match s {
            "<" => Rel::Lt,
            "<=" => Rel::Le,
            "=" | "==" => Rel::Eq,
            ">=" => Rel::Ge,
            ">" => Rel::Gt,
            _ => return None,
        })
    }

    fn holds(&self, lhs: &Q, rhs: &Q) -> bool {
        match self {
            Rel::Lt => lhs < rhs,
            Rel::Le => lhs <= rhs,
            Rel::Eq => lhs == rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }
}

/// `coeffs . x  rel  bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub rel: Rel,
    pub bound: Q,
}

impl Constraint {
    pub fn new(coeffs: Vec<Q>, rel: Rel, bound: Q) -> Self {
        Self { coeffs, rel, bound }
    }

    pub fn ints(coeffs: &[i64], rel: Rel, bound: i64) -> Self {
        Self::new(coeffs.iter().map(|&c| int(c)).collect(), rel, int(bound))
    }
}

/// Integer row `a . x <= b`, or `a . x = b` when `eq`.
/// Optional lower and upper integer bounds of one coordinate.
type Bounds = (Option<i128>, Option<i128>);
/// Optional endpoints of a 1-D interval.
type Interval = (Option<i64>, Option<i64>);

#[derive(Debug, Clone, PartialEq, Eq)]
struct Row {
    a: Vec<i128>,
    b: i128,
    eq: bool,
}

fn integerize(c: &Constraint) -> Result<Vec<Row>> {
    let mut den = num_bigint::BigInt::one();
    for q in c.coeffs.iter().chain(core::iter::once(&c.bound)) {
        den = num_integer::Integer::lcm(&den, q.denom());
    }
    let scale = Q::from_integer(den);
    let mut a = Vec::with_capacity(c.coeffs.len());
    for q in &c.coeffs {
        let v = (q * &scale).to_integer();
        match to_i64(&v) {
            Some(x) => a.push(x as i128),
            None => bail!(Input, "constraint coefficient too large"),
        }
    }
    let b = &c.bound * &scale;
    let big = |x: num_bigint::BigInt| -> Result<i128> {
        match to_i64(&x) {
            Some(v) => Ok(v as i128),
            None => bail!(Input, "constraint bound too large"),
        }
    };
    let neg = |v: &[i128]| v.iter().map(|x| -x).collect::<Vec<_>>();
    Ok(match c.rel {
        Rel::Le => vec![Row {
            a,
            b: big(floor_q(&b))?,
            eq: false,
        }],
        Rel::Lt => vec![Row {
            a,
            b: big(ceil_q(&b))? - 1,
            eq: false,
        }],
        Rel::Ge => vec![Row {
            a: neg(&a),
            b: -big(ceil_q(&b))?,
            eq: false,
        }],
        Rel::Gt => vec![Row {
            a: neg(&a),
            b: -big(floor_q(&b))? - 1,
            eq: false,
        }],
        Rel::Eq => {
            if b.is_integer() {
                vec![Row {
                    a,
                    b: big(b.to_integer())?,
                    eq: true,
                }]
            } else {
                let dim = c.coeffs.len();
                vec![Row {
                    a: vec![0; dim],
                    b: -1,
                    eq: false,
                }]
            }
        }
    })
}

/// Lattice region cut out by finitely many rational affine (in)equalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chamber {
    dim: usize,
    constraints: Vec<Constraint>,
    rows: Vec<Row>,
}

const PROPAGATION_ROUNDS: usize = 20_000;

/// Outcome of bounding-box propagation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SliceBox {
    Empty,
    Bounded(Vec<(i64, i64)>),
}

impl Chamber {
    pub fn new(dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, c) in constraints.iter().enumerate() {
            if c.coeffs.len() != dim {
                bail!(
                    Input,
                    "constraint {i} has {} coefficients, expected {dim}",
                    c.coeffs.len()
                );
            }
            rows.extend(integerize(c)?);
        }
        Ok(Self {
            dim,
            constraints,
            rows,
        })
    }

    pub fn whole(dim: usize) -> Self {
        Self {
            dim,
            constraints: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// `lo <= n <= hi` on Z, either side optional.
    pub fn interval(lo: Option<i64>, hi: Option<i64>) -> Self {
        let mut cs = Vec::new();
        match (lo, hi) {
            (Some(a), Some(b)) if a == b => cs.push(Constraint::ints(&[1], Rel::Eq, a)),
            _ => {
                if let Some(a) = lo {
                    cs.push(Constraint::ints(&[1], Rel::Ge, a));
                }
                if let Some(b) = hi {
                    cs.push(Constraint::ints(&[1], Rel::Le, b));
                }
            }
        }
        Self::new(1, cs).expect("interval constraints are well formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.rows.iter().all(|r| {
            let s: i128 = r.a.iter().zip(x).map(|(a, v)| a * *v as i128).sum();
            if r.eq {
                s == r.b
            } else {
                s <= r.b
            }
        })
    }

    /// Exact membership using the original rational constraints.
    pub fn contains_exact(&self, x: &[i64]) -> bool {
        self.constraints.iter().all(|c| {
            let s: Q = c.coeffs.iter().zip(x).map(|(a, v)| a * int(*v)).sum();
            c.rel.holds(&s, &c.bound)
        })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            bail!(Input, "chamber dimension mismatch");
        }
        let mut cs = self.constraints.clone();
        cs.extend(other.constraints.iter().cloned());
        Self::new(self.dim, cs)
    }

    /// Substitution `x = offset + step m`, as a chamber in `m`.
    pub fn substitute(&self, offset: &[i64], step: i64) -> Result<Self> {
        let cs = self
            .constraints
            .iter()
            .map(|c| {
                let shift: Q = c.coeffs.iter().zip(offset).map(|(a, o)| a * int(*o)).sum();
                Constraint::new(
                    c.coeffs.iter().map(|a| a * int(step)).collect(),
                    c.rel,
                    &c.bound - shift,
                )
            })
            .collect();
        Self::new(self.dim, cs)
    }

    fn propagate(&self, extra: &[Row]) -> Result<Option<Vec<Bounds>>> {
        let mut bounds: Vec<Bounds> = vec![(None, None); self.dim];
        let mut rows: Vec<(Vec<i128>, i128)> = Vec::new();
        for r in self.rows.iter().chain(extra) {
            rows.push((r.a.clone(), r.b));
            if r.eq {
                rows.push((r.a.iter().map(|x| -x).collect(), -r.b));
            }
        }
        for (a, b) in &rows {
            if a.iter().all(|x| *x == 0) && *b < 0 {
                return Ok(None);
            }
        }
        for _ in 0..PROPAGATION_ROUNDS {
            let mut changed = false;
            for (a, b) in &rows {
                for i in 0..self.dim {
                    if a[i] == 0 {
                        continue;
                    }
                    let mut rest: Option<i128> = Some(0);
                    for j in 0..self.dim {
                        if j == i || a[j] == 0 {
                            continue;
                        }
                        let m = if a[j] > 0 {
                            bounds[j].0.map(|l| a[j] * l)
                        } else {
                            bounds[j].1.map(|h| a[j] * h)
                        };
                        rest = match (rest, m) {
                            (Some(r), Some(v)) => Some(r + v),
                            _ => None,
                        };
                    }
                    let Some(rest) = rest else { continue };
                    let rhs = b - rest;
                    if a[i] > 0 {
                        let hi = rhs.div_euclid(a[i]);
                        if bounds[i].1.is_none_or(|h| hi < h) {
                            bounds[i].1 = Some(hi);
                            changed = true;
                        }
                    } else {
                        let lo = ceil_div(rhs, a[i]);
                        if bounds[i].0.is_none_or(|l| lo > l) {
                            bounds[i].0 = Some(lo);
                            changed = true;
                        }
                    }
                    if let (Some(l), Some(h)) = bounds[i] {
                        if l > h {
                            return Ok(None);
                        }
                    }
                }
            }
            if !changed {
                return Ok(Some(bounds));
            }
        }
        bail!(
            Input,
            "bound propagation did not settle within {PROPAGATION_ROUNDS} rounds"
        )
    }

    /// True when propagation proves there are no lattice points.
    pub fn is_provably_empty(&self) -> bool {
        matches!(self.propagate(&[]), Ok(None))
    }

    /// Bounding box of the slice `sum x_i = n`; error when unbounded.
    pub fn slice_box(&self, n: i64) -> Result<SliceBox> {
        let sum = Row {
            a: vec![1; self.dim],
            b: n as i128,
            eq: true,
        };
        let Some(bounds) = self.propagate(&[sum])? else {
            return Ok(SliceBox::Empty);
        };
        let mut out = Vec::with_capacity(self.dim);
        for (i, b) in bounds.iter().enumerate() {
            match b {
                (Some(l), Some(h)) => out.push((*l as i64, *h as i64)),
                _ => bail!(
                    Input,
                    "slice sum = {n} is unbounded in coordinate {} of chamber {}",
                    i + 1,
                    self.text()
                ),
            }
        }
        Ok(SliceBox::Bounded(out))
    }

    /// Lattice points of the slice `sum x_i = n`.
    pub fn slice_points(&self, n: i64) -> Result<Vec<Vec<i64>>> {
        let bx = match self.slice_box(n)? {
            SliceBox::Empty => return Ok(Vec::new()),
            SliceBox::Bounded(b) => b,
        };
        let mut out = Vec::new();
        let k = self.dim;
        let mut x: Vec<i64> = bx.iter().map(|b| b.0).collect();
        if k == 0 {
            return Ok(out);
        }
        loop {
            let partial: i64 = x[..k - 1].iter().sum();
            x[k - 1] = n - partial;
            if x[k - 1] >= bx[k - 1].0 && x[k - 1] <= bx[k - 1].1 && self.contains(&x) {
                out.push(x.clone());
            }
            let mut i = 0;
            loop {
                if i + 1 >= k {
                    return Ok(out);
                }
                if x[i] < bx[i].1 {
                    x[i] += 1;
                    break;
                }
                x[i] = bx[i].0;
                i += 1;
            }
        }
    }

    /// Lcm of `|det|` over nonsingular square subsystems of the integer rows and the sum row.
    pub fn period_bound(&self) -> u64 {
        let mut rows: Vec<Vec<i128>> = Vec::new();
        for r in &self.rows {
            if r.a.iter().any(|x| *x != 0) && !rows.contains(&r.a) {
                rows.push(r.a.clone());
            }
        }
        rows.push(vec![1; self.dim]);
        let mut l = 1u64;
        for subset in subsets(rows.len(), self.dim) {
            let m: Vec<Vec<i128>> = subset.iter().map(|&i| rows[i].clone()).collect();
            let d = det_bareiss(m).unsigned_abs();
            if d != 0 && d < u64::MAX as u128 {
                l = lcm(l, d as u64);
            }
        }
        l
    }

    /// 1-D interval `[lo, hi]` when the chamber lives on Z.
    pub fn as_interval(&self) -> Option<(Option<i64>, Option<i64>)> {
        if self.dim != 1 {
            return None;
        }
        let bounds = self.propagate(&[]).ok()??;
        Some((bounds[0].0.map(|v| v as i64), bounds[0].1.map(|v| v as i64)))
    }

    pub fn text(&self) -> String {
        if self.constraints.is_empty() {
            return "all".into();
        }
        let parts: Vec<String> = self
            .constraints
            .iter()
            .map(|c| {
                let lhs: Vec<String> = c.coeffs.iter().map(show).collect();
                alloc::format!(
                    "[{}].x {} {}",
                    lhs.join(","),
                    c.rel.symbol(),
                    show(&c.bound)
                )
            })
            .collect();
        parts.join(" and ")
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    if b > 0 {
        a.div_euclid(b)
    } else {
        (-a).div_euclid(-b)
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

fn det_bareiss(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Chamber-indexed quasi-polynomials over `Z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseQP<V: Value> {
    dim: usize,
    pieces: Vec<(Chamber, MultiQP<V>)>,
}

impl<V: Value> PiecewiseQP<V> {
    pub fn new(dim: usize, pieces: Vec<(Chamber, MultiQP<V>)>) -> Result<Self> {
        for (c, f) in &pieces {
            if c.dim() != dim || f.dim() != dim {
                bail!(Input, "piece dimension differs from {dim}");
            }
        }
        Ok(Self { dim, pieces })
    }

    pub fn single(f: MultiQP<V>) -> Self {
        let dim = f.dim();
        Self {
            dim,
            pieces: vec![(Chamber::whole(dim), f)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[(Chamber, MultiQP<V>)] {
        &self.pieces
    }

    /// Value at `x`; error if the chambers do not contain `x` exactly once.
    pub fn eval(&self, x: &[i64]) -> Result<V> {
        let mut hit = None;
        for (c, f) in &self.pieces {
            if c.contains(x) {
                if hit.is_some() {
                    bail!(Invariant, "point {x:?} lies in two chambers");
                }
                hit = Some(f.eval(x));
            }
        }
        match hit {
            Some(v) => Ok(v),
            None => bail!(Invariant, "point {x:?} lies in no chamber"),
        }
    }

    pub fn eval1(&self, n: i64) -> Result<V> {
        self.eval(&[n])
    }

    /// Merges adjacent 1-D intervals carrying the same quasi-polynomial.
    pub fn simplify_1d(&self) -> Self {
        if self.dim != 1 {
            return self.clone();
        }
        let mut ivs: Vec<(Interval, MultiQP<V>)> = Vec::new();
        for (c, f) in &self.pieces {
            if let Some(iv) = c.as_interval() {
                ivs.push((iv, f.canonical()));
            } else if !c.is_provably_empty() {
                return self.clone();
            }
        }
        ivs.sort_by(|a, b| match (a.0 .0, b.0 .0) {
            (None, None) => core::cmp::Ordering::Equal,
            (None, _) => core::cmp::Ordering::Less,
            (_, None) => core::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.cmp(&y),
        });
        let mut merged: Vec<(Interval, MultiQP<V>)> = Vec::new();
        for (iv, f) in ivs {
            if let Some(last) = merged.last_mut() {
                let adjacent = matches!((last.0 .1, iv.0), (Some(h), Some(l)) if h + 1 == l);
                if adjacent && last.1 == f {
                    last.0 .1 = iv.1;
                    continue;
                }
            }
            merged.push((iv, f));
        }
        Self {
            dim: 1,
            pieces: merged
                .into_iter()
                .map(|((l, h), f)| (Chamber::interval(l, h), f))
                .collect(),
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for (c, f) in &self.pieces {
            let chamber = match c.as_interval() {
                Some((l, h)) => interval_text(l, h),
                None => c.text(),
            };
            s.push_str(&alloc::format!("{chamber}: {}\n", f.text()));
        }
        s
    }
}

fn interval_text(l: Option<i64>, h: Option<i64>) -> String {
    match (l, h) {
        (Some(a), Some(b)) if a == b => alloc::format!("n = {a}"),
        (Some(a), Some(b)) => alloc::format!("{a} <= n <= {b}"),
        (Some(a), None) => alloc::format!("n >= {a}"),
        (None, Some(b)) => alloc::format!("n <= {b}"),
        (None, None) => "all n".into(),
    }
}

pub fn qp_add<V: Value>(f: &QuasiPoly<V>, g: &QuasiPoly<V>) -> QuasiPoly<V> {
    f.add(g)
}

/// Sum over the common refinement, dropping intersections proven empty.
pub fn pqp_add<V: Value>(f: &PiecewiseQP<V>, g: &PiecewiseQP<V>) -> Result<PiecewiseQP<V>> {
    if f.dim != g.dim {
        bail!(Input, "dimension mismatch {} vs {}", f.dim, g.dim);
    }
    let mut pieces = Vec::new();
    for (c1, q1) in &f.pieces {
        for (c2, q2) in &g.pieces {
            let c = c1.intersect(c2)?;
            if c.is_provably_empty() {
                continue;
            }
            pieces.push((c, q1.add(q2)?));
        }
    }
    Ok(PiecewiseQP { dim: f.dim, pieces })
}

/// `sum of w(x)` over lattice points of `chamber` with coordinate sum `n`.
pub fn ehrhart_sum<V: Value>(chamber: &Chamber, w: &MPoly<V>, n: i64) -> Result<V> {
    if w.dim() != chamber.dim() {
        bail!(
            Input,
            "weight has {} variables, chamber has {}",
            w.dim(),
            chamber.dim()
        );
    }
    let mut acc = V::nil();
    for x in chamber.slice_points(n)? {
        acc = acc.add(&w.eval(&x));
    }
    Ok(acc)
}

/// A fitted piecewise quasi-polynomial with the data used to certify it.
#[derive(Debug, Clone, PartialEq)]
pub struct Certified<V: Value> {
    pub pqp: PiecewiseQP<V>,
    pub period_bound: u64,
    pub degree_bound: usize,
    pub checked: (i64, i64),
}

/// Greedy interval segmentation of `values[i] = f(lo + i)` into quasi-polynomial pieces.
///
/// A candidate piece must agree with at least one sample beyond its interpolation window;
/// samples covered by no such piece become single-point pieces.
pub fn fit_piecewise<V: Value>(
    lo: i64,
    values: &[V],
    period_bound: u64,
    degree: usize,
) -> Result<PiecewiseQP<V>> {
    let len = values.len();
    let mut segments: Vec<(i64, i64, QuasiPoly<V>)> = Vec::new();
    let mut s = 0usize;
    while s < len {
        let mut best: Option<(usize, QuasiPoly<V>)> = None;
        for p in divisors(period_bound) {
            let window = p as usize * (degree + 1);
            if s + window > len {
                continue;
            }
            let polys: Vec<Poly<V>> = (0..p as usize)
                .map(|r| {
                    let pts: Vec<V> = (0..=degree)
                        .map(|j| values[s + r + j * p as usize].clone())
                        .collect();
                    (s + r, newton_fit(lo + (s + r) as i64, p as i64, &pts))
                })
                .map(|(start, poly)| (lo + start as i64, poly))
                .fold(vec![Poly::zero(); p as usize], |mut acc, (x0, poly)| {
                    acc[x0.rem_euclid(p as i64) as usize] = poly;
                    acc
                });
            let qp = QuasiPoly { period: p, polys };
            let mut e = s + window;
            while e < len && qp.eval(lo + e as i64) == values[e] {
                e += 1;
            }
            if e > s + window && best.as_ref().is_none_or(|(be, _)| e > *be) {
                best = Some((e, qp.canonical()));
            }
            if e == len {
                break;
            }
        }
        match best {
            Some((e, qp)) => {
                segments.push((lo + s as i64, lo + e as i64 - 1, qp));
                s = e;
            }
            None => {
                segments.push((
                    lo + s as i64,
                    lo + s as i64,
                    QuasiPoly::polynomial(Poly::constant(values[s].clone())),
                ));
                s += 1;
            }
        }
    }
    let count = segments.len();
    let pieces = segments
        .into_iter()
        .enumerate()
        .map(|(i, (a, b, qp))| {
            let l = if i == 0 { None } else { Some(a) };
            let h = if i + 1 == count { None } else { Some(b) };
            (Chamber::interval(l, h), MultiQP::from_qp(&qp))
        })
        .collect();
    Ok(PiecewiseQP { dim: 1, pieces }.simplify_1d())
}

/// Fits a piecewise quasi-polynomial to the lattice sums on `range` and
/// checks it against fresh sums outside the range.
pub fn certify_pqp<V: Value>(
    chamber: &Chamber,
    w: &MPoly<V>,
    range: (i64, i64),
) -> Result<Certified<V>> {
    let (lo, hi) = range;
    if lo > hi {
        bail!(Input, "empty range {lo}..{hi}");
    }
    let period_bound = chamber.period_bound();
    let degree_bound = chamber.dim() - 1 + w.degree() as usize;
    let values: Vec<V> = (lo..=hi)
        .map(|n| ehrhart_sum(chamber, w, n))
        .collect::<Result<_>>()?;
    let pqp = fit_piecewise(lo, &values, period_bound, degree_bound)?;
    let holdout = period_bound as i64 * (degree_bound as i64 + 2);
    for n in (lo - holdout..lo).chain(hi + 1..=hi + holdout) {
        let direct = ehrhart_sum(chamber, w, n)?;
        if pqp.eval1(n)? != direct {
            bail!(
                Certification,
                "fitted lattice sum disagrees with enumeration at n = {n}"
            );
        }
    }
    Ok(Certified {
        pqp,
        period_bound,
        degree_bound,
        checked: (lo - holdout, hi + holdout),
    })
}

/// `H(n) = sum over n_1 + ... + n_k = n of F(n_1, ..., n_k)`, built chamber by
/// chamber and residue by residue from certified lattice sums.
pub fn convolve_fiberwise<V: Value>(
    f: &PiecewiseQP<V>,
    range: (i64, i64),
) -> Result<PiecewiseQP<V>> {
    let mut total = PiecewiseQP::single(MultiQP::zero(1));
    for (chamber, g) in &f.pieces {
        if g.is_zero() {
            continue;
        }
        let d = g.period() as i64;
        for (res, poly) in g.residues() {
            if poly.is_zero() {
                continue;
            }
            let offset: Vec<i64> = res.iter().map(|&r| r as i64).collect();
            let shift: i64 = offset.iter().sum();
            let sub = chamber.substitute(&offset, d)?;
            let w = poly.substitute(&offset, d);
            let inner = (
                (range.0 - shift).div_euclid(d) - 1,
                (range.1 - shift).div_euclid(d) + 1,
            );
            let cert = certify_pqp(&sub, &w, inner)?;
            total = pqp_add(&total, &lift_residue(&cert.pqp, d, shift)?)?.simplify_1d();
        }
    }
    Ok(total.simplify_1d())
}

/// `h(n) = g((n - shift)/d)` when `n = shift mod d`, else 0. An inner interval
/// `[l, h]` covers the `n` with `ceil((n - shift)/d)` in `[l, h]`.
fn lift_residue<V: Value>(g: &PiecewiseQP<V>, d: i64, shift: i64) -> Result<PiecewiseQP<V>> {
    let mut pieces = Vec::new();
    for (c, f) in &g.pieces {
        let (l, h) = match c.as_interval() {
            Some(iv) => iv,
            None => continue,
        };
        let lo = l.map(|v| (v - 1) * d + shift + 1);
        let hi = h.map(|v| v * d + shift);
        let qp = f.to_qp()?;
        let p = qp.period() as i64;
        let big = (d * p) as usize;
        let polys = (0..big)
            .map(|rho| {
                let rho = rho as i64;
                if (rho - shift).rem_euclid(d) != 0 {
                    return Poly::zero();
                }
                let inner = (rho - shift).div_euclid(d).rem_euclid(p);
                qp.polys()[inner as usize]
                    .compose_affine(&(Q::one() / int(d)), &(int(-shift) / int(d)))
            })
            .collect();
        pieces.push((
            Chamber::interval(lo, hi),
            MultiQP::from_qp(&QuasiPoly::new(polys)?),
        ));
    }
    Ok(PiecewiseQP { dim: 1, pieces })
}

/// Interpolates samples obeying `sum_i (-1)^i C(m,i) f(n + i d) = 0`.
pub fn solve_difference<V: Value>(
    m: usize,
    d: u64,
    samples: &BTreeMap<i64, V>,
) -> Result<QuasiPoly<V>> {
    if m == 0 || d == 0 {
        bail!(Input, "order and step must be positive");
    }
    let step = d as i64;
    for &n in samples.keys() {
        let window: Option<Vec<&V>> = (0..=m as i64)
            .map(|i| samples.get(&(n + i * step)))
            .collect();
        if let Some(vals) = window {
            let mut acc = V::nil();
            for (i, v) in vals.iter().enumerate() {
                let c = Q::from_integer(crate::rat::binomial(m as i64, i as i64))
                    * crate::rat::sign_power(i as u64);
                acc = acc.add(&v.scale(&c));
            }
            if !acc.is_nil() {
                bail!(
                    Certification,
                    "order-{m} annihilator fails at n = {n}: not a quasi-polynomial sequence"
                );
            }
        }
    }
    let mut polys = vec![Poly::zero(); d as usize];
    for r in 0..step {
        let start = samples.keys().copied().find(|&n| {
            n.rem_euclid(step) == r && (0..m as i64).all(|i| samples.contains_key(&(n + i * step)))
        });
        let Some(n0) = start else {
            bail!(
                Input,
                "need {m} consecutive samples in residue class {r} mod {d}"
            );
        };
        let pts: Vec<V> = (0..m as i64)
            .map(|i| samples[&(n0 + i * step)].clone())
            .collect();
        polys[r as usize] = newton_fit(n0, step, &pts);
    }
    let qp = QuasiPoly { period: d, polys };
    for (&n, v) in samples {
        if qp.eval(n) != *v {
            bail!(
                Certification,
                "interpolated quasi-polynomial misses sample at n = {n}"
            );
        }
    }
    Ok(qp.canonical())
}

/// Dense matrix over Q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            bail!(Input, "ragged matrix rows");
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix shapes");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Block diagonal sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }
}

/// Least `m` with `(id - J)^m = 0`, searched up to `cap`.
pub fn nilpotency_order(j: &Matrix, cap: u32) -> Result<u32> {
    if j.rows() != j.cols() {
        bail!(Input, "endomorphism must be square");
    }
    let n = Matrix::identity(j.rows()).sub(j);
    let mut power = n.clone();
    for m in 1..=cap {
        if power.is_zero() {
            return Ok(m);
        }
        power = power.mul(&n);
    }
    bail!(
        Certification,
        "id - J is not nilpotent of order <= {cap}: J is not unipotent"
    )
}

/// Propagates `f(n + d) = J f(n)` from the initial block `f(n0 .. n0 + d - 1)`
/// and returns the resulting quasi-polynomial, checked on `range`.
pub fn shift_to_qp(
    j: &Matrix,
    d: u64,
    n0: i64,
    initial: &[Vec<Q>],
    range: (i64, i64),
    cap: u32,
) -> Result<QuasiPoly<Vector<usize>>> {
    if initial.len() as u64 != d {
        bail!(Input, "need {d} initial vectors, got {}", initial.len());
    }
    if initial.iter().any(|v| v.len() != j.cols()) {
        bail!(Input, "initial vectors must have length {}", j.cols());
    }
    let m = nilpotency_order(j, cap)? as usize;
    let to_vec = |v: &[Q]| {
        let mut out = Vector::new();
        for (i, q) in v.iter().enumerate() {
            out.add_entry(i, q.clone());
        }
        out
    };
    let hi = range.1.max(n0 + (m as i64 + 1) * d as i64);
    let mut samples = BTreeMap::new();
    let mut current: Vec<Vec<Q>> = initial.to_vec();
    let mut base = n0;
    while base <= hi {
        for (r, v) in current.iter().enumerate() {
            samples.insert(base + r as i64, to_vec(v));
        }
        current = current.iter().map(|v| j.apply(v)).collect();
        base += d as i64;
    }
    let qp = solve_difference(m, d, &samples)?;
    for n in range.0.max(n0)..=range.1 {
        if let Some(v) = samples.get(&n) {
            if qp.eval(n) != *v {
                bail!(
                    Certification,
                    "shift propagation disagrees with fitted quasi-polynomial at n = {n}"
                );
            }
        }
    }
    Ok(qp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    fn quadrant() -> Chamber {
        Chamber::new(
            2,
            vec![
                Constraint::ints(&[1, 0], Rel::Ge, 0),
                Constraint::ints(&[0, 1], Rel::Ge, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn qp_eval_examples() {
        let sq = QuasiPoly::polynomial(Poly::new(vec![int(0), int(0), int(1)]));
        assert_eq!(sq.eval(3), int(9));
        let alt = QuasiPoly::new(vec![Poly::constant(int(1)), Poly::zero()]).unwrap();
        assert_eq!(alt.eval(4), int(1));
        assert_eq!(alt.eval(-3), int(0));
        let mut e1 = Vector::new();
        e1.add_entry("e1", int(1));
        let v = QuasiPoly::polynomial(Poly::new(vec![Vector::from_entry("e2", int(2)), e1]));
        let mut expect = Vector::new();
        expect.add_entry("e1", int(5));
        expect.add_entry("e2", int(2));
        assert_eq!(v.eval(5), expect);
    }

    #[test]
    fn periods_combine_by_lcm() {
        let two = QuasiPoly::new(vec![Poly::constant(int(1)), Poly::zero()]).unwrap();
        let three =
            QuasiPoly::new(vec![Poly::constant(int(1)), Poly::zero(), Poly::zero()]).unwrap();
        assert_eq!(qp_add(&two, &three).period(), 6);
        assert_eq!(qp_add(&two, &QuasiPoly::zero()), two);
        let redundant = QuasiPoly::new(vec![Poly::constant(int(4)); 6]).unwrap();
        assert_eq!(redundant.period(), 1);
    }

    #[test]
    fn refinement_of_two_splits() {
        let f = PiecewiseQP::new(
            1,
            vec![
                (
                    Chamber::interval(None, Some(-1)),
                    MultiQP::polynomial(MPoly::constant(1, int(1))),
                ),
                (
                    Chamber::interval(Some(0), None),
                    MultiQP::polynomial(MPoly::constant(1, int(2))),
                ),
            ],
        )
        .unwrap();
        let g = PiecewiseQP::new(
            1,
            vec![
                (
                    Chamber::new(1, vec![Constraint::ints(&[1], Rel::Lt, 5)]).unwrap(),
                    MultiQP::zero(1),
                ),
                (
                    Chamber::new(1, vec![Constraint::ints(&[1], Rel::Ge, 5)]).unwrap(),
                    MultiQP::polynomial(MPoly::constant(1, int(10))),
                ),
            ],
        )
        .unwrap();
        let h = pqp_add(&f, &g).unwrap();
        assert_eq!(h.pieces().len(), 3);
        assert_eq!(h.eval1(-4).unwrap(), int(1));
        assert_eq!(h.eval1(3).unwrap(), int(2));
        assert_eq!(h.eval1(7).unwrap(), int(12));
    }

    #[test]
    fn strict_and_rational_constraints() {
        let c = Chamber::new(
            1,
            vec![Constraint::new(vec![frac(1, 2)], Rel::Lt, frac(3, 2))],
        )
        .unwrap();
        assert!(c.contains(&[2]));
        assert!(!c.contains(&[3]));
        for x in -5..6 {
            assert_eq!(c.contains(&[x]), c.contains_exact(&[x]));
        }
        let none = Chamber::new(1, vec![Constraint::new(vec![int(2)], Rel::Eq, int(3))]).unwrap();
        assert!(none.is_provably_empty());
    }

    #[test]
    fn compositions_count() {
        let c = quadrant();
        let one = MPoly::constant(2, int(1));
        for n in -5..30 {
            let expect = if n >= 0 { int(n + 1) } else { int(0) };
            assert_eq!(ehrhart_sum(&c, &one, n).unwrap(), expect);
        }
    }

    #[test]
    fn triangle_has_period_two() {
        let c = Chamber::new(
            2,
            vec![
                Constraint::ints(&[1, 0], Rel::Ge, 0),
                Constraint::ints(&[1, -1], Rel::Le, 0),
            ],
        )
        .unwrap();
        assert_eq!(c.period_bound(), 2);
        let cert = certify_pqp(&c, &MPoly::constant(2, int(1)), (-20, 20)).unwrap();
        for n in -40i64..40 {
            let expect = if n >= 0 {
                int(n.div_euclid(2) + 1)
            } else {
                int(0)
            };
            assert_eq!(cert.pqp.eval1(n).unwrap(), expect);
        }
    }

    #[test]
    fn unbounded_slice_is_rejected() {
        let c = Chamber::new(2, vec![Constraint::ints(&[1, 0], Rel::Ge, 0)]).unwrap();
        assert!(ehrhart_sum(&c, &MPoly::constant(2, int(1)), 3).is_err());
    }

    #[test]
    fn convolution_of_weighted_quadrant() {
        let mut w = MPoly::zero(2);
        w.add_term(vec![1, 0], int(1));
        let f = PiecewiseQP::new(2, vec![(quadrant(), MultiQP::polynomial(w))]).unwrap();
        let h = convolve_fiberwise(&f, (-10, 30)).unwrap();
        for n in -20..60 {
            let expect = if n >= 0 { int(n * (n + 1) / 2) } else { int(0) };
            assert_eq!(h.eval1(n).unwrap(), expect, "n = {n}");
        }
    }

    #[test]
    fn difference_solver_examples() {
        let samples: BTreeMap<i64, Q> = [(0, int(1)), (1, int(3)), (2, int(5)), (3, int(7))]
            .into_iter()
            .collect();
        let qp = solve_difference(2, 1, &samples).unwrap();
        assert_eq!(qp.polys()[0], Poly::new(vec![int(1), int(2)]));
        let periodic: BTreeMap<i64, Q> = (0..6).map(|n| (n, int(n % 2))).collect();
        let qp = solve_difference(1, 2, &periodic).unwrap();
        assert_eq!(qp.period(), 2);
        let bad: BTreeMap<i64, Q> = (0..6).map(|n| (n, int(n * n))).collect();
        assert!(matches!(
            solve_difference(2, 1, &bad),
            Err(crate::Error::Certification(_))
        ));
    }

    #[test]
    fn nilpotency_examples() {
        assert_eq!(nilpotency_order(&Matrix::identity(3), 5).unwrap(), 1);
        let jordan = Matrix::from_rows(vec![vec![int(1), int(1)], vec![int(0), int(1)]]).unwrap();
        assert_eq!(nilpotency_order(&jordan, 5).unwrap(), 2);
        let not = Matrix::from_rows(vec![vec![int(2)]]).unwrap();
        assert!(nilpotency_order(&not, 10).is_err());
    }

    #[test]
    fn shift_with_identity_is_periodic() {
        let qp = shift_to_qp(
            &Matrix::identity(2),
            3,
            0,
            &[
                vec![int(1), int(0)],
                vec![int(0), int(2)],
                vec![int(5), int(5)],
            ],
            (0, 30),
            4,
        )
        .unwrap();
        assert_eq!(qp.period(), 3);
        assert_eq!(qp.degree(), 0);
    }

    #[test]
    fn affine_substitution() {
        let p = Poly::new(vec![int(1), int(2), int(3)]);
        let q = p.compose_affine(&frac(1, 2), &int(-1));
        for x in -5..5 {
            assert_eq!(q.eval(x), p.eval_q(&(frac(x, 2) - int(1))));
        }
        let mut w = MPoly::zero(2);
        w.add_term(vec![2, 1], int(1));
        let s = w.substitute(&[1, -2], 3);
        for (a, b) in [(0, 0), (1, 2), (-3, 4)] {
            assert_eq!(s.eval(&[a, b]), w.eval(&[1 + 3 * a, -2 + 3 * b]));
        }
    }
}
