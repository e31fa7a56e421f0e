//! A desk-scale graded vertex algebra.
//!
//! Elements are sums of terms `c * m (x) t^k` where `m` is a commutative
//! monomial in base symbols, `t^k` records powers of the translation
//! generator and every term carries a class label. The translation operator
//! `D` raises `k`; `R_c` lowers it with factor `c k`, so `[R_c, D] = c`.
//!
//! The state-field map on `t`-degree zero is
//!
//! ```text
//! Y(p,z)q = sign * sum_i z^(chi_sym - i) w_i(n', n'') (p q)
//! ```
//!
//! and is extended by `Y(Du,z) = d/dz Y(u,z)` and
//! `Y(u,z) Dv = D Y(u,z)v - d/dz Y(u,z)v`. Mode `u_k` is the coefficient of
//! `z^(-k-1)`.
//!
//! Weights obey the graded symmetry `w_i(b,a)(n'',n') = (-1)^i w_i(a,b)(n',n'')`
//! inherited from dualising the Ext complex, which is what makes the
//! Borcherds bracket antisymmetric modulo the image of `D`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::classlat::{euler_serre, euler_sym, Additive, GeometryModel, KClass};
use crate::error::{bail, Result};
use crate::rat::{binomial, factorial, falling, int, show};
use crate::Q;
use num_traits::{One, Zero};

/// `Q[s]/(s^(N+1))`; `N = 0` is the plain rational case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoeffRing {
    truncation: u32,
}

impl CoeffRing {
    pub fn rational() -> Self {
        Self { truncation: 0 }
    }

    pub fn truncated(n: u32) -> Self {
        Self { truncation: n }
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let top = self.truncation as usize;
        let mut out = vec![Q::zero(); (a.0.len() + b.0.len()).min(top + 1)];
        for (i, x) in a.0.iter().enumerate() {
            for (j, y) in b.0.iter().enumerate() {
                if i + j <= top {
                    out[i + j] += x * y;
                }
            }
        }
        RingElem::from_coeffs(out)
    }

    pub fn pow(&self, a: &RingElem, k: u32) -> RingElem {
        (0..k).fold(RingElem::one(), |acc, _| self.mul(&acc, a))
    }
}

/// Element of a [`CoeffRing`], stored as coefficients of `1, s, s^2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RingElem(Vec<Q>);

impl RingElem {
    pub fn from_coeffs(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Self(c)
    }

    pub fn constant(q: Q) -> Self {
        Self::from_coeffs(vec![q])
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    /// `q s^power`.
    pub fn monomial(q: Q, power: u32) -> Self {
        let mut c = vec![Q::zero(); power as usize + 1];
        c[power as usize] = q;
        Self::from_coeffs(c)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let get = |v: &[Q], i: usize| v.get(i).cloned().unwrap_or_else(Q::zero);
        Self::from_coeffs((0..n).map(|i| get(&self.0, i) + get(&other.0, i)).collect())
    }

    pub fn scale(&self, q: &Q) -> Self {
        Self::from_coeffs(self.0.iter().map(|x| x * q).collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn text(&self) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        if self.0.len() == 1 {
            return show(&self.0[0]);
        }
        let mut parts = Vec::new();
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            parts.push(match i {
                0 => show(c),
                1 => alloc::format!("{}*s", show(c)),
                _ => alloc::format!("{}*s^{}", show(c), i),
            });
        }
        alloc::format!("({})", parts.join(" + "))
    }
}

/// Commutative monomial: sorted `(symbol id, exponent)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn single(id: u32) -> Self {
        Self(vec![(id, 1)])
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m: BTreeMap<u32, u32> = self.0.iter().copied().collect();
        for &(s, e) in &other.0 {
            *m.entry(s).or_insert(0) += e;
        }
        Self(m.into_iter().collect())
    }

    pub fn hdeg(&self, table: &SymbolTable) -> u32 {
        self.0
            .iter()
            .map(|&(s, e)| table.get(s).map_or(0, |b| b.hdeg) * e)
            .sum()
    }

    pub fn text(&self, table: &SymbolTable) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(s, e)| {
                let name = table
                    .get(s)
                    .map_or_else(|| alloc::format!("#{s}"), |b| b.name.clone());
                if e == 1 {
                    name
                } else {
                    alloc::format!("{name}^{e}")
                }
            })
            .collect();
        parts.join("*")
    }
}

/// Named homology class with a home class label and homological degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseSymbol {
    pub name: String,
    pub class: KClass,
    pub hdeg: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolTable {
    symbols: Vec<BaseSymbol>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, class: KClass, hdeg: u32) -> Result<u32> {
        if self.find(name).is_some() {
            bail!(Config, "duplicate symbol name `{name}`");
        }
        self.symbols.push(BaseSymbol {
            name: name.into(),
            class,
            hdeg,
        });
        Ok((self.symbols.len() - 1) as u32)
    }

    pub fn get(&self, id: u32) -> Option<&BaseSymbol> {
        self.symbols.get(id as usize)
    }

    pub fn find(&self, name: &str) -> Option<u32> {
        self.symbols
            .iter()
            .position(|b| b.name == name)
            .map(|p| p as u32)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Key of a term: class label, monomial and `t`-degree, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub class: KClass,
    pub mono: Monomial,
    pub tdeg: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModeElement {
    terms: BTreeMap<TermKey, RingElem>,
}

impl ModeElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(class: KClass, mono: Monomial, tdeg: u32, coeff: RingElem) -> Self {
        let mut e = Self::zero();
        e.add_term(TermKey { class, mono, tdeg }, coeff);
        e
    }

    /// The vacuum: empty monomial in the zero class of rank `r`.
    pub fn vacuum(rank: usize) -> Self {
        Self::term(
            KClass::sheaf(vec![0; rank], 0),
            Monomial::one(),
            0,
            RingElem::one(),
        )
    }

    pub fn add_term(&mut self, key: TermKey, coeff: RingElem) {
        if coeff.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&key) {
            Some(old) => old.add(&coeff),
            None => coeff,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &RingElem)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c.clone());
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, q: &Q) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.scale(q));
        }
        out
    }

    pub fn scale_ring(&self, ring: &CoeffRing, r: &RingElem) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(k.clone(), ring.mul(c, r));
        }
        out
    }

    pub fn max_tdeg(&self) -> u32 {
        self.terms.keys().map(|k| k.tdeg).max().unwrap_or(0)
    }

    /// Pair ranks `d` appearing among the class labels.
    pub fn pair_ranks(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.terms.keys().map(|k| k.class.d).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Canonical one-term-per-line text, sorted by (class, monomial, t-degree).
    pub fn dump(&self, table: &SymbolTable) -> String {
        if self.terms.is_empty() {
            return "0\n".into();
        }
        let mut s = String::new();
        for (k, c) in &self.terms {
            let _ = writeln!(
                s,
                "{} {} {} t^{}",
                k.class,
                c.text(),
                k.mono.text(table),
                k.tdeg
            );
        }
        s
    }
}

/// Polynomial in `(n', n'')` with ring coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightPoly(BTreeMap<(u32, u32), RingElem>);

impl WeightPoly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(q: Q) -> Self {
        let mut p = Self::new();
        p.add((0, 0), RingElem::constant(q));
        p
    }

    pub fn add(&mut self, exps: (u32, u32), c: RingElem) {
        let merged = match self.0.remove(&exps) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.0.insert(exps, merged);
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.0.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn swapped(&self) -> Self {
        Self(
            self.0
                .iter()
                .map(|(&(a, b), c)| ((b, a), c.clone()))
                .collect(),
        )
    }

    pub fn scale(&self, q: &Q) -> Self {
        let mut p = Self::new();
        for (e, c) in &self.0 {
            p.add(*e, c.scale(q));
        }
        p
    }

    pub fn eval(&self, x: i64, y: i64) -> RingElem {
        let mut acc = RingElem::zero();
        for (&(a, b), c) in &self.0 {
            let v = int(x).pow(a as i32) * int(y).pow(b as i32);
            acc = acc.add(&c.scale(&v));
        }
        acc
    }
}

/// Class pattern a weight depends on: `(d, beta)`.
pub type ClassKey = (i64, Vec<i64>);

fn class_key(k: &KClass) -> ClassKey {
    (k.d, k.beta.clone())
}

fn graded_sign(i: u32) -> Q {
    if i.is_multiple_of(2) {
        Q::one()
    } else {
        -Q::one()
    }
}

/// Weights `w_i` for `i >= 1`, keyed by unordered class patterns.
///
/// Entries are stored for the canonical order `a <= b` as polynomials in
/// `(n_a, n_b)`; the other order follows by graded symmetry. Defaults keyed by
/// pair ranks apply when no explicit entry exists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightTable {
    explicit: BTreeMap<(u32, ClassKey, ClassKey), WeightPoly>,
    defaults: BTreeMap<(u32, i64, i64), WeightPoly>,
    zero_above: Option<u32>,
}

fn check_weight(i: u32, p: &WeightPoly, diagonal: bool, what: &str) -> Result<()> {
    if i == 0 {
        bail!(Config, "weight w_0 is fixed to 1 ({what})");
    }
    if p.total_degree() > i {
        bail!(
            Config,
            "weight w_{i} for {what} has degree {} > {i}",
            p.total_degree()
        );
    }
    if diagonal && p.swapped().scale(&graded_sign(i)) != *p {
        bail!(
            Config,
            "weight w_{i} for {what} violates graded symmetry w(n'',n') = (-1)^i w(n',n'')"
        );
    }
    Ok(())
}

impl WeightTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// All `w_i` with `i > k` vanish.
    pub fn set_zero_above(&mut self, k: u32) {
        self.zero_above = Some(k);
    }

    pub fn insert(&mut self, i: u32, a: ClassKey, b: ClassKey, poly: WeightPoly) -> Result<()> {
        let what = alloc::format!("{a:?},{b:?}");
        check_weight(i, &poly, a == b, &what)?;
        let (lo, hi, p) = if a <= b {
            (a, b, poly)
        } else {
            (b, a, poly.swapped().scale(&graded_sign(i)))
        };
        self.explicit.insert((i, lo, hi), p);
        Ok(())
    }

    pub fn insert_default(&mut self, i: u32, d1: i64, d2: i64, poly: WeightPoly) -> Result<()> {
        let what = alloc::format!("default ranks ({d1},{d2})");
        check_weight(i, &poly, d1 == d2, &what)?;
        let (lo, hi, p) = if d1 <= d2 {
            (d1, d2, poly)
        } else {
            (d2, d1, poly.swapped().scale(&graded_sign(i)))
        };
        self.defaults.insert((i, lo, hi), p);
        Ok(())
    }

    /// `w_i(a, b)` evaluated at the `n`-components of the two classes.
    pub fn weight(&self, i: u32, a: &KClass, b: &KClass) -> Result<RingElem> {
        if i == 0 {
            return Ok(RingElem::one());
        }
        if a.is_zero() || b.is_zero() || self.zero_above.is_some_and(|k| i > k) {
            return Ok(RingElem::zero());
        }
        let (ka, kb) = (class_key(a), class_key(b));
        let (lo, hi, x, y, flip) = if ka <= kb {
            (ka, kb, a.n, b.n, false)
        } else {
            (kb, ka, b.n, a.n, true)
        };
        let poly = match self.explicit.get(&(i, lo.clone(), hi.clone())) {
            Some(p) => p,
            None => match self.defaults.get(&(i, lo.0, hi.0)) {
                Some(p) => p,
                None => bail!(Config, "missing weight w_{i} for class pair {lo:?}, {hi:?}"),
            },
        };
        let v = poly.eval(x, y);
        Ok(if flip { v.scale(&graded_sign(i)) } else { v })
    }
}

/// Rule for the sign `(-1)^chi(a,b)` in the state-field map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parity {
    /// `chi_sym(a,b) mod 2`.
    #[default]
    ChiSym,
    /// Always `+1`.
    Zero,
    /// Parity of the unsymmetrized Serre-duality Euler form.
    Euler,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexConfig {
    pub geometry: GeometryModel,
    pub ring: CoeffRing,
    pub symbols: SymbolTable,
    pub weights: WeightTable,
    pub parity: Parity,
}

impl VertexConfig {
    fn sign(&self, a: &KClass, b: &KClass, chi_sym: i64) -> Q {
        let p = match self.parity {
            Parity::ChiSym => chi_sym,
            Parity::Zero => 0,
            Parity::Euler => euler_serre(&self.geometry, a, b),
        };
        graded_sign(p.rem_euclid(2) as u32)
    }
}

/// Raises every `t`-degree by one.
pub fn op_d(u: &ModeElement) -> ModeElement {
    let mut out = ModeElement::zero();
    for (k, c) in u.terms() {
        out.add_term(
            TermKey {
                tdeg: k.tdeg + 1,
                ..k.clone()
            },
            c.clone(),
        );
    }
    out
}

pub fn op_d_pow(u: &ModeElement, k: u32) -> ModeElement {
    (0..k).fold(u.clone(), |acc, _| op_d(&acc))
}

/// `p t^m -> c m p t^(m-1)`.
pub fn op_r(u: &ModeElement, c: &Q) -> ModeElement {
    let mut out = ModeElement::zero();
    for (k, coeff) in u.terms() {
        if k.tdeg == 0 {
            continue;
        }
        out.add_term(
            TermKey {
                tdeg: k.tdeg - 1,
                ..k.clone()
            },
            coeff.scale(&(c * int(k.tdeg as i64))),
        );
    }
    out
}

/// Projection `sum_k D^k R^k / (k! (-c)^k)` onto the kernel of `R_c`.
pub fn proj_e0(u: &ModeElement, c: &Q) -> Result<ModeElement> {
    if c.is_zero() {
        bail!(Input, "projection needs a nonzero constant");
    }
    let mut out = ModeElement::zero();
    let mut rk = u.clone();
    let mut k = 0u32;
    while !rk.is_zero() {
        let coef = Q::one() / (Q::from_integer(factorial(k as u64)) * (-c).pow(k as i32));
        out.add_assign(&op_d_pow(&rk, k).scale(&coef));
        rk = op_r(&rk, c);
        k += 1;
    }
    Ok(out)
}

/// Splits `u = kernel + D(w)` with `kernel` in the kernel of `R_c`.
pub fn decompose(u: &ModeElement, c: &Q) -> Result<(ModeElement, ModeElement)> {
    let kernel = proj_e0(u, c)?;
    let rest = u.sub(&kernel);
    let mut w = ModeElement::zero();
    for (k, coeff) in rest.terms() {
        if k.tdeg == 0 {
            bail!(Invariant, "image part has a t-degree zero term");
        }
        w.add_term(
            TermKey {
                tdeg: k.tdeg - 1,
                ..k.clone()
            },
            coeff.clone(),
        );
    }
    Ok((kernel, w))
}

/// True when every term has positive `t`-degree.
pub fn in_d_image(u: &ModeElement) -> bool {
    u.terms().all(|(k, _)| k.tdeg >= 1)
}

/// Representative modulo the image of `D`.
pub fn reduce_mod_d(u: &ModeElement) -> ModeElement {
    let mut out = ModeElement::zero();
    for (k, c) in u.terms() {
        if k.tdeg == 0 {
            out.add_term(k.clone(), c.clone());
        }
    }
    out
}

/// Laurent series `Y(u,z)v` as a map from `z`-exponent to coefficient.
pub fn field(
    u: &ModeElement,
    v: &ModeElement,
    cfg: &VertexConfig,
) -> Result<BTreeMap<i64, ModeElement>> {
    let mut out: BTreeMap<i64, ModeElement> = BTreeMap::new();
    let ring = &cfg.ring;
    for (ku, cu) in u.terms() {
        for (kv, cv) in v.terms() {
            let (alpha, beta) = (&ku.class, &kv.class);
            let vacuum = alpha.is_zero() || beta.is_zero();
            let chi = if vacuum {
                0
            } else {
                euler_sym(&cfg.geometry, alpha, beta)?
            };
            let sign = if vacuum {
                Q::one()
            } else {
                cfg.sign(alpha, beta, chi)
            };
            let hsum = ku.mono.hdeg(&cfg.symbols) + kv.mono.hdeg(&cfg.symbols);
            let cap = (hsum + ring.truncation()) / 2;
            let class = alpha.plus(beta);
            let mono = ku.mono.mul(&kv.mono);
            let base = ring.mul(cu, cv).scale(&sign);
            let (a, b) = (ku.tdeg, kv.tdeg);
            for i in 0..=cap {
                let w = cfg.weights.weight(i, alpha, beta)?;
                if w.is_zero() {
                    continue;
                }
                let ci = ring.mul(&base, &w);
                let p = chi - i as i64;
                let f = falling(p, a);
                if f.is_zero() {
                    continue;
                }
                let p1 = p - a as i64;
                for r in 0..=b {
                    let coef = binomial(b as i64, r as i64) * falling(p1, r);
                    if coef.is_zero() {
                        continue;
                    }
                    let signed = if r % 2 == 0 { coef } else { -coef };
                    let total = Q::from_integer(signed * &f);
                    let key = TermKey {
                        class: class.clone(),
                        mono: mono.clone(),
                        tdeg: b - r,
                    };
                    out.entry(p1 - r as i64)
                        .or_default()
                        .add_term(key, ci.scale(&total));
                }
            }
        }
    }
    out.retain(|_, e| !e.is_zero());
    Ok(out)
}

/// The mode `u_k(v)`, the coefficient of `z^(-k-1)` in `Y(u,z)v`.
pub fn mode_product(
    u: &ModeElement,
    v: &ModeElement,
    k: i64,
    cfg: &VertexConfig,
) -> Result<ModeElement> {
    Ok(field(u, v, cfg)?.remove(&(-k - 1)).unwrap_or_default())
}

/// All nonzero modes `u_k(v)` with `k >= 0`.
pub fn nonneg_modes(
    u: &ModeElement,
    v: &ModeElement,
    cfg: &VertexConfig,
) -> Result<BTreeMap<i64, ModeElement>> {
    Ok(field(u, v, cfg)?
        .into_iter()
        .filter(|(e, _)| *e <= -1)
        .map(|(e, m)| (-e - 1, m))
        .collect())
}

/// Borcherds bracket `u_0(v)`, compared modulo the image of `D`.
pub fn borcherds_bracket(
    u: &ModeElement,
    v: &ModeElement,
    cfg: &VertexConfig,
) -> Result<ModeElement> {
    mode_product(u, v, 0, cfg)
}

/// Which lift of the Lie bracket applies to a pair of pair ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftCase {
    /// Two sheaf classes: `u_0(v)`.
    SheafSheaf,
    /// Pair then sheaf: `sum_k (-1)^k/k! D^k u_k(v)`.
    PairSheaf,
    /// Sheaf then pair: `-sum_k (-1)^k/k! D^k v_k(u)`.
    SheafPair,
}

impl LiftCase {
    pub fn for_ranks(du: i64, dv: i64) -> Result<Self> {
        match (du, dv) {
            (0, 0) => Ok(LiftCase::SheafSheaf),
            (1, 0) => Ok(LiftCase::PairSheaf),
            (0, 1) => Ok(LiftCase::SheafPair),
            _ => bail!(Input, "no lifted bracket for pair ranks ({du},{dv})"),
        }
    }
}

fn alternating_lift(x: &ModeElement, y: &ModeElement, cfg: &VertexConfig) -> Result<ModeElement> {
    let mut out = ModeElement::zero();
    for (k, m) in nonneg_modes(x, y, cfg)? {
        let coef = crate::rat::sign_power(k as u64) / Q::from_integer(factorial(k as u64));
        out.add_assign(&op_d_pow(&m, k as u32).scale(&coef));
    }
    Ok(out)
}

fn check_ranks(u: &ModeElement, d: i64, side: &str) -> Result<()> {
    let ranks = u.pair_ranks();
    if ranks.iter().any(|&r| r != d) {
        bail!(
            Input,
            "{side} argument has pair ranks {ranks:?}, expected {d}"
        );
    }
    Ok(())
}

pub fn lifted_bracket(
    u: &ModeElement,
    v: &ModeElement,
    case: LiftCase,
    cfg: &VertexConfig,
) -> Result<ModeElement> {
    let (du, dv) = match case {
        LiftCase::SheafSheaf => (0, 0),
        LiftCase::PairSheaf => (1, 0),
        LiftCase::SheafPair => (0, 1),
    };
    check_ranks(u, du, "left")?;
    check_ranks(v, dv, "right")?;
    match case {
        LiftCase::SheafSheaf => mode_product(u, v, 0, cfg),
        LiftCase::PairSheaf => alternating_lift(u, v, cfg),
        LiftCase::SheafPair => Ok(alternating_lift(v, u, cfg)?.scale(&-Q::one())),
    }
}

/// `sum_k (1/k!) (-c_a / c_ab)^k D^k u_k(v)` for `u, v` in the kernel of `R`.
pub fn lifted_bracket_general(
    u: &ModeElement,
    v: &ModeElement,
    c_a: &Q,
    c_ab: &Q,
    cfg: &VertexConfig,
) -> Result<ModeElement> {
    if c_ab.is_zero() {
        bail!(
            Input,
            "c of the sum class vanishes; use the pair/sheaf lifted bracket"
        );
    }
    if u.max_tdeg() > 0 || v.max_tdeg() > 0 {
        bail!(Input, "arguments must lie in the kernel of R");
    }
    let ratio = -c_a / c_ab;
    let mut out = ModeElement::zero();
    for (k, m) in nonneg_modes(u, v, cfg)? {
        let coef = ratio.pow(k as i32) / Q::from_integer(factorial(k as u64));
        out.add_assign(&op_d_pow(&m, k as u32).scale(&coef));
    }
    Ok(out)
}

/// Iterated bracket `[..[[x1,x2],x3],..,xk]` with lifts chosen by pair rank.
pub fn nested_lifted(
    items: &[ModeElement],
    ranks: &[i64],
    cfg: &VertexConfig,
) -> Result<ModeElement> {
    let mut acc = items[0].clone();
    let mut d = ranks[0];
    for (x, &dx) in items[1..].iter().zip(&ranks[1..]) {
        acc = lifted_bracket(&acc, x, LiftCase::for_ranks(d, dx)?, cfg)?;
        d += dx;
    }
    Ok(acc)
}
