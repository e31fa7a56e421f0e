//! Rational generating functions of eventually quasi-polynomial sequences.
//!
//! A [`RationalGF`] is a finite Laurent polynomial plus terms
//! `q^j Q(q^d) / (1 - q^d)^e`, expanded in nonnegative powers of `q` beyond
//! the lowest exponent.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{bail, Result};
use crate::quasipoly::{QuasiPoly, Value};
use crate::rat::{binomial, gcd, lcm, show};
use crate::Q;

/// `q^offset * numer(q^period) / (1 - q^period)^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailTerm<V: Value> {
    pub offset: i64,
    pub numer: Vec<V>,
    pub period: u64,
    pub exponent: u32,
}

impl<V: Value> TailTerm<V> {
    /// Coefficient of `q^n`.
    pub fn coefficient(&self, n: i64) -> V {
        let d = self.period as i64;
        let shift = n - self.offset;
        if shift < 0 || shift % d != 0 {
            return V::nil();
        }
        let t = shift / d;
        let e = self.exponent as i64;
        let mut acc = V::nil();
        for (i, c) in self.numer.iter().enumerate() {
            let s = t - i as i64;
            if s < 0 {
                break;
            }
            let mult = if e == 0 {
                if s == 0 {
                    Q::one()
                } else {
                    Q::zero()
                }
            } else {
                Q::from_integer(binomial(s + e - 1, e - 1))
            };
            acc = acc.add(&c.scale(&mult));
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalGF<V: Value> {
    prefix: BTreeMap<i64, V>,
    tail: Vec<TailTerm<V>>,
}

/// Single-fraction form `numer(q) / (1 - q^period)^exponent` with a Laurent numerator.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized<V: Value> {
    pub numer: BTreeMap<i64, V>,
    pub period: u64,
    pub exponent: u32,
}

/// Where a pole sits: the origin or the root of unity `exp(2 pi i k / m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PoleLocation {
    Zero,
    RootOfUnity { m: u64, k: u64 },
}

impl core::fmt::Display for PoleLocation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PoleLocation::Zero => write!(f, "q=0"),
            PoleLocation::RootOfUnity { m, k } => write!(f, "q=exp(2*pi*i*{k}/{m})"),
        }
    }
}

impl<V: Value> Default for RationalGF<V> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<V: Value> RationalGF<V> {
    pub fn zero() -> Self {
        Self {
            prefix: BTreeMap::new(),
            tail: Vec::new(),
        }
    }

    pub fn from_parts(prefix: BTreeMap<i64, V>, tail: Vec<TailTerm<V>>) -> Result<Self> {
        for t in &tail {
            if t.period == 0 {
                bail!(Input, "tail term period must be positive");
            }
        }
        let prefix = prefix.into_iter().filter(|(_, v)| !v.is_nil()).collect();
        let tail = tail
            .into_iter()
            .filter(|t| t.numer.iter().any(|c| !c.is_nil()))
            .collect();
        Ok(Self { prefix, tail })
    }

    /// Laurent polynomial with the given coefficients.
    pub fn polynomial(coeffs: BTreeMap<i64, V>) -> Self {
        Self {
            prefix: coeffs.into_iter().filter(|(_, v)| !v.is_nil()).collect(),
            tail: Vec::new(),
        }
    }

    pub fn prefix(&self) -> &BTreeMap<i64, V> {
        &self.prefix
    }

    pub fn tail(&self) -> &[TailTerm<V>] {
        &self.tail
    }

    pub fn is_zero(&self) -> bool {
        self.prefix.is_empty() && self.tail.is_empty()
    }

    /// Lowest exponent that can carry a nonzero coefficient.
    pub fn lowest(&self) -> Option<i64> {
        let a = self.prefix.keys().next().copied();
        let b = self.tail.iter().map(|t| t.offset).min();
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }

    pub fn coefficient(&self, n: i64) -> V {
        let mut acc = self.prefix.get(&n).cloned().unwrap_or_else(V::nil);
        for t in &self.tail {
            acc = acc.add(&t.coefficient(n));
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut prefix = self.prefix.clone();
        for (n, v) in &other.prefix {
            let merged = prefix.remove(n).map_or_else(|| v.clone(), |old| old.add(v));
            if !merged.is_nil() {
                prefix.insert(*n, merged);
            }
        }
        let mut tail = self.tail.clone();
        tail.extend(other.tail.iter().cloned());
        Self { prefix, tail }
    }

    pub fn scale(&self, q: &Q) -> Self {
        self.map(|v| v.scale(q))
    }

    /// Applies a linear map coefficientwise.
    pub fn map<W: Value>(&self, f: impl Fn(&V) -> W) -> RationalGF<W> {
        let prefix = self
            .prefix
            .iter()
            .map(|(n, v)| (*n, f(v)))
            .filter(|(_, v)| !v.is_nil())
            .collect();
        let tail = self
            .tail
            .iter()
            .map(|t| TailTerm {
                offset: t.offset,
                numer: t.numer.iter().map(&f).collect(),
                period: t.period,
                exponent: t.exponent,
            })
            .filter(|t| t.numer.iter().any(|c| !c.is_nil()))
            .collect();
        RationalGF { prefix, tail }
    }

    /// Combines everything over `(1 - q^L)^E` with `L` the lcm of periods and `E` the largest exponent.
    pub fn normalize(&self) -> Normalized<V> {
        let period = self.tail.iter().fold(1u64, |l, t| lcm(l, t.period));
        let exponent = self.tail.iter().map(|t| t.exponent).max().unwrap_or(0);
        let l = period as i64;
        let base: Vec<Q> = one_minus_power(l, exponent);
        let mut numer: BTreeMap<i64, V> = BTreeMap::new();
        let mut push = |n: i64, v: V| {
            if v.is_nil() {
                return;
            }
            let merged = numer
                .remove(&n)
                .map_or_else(|| v.clone(), |old: V| old.add(&v));
            if !merged.is_nil() {
                numer.insert(n, merged);
            }
        };
        for (n, v) in &self.prefix {
            for (i, c) in base.iter().enumerate() {
                if !c.is_zero() {
                    push(n + i as i64, v.scale(c));
                }
            }
        }
        for t in &self.tail {
            let d = t.period as i64;
            let ratio: Vec<Q> = (0..l)
                .map(|i| if i % d == 0 { Q::one() } else { Q::zero() })
                .collect();
            let mut factor = vec![Q::one()];
            for _ in 0..t.exponent {
                factor = poly_mul(&factor, &ratio);
            }
            factor = poly_mul(&factor, &one_minus_power(l, exponent - t.exponent));
            for (i, c) in t.numer.iter().enumerate() {
                if c.is_nil() {
                    continue;
                }
                for (k, f) in factor.iter().enumerate() {
                    if !f.is_zero() {
                        push(t.offset + i as i64 * d + k as i64, c.scale(f));
                    }
                }
            }
        }
        Normalized {
            numer,
            period,
            exponent,
        }
    }

    /// Pole locations with orders after cancelling common cyclotomic factors.
    pub fn pole_locations(&self) -> BTreeMap<PoleLocation, u32> {
        let norm = self.normalize();
        let mut out = BTreeMap::new();
        if norm.numer.is_empty() {
            return out;
        }
        let low = *norm.numer.keys().next().expect("nonempty numerator");
        if low < 0 {
            out.insert(PoleLocation::Zero, (-low) as u32);
        }
        if norm.exponent == 0 {
            return out;
        }
        let comps = norm.components();
        for m in crate::rat::divisors(norm.period) {
            let phi = cyclotomic(m);
            let mult = comps
                .values()
                .map(|p| multiplicity(p, &phi, norm.exponent))
                .min()
                .unwrap_or(norm.exponent);
            let order = norm.exponent - mult;
            if order == 0 {
                continue;
            }
            for k in 0..m {
                if gcd(k, m) == 1 {
                    out.insert(PoleLocation::RootOfUnity { m, k }, order);
                }
            }
        }
        out
    }

    /// True when the reduced denominator divides `q^a (1 - q^d)^e` for some `a`.
    pub fn denominator_divides(&self, d: u64, e: u32) -> bool {
        self.pole_locations().iter().all(|(loc, &order)| match loc {
            PoleLocation::Zero => true,
            PoleLocation::RootOfUnity { m, .. } => d.is_multiple_of(*m) && order <= e,
        })
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        if self.is_zero() {
            return "0\n".into();
        }
        for (n, v) in &self.prefix {
            s.push_str(&alloc::format!("q^{n}: {}\n", v.text()));
        }
        let mut terms: Vec<String> = self
            .tail
            .iter()
            .map(|t| {
                let numer: Vec<String> = t
                    .numer
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_nil())
                    .map(|(i, c)| alloc::format!("({})*x^{i}", c.text()))
                    .collect();
                alloc::format!(
                    "q^{} * [{}] / (1-q^{})^{}, x=q^{}\n",
                    t.offset,
                    numer.join(" + "),
                    t.period,
                    t.exponent,
                    t.period
                )
            })
            .collect();
        terms.sort();
        for t in terms {
            s.push_str(&t);
        }
        s
    }
}

impl<V: Value> Normalized<V> {
    /// One scalar polynomial per coordinate, shifted to start at degree 0.
    fn components(&self) -> BTreeMap<String, Vec<Q>> {
        let low = self.numer.keys().next().copied().unwrap_or(0);
        let high = self.numer.keys().next_back().copied().unwrap_or(0);
        let mut out: BTreeMap<String, Vec<Q>> = BTreeMap::new();
        for (n, v) in &self.numer {
            for (k, q) in v.coords() {
                let entry = out
                    .entry(k)
                    .or_insert_with(|| vec![Q::zero(); (high - low + 1) as usize]);
                entry[(n - low) as usize] = q;
            }
        }
        out
    }

    pub fn text(&self) -> String {
        let parts: Vec<String> = self
            .numer
            .iter()
            .map(|(n, v)| alloc::format!("({})*q^{n}", v.text()))
            .collect();
        let numer = if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        };
        alloc::format!("[{numer}] / (1-q^{})^{}", self.period, self.exponent)
    }
}

fn poly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn one_minus_power(l: i64, e: u32) -> Vec<Q> {
    let mut base = vec![Q::zero(); l as usize + 1];
    base[0] = Q::one();
    base[l as usize] = -Q::one();
    let mut acc = vec![Q::one()];
    for _ in 0..e {
        acc = poly_mul(&acc, &base);
    }
    acc
}

fn trim(mut p: Vec<Q>) -> Vec<Q> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Quotient and remainder of polynomial division over Q.
fn divmod(num: &[Q], den: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let den = trim(den.to_vec());
    let mut rem = trim(num.to_vec());
    if rem.len() < den.len() {
        return (Vec::new(), rem);
    }
    let lead = den.last().expect("nonzero divisor").clone();
    let mut quot = vec![Q::zero(); rem.len() - den.len() + 1];
    while rem.len() >= den.len() && !rem.is_empty() {
        let shift = rem.len() - den.len();
        let c = rem.last().expect("nonempty").clone() / &lead;
        for (i, d) in den.iter().enumerate() {
            rem[shift + i] -= &c * d;
        }
        quot[shift] = c;
        rem = trim(rem);
    }
    (trim(quot), rem)
}

/// The `m`-th cyclotomic polynomial.
pub fn cyclotomic(m: u64) -> Vec<Q> {
    let mut p = vec![Q::zero(); m as usize + 1];
    p[0] = -Q::one();
    p[m as usize] = Q::one();
    for d in crate::rat::divisors(m) {
        if d < m {
            p = divmod(&p, &cyclotomic(d)).0;
        }
    }
    p
}

fn multiplicity(p: &[Q], factor: &[Q], cap: u32) -> u32 {
    let mut cur = trim(p.to_vec());
    if cur.is_empty() {
        return cap;
    }
    let mut k = 0;
    while k < cap {
        let (q, r) = divmod(&cur, factor);
        if !r.is_empty() {
            break;
        }
        cur = q;
        k += 1;
    }
    k
}

/// Generating function of a sequence that vanishes for `n <= vanish_below`,
/// takes the `exceptional` values before `tail_start` and agrees with `tail`
/// from `tail_start` on.
pub fn qp_tail_to_gf<V: Value>(
    vanish_below: i64,
    exceptional: &BTreeMap<i64, V>,
    tail: &QuasiPoly<V>,
    tail_start: i64,
) -> Result<RationalGF<V>> {
    if tail_start <= vanish_below {
        bail!(Input, "tail must start above the vanishing bound");
    }
    let mut prefix = BTreeMap::new();
    for (&n, v) in exceptional {
        if n <= vanish_below || n >= tail_start {
            bail!(
                Input,
                "exceptional value at n = {n} lies outside ({vanish_below}, {tail_start})"
            );
        }
        if !v.is_nil() {
            prefix.insert(n, v.clone());
        }
    }
    let d = tail.period();
    let mut terms = Vec::new();
    for j in tail_start..tail_start + d as i64 {
        let p = tail.branch(j);
        if p.is_zero() {
            continue;
        }
        let g = p.degree() as i64;
        let values: Vec<V> = (0..=g).map(|t| p.eval(j + t * d as i64)).collect();
        let numer: Vec<V> = (0..=g)
            .map(|i| {
                let mut acc = V::nil();
                for l in 0..=i {
                    let c = Q::from_integer(binomial(g + 1, l)) * crate::rat::sign_power(l as u64);
                    acc = acc.add(&values[(i - l) as usize].scale(&c));
                }
                acc
            })
            .collect();
        terms.push(TailTerm {
            offset: j,
            numer,
            period: d,
            exponent: (g + 1) as u32,
        });
    }
    RationalGF::from_parts(prefix, terms)
}

/// Coefficients from the lowest exponent up to `n_max`.
pub fn gf_expand<V: Value>(f: &RationalGF<V>, n_max: i64) -> Vec<(i64, V)> {
    let start = f.lowest().unwrap_or(0).min(0).min(n_max);
    (start..=n_max).map(|n| (n, f.coefficient(n))).collect()
}

/// Set of all locations returned for a family of series, for quick checks.
pub fn pole_support<V: Value>(fs: &[RationalGF<V>]) -> BTreeSet<PoleLocation> {
    fs.iter()
        .flat_map(|f| f.pole_locations().into_keys())
        .collect()
}

/// Text of a scalar series, e.g. for reports.
pub fn scalar_text(f: &RationalGF<Q>) -> String {
    let norm = f.normalize();
    let parts: Vec<String> = norm
        .numer
        .iter()
        .map(|(n, v)| alloc::format!("{}*q^{n}", show(v)))
        .collect();
    alloc::format!(
        "({}) / (1-q^{})^{}",
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        },
        norm.period,
        norm.exponent
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasipoly::Poly;
    use crate::rat::int;

    fn seq(f: &RationalGF<Q>, n_max: i64) -> Vec<Q> {
        gf_expand(f, n_max).into_iter().map(|(_, v)| v).collect()
    }

    #[test]
    fn geometric_series() {
        let tail = QuasiPoly::polynomial(Poly::constant(int(1)));
        let f = qp_tail_to_gf(-1, &BTreeMap::new(), &tail, 0).unwrap();
        assert_eq!(seq(&f, 10), vec![int(1); 11]);
        let norm = f.normalize();
        assert_eq!((norm.period, norm.exponent), (1, 1));
        assert_eq!(norm.numer, [(0, int(1))].into_iter().collect());
    }

    #[test]
    fn linear_tail() {
        let tail = QuasiPoly::polynomial(Poly::new(vec![int(0), int(1)]));
        let f = qp_tail_to_gf(-1, &BTreeMap::new(), &tail, 0).unwrap();
        let expect: Vec<Q> = (0..=12).map(int).collect();
        assert_eq!(seq(&f, 12), expect);
        let poles = f.pole_locations();
        assert_eq!(
            poles.get(&PoleLocation::RootOfUnity { m: 1, k: 0 }),
            Some(&2)
        );
        assert_eq!(poles.len(), 1);
    }

    #[test]
    fn even_indicator() {
        let tail = QuasiPoly::new(vec![Poly::constant(int(1)), Poly::zero()]).unwrap();
        let f = qp_tail_to_gf(-1, &BTreeMap::new(), &tail, 0).unwrap();
        let poles = f.pole_locations();
        assert_eq!(
            poles.get(&PoleLocation::RootOfUnity { m: 1, k: 0 }),
            Some(&1)
        );
        assert_eq!(
            poles.get(&PoleLocation::RootOfUnity { m: 2, k: 1 }),
            Some(&1)
        );
        assert_eq!(poles.len(), 2);
    }

    #[test]
    fn pole_at_origin() {
        let tail = QuasiPoly::polynomial(Poly::constant(int(1)));
        let f = qp_tail_to_gf(-3, &BTreeMap::new(), &tail, -2).unwrap();
        let poles = f.pole_locations();
        assert_eq!(poles.get(&PoleLocation::Zero), Some(&2));
        assert_eq!(
            poles.get(&PoleLocation::RootOfUnity { m: 1, k: 0 }),
            Some(&1)
        );
    }

    #[test]
    fn laurent_polynomial_has_no_poles() {
        let f = RationalGF::polynomial([(0, int(3)), (4, int(-1))].into_iter().collect());
        assert!(f.pole_locations().is_empty());
    }

    #[test]
    fn cancellation_lowers_order() {
        let f = RationalGF::from_parts(
            BTreeMap::new(),
            vec![TailTerm {
                offset: 0,
                numer: vec![int(1), int(-1)],
                period: 1,
                exponent: 2,
            }],
        )
        .unwrap();
        assert_eq!(
            f.pole_locations()
                .get(&PoleLocation::RootOfUnity { m: 1, k: 0 }),
            Some(&1)
        );
        assert_eq!(seq(&f, 5), vec![int(1); 6]);
    }

    #[test]
    fn cyclotomic_small() {
        assert_eq!(cyclotomic(1), vec![int(-1), int(1)]);
        assert_eq!(cyclotomic(2), vec![int(1), int(1)]);
        assert_eq!(cyclotomic(4), vec![int(1), int(0), int(1)]);
        assert_eq!(cyclotomic(6), vec![int(1), int(-1), int(1)]);
    }

    #[test]
    fn exceptional_values_and_sum() {
        let tail = QuasiPoly::new(vec![
            Poly::new(vec![int(1), int(1)]),
            Poly::constant(int(-2)),
        ])
        .unwrap();
        let exc: BTreeMap<i64, Q> = [(-1, int(7)), (0, int(5))].into_iter().collect();
        let f = qp_tail_to_gf(-2, &exc, &tail, 1).unwrap();
        for (n, v) in gf_expand(&f, 30) {
            let expect = match n {
                n if n <= -2 => int(0),
                -1 => int(7),
                0 => int(5),
                n => tail.eval(n),
            };
            assert_eq!(v, expect, "n = {n}");
        }
        let g = f.add(&f);
        assert_eq!(
            seq(&g, 30),
            seq(&f, 30).iter().map(|v| v * int(2)).collect::<Vec<_>>()
        );
        assert!(f.denominator_divides(2, 2));
        assert!(!f.denominator_divides(1, 5));
    }
}
