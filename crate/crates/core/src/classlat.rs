//! Curve classes on a rank-r lattice with the coordinate cone as effective cone.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{bail, Result};
use crate::Q;
use num_traits::{Signed, Zero};

/// Numerical data of a threefold model: first Chern class, Kähler class and
/// an ample class, each paired against curve classes in `Z^r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometryModel {
    rank: usize,
    c1: Vec<i64>,
    omega: Vec<Q>,
    ample: Vec<i64>,
    euler_override: Option<Vec<Vec<i64>>>,
}

impl GeometryModel {
    pub fn new(c1: Vec<i64>, omega: Vec<Q>, ample: Vec<i64>) -> Result<Self> {
        let rank = c1.len();
        if rank == 0 {
            bail!(Input, "geometry rank must be at least 1");
        }
        if omega.len() != rank || ample.len() != rank {
            bail!(Input, "c1, omega and ample must all have length {rank}");
        }
        if omega.iter().any(|w| !w.is_positive()) {
            bail!(Input, "omega components must be positive");
        }
        if ample.iter().any(|&l| l <= 0) {
            bail!(Input, "ample components must be positive");
        }
        Ok(Self {
            rank,
            c1,
            omega,
            ample,
            euler_override: None,
        })
    }

    /// Replaces the default Euler pairing by the symmetric integer form `m`
    /// on the coordinates `(d, beta, n)`.
    pub fn with_euler_override(mut self, m: Vec<Vec<i64>>) -> Result<Self> {
        let size = self.rank + 2;
        if m.len() != size || m.iter().any(|row| row.len() != size) {
            bail!(Input, "euler override must be a {size}x{size} matrix");
        }
        if (0..size).any(|i| (0..i).any(|j| m[i][j] != m[j][i])) {
            bail!(Input, "euler override must be symmetric");
        }
        self.euler_override = Some(m);
        Ok(self)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn c1(&self) -> &[i64] {
        &self.c1
    }

    pub fn omega(&self) -> &[Q] {
        &self.omega
    }

    pub fn ample(&self) -> &[i64] {
        &self.ample
    }

    pub fn check_dim(&self, beta: &[i64]) -> Result<()> {
        if beta.len() != self.rank {
            bail!(
                Input,
                "class has length {}, geometry rank is {}",
                beta.len(),
                self.rank
            );
        }
        Ok(())
    }

    pub fn c1_dot(&self, beta: &[i64]) -> i64 {
        self.c1.iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    pub fn omega_dot(&self, beta: &[i64]) -> Q {
        pair_omega(&self.omega, beta)
    }

    /// `d_beta = L . beta`, the period of the twist-by-L shift.
    pub fn degree(&self, beta: &[i64]) -> i64 {
        self.ample.iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    pub fn zero_class(&self) -> Vec<i64> {
        vec![0; self.rank]
    }
}

pub(crate) fn pair_omega(omega: &[Q], beta: &[i64]) -> Q {
    omega
        .iter()
        .zip(beta)
        .map(|(w, &b)| w * crate::rat::int(b))
        .sum()
}

/// A sheaf class `(beta, n)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveClass {
    pub beta: Vec<i64>,
    pub n: i64,
}

impl CurveClass {
    pub fn new(beta: Vec<i64>, n: i64) -> Self {
        Self { beta, n }
    }
}

/// A pair class `(d, beta, n)`; `d = 0` are sheaves, `d = 1` are pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KClass {
    pub d: i64,
    pub beta: Vec<i64>,
    pub n: i64,
}

impl KClass {
    pub fn new(d: i64, beta: Vec<i64>, n: i64) -> Self {
        Self { d, beta, n }
    }

    pub fn sheaf(beta: Vec<i64>, n: i64) -> Self {
        Self { d: 0, beta, n }
    }

    pub fn pair(beta: Vec<i64>, n: i64) -> Self {
        Self { d: 1, beta, n }
    }

    pub fn is_zero(&self) -> bool {
        self.d == 0 && self.n == 0 && self.beta.iter().all(|&b| b == 0)
    }

    pub fn curve(&self) -> CurveClass {
        CurveClass {
            beta: self.beta.clone(),
            n: self.n,
        }
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?},{})", self.beta, self.n)
    }
}

impl fmt::Display for KClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{:?},{})", self.d, self.beta, self.n)
    }
}

/// Classes with an additive structure, as used by the coefficient machinery.
pub trait Additive: Clone + Ord + fmt::Debug {
    fn plus(&self, other: &Self) -> Self;
}

fn add_vec(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl Additive for CurveClass {
    fn plus(&self, other: &Self) -> Self {
        CurveClass {
            beta: add_vec(&self.beta, &other.beta),
            n: self.n + other.n,
        }
    }
}

impl Additive for KClass {
    fn plus(&self, other: &Self) -> Self {
        KClass {
            d: self.d + other.d,
            beta: add_vec(&self.beta, &other.beta),
            n: self.n + other.n,
        }
    }
}

pub fn is_effective(geom: &GeometryModel, beta: &[i64]) -> Result<bool> {
    geom.check_dim(beta)?;
    Ok(beta.iter().all(|&b| b >= 0) && beta.iter().any(|&b| b != 0))
}

fn require_effective(geom: &GeometryModel, beta: &[i64]) -> Result<()> {
    if !is_effective(geom, beta)? {
        bail!(Input, "class {beta:?} is not effective");
    }
    Ok(())
}

/// All effective `gamma` with `beta - gamma` effective or zero, sorted.
pub fn factors(geom: &GeometryModel, beta: &[i64]) -> Result<Vec<Vec<i64>>> {
    require_effective(geom, beta)?;
    let mut out = Vec::new();
    let mut cur = vec![0i64; beta.len()];
    loop {
        if cur.iter().any(|&c| c != 0) {
            out.push(cur.clone());
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == beta.len() {
                out.sort();
                return Ok(out);
            }
            if cur[i] < beta[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
            i += 1;
        }
    }
}

pub fn is_positive(geom: &GeometryModel, beta: &[i64]) -> Result<bool> {
    require_effective(geom, beta)?;
    Ok(geom.c1_dot(beta) > 0)
}

pub fn is_superpositive(geom: &GeometryModel, beta: &[i64]) -> Result<bool> {
    Ok(factors(geom, beta)?.iter().all(|g| geom.c1_dot(g) > 0))
}

/// Maximal number of effective summands; the component sum in this model.
pub fn split_count(geom: &GeometryModel, beta: &[i64]) -> Result<u32> {
    require_effective(geom, beta)?;
    Ok(beta.iter().sum::<i64>() as u32)
}

/// Symmetrized Euler pairing `chi(a,b) + chi(b,a)`.
pub fn euler_sym(geom: &GeometryModel, a: &KClass, b: &KClass) -> Result<i64> {
    geom.check_dim(&a.beta)?;
    geom.check_dim(&b.beta)?;
    if let Some(m) = &geom.euler_override {
        let va = coords(a);
        let vb = coords(b);
        let mut acc = 0i64;
        for (i, x) in va.iter().enumerate() {
            for (j, y) in vb.iter().enumerate() {
                acc += x * m[i][j] * y;
            }
        }
        return Ok(acc);
    }
    Ok(-(a.d * geom.c1_dot(&b.beta) + b.d * geom.c1_dot(&a.beta)))
}

/// Unsymmetrized Euler form from Serre duality on a threefold, with
/// `chi(O,O)` taken as zero: `chi(a,b) = -d_a n_b + d_b (n_a - c1.beta_a)`.
pub fn euler_serre(geom: &GeometryModel, a: &KClass, b: &KClass) -> i64 {
    -a.d * b.n + b.d * (a.n - geom.c1_dot(&a.beta))
}

fn coords(k: &KClass) -> Vec<i64> {
    let mut v = Vec::with_capacity(k.beta.len() + 2);
    v.push(k.d);
    v.extend_from_slice(&k.beta);
    v.push(k.n);
    v
}

/// All ordered sequences of `parts` effective classes summing to `beta`.
/// Entries at positions in `allow_zero` may also be the zero class.
pub fn ordered_splittings(
    beta: &[i64],
    parts: usize,
    allow_zero: Option<usize>,
) -> Vec<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    let mut cur: Vec<Vec<i64>> = Vec::new();
    split_rec(beta, parts, allow_zero, &mut cur, &mut out);
    out
}

fn split_rec(
    rest: &[i64],
    parts: usize,
    allow_zero: Option<usize>,
    cur: &mut Vec<Vec<i64>>,
    out: &mut Vec<Vec<Vec<i64>>>,
) {
    let pos = cur.len();
    let zero_ok = allow_zero == Some(pos);
    if pos + 1 == parts {
        if rest.iter().any(|&b| b != 0) || zero_ok {
            cur.push(rest.to_vec());
            out.push(cur.clone());
            cur.pop();
        }
        return;
    }
    let mut part = vec![0i64; rest.len()];
    loop {
        if part.iter().any(|&p| p != 0) || zero_ok {
            let remaining: Vec<i64> = rest.iter().zip(&part).map(|(r, p)| r - p).collect();
            cur.push(part.clone());
            split_rec(&remaining, parts, allow_zero, cur, out);
            cur.pop();
        }
        let mut i = 0;
        loop {
            if i == rest.len() {
                return;
            }
            if part[i] < rest[i] {
                part[i] += 1;
                break;
            }
            part[i] = 0;
            i += 1;
        }
    }
}

pub(crate) fn is_zero_vec(v: &[i64]) -> bool {
    v.iter().all(|x| x.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    fn rank1() -> GeometryModel {
        GeometryModel::new(vec![1], vec![int(1)], vec![1]).unwrap()
    }

    fn rank2(c1: [i64; 2]) -> GeometryModel {
        GeometryModel::new(c1.to_vec(), vec![int(1), int(1)], vec![1, 1]).unwrap()
    }

    #[test]
    fn effectivity() {
        let g = rank2([1, 1]);
        assert!(!is_effective(&g, &[0, 0]).unwrap());
        assert!(is_effective(&g, &[1, 0]).unwrap());
        assert!(is_effective(&g, &[2, 3]).unwrap());
        assert!(is_effective(&g, &[1]).is_err());
    }

    #[test]
    fn factor_sets() {
        assert_eq!(
            factors(&rank1(), &[3]).unwrap(),
            vec![vec![1], vec![2], vec![3]]
        );
        assert_eq!(factors(&rank1(), &[1]).unwrap(), vec![vec![1]]);
        assert_eq!(
            factors(&rank2([1, 1]), &[1, 1]).unwrap(),
            vec![vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert!(factors(&rank1(), &[0]).is_err());
    }

    #[test]
    fn positivity() {
        let fano = rank2([1, 2]);
        assert!(is_superpositive(&fano, &[3, 2]).unwrap());
        let g = rank2([1, -1]);
        assert!(!is_superpositive(&g, &[2, 1]).unwrap());
        assert!(is_superpositive(&g, &[1, 0]).unwrap());
        assert!(is_positive(&g, &[2, 1]).unwrap());
    }

    #[test]
    fn split_counts() {
        assert_eq!(split_count(&rank1(), &[3]).unwrap(), 3);
        assert_eq!(split_count(&rank2([1, 1]), &[1, 1]).unwrap(), 2);
        assert_eq!(split_count(&rank1(), &[1]).unwrap(), 1);
    }

    #[test]
    fn euler_pairing_values() {
        let g = rank2([2, 3]);
        let s = KClass::sheaf(vec![1, 1], 4);
        let s2 = KClass::sheaf(vec![0, 2], -1);
        let p = KClass::pair(vec![1, 0], 7);
        let p2 = KClass::pair(vec![0, 1], 2);
        assert_eq!(euler_sym(&g, &s, &s2).unwrap(), 0);
        assert_eq!(euler_sym(&g, &p, &s).unwrap(), -5);
        assert_eq!(euler_sym(&g, &p, &p2).unwrap(), -2 - 3);
    }

    #[test]
    fn serre_form_symmetrizes_to_default() {
        let g = rank2([2, 3]);
        let a = KClass::pair(vec![1, 2], 5);
        let b = KClass::sheaf(vec![0, 1], -3);
        let sym = euler_serre(&g, &a, &b) + euler_serre(&g, &b, &a);
        assert_eq!(sym, euler_sym(&g, &a, &b).unwrap());
    }

    #[test]
    fn override_is_used() {
        let m = vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 0]];
        let g = rank1().with_euler_override(m).unwrap();
        let a = KClass::pair(vec![2], 0);
        let b = KClass::sheaf(vec![3], 0);
        assert_eq!(euler_sym(&g, &a, &b).unwrap(), 3);
        assert!(rank1()
            .with_euler_override(vec![vec![0, 1, 0], vec![0, 0, 0], vec![0, 0, 0]])
            .is_err());
    }

    #[test]
    fn splittings_cover_compositions() {
        assert_eq!(
            ordered_splittings(&[2], 2, None),
            vec![vec![vec![1], vec![1]]]
        );
        let with_zero = ordered_splittings(&[1], 2, Some(1));
        assert_eq!(with_zero, vec![vec![vec![1], vec![0]]]);
        assert_eq!(ordered_splittings(&[1, 1], 2, None).len(), 2);
    }
}
