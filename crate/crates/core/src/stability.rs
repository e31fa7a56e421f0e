//! Slope functions, pair stability and the seesaw check.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::classlat::{pair_omega, Additive, CurveClass, GeometryModel, KClass};
use crate::error::{bail, Result};
use crate::Q;

/// A rational number or `+infinity`, totally ordered with infinity on top.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedRational {
    Finite(Q),
    Infinity,
}

impl ExtendedRational {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            ExtendedRational::Finite(q) => Some(q),
            ExtendedRational::Infinity => None,
        }
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::Finite(q) => f.write_str(&crate::rat::show(q)),
            ExtendedRational::Infinity => f.write_str("inf"),
        }
    }
}

/// A map from classes to slopes.
pub trait SlopeMap<C> {
    fn slope(&self, class: &C) -> Result<ExtendedRational>;
}

impl<C, F> SlopeMap<C> for F
where
    F: Fn(&C) -> Result<ExtendedRational>,
{
    fn slope(&self, class: &C) -> Result<ExtendedRational> {
        self(class)
    }
}

fn slope_with(omega: &[Q], beta: &[i64], n: i64) -> Result<ExtendedRational> {
    if beta.iter().all(|&b| b == 0) {
        if n > 0 {
            return Ok(ExtendedRational::Infinity);
        }
        bail!(Input, "class (0,{n}) lies outside the positive cone");
    }
    if beta.iter().any(|&b| b < 0) {
        bail!(Input, "class {beta:?} is not effective");
    }
    Ok(ExtendedRational::Finite(
        crate::rat::int(n) / pair_omega(omega, beta),
    ))
}

/// `n / (omega . beta)`, or infinity for zero-dimensional classes.
pub fn slope_mu(cc: &CurveClass, geom: &GeometryModel) -> Result<ExtendedRational> {
    geom.check_dim(&cc.beta)?;
    slope_with(geom.omega(), &cc.beta, cc.n)
}

/// Pair stability with constant `c` on classes of positive pair rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairStability {
    pub c: Q,
}

pub fn pair_slope(
    kc: &KClass,
    ps: &PairStability,
    geom: &GeometryModel,
) -> Result<ExtendedRational> {
    geom.check_dim(&kc.beta)?;
    match kc.d {
        d if d > 0 => Ok(ExtendedRational::Finite(ps.c.clone())),
        0 => slope_with(geom.omega(), &kc.beta, kc.n),
        d => bail!(Input, "pair rank {d} is negative"),
    }
}

/// Slope stability for an arbitrary Kähler vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuSlope {
    pub omega: Vec<Q>,
}

impl MuSlope {
    pub fn of(geom: &GeometryModel) -> Self {
        Self {
            omega: geom.omega().to_vec(),
        }
    }
}

impl SlopeMap<CurveClass> for MuSlope {
    fn slope(&self, c: &CurveClass) -> Result<ExtendedRational> {
        slope_with(&self.omega, &c.beta, c.n)
    }
}

impl SlopeMap<KClass> for MuSlope {
    fn slope(&self, c: &KClass) -> Result<ExtendedRational> {
        if c.d != 0 {
            bail!(
                Input,
                "slope stability is only defined on sheaf classes, got {c}"
            );
        }
        slope_with(&self.omega, &c.beta, c.n)
    }
}

/// Pair stability for an arbitrary Kähler vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSlope {
    pub omega: Vec<Q>,
    pub c: Q,
}

impl SlopeMap<KClass> for PairSlope {
    fn slope(&self, k: &KClass) -> Result<ExtendedRational> {
        match k.d {
            d if d > 0 => Ok(ExtendedRational::Finite(self.c.clone())),
            0 => slope_with(&self.omega, &k.beta, k.n),
            d => bail!(Input, "pair rank {d} is negative"),
        }
    }
}

/// Outcome of [`check_weak_stability`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seesaw<C> {
    Holds,
    /// `beta = alpha + gamma` with `tau(beta)` strictly outside the range.
    Violated {
        alpha: C,
        beta: C,
        gamma: C,
    },
}

/// Checks the seesaw alternative on every pair of the sample whose sum is
/// also in the sample. Classes where `tau` is undefined are skipped.
pub fn check_weak_stability<C: Additive, T: SlopeMap<C>>(tau: &T, sample: &[C]) -> Seesaw<C> {
    let set: BTreeSet<&C> = sample.iter().collect();
    for a in sample {
        let Ok(ta) = tau.slope(a) else { continue };
        for g in sample {
            let b = a.plus(g);
            if !set.contains(&b) {
                continue;
            }
            let (Ok(tg), Ok(tb)) = (tau.slope(g), tau.slope(&b)) else {
                continue;
            };
            let up = ta <= tb && tb <= tg;
            let down = ta >= tb && tb >= tg;
            if !up && !down {
                return Seesaw::Violated {
                    alpha: a.clone(),
                    beta: b,
                    gamma: g.clone(),
                };
            }
        }
    }
    Seesaw::Holds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};
    use alloc::vec;

    fn geom() -> GeometryModel {
        GeometryModel::new(vec![1, 1], vec![int(1), int(1)], vec![1, 1]).unwrap()
    }

    #[test]
    fn slopes() {
        let g = geom();
        let s = slope_mu(&CurveClass::new(vec![1, 1], 3), &g).unwrap();
        assert_eq!(s, ExtendedRational::Finite(frac(3, 2)));
        assert_eq!(
            slope_mu(&CurveClass::new(vec![0, 0], 5), &g).unwrap(),
            ExtendedRational::Infinity
        );
        assert!(slope_mu(&CurveClass::new(vec![0, 0], 0), &g).is_err());
        assert!(ExtendedRational::Finite(int(1_000_000)) < ExtendedRational::Infinity);
    }

    #[test]
    fn twisting_by_ample_shifts_slope_by_one() {
        let g = GeometryModel::new(vec![1, 2], vec![int(2), int(3)], vec![2, 3]).unwrap();
        let beta = vec![2, 1];
        let d = g.degree(&beta);
        for n in -5..5 {
            let a = slope_mu(&CurveClass::new(beta.clone(), n), &g).unwrap();
            let b = slope_mu(&CurveClass::new(beta.clone(), n + d), &g).unwrap();
            assert_eq!(b.finite().unwrap() - a.finite().unwrap(), int(1));
        }
    }

    #[test]
    fn pair_slopes() {
        let g = GeometryModel::new(vec![1], vec![int(1)], vec![1]).unwrap();
        let ps = PairStability { c: frac(7, 3) };
        assert_eq!(
            pair_slope(&KClass::sheaf(vec![1], 4), &ps, &g).unwrap(),
            ExtendedRational::Finite(int(4))
        );
        assert_eq!(
            pair_slope(&KClass::pair(vec![3], -9), &ps, &g).unwrap(),
            ExtendedRational::Finite(frac(7, 3))
        );
        let zero = PairStability { c: int(0) };
        assert_eq!(
            pair_slope(&KClass::new(2, vec![0], 0), &zero, &g).unwrap(),
            ExtendedRational::Finite(int(0))
        );
    }

    #[test]
    fn seesaw_on_exhaustive_sample() {
        let g = geom();
        let mut sample = Vec::new();
        for b0 in 0..=3 {
            for b1 in 0..=3 {
                for n in -6..=6 {
                    if b0 + b1 == 0 && n <= 0 {
                        continue;
                    }
                    sample.push(CurveClass::new(vec![b0, b1], n));
                }
            }
        }
        assert_eq!(
            check_weak_stability(&MuSlope::of(&g), &sample),
            Seesaw::Holds
        );
        let constant = |_: &CurveClass| Ok(ExtendedRational::Finite(int(0)));
        assert_eq!(check_weak_stability(&constant, &sample), Seesaw::Holds);
    }

    #[test]
    fn seesaw_counterexample_is_reported() {
        let sample = vec![CurveClass::new(vec![1], 0), CurveClass::new(vec![2], 0)];
        let tau = |c: &CurveClass| Ok(ExtendedRational::Finite(int(c.beta[0])));
        match check_weak_stability(&tau, &sample) {
            Seesaw::Violated { alpha, beta, gamma } => {
                assert_eq!(alpha.beta, vec![1]);
                assert_eq!(beta.beta, vec![2]);
                assert_eq!(gamma.beta, vec![1]);
            }
            Seesaw::Holds => panic!("expected violation"),
        }
    }
}
