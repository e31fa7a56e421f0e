use proptest::prelude::*;

use ptwall_core::classlat::{CurveClass, GeometryModel, KClass};
use ptwall_core::rat::frac;
use ptwall_core::stability::{check_weak_stability, pair_slope, slope_mu, PairStability, Seesaw};

fn geometry() -> impl Strategy<Value = GeometryModel> {
    (1usize..=2).prop_flat_map(|r| {
        prop::collection::vec((1i64..=5, 1i64..=3), r).prop_map(move |omega| {
            let omega = omega.into_iter().map(|(p, q)| frac(p, q)).collect();
            GeometryModel::new(vec![1; r], omega, vec![1; r]).unwrap()
        })
    })
}

fn boxed(rank: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..rank {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=2).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn slope_has_the_seesaw_property(g in geometry()) {
        let sample: Vec<CurveClass> = boxed(g.rank())
            .into_iter()
            .flat_map(|b| (-3..=3).map(move |n| CurveClass::new(b.clone(), n)))
            .collect();
        let tau = |c: &CurveClass| slope_mu(c, &g);
        prop_assert_eq!(check_weak_stability(&tau, &sample), Seesaw::Holds);
    }

    #[test]
    fn pair_slope_has_the_seesaw_property(g in geometry(), c in (-6i64..=6, 1i64..=4)) {
        let ps = PairStability { c: frac(c.0, c.1) };
        let sample: Vec<KClass> = boxed(g.rank())
            .into_iter()
            .flat_map(|b| {
                (0..=1).flat_map(move |d| {
                    let b = b.clone();
                    (-3..=3).map(move |n| KClass::new(d, b.clone(), n))
                })
            })
            .collect();
        let tau = |k: &KClass| pair_slope(k, &ps, &g);
        prop_assert_eq!(check_weak_stability(&tau, &sample), Seesaw::Holds);
    }
}
