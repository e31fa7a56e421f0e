mod common;

use proptest::prelude::*;

use ptwall_core::quasipoly::Value;
use ptwall_core::ratgen::PoleLocation;
use ptwall_core::vertexmodel::CoeffRing;
use ptwall_core::wallcross::{
    eq_residual, pt_series, pt_value, recursion_sum, LocalMemo, NoMemo, PtOptions,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn memo_is_transparent(beta in 1i64..=2, n in -10i64..=12) {
        let sc = common::fano();
        let cached = LocalMemo::new();
        let a = pt_value(&sc, &cached, &[beta], n);
        let b = pt_value(&sc, &NoMemo, &[beta], n);
        prop_assert_eq!(a.map_err(|e| e.to_string()), b.map_err(|e| e.to_string()));
        let again = pt_value(&sc, &cached, &[beta], n).map_err(|e| e.to_string());
        prop_assert_eq!(again, pt_value(&sc, &NoMemo, &[beta], n).map_err(|e| e.to_string()));
    }

    #[test]
    fn identity_holds_and_terms_are_finite(beta in 1i64..=2, offset in 0i64..=12) {
        let sc = common::fano();
        let memo = LocalMemo::new();
        let n = sc.recursion_start(&[beta]).unwrap() + offset;
        let rs = recursion_sum(&sc, &memo, &[beta], n, 3).unwrap();
        prop_assert!(rs.enumerated > 0 && !rs.log.is_empty());
        let v = pt_value(&sc, &memo, &[beta], n).unwrap();
        prop_assert!(eq_residual(&sc, &memo, &[beta], n, &v).unwrap().is_zero());
    }
}

#[test]
fn series_poles_are_roots_of_unity() {
    for (beta, sc) in [
        (1, common::fano()),
        (2, common::fano_low_degree(CoeffRing::rational())),
        (1, common::fano_low_degree(CoeffRing::truncated(1))),
    ] {
        let s = pt_series(&sc, &LocalMemo::new(), &[beta], &PtOptions::default()).unwrap();
        let bound = s.certificate.period_bound;
        for loc in s.gf.pole_locations().keys() {
            match loc {
                PoleLocation::Zero => {}
                PoleLocation::RootOfUnity { m, .. } => assert_eq!(bound % m, 0),
            }
        }
        for (n, v) in &s.values {
            assert_eq!(&s.gf.coefficient(*n), v);
        }
        assert!(s.gf.coefficient(s.certificate.vanish_below).is_nil());
    }
}
