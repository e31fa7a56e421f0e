use std::collections::BTreeMap;

use proptest::prelude::*;

use ptwall_core::quasipoly::{Poly, QuasiPoly};
use ptwall_core::rat::frac;
use ptwall_core::ratgen::{gf_expand, qp_tail_to_gf, PoleLocation, RationalGF};
use ptwall_core::Q;

fn rational() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=4).prop_map(|(p, q)| frac(p, q))
}

#[derive(Debug, Clone)]
struct Seq {
    vanish: i64,
    start: i64,
    exceptional: BTreeMap<i64, Q>,
    tail: QuasiPoly<Q>,
}

fn sequence() -> impl Strategy<Value = Seq> {
    (
        -8i64..=4,
        1i64..=6,
        (1usize..=4)
            .prop_flat_map(|d| prop::collection::vec(prop::collection::vec(rational(), 0..=5), d)),
        prop::collection::vec(rational(), 6),
    )
        .prop_map(|(vanish, gap, polys, ex)| {
            let start = vanish + gap;
            let exceptional = (vanish + 1..start).zip(ex).collect();
            let tail = QuasiPoly::new(polys.into_iter().map(Poly::new).collect()).unwrap();
            Seq {
                vanish,
                start,
                exceptional,
                tail,
            }
        })
}

fn gf(s: &Seq) -> RationalGF<Q> {
    qp_tail_to_gf(s.vanish, &s.exceptional, &s.tail, s.start).unwrap()
}

fn value(s: &Seq, n: i64) -> Q {
    if n <= s.vanish {
        frac(0, 1)
    } else if n < s.start {
        s.exceptional.get(&n).cloned().unwrap_or_else(|| frac(0, 1))
    } else {
        s.tail.eval(n)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expansion_round_trip(s in sequence()) {
        for (n, v) in gf_expand(&gf(&s), 200) {
            prop_assert_eq!(v, value(&s, n));
        }
    }

    #[test]
    fn denominator_is_bounded_by_the_tail(s in sequence()) {
        let f = gf(&s);
        let d = s.tail.period();
        prop_assert!(f.denominator_divides(d, s.tail.degree() as u32 + 1));
        for loc in f.pole_locations().keys() {
            if let PoleLocation::RootOfUnity { m, k } = loc {
                prop_assert!(d % m == 0 && k < m);
            }
        }
    }

    #[test]
    fn addition_commutes_with_expansion(s in sequence(), t in sequence()) {
        let (f, g) = (gf(&s), gf(&t));
        let h = f.add(&g);
        for n in -12..60 {
            prop_assert_eq!(h.coefficient(n), value(&s, n) + value(&t, n));
        }
    }
}
