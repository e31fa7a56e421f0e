use std::collections::BTreeMap;

use proptest::prelude::*;

use ptwall_core::quasipoly::{
    certify_pqp, qp_add, shift_to_qp, solve_difference, Chamber, Constraint, MPoly, Matrix, Poly,
    QuasiPoly, Rel,
};
use ptwall_core::rat::{binomial, frac, int, sign_power};
use ptwall_core::Q;

fn rational() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=4).prop_map(|(p, q)| frac(p, q))
}

fn qp() -> impl Strategy<Value = QuasiPoly<Q>> {
    (1usize..=4)
        .prop_flat_map(|d| prop::collection::vec(prop::collection::vec(rational(), 0..=4), d))
        .prop_map(|polys| QuasiPoly::new(polys.into_iter().map(Poly::new).collect()).unwrap())
}

fn annihilated(f: &BTreeMap<i64, Q>, m: usize, d: i64) -> bool {
    f.keys().all(|&n| {
        let window: Option<Vec<&Q>> = (0..=m as i64).map(|i| f.get(&(n + i * d))).collect();
        match window {
            None => true,
            Some(vals) => {
                let mut acc = int(0);
                for (i, v) in vals.into_iter().enumerate() {
                    acc += Q::from_integer(binomial(m as i64, i as i64)) * sign_power(i as u64) * v;
                }
                acc == int(0)
            }
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn addition_is_associative_and_commutative(f in qp(), g in qp(), h in qp()) {
        prop_assert_eq!(qp_add(&f, &g), qp_add(&g, &f));
        prop_assert_eq!(qp_add(&qp_add(&f, &g), &h), qp_add(&f, &qp_add(&g, &h)));
        for n in -12..12 {
            prop_assert_eq!(qp_add(&f, &g).eval(n), f.eval(n) + g.eval(n));
        }
    }

    #[test]
    fn canonical_form_is_idempotent(f in qp(), k in 1u64..=3) {
        let c = f.canonical();
        prop_assert_eq!(c.canonical(), c.clone());
        prop_assert_eq!(f.with_period(f.period() * k).canonical(), c);
    }

    #[test]
    fn difference_solver_reproduces_quasi_polynomials(f in qp()) {
        let d = f.period();
        let m = f.degree() + 1;
        let samples: BTreeMap<i64, Q> = (-10..-10 + (m as i64 + 3) * d as i64).map(|n| (n, f.eval(n))).collect();
        let g = solve_difference(m, d, &samples).unwrap();
        prop_assert_eq!(g.canonical(), f.canonical());
    }

    #[test]
    fn shift_output_is_annihilated(
        size in 1usize..=4,
        d in 1u64..=3,
        init in prop::collection::vec(prop::collection::vec(rational(), 4), 3),
    ) {
        let mut j = Matrix::identity(size);
        for i in 0..size - 1 {
            j.set(i, i + 1, int(1));
        }
        let initial: Vec<Vec<Q>> = init.iter().take(d as usize).map(|v| v[..size].to_vec()).collect();
        let qp = shift_to_qp(&j, d, 0, &initial, (0, 30), 8).unwrap();
        for k in 0..size {
            let series: BTreeMap<i64, Q> = (0..40).map(|n| (n, qp.eval(n).get(&k))).collect();
            prop_assert!(annihilated(&series, size, d as i64));
        }
    }

    #[test]
    fn fitted_period_divides_the_bound(
        a in -3i64..=3,
        b in -3i64..=3,
        p in 1i64..=3,
        q in 1i64..=3,
        c in -4i64..=4,
        strict in any::<bool>(),
    ) {
        let chamber = Chamber::new(2, vec![
            Constraint::ints(&[1, 0], Rel::Ge, a),
            Constraint::ints(&[0, 1], Rel::Ge, b),
            Constraint::ints(&[p, -q], if strict { Rel::Lt } else { Rel::Le }, c),
        ]).unwrap();
        let cert = certify_pqp(&chamber, &MPoly::constant(2, int(1)), (-20, 30)).unwrap();
        for (_, f) in cert.pqp.pieces() {
            prop_assert_eq!(cert.period_bound % f.period(), 0);
        }
    }
}
