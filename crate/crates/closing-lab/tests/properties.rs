//! Property tests for the structural invariants: twist family axioms over
//! random parameters, telescoping invariance of empirical measures, chain
//! rule against finite differences on random branch chains, drift bounds on
//! random contracting maps, and exchange round trips.

use proptest::prelude::*;

use closing_lab::ergodic::empirical_measure;
use closing_lab::iet::{Iet, IetEval};
use closing_lab::interval::Interval;
use closing_lab::segment_map::{Branch, BranchKind, ReturnMap, Segment};
use closing_lab::twist::{drift_bound_check, perturbed_iterate, TwistFamily};

fn twist_strategy() -> impl Strategy<Value = (f64, usize, f64, f64)> {
    (
        0.001f64..0.112,
        prop_oneof![Just(3usize), Just(5), Just(7), Just(9)],
        0.0f64..=1.0,
        -1.0f64..0.9,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn twist_axioms_hold_for_random_parameters((delta, order, lambda, x) in twist_strategy()) {
        let segment = Segment::centered(-1.0, 0.9).unwrap();
        let twist = TwistFamily::new(&segment, delta, order).unwrap();
        let shift = twist.eval(lambda, x) - x;
        prop_assert!(shift >= -1e-12);
        prop_assert!(shift <= lambda * delta + 1e-12);
        let (p0, p1) = twist.plateau();
        if x >= p0 && x <= p1 {
            prop_assert!((shift - lambda * delta).abs() <= 1e-12);
        }
        let (s0, s1) = twist.support();
        if x <= s0 || x >= s1 {
            prop_assert_eq!(shift, 0.0);
        }
        prop_assert!(twist.deriv(lambda, x) > 0.5);
        // nondecreasing in lambda
        prop_assert!(twist.eval((lambda * 0.9).min(1.0), x) <= twist.eval(lambda, x) + 1e-15);
    }

    #[test]
    fn telescoping_invariance_for_random_orbits(
        start in -0.95f64..0.85,
        n in 10usize..2000,
        j_lo in -1.0f64..0.85,
        width in 0.01f64..0.5,
    ) {
        let segment = Segment::centered(-1.0, 0.9).unwrap();
        let map = ReturnMap::new(
            segment,
            vec![
                Branch::affine(-1.0, 0.1, 0.5, -0.001),
                Branch::affine(0.1, 0.6, 0.5, -0.3),
            ],
        )
        .unwrap();
        let mu = empirical_measure(&map, start, n, 64).unwrap();
        let j = Interval::new(j_lo, (j_lo + width).min(0.9));
        let defect = (mu.interval_mass(&j) - mu.pullback_mass(&map, &j)).abs();
        prop_assert!(
            defect <= 2.0 / mu.realized_len() as f64 + 1e-15,
            "defect {} with n = {}",
            defect,
            mu.realized_len()
        );
    }

    #[test]
    fn chain_rule_on_random_affine_chains(
        s1 in 0.05f64..0.9,
        s2 in -0.9f64..-0.05,
        x in -0.8f64..0.8,
    ) {
        let segment = Segment::centered(-1.0, 1.0).unwrap();
        let kind = BranchKind::Composite(vec![
            BranchKind::Affine { slope: s1, offset: 0.05 },
            BranchKind::Affine { slope: s2, offset: -0.02 },
        ]);
        let map = ReturnMap::new(
            segment,
            vec![Branch::new(Interval::new(-1.0, 1.0), kind)],
        )
        .unwrap();
        let prod = map.abs_deriv_n(x, 2).unwrap();
        let h = 1e-7;
        let up = map.iterate(x + h, 2).unwrap().last();
        let down = map.iterate(x - h, 2).unwrap().last();
        let fd = ((up - down) / (2.0 * h)).abs();
        prop_assert!((prod - fd).abs() <= 1e-5 * prod.max(1.0));
    }

    #[test]
    fn drift_never_exceeds_bound_on_random_contractions(
        mag in 0.05f64..0.3,
        negative in any::<bool>(),
        delta in 0.02f64..0.12,
        u in 0.1f64..0.8,
        q in -0.8f64..0.8,
        n_max in 1usize..8,
    ) {
        let slope = if negative { -mag } else { mag };
        let fix = -mag * delta * u;
        let offset = fix * (1.0 - slope);
        let segment = Segment::centered(-1.0, 1.0).unwrap();
        let map = ReturnMap::new(segment, vec![Branch::affine(-1.0, 1.0, slope, offset)]).unwrap();
        let twist = TwistFamily::new(map.segment(), delta, 5).unwrap();
        let cert = map
            .contraction_certificate(0.32, 8, 1e-3)
            .unwrap()
            .certificate()
            .copied()
            .unwrap();
        let check = drift_bound_check(&map, &twist, &cert, q, n_max, &[0.0, 0.5, 1.0]).unwrap();
        prop_assert!(check.max_deviation <= check.bound + 1e-15);
    }

    #[test]
    fn zero_twist_reproduces_plain_orbits(
        start in -0.9f64..0.85,
        n in 0usize..40,
    ) {
        let segment = Segment::centered(-1.0, 0.9).unwrap();
        let map = ReturnMap::new(
            segment,
            vec![Branch::affine(-1.0, 0.9, 0.05, -0.001)],
        )
        .unwrap();
        let twist = TwistFamily::new(map.segment(), 0.1, 5).unwrap();
        let plain = map.iterate(start, n).unwrap();
        let twisted = perturbed_iterate(&map, &twist, 0.0, start, n).unwrap();
        prop_assert_eq!(plain.points, twisted.points);
    }

    #[test]
    fn exchange_eval_round_trips_through_the_inverse_slot(
        x in 0.0f64..1.0,
        alpha in 0.1f64..0.9,
    ) {
        // forward image of a rotation always lands alpha away (mod 1)
        let e = Iet::rotation(alpha).unwrap();
        if let IetEval::Value(y) = e.eval(x) {
            let diff = (y - x).rem_euclid(1.0);
            prop_assert!((diff - alpha).abs() <= 1e-12 || (diff - alpha).abs() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn exchange_preserves_derivative_magnitude(
        x in 0.0f64..1.0,
        l1 in 0.1f64..0.9,
        flip1 in any::<bool>(),
        flip2 in any::<bool>(),
    ) {
        let e = Iet::new(vec![l1, 1.0 - l1], vec![2, 1], vec![flip1, flip2]).unwrap();
        let map = e.as_return_map(0.0).unwrap();
        if let Ok(d) = map.deriv(x) {
            prop_assert_eq!(d.abs(), 1.0);
        }
    }
}
