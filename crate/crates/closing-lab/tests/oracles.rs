//! Cross-module oracle tests: brute-force or closed-form computations
//! checked against the library's structured implementations.

use closing_lab::cli::load_scenario;
use closing_lab::ergodic::{uniform_birkhoff_check, BirkhoffCheck};
use closing_lab::iet::Iet;
use closing_lab::segment_map::{CertificateOutcome, Segment};

const GOLDEN: f64 = 0.618033988749894848;

/// The golden rotation induced on [0, 0.2) is a three-interval Rauzy-type
/// exchange; the branch layout and return times must match a brute-force
/// orbit search.
#[test]
fn golden_induced_return_matches_brute_force() {
    let map = Iet::rotation(GOLDEN).unwrap().as_return_map(0.0).unwrap();
    let sub = Segment::new(0.0, 0.2, 0.1).unwrap();
    let induced = map.induced_first_return(sub, 100).unwrap();

    assert_eq!(induced.map.branches().len(), 3, "Rauzy-type three-exchange");
    assert!(induced.excluded.is_empty());

    // brute force: first return time of a fine grid of points
    let frac = |x: f64| x - x.floor();
    let brute_time = |x0: f64| -> usize {
        let mut x = x0;
        for k in 1..200 {
            x = frac(x + GOLDEN);
            if x < 0.2 {
                return k;
            }
        }
        panic!("no return for {x0}")
    };
    for (branch, &time) in induced.map.branches().iter().zip(&induced.return_times) {
        // sample the branch; the brute-force return time is locally constant
        for i in 1..20 {
            let x = branch.domain.lo + branch.domain.len() * i as f64 / 20.0;
            assert_eq!(brute_time(x), time, "return time at {x}");
            // and the induced image is the orbit endpoint
            let mut y = x;
            for _ in 0..time {
                y = frac(y + GOLDEN);
            }
            assert!((branch.eval(x) - y).abs() < 1e-12);
        }
        assert!((branch.deriv(branch.domain.midpoint()).abs() - 1.0).abs() < 1e-15);
    }
    let times: Vec<usize> = induced.return_times.clone();
    assert_eq!(times, vec![5, 8, 3]);
}

/// Depth-two domain of the two-branch map: the pullback construction against
/// a grid classification by direct iteration.
#[test]
fn two_branch_depth_two_domain_matches_grid_classification() {
    let scenario = load_scenario("two_branch").unwrap();
    let map = scenario.return_map().unwrap();
    let family = map.domain_depth(2).unwrap();
    assert_eq!(family.len(), 2);
    let n = 40_000;
    for i in 1..n {
        let x = -1.0 + 1.6 * i as f64 / n as f64;
        let complete = map.iterate(x, 2).unwrap().stop.is_completed();
        let inside = family.iter().any(|j| j.contains(x));
        if complete != inside {
            let near_edge = family
                .iter()
                .any(|j| (x - j.lo).abs() < 1e-9 || (x - j.hi).abs() < 1e-9);
            assert!(near_edge, "misclassified point {x}");
        }
    }
}

/// An exchange never certifies any contraction target below 1.
#[test]
fn exchange_certificate_always_fails() {
    let map = Iet::rotation(GOLDEN).unwrap().as_return_map(0.0).unwrap();
    for n in [1, 3, 7] {
        let est = map.sup_abs_deriv(n, 1e-3).unwrap();
        assert_eq!(est.sup, 1.0, "|DE^{n}| is exactly 1");
    }
    match map.contraction_certificate(0.9, 16, 1e-3).unwrap() {
        CertificateOutcome::Failed { best_sup, .. } => assert_eq!(best_sup, 1.0),
        CertificateOutcome::Certified(_) => panic!("an isometry certified contraction"),
    }
}

/// With phi = log|DP| every mixed-slope orbit averages below -0.2 from the
/// first step on: both slopes beat that rate.
#[test]
fn mixed_slope_uniform_birkhoff_with_log_derivative() {
    let map = load_scenario("mixed_slope").unwrap().return_map().unwrap();
    let phi = |x: f64| map.deriv(x).map(|d| d.abs().ln()).unwrap_or(0.0);
    match uniform_birkhoff_check(&map, phi, 0.2, 1..=30, 300).unwrap() {
        BirkhoffCheck::Pass { threshold_n } => assert_eq!(threshold_n, 1),
        BirkhoffCheck::Fail { n, x, average } => {
            panic!("unexpected violation at n = {n}, x = {x}: {average}")
        }
    }
}
