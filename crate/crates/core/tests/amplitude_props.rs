mod common;

use amplitude_core::amplitudes::{
    amplitude_kernel_gram, pullback_along_quotient, purify, purify_blockwise,
};
use amplitude_core::{
    classify_pair, geometric_mean, inequality_suite, left_form, random, right_form,
    transition_amplitude, uhlmann_fidelity, BlockAlgebra, Functional, PairRelation,
};
use common::{max_abs, pick_algebra, rng};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn kernel_gram_is_the_mean_of_left_and_right_forms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = pick_algebra(&mut r);
        let phi = random::state(&mut r, &alg);
        let psi = random::state(&mut r, &alg);
        let kernel = amplitude_kernel_gram(&phi, &psi).unwrap();
        let mean = geometric_mean(&left_form(&phi).unwrap(), &right_form(&psi).unwrap()).unwrap();
        prop_assert!(max_abs(&(kernel - mean.gram())) < 1e-9);
    }

    #[test]
    fn commutative_amplitude_is_the_affinity(seed in any::<u64>(), n in 1usize..=12) {
        let mut r = rng(seed);
        let alg = BlockAlgebra::commutative(n).unwrap();
        let p: Vec<f64> = random::distribution(&mut r, n).into_iter().map(|x| if r.random_bool(0.2) { 0.0 } else { x }).collect();
        let q = random::distribution(&mut r, n);
        let phi = Functional::diagonal(&alg, &p.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap();
        let psi = Functional::diagonal(&alg, &q.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap();
        let affinity: f64 = p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum();
        prop_assert!((transition_amplitude(&phi, &psi).unwrap() - affinity).abs() < 1e-12);
        prop_assert!((uhlmann_fidelity(&phi, &psi).unwrap() - affinity * affinity).abs() < 1e-12);
        // purification inside the commutative algebra does not square
        let pp = purify_blockwise(&phi).unwrap();
        let pq = purify_blockwise(&psi).unwrap();
        prop_assert!((transition_amplitude(&pp, &pq).unwrap() - affinity).abs() < 1e-12);
    }

    #[test]
    fn purification_squares_the_amplitude(seed in any::<u64>(), n in 2usize..=3) {
        let mut r = rng(seed);
        let alg = BlockAlgebra::new(&[n]).unwrap();
        let phi = random::state(&mut r, &alg);
        let psi = random::state(&mut r, &alg);
        let a = transition_amplitude(&phi, &psi).unwrap();
        let big = transition_amplitude(&purify(&phi).unwrap(), &purify(&psi).unwrap()).unwrap();
        prop_assert!((big - a * a).abs() < 1e-9);
    }

    #[test]
    fn inequality_suite_holds(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dims: Vec<usize> = (0..r.random_range(1..=3)).map(|_| r.random_range(1..=4)).collect();
        let alg = BlockAlgebra::new(&dims).unwrap();
        let phi = random::state(&mut r, &alg);
        let psi = random::state(&mut r, &alg).scale(r.random_range(0.2..2.0));
        let rep = inequality_suite(&phi, &psi).unwrap();
        prop_assert!(rep.min_defect() >= -1e-9, "{:?}", rep);
    }

    #[test]
    fn disjoint_states_have_zero_amplitude(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = BlockAlgebra::new(&[2, 3]).unwrap();
        let phi = random::state_with_ranks(&mut r, &alg, &[2, 0]);
        let rank = r.random_range(1..=3);
        let psi = random::state_with_ranks(&mut r, &alg, &[0, rank]);
        prop_assert_eq!(classify_pair(&phi, &psi).unwrap(), PairRelation::Disjoint);
        prop_assert_eq!(transition_amplitude(&phi, &psi).unwrap(), 0.0);
    }

    #[test]
    fn quotient_pullback_preserves_amplitude(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = pick_algebra(&mut r);
        let pi = random::quotient(&mut r, &alg);
        let phi = random::state(&mut r, pi.image());
        let psi = random::state(&mut r, pi.image());
        let before = transition_amplitude(&phi, &psi).unwrap();
        let after = transition_amplitude(
            &pullback_along_quotient(&pi, &phi).unwrap(),
            &pullback_along_quotient(&pi, &psi).unwrap(),
        )
        .unwrap();
        prop_assert!((before - after).abs() < 1e-12);
        let x = random::operator(&mut r, &alg);
        let lhs = pullback_along_quotient(&pi, &phi).unwrap().evaluate(&x).unwrap();
        let rhs = phi.evaluate(&pi.apply(&x).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn amplitude_is_symmetric_and_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = pick_algebra(&mut r);
        let phi = random::state(&mut r, &alg);
        let psi = random::state(&mut r, &alg);
        let a = transition_amplitude(&phi, &psi).unwrap();
        prop_assert!((a - transition_amplitude(&psi, &phi).unwrap()).abs() < 1e-12);
        prop_assert!(a <= 1.0 + 1e-12);
        prop_assert!((transition_amplitude(&phi, &phi).unwrap() - 1.0).abs() < 1e-12);
        let fid = uhlmann_fidelity(&phi, &psi).unwrap();
        prop_assert!(a * a <= fid + 1e-12);
    }
}
