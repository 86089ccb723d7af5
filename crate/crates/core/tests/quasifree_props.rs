use amplitude_core::quasifree::{
    majorizing_inner_product, quasifree_character, reduce, validate_covariance, CovarianceForm,
    PresymplecticSpace, RMat,
};
use amplitude_core::random;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vector(r: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| random::gaussian(r)).collect()
}

fn apply(q: &RMat, x: &[f64]) -> Vec<f64> {
    (0..q.nrows())
        .map(|i| (0..q.ncols()).map(|j| q[(i, j)] * x[j]).sum())
        .collect()
}

fn min_sym_eig(m: &RMat) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn max_entry(m: &RMat) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_preserves_the_data(seed in any::<u64>(), d in 1usize..=6, cut in 0usize..=6) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let support = cut.min(d);
        let (space, s, t, _) = random::quasifree_pair(&mut r, d, support);
        prop_assert!(validate_covariance(&s, &space).unwrap());
        prop_assert!(validate_covariance(&t, &space).unwrap());

        let m = majorizing_inner_product(&s, &t).unwrap();
        prop_assert!(min_sym_eig(&(&m - s.real_part() * 2.0)) >= -1e-9);
        prop_assert!(min_sym_eig(&(&m - t.real_part() * 2.0)) >= -1e-9);

        let red = reduce(&space, &s, &t).unwrap();
        prop_assert_eq!(red.kernel_dim, d - support);
        prop_assert_eq!(red.space.dim(), support);
        prop_assert!(validate_covariance(&red.s, &red.space).unwrap());
        prop_assert!(validate_covariance(&red.t, &red.space).unwrap());
        let q = &red.quotient;
        let qqt = q * q.transpose();
        prop_assert!(max_entry(&(qqt - RMat::identity(support, support))) <= 1e-9);

        for _ in 0..3 {
            let x = random_vector(&mut r, d);
            let y = random_vector(&mut r, d);
            let (qx, qy) = (apply(q, &x), apply(q, &y));
            prop_assert!((s.eval(&x, &y).unwrap() - red.s.eval(&qx, &qy).unwrap()).norm() <= 1e-9);
            prop_assert!((t.eval(&x, &y).unwrap() - red.t.eval(&qx, &qy).unwrap()).norm() <= 1e-9);
            let before = quasifree_character(&s, &x).unwrap();
            let after = quasifree_character(&red.s, &qx).unwrap();
            prop_assert!((before - after).norm() <= 1e-9);
            prop_assert!(before.re > 0.0 && before.re <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn reduction_is_idempotent(seed in any::<u64>(), d in 1usize..=6, cut in 0usize..=6) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (space, s, t, _) = random::quasifree_pair(&mut r, d, cut.min(d));
        let once = reduce(&space, &s, &t).unwrap();
        let twice = reduce(&once.space, &once.s, &once.t).unwrap();
        let n = once.space.dim();
        prop_assert_eq!(twice.kernel_dim, 0);
        prop_assert!(max_entry(&(&twice.quotient - RMat::identity(n, n))) <= 1e-9);
        let ds = (twice.s.matrix() - once.s.matrix()).iter().fold(0.0f64, |a, c| a.max(c.norm()));
        prop_assert!(ds <= 1e-9);
        prop_assert!(max_entry(&(twice.space.sigma() - once.space.sigma())) <= 1e-9);
    }

    #[test]
    fn vacuum_forms_are_valid(seed in any::<u64>(), m in 1usize..=3) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let space = PresymplecticSpace::standard(m);
        let scale = 1.0 + r.random::<f64>();
        let g = RMat::identity(2 * m, 2 * m) * scale;
        let s = CovarianceForm::from_real_part(&g, &space).unwrap();
        prop_assert!(validate_covariance(&s, &space).unwrap());
        let x = random_vector(&mut r, 2 * m);
        let expected = (-scale * x.iter().map(|v| v * v).sum::<f64>() / 4.0).exp();
        prop_assert!((quasifree_character(&s, &x).unwrap().re - expected).abs() <= 1e-12);
    }
}
