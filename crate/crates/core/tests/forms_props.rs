mod common;

use amplitude_core::forms::HermitianForm;
use amplitude_core::linalg::{self, CMat};
use amplitude_core::{geometric_mean, is_dominated, random, PositiveForm, Tolerances};
use common::{max_abs, mean_oracle, min_eig, random_cvec, real_diag, rng};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn form(g: CMat) -> PositiveForm {
    PositiveForm::new(g).unwrap()
}

/// PSD Gram of trace one and random rank.
fn random_gram(r: &mut ChaCha8Rng, d: usize, full: bool) -> CMat {
    let rank = if full { d } else { r.random_range(0..=d) };
    let g = random::psd(r, d, rank);
    let t = linalg::trace(&g).re;
    if t > 0.0 {
        g.unscale(t)
    } else {
        g
    }
}

fn mean(a: &CMat, b: &CMat) -> CMat {
    geometric_mean(&form(a.clone()), &form(b.clone()))
        .unwrap()
        .gram()
        .clone()
}

/// `g` placed in the `d × d` corner starting at `(at, at)`.
fn embed(g: &CMat, at: usize, d: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m.view_mut((at, at), g.shape()).copy_from(g);
    m
}

fn certificate(a: &CMat, g: &CMat, b: &CMat) -> CMat {
    let d = a.nrows();
    let mut m = CMat::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(a);
    m.view_mut((0, d), (d, d)).copy_from(g);
    m.view_mut((d, 0), (d, d)).copy_from(&g.adjoint());
    m.view_mut((d, d), (d, d)).copy_from(b);
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric(seed in any::<u64>(), d in 1usize..=6) {
        let mut r = rng(seed);
        let a = random_gram(&mut r, d, false);
        let b = random_gram(&mut r, d, false);
        prop_assert!(max_abs(&(mean(&a, &b) - mean(&b, &a))) < 1e-9);
    }

    #[test]
    fn matches_closed_form_on_invertible_pairs(seed in any::<u64>(), d in 1usize..=8) {
        let mut r = rng(seed);
        let a = random_gram(&mut r, d, true);
        let b = random_gram(&mut r, d, true);
        let m = mean(&a, &b);
        prop_assert!(max_abs(&(&m - mean_oracle(&a, &b))) < 1e-9);
        // Riccati characterisation: M A^{-1} M = B
        let ai = a.clone().try_inverse().unwrap();
        prop_assert!(max_abs(&(&m * ai * &m - &b)) < 1e-8 * (1.0 + max_abs(&b)));
    }

    #[test]
    fn commuting_pairs_take_entrywise_roots(seed in any::<u64>(), d in 1usize..=8) {
        let mut r = rng(seed);
        let p: Vec<f64> = (0..d).map(|_| if r.random_bool(0.2) { 0.0 } else { r.random::<f64>() }).collect();
        let q: Vec<f64> = (0..d).map(|_| if r.random_bool(0.2) { 0.0 } else { r.random::<f64>() }).collect();
        let u = random::unitary(&mut r, d);
        let rot = |m: CMat| &u * m * u.adjoint();
        let m = mean(&rot(real_diag(&p)), &rot(real_diag(&q)));
        let expect: Vec<f64> = p.iter().zip(&q).map(|(x, y)| (x * y).sqrt()).collect();
        prop_assert!(max_abs(&(m - rot(real_diag(&expect)))) < 1e-9);
    }

    #[test]
    fn dominated_forms_lie_below_the_mean(
        seed in any::<u64>(),
        d in 1usize..=5,
        ranks in (1usize..=5, 1usize..=5),
    ) {
        let mut r = rng(seed);
        // A on the leading coordinates, B on the trailing ones
        let (na, nb) = (ranks.0.min(d), ranks.1.min(d));
        let a0 = embed(&random_gram(&mut r, na, true), 0, d);
        let b0 = embed(&random_gram(&mut r, nb, true), d - nb, d);
        let tol = Tolerances::default();
        let shape = linalg::hermitize(
            &(linalg::psd_sqrt(&a0, &tol).unwrap()
                * random::ginibre(&mut r, d, d)
                * linalg::psd_sqrt(&b0, &tol).unwrap()),
        );
        let common = (d - nb)..na;
        let mut g0 = CMat::from_fn(d, d, |i, j| {
            if common.contains(&i) && common.contains(&j) {
                shape[(i, j)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let rows: Vec<usize> = (0..na).chain(d + d - nb..2 * d).collect();
        let mut halvings = 0;
        while min_eig(&certificate(&a0, &g0, &b0).select_rows(&rows).select_columns(&rows)) <= 0.0 {
            g0 = g0.scale(0.5);
            halvings += 1;
            prop_assert!(halvings < 80);
        }

        let u = random::unitary(&mut r, d);
        let rot = |m: &CMat| &u * m * u.adjoint();
        let (a, b, g) = (rot(&a0), rot(&b0), rot(&g0));
        let (alpha, beta) = (form(a.clone()), form(b.clone()));
        let m = geometric_mean(&alpha, &beta).unwrap();
        prop_assert!(is_dominated(m.as_hermitian(), &alpha, &beta).unwrap());
        let gamma = HermitianForm::new(g.clone()).unwrap();
        prop_assert!(is_dominated(&gamma, &alpha, &beta).unwrap());
        for i in 0..d {
            prop_assert!(g[(i, i)].re <= m.gram()[(i, i)].re + 1e-9);
        }
        for _ in 0..8 {
            let x = random_cvec(&mut r, d);
            prop_assert!(gamma.quadratic(&x) <= m.quadratic(&x) + 1e-9);
        }
        // Ando: the mean is the largest Hermitian X with [[A, X], [X, B]] ⪰ 0
        prop_assert!(min_eig(&(m.gram() - &g)) >= -1e-9);
    }

    #[test]
    fn monotone_in_both_arguments(seed in any::<u64>(), d in 1usize..=6) {
        let mut r = rng(seed);
        let a1 = random_gram(&mut r, d, false);
        let b1 = random_gram(&mut r, d, false);
        let a = &a1 + random_gram(&mut r, d, false);
        let b = &b1 + random_gram(&mut r, d, false);
        prop_assert!(min_eig(&(mean(&a, &b) - mean(&a1, &b1))) >= -1e-9);
    }

    #[test]
    fn superadditive(seed in any::<u64>(), d in 1usize..=6) {
        let mut r = rng(seed);
        let a1 = random_gram(&mut r, d, false);
        let a2 = random_gram(&mut r, d, false);
        let b1 = random_gram(&mut r, d, false);
        let b2 = random_gram(&mut r, d, false);
        let lhs = mean(&(&a1 + &a2), &(&b1 + &b2));
        let rhs = mean(&a1, &b1) + mean(&a2, &b2);
        prop_assert!(min_eig(&(lhs - rhs)) >= -1e-9);
    }

    #[test]
    fn scales_with_root_of_product(seed in any::<u64>(), d in 1usize..=6, s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let mut r = rng(seed);
        let a = random_gram(&mut r, d, false);
        let b = random_gram(&mut r, d, false);
        let lhs = mean(&a.scale(s), &b.scale(t));
        let rhs = mean(&a, &b).scale((s * t).sqrt());
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-9);
    }
}
