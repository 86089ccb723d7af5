//! Randomized invariant suite. Every case draws from its own ChaCha stream
//! derived from the seed, the check index and the case index, so the report
//! does not depend on how rayon schedules the cases.

use amplitude_core::amplitudes::sqrt_vector;
use amplitude_core::amplitudes::{amplitude_kernel_gram, pullback_along_quotient, purify};
use amplitude_core::central::amplitude_sum_check;
use amplitude_core::forms::pw_representation;
use amplitude_core::modular::{kms_defect, modular_flow, relative_modular};
use amplitude_core::quasifree::{quasifree_character, reduce, validate_covariance};
use amplitude_core::restriction::{chain_amplitudes, ucp_pullback, SubalgebraChain};
use amplitude_core::{
    geometric_mean, inequality_suite, left_form, linalg, random, right_form, transition_amplitude,
    BlockAlgebra, PositiveForm, Result,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::output;
use crate::CliError;

type Case = fn(&mut ChaCha8Rng, usize) -> Result<f64>;

/// Name, tolerance on the violation, and the case generator returning a
/// nonnegative violation.
const CHECKS: &[(&str, f64, Case)] = &[
    ("kernel_gram_equals_mean", 1e-8, kernel_gram_equals_mean),
    ("mean_representation", 1e-9, mean_representation),
    ("purification_square_law", 1e-9, purification_square_law),
    ("square_root_inequalities", 1e-9, square_root_inequalities),
    ("chain_monotonicity", 1e-9, chain_monotonicity),
    ("ucp_monotonicity", 1e-9, ucp_monotonicity),
    ("quotient_invariance", 1e-9, quotient_invariance),
    ("modular_flow", 1e-9, modular_flow_check),
    ("kms_gibbs", 1e-9, kms_gibbs),
    ("central_sum_formula", 1e-9, central_sum_formula),
    ("quasifree_reduction", 1e-9, quasifree_reduction),
];

fn algebra(r: &mut ChaCha8Rng, max_dim: usize) -> BlockAlgebra {
    let blocks = r.random_range(1..=3);
    let dims: Vec<usize> = (0..blocks).map(|_| r.random_range(1..=max_dim)).collect();
    BlockAlgebra::new(&dims).expect("positive sizes")
}

fn kernel_gram_equals_mean(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let alg = algebra(r, max_dim);
    let phi = random::state(r, &alg);
    let psi = random::state(r, &alg);
    let gram = amplitude_kernel_gram(&phi, &psi)?;
    let mean = geometric_mean(&left_form(&phi)?, &right_form(&psi)?)?;
    Ok(linalg::max_abs(&(gram - mean.gram())))
}

fn mean_representation(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let d = r.random_range(1..=2 * max_dim);
    let (ra, rb) = (r.random_range(0..=d), r.random_range(0..=d));
    let a = PositiveForm::new(random::psd(r, d, ra))?;
    let b = PositiveForm::new(random::psd(r, d, rb))?;
    let rep = pw_representation(&a, &b)?;
    let ab = geometric_mean(&a, &b)?;
    let ba = geometric_mean(&b, &a)?;
    let scale = 1.0 + linalg::max_abs(a.gram()).max(linalg::max_abs(b.gram()));
    let asym = linalg::max_abs(&(ab.gram() - ba.gram())) / scale;
    Ok(rep
        .commutator_defect()
        .max(rep.reconstruction_defect(&a, &b) / scale)
        .max(asym))
}

fn purification_square_law(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let n = r.random_range(1..=max_dim.min(3));
    let alg = BlockAlgebra::new(&[n])?;
    let phi = random::state(r, &alg);
    let psi = random::state(r, &alg);
    let a = transition_amplitude(&phi, &psi)?;
    Ok((transition_amplitude(&purify(&phi)?, &purify(&psi)?)? - a * a).abs())
}

fn square_root_inequalities(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let alg = algebra(r, max_dim);
    let phi = random::state(r, &alg);
    let psi = random::state(r, &alg);
    Ok((-inequality_suite(&phi, &psi)?.min_defect()).max(0.0))
}

fn chain_monotonicity(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let dims: Vec<usize> = (0..r.random_range(1..=2))
        .map(|_| r.random_range(1..=max_dim.min(2)))
        .collect();
    let bottom = BlockAlgebra::new(&dims)?;
    let first = random::embedding(r, &bottom, 2);
    let last = random::embedding(r, first.target(), 1);
    let ambient = last.target().clone();
    let chain = SubalgebraChain::new(vec![first], last)?;
    let phi = random::state(r, &ambient);
    let psi = random::state(r, &ambient);
    let amps = chain_amplitudes(&phi, &psi, &chain)?;
    let full = transition_amplitude(&phi, &psi)?;
    let mut seq = amps;
    seq.push(full);
    Ok(seq
        .windows(2)
        .map(|w| (w[1] - w[0]).max(0.0))
        .fold(0.0, f64::max))
}

fn ucp_monotonicity(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let source = algebra(r, max_dim);
    let target = algebra(r, max_dim);
    let map = random::ucp_map(r, &source, &target);
    let phi = random::state(r, &target);
    let psi = random::state(r, &target);
    let before = transition_amplitude(&phi, &psi)?;
    let after = transition_amplitude(&ucp_pullback(&map, &phi)?, &ucp_pullback(&map, &psi)?)?;
    Ok((before - after).max(0.0))
}

fn quotient_invariance(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let source = algebra(r, max_dim);
    let pi = random::quotient(r, &source);
    let phi = random::state(r, pi.image());
    let psi = random::state(r, pi.image());
    let pulled = transition_amplitude(
        &pullback_along_quotient(&pi, &phi)?,
        &pullback_along_quotient(&pi, &psi)?,
    )?;
    Ok((pulled - transition_amplitude(&phi, &psi)?).abs())
}

fn modular_flow_check(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let alg = algebra(r, max_dim);
    let phi = random::faithful_state(r, &alg);
    let x = random::operator(r, &alg);
    let t = r.random_range(-3.0..3.0);
    let root = sqrt_vector(&phi)?;
    let lhs = relative_modular(&phi, &phi)?
        .imaginary_power(t)?
        .apply(&root.left_mul(&x)?)?;
    let rhs = root.left_mul(&modular_flow(&phi, t, &x)?)?;
    Ok(lhs.checked_sub(&rhs)?.norm())
}

fn kms_gibbs(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let n = r.random_range(2..=max_dim.max(2));
    let alg = BlockAlgebra::new(&[n])?;
    let phi = random::gibbs_state(r, &alg, 1.0);
    let x = random::operator(r, &alg);
    let y = random::operator(r, &alg);
    let mut worst = 0.0f64;
    for t in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        worst = worst.max(kms_defect(&phi, &x, &y, t)?);
    }
    Ok(worst)
}

fn central_sum_formula(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let alg = algebra(r, max_dim);
    let phi = random::state(r, &alg);
    let psi = random::state(r, &alg);
    let base = amplitude_sum_check(&phi, &psi, None)?;
    let mut worst = base.defect;
    for _ in 0..5 {
        let mu = random::distribution(r, alg.num_blocks());
        let check = amplitude_sum_check(&phi, &psi, Some(&mu))?;
        worst = worst.max(check.defect).max((check.rhs - base.rhs).abs());
    }
    Ok(worst)
}

fn quasifree_reduction(r: &mut ChaCha8Rng, max_dim: usize) -> Result<f64> {
    let d = r.random_range(1..=2 * max_dim);
    let support = r.random_range(0..=d);
    let (space, s, t, _) = random::quasifree_pair(r, d, support);
    let red = reduce(&space, &s, &t)?;
    if !validate_covariance(&red.s, &red.space)? || !validate_covariance(&red.t, &red.space)? {
        return Ok(f64::INFINITY);
    }
    let mut worst = (red.kernel_dim as f64 - (d - support) as f64).abs();
    for _ in 0..3 {
        let x: Vec<f64> = (0..d).map(|_| random::gaussian(r)).collect();
        let qx: Vec<f64> = (0..red.quotient.nrows())
            .map(|i| (0..d).map(|j| red.quotient[(i, j)] * x[j]).sum())
            .collect();
        let gap = quasifree_character(&s, &x)? - quasifree_character(&red.s, &qx)?;
        worst = worst.max(gap.norm());
    }
    Ok(worst)
}

fn case_rng(seed: u64, check: usize, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((check as u64) << 32) | case as u64);
    rng
}

pub fn run(seed: u64, max_dim: usize, cases: usize) -> std::result::Result<String, CliError> {
    let mut rows = Vec::with_capacity(CHECKS.len());
    let mut failures = 0;
    for (index, &(name, tolerance, case)) in CHECKS.iter().enumerate() {
        let violations: Vec<f64> = (0..cases)
            .into_par_iter()
            .map(|c| case(&mut case_rng(seed, index, c), max_dim).unwrap_or(f64::INFINITY))
            .collect();
        let worst = violations.iter().cloned().fold(0.0, f64::max);
        let pass = worst <= tolerance;
        if !pass {
            failures += 1;
        }
        rows.push(vec![
            name.to_string(),
            cases.to_string(),
            output::num(worst),
            output::num(tolerance),
            if pass { "PASS" } else { "FAIL" }.to_string(),
        ]);
    }
    let report = output::csv(&["check", "cases", "worst", "tolerance", "status"], &rows);
    if failures > 0 {
        Err(CliError::SelftestFailed { report, failures })
    } else {
        Ok(report)
    }
}
