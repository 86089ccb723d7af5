#![allow(dead_code)]

use amplitude_core::linalg::CMat;
use amplitude_core::BlockAlgebra;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const SHAPES: &[&[usize]] = &[
    &[1],
    &[2],
    &[3],
    &[4],
    &[2, 2],
    &[1, 2],
    &[1, 1, 1],
    &[3, 1],
    &[2, 1, 2],
];

pub fn pick_algebra(rng: &mut ChaCha8Rng) -> BlockAlgebra {
    BlockAlgebra::new(SHAPES[rng.random_range(0..SHAPES.len())]).unwrap()
}

/// Square root of a positive definite matrix by the Denman–Beavers
/// iteration, which uses only products and inverses.
pub fn db_sqrt(m: &CMat) -> CMat {
    let n = m.nrows();
    let mut y = m.clone();
    let mut z = CMat::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().expect("invertible iterate");
        let zi = z.clone().try_inverse().expect("invertible iterate");
        let y_next = (&y + zi).scale(0.5);
        let z_next = (&z + yi).scale(0.5);
        let change = (&y_next - &y).iter().map(|c| c.norm()).fold(0.0, f64::max);
        y = y_next;
        z = z_next;
        if change <= 1e-15 * y.iter().map(|c| c.norm()).fold(0.0, f64::max) {
            break;
        }
    }
    for _ in 0..2 {
        y = newton_polish(m, &y);
    }
    y
}

/// One Newton step for `Y² = M`: solves `Y E + E Y = M − Y²` through the
/// Kronecker form and returns `Y + E`.
fn newton_polish(m: &CMat, y: &CMat) -> CMat {
    let n = m.nrows();
    let residual = m - y * y;
    let one = CMat::identity(n, n);
    let op = one.kronecker(y) + y.transpose().kronecker(&one);
    let rhs = nalgebra::DVector::from_iterator(n * n, residual.iter().cloned());
    let e = op.lu().solve(&rhs).expect("nonsingular Sylvester operator");
    let e = CMat::from_column_slice(n, n, e.as_slice());
    let out = y + e;
    (&out + out.adjoint()).scale(0.5)
}

/// `A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}`, expanded around
/// whichever argument is better conditioned (the mean is symmetric).
pub fn mean_oracle(a: &CMat, b: &CMat) -> CMat {
    if min_eig(a) < min_eig(b) {
        mean_around(b, a)
    } else {
        mean_around(a, b)
    }
}

fn mean_around(a: &CMat, b: &CMat) -> CMat {
    let ra = db_sqrt(a);
    let ira = ra.clone().try_inverse().unwrap();
    let inner = &ira * b * &ira;
    let inner = (&inner + inner.adjoint()).scale(0.5);
    &ra * db_sqrt(&inner) * &ra
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of a Hermitian matrix, straight from nalgebra.
pub fn min_eig(m: &CMat) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub fn random_cvec(rng: &mut ChaCha8Rng, d: usize) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_fn(d, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

pub fn real_diag(d: &[f64]) -> CMat {
    DMatrix::from_fn(d.len(), d.len(), |i, j| {
        Complex64::new(if i == j { d[i] } else { 0.0 }, 0.0)
    })
}
