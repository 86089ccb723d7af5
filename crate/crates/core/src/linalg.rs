//! Dense complex linear algebra on Hermitian matrices.
//!
//! Every eigendecomposition here first replaces its input by `(X + X*)/2`,
//! so round-off drift never leaks into the spectrum.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

#[inline]
pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise modulus of `m - m*`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Spectral data of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        self.map_complex(|x| real(f(x)))
    }

    pub fn map_complex(&self, f: impl Fn(f64) -> Complex64) -> CMat {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            for i in 0..n {
                scaled[(i, j)] *= fv;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Eigenvectors whose eigenvalue exceeds `cut`, as columns.
    pub fn columns_above(&self, cut: f64) -> CMat {
        let idx: Vec<usize> = (0..self.dim()).filter(|&j| self.values[j] > cut).collect();
        CMat::from_fn(self.dim(), idx.len(), |i, k| self.vectors[(i, idx[k])])
    }
}

pub fn eigh(m: &CMat) -> Eigh {
    assert!(m.is_square(), "eigh needs a square matrix");
    let n = m.nrows();
    if n == 0 {
        return Eigh {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        };
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Eigh { values, vectors }
}

/// Checks hermiticity at `τ_herm`, then positivity at `τ_psd`; returns the
/// spectral data on success.
pub fn check_hermitian(m: &CMat, tol: &Tolerances) -> Result<Eigh> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "{}x{} is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let e = eigh(m);
    let deviation = hermiticity_defect(m);
    let tolerance = tol.herm(e.max_abs());
    if deviation > tolerance {
        return Err(Error::NotHermitian {
            deviation,
            tolerance,
        });
    }
    Ok(e)
}

pub fn check_psd(m: &CMat, tol: &Tolerances) -> Result<Eigh> {
    let e = check_hermitian(m, tol)?;
    let tolerance = tol.psd(e.max_abs());
    if e.min() < -tolerance {
        return Err(Error::NotPositive {
            min_eigenvalue: e.min(),
            tolerance,
        });
    }
    Ok(e)
}

/// Eigenvalues at or below this are treated as exact zeros.
pub fn rank_cut(e: &Eigh, tol: &Tolerances) -> f64 {
    tol.rank(e.dim(), e.max_abs())
}

/// `H^s` for PSD `H` and real `s > 0`; eigenvalues under the rank cut
/// (including clamped negatives) map to zero, so `0^s = 0`.
pub fn psd_power(m: &CMat, s: f64, tol: &Tolerances) -> Result<CMat> {
    let e = check_psd(m, tol)?;
    Ok(power_of(&e, s, rank_cut(&e, tol)))
}

pub(crate) fn power_of(e: &Eigh, s: f64, cut: f64) -> CMat {
    e.map(|v| if v > cut { v.powf(s) } else { 0.0 })
}

/// Unique PSD square root.
pub fn psd_sqrt(m: &CMat, tol: &Tolerances) -> Result<CMat> {
    let e = check_psd(m, tol)?;
    let cut = rank_cut(&e, tol);
    Ok(e.map(|v| if v > cut { v.sqrt() } else { 0.0 }))
}

/// Numerical rank of a PSD matrix.
pub fn psd_rank(e: &Eigh, tol: &Tolerances) -> usize {
    let cut = rank_cut(e, tol);
    e.values.iter().filter(|&&v| v > cut).count()
}

pub fn range_projector(e: &Eigh, tol: &Tolerances) -> CMat {
    let cut = rank_cut(e, tol);
    e.map(|v| if v > cut { 1.0 } else { 0.0 })
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

/// Sum of |eigenvalues| of a Hermitian matrix.
pub fn hermitian_trace_norm(m: &CMat) -> f64 {
    eigh(m).values.iter().map(|v| v.abs()).sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Column-stacking vectorisation.
pub fn vec_cols(m: &CMat) -> CVec {
    CVec::from_iterator(m.len(), m.iter().copied())
}

pub fn unvec_cols(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_iterator(rows, cols, v.iter().copied())
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

/// Frobenius inner product `Tr(a* b)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}
