//! Finite direct sums of full matrix algebras, their positive functionals,
//! and the Hilbert–Schmidt standard space.
//!
//! An algebra `M = M_{n_1} ⊕ … ⊕ M_{n_m}` is described by its block sizes.
//! A functional is stored as one density matrix `D_k` per block so that
//! `φ(x) = Σ_k Tr(D_k x_k)`. The standard space `L²(M)` is the same block
//! shape with inner product `⟨ξ|η⟩ = Σ_k Tr(ξ_k* η_k)`; the positive-cone
//! vector of `φ` is the blockwise square root of its densities.
//!
//! Matrix units are enumerated block by block and row-major within a block:
//! the unit `e_ij` of block `k` has index `Σ_{l<k} n_l² + i·n_k + j`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Eigh};
use crate::tolerance::Tolerances;

struct AlgebraInner {
    dims: Vec<usize>,
    tol: Tolerances,
}

/// A block algebra `⊕_k M_{n_k}`. Cheap to clone; equality compares block
/// sizes only.
#[derive(Clone)]
pub struct BlockAlgebra {
    inner: Arc<AlgebraInner>,
}

impl fmt::Debug for BlockAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockAlgebra{:?}", self.inner.dims)
    }
}

impl PartialEq for BlockAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.inner.dims == other.inner.dims
    }
}

impl Eq for BlockAlgebra {}

/// Builds `⊕ M_{n_k}` with default tolerances.
pub fn make_algebra(dims: &[usize]) -> Result<BlockAlgebra> {
    BlockAlgebra::new(dims)
}

impl BlockAlgebra {
    pub fn new(dims: &[usize]) -> Result<Self> {
        Self::with_tolerances(dims, Tolerances::default())
    }

    pub fn with_tolerances(dims: &[usize], tol: Tolerances) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        if let Some(k) = dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidAlgebra(format!("block {k} has dimension 0")));
        }
        Ok(Self {
            inner: Arc::new(AlgebraInner {
                dims: dims.to_vec(),
                tol,
            }),
        })
    }

    /// Commutative algebra `ℂ^n`.
    pub fn commutative(n: usize) -> Result<Self> {
        Self::new(&vec![1; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.inner.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.inner.dims.len()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.inner.tol
    }

    /// Same blocks, different cutoffs.
    pub fn retuned(&self, tol: Tolerances) -> Self {
        Self {
            inner: Arc::new(AlgebraInner {
                dims: self.inner.dims.clone(),
                tol,
            }),
        }
    }

    /// Complex dimension `Σ n_k²`.
    pub fn dimension(&self) -> usize {
        self.inner.dims.iter().map(|n| n * n).sum()
    }

    /// Side of the Hilbert space the algebra acts on, `Σ n_k`.
    pub fn hilbert_dim(&self) -> usize {
        self.inner.dims.iter().sum()
    }

    pub fn max_block(&self) -> usize {
        self.inner.dims.iter().copied().max().unwrap_or(0)
    }

    pub fn is_commutative(&self) -> bool {
        self.inner.dims.iter().all(|&n| n == 1)
    }

    pub fn identity(&self) -> BlockOperator {
        BlockOperator {
            algebra: self.clone(),
            blocks: self
                .inner
                .dims
                .iter()
                .map(|&n| CMat::identity(n, n))
                .collect(),
        }
    }

    pub fn zero(&self) -> BlockOperator {
        BlockOperator {
            algebra: self.clone(),
            blocks: self.inner.dims.iter().map(|&n| CMat::zeros(n, n)).collect(),
        }
    }

    pub fn matrix_unit(&self, block: usize, i: usize, j: usize) -> BlockOperator {
        let mut x = self.zero();
        x.blocks[block][(i, j)] = Complex64::new(1.0, 0.0);
        x
    }

    /// `(block, row, col)` of every matrix unit, in basis order.
    pub fn basis_labels(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.dimension());
        for (k, &n) in self.inner.dims.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    out.push((k, i, j));
                }
            }
        }
        out
    }

    pub fn basis(&self) -> Vec<BlockOperator> {
        self.basis_labels()
            .into_iter()
            .map(|(k, i, j)| self.matrix_unit(k, i, j))
            .collect()
    }

    pub fn block_offset(&self, block: usize) -> usize {
        self.inner.dims[..block].iter().map(|n| n * n).sum()
    }

    pub fn basis_index(&self, block: usize, i: usize, j: usize) -> usize {
        self.block_offset(block) + i * self.inner.dims[block] + j
    }

    pub(crate) fn ensure_same(&self, other: &BlockAlgebra) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!(
                "algebra {:?} does not match {:?}",
                self.inner.dims, other.inner.dims
            )));
        }
        Ok(())
    }

    fn check_blocks(&self, blocks: &[CMat], what: &str) -> Result<()> {
        if blocks.len() != self.num_blocks() {
            return Err(Error::Shape(format!(
                "{what}: {} blocks given for an algebra with {}",
                blocks.len(),
                self.num_blocks()
            )));
        }
        for (k, (b, &n)) in blocks.iter().zip(self.dims()).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::Shape(format!(
                    "{what}: block {k} is {}x{}, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Parse(format!(
                    "{what}: block {k} has a non-finite entry"
                )));
            }
        }
        Ok(())
    }
}

/// An element of a block algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    algebra: BlockAlgebra,
    blocks: Vec<CMat>,
}

impl BlockOperator {
    pub fn new(algebra: &BlockAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        algebra.check_blocks(&blocks, "operator")?;
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }

    /// Central element `⊕ c_k·1`.
    pub fn central(algebra: &BlockAlgebra, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != algebra.num_blocks() {
            return Err(Error::Shape("one coefficient per block expected".into()));
        }
        let blocks = algebra
            .dims()
            .iter()
            .zip(coeffs)
            .map(|(&n, &c)| CMat::identity(n, n) * c)
            .collect();
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    pub fn adjoint(&self) -> Self {
        self.map(|b| b.adjoint())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|b| b * c)
    }

    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Self> {
        self.algebra.ensure_same(&other.algebra)?;
        Ok(Self {
            algebra: self.algebra.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Largest entrywise modulus over all blocks.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    pub fn is_projection(&self, eps: f64) -> bool {
        self.blocks
            .iter()
            .all(|p| linalg::max_abs(&(p * p - p)) <= eps && linalg::hermiticity_defect(p) <= eps)
    }

    /// Coordinates in the matrix-unit basis.
    pub fn coordinates(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.algebra.dimension());
        for b in &self.blocks {
            for i in 0..b.nrows() {
                for j in 0..b.ncols() {
                    out.push(b[(i, j)]);
                }
            }
        }
        out
    }

    pub fn from_coordinates(algebra: &BlockAlgebra, coords: &[Complex64]) -> Result<Self> {
        if coords.len() != algebra.dimension() {
            return Err(Error::Shape(format!(
                "{} coordinates for an algebra of dimension {}",
                coords.len(),
                algebra.dimension()
            )));
        }
        let mut it = coords.iter().copied();
        let blocks = algebra
            .dims()
            .iter()
            .map(|&n| CMat::from_fn(n, n, |_, _| Complex64::default()))
            .map(|mut b| {
                for i in 0..b.nrows() {
                    for j in 0..b.ncols() {
                        b[(i, j)] = it.next().unwrap();
                    }
                }
                b
            })
            .collect();
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }
}

impl Mul for &BlockOperator {
    type Output = BlockOperator;

    /// Panics when the algebras differ; use [`BlockOperator::checked_mul`]
    /// for a fallible product.
    fn mul(self, rhs: Self) -> BlockOperator {
        self.checked_mul(rhs)
            .expect("operator product across algebras")
    }
}

impl Add for &BlockOperator {
    type Output = BlockOperator;

    fn add(self, rhs: Self) -> BlockOperator {
        self.checked_add(rhs).expect("operator sum across algebras")
    }
}

impl Sub for &BlockOperator {
    type Output = BlockOperator;

    fn sub(self, rhs: Self) -> BlockOperator {
        self.checked_sub(rhs)
            .expect("operator difference across algebras")
    }
}

/// How two positive functionals sit relative to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRelation {
    /// Central supports are orthogonal.
    Disjoint,
    /// Central supports coincide.
    QuasiEquivalent,
    Neither,
}

/// A Hermitian functional `x ↦ Σ_k Tr(D_k x_k)`.
///
/// Construction only enforces hermiticity, so differences `φ − ψ` are
/// representable; operations that need positivity check it themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    algebra: BlockAlgebra,
    densities: Vec<CMat>,
}

impl Functional {
    pub fn new(algebra: &BlockAlgebra, densities: Vec<CMat>) -> Result<Self> {
        algebra.check_blocks(&densities, "functional")?;
        let tol = algebra.tolerances();
        let densities = densities
            .iter()
            .map(|d| linalg::check_hermitian(d, tol).map(|_| linalg::hermitize(d)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            algebra: algebra.clone(),
            densities,
        })
    }

    /// As [`Functional::new`], additionally rejecting non-positive densities.
    pub fn positive(algebra: &BlockAlgebra, densities: Vec<CMat>) -> Result<Self> {
        let f = Self::new(algebra, densities)?;
        f.spectra_checked()?;
        Ok(f)
    }

    /// Functional with diagonal densities given block by block.
    pub fn diagonal(algebra: &BlockAlgebra, diagonals: &[Vec<f64>]) -> Result<Self> {
        if diagonals.len() != algebra.num_blocks() {
            return Err(Error::Shape("one diagonal per block expected".into()));
        }
        let densities = diagonals
            .iter()
            .map(|d| {
                CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                    d.len(),
                    d.iter().map(|&x| linalg::real(x)),
                ))
            })
            .collect();
        Self::new(algebra, densities)
    }

    pub fn zero(algebra: &BlockAlgebra) -> Self {
        Self {
            algebra: algebra.clone(),
            densities: algebra.dims().iter().map(|&n| CMat::zeros(n, n)).collect(),
        }
    }

    /// The state `x ↦ Σ_k Tr(x_k) / Σ_k n_k`.
    pub fn normalized_trace(algebra: &BlockAlgebra) -> Self {
        let total = algebra.hilbert_dim() as f64;
        Self {
            algebra: algebra.clone(),
            densities: algebra
                .dims()
                .iter()
                .map(|&n| CMat::identity(n, n).scale(1.0 / total))
                .collect(),
        }
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn densities(&self) -> &[CMat] {
        &self.densities
    }

    pub fn density(&self, k: usize) -> &CMat {
        &self.densities[k]
    }

    pub fn tolerances(&self) -> &Tolerances {
        self.algebra.tolerances()
    }

    /// `φ(x)`.
    pub fn evaluate(&self, x: &BlockOperator) -> Result<Complex64> {
        self.algebra.ensure_same(x.algebra())?;
        Ok(self
            .densities
            .iter()
            .zip(x.blocks())
            .map(|(d, b)| linalg::hs_inner(&d.adjoint(), b))
            .sum())
    }

    /// `φ(1)`.
    pub fn mass(&self) -> f64 {
        self.densities.iter().map(|d| linalg::trace(d).re).sum()
    }

    /// Norm in the predual: total trace norm of the densities.
    pub fn norm(&self) -> f64 {
        self.densities
            .iter()
            .map(linalg::hermitian_trace_norm)
            .sum()
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Self> {
        self.algebra.ensure_same(&other.algebra)?;
        Ok(Self {
            algebra: self.algebra.clone(),
            densities: self
                .densities
                .iter()
                .zip(&other.densities)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            algebra: self.algebra.clone(),
            densities: self.densities.iter().map(|d| d.scale(s)).collect(),
        }
    }

    /// `φ / φ(1)`; the zero functional is returned unchanged.
    pub fn normalized(&self) -> Self {
        let m = self.mass();
        if m > 0.0 {
            self.scale(1.0 / m)
        } else {
            self.clone()
        }
    }

    /// Same densities on a retuned copy of the algebra.
    pub fn with_tolerances(&self, tol: Tolerances) -> Self {
        Self {
            algebra: self.algebra.retuned(tol),
            densities: self.densities.clone(),
        }
    }

    /// Per-block spectra without any positivity check.
    pub fn spectra(&self) -> Vec<Eigh> {
        self.densities.iter().map(linalg::eigh).collect()
    }

    /// Per-block spectra, failing with `NotPositive` when some eigenvalue is
    /// below `-τ_psd` (scaled by the largest eigenvalue over all blocks).
    pub fn spectra_checked(&self) -> Result<Vec<Eigh>> {
        let spectra = self.spectra();
        let lmax = global_max(&spectra);
        let tolerance = self.tolerances().psd(lmax);
        for e in &spectra {
            if e.min() < -tolerance {
                return Err(Error::NotPositive {
                    min_eigenvalue: e.min(),
                    tolerance,
                });
            }
        }
        Ok(spectra)
    }

    pub fn is_positive(&self) -> bool {
        self.spectra_checked().is_ok()
    }

    /// Eigenvalues at or below this count as zero for every block. The
    /// dimension factor is `Σ n_k²`, the side of the Gram matrices of the
    /// forms this functional induces, so both views cut at the same level.
    pub(crate) fn rank_cut(&self, spectra: &[Eigh]) -> f64 {
        self.tolerances()
            .rank(self.algebra.dimension(), global_max(spectra))
    }

    /// Numerical rank of each block density.
    pub fn ranks(&self) -> Result<Vec<usize>> {
        let spectra = self.spectra_checked()?;
        let cut = self.rank_cut(&spectra);
        Ok(spectra
            .iter()
            .map(|e| e.values.iter().filter(|&&v| v > cut).count())
            .collect())
    }

    /// Blockwise `D_k^s` with eigenvalues under the rank cut sent to zero.
    pub fn density_power(&self, s: f64) -> Result<Vec<CMat>> {
        let spectra = self.spectra_checked()?;
        let cut = self.rank_cut(&spectra);
        Ok(spectra
            .iter()
            .map(|e| linalg::power_of(e, s, cut))
            .collect())
    }

    /// Smallest projection `p` with `φ(1 − p) = 0`.
    pub fn support_projection(&self) -> Result<BlockOperator> {
        let spectra = self.spectra_checked()?;
        let cut = self.rank_cut(&spectra);
        Ok(BlockOperator {
            algebra: self.algebra.clone(),
            blocks: spectra
                .iter()
                .map(|e| e.map(|v| if v > cut { 1.0 } else { 0.0 }))
                .collect(),
        })
    }

    /// Central cover of the support: identity on every block where the
    /// density has positive rank.
    pub fn central_support(&self) -> Result<BlockOperator> {
        let ranks = self.ranks()?;
        let coeffs: Vec<Complex64> = ranks
            .iter()
            .map(|&r| linalg::real(if r > 0 { 1.0 } else { 0.0 }))
            .collect();
        BlockOperator::central(&self.algebra, &coeffs)
    }

    /// Indicator of the blocks carrying the functional.
    pub fn central_blocks(&self) -> Result<Vec<bool>> {
        Ok(self.ranks()?.into_iter().map(|r| r > 0).collect())
    }

    pub fn is_faithful(&self) -> Result<bool> {
        Ok(self
            .ranks()?
            .iter()
            .zip(self.algebra.dims())
            .all(|(r, n)| r == n))
    }

    /// Index of the first block where the support is not full.
    pub fn ensure_faithful(&self) -> Result<()> {
        for (block, (&rank, &dim)) in self.ranks()?.iter().zip(self.algebra.dims()).enumerate() {
            if rank < dim {
                return Err(Error::NotFaithful { block, rank, dim });
            }
        }
        Ok(())
    }

    /// Total rank one.
    pub fn is_pure(&self) -> Result<bool> {
        Ok(self.ranks()?.iter().sum::<usize>() == 1)
    }
}

fn global_max(spectra: &[Eigh]) -> f64 {
    spectra.iter().map(Eigh::max_abs).fold(0.0, f64::max)
}

/// Disjoint when central supports are orthogonal, quasi-equivalent when
/// they coincide. Two zero functionals are reported as disjoint.
pub fn classify_pair(phi: &Functional, psi: &Functional) -> Result<PairRelation> {
    phi.algebra.ensure_same(&psi.algebra)?;
    let a = phi.central_blocks()?;
    let b = psi.central_blocks()?;
    if a.iter().zip(&b).all(|(x, y)| !(*x && *y)) {
        Ok(PairRelation::Disjoint)
    } else if a == b {
        Ok(PairRelation::QuasiEquivalent)
    } else {
        Ok(PairRelation::Neither)
    }
}

/// A vector of the Hilbert–Schmidt space `L²(M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct L2Vector {
    algebra: BlockAlgebra,
    blocks: Vec<CMat>,
}

impl L2Vector {
    pub fn new(algebra: &BlockAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        algebra.check_blocks(&blocks, "L2 vector")?;
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }

    pub fn zero(algebra: &BlockAlgebra) -> Self {
        Self {
            algebra: algebra.clone(),
            blocks: algebra.dims().iter().map(|&n| CMat::zeros(n, n)).collect(),
        }
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.algebra.ensure_same(&other.algebra)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::hs_inner(a, b))
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// `x·ξ`.
    pub fn left_mul(&self, x: &BlockOperator) -> Result<Self> {
        self.algebra.ensure_same(x.algebra())?;
        Ok(self.with_blocks(
            self.blocks
                .iter()
                .zip(x.blocks())
                .map(|(v, a)| a * v)
                .collect(),
        ))
    }

    /// `ξ·x`.
    pub fn right_mul(&self, x: &BlockOperator) -> Result<Self> {
        self.algebra.ensure_same(x.algebra())?;
        Ok(self.with_blocks(
            self.blocks
                .iter()
                .zip(x.blocks())
                .map(|(v, a)| v * a)
                .collect(),
        ))
    }

    /// `ξ*`.
    pub fn adjoint(&self) -> Self {
        self.with_blocks(self.blocks.iter().map(|b| b.adjoint()).collect())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.algebra.ensure_same(&other.algebra)?;
        Ok(self.with_blocks(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.algebra.ensure_same(&other.algebra)?;
        Ok(self.with_blocks(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.with_blocks(self.blocks.iter().map(|b| b * c).collect())
    }

    fn with_blocks(&self, blocks: Vec<CMat>) -> Self {
        Self {
            algebra: self.algebra.clone(),
            blocks,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use approx::assert_abs_diff_eq;

    fn diag(alg: &BlockAlgebra, d: &[&[f64]]) -> Functional {
        Functional::diagonal(alg, &d.iter().map(|v| v.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn algebra_construction() {
        assert_eq!(make_algebra(&[2]).unwrap().dimension(), 4);
        assert_eq!(make_algebra(&[2, 3]).unwrap().dimension(), 13);
        assert!(make_algebra(&[1, 1]).unwrap().is_commutative());
        assert!(matches!(make_algebra(&[]), Err(Error::InvalidAlgebra(_))));
        assert!(matches!(
            make_algebra(&[2, 0]),
            Err(Error::InvalidAlgebra(_))
        ));
    }

    #[test]
    fn basis_order_is_block_then_row_major() {
        let alg = make_algebra(&[2, 3]).unwrap();
        let labels = alg.basis_labels();
        assert_eq!(labels[0], (0, 0, 0));
        assert_eq!(labels[1], (0, 0, 1));
        assert_eq!(labels[2], (0, 1, 0));
        assert_eq!(labels[4], (1, 0, 0));
        assert_eq!(alg.basis_index(1, 2, 1), 4 + 7);
        let x = alg.matrix_unit(1, 2, 1);
        let back = BlockOperator::from_coordinates(&alg, &x.coordinates()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn evaluate_examples() {
        let m2 = make_algebra(&[2]).unwrap();
        let phi = diag(&m2, &[&[0.9, 0.1]]);
        assert_abs_diff_eq!(
            phi.evaluate(&m2.identity()).unwrap().re,
            1.0,
            epsilon = 1e-15
        );
        let x = BlockOperator::central(&m2, &[real(1.0)]).unwrap();
        let z = &x - &m2.matrix_unit(0, 1, 1).scale(real(2.0));
        assert_abs_diff_eq!(phi.evaluate(&z).unwrap().re, 0.8, epsilon = 1e-15);

        let m23 = make_algebra(&[2, 3]).unwrap();
        let psi = diag(&m23, &[&[1.0, 0.0], &[0.0, 0.0, 0.0]]);
        let y = BlockOperator::central(&m23, &[real(0.0), real(1.0)]).unwrap();
        assert_eq!(psi.evaluate(&y).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn evaluate_rejects_other_algebra() {
        let phi = Functional::normalized_trace(&make_algebra(&[2]).unwrap());
        let x = make_algebra(&[3]).unwrap().identity();
        assert!(matches!(phi.evaluate(&x), Err(Error::Shape(_))));
    }

    #[test]
    fn norm_examples() {
        let m2 = make_algebra(&[2]).unwrap();
        let phi = diag(&m2, &[&[0.9, 0.1]]);
        let psi = diag(&m2, &[&[0.5, 0.5]]);
        assert_abs_diff_eq!(phi.checked_sub(&psi).unwrap().norm(), 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(phi.checked_sub(&phi).unwrap().norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn supports() {
        let m3 = make_algebra(&[3]).unwrap();
        let phi = diag(&m3, &[&[0.5, 0.5, 0.0]]);
        let p = phi.support_projection().unwrap();
        let expected = diag(&m3, &[&[1.0, 1.0, 0.0]]);
        assert!(linalg::max_abs(&(p.block(0) - expected.density(0))) < 1e-14);

        let m2 = make_algebra(&[2]).unwrap();
        let v = CMat::from_fn(2, 2, |_, _| real(0.5));
        let plus = Functional::new(&m2, vec![v.clone()]).unwrap();
        let p = plus.support_projection().unwrap();
        assert!(linalg::max_abs(&(p.block(0) - v)) < 1e-14);
        assert!(plus.is_pure().unwrap());

        let faithful = Functional::normalized_trace(&m2);
        let p = faithful.support_projection().unwrap();
        assert!(linalg::max_abs(&(p.block(0) - CMat::identity(2, 2))) < 1e-14);
        assert!(!faithful.is_pure().unwrap());
    }

    #[test]
    fn central_supports() {
        let alg = make_algebra(&[2, 3]).unwrap();
        let phi = diag(&alg, &[&[0.3, 0.7], &[0.0, 0.0, 0.0]]);
        let z = phi.central_support().unwrap();
        assert_eq!(z.block(0), &CMat::identity(2, 2));
        assert_eq!(z.block(1), &CMat::zeros(3, 3));
        let z = Functional::normalized_trace(&alg)
            .central_support()
            .unwrap();
        assert_eq!(z, alg.identity());
        assert_eq!(
            Functional::zero(&alg).central_support().unwrap(),
            alg.zero()
        );
    }

    #[test]
    fn pair_classification() {
        let alg = make_algebra(&[2, 2]).unwrap();
        let a = diag(&alg, &[&[0.6, 0.4], &[0.0, 0.0]]);
        let b = diag(&alg, &[&[0.0, 0.0], &[0.2, 0.8]]);
        assert_eq!(classify_pair(&a, &b).unwrap(), PairRelation::Disjoint);
        assert_eq!(classify_pair(&b, &a).unwrap(), PairRelation::Disjoint);
        let c = diag(&alg, &[&[0.3, 0.2], &[0.1, 0.4]]);
        assert_eq!(classify_pair(&a, &c).unwrap(), PairRelation::Neither);

        let m2 = make_algebra(&[2]).unwrap();
        let f1 = diag(&m2, &[&[0.9, 0.1]]);
        let f2 = diag(&m2, &[&[0.5, 0.5]]);
        assert_eq!(
            classify_pair(&f1, &f2).unwrap(),
            PairRelation::QuasiEquivalent
        );
    }

    #[test]
    fn positivity_errors() {
        let m2 = make_algebra(&[2]).unwrap();
        let bad = diag(&m2, &[&[0.5, -0.5]]);
        assert!(matches!(
            bad.support_projection(),
            Err(Error::NotPositive { .. })
        ));
        assert!(matches!(
            bad.central_support(),
            Err(Error::NotPositive { .. })
        ));
        assert!(matches!(
            Functional::positive(&m2, bad.densities().to_vec()),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let m1 = make_algebra(&[1]).unwrap();
        let d = CMat::from_element(1, 1, Complex64::new(f64::NAN, 0.0));
        assert!(matches!(
            Functional::new(&m1, vec![d]),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn l2_inner_product() {
        let m2 = make_algebra(&[2]).unwrap();
        let a = L2Vector::new(&m2, vec![CMat::identity(2, 2)]).unwrap();
        let b = a.left_mul(&m2.matrix_unit(0, 0, 1)).unwrap();
        assert_eq!(a.inner(&a).unwrap(), real(2.0));
        assert_eq!(a.inner(&b).unwrap(), real(0.0));
        assert_abs_diff_eq!(a.norm(), 2f64.sqrt(), epsilon = 1e-15);
    }
}
