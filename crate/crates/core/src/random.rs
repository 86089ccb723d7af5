//! Random instances for property tests and the self-test driver.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{BlockAlgebra, BlockOperator, Functional};
use crate::amplitudes::QuotientMap;
use crate::linalg::{self, CMat};
use crate::quasifree::{CovarianceForm, PresymplecticSpace, RMat};
use crate::restriction::{KrausOp, UcpMap, UnitalEmbedding};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let s = 0.5f64.sqrt();
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(s * gaussian(rng), s * gaussian(rng))
    })
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    linalg::hermitize(&ginibre(rng, n, n))
}

/// `W W*` with `W` an `n × rank` Ginibre matrix.
pub fn psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMat {
    let w = ginibre(rng, n, rank);
    linalg::hermitize(&(&w * w.adjoint()))
}

/// Haar unitary via QR with the phase correction on `R`'s diagonal.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let qr = ginibre(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn operator<R: Rng + ?Sized>(rng: &mut R, alg: &BlockAlgebra) -> BlockOperator {
    let blocks = alg.dims().iter().map(|&n| ginibre(rng, n, n)).collect();
    BlockOperator::new(alg, blocks).expect("shapes follow the algebra")
}

/// Random faithful state.
pub fn faithful_state<R: Rng + ?Sized>(rng: &mut R, alg: &BlockAlgebra) -> Functional {
    let dens = alg.dims().iter().map(|&n| psd(rng, n, n)).collect();
    Functional::new(alg, dens)
        .expect("psd densities")
        .normalized()
}

/// Random state whose block ranks are drawn uniformly from `0..=n_k`
/// (at least one block nonzero), so rank-deficient and block-disjoint
/// instances appear regularly.
pub fn state<R: Rng + ?Sized>(rng: &mut R, alg: &BlockAlgebra) -> Functional {
    let dims = alg.dims();
    let mut ranks: Vec<usize> = dims.iter().map(|&n| rng.random_range(0..=n)).collect();
    if ranks.iter().all(|&r| r == 0) {
        let k = rng.random_range(0..dims.len());
        ranks[k] = rng.random_range(1..=dims[k]);
    }
    state_with_ranks(rng, alg, &ranks)
}

pub fn state_with_ranks<R: Rng + ?Sized>(
    rng: &mut R,
    alg: &BlockAlgebra,
    ranks: &[usize],
) -> Functional {
    let dens = alg
        .dims()
        .iter()
        .zip(ranks)
        .map(|(&n, &r)| psd(rng, n, r.min(n)))
        .collect();
    Functional::new(alg, dens)
        .expect("psd densities")
        .normalized()
}

/// Gibbs state `e^{-βH}/Z` on `M_n` for a random Hermitian `H`.
pub fn gibbs_state<R: Rng + ?Sized>(rng: &mut R, alg: &BlockAlgebra, beta: f64) -> Functional {
    let dens = alg
        .dims()
        .iter()
        .map(|&n| {
            let e = linalg::eigh(&hermitian(rng, n));
            e.map(|v| (-beta * v).exp())
        })
        .collect();
    Functional::new(alg, dens)
        .expect("gibbs densities")
        .normalized()
}

/// Random probability vector with strictly positive entries.
pub fn distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// First `cols` columns of a Haar unitary on `ℂ^rows`.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    unitary(rng, rows).columns(0, cols).into_owned()
}

/// Random unital embedding of `source` into a target with up to three
/// blocks, multiplicities in `0..=max_copies` and Haar unitaries.
pub fn embedding<R: Rng + ?Sized>(
    rng: &mut R,
    source: &BlockAlgebra,
    max_copies: usize,
) -> UnitalEmbedding {
    let m = source.num_blocks();
    let max_copies = max_copies.max(1);
    let blocks = rng.random_range(1..=3);
    let mut mult: Vec<Vec<usize>> = (0..blocks)
        .map(|_| (0..m).map(|_| rng.random_range(0..=max_copies)).collect())
        .collect();
    for row in mult.iter_mut() {
        if row.iter().all(|&c| c == 0) {
            row[rng.random_range(0..m)] = 1;
        }
    }
    for l in 0..m {
        if mult.iter().all(|row| row[l] == 0) {
            let k = rng.random_range(0..blocks);
            mult[k][l] = 1;
        }
    }
    let dims: Vec<usize> = mult
        .iter()
        .map(|row| row.iter().zip(source.dims()).map(|(c, n)| c * n).sum())
        .collect();
    let target =
        BlockAlgebra::with_tolerances(&dims, *source.tolerances()).expect("positive sizes");
    let us = dims.iter().map(|&n| unitary(rng, n)).collect();
    UnitalEmbedding::new(source, &target, mult, Some(us)).expect("valid by construction")
}

/// Random UCP map: each target block draws source blocks until their
/// sizes cover it and splits a Haar isometry into Kraus operators.
pub fn ucp_map<R: Rng + ?Sized>(
    rng: &mut R,
    source: &BlockAlgebra,
    target: &BlockAlgebra,
) -> UcpMap {
    let mut kraus = Vec::new();
    for (k, &nk) in target.dims().iter().enumerate() {
        let mut picks = Vec::new();
        let mut rows = 0;
        while rows < nk || picks.is_empty() || rng.random_bool(0.3) {
            let l = rng.random_range(0..source.num_blocks());
            picks.push(l);
            rows += source.dims()[l];
        }
        let v = isometry(rng, rows, nk);
        let mut at = 0;
        for l in picks {
            let ml = source.dims()[l];
            kraus.push(KrausOp {
                source_block: l,
                target_block: k,
                matrix: v.rows(at, ml).into_owned(),
            });
            at += ml;
        }
    }
    UcpMap::new(source, target, kraus).expect("isometric Kraus family")
}

/// Random surjection onto a nonempty subset of the blocks, in random order.
pub fn quotient<R: Rng + ?Sized>(rng: &mut R, source: &BlockAlgebra) -> QuotientMap {
    let mut kept: Vec<usize> = (0..source.num_blocks())
        .filter(|_| rng.random_bool(0.6))
        .collect();
    if kept.is_empty() {
        kept.push(rng.random_range(0..source.num_blocks()));
    }
    for i in (1..kept.len()).rev() {
        kept.swap(i, rng.random_range(0..=i));
    }
    let dims: Vec<usize> = kept.iter().map(|&k| source.dims()[k]).collect();
    let image = BlockAlgebra::with_tolerances(&dims, *source.tolerances()).expect("positive sizes");
    QuotientMap::new(source, &image, kept).expect("valid by construction")
}

/// Haar-like real orthogonal matrix.
pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RMat {
    let g = RMat::from_fn(n, n, |_, _| gaussian(rng));
    let (q, r) = g.qr().unpack();
    let signs = RMat::from_diagonal(&r.diagonal().map(|d| if d < 0.0 { -1.0 } else { 1.0 }));
    q * signs
}

/// Valid pair of covariance forms on `ℝ^d` that both vanish on a hidden
/// subspace of dimension `d − support`, returned with an orthogonal basis
/// whose last `d − support` columns span that kernel.
pub fn quasifree_pair<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    support: usize,
) -> (PresymplecticSpace, CovarianceForm, CovarianceForm, RMat) {
    let m = support.min(d);
    let raw = RMat::from_fn(m, m, |_, _| gaussian(rng));
    let sigma_small = &raw - raw.transpose();
    // row-sum norm bounds the spectrum of iσ
    let spread = (0..m)
        .map(|j| sigma_small.column(j).abs().sum())
        .fold(0.0, f64::max);
    let make = |rng: &mut R| {
        let w = RMat::from_fn(m, m, |_, _| gaussian(rng));
        let g = &w * w.transpose() + RMat::identity(m, m) * spread;
        CMat::from_fn(m, m, |i, j| {
            num_complex::Complex64::new(g[(i, j)], sigma_small[(i, j)]) * 0.5
        })
    };
    let s_small = make(rng);
    let t_small = make(rng);
    let o = orthogonal(rng, d);
    let oc = o.map(linalg::real);
    let lift = |small: &CMat| {
        let mut big = CMat::zeros(d, d);
        big.view_mut((0, 0), (m, m)).copy_from(small);
        linalg::hermitize(&(&oc * big * oc.transpose()))
    };
    let mut sigma_big = RMat::zeros(d, d);
    sigma_big.view_mut((0, 0), (m, m)).copy_from(&sigma_small);
    let sigma = &o * sigma_big * o.transpose();
    let sigma = (&sigma - sigma.transpose()) * 0.5;
    let s = lift(&s_small);
    let t = lift(&t_small);
    // keep Im S = σ/2 exactly
    let pin = |c: CMat| {
        CMat::from_fn(d, d, |i, j| {
            num_complex::Complex64::new(c[(i, j)].re, sigma[(i, j)] / 2.0)
        })
    };
    let space = PresymplecticSpace::new(sigma.clone()).expect("antisymmetric");
    (
        space,
        CovarianceForm::new(pin(s)).expect("square"),
        CovarianceForm::new(pin(t)).expect("square"),
        o,
    )
}
