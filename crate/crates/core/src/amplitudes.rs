//! Square-root vectors and the transition amplitude `(φ^{1/2}|ψ^{1/2})`.
//!
//! On a block algebra the amplitude is `Σ_k Tr(D_{φ,k}^{1/2} D_{ψ,k}^{1/2})`
//! and the Uhlmann transition probability is the squared total trace norm
//! of `D_{φ,k}^{1/2} D_{ψ,k}^{1/2}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{BlockAlgebra, BlockOperator, Functional, L2Vector};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Positive-cone vector `φ^{1/2}`.
pub fn sqrt_vector(phi: &Functional) -> Result<L2Vector> {
    L2Vector::new(phi.algebra(), phi.density_power(0.5)?)
}

/// `(φ^{1/2}|ψ^{1/2})`, clamped at zero.
pub fn transition_amplitude(phi: &Functional, psi: &Functional) -> Result<f64> {
    phi.algebra().ensure_same(psi.algebra())?;
    let a = sqrt_vector(phi)?;
    let b = sqrt_vector(psi)?;
    Ok(a.inner(&b)?.re.max(0.0))
}

/// `⟨φ^{1/2} x* ψ^{1/2} y⟩ = Σ_k Tr(D_{φ,k}^{1/2} x_k* D_{ψ,k}^{1/2} y_k)`.
pub fn amplitude_kernel(
    phi: &Functional,
    psi: &Functional,
    x: &BlockOperator,
    y: &BlockOperator,
) -> Result<Complex64> {
    phi.algebra().ensure_same(psi.algebra())?;
    phi.algebra().ensure_same(x.algebra())?;
    phi.algebra().ensure_same(y.algebra())?;
    let a = phi.density_power(0.5)?;
    let b = psi.density_power(0.5)?;
    Ok(kernel_with_roots(&a, &b, x, y))
}

fn kernel_with_roots(a: &[CMat], b: &[CMat], x: &BlockOperator, y: &BlockOperator) -> Complex64 {
    a.iter()
        .zip(b)
        .zip(x.blocks().iter().zip(y.blocks()))
        .map(|((ra, rb), (xb, yb))| linalg::trace(&(ra * xb.adjoint() * rb * yb)))
        .sum()
}

/// Gram of the amplitude kernel over the matrix-unit basis, obtained by
/// evaluating the kernel on every pair of units.
pub fn amplitude_kernel_gram(phi: &Functional, psi: &Functional) -> Result<CMat> {
    phi.algebra().ensure_same(psi.algebra())?;
    let a = phi.density_power(0.5)?;
    let b = psi.density_power(0.5)?;
    let basis = phi.algebra().basis();
    let d = basis.len();
    Ok(CMat::from_fn(d, d, |i, j| {
        kernel_with_roots(&a, &b, &basis[i], &basis[j])
    }))
}

/// Uhlmann transition probability `P(φ, ψ) = (Σ_k ‖D_{φ,k}^{1/2} D_{ψ,k}^{1/2}‖_1)²`.
pub fn uhlmann_fidelity(phi: &Functional, psi: &Functional) -> Result<f64> {
    phi.algebra().ensure_same(psi.algebra())?;
    let a = phi.density_power(0.5)?;
    let b = psi.density_power(0.5)?;
    let s: f64 = a
        .iter()
        .zip(&b)
        .map(|(x, y)| linalg::trace_norm(&(x * y)))
        .sum();
    Ok(s * s)
}

/// Values and signed defects of the square-root inequalities; every defect
/// is nonnegative up to round-off when the inequalities hold.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    /// `‖φ^{1/2} − ψ^{1/2}‖²`
    pub sqrt_distance_sq: f64,
    /// `‖φ − ψ‖`
    pub norm_distance: f64,
    /// `‖φ^{1/2} − ψ^{1/2}‖ ‖φ^{1/2} + ψ^{1/2}‖`
    pub product_bound: f64,
    pub amplitude: f64,
    pub fidelity: f64,
    /// `‖φ − ψ‖ − ‖φ^{1/2} − ψ^{1/2}‖²`
    pub ps_lower_defect: f64,
    /// `‖φ^{1/2} − ψ^{1/2}‖ ‖φ^{1/2} + ψ^{1/2}‖ − ‖φ − ψ‖`
    pub ps_upper_defect: f64,
    /// `P − amplitude²`
    pub fidelity_lower_defect: f64,
    /// `amplitude − P`; only meaningful for states, `None` otherwise.
    pub fidelity_upper_defect: Option<f64>,
    /// Smallest eigenvalue of `(tφ + (1−t)ψ)^{1/2} − tφ^{1/2} − (1−t)ψ^{1/2}`
    /// over the sampled `t`.
    pub concavity_defect: f64,
}

impl InequalityReport {
    pub fn min_defect(&self) -> f64 {
        [
            self.ps_lower_defect,
            self.ps_upper_defect,
            self.fidelity_lower_defect,
            self.fidelity_upper_defect.unwrap_or(f64::INFINITY),
            self.concavity_defect,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

/// Interior points at which operator concavity of the square root is probed.
pub const CONCAVITY_SAMPLES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

pub fn inequality_suite(phi: &Functional, psi: &Functional) -> Result<InequalityReport> {
    phi.algebra().ensure_same(psi.algebra())?;
    let rp = sqrt_vector(phi)?;
    let rq = sqrt_vector(psi)?;
    let diff = rp.checked_sub(&rq)?;
    let sum = rp.checked_add(&rq)?;
    let sqrt_distance_sq = diff.norm().powi(2);
    let norm_distance = phi.checked_sub(psi)?.norm();
    let product_bound = diff.norm() * sum.norm();
    let amplitude = rp.inner(&rq)?.re.max(0.0);
    let fidelity = uhlmann_fidelity(phi, psi)?;

    let tol = phi.tolerances();
    let states = (phi.mass() - 1.0).abs() <= tol.num && (psi.mass() - 1.0).abs() <= tol.num;

    let mut concavity_defect = f64::INFINITY;
    for &t in &CONCAVITY_SAMPLES {
        let mix = phi.scale(t).checked_add(&psi.scale(1.0 - t))?;
        let rm = sqrt_vector(&mix)?;
        for k in 0..phi.algebra().num_blocks() {
            let gap = rm.block(k) - rp.block(k).scale(t) - rq.block(k).scale(1.0 - t);
            concavity_defect = concavity_defect.min(linalg::eigh(&gap).min());
        }
    }

    Ok(InequalityReport {
        sqrt_distance_sq,
        norm_distance,
        product_bound,
        amplitude,
        fidelity,
        ps_lower_defect: norm_distance - sqrt_distance_sq,
        ps_upper_defect: product_bound - norm_distance,
        fidelity_lower_defect: fidelity - amplitude * amplitude,
        fidelity_upper_defect: states.then_some(amplitude - fidelity),
        concavity_defect,
    })
}

/// Algebra `A ⊗ A°` for `A = ⊕_k M_{n_k}`: blocks `M_{n_k n_l}` ordered
/// lexicographically in `(k, l)`.
pub fn purification_algebra(alg: &BlockAlgebra) -> Result<BlockAlgebra> {
    let dims = alg.dims();
    let prod: Vec<usize> = dims
        .iter()
        .flat_map(|&a| dims.iter().map(move |&b| a * b))
        .collect();
    BlockAlgebra::with_tolerances(&prod, *alg.tolerances())
}

/// The element `a ⊗ b°` of `A ⊗ A°`: block `(k, l)` is `b_lᵀ ⊗ a_k`, which
/// acts on column-stacked `vec(ξ)` as `ξ ↦ a_k ξ b_l`.
pub fn opposite_tensor(a: &BlockOperator, b: &BlockOperator) -> Result<BlockOperator> {
    a.algebra().ensure_same(b.algebra())?;
    let target = purification_algebra(a.algebra())?;
    let blocks = a
        .blocks()
        .iter()
        .flat_map(|ak| {
            b.blocks()
                .iter()
                .map(move |bl| linalg::kron(&bl.transpose(), ak))
        })
        .collect();
    BlockOperator::new(&target, blocks)
}

/// Purification `Φ(a ⊗ b°) = ⟨φ^{1/2} a φ^{1/2} b⟩` of a state on a single
/// full matrix block: the rank-one density `|vec(D^{1/2})⟩⟨vec(D^{1/2})|`.
pub fn purify(phi: &Functional) -> Result<Functional> {
    let blocks = phi.algebra().num_blocks();
    if blocks != 1 {
        return Err(Error::NotFactor(blocks));
    }
    purify_blockwise(phi)
}

/// Purification on an arbitrary block algebra. The `(k, k)` blocks carry
/// `|vec(D_k^{1/2})⟩⟨vec(D_k^{1/2})|`, the off-diagonal `(k, l)` blocks are
/// zero; on a commutative algebra this is the diagonal embedding.
pub fn purify_blockwise(phi: &Functional) -> Result<Functional> {
    let roots = phi.density_power(0.5)?;
    let alg = phi.algebra();
    let target = purification_algebra(alg)?;
    let m = alg.num_blocks();
    let mut densities = Vec::with_capacity(m * m);
    for (k, &nk) in alg.dims().iter().enumerate() {
        for (l, &nl) in alg.dims().iter().enumerate() {
            if k == l {
                let v = linalg::vec_cols(&roots[k]);
                densities.push(&v * v.adjoint());
            } else {
                densities.push(CMat::zeros(nk * nl, nk * nl));
            }
        }
    }
    Functional::new(&target, densities)
}

/// Surjective unital *-homomorphism that keeps the source blocks listed in
/// `assignment` (image block `j` is source block `assignment[j]`) and
/// kills the rest.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    source: BlockAlgebra,
    image: BlockAlgebra,
    assignment: Vec<usize>,
}

impl QuotientMap {
    pub fn new(
        source: &BlockAlgebra,
        image: &BlockAlgebra,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        if assignment.len() != image.num_blocks() {
            return Err(Error::NotQuotient(format!(
                "{} assignments for {} image blocks",
                assignment.len(),
                image.num_blocks()
            )));
        }
        let mut used = vec![false; source.num_blocks()];
        for (j, &s) in assignment.iter().enumerate() {
            if s >= source.num_blocks() {
                return Err(Error::NotQuotient(format!(
                    "image block {j} assigned to missing block {s}"
                )));
            }
            if used[s] {
                return Err(Error::NotQuotient(format!(
                    "source block {s} assigned twice"
                )));
            }
            used[s] = true;
            if source.dims()[s] != image.dims()[j] {
                return Err(Error::NotQuotient(format!(
                    "image block {j} has size {} but source block {s} has size {}",
                    image.dims()[j],
                    source.dims()[s]
                )));
            }
        }
        Ok(Self {
            source: source.clone(),
            image: image.clone(),
            assignment,
        })
    }

    pub fn identity(alg: &BlockAlgebra) -> Self {
        Self {
            source: alg.clone(),
            image: alg.clone(),
            assignment: (0..alg.num_blocks()).collect(),
        }
    }

    pub fn source(&self) -> &BlockAlgebra {
        &self.source
    }

    pub fn image(&self) -> &BlockAlgebra {
        &self.image
    }

    pub fn apply(&self, x: &BlockOperator) -> Result<BlockOperator> {
        self.source.ensure_same(x.algebra())?;
        BlockOperator::new(
            &self.image,
            self.assignment
                .iter()
                .map(|&s| x.block(s).clone())
                .collect(),
        )
    }
}

/// `φ ∘ π`.
pub fn pullback_along_quotient(pi: &QuotientMap, phi: &Functional) -> Result<Functional> {
    pi.image.ensure_same(phi.algebra())?;
    let mut densities: Vec<CMat> = pi
        .source
        .dims()
        .iter()
        .map(|&n| CMat::zeros(n, n))
        .collect();
    for (j, &s) in pi.assignment.iter().enumerate() {
        densities[s] = phi.density(j).clone();
    }
    Functional::new(&pi.source, densities)
}
