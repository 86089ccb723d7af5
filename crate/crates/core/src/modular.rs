//! Modular operators, modular conjugation and modular flow on the
//! Hilbert–Schmidt space of a block algebra.
//!
//! A [`Superoperator`] stores, per block, the `n² × n²` matrix acting on
//! column-stacked `vec(ξ)`. Antilinear maps carry a flag and act as
//! `vec(ξ) ↦ M · conj(vec(ξ))`.

use num_complex::Complex64;

use crate::algebra::{BlockAlgebra, BlockOperator, Functional, L2Vector};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Eigh};

#[derive(Clone, Debug)]
pub struct Superoperator {
    algebra: BlockAlgebra,
    blocks: Vec<CMat>,
    antilinear: bool,
    /// Per-block eigendecomposition in product form; present for relative
    /// modular operators and used by the functional calculus.
    spectral: Option<Vec<Eigh>>,
}

impl PartialEq for Superoperator {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra
            && self.blocks == other.blocks
            && self.antilinear == other.antilinear
    }
}

impl Superoperator {
    pub fn identity(alg: &BlockAlgebra) -> Self {
        Self {
            algebra: alg.clone(),
            blocks: alg
                .dims()
                .iter()
                .map(|&n| CMat::identity(n * n, n * n))
                .collect(),
            antilinear: false,
            spectral: None,
        }
    }

    /// `ξ ↦ L ξ R` blockwise; its matrix on `vec(ξ)` is `Rᵀ ⊗ L`.
    pub fn sandwich(alg: &BlockAlgebra, left: &[CMat], right: &[CMat]) -> Result<Self> {
        if left.len() != alg.num_blocks() || right.len() != alg.num_blocks() {
            return Err(Error::Shape(
                "one left and one right factor per block".into(),
            ));
        }
        let blocks = left
            .iter()
            .zip(right)
            .zip(alg.dims())
            .map(|((l, r), &n)| {
                if l.shape() != (n, n) || r.shape() != (n, n) {
                    return Err(Error::Shape(format!("sandwich factors must be {n}x{n}")));
                }
                Ok(linalg::kron(&r.transpose(), l))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            algebra: alg.clone(),
            blocks,
            antilinear: false,
            spectral: None,
        })
    }

    /// The antilinear involution `ξ ↦ ξ*`.
    pub fn adjoint_map(alg: &BlockAlgebra) -> Self {
        // vec(ξ*) = K conj(vec ξ) with K the vec-transpose permutation
        let blocks = alg
            .dims()
            .iter()
            .map(|&n| {
                let mut k = CMat::zeros(n * n, n * n);
                for i in 0..n {
                    for j in 0..n {
                        k[(j + i * n, i + j * n)] = linalg::real(1.0);
                    }
                }
                k
            })
            .collect();
        Self {
            algebra: alg.clone(),
            blocks,
            antilinear: true,
            spectral: None,
        }
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn matrix(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    pub fn is_antilinear(&self) -> bool {
        self.antilinear
    }

    pub fn apply(&self, xi: &L2Vector) -> Result<L2Vector> {
        self.algebra.ensure_same(xi.algebra())?;
        let blocks = self
            .blocks
            .iter()
            .zip(xi.blocks())
            .map(|(m, b)| {
                let mut v = linalg::vec_cols(b);
                if self.antilinear {
                    v = v.conjugate();
                }
                linalg::unvec_cols(&(m * v), b.nrows(), b.ncols())
            })
            .collect();
        L2Vector::new(&self.algebra, blocks)
    }

    /// `self ∘ other`; antilinearity composes as exclusive or.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.algebra.ensure_same(&other.algebra)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| {
                if self.antilinear {
                    a * b.conjugate()
                } else {
                    a * b
                }
            })
            .collect();
        Ok(Self {
            algebra: self.algebra.clone(),
            blocks,
            antilinear: self.antilinear ^ other.antilinear,
            spectral: None,
        })
    }

    fn hermitian_calculus(&self, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if self.antilinear {
            return Err(Error::Domain(
                "functional calculus of an antilinear map".into(),
            ));
        }
        let tol = self.algebra.tolerances();
        let spectra = match &self.spectral {
            Some(spectra) => spectra.clone(),
            None => self
                .blocks
                .iter()
                .map(|m| linalg::check_psd(m, tol))
                .collect::<Result<Vec<_>>>()?,
        };
        let blocks = spectra
            .iter()
            .map(|e| {
                let cut = linalg::rank_cut(e, tol);
                e.map_complex(|v| if v > cut { f(v) } else { Complex64::default() })
            })
            .collect();
        Ok(Self {
            algebra: self.algebra.clone(),
            blocks,
            antilinear: false,
            spectral: None,
        })
    }

    /// `T^s` of a positive linear superoperator, via its own spectrum.
    pub fn power(&self, s: f64) -> Result<Self> {
        self.hermitian_calculus(|v| linalg::real(v.powf(s)))
    }

    /// `T^{it}` of a positive linear superoperator (zero off the support).
    pub fn imaginary_power(&self, t: f64) -> Result<Self> {
        self.hermitian_calculus(|v| Complex64::from_polar(1.0, t * v.ln()))
    }
}

/// `Δ_{ψ,φ}: ξ ↦ D_ψ ξ D_φ^{-1}`, so that `Δ^{1/2}(x φ^{1/2}) = ψ^{1/2} x`.
pub fn relative_modular(psi: &Functional, phi: &Functional) -> Result<Superoperator> {
    relative_modular_power(psi, phi, 1.0)
}

/// `Δ_{ψ,φ}^s: ξ ↦ D_ψ^s ξ D_φ^{-s}` for real `s > 0`, built from the
/// densities' own spectra.
pub fn relative_modular_power(psi: &Functional, phi: &Functional, s: f64) -> Result<Superoperator> {
    phi.algebra().ensure_same(psi.algebra())?;
    phi.ensure_faithful()?;
    let left = psi.density_power(s)?;
    let right = phi.density_power(-s)?;
    let mut op = Superoperator::sandwich(phi.algebra(), &left, &right)?;
    // eigenvectors conj(v_j) ⊗ u_i with eigenvalue λ_i^s ρ_j^{-s}
    let left_spectra = psi.spectra_checked()?;
    let right_spectra = phi.spectra_checked()?;
    let left_cut = psi.rank_cut(&left_spectra);
    let right_cut = phi.rank_cut(&right_spectra);
    let spectral = left_spectra
        .iter()
        .zip(&right_spectra)
        .map(|(l, r)| {
            let vectors = linalg::kron(&r.vectors.conjugate(), &l.vectors);
            let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(l.dim() * r.dim());
            for (j, &rho) in r.values.iter().enumerate() {
                for (i, &lam) in l.values.iter().enumerate() {
                    let v = if lam > left_cut && rho > right_cut {
                        lam.powf(s) * rho.powf(-s)
                    } else {
                        0.0
                    };
                    pairs.push((v, i + j * l.dim()));
                }
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let n = pairs.len();
            Eigh {
                values: pairs.iter().map(|p| p.0).collect(),
                vectors: CMat::from_fn(n, n, |row, col| vectors[(row, pairs[col].1)]),
            }
        })
        .collect();
    op.spectral = Some(spectral);
    Ok(op)
}

/// `J_φ: ξ ↦ ξ*`, with `J(x φ^{1/2}) = φ^{1/2} x*`.
pub fn modular_conjugation(phi: &Functional) -> Result<Superoperator> {
    phi.ensure_faithful()?;
    Ok(Superoperator::adjoint_map(phi.algebra()))
}

/// `D^{iz}` per block for complex `z`, computed in the eigenbasis.
fn density_complex_power(phi: &Functional, z: Complex64) -> Result<Vec<CMat>> {
    phi.ensure_faithful()?;
    let i = Complex64::new(0.0, 1.0);
    Ok(phi
        .spectra()
        .iter()
        .map(|e| e.map_complex(|v| (i * z * v.ln()).exp()))
        .collect())
}

/// `σ_z(x) = D^{iz} x D^{-iz}` for complex `z`; real `z` gives the modular
/// automorphism group.
pub fn analytic_flow(phi: &Functional, z: Complex64, x: &BlockOperator) -> Result<BlockOperator> {
    phi.algebra().ensure_same(x.algebra())?;
    let fwd = density_complex_power(phi, z)?;
    let back = density_complex_power(phi, -z)?;
    let blocks = fwd
        .iter()
        .zip(&back)
        .zip(x.blocks())
        .map(|((u, v), b)| u * b * v)
        .collect();
    BlockOperator::new(phi.algebra(), blocks)
}

/// `σ_t(x) = D_φ^{it} x D_φ^{-it}`.
pub fn modular_flow(phi: &Functional, t: f64, x: &BlockOperator) -> Result<BlockOperator> {
    analytic_flow(phi, Complex64::new(t, 0.0), x)
}

/// `|φ(x σ_{t−i}(y)) − φ(σ_t(y) x)|` for the modular flow of `φ`.
pub fn kms_defect(phi: &Functional, x: &BlockOperator, y: &BlockOperator, t: f64) -> Result<f64> {
    kms_defect_against(phi, phi, x, y, t)
}

/// KMS boundary defect of the flow of `flow_of` evaluated in `state`:
/// `|ω(x σ_{t−i}(y)) − ω(σ_t(y) x)|`.
pub fn kms_defect_against(
    flow_of: &Functional,
    state: &Functional,
    x: &BlockOperator,
    y: &BlockOperator,
    t: f64,
) -> Result<f64> {
    flow_of.algebra().ensure_same(state.algebra())?;
    let shifted = analytic_flow(flow_of, Complex64::new(t, -1.0), y)?;
    let real = modular_flow(flow_of, t, y)?;
    let lhs = state.evaluate(&x.checked_mul(&shifted)?)?;
    let rhs = state.evaluate(&real.checked_mul(x)?)?;
    Ok((lhs - rhs).norm())
}

/// Compression `eMe` of the algebra to the support `e` of a functional.
#[derive(Clone, Debug)]
pub struct SupportReduction {
    pub algebra: BlockAlgebra,
    pub functional: Functional,
    /// For every kept block: its index in the original algebra and the
    /// isometry `V` onto the range of its density.
    pub isometries: Vec<(usize, CMat)>,
}

impl SupportReduction {
    /// `x ↦ e x e`, as an element of the reduced algebra.
    pub fn compress(&self, x: &BlockOperator) -> Result<BlockOperator> {
        let blocks = self
            .isometries
            .iter()
            .map(|(k, v)| v.adjoint() * x.block(*k) * v)
            .collect();
        BlockOperator::new(&self.algebra, blocks)
    }

    /// Embeds an element of `eMe` back into `M`.
    pub fn expand(&self, x: &BlockOperator, into: &BlockAlgebra) -> Result<BlockOperator> {
        let mut out = into.zero().into_blocks();
        for ((k, v), b) in self.isometries.iter().zip(x.blocks()) {
            out[*k] = v * b * v.adjoint();
        }
        BlockOperator::new(into, out)
    }
}

pub fn support_reduce(phi: &Functional) -> Result<SupportReduction> {
    let spectra = phi.spectra_checked()?;
    let ranks = phi.ranks()?;
    if ranks.iter().all(|&r| r == 0) {
        return Err(Error::EmptyReduction);
    }
    let cut = phi.rank_cut(&spectra);
    let mut dims = Vec::new();
    let mut densities = Vec::new();
    let mut isometries = Vec::new();
    for (k, e) in spectra.iter().enumerate() {
        if ranks[k] == 0 {
            continue;
        }
        let v = e.columns_above(cut);
        densities.push(linalg::hermitize(&(v.adjoint() * phi.density(k) * &v)));
        dims.push(v.ncols());
        isometries.push((k, v));
    }
    let algebra = BlockAlgebra::with_tolerances(&dims, *phi.tolerances())?;
    let functional = Functional::new(&algebra, densities)?;
    Ok(SupportReduction {
        algebra,
        functional,
        isometries,
    })
}
