//! Discrete central decomposition of functionals over the blocks of the
//! centre, and the matching sum formula for amplitudes.

use serde::Serialize;

use crate::algebra::{BlockAlgebra, Functional};
use crate::amplitudes::transition_amplitude;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// `φ = Σ_k μ_k (dφ/dμ)_k φ_k` with `φ_k` a state on block `k`.
#[derive(Clone, Debug)]
pub struct StateDecomposition {
    algebra: BlockAlgebra,
    weights: Vec<f64>,
    /// `None` exactly where the weight vanishes.
    components: Vec<Option<Functional>>,
    densities: Vec<f64>,
}

impl StateDecomposition {
    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Option<Functional>] {
        &self.components
    }

    /// Radon–Nikodym derivative `(dφ/dμ)_k = Tr D_k / μ_k`, zero off the
    /// support of `μ`.
    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn reassemble(&self) -> Result<Functional> {
        let dens = self
            .components
            .iter()
            .enumerate()
            .map(|(k, c)| match c {
                Some(f) => f.density(0).scale(self.weights[k] * self.densities[k]),
                None => CMat::zeros(self.algebra.dims()[k], self.algebra.dims()[k]),
            })
            .collect();
        Functional::new(&self.algebra, dens)
    }
}

fn check_weights(mu: &[f64], blocks: usize, eps: f64) -> Result<()> {
    if mu.len() != blocks {
        return Err(Error::Shape(format!(
            "{} weights for {blocks} blocks",
            mu.len()
        )));
    }
    if mu.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Domain(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > eps {
        return Err(Error::Domain(format!("weights sum to {total}")));
    }
    Ok(())
}

/// Central mass `Tr D_k / Σ_l Tr D_l` of a nonzero positive functional.
pub fn central_mass(phi: &Functional) -> Result<Vec<f64>> {
    phi.spectra_checked()?;
    let masses: Vec<f64> = phi
        .densities()
        .iter()
        .map(|d| linalg::trace(d).re.max(0.0))
        .collect();
    let total: f64 = masses.iter().sum();
    if total <= 0.0 {
        return Err(Error::Domain(
            "the zero functional has no central mass".into(),
        ));
    }
    Ok(masses.into_iter().map(|m| m / total).collect())
}

/// Splits `φ` over the blocks; `μ` defaults to the central mass of `φ`.
pub fn decompose(phi: &Functional, mu: Option<&[f64]>) -> Result<StateDecomposition> {
    let alg = phi.algebra();
    let tol = *phi.tolerances();
    let weights = match mu {
        Some(m) => {
            check_weights(m, alg.num_blocks(), tol.num)?;
            m.to_vec()
        }
        None => central_mass(phi)?,
    };
    let lives = phi.central_blocks()?;
    let mut components = Vec::with_capacity(alg.num_blocks());
    let mut densities = Vec::with_capacity(alg.num_blocks());
    for (k, &n) in alg.dims().iter().enumerate() {
        let w = weights[k];
        if w <= 0.0 {
            if lives[k] {
                return Err(Error::SingularMeasure(k));
            }
            components.push(None);
            densities.push(0.0);
            continue;
        }
        let block = BlockAlgebra::with_tolerances(&[n], tol)?;
        let d = phi.density(k);
        let mass = linalg::trace(d).re;
        let state = if lives[k] && mass > 0.0 {
            Functional::new(&block, vec![d.unscale(mass)])?
        } else {
            Functional::normalized_trace(&block)
        };
        components.push(Some(state));
        densities.push(if lives[k] { mass.max(0.0) / w } else { 0.0 });
    }
    Ok(StateDecomposition {
        algebra: alg.clone(),
        weights,
        components,
        densities,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SumCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

/// Per-block terms `μ_k √((dφ/dμ)_k (dψ/dμ)_k) (φ_k^{1/2}|ψ_k^{1/2})`.
pub fn component_amplitudes(
    phi: &Functional,
    psi: &Functional,
    mu: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    phi.algebra().ensure_same(psi.algebra())?;
    let weights = match mu {
        Some(m) => m.to_vec(),
        None => central_mass(&phi.checked_add(psi)?.scale(0.5))?,
    };
    let dphi = decompose(phi, Some(&weights))?;
    let dpsi = decompose(psi, Some(&weights))?;
    let mut terms = Vec::with_capacity(weights.len());
    for (k, &w) in weights.iter().enumerate() {
        let t = match (&dphi.components[k], &dpsi.components[k]) {
            (Some(a), Some(b)) => {
                w * (dphi.densities[k] * dpsi.densities[k]).sqrt() * transition_amplitude(a, b)?
            }
            _ => 0.0,
        };
        terms.push(t);
    }
    Ok((weights, terms))
}

/// Compares `(φ^{1/2}|ψ^{1/2})` with the weighted sum of the componentwise
/// amplitudes; `μ` defaults to the central mass of `(φ + ψ)/2`.
pub fn amplitude_sum_check(
    phi: &Functional,
    psi: &Functional,
    mu: Option<&[f64]>,
) -> Result<SumCheck> {
    let lhs = transition_amplitude(phi, psi)?;
    let (_, terms) = component_amplitudes(phi, psi, mu)?;
    let rhs: f64 = terms.iter().sum();
    Ok(SumCheck {
        lhs,
        rhs,
        defect: (lhs - rhs).abs(),
    })
}

/// Direct sum of the components' algebras carrying `Σ_k μ_k φ_k`.
pub fn integrate_disjoint_family(
    components: &[Functional],
    mu: &[f64],
) -> Result<(BlockAlgebra, Functional)> {
    let Some(first) = components.first() else {
        return Err(Error::Domain("empty family".into()));
    };
    let tol = *first.tolerances();
    if mu.len() != components.len() {
        return Err(Error::Domain(format!(
            "{} weights for {} components",
            mu.len(),
            components.len()
        )));
    }
    check_weights(mu, components.len(), tol.num)?;
    let mut dims = Vec::new();
    let mut dens = Vec::new();
    for (c, &w) in components.iter().zip(mu) {
        c.spectra_checked()?;
        dims.extend_from_slice(c.algebra().dims());
        dens.extend(c.densities().iter().map(|d| d.scale(w)));
    }
    let alg = BlockAlgebra::with_tolerances(&dims, tol)?;
    let phi = Functional::new(&alg, dens)?;
    Ok((alg, phi))
}
