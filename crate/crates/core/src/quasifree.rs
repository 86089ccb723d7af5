//! Covariance forms of quasifree states on a real presymplectic space
//! `(V, σ)`, their majorizing inner product and the reduction to the
//! quotient by its kernel.
//!
//! A covariance form is stored as the complex matrix `S` of the sesquilinear
//! form `S(x, y) = x̄ᵀ S y`; the compatibility condition reads
//! `S − S̄ = iσ`, i.e. `Im S = σ / 2`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::tolerance::Tolerances;

pub type RMat = DMatrix<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct PresymplecticSpace {
    sigma: RMat,
    tol: Tolerances,
}

impl PresymplecticSpace {
    pub fn new(sigma: RMat) -> Result<Self> {
        Self::with_tolerances(sigma, Tolerances::default())
    }

    pub fn with_tolerances(sigma: RMat, tol: Tolerances) -> Result<Self> {
        if !sigma.is_square() {
            return Err(Error::Shape(format!(
                "σ is {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let scale = sigma.amax();
        let defect = (&sigma + sigma.transpose()).amax();
        if defect > tol.herm(scale) {
            return Err(Error::InvalidCovariance(format!(
                "σ is not antisymmetric (defect {defect:e})"
            )));
        }
        let sigma = (&sigma - sigma.transpose()) * 0.5;
        Ok(Self { sigma, tol })
    }

    /// `V = ℝ^d` with `σ = 0`.
    pub fn trivial(d: usize) -> Self {
        Self {
            sigma: RMat::zeros(d, d),
            tol: Tolerances::default(),
        }
    }

    /// `ℝ^{2m}` with `σ = ⊕ [[0, 1], [−1, 0]]`.
    pub fn standard(m: usize) -> Self {
        let mut sigma = RMat::zeros(2 * m, 2 * m);
        for i in 0..m {
            sigma[(2 * i, 2 * i + 1)] = 1.0;
            sigma[(2 * i + 1, 2 * i)] = -1.0;
        }
        Self {
            sigma,
            tol: Tolerances::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn sigma(&self) -> &RMat {
        &self.sigma
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceForm {
    s: CMat,
}

impl CovarianceForm {
    pub fn new(s: CMat) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::Shape(format!(
                "covariance is {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        Ok(Self { s })
    }

    /// `(G + iσ) / 2` for a real symmetric `G`.
    pub fn from_real_part(g: &RMat, space: &PresymplecticSpace) -> Result<Self> {
        if g.shape() != space.sigma.shape() {
            return Err(Error::Shape("real part and σ differ in size".into()));
        }
        Ok(Self {
            s: CMat::from_fn(g.nrows(), g.ncols(), |i, j| {
                Complex64::new(g[(i, j)], space.sigma[(i, j)]) * 0.5
            }),
        })
    }

    /// `(1 + iσ) / 2`.
    pub fn vacuum(space: &PresymplecticSpace) -> Self {
        let d = space.dim();
        Self::from_real_part(&RMat::identity(d, d), space).expect("matching shapes")
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.s
    }

    pub fn real_part(&self) -> RMat {
        self.s.map(|z| z.re)
    }

    pub fn imag_part(&self) -> RMat {
        self.s.map(|z| z.im)
    }

    /// `S(x, y) = x̄ᵀ S y` for real `x, y`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Complex64> {
        let d = self.dim();
        if x.len() != d || y.len() != d {
            return Err(Error::Shape(format!("vectors must have length {d}")));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &xi) in x.iter().enumerate() {
            for (j, &yj) in y.iter().enumerate() {
                acc += self.s[(i, j)] * (xi * yj);
            }
        }
        Ok(acc)
    }

    /// Hermitian and PSD on `ℂ^d`.
    fn check_positive(&self, tol: &Tolerances) -> Result<()> {
        linalg::check_hermitian(&self.s, tol)
            .map_err(|e| Error::InvalidCovariance(e.to_string()))?;
        linalg::check_psd(&self.s, tol).map_err(|e| Error::InvalidCovariance(e.to_string()))?;
        Ok(())
    }
}

/// Why a covariance fails, or `Ok(())`.
pub fn covariance_violation(s: &CovarianceForm, space: &PresymplecticSpace) -> Result<()> {
    if s.dim() != space.dim() {
        return Err(Error::Shape(format!(
            "covariance of size {} on a space of dimension {}",
            s.dim(),
            space.dim()
        )));
    }
    s.check_positive(&space.tol)?;
    let defect = (s.imag_part() * 2.0 - &space.sigma).amax();
    if defect > space.tol.num {
        return Err(Error::InvalidCovariance(format!(
            "S − S̄ differs from iσ by {defect:e}"
        )));
    }
    Ok(())
}

/// `S` PSD and `S − S̄ = iσ`. Only a size mismatch is an error.
pub fn validate_covariance(s: &CovarianceForm, space: &PresymplecticSpace) -> Result<bool> {
    match covariance_violation(s, space) {
        Ok(()) => Ok(true),
        Err(Error::InvalidCovariance(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// `(x|y) = S(x,y) + S̄(x,y) + T(x,y) + T̄(x,y) = 2 Re S + 2 Re T`.
pub fn majorizing_inner_product(s: &CovarianceForm, t: &CovarianceForm) -> Result<RMat> {
    if s.dim() != t.dim() {
        return Err(Error::Shape("covariances differ in size".into()));
    }
    let tol = Tolerances::default();
    s.check_positive(&tol)?;
    t.check_positive(&tol)?;
    let m = (s.real_part() + t.real_part()) * 2.0;
    Ok((&m + m.transpose()) * 0.5)
}

/// Result of passing to `V' = V / ker(·|·)`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub space: PresymplecticSpace,
    pub s: CovarianceForm,
    pub t: CovarianceForm,
    /// `q: V → V'`, a `d' × d` matrix with orthonormal rows.
    pub quotient: RMat,
    pub kernel_dim: usize,
}

/// Orthonormal basis of the range of a real symmetric PSD matrix, built by
/// Gram–Schmidt on pivoted columns of the range projector and ordered by
/// column index, so coordinate subspaces map to coordinate vectors.
fn range_basis(m: &RMat, tol: &Tolerances) -> RMat {
    let d = m.nrows();
    if d == 0 {
        return RMat::zeros(0, 0);
    }
    let e = m.clone().symmetric_eigen();
    let lmax = e.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let cut = tol.rank(d, lmax);
    let keep: Vec<usize> = (0..d).filter(|&i| e.eigenvalues[i] > cut).collect();
    let r = keep.len();
    if r == 0 {
        return RMat::zeros(d, 0);
    }
    let v = e.eigenvectors.select_columns(&keep);
    let proj = &v * v.transpose();

    let mut chosen = Vec::with_capacity(r);
    let mut residual = proj.clone();
    for _ in 0..r {
        let norms: Vec<f64> = (0..d).map(|j| residual.column(j).norm()).collect();
        let best = norms.iter().cloned().fold(0.0, f64::max);
        let j = (0..d)
            .find(|&j| !chosen.contains(&j) && norms[j] >= best * (1.0 - 1e-9))
            .expect("rank-many independent columns");
        chosen.push(j);
        let u = residual.column(j) / norms[j];
        residual -= &u * (u.transpose() * &residual);
    }
    chosen.sort_unstable();

    let mut q = RMat::zeros(d, r);
    for (c, &j) in chosen.iter().enumerate() {
        let mut col = proj.column(j).into_owned();
        for _ in 0..2 {
            for p in 0..c {
                let prev = q.column(p).into_owned();
                col -= &prev * prev.dot(&col);
            }
        }
        let n = col.norm();
        q.set_column(c, &(col / n));
    }
    q
}

fn compress(s: &CovarianceForm, q: &RMat) -> CovarianceForm {
    let qc = q.map(linalg::real);
    CovarianceForm {
        s: qc.transpose() * &s.s * &qc,
    }
}

/// Quotient by the kernel of the majorizing inner product. `σ`, `S` and `T`
/// all vanish on that kernel, so they descend to `V'`.
pub fn reduce(
    space: &PresymplecticSpace,
    s: &CovarianceForm,
    t: &CovarianceForm,
) -> Result<Reduction> {
    covariance_violation(s, space)?;
    covariance_violation(t, space)?;
    let m = majorizing_inner_product(s, t)?;
    let basis = range_basis(&m, &space.tol);
    let sigma = basis.transpose() * &space.sigma * &basis;
    let reduced_space = PresymplecticSpace::with_tolerances(sigma, space.tol)?;
    let s2 = compress(s, &basis);
    let t2 = compress(t, &basis);
    covariance_violation(&s2, &reduced_space)?;
    covariance_violation(&t2, &reduced_space)?;
    Ok(Reduction {
        kernel_dim: space.dim() - basis.ncols(),
        quotient: basis.transpose(),
        space: reduced_space,
        s: s2,
        t: t2,
    })
}

/// `φ_S(e^{ix}) = e^{−S(x,x)/2}`.
pub fn quasifree_character(s: &CovarianceForm, x: &[f64]) -> Result<Complex64> {
    s.check_positive(&Tolerances::default())?;
    let v = s.eval(x, x)?;
    Ok(Complex64::new((-v.re / 2.0).exp(), 0.0))
}

/// Affinity `Σ_n √(p_n q_n)` of the geometric distributions
/// `p_n = (1 − λ)λ^n`, `q_n = (1 − μ)μ^n`.
pub fn thermal_amplitude(lambda: f64, mu: f64) -> Result<f64> {
    for (name, v) in [("λ", lambda), ("μ", mu)] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} = {v} outside [0, 1)")));
        }
    }
    Ok(((1.0 - lambda) * (1.0 - mu)).sqrt() / (1.0 - (lambda * mu).sqrt()))
}
