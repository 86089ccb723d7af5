//! Sesquilinear forms on finite-dimensional spaces, stored as Gram matrices
//! with `γ(x, y) = x* G y` (conjugate-linear in `x`).
//!
//! The geometric mean `√(αβ)` of two positive forms is built from their
//! canonical commuting representation: with `S = G_α + G_β` compressed to
//! its range, `j(x) = S^{1/2} x`, and `A = S^{-1/2} G_α S^{-1/2}`,
//! `B = I − A`, the mean is `(A^{1/2} j(x) | B^{1/2} j(y))`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::algebra::Functional;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tolerance::Tolerances;

/// A Hermitian sesquilinear form.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianForm {
    gram: CMat,
    tol: Tolerances,
}

impl HermitianForm {
    pub fn new(gram: CMat) -> Result<Self> {
        Self::with_tolerances(gram, Tolerances::default())
    }

    pub fn with_tolerances(gram: CMat, tol: Tolerances) -> Result<Self> {
        if gram.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("gram matrix has a non-finite entry".into()));
        }
        linalg::check_hermitian(&gram, &tol)?;
        Ok(Self {
            gram: linalg::hermitize(&gram),
            tol,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            gram: CMat::zeros(dim, dim),
            tol: Tolerances::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn eval(&self, x: &CVec, y: &CVec) -> Complex64 {
        (x.adjoint() * &self.gram * y)[(0, 0)]
    }

    /// `γ(x, x)`, real for Hermitian forms.
    pub fn quadratic(&self, x: &CVec) -> f64 {
        self.eval(x, x).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::eigh(&self.gram).min()
    }

    pub fn is_positive(&self) -> bool {
        linalg::check_psd(&self.gram, &self.tol).is_ok()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            gram: self.gram.scale(s),
            tol: self.tol,
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self {
            gram: &self.gram + &other.gram,
            tol: self.tol,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self {
            gram: &self.gram - &other.gram,
            tol: self.tol,
        })
    }
}

/// A positive semidefinite form.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveForm(HermitianForm);

impl PositiveForm {
    pub fn new(gram: CMat) -> Result<Self> {
        Self::with_tolerances(gram, Tolerances::default())
    }

    pub fn with_tolerances(gram: CMat, tol: Tolerances) -> Result<Self> {
        let h = HermitianForm::with_tolerances(gram, tol)?;
        linalg::check_psd(&h.gram, &tol)?;
        Ok(Self(h))
    }

    /// Promotes a Hermitian form after a positivity check.
    pub fn from_hermitian(h: HermitianForm) -> Result<Self> {
        linalg::check_psd(&h.gram, &h.tol)?;
        Ok(Self(h))
    }

    pub fn identity(dim: usize) -> Self {
        Self(HermitianForm {
            gram: CMat::identity(dim, dim),
            tol: Tolerances::default(),
        })
    }

    pub fn as_hermitian(&self) -> &HermitianForm {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianForm {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn gram(&self) -> &CMat {
        &self.0.gram
    }

    pub fn quadratic(&self, x: &CVec) -> f64 {
        self.0.quadratic(x)
    }

    pub fn eval(&self, x: &CVec, y: &CVec) -> Complex64 {
        self.0.eval(x, y)
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        if s < 0.0 {
            return Err(Error::Domain(format!(
                "negative scale {s} for a positive form"
            )));
        }
        Ok(Self(self.0.scale(s)))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.checked_add(&other.0)?))
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("form dimensions {a} and {b} differ")));
    }
    Ok(())
}

/// Gram of `(x, y) ↦ φ(x* y)` on the matrix-unit basis.
pub fn left_form(phi: &Functional) -> Result<PositiveForm> {
    phi.spectra_checked()?;
    let alg = phi.algebra();
    let labels = alg.basis_labels();
    let gram = CMat::from_fn(labels.len(), labels.len(), |a, b| {
        let (k1, i, j) = labels[a];
        let (k2, k, l) = labels[b];
        // e_ij* e_kl = δ_ik e_jl and φ(e_jl) = D_lj
        if k1 == k2 && i == k {
            phi.density(k1)[(l, j)]
        } else {
            Complex64::default()
        }
    });
    PositiveForm::with_tolerances(gram, *phi.tolerances())
}

/// Gram of `(x, y) ↦ φ(y x*)` on the matrix-unit basis.
pub fn right_form(phi: &Functional) -> Result<PositiveForm> {
    phi.spectra_checked()?;
    let alg = phi.algebra();
    let labels = alg.basis_labels();
    let gram = CMat::from_fn(labels.len(), labels.len(), |a, b| {
        let (k1, i, j) = labels[a];
        let (k2, k, l) = labels[b];
        // e_kl e_ij* = δ_lj e_ki and φ(e_ki) = D_ik
        if k1 == k2 && l == j {
            phi.density(k1)[(i, k)]
        } else {
            Complex64::default()
        }
    });
    PositiveForm::with_tolerances(gram, *phi.tolerances())
}

/// Canonical representation `(j, A, B)` of a pair of positive forms, with
/// `A + B = I` on the range of `G_α + G_β`.
#[derive(Clone, Debug)]
pub struct PwRepresentation {
    /// `r × d` coordinates of `j(x)`.
    pub embedding: CMat,
    pub a: CMat,
    pub b: CMat,
    /// Spectrum of `A` after clipping to `[0, 1]`, with its eigenvectors.
    a_spectrum: linalg::Eigh,
}

impl PwRepresentation {
    pub fn rank(&self) -> usize {
        self.embedding.nrows()
    }

    pub fn dim(&self) -> usize {
        self.embedding.ncols()
    }

    /// `‖AB − BA‖` entrywise maximum.
    pub fn commutator_defect(&self) -> f64 {
        linalg::max_abs(&(&self.a * &self.b - &self.b * &self.a))
    }

    /// Largest deviation of `J* A J` and `J* B J` from the input Grams.
    pub fn reconstruction_defect(&self, alpha: &PositiveForm, beta: &PositiveForm) -> f64 {
        let j = &self.embedding;
        let ra = j.adjoint() * &self.a * j - alpha.gram();
        let rb = j.adjoint() * &self.b * j - beta.gram();
        linalg::max_abs(&ra).max(linalg::max_abs(&rb))
    }

    /// Gram of `(x, y) ↦ (j(x) | f(A) j(y))`.
    pub fn functional_calculus(&self, f: impl Fn(f64) -> f64) -> CMat {
        let j = &self.embedding;
        j.adjoint() * self.a_spectrum.map(f) * j
    }
}

pub fn pw_representation(alpha: &PositiveForm, beta: &PositiveForm) -> Result<PwRepresentation> {
    same_dim(alpha.dim(), beta.dim())?;
    let d = alpha.dim();
    let tol = alpha.0.tol;
    let sum = alpha.gram() + beta.gram();
    let es = linalg::eigh(&sum);
    let cut = linalg::rank_cut(&es, &tol);
    let kept: Vec<usize> = (0..d).filter(|&k| es.values[k] > cut).collect();
    let r = kept.len();
    let v = CMat::from_fn(d, r, |i, k| es.vectors[(i, kept[k])]);
    let roots: Vec<f64> = kept.iter().map(|&k| es.values[k].sqrt()).collect();

    let mut embedding = v.adjoint();
    for (row, &s) in roots.iter().enumerate() {
        embedding.row_mut(row).scale_mut(s);
    }
    let mut a = v.adjoint() * alpha.gram() * &v;
    for p in 0..r {
        for q in 0..r {
            a[(p, q)] /= roots[p] * roots[q];
        }
    }
    let mut a_spectrum = linalg::eigh(&a);
    for v in a_spectrum.values.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    // A vanishes exactly on j(ker α) and equals 1 exactly on j(ker β)
    let zeros = r.saturating_sub(linalg::psd_rank(&linalg::eigh(alpha.gram()), &tol));
    let ones = r
        .saturating_sub(linalg::psd_rank(&linalg::eigh(beta.gram()), &tol))
        .min(r - zeros);
    for v in &mut a_spectrum.values[..zeros] {
        *v = 0.0;
    }
    for v in &mut a_spectrum.values[r - ones..] {
        *v = 1.0;
    }
    let a = a_spectrum.map(|x| x);
    let b = CMat::identity(r, r) - &a;
    Ok(PwRepresentation {
        embedding,
        a,
        b,
        a_spectrum,
    })
}

/// The geometric mean `√(αβ)`: the largest Hermitian form dominated by the
/// pair.
pub fn geometric_mean(alpha: &PositiveForm, beta: &PositiveForm) -> Result<PositiveForm> {
    let tol = alpha.0.tol;
    let rep = pw_representation(alpha, beta)?;
    let mut gram = rep.functional_calculus(|a| (a * (1.0 - a)).sqrt());
    if let Some(q) = common_range_projector(alpha, beta, &tol) {
        gram = &q * gram * &q;
    }
    Ok(PositiveForm(HermitianForm {
        gram: linalg::hermitize(&gram),
        tol,
    }))
}

/// Projector onto `ran G_α ∩ ran G_β`, or `None` when both are invertible.
/// The mean vanishes on `ker α + ker β`, so compressing to this subspace
/// is exact and removes round-off along directions where `A` should be
/// exactly 0 or 1.
fn common_range_projector(
    alpha: &PositiveForm,
    beta: &PositiveForm,
    tol: &Tolerances,
) -> Option<CMat> {
    let ea = linalg::eigh(alpha.gram());
    let eb = linalg::eigh(beta.gram());
    let d = alpha.dim();
    if linalg::psd_rank(&ea, tol) == d && linalg::psd_rank(&eb, tol) == d {
        return None;
    }
    let pa = linalg::range_projector(&ea, tol);
    let pb = linalg::range_projector(&eb, tol);
    let avg = linalg::eigh(&(pa + pb).scale(0.5));
    Some(avg.map(|v| if v > 1.0 - 1e-9 { 1.0 } else { 0.0 }))
}

/// Whether `|γ(x,y)|² ≤ α(x,x) β(y,y)` for all `x, y`, decided by the
/// positivity of `[[G_α, G_γ], [G_γ*, G_β]]`.
pub fn is_dominated(
    gamma: &HermitianForm,
    alpha: &PositiveForm,
    beta: &PositiveForm,
) -> Result<bool> {
    Ok(domination_margin(gamma, alpha, beta)? >= 0.0)
}

/// Smallest eigenvalue of the certificate matrix plus `τ_psd`; nonnegative
/// exactly when `γ` is dominated.
pub fn domination_margin(
    gamma: &HermitianForm,
    alpha: &PositiveForm,
    beta: &PositiveForm,
) -> Result<f64> {
    same_dim(gamma.dim(), alpha.dim())?;
    same_dim(alpha.dim(), beta.dim())?;
    let d = alpha.dim();
    let mut block = CMat::zeros(2 * d, 2 * d);
    block.view_mut((0, 0), (d, d)).copy_from(alpha.gram());
    block.view_mut((0, d), (d, d)).copy_from(gamma.gram());
    block
        .view_mut((d, 0), (d, d))
        .copy_from(&gamma.gram().adjoint());
    block.view_mut((d, d), (d, d)).copy_from(beta.gram());
    let e = linalg::eigh(&block);
    Ok(e.min() + alpha.0.tol.psd(e.max_abs()))
}

/// Gram of `(x, y) ↦ Σ_k Tr(D_φ^{1−t} x* D_ψ^t y)` on the matrix-unit basis,
/// with `0^s = 0` for every power (so `D^0` is the support projection).
pub fn interpolated_form(phi: &Functional, psi: &Functional, t: f64) -> Result<HermitianForm> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "interpolation parameter {t} outside [0, 1]"
        )));
    }
    phi.algebra().ensure_same(psi.algebra())?;
    let left = phi.density_power(1.0 - t)?;
    let right = psi.density_power(t)?;
    Ok(HermitianForm {
        gram: sandwich_gram(phi, &left, &right),
        tol: *phi.tolerances(),
    })
}

/// Gram of `(x, y) ↦ Σ_k Tr(P_k x_k* Q_k y_k)`.
pub(crate) fn sandwich_gram(on: &Functional, p: &[CMat], q: &[CMat]) -> CMat {
    let labels = on.algebra().basis_labels();
    // Tr(P e_ji Q e_kl) = P_lj Q_ik
    CMat::from_fn(labels.len(), labels.len(), |a, b| {
        let (k1, i, j) = labels[a];
        let (k2, k, l) = labels[b];
        if k1 == k2 {
            p[k1][(l, j)] * q[k1][(i, k)]
        } else {
            Complex64::default()
        }
    })
}

/// Unit coordinate vector `e_i` of length `d`.
pub fn unit_vector(d: usize, i: usize) -> CVec {
    let mut v = DVector::zeros(d);
    v[i] = linalg::real(1.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::make_algebra;
    use crate::linalg::real;
    use approx::assert_abs_diff_eq;

    fn rdiag(d: &[f64]) -> CMat {
        CMat::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| real(x))))
    }

    fn brute_left(phi: &Functional) -> CMat {
        let basis = phi.algebra().basis();
        CMat::from_fn(basis.len(), basis.len(), |a, b| {
            phi.evaluate(&(&basis[a].adjoint() * &basis[b])).unwrap()
        })
    }

    fn brute_right(phi: &Functional) -> CMat {
        let basis = phi.algebra().basis();
        CMat::from_fn(basis.len(), basis.len(), |a, b| {
            phi.evaluate(&(&basis[b] * &basis[a].adjoint())).unwrap()
        })
    }

    #[test]
    fn tracial_forms_are_half_identity() {
        let m2 = make_algebra(&[2]).unwrap();
        let tr = Functional::normalized_trace(&m2);
        let expected = CMat::identity(4, 4).scale(0.5);
        assert!(linalg::max_abs(&(left_form(&tr).unwrap().gram() - &expected)) < 1e-15);
        assert!(linalg::max_abs(&(right_form(&tr).unwrap().gram() - &expected)) < 1e-15);
    }

    #[test]
    fn pure_state_forms_match_brute_force() {
        let m2 = make_algebra(&[2]).unwrap();
        let phi = Functional::diagonal(&m2, &[vec![1.0, 0.0]]).unwrap();
        let left = left_form(&phi).unwrap();
        let right = right_form(&phi).unwrap();
        assert_eq!(left.gram(), &brute_left(&phi));
        assert_eq!(right.gram(), &brute_right(&phi));
        // units ordered e11, e12, e21, e22
        assert_eq!(left.gram(), &rdiag(&[1.0, 0.0, 1.0, 0.0]));
        assert_eq!(right.gram(), &rdiag(&[1.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn commutative_left_form_is_diagonal() {
        let c2 = make_algebra(&[1, 1]).unwrap();
        let phi = Functional::diagonal(&c2, &[vec![0.3], vec![0.7]]).unwrap();
        assert!(linalg::max_abs(&(left_form(&phi).unwrap().gram() - rdiag(&[0.3, 0.7]))) < 1e-15);
    }

    #[test]
    fn general_forms_match_brute_force() {
        let alg = make_algebra(&[2, 3]).unwrap();
        let d1 = CMat::from_fn(2, 2, |i, j| {
            Complex64::new(0.1 * (i + j + 1) as f64, 0.05 * (i as f64 - j as f64))
        });
        let d2 = CMat::from_fn(3, 3, |i, j| {
            if i == j {
                real(0.2)
            } else {
                Complex64::new(0.01, 0.02 * (j as f64 - i as f64))
            }
        });
        let phi =
            Functional::new(&alg, vec![linalg::hermitize(&(&d1 * d1.adjoint())), d2]).unwrap();
        assert!(linalg::max_abs(&(left_form(&phi).unwrap().gram() - brute_left(&phi))) < 1e-15);
        assert!(linalg::max_abs(&(right_form(&phi).unwrap().gram() - brute_right(&phi))) < 1e-15);
    }

    #[test]
    fn pw_symmetric_pair() {
        let id = PositiveForm::identity(3);
        let rep = pw_representation(&id, &id).unwrap();
        assert_eq!(rep.rank(), 3);
        assert!(linalg::max_abs(&(&rep.a - CMat::identity(3, 3).scale(0.5))) < 1e-14);
        assert!(linalg::max_abs(&(&rep.b - CMat::identity(3, 3).scale(0.5))) < 1e-14);
    }

    #[test]
    fn pw_orthogonal_pair() {
        let a = PositiveForm::new(rdiag(&[1.0, 0.0])).unwrap();
        let b = PositiveForm::new(rdiag(&[0.0, 1.0])).unwrap();
        let rep = pw_representation(&a, &b).unwrap();
        assert_eq!(rep.rank(), 2);
        // A is diag(1,0) in the coordinates j(x) = x
        let ja = rep.embedding.adjoint() * &rep.a * &rep.embedding;
        assert!(linalg::max_abs(&(ja - rdiag(&[1.0, 0.0]))) < 1e-14);
        let mut values: Vec<f64> = linalg::eigh(&rep.a).values;
        values.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(values[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(values[1], 1.0, epsilon = 1e-14);
        assert!(rep.reconstruction_defect(&a, &b) < 1e-14);
        assert!(rep.commutator_defect() < 1e-14);
    }

    #[test]
    fn pw_zero_pair_is_empty() {
        let z = PositiveForm::new(CMat::zeros(2, 2)).unwrap();
        let rep = pw_representation(&z, &z).unwrap();
        assert_eq!(rep.rank(), 0);
        let m = geometric_mean(&z, &z).unwrap();
        assert_eq!(m.gram(), &CMat::zeros(2, 2));
    }

    #[test]
    fn mean_commuting_case() {
        let a = PositiveForm::new(rdiag(&[4.0, 1.0])).unwrap();
        let b = PositiveForm::new(rdiag(&[1.0, 9.0])).unwrap();
        let m = geometric_mean(&a, &b).unwrap();
        assert!(linalg::max_abs(&(m.gram() - rdiag(&[2.0, 3.0]))) < 1e-14);
    }

    #[test]
    fn mean_with_identity_is_square_root() {
        let g = CMat::from_fn(2, 2, |i, j| real(if i == 0 && j == 0 { 2.0 } else { 1.0 }));
        let a = PositiveForm::new(g).unwrap();
        let m = geometric_mean(&a, &PositiveForm::identity(2)).unwrap();
        let s5 = 5f64.sqrt();
        let expected = CMat::from_fn(2, 2, |i, j| {
            real(if i == j { [3.0, 2.0][i] } else { 1.0 } / s5)
        });
        assert!(linalg::max_abs(&(m.gram() - expected)) < 1e-14);
    }

    #[test]
    fn mean_of_orthogonal_supports_vanishes() {
        let a = PositiveForm::new(rdiag(&[1.0, 0.0])).unwrap();
        let b = PositiveForm::new(rdiag(&[0.0, 1.0])).unwrap();
        assert!(linalg::max_abs(geometric_mean(&a, &b).unwrap().gram()) < 1e-15);
    }

    #[test]
    fn mean_rejects_dim_mismatch() {
        let a = PositiveForm::identity(2);
        let b = PositiveForm::identity(3);
        assert!(matches!(geometric_mean(&a, &b), Err(Error::Shape(_))));
        assert!(matches!(pw_representation(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn domination_examples() {
        let g = CMat::from_fn(2, 2, |i, j| real(if i == j { 2.0 } else { 0.5 }));
        let a = PositiveForm::new(g).unwrap();
        assert!(is_dominated(a.as_hermitian(), &a, &a).unwrap());
        assert!(!is_dominated(&a.as_hermitian().scale(2.0), &a, &a).unwrap());
        let b = PositiveForm::new(rdiag(&[1.0, 3.0])).unwrap();
        let m = geometric_mean(&a, &b).unwrap();
        assert!(is_dominated(m.as_hermitian(), &a, &b).unwrap());
        assert!(!is_dominated(&m.as_hermitian().scale(1.01), &a, &b).unwrap());
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let m2 = make_algebra(&[2]).unwrap();
        let d = CMat::from_fn(2, 2, |i, j| {
            if i == j {
                real([0.7, 0.3][i])
            } else {
                Complex64::new(0.1, if i < j { 0.05 } else { -0.05 })
            }
        });
        let phi = Functional::positive(&m2, vec![d]).unwrap();
        let psi = Functional::diagonal(&m2, &[vec![0.4, 0.6]]).unwrap();
        let q0 = interpolated_form(&phi, &psi, 0.0).unwrap();
        let q1 = interpolated_form(&phi, &psi, 1.0).unwrap();
        let qh = interpolated_form(&phi, &psi, 0.5).unwrap();
        assert!(linalg::max_abs(&(q0.gram() - left_form(&phi).unwrap().gram())) < 1e-13);
        assert!(linalg::max_abs(&(q1.gram() - right_form(&psi).unwrap().gram())) < 1e-13);
        let mean = geometric_mean(&left_form(&phi).unwrap(), &right_form(&psi).unwrap()).unwrap();
        assert!(linalg::max_abs(&(qh.gram() - mean.gram())) < 1e-12);
        assert!(matches!(
            interpolated_form(&phi, &psi, 1.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            interpolated_form(&phi, &psi, -0.1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn unit_vectors_probe_the_gram() {
        let g = rdiag(&[1.0, 2.0, 3.0]);
        let f = HermitianForm::new(g).unwrap();
        assert_eq!(f.quadratic(&unit_vector(3, 2)), 3.0);
    }
}
