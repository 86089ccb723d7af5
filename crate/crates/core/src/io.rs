//! JSON interchange.
//!
//! * algebra: `{"blocks": [n_1, …]}`
//! * functional: `{"algebra": {...}, "densities": [[[re, im], …], …]}` with
//!   one flat row-major list of `n_k²` complex pairs per block
//! * form: `{"dim": d, "gram": [[re, im], …]}`, row-major, `d²` pairs
//! * embedding: `{"source", "target", "multiplicity", "unitaries"?}`
//! * chain: `{"embeddings": [...], "phi": functional, "psi": functional}`,
//!   the last embedding landing in the ambient algebra
//! * quasifree triple: `{"dim"?, "sigma": [real, …], "S": [pair, …], "T": [pair, …]}`
//!
//! Non-finite numbers and unknown fields are rejected.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{BlockAlgebra, Functional};
use crate::error::{Error, Result};
use crate::forms::HermitianForm;
use crate::linalg::CMat;
use crate::quasifree::{CovarianceForm, PresymplecticSpace, RMat};
use crate::restriction::{SubalgebraChain, UnitalEmbedding};
use crate::tolerance::Tolerances;

pub type Pair = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub blocks: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalJson {
    pub algebra: AlgebraJson,
    pub densities: Vec<Vec<Pair>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormJson {
    pub dim: usize,
    pub gram: Vec<Pair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingJson {
    pub source: AlgebraJson,
    pub target: AlgebraJson,
    pub multiplicity: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<Vec<Vec<Pair>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainJson {
    pub embeddings: Vec<EmbeddingJson>,
    pub phi: FunctionalJson,
    pub psi: FunctionalJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasifreeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub sigma: Vec<f64>,
    #[serde(rename = "S")]
    pub s: Vec<Pair>,
    #[serde(rename = "T")]
    pub t: Vec<Pair>,
}

/// Parses any of the schemas above.
pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

fn check_finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Parse(format!("{what} contains a non-finite number")))
    }
}

fn side(len: usize, what: &str) -> Result<usize> {
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len {
        return Err(Error::Shape(format!(
            "{what} has {len} entries, not a square count"
        )));
    }
    Ok(n)
}

/// Row-major pairs into an `n × n` matrix.
pub fn matrix_from_pairs(pairs: &[Pair], n: usize, what: &str) -> Result<CMat> {
    if pairs.len() != n * n {
        return Err(Error::Shape(format!(
            "{what} has {} entries, expected {}",
            pairs.len(),
            n * n
        )));
    }
    check_finite(pairs.iter().flatten().copied(), what)?;
    Ok(CMat::from_fn(n, n, |i, j| {
        let [re, im] = pairs[i * n + j];
        Complex64::new(re, im)
    }))
}

pub fn matrix_to_pairs(m: &CMat) -> Vec<Pair> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

impl AlgebraJson {
    pub fn build(&self, tol: Tolerances) -> Result<BlockAlgebra> {
        BlockAlgebra::with_tolerances(&self.blocks, tol)
    }

    pub fn of(alg: &BlockAlgebra) -> Self {
        Self {
            blocks: alg.dims().to_vec(),
        }
    }
}

impl FunctionalJson {
    pub fn build(&self, tol: Tolerances) -> Result<Functional> {
        let alg = self.algebra.build(tol)?;
        if self.densities.len() != alg.num_blocks() {
            return Err(Error::Shape(format!(
                "{} densities for {} blocks",
                self.densities.len(),
                alg.num_blocks()
            )));
        }
        let dens = self
            .densities
            .iter()
            .zip(alg.dims())
            .enumerate()
            .map(|(k, (d, &n))| matrix_from_pairs(d, n, &format!("density {k}")))
            .collect::<Result<Vec<_>>>()?;
        Functional::new(&alg, dens)
    }

    pub fn of(phi: &Functional) -> Self {
        Self {
            algebra: AlgebraJson::of(phi.algebra()),
            densities: phi.densities().iter().map(matrix_to_pairs).collect(),
        }
    }
}

impl FormJson {
    pub fn build(&self, tol: Tolerances) -> Result<HermitianForm> {
        HermitianForm::with_tolerances(matrix_from_pairs(&self.gram, self.dim, "gram")?, tol)
    }

    pub fn of(gram: &CMat) -> Self {
        Self {
            dim: gram.nrows(),
            gram: matrix_to_pairs(gram),
        }
    }
}

impl EmbeddingJson {
    pub fn build(&self, tol: Tolerances) -> Result<UnitalEmbedding> {
        let source = self.source.build(tol)?;
        let target = self.target.build(tol)?;
        let unitaries = match &self.unitaries {
            Some(us) => {
                if us.len() != target.num_blocks() {
                    return Err(Error::InvalidEmbedding(
                        "one unitary per target block expected".into(),
                    ));
                }
                Some(
                    us.iter()
                        .zip(target.dims())
                        .enumerate()
                        .map(|(k, (u, &n))| matrix_from_pairs(u, n, &format!("unitary {k}")))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            None => None,
        };
        UnitalEmbedding::new(&source, &target, self.multiplicity.clone(), unitaries)
    }

    pub fn of(e: &UnitalEmbedding) -> Self {
        Self {
            source: AlgebraJson::of(e.source()),
            target: AlgebraJson::of(e.target()),
            multiplicity: e.multiplicity().to_vec(),
            unitaries: e
                .unitaries()
                .map(|us| us.iter().map(matrix_to_pairs).collect()),
        }
    }
}

/// A chain and the pair of ambient functionals it is evaluated on.
pub struct ChainInput {
    pub chain: SubalgebraChain,
    pub phi: Functional,
    pub psi: Functional,
}

impl ChainJson {
    pub fn build(&self, tol: Tolerances) -> Result<ChainInput> {
        let mut links = self
            .embeddings
            .iter()
            .map(|e| e.build(tol))
            .collect::<Result<Vec<_>>>()?;
        let last = links.pop().ok_or_else(|| {
            Error::InvalidEmbedding("a chain needs at least one embedding".into())
        })?;
        let chain = SubalgebraChain::new(links, last)?;
        Ok(ChainInput {
            chain,
            phi: self.phi.build(tol)?,
            psi: self.psi.build(tol)?,
        })
    }
}

/// A presymplectic space with two covariance forms on it.
pub struct QuasifreeInput {
    pub space: PresymplecticSpace,
    pub s: CovarianceForm,
    pub t: CovarianceForm,
}

impl QuasifreeJson {
    pub fn build(&self, tol: Tolerances) -> Result<QuasifreeInput> {
        let d = match self.dim {
            Some(d) => d,
            None => side(self.sigma.len(), "sigma")?,
        };
        if self.sigma.len() != d * d {
            return Err(Error::Shape(format!(
                "sigma has {} entries, expected {}",
                self.sigma.len(),
                d * d
            )));
        }
        check_finite(self.sigma.iter().copied(), "sigma")?;
        let space =
            PresymplecticSpace::with_tolerances(RMat::from_row_slice(d, d, &self.sigma), tol)?;
        Ok(QuasifreeInput {
            space,
            s: CovarianceForm::new(matrix_from_pairs(&self.s, d, "S")?)?,
            t: CovarianceForm::new(matrix_from_pairs(&self.t, d, "T")?)?,
        })
    }

    pub fn of(space: &PresymplecticSpace, s: &CovarianceForm, t: &CovarianceForm) -> Self {
        let sigma = space.sigma();
        Self {
            dim: Some(space.dim()),
            sigma: (0..sigma.nrows())
                .flat_map(|i| (0..sigma.ncols()).map(move |j| sigma[(i, j)]))
                .collect(),
            s: matrix_to_pairs(s.matrix()),
            t: matrix_to_pairs(t.matrix()),
        }
    }
}

/// `x` rounded to nine significant digits.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn functional_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let alg = BlockAlgebra::new(&[2, 1, 3]).unwrap();
        let phi = random::state(&mut rng, &alg);
        let text = to_string(&FunctionalJson::of(&phi));
        let back = from_str::<FunctionalJson>(&text)
            .unwrap()
            .build(Tolerances::default())
            .unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn densities_are_row_major() {
        let text =
            r#"{"algebra":{"blocks":[2]},"densities":[[[0.5,0],[0.1,0.2],[0.1,-0.2],[0.5,0]]]}"#;
        let phi = from_str::<FunctionalJson>(text)
            .unwrap()
            .build(Tolerances::default())
            .unwrap();
        assert_eq!(phi.density(0)[(0, 1)], Complex64::new(0.1, 0.2));
    }

    #[test]
    fn malformed_inputs() {
        let tol = Tolerances::default();
        assert!(matches!(
            from_str::<FunctionalJson>("{"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            from_str::<FunctionalJson>(r#"{"algebra":{"blocks":[1]},"densities":[[[NaN,0]]]}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            from_str::<FunctionalJson>(r#"{"algebra":{"blocks":[1]},"densities":[[[1e400,0]]]}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            from_str::<AlgebraJson>(r#"{"blocks":[1],"extra":2}"#),
            Err(Error::Parse(_))
        ));
        let short =
            from_str::<FunctionalJson>(r#"{"algebra":{"blocks":[2]},"densities":[[[1,0]]]}"#)
                .unwrap();
        assert!(matches!(short.build(tol), Err(Error::Shape(_))));
        let bad =
            from_str::<FunctionalJson>(r#"{"algebra":{"blocks":[]},"densities":[]}"#).unwrap();
        assert!(matches!(bad.build(tol), Err(Error::InvalidAlgebra(_))));
    }

    #[test]
    fn form_round_trip() {
        let g = CMat::from_fn(3, 3, |i, j| {
            Complex64::new((i + j) as f64, i as f64 - j as f64)
        });
        let json = FormJson::of(&g);
        let back: FormJson = from_str(&to_string(&json)).unwrap();
        assert_eq!(back.build(Tolerances::default()).unwrap().gram(), &g);
    }

    #[test]
    fn chain_and_quasifree_files() {
        let text = r#"{
            "embeddings": [
                {"source": {"blocks": [1]}, "target": {"blocks": [1, 1]}, "multiplicity": [[1], [1]]},
                {"source": {"blocks": [1, 1]}, "target": {"blocks": [1, 1]}, "multiplicity": [[1, 0], [0, 1]]}
            ],
            "phi": {"algebra": {"blocks": [1, 1]}, "densities": [[[0.9, 0]], [[0.1, 0]]]},
            "psi": {"algebra": {"blocks": [1, 1]}, "densities": [[[0.5, 0]], [[0.5, 0]]]}
        }"#;
        let input = from_str::<ChainJson>(text)
            .unwrap()
            .build(Tolerances::default())
            .unwrap();
        assert_eq!(input.chain.len(), 2);

        let qf = r#"{"sigma": [0, 1, -1, 0], "S": [[0.5, 0], [0, 0.5], [0, -0.5], [0.5, 0]], "T": [[0.5, 0], [0, 0.5], [0, -0.5], [0.5, 0]]}"#;
        let parsed = from_str::<QuasifreeJson>(qf).unwrap();
        let input = parsed.build(Tolerances::default()).unwrap();
        assert_eq!(input.space.dim(), 2);
        let again: QuasifreeJson = from_str(&to_string(&QuasifreeJson::of(
            &input.space,
            &input.s,
            &input.t,
        )))
        .unwrap();
        assert_eq!(again.sigma, parsed.sigma);
        assert_eq!(again.s, parsed.s);
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(
            sig9(std::f64::consts::FRAC_1_SQRT_2).to_string(),
            "0.707106781"
        );
        assert_eq!(sig9(-1234.5678912345), -1234.56789);
        assert_eq!(sig9(0.0), 0.0);
        let x = sig9(std::f64::consts::PI);
        assert_eq!(
            serde_json::from_str::<f64>(&serde_json::to_string(&x).unwrap()).unwrap(),
            x
        );
    }
}
