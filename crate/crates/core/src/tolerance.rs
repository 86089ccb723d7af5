//! Scale-relative numerical cutoffs.

use serde::{Deserialize, Serialize};

/// Cutoffs used for hermiticity, positivity and rank decisions.
///
/// Hermiticity and positivity thresholds scale as `rel * (1 + λ_max)`; rank
/// cuts scale as `rank_factor * d * ε * λ_max` where `d` is the matrix side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub herm_rel: f64,
    pub psd_rel: f64,
    pub rank_factor: f64,
    /// Absolute slack for structural invariants (unitality, commutation,
    /// reconstruction checks).
    pub num: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_rel: 1e-10,
            psd_rel: 1e-10,
            rank_factor: 16.0,
            num: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn herm(&self, lambda_max: f64) -> f64 {
        self.herm_rel * (1.0 + lambda_max.abs())
    }

    pub fn psd(&self, lambda_max: f64) -> f64 {
        self.psd_rel * (1.0 + lambda_max.abs())
    }

    pub fn rank(&self, dim: usize, lambda_max: f64) -> f64 {
        self.rank_factor * dim.max(1) as f64 * f64::EPSILON * lambda_max.abs()
    }

    /// Overrides every relative cutoff with one value (the CLI `--tol` flag).
    pub fn with_uniform(value: f64) -> Self {
        Self {
            herm_rel: value,
            psd_rel: value,
            num: value,
            ..Self::default()
        }
    }
}
