//! Monte Carlo and discrete-extremal estimators for bodies without closed
//! forms.

mod fekete;
mod surface;
mod wos;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use fekete::{fekete_logcap, fekete_logcap_boundary, BoundaryPiece, PlanarBoundary};
pub use surface::mc_surface_area;
pub use wos::{wos_capacity, wos_torsion, wos_torsion_at};

/// Monte Carlo budget and tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Walks per estimate (per radius for capacity).
    pub walk_count: usize,
    /// Absorption shell width; `None` means `1e-5 × inradius`.
    pub shell_epsilon: Option<f64>,
    /// Launch radius over bounding-ball radius for exterior walks.
    pub escape_radius_factor: f64,
    pub seed: u64,
    /// Walks per batch for batch-means standard errors.
    pub batch_size: usize,
    /// Steps after which a walk is declared stuck.
    pub max_steps: u64,
    /// Boundary points used by the logarithmic-capacity ascent (the
    /// extrapolation also runs at twice this number).
    pub fekete_points: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            walk_count: 20_000,
            shell_epsilon: None,
            escape_radius_factor: 4.0,
            seed: 0,
            batch_size: 100,
            max_steps: 1_000_000,
            fekete_points: 128,
        }
    }
}

impl EstimatorConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_walks(mut self, walk_count: usize) -> Self {
        self.walk_count = walk_count;
        self
    }

    /// Validates the configuration against a body with inradius `r` and
    /// returns the absorption shell width to use.
    pub fn shell_for(&self, inradius: f64) -> Result<f64> {
        if self.walk_count < 1000 {
            return invalid(format!("walk_count must be ≥ 1000, got {}", self.walk_count));
        }
        if self.batch_size == 0 || self.batch_size > self.walk_count {
            return invalid("batch_size must be between 1 and walk_count");
        }
        if !(self.escape_radius_factor >= 2.0) {
            return invalid("escape_radius_factor must be ≥ 2");
        }
        let eps = self.shell_epsilon.unwrap_or(1e-5 * inradius);
        if !(eps > 0.0 && eps <= 1e-3 * inradius * (1.0 + 1e-12)) {
            return invalid(format!(
                "shell_epsilon {eps:e} must be positive and at most 1e-3 × inradius ({:e})",
                1e-3 * inradius
            ));
        }
        Ok(eps)
    }

    /// Same configuration for a body scaled by `t`: an explicit shell width
    /// scales with the body so that paired runs stay comparable.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            shell_epsilon: self.shell_epsilon.map(|e| e * t),
            ..self.clone()
        }
    }
}

/// A value with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    /// Samples used (walks, directions or boundary points).
    pub n: u64,
    pub backend: String,
    /// Raw values whose combination gave `value`, when the estimator
    /// extrapolates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub converged: bool,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl Estimate {
    pub fn exact(value: f64, backend: &str) -> Self {
        Self {
            value,
            stderr: 0.0,
            n: 0,
            backend: backend.to_string(),
            bracket: None,
            converged: true,
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.stderr / self.value.abs()
        }
    }
}

/// Mean and batch-means standard error of `xs` in index order.
pub(crate) fn batch_mean(xs: &[f64], batch: usize) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let nb = n / batch;
    if nb < 2 {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1).max(1) as f64;
        return (mean, (var / n as f64).sqrt());
    }
    let means: Vec<f64> = (0..nb)
        .map(|b| xs[b * batch..(b + 1) * batch].iter().sum::<f64>() / batch as f64)
        .collect();
    let mb = means.iter().sum::<f64>() / nb as f64;
    let var = means.iter().map(|m| (m - mb).powi(2)).sum::<f64>() / (nb - 1) as f64;
    (mean, (var / nb as f64).sqrt())
}
