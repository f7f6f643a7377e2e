use rayon::prelude::*;

use super::{batch_mean, Estimate, EstimatorConfig};
use crate::error::{invalid, Result};
use crate::geometry::Ellipsoid;
use crate::rng::{stream, unit_vector, Channel};
use crate::special::unit_ball_volume;

/// Surface area of an ellipsoid by Cauchy's projection formula.
///
/// The projection of `E = A·B` onto `u⊥` has volume `ω_{d−1}·det A·|A⁻¹u|`,
/// so `P(E) = d·ω_d·det A·E_u|A⁻¹u|` over uniform directions `u`. The unit ball
/// gives `d·ω_d` with zero variance.
pub fn mc_surface_area(ellipsoid: &Ellipsoid, cfg: &EstimatorConfig) -> Result<Estimate> {
    let d = ellipsoid.dim();
    if d < 2 {
        return invalid("surface area needs d ≥ 2");
    }
    if cfg.walk_count < 1000 {
        return invalid("walk_count must be ≥ 1000");
    }
    let a = ellipsoid.semi_axes();
    let samples: Vec<f64> = (0..cfg.walk_count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, Channel::Surface, i);
            let mut u = vec![0.0; d];
            unit_vector(&mut rng, &mut u);
            u.iter()
                .zip(a)
                .map(|(u, a)| (u / a) * (u / a))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let (mean, se) = batch_mean(&samples, cfg.batch_size.max(1));
    let scale = d as f64 * unit_ball_volume(d) * a.iter().product::<f64>();
    Ok(Estimate {
        value: scale * mean,
        stderr: scale * se,
        n: samples.len() as u64,
        backend: "cauchy_projection".into(),
        bracket: None,
        converged: true,
    })
}
