use rayon::prelude::*;

use super::{batch_mean, Estimate, EstimatorConfig};
use crate::error::{invalid, Error, Result};
use crate::exact::ball_constants;
use crate::geometry::{dist, Body};
use crate::rng::{stream, unit_vector, Channel};
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Radius of a ball around `x` inside the body, or `None` once `x` is
/// within `eps` of the boundary. The cheap bound sizes most steps; the exact
/// distance is consulted only near the shell.
fn interior_step(body: &Body, x: &[f64], eps: f64) -> Option<f64> {
    let b = -body.signed_distance_bound(x);
    if b > eps {
        return Some(b);
    }
    let e = -body.signed_distance(x);
    (e > eps).then_some(e)
}

fn exterior_step(body: &Body, x: &[f64], eps: f64) -> Option<f64> {
    let b = body.signed_distance_bound(x);
    if b > eps {
        return Some(b);
    }
    let e = body.signed_distance(x);
    (e > eps).then_some(e)
}

fn advance(x: &mut [f64], dir: &mut [f64], r: f64, rng: &mut ChaCha12Rng) {
    unit_vector(rng, dir);
    for (xi, di) in x.iter_mut().zip(dir.iter()) {
        *xi += r * di;
    }
}

/// One constant-source walk: `Σ R²/(2d)` over the steps until absorption.
fn torsion_walk(
    body: &Body,
    start: &[f64],
    eps: f64,
    max_steps: u64,
    rng: &mut ChaCha12Rng,
) -> Result<f64> {
    let d = start.len();
    let mut x = start.to_vec();
    let mut dir = vec![0.0; d];
    let mut acc = 0.0;
    for _ in 0..max_steps {
        match interior_step(body, &x, eps) {
            None => return Ok(acc),
            Some(r) => {
                acc += r * r / (2 * d) as f64;
                advance(&mut x, &mut dir, r, rng);
            }
        }
    }
    Err(Error::StuckWalk {
        steps: max_steps,
        shell: eps,
    })
}

fn uniform_in_body(body: &Body, lo: &[f64], hi: &[f64], rng: &mut ChaCha12Rng) -> Result<Vec<f64>> {
    let mut x = vec![0.0; lo.len()];
    for _ in 0..10_000_000u32 {
        for i in 0..x.len() {
            x[i] = rng.random_range(lo[i]..hi[i]);
        }
        if body.contains(&x) {
            return Ok(x);
        }
    }
    Err(Error::DegenerateEstimate(
        "rejection sampling found no interior point".into(),
    ))
}

/// Walk-on-spheres estimate of the torsion function `u(x)` at one point.
pub fn wos_torsion_at(body: &Body, x: &[f64], cfg: &EstimatorConfig) -> Result<Estimate> {
    if x.len() != body.dim() {
        return Err(Error::DimensionMismatch("point and body dimensions differ".into()));
    }
    if !body.contains(x) {
        return invalid("point must lie inside the body");
    }
    let eps = cfg.shell_for(body.inradius()?)?;
    let us = (0..cfg.walk_count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, Channel::Torsion, i);
            torsion_walk(body, x, eps, cfg.max_steps, &mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, se) = batch_mean(&us, cfg.batch_size);
    Ok(Estimate {
        value: mean,
        stderr: se,
        n: us.len() as u64,
        backend: "wos_torsion_point".into(),
        bracket: None,
        converged: true,
    })
}

/// Torsional rigidity `T(Ω) = ∫_Ω u`: uniform interior starting points,
/// one walk each, `T ≈ |Ω|·mean(u)`.
pub fn wos_torsion(body: &Body, cfg: &EstimatorConfig) -> Result<Estimate> {
    let eps = cfg.shell_for(body.inradius()?)?;
    let vol = body.measure()?;
    let (lo, hi) = body.bounding_box();
    let us = (0..cfg.walk_count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, Channel::Torsion, i);
            let x = uniform_in_body(body, &lo, &hi, &mut rng)?;
            torsion_walk(body, &x, eps, cfg.max_steps, &mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, se) = batch_mean(&us, cfg.batch_size);
    Ok(Estimate {
        value: vol * mean,
        stderr: vol * se,
        n: us.len() as u64,
        backend: "wos_torsion".into(),
        bracket: None,
        converged: true,
    })
}

/// Exit point of Brownian motion started at `z` inside the ball `B(c, R)`:
/// walk-on-spheres in the ball until within `1e−10·R` of the sphere, then a
/// radial projection.
fn ball_exit(center: &[f64], radius: f64, z: &mut [f64], dir: &mut [f64], rng: &mut ChaCha12Rng) {
    let shell = 1e-10 * radius;
    loop {
        let gap = radius - dist(z, center);
        if gap <= shell {
            break;
        }
        advance(z, dir, gap, rng);
    }
    let r = dist(z, center);
    for (zi, ci) in z.iter_mut().zip(center) {
        *zi = ci + (*zi - ci) * radius / r;
    }
}

/// One walker launched uniformly on the sphere `|x − c| = R`; true if it
/// reaches the body. Past the sphere, at distance `ρ`, it returns with
/// probability `(R/ρ)^{d−2}`; the return point follows the exterior
/// harmonic measure, which is the interior one seen from the Kelvin image
/// `c + (R/ρ)²(x − c)`.
fn capacity_walk(
    body: &Body,
    center: &[f64],
    radius: f64,
    eps: f64,
    max_steps: u64,
    rng: &mut ChaCha12Rng,
) -> Result<bool> {
    let d = center.len();
    let mut dir = vec![0.0; d];
    unit_vector(rng, &mut dir);
    let mut x: Vec<f64> = center.iter().zip(&dir).map(|(c, u)| c + radius * u).collect();
    for _ in 0..max_steps {
        let rho = dist(&x, center);
        if rho > radius {
            if rng.random::<f64>() >= (radius / rho).powi(d as i32 - 2) {
                return Ok(false);
            }
            let k = (radius / rho).powi(2);
            for (xi, ci) in x.iter_mut().zip(center) {
                *xi = ci + k * (*xi - ci);
            }
            ball_exit(center, radius, &mut x, &mut dir, rng);
        }
        match exterior_step(body, &x, eps) {
            None => return Ok(true),
            Some(r) => advance(&mut x, &mut dir, r, rng),
        }
    }
    Err(Error::StuckWalk {
        steps: max_steps,
        shell: eps,
    })
}

/// Newtonian capacity by exterior walk-on-spheres, `d ≥ 3`. The launch
/// sphere has radius `R = escape_radius_factor × bounding radius`; since its
/// uniform measure has the same potential as a point charge outside it,
/// `cap = κ_d R^{d−2} · P(hit)` with no finite-`R` bias.
pub fn wos_capacity(body: &Body, cfg: &EstimatorConfig) -> Result<Estimate> {
    let d = body.dim();
    if d < 3 {
        return Err(Error::DimensionMismatch(
            "Newtonian capacity needs d ≥ 3".into(),
        ));
    }
    let eps = cfg.shell_for(body.inradius()?)?;
    let (center, rb) = body.bounding_ball();
    let radius = cfg.escape_radius_factor * rb;
    let hits = (0..cfg.walk_count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, Channel::Capacity, i);
            capacity_walk(body, &center, radius, eps, cfg.max_steps, &mut rng)
                .map(|h| if h { 1.0 } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, se) = batch_mean(&hits, cfg.batch_size);
    if mean == 0.0 {
        return Err(Error::DegenerateEstimate(format!(
            "no walk hit the body from radius {radius}"
        )));
    }
    let scale = ball_constants(d, &[])?.kappa()? * radius.powi(d as i32 - 2);
    Ok(Estimate {
        value: scale * mean,
        stderr: scale * se,
        n: hits.len() as u64,
        backend: "wos_capacity".into(),
        bracket: None,
        converged: true,
    })
}
