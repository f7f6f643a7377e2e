//! Derivative-free maximisation of the functionals over finite-dimensional
//! shape families, and the disjoint-ball divergence sequence.
//!
//! Every family is parametrised by log semi-axes (or log half-widths) with
//! the last one pinned to zero; the functionals are scale invariant, so this
//! loses nothing.

mod counterexample;
mod nelder_mead;

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{constrained_diameter_bound, critical_epsilon};
use crate::error::{invalid, Error, Result};
use crate::estimators::EstimatorConfig;
use crate::exact::ball_constants;
use crate::functionals::{evaluate, Evaluation, FunctionalId};
use crate::geometry::{Body, Capsule, Ellipsoid, EllipsoidSlab, Polytope};
use crate::rng::{stream, Channel};
use crate::special::unit_ball_volume;

pub use counterexample::{
    counterexample_body, counterexample_csv, counterexample_sequence, doubling_grid, loglog_slope,
    CounterexampleRow, IntervalValue,
};
pub use nelder_mead::{Minimum, NelderMead};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Ellipsoids { dim: usize },
    Boxes { dim: usize },
    /// Capsules of radius 1; the single parameter is the log half-length.
    Capsules { dim: usize },
    /// `E(a) ∩ {|x₁| ≤ h}` rescaled to measure `ω_d`, with `|E(a)|` at most
    /// `ω_d(1 + ε)` after rescaling.
    EllipsoidSlab { dim: usize, epsilon: f64 },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Ellipsoids { dim } => write!(f, "ellipsoids(d={dim})"),
            Family::Boxes { dim } => write!(f, "boxes(d={dim})"),
            Family::Capsules { dim } => write!(f, "capsules(d={dim})"),
            Family::EllipsoidSlab { dim, epsilon } => write!(f, "ellipsoid_slab(d={dim}, ε={epsilon})"),
        }
    }
}

fn sigmoid(p: f64) -> f64 {
    1.0 / (1.0 + (-p).exp())
}

impl Family {
    /// Parses `ellipsoids`, `boxes`, `capsules` or `slab` for dimension `dim`.
    pub fn from_name(name: &str, dim: usize, epsilon: f64) -> Result<Self> {
        let fam = match name.to_ascii_lowercase().as_str() {
            "ellipsoids" | "ellipsoid" => Family::Ellipsoids { dim },
            "boxes" | "box" => Family::Boxes { dim },
            "capsules" | "capsule" => Family::Capsules { dim },
            "slab" | "ellipsoid_slab" | "slabs" => Family::EllipsoidSlab { dim, epsilon },
            other => return invalid(format!("unknown family '{other}'")),
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn dim(&self) -> usize {
        match *self {
            Family::Ellipsoids { dim }
            | Family::Boxes { dim }
            | Family::Capsules { dim }
            | Family::EllipsoidSlab { dim, .. } => dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d < 2 {
            return invalid(format!("families need d ≥ 2, got {d}"));
        }
        match *self {
            Family::Boxes { dim } if dim > 3 => Err(Error::Unsupported(format!(
                "box functionals need measure and perimeter, available for d ≤ 3 (got {dim})"
            ))),
            Family::EllipsoidSlab { epsilon, .. } if !(epsilon.is_finite() && epsilon >= 0.0) => {
                invalid(format!("ε must be non-negative, got {epsilon}"))
            }
            _ => Ok(()),
        }
    }

    /// Number of free parameters.
    pub fn parameter_count(&self) -> usize {
        match *self {
            Family::Ellipsoids { dim } | Family::Boxes { dim } => dim - 1,
            Family::Capsules { .. } => 1,
            Family::EllipsoidSlab { dim, epsilon } => {
                if epsilon > 0.0 {
                    dim
                } else {
                    dim - 1
                }
            }
        }
    }

    fn widths(dim: usize, p: &[f64]) -> Vec<f64> {
        p.iter().take(dim - 1).map(|v| v.exp()).chain(std::iter::once(1.0)).collect()
    }

    /// The body for parameter vector `p`.
    pub fn body(&self, p: &[f64]) -> Result<Body> {
        if p.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch(format!(
                "{self} takes {} parameters, got {}",
                self.parameter_count(),
                p.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite family parameter");
        }
        match *self {
            Family::Ellipsoids { dim } => Body::ellipsoid(Self::widths(dim, p)),
            Family::Boxes { dim } => Ok(Body::Polytope(Polytope::cuboid(&Self::widths(dim, p))?)),
            Family::Capsules { dim } => {
                let half = p[0].exp();
                let mut a = vec![0.0; dim];
                let mut b = vec![0.0; dim];
                a[0] = -half;
                b[0] = half;
                Ok(Body::Capsule(Capsule::new(a, b, 1.0)?))
            }
            Family::EllipsoidSlab { dim, epsilon } => {
                let axes = Self::widths(dim, p);
                let omega = unit_ball_volume(dim);
                let body = if epsilon > 0.0 {
                    let fraction = 1.0 / (1.0 + epsilon * sigmoid(p[dim - 1]));
                    slab_with_fraction(axes, fraction)?
                } else {
                    Body::Ellipsoid(Ellipsoid::new(axes)?)
                };
                body.scale((omega / body.measure()?).powf(1.0 / dim as f64))
            }
        }
    }

    /// Measure of the enclosing ellipsoid of a slab-family body divided by
    /// the body's own measure. One for the other families.
    pub fn enclosure_ratio(&self, body: &Body) -> Result<f64> {
        Ok(match body {
            Body::EllipsoidSlab(s) => s.ellipsoid().volume() / s.volume(),
            _ => 1.0,
        })
    }
}

/// The slab `E(a) ∩ {|x₁| ≤ h}` keeping at least `fraction` of `|E(a)|`. The
/// width is found by bisection and rounded up, so the volume constraint
/// holds exactly.
fn slab_with_fraction(axes: Vec<f64>, fraction: f64) -> Result<Body> {
    let full = Ellipsoid::new(axes.clone())?.volume();
    if fraction >= 1.0 {
        return Body::ellipsoid(axes);
    }
    let a0 = axes[0];
    let vol = |h: f64| -> Result<f64> { Ok(EllipsoidSlab::new(axes.clone(), 0, h)?.volume()) };
    let (mut lo, mut hi) = (0.0, a0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if vol(mid)? >= fraction * full {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Body::EllipsoidSlab(EllipsoidSlab::new(axes, 0, hi)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub estimator: EstimatorConfig,
    pub restarts: usize,
    /// Function evaluations allowed per restart, summed over escalation stages.
    pub max_evaluations: usize,
    /// Simplex diameter in log-parameter space at which a restart converges.
    pub tolerance: f64,
    pub initial_step: f64,
    /// Random starts are uniform in `[−spread, spread]` per parameter.
    pub start_spread: f64,
    /// For stochastic backends: how many times the walk count is quadrupled
    /// once the simplex has converged at the current budget.
    pub escalations: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            estimator: EstimatorConfig::default(),
            restarts: 20,
            max_evaluations: 4000,
            tolerance: 1e-6,
            initial_step: 0.5,
            start_spread: 1.0,
            escalations: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub start: Vec<f64>,
    pub params: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// The `diam/r` bound asserted on a constrained-search result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub epsilon: f64,
    /// `|E(a)| / |Ω|` for the enclosing ellipsoid.
    pub enclosure_ratio: f64,
    pub diameter_over_inradius: f64,
    pub bound: Option<f64>,
    /// Whether the result reaches the ball value, which is what makes the
    /// bound applicable.
    pub applies: bool,
    pub holds: bool,
    /// The family search fell short of the ball and the ball was reported.
    pub ball_selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub functional: FunctionalId,
    pub family: Family,
    pub params: Vec<f64>,
    pub body: Body,
    pub evaluation: Evaluation,
    /// Running best value over all restarts in index order.
    pub trace: Vec<f64>,
    pub converged: bool,
    pub evaluations: usize,
    pub restarts: Vec<RestartSummary>,
    pub ball_value: Option<f64>,
    pub constraint: Option<ConstraintCheck>,
}

/// `G_α(B₁)` or `H_α(B₁)`.
pub fn ball_value(f: FunctionalId, d: usize) -> Result<f64> {
    f.validate(d)?;
    let alpha = f.alpha();
    let bc = ball_constants(d, &[alpha])?;
    Ok(if f.is_planar() {
        bc.h_alpha(alpha)?
    } else {
        bc.g_alpha(alpha)?
    })
}

struct RestartOutcome {
    summary: RestartSummary,
    trace: Vec<f64>,
    error: Option<Error>,
}

fn run_restart(f: FunctionalId, family: &Family, cfg: &SearchConfig, index: usize) -> RestartOutcome {
    let n = family.parameter_count();
    let mut rng = stream(cfg.seed, Channel::Search, index as u64);
    let start: Vec<f64> = (0..n)
        .map(|_| rng.random_range(-cfg.start_spread..=cfg.start_spread))
        .collect();
    let mut error = None;
    let mut est = cfg.estimator.clone();
    let mut x = start.clone();
    let mut step = cfg.initial_step;
    let mut trace = Vec::new();
    let mut evaluations = 0;
    let mut stage = 0;
    let (value, converged) = loop {
        let mut exact = true;
        let objective = |p: &[f64]| -> f64 {
            match family.body(p).and_then(|b| evaluate(f, &b, &est)) {
                Ok(ev) => {
                    exact &= ev.is_exact();
                    -ev.value
                }
                Err(e) => {
                    error.get_or_insert(e);
                    f64::NAN
                }
            }
        };
        let nm = NelderMead {
            step,
            tolerance: cfg.tolerance,
            max_evaluations: cfg.max_evaluations.saturating_sub(evaluations).max(n + 2),
        };
        let m = nm.minimize(objective, &x);
        evaluations += m.evaluations;
        trace.extend(m.trace.iter().map(|v| -v));
        x = m.x;
        if exact || stage >= cfg.escalations || evaluations >= cfg.max_evaluations {
            break (-m.f, m.converged);
        }
        stage += 1;
        est = est.clone().with_walks(est.walk_count * 4);
        step = (4.0 * m.diameter).max(10.0 * cfg.tolerance).min(cfg.initial_step);
    };
    RestartOutcome {
        summary: RestartSummary {
            index,
            start,
            params: x,
            value,
            evaluations,
            converged,
        },
        trace,
        error: if value.is_finite() { None } else { error },
    }
}

/// Final walk budget after all escalation stages.
fn final_estimator(cfg: &SearchConfig) -> EstimatorConfig {
    let walks = cfg.estimator.walk_count * 4usize.pow(cfg.escalations as u32);
    cfg.estimator.clone().with_walks(walks)
}

/// Multi-start Nelder–Mead maximisation of `f` over `family`. Restarts run
/// in parallel; the result depends only on the seeds.
pub fn maximize(f: FunctionalId, family: Family, cfg: &SearchConfig) -> Result<SearchResult> {
    family.validate()?;
    f.validate(family.dim())?;
    if cfg.restarts == 0 {
        return invalid("at least one restart is needed");
    }
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| run_restart(f, &family, cfg, i))
        .collect();
    let best = outcomes
        .iter()
        .filter(|o| o.summary.value.is_finite())
        .max_by(|a, b| {
            a.summary
                .value
                .total_cmp(&b.summary.value)
                .then(b.summary.index.cmp(&a.summary.index))
        });
    let Some(best) = best else {
        return Err(outcomes
            .into_iter()
            .find_map(|o| o.error)
            .unwrap_or_else(|| Error::DegenerateEstimate("no finite objective value".into())));
    };
    let params = best.summary.params.clone();
    let body = family.body(&params)?;
    let mut evaluation = evaluate(f, &body, &cfg.estimator)?;
    if !evaluation.is_exact() {
        evaluation = evaluate(f, &body, &final_estimator(cfg))?;
    }
    let mut trace = Vec::new();
    let mut running = f64::NEG_INFINITY;
    for o in &outcomes {
        for v in &o.trace {
            running = running.max(*v);
            trace.push(running);
        }
    }
    Ok(SearchResult {
        functional: f,
        family,
        params,
        body,
        evaluation,
        trace,
        converged: best.summary.converged,
        evaluations: outcomes.iter().map(|o| o.summary.evaluations).sum(),
        restarts: outcomes.into_iter().map(|o| o.summary).collect(),
        ball_value: ball_value(f, family.dim()).ok(),
        constraint: None,
    })
}

/// Lower bound for the supremum of `f` over bodies of measure `ω_d` inside an
/// ellipsoid of measure at most `ω_d(1 + ε)`, from the ellipsoid–slab family.
/// When the result reaches the ball value and the constrained diameter
/// bound is defined (`d = 2` or `d ≥ 4`, ε below critical), that bound is
/// asserted and a violation is an error.
pub fn maximize_constrained(f: FunctionalId, d: usize, epsilon: f64, cfg: &SearchConfig) -> Result<SearchResult> {
    let family = Family::EllipsoidSlab { dim: d, epsilon };
    let mut result = maximize(f, family, cfg)?;
    // B₁ itself belongs to the constrained class.
    let mut ball_selected = false;
    if let Some(ball) = result.ball_value {
        if result.evaluation.value < ball {
            result.body = Body::unit_ball(d);
            result.evaluation = evaluate(f, &result.body, &cfg.estimator)?;
            result.params = vec![0.0; d - 1];
            ball_selected = true;
        }
    }
    let enclosure_ratio = family.enclosure_ratio(&result.body)?;
    if enclosure_ratio > (1.0 + epsilon) * (1.0 + 1e-12) {
        return Err(Error::Consistency(format!(
            "enclosing ellipsoid ratio {enclosure_ratio} exceeds 1 + ε = {}",
            1.0 + epsilon
        )));
    }
    let (diam, r) = result.body.diameter_inradius()?;
    let ratio = diam / r;
    let bound = critical_epsilon(d)
        .ok()
        .filter(|c| epsilon < *c)
        .map(|_| constrained_diameter_bound(d, epsilon));
    let applies = bound.is_some() && result.ball_value.is_some_and(|b| result.evaluation.value >= b);
    let holds = match (applies, bound) {
        (true, Some(b)) => ratio <= b * (1.0 + 1e-10),
        _ => true,
    };
    if !holds {
        return Err(Error::Consistency(format!(
            "constrained result has diam/r = {ratio}, above the bound {}",
            bound.unwrap_or(f64::NAN)
        )));
    }
    result.constraint = Some(ConstraintCheck {
        epsilon,
        enclosure_ratio,
        diameter_over_inradius: ratio,
        bound,
        applies,
        holds,
        ball_selected,
    });
    Ok(result)
}
