use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{check_constraint_constants, LedgerConfig, Subject};
use super::{BoundKind, BoundReport, Status};
use crate::error::{Error, Result};
use crate::geometry::{hull_2d, Body, Capsule, Polytope};
use crate::report::fmt_f64;
use crate::rng::{stream, Channel};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub vacuous: usize,
    pub out_of_regime: usize,
    pub error: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub rows: Vec<BoundReport>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    theorem: String,
    body_id: &'a str,
    lhs: String,
    rhs: String,
    slack: String,
    stderr: String,
    status: &'static str,
}

impl Ledger {
    pub fn summary(&self) -> Summary {
        let mut s = Summary {
            total: self.rows.len(),
            ..Summary::default()
        };
        for r in &self.rows {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Inconclusive => s.inconclusive += 1,
                Status::Vacuous => s.vacuous += 1,
                Status::OutOfRegime => s.out_of_regime += 1,
                Status::Error => s.error += 1,
            }
        }
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundReport> {
        self.rows.iter().filter(|r| r.is_failure())
    }

    pub fn kinds(&self) -> BTreeSet<BoundKind> {
        self.rows.iter().map(|r| r.kind).collect()
    }

    /// Negative control: pushes the left-hand side of the first passing,
    /// non-log-scale row well above its right-hand side and re-judges it.
    /// Returns the index of the altered row.
    pub fn tamper(&mut self) -> Option<usize> {
        let i = self.rows.iter().position(|r| {
            r.status == Status::Pass && !r.log_scale && r.rhs.is_finite() && r.rhs > 0.0
        })?;
        let r = self.rows[i].clone();
        let mut bad = BoundReport::new(r.kind, &r.body_id, 2.0 * r.rhs + 1.0, r.rhs)
            .judged(r.stderr, r.tol, 3.0)
            .note("tampered");
        bad.alpha = r.alpha;
        bad.epsilon = r.epsilon;
        self.rows[i] = bad;
        Some(i)
    }

    /// Columns `theorem, body_id, lhs, rhs, slack, stderr, status`, where
    /// `theorem` is `group/kind`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(CsvRow {
                theorem: r.kind.to_string(),
                body_id: &r.body_id,
                lhs: fmt_f64(r.lhs),
                rhs: fmt_f64(r.rhs),
                slack: fmt_f64(r.slack),
                stderr: fmt_f64(r.stderr),
                status: r.status.name(),
            })
            .map_err(|e| Error::Invalid(format!("csv: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Invalid(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Invalid(format!("csv: {e}")))
    }
}

fn error_row(kind: BoundKind, id: &str, alpha: Option<f64>, e: &Error) -> BoundReport {
    let mut r = BoundReport::new(kind, id, f64::NAN, f64::NAN)
        .with_status(Status::Error)
        .note(e.to_string());
    r.alpha = alpha;
    r
}

/// Pushes the rows of one check; not-applicable checks add nothing and any
/// other failure becomes an error row.
fn collect(
    out: &mut Vec<BoundReport>,
    kind: BoundKind,
    id: &str,
    alpha: Option<f64>,
    rows: Result<Vec<BoundReport>>,
) {
    match rows {
        Ok(rows) => out.extend(rows),
        Err(Error::Unsupported(_) | Error::DimensionMismatch(_)) => {}
        Err(e) => out.push(error_row(kind, id, alpha, &e)),
    }
}

fn body_rows(id: &str, body: &Body, cfg: &LedgerConfig) -> Vec<BoundReport> {
    let mut out = Vec::new();
    if !body.is_convex() {
        return out;
    }
    let s = Subject::new(id, body, cfg);
    let d = body.dim();
    collect(&mut out, BoundKind::VolumeInradiusPerimeter, id, None, s.inradius_perimeter());
    if d == 2 {
        collect(&mut out, BoundKind::HConvex, id, None, s.planar());
        for &a in &cfg.h_alphas {
            collect(&mut out, BoundKind::HAlphaConvex, id, Some(a), s.planar_weighted(a));
        }
    } else {
        collect(&mut out, BoundKind::GJohnAxes, id, None, s.axis_ratio());
        collect(&mut out, BoundKind::GConvex, id, None, s.g_bounds());
        for &a in &cfg.g_alphas {
            collect(&mut out, BoundKind::GAlphaConvex, id, Some(a), s.perimeter_weighted(a));
        }
    }
    out
}

/// Runs every applicable check over `bodies`, plus the ε-constants for each
/// dimension present (2 and ≥ 4). Rows are sorted by body id, then group and
/// kind, then α and ε.
pub fn ledger(bodies: &[(String, Body)], cfg: &LedgerConfig) -> Ledger {
    let mut rows: Vec<BoundReport> = bodies
        .par_iter()
        .flat_map_iter(|(id, body)| body_rows(id, body, cfg))
        .collect();
    let dims: BTreeSet<usize> = bodies
        .iter()
        .map(|(_, b)| b.dim())
        .filter(|&d| d == 2 || d >= 4)
        .collect();
    for d in dims {
        for &eps in &cfg.epsilons {
            let kind = if d == 2 {
                BoundKind::PlanarConstrainedDiameter
            } else {
                BoundKind::ConstrainedDiameter
            };
            let id = format!("constants_d{d}");
            collect(&mut rows, kind, &id, None, check_constraint_constants(d, eps, cfg));
        }
    }
    let key = |x: Option<f64>| x.unwrap_or(f64::NEG_INFINITY);
    rows.sort_by(|a, b| {
        a.body_id
            .cmp(&b.body_id)
            .then(a.group.cmp(&b.group))
            .then(a.kind.cmp(&b.kind))
            .then(key(a.alpha).total_cmp(&key(b.alpha)))
            .then(key(a.epsilon).total_cmp(&key(b.epsilon)))
    });
    Ledger { rows }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    /// Random ellipsoids per dimension in `dims`.
    pub ellipsoids_per_dim: usize,
    pub dims: Vec<usize>,
    /// Random planar ellipses.
    pub ellipses: usize,
    /// Random convex polygons (hulls of points in the unit disk).
    pub polygons: usize,
    /// Include cubes and capsules in `d = 2, 3`.
    pub solids: bool,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            ellipsoids_per_dim: 1000,
            dims: vec![3, 4, 5, 6],
            ellipses: 100,
            polygons: 100,
            solids: true,
            seed: 0,
        }
    }
}

/// Balls in `d = 2, …, 6`, random ellipsoids with log-uniform axes in
/// `[1/4, 4]`, random convex polygons, and optionally cubes and capsules.
pub fn standard_corpus(spec: &CorpusSpec) -> Result<Vec<(String, Body)>> {
    let mut out: Vec<(String, Body)> = (2..=6)
        .map(|d| (format!("ball_d{d}"), Body::unit_ball(d)))
        .collect();
    let mut index = 0u64;
    let mut next_rng = || {
        index += 1;
        stream(spec.seed, Channel::Sampling, index)
    };
    let log_uniform_axes = |rng: &mut rand_chacha::ChaCha12Rng, d: usize| -> Vec<f64> {
        (0..d)
            .map(|_| rng.random_range(-4f64.ln()..4f64.ln()).exp())
            .collect()
    };
    for &d in &spec.dims {
        for k in 0..spec.ellipsoids_per_dim {
            let mut rng = next_rng();
            let axes = log_uniform_axes(&mut rng, d);
            out.push((format!("ellipsoid_d{d}_{k:04}"), Body::ellipsoid(axes)?));
        }
    }
    for k in 0..spec.ellipses {
        let mut rng = next_rng();
        let axes = log_uniform_axes(&mut rng, 2);
        out.push((format!("ellipse_{k:04}"), Body::ellipsoid(axes)?));
    }
    for k in 0..spec.polygons {
        let mut rng = next_rng();
        loop {
            let m = rng.random_range(5..=14);
            let pts: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    let r = rng.random::<f64>().sqrt();
                    let t = rng.random_range(0.0..std::f64::consts::TAU);
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect();
            // thin hulls make poor test bodies; redraw them
            if let Ok(p) = hull_2d(&pts) {
                if p.inradius()?.1 > 0.1 {
                    out.push((format!("polygon_{k:04}"), Body::Polytope(p)));
                    break;
                }
            }
        }
    }
    if spec.solids {
        out.push(("cube_d2".into(), Body::Polytope(Polytope::cube(2, 1.0)?)));
        out.push(("cube_d3".into(), Body::Polytope(Polytope::cube(3, 1.0)?)));
        out.push((
            "capsule_d2".into(),
            Body::Capsule(Capsule::new(vec![-1.0, 0.0], vec![1.0, 0.0], 0.5)?),
        ));
        out.push((
            "capsule_d3".into(),
            Body::Capsule(Capsule::new(vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], 0.5)?),
        ));
    }
    Ok(out)
}
