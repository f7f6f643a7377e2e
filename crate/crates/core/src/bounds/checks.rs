use std::cell::OnceCell;
use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::{BoundKind, BoundReport, Status};
use crate::error::{invalid, Error, Result};
use crate::estimators::{Estimate, EstimatorConfig};
use crate::exact::{ball_constants, eccentricity};
use crate::functionals::{components, evaluate_components, Components, Evaluation, FunctionalId};
use crate::geometry::{john_pair, Body, JohnPair};
use crate::special::unit_ball_volume;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LedgerConfig {
    pub estimator: EstimatorConfig,
    /// α values for the `G_α` rows.
    pub g_alphas: Vec<f64>,
    /// α values for the `H_α` rows.
    pub h_alphas: Vec<f64>,
    /// ε values for the constrained-existence constants.
    pub epsilons: Vec<f64>,
    pub tol: f64,
    /// Standard errors allowed before a stochastic row counts as violated.
    pub sigma: f64,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        Self {
            estimator: EstimatorConfig::default(),
            g_alphas: vec![0.0, 1.0],
            h_alphas: vec![0.0, 1.0],
            epsilons: vec![0.0, 0.01],
            tol: 1e-10,
            sigma: 3.0,
        }
    }
}

/// A body with lazily computed, shared ingredients.
pub(crate) struct Subject<'a> {
    id: &'a str,
    body: &'a Body,
    cfg: &'a LedgerConfig,
    components: OnceCell<Result<Components>>,
    perimeter: OnceCell<Result<Estimate>>,
    john: OnceCell<Result<JohnPair>>,
}

impl<'a> Subject<'a> {
    pub(crate) fn new(id: &'a str, body: &'a Body, cfg: &'a LedgerConfig) -> Self {
        Self {
            id,
            body,
            cfg,
            components: OnceCell::new(),
            perimeter: OnceCell::new(),
            john: OnceCell::new(),
        }
    }

    fn d(&self) -> usize {
        self.body.dim()
    }

    /// Torsion, capacity and measure; the perimeter is attached per
    /// functional since it is only sometimes needed.
    fn components(&self) -> Result<&Components> {
        self.components
            .get_or_init(|| components(self.body, false, &self.cfg.estimator))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn perimeter_estimate(&self) -> Result<&Estimate> {
        self.perimeter
            .get_or_init(|| {
                let backend = if self.body.as_ellipsoid().is_some() {
                    "perimeter_quadrature"
                } else {
                    "geometry"
                };
                Ok(Estimate::exact(self.body.perimeter()?, backend))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn eval(&self, f: FunctionalId) -> Result<Evaluation> {
        let base = self.components()?;
        if f.needs_perimeter(self.d()) {
            let mut c = base.clone();
            c.perimeter = Some(self.perimeter_estimate()?.clone());
            evaluate_components(f, self.d(), &c)
        } else {
            evaluate_components(f, self.d(), base)
        }
    }

    /// Outer John axes in non-increasing order.
    fn axes(&self) -> Result<Vec<f64>> {
        let pair = self
            .john
            .get_or_init(|| john_pair(self.body))
            .as_ref()
            .map_err(Clone::clone)?;
        Ok(pair.outer_axes_sorted())
    }

    fn diameter_over_inradius(&self) -> Result<f64> {
        let (diam, r) = self.body.diameter_inradius()?;
        Ok(diam / r)
    }

    fn is_ellipsoid(&self) -> bool {
        self.body.as_ellipsoid().is_some()
    }

    fn ellipsoid_axes(&self) -> Option<Vec<f64>> {
        self.body.as_ellipsoid().map(|e| e.semi_axes().to_vec())
    }

    fn row(&self, kind: BoundKind, lhs: f64, rhs: f64) -> BoundReport {
        BoundReport::new(kind, self.id, lhs, rhs)
    }

    fn judged(&self, kind: BoundKind, lhs: f64, rhs: f64, stderr: f64) -> BoundReport {
        self.row(kind, lhs, rhs)
            .judged(stderr, self.cfg.tol, self.cfg.sigma)
    }

    /// The hypothesis `value ≥ ball` unless excluded by the error bars.
    fn at_least(&self, ev: &Evaluation, ball: f64) -> bool {
        ev.value + self.cfg.sigma * ev.stderr >= ball * (1.0 - self.cfg.tol)
    }

    /// Row for the implication `hypothesis ⇒ lhs ≤ rhs`.
    fn implication(&self, kind: BoundKind, hypothesis: bool, lhs: f64, rhs: f64) -> BoundReport {
        let mut r = if hypothesis {
            self.judged(kind, lhs, rhs, 0.0)
        } else {
            self.row(kind, lhs, rhs)
                .with_status(Status::Vacuous)
        };
        r.tol = self.cfg.tol;
        r.antecedent = Some(hypothesis);
        r
    }

    /// `diam/r ≤ exp(ln_rhs)`, in log scale when the bound overflows.
    fn diameter_implication(&self, kind: BoundKind, hypothesis: bool, ratio: f64, ln_rhs: f64) -> BoundReport {
        if ln_rhs < 600.0 {
            self.implication(kind, hypothesis, ratio, ln_rhs.exp())
        } else {
            self.implication(kind, hypothesis, ratio.ln(), ln_rhs)
                .log_scale()
        }
    }

    pub(crate) fn axis_ratio(&self) -> Result<Vec<BoundReport>> {
        let d = self.d();
        if d < 3 {
            return Err(Error::DimensionMismatch("axis-ratio bounds need d ≥ 3".into()));
        }
        let df = d as f64;
        let g = self.eval(FunctionalId::G)?;
        let g_ball = ball_constants(d, &[])?.g_ball()?;
        let b = self.axes()?;
        let (b_mid, b_min) = (b[d - 3], b[d - 1]);
        let prefactor = 2f64.powf(df / 2.0) * df.powi(2 * d as i32 + 1) / (df - 2.0);
        let log_term = (1.0 + (b_mid / b_min).powi(2)).ln();
        let mut rows = vec![self
            .judged(BoundKind::GJohnAxes, g.value, prefactor * g_ball / log_term, g.stderr)
            .detail("axis_ratio", b_mid / b_min)];
        let hypothesis = self.at_least(&g, g_ball);
        let exponent = 2f64.powf((df - 2.0) / 2.0) * df.powi(2 * d as i32 + 1) / (df - 2.0);
        rows.push(
            self.implication(BoundKind::JohnAxisRatio, hypothesis, (b_mid / b_min).ln(), exponent)
                .log_scale(),
        );
        if d == 3 {
            let ratio = self.diameter_over_inradius()?;
            let ln_rhs = (2.0 * 3f64.powi(8)).ln() + 3f64.powi(7);
            rows.push(
                self.implication(BoundKind::MaximiserDiameter, hypothesis, ratio.ln(), ln_rhs)
                    .log_scale(),
            );
        }
        Ok(rows)
    }

    pub(crate) fn g_bounds(&self) -> Result<Vec<BoundReport>> {
        let d = self.d();
        let g = self.eval(FunctionalId::G)?;
        let g_ball = ball_constants(d, &[])?.g_ball()?;
        let df = d as f64;
        let mut rows = Vec::new();
        if self.is_ellipsoid() {
            rows.push(self.judged(BoundKind::GEllipsoid, g.value, g_ball, g.stderr));
        }
        rows.push(self.judged(BoundKind::GConvex, g.value, df.powi(2 * d as i32) * g_ball, g.stderr));
        if let (Some(a), true) = (self.ellipsoid_axes(), d >= 4) {
            let c = eccentricity(&a)?.value;
            let q = df * (df - 3.0) / ((df - 1.0) * (df - 2.0));
            let rhs = g_ball * q / (1.0 - 1.0 / (1.0 + c.sqrt()));
            rows.push(
                self.judged(BoundKind::GEccentricity, g.value, rhs, g.stderr)
                    .detail("eccentricity", c),
            );
        }
        Ok(rows)
    }

    pub(crate) fn inradius_perimeter(&self) -> Result<Vec<BoundReport>> {
        let d = self.d();
        let vol = self.body.measure()?;
        let per = self.body.perimeter()?;
        let (diam, r) = self.body.diameter_inradius()?;
        let sphere = d as f64 * unit_ball_volume(d);
        Ok(vec![
            self.judged(BoundKind::VolumeInradiusPerimeter, vol, r * per, 0.0),
            self.judged(
                BoundKind::DiameterInradiusVolume,
                diam / r,
                sphere * diam.powi(d as i32) / vol,
                0.0,
            ),
        ])
    }

    pub(crate) fn planar(&self) -> Result<Vec<BoundReport>> {
        if self.d() != 2 {
            return Err(Error::DimensionMismatch("planar bounds need d = 2".into()));
        }
        let h = self.eval(FunctionalId::H)?;
        let h_ball = ball_constants(2, &[])?.h_ball()?;
        let mut rows = Vec::new();
        if let Some(a) = self.ellipsoid_axes() {
            let (b1, b2) = (a[0].max(a[1]), a[0].min(a[1]));
            rows.push(self.judged(BoundKind::HEllipse, h.value, h_ball, h.stderr));
            rows.push(self.judged(
                BoundKind::HAxisRatio,
                h.value,
                h_ball * (1.0 + b2 / b1) / SQRT_2,
                h.stderr,
            ));
        }
        rows.push(self.judged(BoundKind::HConvex, h.value, 8.0 * h_ball, h.stderr));
        if let Ok(per) = self.body.perimeter() {
            let b = self.axes()?;
            let rhombus = 2.0 * (b[0] * b[0] + b[1] * b[1]).sqrt();
            rows.push(self.judged(BoundKind::RhombusPerimeter, rhombus, per, 0.0));
        }
        Ok(rows)
    }

    pub(crate) fn planar_weighted(&self, alpha: f64) -> Result<Vec<BoundReport>> {
        if self.d() != 2 {
            return Err(Error::DimensionMismatch("H_α bounds need d = 2".into()));
        }
        if !(0.0..=1.5).contains(&alpha) {
            return invalid(format!("H_α bounds need α in [0, 3/2], got {alpha}"));
        }
        let h = self.eval(FunctionalId::HAlpha(alpha))?;
        let h_ball = ball_constants(2, &[])?.h_alpha(alpha)?;
        let mut rows = Vec::new();
        if self.is_ellipsoid() {
            rows.push(self.judged(BoundKind::HAlphaEllipse, h.value, h_ball, h.stderr));
        }
        let factor = 2f64.powf(2.0 * alpha) * PI.powf(3.0 - 2.0 * alpha);
        rows.push(
            self.judged(BoundKind::HAlphaConvex, h.value, factor * h_ball, h.stderr)
                .detail("factor", factor),
        );
        rows.push(if alpha < 1.5 {
            let ln_rhs = (3.0 + 2.0 * alpha) / (3.0 - 2.0 * alpha) * 2f64.ln() + 2.0 * PI.ln();
            self.diameter_implication(
                BoundKind::HAlphaDiameter,
                self.at_least(&h, h_ball),
                self.diameter_over_inradius()?,
                ln_rhs,
            )
        } else {
            self.row(BoundKind::HAlphaDiameter, alpha, 1.5)
                .with_status(Status::OutOfRegime)
                .note("stated for α < 3/2")
        });
        Ok(rows.into_iter().map(|r| r.alpha(alpha)).collect())
    }

    pub(crate) fn perimeter_weighted(&self, alpha: f64) -> Result<Vec<BoundReport>> {
        let d = self.d();
        if d < 3 {
            return Err(Error::DimensionMismatch("G_α bounds need d ≥ 3".into()));
        }
        if !(0.0..=2.0).contains(&alpha) {
            return invalid(format!("G_α bounds need α in [0, 2], got {alpha}"));
        }
        let df = d as f64;
        let g = self.eval(FunctionalId::GAlpha(alpha))?;
        let g_ball = ball_constants(d, &[])?.g_alpha(alpha)?;
        let mut rows = Vec::new();
        if self.is_ellipsoid() {
            rows.push(self.judged(BoundKind::GAlphaEllipsoid, g.value, g_ball, g.stderr));
        }
        rows.push(self.judged(
            BoundKind::GAlphaConvex,
            g.value,
            df.powi(2 * d as i32) * g_ball,
            g.stderr,
        ));
        rows.push(if alpha < 2.0 {
            let exponent =
                (2.0 * df * df + 2.0 * df - 2.0 * df * alpha + 2.0 - alpha) / (2.0 - alpha);
            self.diameter_implication(
                BoundKind::GAlphaDiameter,
                self.at_least(&g, g_ball),
                self.diameter_over_inradius()?,
                2f64.ln() + exponent * df.ln(),
            )
            .detail("exponent", exponent)
        } else {
            self.row(BoundKind::GAlphaDiameter, alpha, 2.0)
                .with_status(Status::OutOfRegime)
                .note("stated for α < 2")
        });
        Ok(rows.into_iter().map(|r| r.alpha(alpha)).collect())
    }
}

/// John-axis bounds for `G`: the unconditional logarithmic bound, and the
/// axis-ratio and (in `d = 3`) diameter implications for bodies with
/// `G(Ω) ≥ G(B₁)`.
pub fn check_axis_ratio(id: &str, body: &Body, cfg: &LedgerConfig) -> Result<Vec<BoundReport>> {
    Subject::new(id, body, cfg).axis_ratio()
}

/// `G ≤ d^{2d}G(B₁)`, and for ellipsoids `G ≤ G(B₁)` and the eccentricity
/// bound (`d ≥ 4`).
pub fn check_g_bounds(id: &str, body: &Body, cfg: &LedgerConfig) -> Result<Vec<BoundReport>> {
    Subject::new(id, body, cfg).g_bounds()
}

/// `|Ω| ≤ r(Ω)P(Ω)` and its diameter form.
pub fn check_inradius_perimeter(id: &str, body: &Body, cfg: &LedgerConfig) -> Result<Vec<BoundReport>> {
    Subject::new(id, body, cfg).inradius_perimeter()
}

/// Bounds for `H` and the rhombus perimeter bound.
pub fn check_planar(id: &str, body: &Body, cfg: &LedgerConfig) -> Result<Vec<BoundReport>> {
    Subject::new(id, body, cfg).planar()
}

pub fn check_planar_weighted(id: &str, body: &Body, alpha: f64, cfg: &LedgerConfig) -> Result<Vec<BoundReport>> {
    Subject::new(id, body, cfg).planar_weighted(alpha)
}

pub fn check_perimeter_weighted(id: &str, body: &Body, alpha: f64, cfg: &LedgerConfig) -> Result<Vec<BoundReport>> {
    Subject::new(id, body, cfg).perimeter_weighted(alpha)
}

/// `d(d−3)/((d−1)(d−2))`, the sharp eccentricity factor for `d ≥ 4`.
fn axis_factor(d: usize) -> f64 {
    let df = d as f64;
    df * (df - 3.0) / ((df - 1.0) * (df - 2.0))
}

fn constants_dimension(d: usize) -> Result<()> {
    if d == 2 || d >= 4 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "constrained-existence constants are stated for d = 2 or d ≥ 4, got {d}"
        )))
    }
}

/// Largest ε for which the constrained problem has a bounded maximiser.
pub fn critical_epsilon(d: usize) -> Result<f64> {
    constants_dimension(d)?;
    Ok(if d == 2 {
        2f64.cbrt() - 1.0
    } else {
        (1.0 / axis_factor(d)).sqrt() - 1.0
    })
}

/// Closed-form bound on `diam/r` for an ε-constrained maximiser. Infinite at
/// or beyond the critical ε.
pub fn constrained_diameter_bound(d: usize, epsilon: f64) -> f64 {
    let Ok(critical) = critical_epsilon(d) else {
        return f64::NAN;
    };
    if epsilon >= critical {
        return f64::INFINITY;
    }
    if d == 2 {
        return 2f64.powf(11.0 / 3.0) / (critical - epsilon);
    }
    let df = d as f64;
    let q = axis_factor(d);
    2f64.powi(d as i32)
        * (df * (df - 1.0).powi(d as i32) * (df - 2.0) / (df - 3.0)).sqrt()
        * (1.0 - q * (1.0 + epsilon).powi(2)).powi(1 - d as i32)
}

/// ε-constrained existence constants. `d ≥ 4`: critical ε and the
/// diameter-to-inradius bound; `d = 2`: the planar versions. Each diameter
/// row compares the estimate obtained along the way with the closed form
/// and checks that the bound increases without limit as ε approaches the
/// critical value.
pub fn check_constraint_constants(d: usize, epsilon: f64, cfg: &LedgerConfig) -> Result<Vec<BoundReport>> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return invalid(format!("ε must be non-negative, got {epsilon}"));
    }
    let id = format!("constants_d{d}");
    let df = d as f64;
    let critical = critical_epsilon(d)?;
    let closed = |e: f64| constrained_diameter_bound(d, e);
    let intermediate = |e: f64| -> f64 {
        if d == 2 {
            8.0 * (1.0 + e) / (SQRT_2 * (1.0 + e).powf(-1.5) - 1.0)
        } else {
            let q = axis_factor(d);
            let c = (df - 1.0).sqrt() / (1.0 - q * (1.0 + e).powi(2));
            df * 2f64.powi(d as i32) * c.powi(d as i32 - 1) * (1.0 + e)
        }
    };
    let (crit_kind, diam_kind) = if d == 2 {
        (BoundKind::PlanarCriticalEpsilon, BoundKind::PlanarConstrainedDiameter)
    } else {
        (BoundKind::CriticalEpsilon, BoundKind::ConstrainedDiameter)
    };
    let in_regime = epsilon < critical;
    let crit_row = BoundReport::new(crit_kind, &id, epsilon, critical)
        .with_status(if in_regime { Status::Pass } else { Status::OutOfRegime })
        .epsilon(epsilon);
    if !in_regime {
        let diam_row = BoundReport::new(diam_kind, &id, epsilon, critical)
            .with_status(Status::OutOfRegime)
            .epsilon(epsilon)
            .note("ε at or above the critical value");
        return Ok(vec![crit_row, diam_row]);
    }
    let grid: Vec<f64> = (0..=20)
        .map(|k| closed(epsilon + (critical - epsilon) * (1.0 - 0.5f64.powi(k))))
        .collect();
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let mut diam_row = BoundReport::new(diam_kind, &id, intermediate(epsilon), closed(epsilon))
        .judged(0.0, cfg.tol, cfg.sigma)
        .epsilon(epsilon)
        .detail("critical_epsilon", critical)
        .detail("growth_over_grid", grid[grid.len() - 1] / grid[0]);
    if d >= 4 {
        let q = axis_factor(d);
        diam_row = diam_row.detail(
            "axis_ratio_constant",
            (df - 1.0).sqrt() / (1.0 - q * (1.0 + epsilon).powi(2)),
        );
    }
    if !increasing {
        diam_row = diam_row
            .with_status(Status::Fail)
            .note("bound not increasing towards the critical ε");
    }
    Ok(vec![crit_row.detail("critical_epsilon", critical), diam_row])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Capsule, Polytope};

    fn cfg() -> LedgerConfig {
        LedgerConfig::default()
    }

    fn find(rows: &[BoundReport], kind: BoundKind) -> &BoundReport {
        rows.iter().find(|r| r.kind == kind).unwrap()
    }

    #[test]
    fn john_axis_exponent_in_three_dimensions() {
        let rows = check_axis_ratio("ball", &Body::unit_ball(3), &cfg()).unwrap();
        let r = find(&rows, BoundKind::JohnAxisRatio);
        assert!((r.rhs - 2187.0 * SQRT_2).abs() < 1e-9);
        assert_eq!(r.antecedent, Some(true));
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.status, Status::Pass);
        assert!(r.log_scale);
    }

    #[test]
    fn logarithmic_bound_dominates_prolate_value() {
        let b = Body::ellipsoid(vec![5.0, 1.0, 1.0]).unwrap();
        let rows = check_axis_ratio("e511", &b, &cfg()).unwrap();
        let r = find(&rows, BoundKind::GJohnAxes);
        assert!(r.rhs >= r.lhs && r.status == Status::Pass);
        // an elongated ellipsoid has G < G(B₁), so the implications are vacuous
        assert_eq!(find(&rows, BoundKind::JohnAxisRatio).status, Status::Vacuous);
        assert_eq!(find(&rows, BoundKind::MaximiserDiameter).status, Status::Vacuous);
    }

    #[test]
    fn convex_bound_constant() {
        let rows = check_g_bounds("ball", &Body::unit_ball(3), &cfg()).unwrap();
        assert!((find(&rows, BoundKind::GConvex).rhs - 145.8).abs() < 1e-10);
        let rows = check_g_bounds("ball5", &Body::unit_ball(5), &cfg()).unwrap();
        let r = find(&rows, BoundKind::GConvex);
        assert!((r.lhs - 3.0 / 7.0).abs() < 1e-12);
        assert!((r.rhs - 5f64.powi(10) * 3.0 / 7.0).abs() < 1e-6);
    }

    #[test]
    fn eccentricity_bound_at_c_four() {
        // axes (2,1,1,1): C = 4
        let b = Body::ellipsoid(vec![2.0, 1.0, 1.0, 1.0]).unwrap();
        let rows = check_g_bounds("ellipsoid_2111", &b, &cfg()).unwrap();
        let r = find(&rows, BoundKind::GEccentricity);
        assert!((r.rhs - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(r.status, Status::Pass);
    }

    #[test]
    fn critical_epsilons() {
        let rows = check_constraint_constants(4, 0.0, &cfg()).unwrap();
        assert!((rows[0].rhs - (1.5f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((rows[0].rhs - 0.224745).abs() < 1e-6);
        assert_eq!(rows[1].status, Status::Pass);
        let rows = check_constraint_constants(2, 0.0, &cfg()).unwrap();
        assert!((rows[0].rhs - 0.259921).abs() < 1e-6);
        assert!((rows[1].rhs - 48.86).abs() < 0.01);
        assert_eq!(rows[1].status, Status::Pass);
        let rows = check_constraint_constants(4, 0.3, &cfg()).unwrap();
        assert!(rows.iter().all(|r| r.status == Status::OutOfRegime));
        assert!(check_constraint_constants(3, 0.0, &cfg()).is_err());
    }

    #[test]
    fn constrained_diameter_closed_form() {
        for d in 4..=8 {
            let df = d as f64;
            let q = df * (df - 3.0) / ((df - 1.0) * (df - 2.0));
            for eps in [0.0, 0.5 * ((1.0 / q).sqrt() - 1.0)] {
                let rows = check_constraint_constants(d, eps, &cfg()).unwrap();
                let r = &rows[1];
                assert!(r.lhs < r.rhs && r.status == Status::Pass, "d={d}: {r:?}");
                // the closed form is the intermediate estimate with (1 + ε)
                // replaced by its upper bound q^{-1/2}
                let c = r.details["axis_ratio_constant"];
                let via_c = df * 2f64.powi(d as i32) * c.powi(d as i32 - 1) / q.sqrt();
                assert!((via_c - r.rhs).abs() <= 1e-12 * r.rhs, "d={d}");
                assert!(r.details["growth_over_grid"] > 1e6);
            }
        }
    }

    #[test]
    fn planar_constants() {
        let rows = check_planar_weighted("ball", &Body::unit_ball(2), 0.0, &cfg()).unwrap();
        assert!((find(&rows, BoundKind::HAlphaConvex).details["factor"] - PI.powi(3)).abs() < 1e-12);
        let d = find(&rows, BoundKind::HAlphaDiameter);
        assert!((d.rhs - 2.0 * PI * PI).abs() < 1e-12);
        assert_eq!(d.status, Status::Pass);
        let rows = check_planar_weighted("ball", &Body::unit_ball(2), 1.5, &cfg()).unwrap();
        assert!((find(&rows, BoundKind::HAlphaConvex).details["factor"] - 8.0).abs() < 1e-12);
        assert_eq!(find(&rows, BoundKind::HAlphaDiameter).status, Status::OutOfRegime);
    }

    #[test]
    fn ellipse_h_bounds() {
        let b = Body::ellipsoid(vec![2.0, 1.0]).unwrap();
        let rows = check_planar("ellipse_2_1", &b, &cfg()).unwrap();
        let r = find(&rows, BoundKind::HConvex);
        assert!((r.lhs - 3.0 / (4.0 * PI * 5f64.sqrt())).abs() < 1e-12);
        assert!(rows.iter().all(|r| r.status == Status::Pass), "{rows:#?}");
    }

    #[test]
    fn perimeter_weighted_diameter_constant() {
        let rows = check_perimeter_weighted("ball", &Body::unit_ball(3), 0.0, &cfg()).unwrap();
        let r = find(&rows, BoundKind::GAlphaDiameter);
        assert_eq!(r.details["exponent"], 13.0);
        assert!((r.rhs - 3_188_646.0).abs() < 1e-6);
        let c = find(&rows, BoundKind::GAlphaConvex);
        assert!((c.lhs / c.rhs - 3f64.powi(-6)).abs() < 1e-15);
        let rows = check_perimeter_weighted("ball", &Body::unit_ball(3), 2.0, &cfg()).unwrap();
        assert_eq!(find(&rows, BoundKind::GAlphaDiameter).status, Status::OutOfRegime);
        let e = Body::ellipsoid(vec![2.0, 1.0, 1.0]).unwrap();
        let rows = check_perimeter_weighted("ellipsoid_211", &e, 1.0, &cfg()).unwrap();
        assert_eq!(find(&rows, BoundKind::GAlphaEllipsoid).status, Status::Pass);
    }

    #[test]
    fn volume_inradius_perimeter_on_exact_bodies() {
        let bodies = [
            Body::Polytope(Polytope::cube(3, 1.0).unwrap()),
            Body::Polytope(Polytope::cube(2, 0.5).unwrap()),
            Body::Capsule(Capsule::new(vec![0.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], 0.5).unwrap()),
            Body::ellipsoid(vec![3.0, 1.0, 0.5]).unwrap(),
        ];
        for b in &bodies {
            let rows = check_inradius_perimeter("b", b, &cfg()).unwrap();
            assert!(rows.iter().all(|r| r.status == Status::Pass), "{rows:#?}");
        }
    }

    #[test]
    fn stochastic_rows_are_never_failed_inside_the_bracket() {
        let r = BoundReport::new(BoundKind::HConvex, "x", 1.01, 1.0).judged(0.01, 0.0, 3.0);
        assert_eq!(r.status, Status::Inconclusive);
        let r = BoundReport::new(BoundKind::HConvex, "x", 1.05, 1.0).judged(0.01, 0.0, 3.0);
        assert_eq!(r.status, Status::Fail);
        let r = BoundReport::new(BoundKind::HConvex, "x", 1.0 + 1e-11, 1.0).judged(0.0, 1e-10, 3.0);
        assert_eq!(r.status, Status::Pass);
    }
}
