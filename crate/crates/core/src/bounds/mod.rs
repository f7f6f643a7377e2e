//! Executable upper bounds for the shape functionals, checked body by body
//! and collected into a ledger.

mod checks;
mod ledger;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use checks::{
    check_axis_ratio, check_constraint_constants, check_g_bounds, check_inradius_perimeter,
    constrained_diameter_bound, critical_epsilon,
    check_perimeter_weighted, check_planar, check_planar_weighted, LedgerConfig,
};
pub use ledger::{ledger, standard_corpus, CorpusSpec, Ledger, Summary};

/// Families of related inequalities; every [`BoundKind`] belongs to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundGroup {
    /// Axis-ratio control of near-maximisers of `G`.
    AxisRatio,
    /// `G` over ellipsoids is maximal at the ball.
    EllipsoidMaximum,
    /// `G ≤ d^{2d} G(B₁)` on convex bodies.
    ConvexBound,
    /// Eccentricity bound for `G` on ellipsoids, `d ≥ 4`.
    Eccentricity,
    /// Constants of the existence result under an ellipsoid-volume
    /// constraint, and the volume/inradius/perimeter chain behind it.
    ConstrainedExistence,
    /// `H` over ellipses and planar convex bodies.
    Planar,
    /// Planar analogue of [`BoundGroup::ConstrainedExistence`].
    PlanarConstrainedExistence,
    /// `G_α` bounds.
    PerimeterWeighted,
    /// `H_α` bounds.
    PlanarPerimeterWeighted,
}

/// One row type of the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `d = 3`: a maximiser of `G` has `diam/r ≤ 2·3⁸·e^{3⁷}` (log scale).
    MaximiserDiameter,
    /// If `G(Ω) ≥ G(B₁)`: `b_{d−2}/b_d ≤ exp(2^{(d−2)/2} d^{2d+1}/(d−2))`
    /// for the outer John axes (log scale).
    JohnAxisRatio,
    /// `G ≤ 2^{d/2}d^{2d+1}/(d−2) · G(B₁) / log(1 + b_{d−2}²/b_d²)`.
    GJohnAxes,
    /// `G(E) ≤ G(B₁)` for ellipsoids.
    GEllipsoid,
    /// `G ≤ d^{2d} G(B₁)`.
    GConvex,
    /// `G(E) ≤ G(B₁)·d(d−3)/((d−1)(d−2))·(1 − 1/(1 + C(a)^{1/2}))⁻¹`.
    GEccentricity,
    /// `ε < ((d−1)(d−2)/(d(d−3)))^{1/2} − 1`.
    CriticalEpsilon,
    /// Diameter-to-inradius bound of a constrained maximiser; the
    /// intermediate estimate is compared with the closed form.
    ConstrainedDiameter,
    /// `|Ω| ≤ r(Ω) P(Ω)`.
    VolumeInradiusPerimeter,
    /// `diam/r ≤ dω_d diam^d / |Ω|`.
    DiameterInradiusVolume,
    /// `H(E) ≤ H(B₁)` for ellipses.
    HEllipse,
    /// `H ≤ 8 H(B₁)`.
    HConvex,
    /// `H(E(b₁, b₂)) ≤ 2^{−1/2} H(B₁)(1 + b₂/b₁)`.
    HAxisRatio,
    /// `ε < 2^{1/3} − 1`.
    PlanarCriticalEpsilon,
    /// `diam/r ≤ 2^{11/3}/(2^{1/3} − 1 − ε)`, against the intermediate
    /// estimate.
    PlanarConstrainedDiameter,
    /// `G_α(E) ≤ G_α(B₁)` for ellipsoids.
    GAlphaEllipsoid,
    /// `G_α ≤ d^{2d} G_α(B₁)`.
    GAlphaConvex,
    /// If `G_α(Ω) ≥ G_α(B₁)`: `diam/r ≤ 2d^{(2d²+2d−2dα+2−α)/(2−α)}`.
    GAlphaDiameter,
    /// `H_α(E) ≤ H_α(B₁)` for ellipses.
    HAlphaEllipse,
    /// `H_α ≤ 2^{2α} π^{3−2α} H_α(B₁)`.
    HAlphaConvex,
    /// If `H_α(Ω) ≥ H_α(B₁)`: `diam/r ≤ 2^{(3+2α)/(3−2α)} π²`.
    HAlphaDiameter,
    /// `P(Ω) ≥ 2(b₁² + b₂²)^{1/2}` for the outer John axes.
    RhombusPerimeter,
}

impl BoundKind {
    pub const ALL: [BoundKind; 22] = [
        BoundKind::MaximiserDiameter,
        BoundKind::JohnAxisRatio,
        BoundKind::GJohnAxes,
        BoundKind::GEllipsoid,
        BoundKind::GConvex,
        BoundKind::GEccentricity,
        BoundKind::CriticalEpsilon,
        BoundKind::ConstrainedDiameter,
        BoundKind::VolumeInradiusPerimeter,
        BoundKind::DiameterInradiusVolume,
        BoundKind::HEllipse,
        BoundKind::HConvex,
        BoundKind::HAxisRatio,
        BoundKind::PlanarCriticalEpsilon,
        BoundKind::PlanarConstrainedDiameter,
        BoundKind::GAlphaEllipsoid,
        BoundKind::GAlphaConvex,
        BoundKind::GAlphaDiameter,
        BoundKind::HAlphaEllipse,
        BoundKind::HAlphaConvex,
        BoundKind::HAlphaDiameter,
        BoundKind::RhombusPerimeter,
    ];

    pub fn group(self) -> BoundGroup {
        use BoundKind::*;
        match self {
            MaximiserDiameter | JohnAxisRatio | GJohnAxes => BoundGroup::AxisRatio,
            GEllipsoid => BoundGroup::EllipsoidMaximum,
            GConvex => BoundGroup::ConvexBound,
            GEccentricity => BoundGroup::Eccentricity,
            CriticalEpsilon | ConstrainedDiameter | VolumeInradiusPerimeter
            | DiameterInradiusVolume => BoundGroup::ConstrainedExistence,
            HEllipse | HConvex | HAxisRatio => BoundGroup::Planar,
            PlanarCriticalEpsilon | PlanarConstrainedDiameter => {
                BoundGroup::PlanarConstrainedExistence
            }
            GAlphaEllipsoid | GAlphaConvex | GAlphaDiameter => BoundGroup::PerimeterWeighted,
            HAlphaEllipse | HAlphaConvex | HAlphaDiameter | RhombusPerimeter => {
                BoundGroup::PlanarPerimeterWeighted
            }
        }
    }

    pub fn name(self) -> &'static str {
        use BoundKind::*;
        match self {
            MaximiserDiameter => "maximiser_diameter",
            JohnAxisRatio => "john_axis_ratio",
            GJohnAxes => "g_john_axes",
            GEllipsoid => "g_ellipsoid",
            GConvex => "g_convex",
            GEccentricity => "g_eccentricity",
            CriticalEpsilon => "critical_epsilon",
            ConstrainedDiameter => "constrained_diameter",
            VolumeInradiusPerimeter => "volume_inradius_perimeter",
            DiameterInradiusVolume => "diameter_inradius_volume",
            HEllipse => "h_ellipse",
            HConvex => "h_convex",
            HAxisRatio => "h_axis_ratio",
            PlanarCriticalEpsilon => "planar_critical_epsilon",
            PlanarConstrainedDiameter => "planar_constrained_diameter",
            GAlphaEllipsoid => "g_alpha_ellipsoid",
            GAlphaConvex => "g_alpha_convex",
            GAlphaDiameter => "g_alpha_diameter",
            HAlphaEllipse => "h_alpha_ellipse",
            HAlphaConvex => "h_alpha_convex",
            HAlphaDiameter => "h_alpha_diameter",
            RhombusPerimeter => "rhombus_perimeter",
        }
    }
}

impl BoundGroup {
    pub const ALL: [BoundGroup; 9] = [
        BoundGroup::AxisRatio,
        BoundGroup::EllipsoidMaximum,
        BoundGroup::ConvexBound,
        BoundGroup::Eccentricity,
        BoundGroup::ConstrainedExistence,
        BoundGroup::Planar,
        BoundGroup::PlanarConstrainedExistence,
        BoundGroup::PerimeterWeighted,
        BoundGroup::PlanarPerimeterWeighted,
    ];

    pub fn kinds(self) -> Vec<BoundKind> {
        BoundKind::ALL
            .into_iter()
            .filter(|k| k.group() == self)
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundGroup::AxisRatio => "axis_ratio",
            BoundGroup::EllipsoidMaximum => "ellipsoid_maximum",
            BoundGroup::ConvexBound => "convex_bound",
            BoundGroup::Eccentricity => "eccentricity",
            BoundGroup::ConstrainedExistence => "constrained_existence",
            BoundGroup::Planar => "planar",
            BoundGroup::PlanarConstrainedExistence => "planar_constrained_existence",
            BoundGroup::PerimeterWeighted => "perimeter_weighted",
            BoundGroup::PlanarPerimeterWeighted => "planar_perimeter_weighted",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.group().name(), self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The left side exceeds the bound but by less than `σ` standard errors.
    Inconclusive,
    /// The hypothesis of an implication does not hold.
    Vacuous,
    /// Parameters outside the range where the bound is stated.
    OutOfRegime,
    /// The check could not be computed.
    Error,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
            Status::Vacuous => "vacuous",
            Status::OutOfRegime => "out_of_regime",
            Status::Error => "error",
        }
    }
}

/// One inequality instance `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub group: BoundGroup,
    pub kind: BoundKind,
    pub body_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    /// Standard error of `lhs`.
    pub stderr: f64,
    /// Relative tolerance: exact rows pass iff `lhs ≤ rhs·(1 + tol)`.
    pub tol: f64,
    /// `lhs` and `rhs` are natural logarithms.
    pub log_scale: bool,
    /// Whether the hypothesis held, for implications.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antecedent: Option<bool>,
    pub status: Status,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    pub(crate) fn new(kind: BoundKind, body_id: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            group: kind.group(),
            kind,
            body_id: body_id.to_string(),
            alpha: None,
            epsilon: None,
            lhs,
            rhs,
            slack: rhs - lhs,
            stderr: 0.0,
            tol: 0.0,
            log_scale: false,
            antecedent: None,
            status: Status::Pass,
            pass: true,
            details: BTreeMap::new(),
            note: None,
        }
    }

    pub(crate) fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self.pass = matches!(status, Status::Pass | Status::Vacuous);
        self
    }

    /// Pass when `lhs + σ·se ≤ rhs(1 + tol)`, fail when even `lhs − σ·se`
    /// exceeds it, inconclusive in between.
    pub(crate) fn judged(mut self, stderr: f64, tol: f64, sigma: f64) -> Self {
        self.stderr = stderr;
        self.tol = tol;
        let limit = self.rhs + tol * self.rhs.abs();
        let status = if !(self.lhs.is_finite() && self.rhs.is_finite()) {
            Status::Error
        } else if self.lhs + sigma * stderr <= limit {
            Status::Pass
        } else if self.lhs - sigma * stderr <= limit {
            Status::Inconclusive
        } else {
            Status::Fail
        };
        self.with_status(status)
    }

    pub(crate) fn alpha(mut self, a: f64) -> Self {
        self.alpha = Some(a);
        self
    }

    pub(crate) fn epsilon(mut self, e: f64) -> Self {
        self.epsilon = Some(e);
        self
    }

    pub(crate) fn log_scale(mut self) -> Self {
        self.log_scale = true;
        self
    }

    pub(crate) fn detail(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }

    pub(crate) fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn is_failure(&self) -> bool {
        matches!(self.status, Status::Fail | Status::Error)
    }
}
