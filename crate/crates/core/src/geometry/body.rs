use serde::{Deserialize, Serialize};

use super::ellipsoid::project_local;
use super::{dist, dot, norm, segment_distance, Ellipsoid, Halfspace, Polytope};
use crate::error::{invalid, unsupported, Error, Result};
use crate::special::{ellipse_perimeter, unit_ball_volume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return invalid(format!("ball radius must be positive, got {radius}"));
        }
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return invalid("ball centre must be a finite point");
        }
        Ok(Self { center, radius })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    fn signed_distance(&self, x: &[f64]) -> f64 {
        dist(x, &self.center) - self.radius
    }
}

/// Convex hull of two balls of equal radius: all points within `radius` of
/// the segment `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub radius: f64,
}

impl Capsule {
    pub fn new(a: Vec<f64>, b: Vec<f64>, radius: f64) -> Result<Self> {
        if a.len() != b.len() || a.len() < 2 {
            return invalid("capsule endpoints must share a dimension ≥ 2");
        }
        if a.iter().chain(&b).any(|c| !c.is_finite()) {
            return invalid("capsule endpoints must be finite");
        }
        if !(radius.is_finite() && radius > 0.0) {
            return invalid("capsule radius must be positive");
        }
        Ok(Self { a, b, radius })
    }

    pub fn length(&self) -> f64 {
        dist(&self.a, &self.b)
    }

    fn midpoint(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(x, y)| 0.5 * (x + y)).collect()
    }
}

/// Finite union of closed balls.
#[derive(Debug, Clone, PartialEq)]
pub struct BallUnion {
    balls: Vec<Ball>,
    disjoint: bool,
}

impl BallUnion {
    pub fn new(balls: Vec<Ball>) -> Result<Self> {
        let d = match balls.first() {
            Some(b) => b.center.len(),
            None => return invalid("ball union needs at least one ball"),
        };
        if balls.iter().any(|b| b.center.len() != d) {
            return invalid("all balls in a union must share a dimension");
        }
        for b in &balls {
            Ball::new(b.center.clone(), b.radius)?;
        }
        let disjoint = balls.iter().enumerate().all(|(i, bi)| {
            balls[i + 1..]
                .iter()
                .all(|bj| dist(&bi.center, &bj.center) > bi.radius + bj.radius)
        });
        Ok(Self { balls, disjoint })
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn is_disjoint(&self) -> bool {
        self.disjoint
    }
}

/// `E(a) ∩ {|x_k| ≤ h}` for an axis-aligned ellipsoid centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidSlab {
    semi_axes: Vec<f64>,
    axis: usize,
    half_width: f64,
}

impl EllipsoidSlab {
    pub fn new(semi_axes: Vec<f64>, axis: usize, half_width: f64) -> Result<Self> {
        Ellipsoid::new(semi_axes.clone())?;
        if semi_axes.len() < 2 {
            return invalid("ellipsoid slab needs d ≥ 2");
        }
        if axis >= semi_axes.len() {
            return invalid("slab axis out of range");
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return invalid("slab half-width must be positive");
        }
        Ok(Self {
            semi_axes,
            axis,
            half_width,
        })
    }

    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn ellipsoid(&self) -> Ellipsoid {
        Ellipsoid::new(self.semi_axes.clone()).expect("validated axes")
    }

    /// True when the slab does not cut the ellipsoid.
    pub fn is_uncut(&self) -> bool {
        self.half_width >= self.semi_axes[self.axis]
    }

    fn ak(&self) -> f64 {
        self.semi_axes[self.axis]
    }

    /// Semi-axes of the cross-section `E ∩ {x_k = ±h}` (coordinate `k` removed).
    fn face_axes(&self) -> Vec<f64> {
        let s = (1.0 - (self.half_width / self.ak()).powi(2)).max(0.0).sqrt();
        self.semi_axes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.axis)
            .map(|(_, a)| a * s)
            .collect()
    }

    fn drop_axis(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .filter(|(i, _)| *i != self.axis)
            .map(|(_, v)| *v)
            .collect()
    }

    fn insert_axis(&self, rest: &[f64], xk: f64) -> Vec<f64> {
        let mut out = rest.to_vec();
        out.insert(self.axis, xk);
        out
    }

    /// `∫_{−h}^{h} ω_{d−1} ∏_{i≠k} aᵢ (1 − t²/a_k²)^{(d−1)/2} dt`, via
    /// `t = a_k sin θ` and the reduction formula for `∫ cosⁿ`.
    pub fn volume(&self) -> f64 {
        let d = self.semi_axes.len();
        let prod: f64 = self.semi_axes.iter().product();
        if self.is_uncut() {
            return unit_ball_volume(d) * prod;
        }
        let theta = (self.half_width / self.ak()).asin();
        let (s, c) = theta.sin_cos();
        let mut i_prev = theta; // n = 0
        let mut i_cur = s; // n = 1
        for n in 2..=d {
            let next = c.powi(n as i32 - 1) * s / n as f64 + (n as f64 - 1.0) / n as f64 * i_prev;
            i_prev = i_cur;
            i_cur = next;
        }
        2.0 * unit_ball_volume(d - 1) * prod * i_cur
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x[self.axis].abs() < self.half_width && self.ellipsoid().contains(x)
    }

    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        let e = self.ellipsoid();
        let de = e.signed_distance(x);
        let ds = x[self.axis].abs() - self.half_width;
        if self.is_uncut() {
            return de;
        }
        if de <= 0.0 && ds <= 0.0 {
            return de.max(ds);
        }
        // Exterior: nearest feasible candidate among the projections onto
        // the curved part, the flat part and the two rim cross-sections.
        let mut best = f64::INFINITY;
        if de > 0.0 {
            let p = e.boundary_projection(x);
            if p[self.axis].abs() <= self.half_width {
                best = best.min(de);
            }
        }
        if ds > 0.0 {
            let mut p = x.to_vec();
            p[self.axis] = self.half_width * x[self.axis].signum();
            if e.level(&p) <= 1.0 {
                best = best.min(ds);
            }
        }
        let fa = self.face_axes();
        let rest = self.drop_axis(x);
        let lvl: f64 = rest.iter().zip(&fa).map(|(y, a)| (y / a).powi(2)).sum();
        let proj = if lvl <= 1.0 {
            rest.clone()
        } else {
            project_local(&fa, &rest).0
        };
        for sign in [1.0, -1.0] {
            let p = self.insert_axis(&proj, sign * self.half_width);
            best = best.min(dist(x, &p));
        }
        best
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        dot(&self.support_point(u), u)
    }

    pub fn support_point(&self, u: &[f64]) -> Vec<f64> {
        let e = self.ellipsoid();
        let p = e.support_point(u);
        if p[self.axis].abs() <= self.half_width {
            return p;
        }
        let sign = p[self.axis].signum();
        let fa = self.face_axes();
        let v = self.drop_axis(u);
        let s: f64 = v
            .iter()
            .zip(&fa)
            .map(|(v, a)| (v * a).powi(2))
            .sum::<f64>()
            .sqrt();
        let rest: Vec<f64> = if s > 0.0 {
            v.iter().zip(&fa).map(|(v, a)| a * a * v / s).collect()
        } else {
            vec![0.0; fa.len()]
        };
        self.insert_axis(&rest, sign * self.half_width)
    }

    pub fn diameter(&self) -> f64 {
        let ak = self.ak();
        let m = self
            .semi_axes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.axis)
            .map(|(_, a)| *a)
            .fold(0.0, f64::max);
        let s = if ak > m {
            self.half_width.min(ak).powi(2)
        } else {
            0.0
        };
        2.0 * (m * m + s * (1.0 - m * m / (ak * ak))).sqrt()
    }

    pub fn inradius(&self) -> f64 {
        let amin = self.semi_axes.iter().copied().fold(f64::INFINITY, f64::min);
        amin.min(self.half_width)
    }

    /// Boundary length of the planar cut ellipse: the two elliptic arcs plus
    /// the two chords.
    fn perimeter_2d(&self) -> Result<f64> {
        use crate::quad::integrate;
        let (a1, a2) = (self.semi_axes[0], self.semi_axes[1]);
        if self.is_uncut() {
            return Ok(ellipse_perimeter(a1, a2));
        }
        // parameter θ with x = (a1 cos θ, a2 sin θ); the cut coordinate is
        // x_k, so arcs lie where |x_k| ≤ h.
        let speed = |t: f64| ((a1 * t.sin()).powi(2) + (a2 * t.cos()).powi(2)).sqrt();
        let r = self.half_width / self.ak();
        let arcs = if self.axis == 1 {
            // |sin θ| ≤ r: arcs around θ = 0 and θ = π
            2.0 * integrate(speed, -r.asin(), r.asin(), 1e-13, 0.0)?.value
        } else {
            // |cos θ| ≤ r: arcs around θ = ±π/2
            let t0 = r.acos();
            2.0 * integrate(speed, t0, std::f64::consts::PI - t0, 1e-13, 0.0)?.value
        };
        let chord = 2.0 * self.face_axes()[0];
        Ok(arcs + 2.0 * chord)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            semi_axes: self.semi_axes.iter().map(|a| a * t).collect(),
            axis: self.axis,
            half_width: self.half_width * t,
        }
    }
}

/// A shape description. Every variant answers the same geometric queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodyDto", into = "BodyDto")]
pub enum Body {
    Ball(Ball),
    Ellipsoid(Ellipsoid),
    Polytope(Polytope),
    Capsule(Capsule),
    BallUnion(BallUnion),
    EllipsoidSlab(EllipsoidSlab),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum BodyDto {
    Ball {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<Vec<f64>>,
    },
    Polytope {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertices: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        halfspaces: Option<Vec<Halfspace>>,
    },
    Capsule {
        endpoints: [Vec<f64>; 2],
        radius: f64,
    },
    BallUnion {
        balls: Vec<Ball>,
    },
    EllipsoidSlab {
        semi_axes: Vec<f64>,
        axis: usize,
        half_width: f64,
    },
}

impl TryFrom<BodyDto> for Body {
    type Error = Error;

    fn try_from(dto: BodyDto) -> Result<Self> {
        Ok(match dto {
            BodyDto::Ball { radius, center, dim } => {
                let center = match (center, dim) {
                    (Some(c), Some(d)) if c.len() != d => {
                        return invalid("ball centre does not match dim")
                    }
                    (Some(c), _) => c,
                    (None, Some(d)) => vec![0.0; d],
                    (None, None) => return invalid("ball needs a centre or a dim"),
                };
                if center.len() < 2 {
                    return invalid("bodies must have dimension ≥ 2");
                }
                Body::Ball(Ball::new(center, radius)?)
            }
            BodyDto::Ellipsoid {
                semi_axes,
                center,
                rotation,
            } => {
                if semi_axes.len() < 2 {
                    return invalid("bodies must have dimension ≥ 2");
                }
                let d = semi_axes.len();
                Body::Ellipsoid(Ellipsoid::with_frame(
                    semi_axes,
                    center.unwrap_or_else(|| vec![0.0; d]),
                    rotation,
                )?)
            }
            BodyDto::Polytope {
                vertices,
                halfspaces,
            } => {
                let halfspaces = halfspaces
                    .map(|hs| {
                        hs.into_iter()
                            .map(|h| Halfspace::new(h.normal, h.offset))
                            .collect::<Result<Vec<_>>>()
                    })
                    .transpose()?;
                Body::Polytope(match (vertices, halfspaces) {
                    (Some(v), Some(h)) => Polytope::new(v, h)?,
                    (Some(v), None) => Polytope::from_vertices(v)?,
                    (None, Some(h)) => Polytope::from_halfspaces(h)?,
                    (None, None) => return invalid("polytope needs vertices or halfspaces"),
                })
            }
            BodyDto::Capsule { endpoints, radius } => {
                let [a, b] = endpoints;
                Body::Capsule(Capsule::new(a, b, radius)?)
            }
            BodyDto::BallUnion { balls } => {
                if balls.first().is_some_and(|b| b.center.len() < 2) {
                    return invalid("bodies must have dimension ≥ 2");
                }
                Body::BallUnion(BallUnion::new(balls)?)
            }
            BodyDto::EllipsoidSlab {
                semi_axes,
                axis,
                half_width,
            } => Body::EllipsoidSlab(EllipsoidSlab::new(semi_axes, axis, half_width)?),
        })
    }
}

impl From<Body> for BodyDto {
    fn from(body: Body) -> Self {
        match body {
            Body::Ball(b) => BodyDto::Ball {
                radius: b.radius,
                center: Some(b.center),
                dim: None,
            },
            Body::Ellipsoid(e) => BodyDto::Ellipsoid {
                semi_axes: e.semi_axes().to_vec(),
                center: Some(e.center().to_vec()),
                rotation: e.rotation().map(<[f64]>::to_vec),
            },
            Body::Polytope(p) => BodyDto::Polytope {
                vertices: Some(p.vertices().to_vec()),
                halfspaces: Some(p.halfspaces().to_vec()),
            },
            Body::Capsule(c) => BodyDto::Capsule {
                endpoints: [c.a, c.b],
                radius: c.radius,
            },
            Body::BallUnion(u) => BodyDto::BallUnion { balls: u.balls },
            Body::EllipsoidSlab(s) => BodyDto::EllipsoidSlab {
                semi_axes: s.semi_axes,
                axis: s.axis,
                half_width: s.half_width,
            },
        }
    }
}

impl Body {
    pub fn unit_ball(dim: usize) -> Self {
        Body::Ball(Ball::unit(dim))
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> Result<Self> {
        Ok(Body::Ellipsoid(Ellipsoid::new(semi_axes)?))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("body JSON: {e}")))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Body::Ball(_) => "ball",
            Body::Ellipsoid(_) => "ellipsoid",
            Body::Polytope(_) => "polytope",
            Body::Capsule(_) => "capsule",
            Body::BallUnion(_) => "ball_union",
            Body::EllipsoidSlab(_) => "ellipsoid_slab",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Ball(b) => b.center.len(),
            Body::Ellipsoid(e) => e.dim(),
            Body::Polytope(p) => p.dim(),
            Body::Capsule(c) => c.a.len(),
            Body::BallUnion(u) => u.balls[0].center.len(),
            Body::EllipsoidSlab(s) => s.semi_axes.len(),
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            Body::BallUnion(u) => u.balls.len() == 1,
            _ => true,
        }
    }

    /// The body as an ellipsoid when it is one (balls, ellipsoids, slabs
    /// that do not cut).
    pub fn as_ellipsoid(&self) -> Option<Ellipsoid> {
        match self {
            Body::Ball(b) => Some(
                Ellipsoid::with_frame(vec![b.radius; b.center.len()], b.center.clone(), None)
                    .expect("validated ball"),
            ),
            Body::Ellipsoid(e) => Some(e.clone()),
            Body::EllipsoidSlab(s) if s.is_uncut() => Some(s.ellipsoid()),
            Body::BallUnion(u) if u.balls.len() == 1 => {
                let b = &u.balls[0];
                Ellipsoid::with_frame(vec![b.radius; b.center.len()], b.center.clone(), None).ok()
            }
            _ => None,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Body::Ball(b) => dist(x, &b.center) < b.radius,
            Body::Ellipsoid(e) => e.contains(x),
            Body::Polytope(p) => p.contains(x),
            Body::Capsule(c) => segment_distance(x, &c.a, &c.b) < c.radius,
            Body::BallUnion(u) => u.balls.iter().any(|b| dist(x, &b.center) < b.radius),
            Body::EllipsoidSlab(s) => s.contains(x),
        }
    }

    /// Signed Euclidean distance to the boundary, negative inside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            Body::Ball(b) => b.signed_distance(x),
            Body::Ellipsoid(e) => e.signed_distance(x),
            Body::Polytope(p) => p.signed_distance(x),
            Body::Capsule(c) => segment_distance(x, &c.a, &c.b) - c.radius,
            Body::BallUnion(u) => u
                .balls
                .iter()
                .map(|b| b.signed_distance(x))
                .fold(f64::INFINITY, f64::min),
            Body::EllipsoidSlab(s) => s.signed_distance(x),
        }
    }

    /// Cheap signed distance with the sign of the exact one and magnitude
    /// never larger. Sufficient for sizing walk-on-spheres steps.
    pub fn signed_distance_bound(&self, x: &[f64]) -> f64 {
        match self {
            Body::Ellipsoid(e) => e.signed_distance_bound(x),
            Body::Polytope(p) if p.max_violation(x) > 0.0 => p.max_violation(x),
            Body::EllipsoidSlab(s) if !s.is_uncut() => {
                let de = s.ellipsoid().signed_distance_bound(x);
                let ds = x[s.axis].abs() - s.half_width;
                de.max(ds)
            }
            Body::EllipsoidSlab(s) => s.ellipsoid().signed_distance_bound(x),
            _ => self.signed_distance(x),
        }
    }

    /// Support function of the closed convex hull.
    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            Body::Ball(b) => dot(&b.center, u) + b.radius * norm(u),
            Body::Ellipsoid(e) => e.support(u),
            Body::Polytope(p) => p.support(u),
            Body::Capsule(c) => dot(&c.a, u).max(dot(&c.b, u)) + c.radius * norm(u),
            Body::BallUnion(bu) => bu
                .balls
                .iter()
                .map(|b| dot(&b.center, u) + b.radius * norm(u))
                .fold(f64::NEG_INFINITY, f64::max),
            Body::EllipsoidSlab(s) => s.support(u),
        }
    }

    /// A boundary point attaining `support(u)`.
    pub fn support_point(&self, u: &[f64]) -> Vec<f64> {
        let ball_point = |c: &[f64], r: f64| -> Vec<f64> {
            let n = norm(u);
            c.iter().zip(u).map(|(c, u)| c + r * u / n).collect()
        };
        match self {
            Body::Ball(b) => ball_point(&b.center, b.radius),
            Body::Ellipsoid(e) => e.support_point(u),
            Body::Polytope(p) => p.support_point(u),
            Body::Capsule(c) => {
                let end = if dot(&c.a, u) >= dot(&c.b, u) { &c.a } else { &c.b };
                ball_point(end, c.radius)
            }
            Body::BallUnion(bu) => {
                let b = bu
                    .balls
                    .iter()
                    .max_by(|x, y| {
                        let sx = dot(&x.center, u) + x.radius * norm(u);
                        let sy = dot(&y.center, u) + y.radius * norm(u);
                        sx.total_cmp(&sy)
                    })
                    .expect("non-empty union");
                ball_point(&b.center, b.radius)
            }
            Body::EllipsoidSlab(s) => s.support_point(u),
        }
    }

    /// A ball containing the body: `(centre, radius)`.
    pub fn bounding_ball(&self) -> (Vec<f64>, f64) {
        match self {
            Body::Ball(b) => (b.center.clone(), b.radius),
            Body::Ellipsoid(e) => (e.center().to_vec(), e.max_axis()),
            Body::Polytope(p) => {
                let c = p.vertex_centroid();
                let r = p.vertices().iter().map(|v| dist(v, &c)).fold(0.0, f64::max);
                (c, r)
            }
            Body::Capsule(c) => (c.midpoint(), 0.5 * c.length() + c.radius),
            Body::BallUnion(_) => {
                let (lo, hi) = self.bounding_box();
                let c: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
                let r = self.as_union_balls().map(|b| dist(&b.center, &c) + b.radius).fold(0.0, f64::max);
                (c, r)
            }
            Body::EllipsoidSlab(s) => (vec![0.0; s.semi_axes.len()], 0.5 * s.diameter()),
        }
    }

    fn as_union_balls(&self) -> impl Iterator<Item = &Ball> {
        match self {
            Body::BallUnion(u) => u.balls.iter(),
            _ => [].iter(),
        }
    }

    /// Axis-aligned bounding box `(lower, upper)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            hi[i] = self.support(&e);
            e[i] = -1.0;
            lo[i] = -self.support(&e);
        }
        (lo, hi)
    }

    /// Lebesgue measure `|Ω|`.
    pub fn measure(&self) -> Result<f64> {
        let d = self.dim();
        match self {
            Body::Ball(b) => Ok(unit_ball_volume(d) * b.radius.powi(d as i32)),
            Body::Ellipsoid(e) => Ok(e.volume()),
            Body::Polytope(p) => p.volume(),
            Body::Capsule(c) => Ok(unit_ball_volume(d - 1) * c.radius.powi(d as i32 - 1) * c.length()
                + unit_ball_volume(d) * c.radius.powi(d as i32)),
            Body::BallUnion(u) => {
                if !u.disjoint {
                    return unsupported("volume of overlapping ball unions");
                }
                Ok(u.balls
                    .iter()
                    .map(|b| unit_ball_volume(d) * b.radius.powi(d as i32))
                    .sum())
            }
            Body::EllipsoidSlab(s) => Ok(s.volume()),
        }
    }

    /// Surface measure `P(Ω)` of a convex body.
    pub fn perimeter(&self) -> Result<f64> {
        let d = self.dim();
        match self {
            Body::Ball(b) => Ok(d as f64 * unit_ball_volume(d) * b.radius.powi(d as i32 - 1)),
            Body::Ellipsoid(e) => e.perimeter(),
            Body::Polytope(p) => p.perimeter(),
            Body::Capsule(c) => {
                let side = if d == 2 {
                    2.0 * c.length()
                } else {
                    (d - 1) as f64
                        * unit_ball_volume(d - 1)
                        * c.radius.powi(d as i32 - 2)
                        * c.length()
                };
                Ok(side + d as f64 * unit_ball_volume(d) * c.radius.powi(d as i32 - 1))
            }
            Body::BallUnion(_) => unsupported("perimeter is defined here for convex bodies only"),
            Body::EllipsoidSlab(s) => {
                if s.is_uncut() {
                    s.ellipsoid().perimeter()
                } else if d == 2 {
                    s.perimeter_2d()
                } else {
                    unsupported(format!("surface measure of a cut ellipsoid in d = {d}"))
                }
            }
        }
    }

    /// `(diam Ω, r(Ω))` with `r` the inradius.
    pub fn diameter_inradius(&self) -> Result<(f64, f64)> {
        match self {
            Body::Ball(b) => Ok((2.0 * b.radius, b.radius)),
            Body::Ellipsoid(e) => Ok((2.0 * e.max_axis(), e.min_axis())),
            Body::Polytope(p) => Ok((p.diameter(), p.inradius()?.1)),
            Body::Capsule(c) => Ok((c.length() + 2.0 * c.radius, c.radius)),
            Body::BallUnion(u) => {
                let mut diam: f64 = 0.0;
                for (i, a) in u.balls.iter().enumerate() {
                    diam = diam.max(2.0 * a.radius);
                    for b in &u.balls[i + 1..] {
                        diam = diam.max(dist(&a.center, &b.center) + a.radius + b.radius);
                    }
                }
                let r = u.balls.iter().map(|b| b.radius).fold(0.0, f64::max);
                Ok((diam, r))
            }
            Body::EllipsoidSlab(s) => Ok((s.diameter(), s.inradius())),
        }
    }

    pub fn inradius(&self) -> Result<f64> {
        Ok(self.diameter_inradius()?.1)
    }

    /// Homothety `x ↦ t·x` about the origin.
    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return invalid(format!("scale factor must be positive, got {t}"));
        }
        let sv = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x * t).collect() };
        Ok(match self {
            Body::Ball(b) => Body::Ball(Ball {
                center: sv(&b.center),
                radius: b.radius * t,
            }),
            Body::Ellipsoid(e) => Body::Ellipsoid(e.scaled(t)),
            Body::Polytope(p) => Body::Polytope(p.scaled(t)),
            Body::Capsule(c) => Body::Capsule(Capsule {
                a: sv(&c.a),
                b: sv(&c.b),
                radius: c.radius * t,
            }),
            Body::BallUnion(u) => Body::BallUnion(BallUnion {
                balls: u
                    .balls
                    .iter()
                    .map(|b| Ball {
                        center: sv(&b.center),
                        radius: b.radius * t,
                    })
                    .collect(),
                disjoint: u.disjoint,
            }),
            Body::EllipsoidSlab(s) => Body::EllipsoidSlab(s.scaled(t)),
        })
    }
}
