use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Estimate;
use crate::error::{invalid, unsupported, Error, Result};
use crate::geometry::Body;

/// One smooth piece of a planar boundary curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPiece {
    Segment {
        a: [f64; 2],
        b: [f64; 2],
    },
    /// `c + Q·(a₁ cos θ, a₂ sin θ)` for `θ ∈ [θ₀, θ₁]`, `Q` row-major.
    EllipseArc {
        center: [f64; 2],
        axes: [f64; 2],
        frame: [f64; 4],
        theta: [f64; 2],
    },
}

impl BoundaryPiece {
    /// Point at local parameter `s ∈ [0, 1]`.
    fn point(&self, s: f64) -> [f64; 2] {
        match self {
            BoundaryPiece::Segment { a, b } => [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])],
            BoundaryPiece::EllipseArc {
                center,
                axes,
                frame: q,
                theta,
            } => {
                let t = theta[0] + s * (theta[1] - theta[0]);
                let (y0, y1) = (axes[0] * t.cos(), axes[1] * t.sin());
                [
                    center[0] + q[0] * y0 + q[1] * y1,
                    center[1] + q[2] * y0 + q[3] * y1,
                ]
            }
        }
    }

    /// Point and first two derivatives in the local parameter.
    fn jet(&self, s: f64) -> [[f64; 2]; 3] {
        match self {
            BoundaryPiece::Segment { a, b } => [
                self.point(s),
                [b[0] - a[0], b[1] - a[1]],
                [0.0, 0.0],
            ],
            BoundaryPiece::EllipseArc {
                center,
                axes,
                frame: q,
                theta,
            } => {
                let w = theta[1] - theta[0];
                let t = theta[0] + s * w;
                let (sn, cs) = t.sin_cos();
                let y = [axes[0] * cs, axes[1] * sn];
                let dy = [-w * axes[0] * sn, w * axes[1] * cs];
                let ddy = [-w * w * y[0], -w * w * y[1]];
                let map = |v: [f64; 2]| [q[0] * v[0] + q[1] * v[1], q[2] * v[0] + q[3] * v[1]];
                let p = map(y);
                [[center[0] + p[0], center[1] + p[1]], map(dy), map(ddy)]
            }
        }
    }

    fn approx_length(&self) -> f64 {
        let m = 256;
        let mut prev = self.point(0.0);
        let mut len = 0.0;
        for k in 1..=m {
            let p = self.point(k as f64 / m as f64);
            len += ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
            prev = p;
        }
        len
    }
}

/// A planar boundary made of pieces traversed in order. Closed curves are
/// periodic in the global parameter `τ ∈ [0, m)`, `m` the number of pieces;
/// open curves (a segment) run over `[0, m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarBoundary {
    pieces: Vec<BoundaryPiece>,
    closed: bool,
}

const IDENTITY: [f64; 4] = [1.0, 0.0, 0.0, 1.0];

impl PlanarBoundary {
    pub fn closed(pieces: Vec<BoundaryPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return invalid("boundary needs at least one piece");
        }
        Ok(Self {
            pieces,
            closed: true,
        })
    }

    /// The segment `[a, b]`, a degenerate compact set with positive capacity.
    pub fn segment(a: [f64; 2], b: [f64; 2]) -> Result<Self> {
        if a == b {
            return invalid("segment endpoints coincide");
        }
        Ok(Self {
            pieces: vec![BoundaryPiece::Segment { a, b }],
            closed: false,
        })
    }

    pub fn ellipse(center: [f64; 2], axes: [f64; 2], frame: [f64; 4]) -> Self {
        Self {
            pieces: vec![BoundaryPiece::EllipseArc {
                center,
                axes,
                frame,
                theta: [0.0, 2.0 * PI],
            }],
            closed: true,
        }
    }

    /// Boundary of a planar convex body.
    pub fn from_body(body: &Body) -> Result<Self> {
        if body.dim() != 2 {
            return Err(Error::DimensionMismatch(
                "logarithmic capacity is planar".into(),
            ));
        }
        match body {
            Body::Ball(b) => Ok(Self::ellipse(
                [b.center[0], b.center[1]],
                [b.radius, b.radius],
                IDENTITY,
            )),
            Body::Ellipsoid(e) => {
                let a = e.semi_axes();
                let c = e.center();
                let q = e
                    .rotation()
                    .map(|r| [r[0], r[1], r[2], r[3]])
                    .unwrap_or(IDENTITY);
                Ok(Self::ellipse([c[0], c[1]], [a[0], a[1]], q))
            }
            Body::Polytope(p) => {
                let v = p.vertices();
                let n = v.len();
                Self::closed(
                    (0..n)
                        .map(|i| BoundaryPiece::Segment {
                            a: [v[i][0], v[i][1]],
                            b: [v[(i + 1) % n][0], v[(i + 1) % n][1]],
                        })
                        .collect(),
                )
            }
            Body::Capsule(c) => {
                let l = c.length();
                let r = c.radius;
                if l == 0.0 {
                    return Ok(Self::ellipse([c.a[0], c.a[1]], [r, r], IDENTITY));
                }
                let u = [(c.b[0] - c.a[0]) / l, (c.b[1] - c.a[1]) / l];
                let n = [-u[1], u[0]];
                let q = [u[0], n[0], u[1], n[1]];
                let off = |p: &[f64], s: f64| [p[0] + s * r * n[0], p[1] + s * r * n[1]];
                Self::closed(vec![
                    BoundaryPiece::Segment {
                        a: off(&c.a, -1.0),
                        b: off(&c.b, -1.0),
                    },
                    BoundaryPiece::EllipseArc {
                        center: [c.b[0], c.b[1]],
                        axes: [r, r],
                        frame: q,
                        theta: [-0.5 * PI, 0.5 * PI],
                    },
                    BoundaryPiece::Segment {
                        a: off(&c.b, 1.0),
                        b: off(&c.a, 1.0),
                    },
                    BoundaryPiece::EllipseArc {
                        center: [c.a[0], c.a[1]],
                        axes: [r, r],
                        frame: q,
                        theta: [0.5 * PI, 1.5 * PI],
                    },
                ])
            }
            Body::EllipsoidSlab(s) => {
                let a = s.semi_axes();
                let (a1, a2) = (a[0], a[1]);
                let h = s.half_width();
                if s.is_uncut() {
                    return Ok(Self::ellipse([0.0, 0.0], [a1, a2], IDENTITY));
                }
                let arc = |t0: f64, t1: f64| BoundaryPiece::EllipseArc {
                    center: [0.0, 0.0],
                    axes: [a1, a2],
                    frame: IDENTITY,
                    theta: [t0, t1],
                };
                if s.axis() == 1 {
                    let th = (h / a2).asin();
                    let x = a1 * th.cos();
                    Self::closed(vec![
                        arc(-th, th),
                        BoundaryPiece::Segment {
                            a: [x, h],
                            b: [-x, h],
                        },
                        arc(PI - th, PI + th),
                        BoundaryPiece::Segment {
                            a: [-x, -h],
                            b: [x, -h],
                        },
                    ])
                } else {
                    let th = (h / a1).acos();
                    let y = a2 * th.sin();
                    Self::closed(vec![
                        arc(th, PI - th),
                        BoundaryPiece::Segment {
                            a: [-h, y],
                            b: [-h, -y],
                        },
                        arc(PI + th, 2.0 * PI - th),
                        BoundaryPiece::Segment {
                            a: [h, -y],
                            b: [h, y],
                        },
                    ])
                }
            }
            Body::BallUnion(_) => unsupported("logarithmic capacity of ball unions"),
        }
    }

    fn span(&self) -> f64 {
        self.pieces.len() as f64
    }

    fn point(&self, tau: f64) -> [f64; 2] {
        let m = self.pieces.len();
        let t = if self.closed {
            tau.rem_euclid(m as f64)
        } else {
            tau.clamp(0.0, m as f64)
        };
        let k = (t.floor() as usize).min(m - 1);
        self.pieces[k].point(t - k as f64)
    }

    fn jet(&self, tau: f64) -> [[f64; 2]; 3] {
        let m = self.pieces.len();
        let t = if self.closed {
            tau.rem_euclid(m as f64)
        } else {
            tau.clamp(0.0, m as f64)
        };
        let k = (t.floor() as usize).min(m - 1);
        self.pieces[k].jet(t - k as f64)
    }

    /// Initial parameters: equal spacing in each piece's own parameter with
    /// point counts proportional to piece length (closed curves), or
    /// Chebyshev-Lobatto nodes (open curves).
    fn initial(&self, n: usize) -> Vec<f64> {
        let m = self.pieces.len();
        if !self.closed {
            return (0..n)
                .map(|k| m as f64 * 0.5 * (1.0 - (PI * k as f64 / (n - 1) as f64).cos()))
                .collect();
        }
        let lens: Vec<f64> = self.pieces.iter().map(BoundaryPiece::approx_length).collect();
        let total: f64 = lens.iter().sum();
        let mut cum = vec![0.0];
        for l in &lens {
            cum.push(cum.last().unwrap() + l / total);
        }
        (0..n)
            .map(|k| {
                let s = (k as f64 + 0.5) / n as f64;
                let p = cum.partition_point(|c| *c <= s).clamp(1, m) - 1;
                let frac = if lens[p] > 0.0 {
                    (s - cum[p]) / (cum[p + 1] - cum[p])
                } else {
                    0.0
                };
                p as f64 + frac
            })
            .collect()
    }
}

fn ln_dist(p: &[f64; 2], q: &[f64; 2]) -> f64 {
    0.5 * ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).ln()
}

struct Ascent {
    taus: Vec<f64>,
    value: f64,
    converged: bool,
}

/// Mean pairwise log distance exponentiated: the `n`-th diameter.
fn nth_diameter(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += ln_dist(&points[i], &points[j]);
        }
    }
    (2.0 * s / (n * (n - 1)) as f64).exp()
}

/// Cyclic coordinate ascent of `Σ_{i<j} log|xᵢ − xⱼ|`: each point in turn
/// takes a safeguarded Newton step along the curve, over-relaxed when that
/// helps, with a golden-section search between its neighbours as the
/// fallback. No move ever decreases the energy.
fn ascend(boundary: &PlanarBoundary, mut taus: Vec<f64>) -> Ascent {
    const MAX_PASSES: usize = 2000;
    const GOLDEN_ITERS: usize = 40;
    const OVER_RELAX: f64 = 1.9;
    let n = taus.len();
    let m = boundary.span();
    let mut pts: Vec<[f64; 2]> = taus.iter().map(|t| boundary.point(*t)).collect();
    let energy_at = |pts: &[[f64; 2]], i: usize, p: &[f64; 2]| -> f64 {
        pts.iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| ln_dist(p, q))
            .sum()
    };
    let mut prev_value = nth_diameter(&pts);
    let mut converged = false;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..MAX_PASSES {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let (lo, hi) = if boundary.closed {
                let lo = if i == 0 { taus[n - 1] - m } else { taus[i - 1] };
                let hi = if i == n - 1 { taus[0] + m } else { taus[i + 1] };
                (lo, hi)
            } else {
                let lo = if i == 0 { 0.0 } else { taus[i - 1] };
                let hi = if i == n - 1 { m } else { taus[i + 1] };
                (lo, hi)
            };
            let margin = 1e-9 * (hi - lo);
            let inside = |t: f64| t > lo + margin && t < hi - margin;
            let f = |t: f64| energy_at(&pts, i, &boundary.point(t));

            let [p, dp, ddp] = boundary.jet(taus[i]);
            let (mut f0, mut grad, mut hess) = (0.0, 0.0, 0.0);
            let dp2 = dp[0] * dp[0] + dp[1] * dp[1];
            for (j, q) in pts.iter().enumerate() {
                if j == i {
                    continue;
                }
                let r = [p[0] - q[0], p[1] - q[1]];
                let r2 = r[0] * r[0] + r[1] * r[1];
                let a = r[0] * dp[0] + r[1] * dp[1];
                f0 += 0.5 * r2.ln();
                grad += a / r2;
                hess += (dp2 + r[0] * ddp[0] + r[1] * ddp[1]) / r2 - 2.0 * a * a / (r2 * r2);
            }
            let mut best = (taus[i], f0);
            let mut step = if hess < 0.0 {
                -grad / hess
            } else {
                0.25 * grad.signum() * (hi - lo)
            };
            for _ in 0..12 {
                let t = taus[i] + step;
                if inside(t) {
                    let ft = f(t);
                    if ft > best.1 {
                        best = (t, ft);
                        break;
                    }
                }
                step *= 0.5;
            }
            if best.0 == taus[i] && grad.abs() * (hi - lo) > 1e-9 {
                // Newton made no progress away from a stationary point
                let (mut a, mut b) = (lo, hi);
                let mut c = b - g * (b - a);
                let mut d = a + g * (b - a);
                let mut fc = f(c);
                let mut fd = f(d);
                for _ in 0..GOLDEN_ITERS {
                    if fc > fd {
                        b = d;
                        d = c;
                        fd = fc;
                        c = b - g * (b - a);
                        fc = f(c);
                    } else {
                        a = c;
                        c = d;
                        fc = fd;
                        d = a + g * (b - a);
                        fd = f(d);
                    }
                }
                for cand in [(c, fc), (d, fd)] {
                    if cand.1 > best.1 {
                        best = cand;
                    }
                }
            }
            if !boundary.closed && (i == 0 || i == n - 1) {
                let end = if i == 0 { 0.0 } else { m };
                let fe = f(end);
                if fe > best.1 {
                    best = (end, fe);
                }
            }
            if best.0 != taus[i] {
                let over = taus[i] + OVER_RELAX * (best.0 - taus[i]);
                if inside(over) {
                    let fo = f(over);
                    if fo >= best.1 {
                        best = (over, fo);
                    }
                }
            }
            let best_t = best.0;
            let new_t = if boundary.closed {
                best_t.rem_euclid(m)
            } else {
                best_t
            };
            moved = moved.max((best_t - taus[i]).abs());
            taus[i] = new_t;
            pts[i] = boundary.point(new_t);
        }
        if boundary.closed {
            // keep parameters sorted after wrap-around moves
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| taus[x].total_cmp(&taus[y]));
            taus = order.iter().map(|&k| taus[k]).collect();
            pts = order.iter().map(|&k| pts[k]).collect();
        }
        let value = nth_diameter(&pts);
        let rel = (value - prev_value).abs() / value;
        prev_value = value;
        if rel < 1e-13 || moved < 1e-10 * m / n as f64 {
            converged = true;
            break;
        }
    }
    Ascent {
        taus,
        value: prev_value,
        converged,
    }
}

/// Logarithmic capacity of the compact set bounded by `boundary`, from
/// discrete Fekete configurations with `n` and `2n` points. The discrete
/// transfinite diameter decreases to the capacity as `c + a·ln m/(m−1)` (exact
/// for the disk), and the two values fix `c` and `a`.
pub fn fekete_logcap_boundary(boundary: &PlanarBoundary, n: usize) -> Result<Estimate> {
    if n < 8 {
        return invalid("at least 8 Fekete points are needed");
    }
    let coarse = ascend(boundary, boundary.initial(n));
    let fine_start = if boundary.closed {
        let m = boundary.span();
        let mut t = Vec::with_capacity(2 * n);
        for i in 0..n {
            let next = if i + 1 < n {
                coarse.taus[i + 1]
            } else {
                coarse.taus[0] + m
            };
            t.push(coarse.taus[i]);
            t.push((0.5 * (coarse.taus[i] + next)).rem_euclid(m));
        }
        t.sort_by(f64::total_cmp);
        t
    } else {
        boundary.initial(2 * n)
    };
    let fine = ascend(boundary, fine_start);
    let rate = |m: usize| (m as f64).ln() / (m as f64 - 1.0);
    let (rc, rf) = (rate(n), rate(2 * n));
    let slope = (coarse.value - fine.value) / (rc - rf);
    let value = fine.value - slope * rf;
    let stderr = (fine.value - value).abs() * rf / rc.max(f64::MIN_POSITIVE);
    Ok(Estimate {
        value,
        stderr,
        n: 2 * n as u64,
        backend: "fekete".into(),
        bracket: Some([value - 3.0 * stderr, fine.value.max(value + 3.0 * stderr)]),
        converged: coarse.converged && fine.converged,
    })
}

/// Logarithmic capacity of a planar convex body.
pub fn fekete_logcap(body: &Body, n: usize) -> Result<Estimate> {
    fekete_logcap_boundary(&PlanarBoundary::from_body(body)?, n)
}
