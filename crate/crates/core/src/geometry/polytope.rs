use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{dist, dot, norm, segment_distance, sub};
use crate::error::{invalid, unsupported, Error, Result};

const TOL: f64 = 1e-9;

/// Closed halfspace `normal·x ≤ offset` with a unit outward normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let n = norm(&normal);
        if !(n.is_finite() && n > 0.0 && offset.is_finite()) {
            return invalid("halfspace normal must be non-zero and finite");
        }
        if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Self { normal, offset });
        }
        Ok(Self {
            normal: normal.iter().map(|v| v / n).collect(),
            offset: offset / n,
        })
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

/// Bounded convex polytope carried in both V- and H-representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    halfspaces: Vec<Halfspace>,
}

impl Polytope {
    /// Builds a polytope from both representations and checks that they
    /// describe the same set.
    pub fn new(vertices: Vec<Vec<f64>>, halfspaces: Vec<Halfspace>) -> Result<Self> {
        let dim = vertices.first().map(Vec::len).unwrap_or(0);
        if dim < 2 || vertices.len() <= dim {
            return invalid("polytope needs at least d+1 vertices in d ≥ 2");
        }
        if vertices.iter().any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite()))
            || halfspaces.iter().any(|h| h.normal.len() != dim)
        {
            return invalid("polytope coordinates must be finite and of one dimension");
        }
        let mut vertices = vertices;
        if dim == 2 {
            // planar edges join consecutive vertices, so keep them counterclockwise
            let n = vertices.len() as f64;
            let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / n;
            let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / n;
            let angle = |v: &Vec<f64>| (v[1] - cy).atan2(v[0] - cx);
            vertices.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
        }
        let p = Self {
            dim,
            vertices,
            halfspaces,
        };
        p.validate()?;
        Ok(p)
    }

    /// Convex hull of a finite point set; `d ∈ {2, 3}`.
    pub fn from_vertices(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        match dim {
            2 => hull_2d(&points),
            3 => {
                let (vertices, halfspaces) = hull_3d(&points)?;
                Self::new(vertices, halfspaces)
            }
            _ => unsupported(format!(
                "facet enumeration from vertices is implemented for d = 2, 3 (got d = {dim})"
            )),
        }
    }

    /// Intersection of halfspaces; must be bounded with non-empty interior.
    pub fn from_halfspaces(halfspaces: Vec<Halfspace>) -> Result<Self> {
        let dim = halfspaces.first().map(|h| h.normal.len()).unwrap_or(0);
        if dim < 2 {
            return invalid("halfspace list is empty");
        }
        let vertices = enumerate_vertices(dim, &halfspaces)?;
        if vertices.len() <= dim {
            return invalid("halfspaces do not bound a full-dimensional polytope");
        }
        // Drop redundant constraints so every halfspace supports a facet.
        let halfspaces: Vec<Halfspace> = halfspaces
            .into_iter()
            .filter(|h| {
                vertices
                    .iter()
                    .filter(|v| h.violation(v).abs() <= TOL * (1.0 + h.offset.abs()))
                    .count()
                    >= dim
            })
            .collect();
        Self::new(vertices, halfspaces)
    }

    /// Axis-aligned box `∏[−hᵢ, hᵢ]`.
    pub fn cuboid(half_widths: &[f64]) -> Result<Self> {
        let d = half_widths.len();
        if half_widths.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return invalid("box half-widths must be positive");
        }
        let mut hs = Vec::with_capacity(2 * d);
        for (i, h) in half_widths.iter().enumerate() {
            for s in [1.0, -1.0] {
                let mut n = vec![0.0; d];
                n[i] = s;
                hs.push(Halfspace::new(n, *h)?);
            }
        }
        let vertices = (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { half_widths[i] } else { -half_widths[i] })
                    .collect()
            })
            .collect();
        Self::new(vertices, hs)
    }

    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::cuboid(&vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    fn scale_length(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| norm(v))
            .fold(1.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        let tol = TOL * self.scale_length();
        for v in &self.vertices {
            for h in &self.halfspaces {
                if h.violation(v) > tol {
                    return invalid("vertex lies outside the halfspace representation");
                }
            }
        }
        if self.dim <= 3 {
            let hv = enumerate_vertices(self.dim, &self.halfspaces)?;
            for p in &hv {
                if !self.vertices.iter().any(|v| dist(v, p) <= tol) {
                    return invalid("halfspace representation has a vertex missing from the vertex list");
                }
            }
        } else {
            for h in &self.halfspaces {
                let tight = self.vertices.iter().filter(|v| h.violation(v).abs() <= tol).count();
                if tight < self.dim {
                    return invalid("halfspace does not support a facet of the vertex hull");
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.halfspaces.iter().all(|h| h.violation(x) < 0.0)
    }

    /// Largest halfspace violation: exact signed distance inside, lower
    /// bound on the distance outside.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.violation(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact signed distance: max halfspace distance inside, Euclidean
    /// distance to the nearest face outside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        let inner = self.max_violation(x);
        if inner <= 0.0 {
            return inner;
        }
        match self.dim {
            2 => self.edges_2d().map(|(a, b)| segment_distance(x, a, b)).fold(f64::INFINITY, f64::min),
            3 => self
                .facets_3d()
                .iter()
                .map(|(h, poly)| facet_distance(x, h, poly))
                .fold(f64::INFINITY, f64::min),
            _ => dist(x, &self.project_dykstra(x)),
        }
    }

    /// Euclidean projection onto the polytope by Dykstra's alternating
    /// projections over the halfspaces.
    fn project_dykstra(&self, x: &[f64]) -> Vec<f64> {
        let m = self.halfspaces.len();
        let mut p = x.to_vec();
        let mut incr = vec![vec![0.0; self.dim]; m];
        for _ in 0..10_000 {
            let prev = p.clone();
            for (h, inc) in self.halfspaces.iter().zip(incr.iter_mut()) {
                let y: Vec<f64> = p.iter().zip(inc.iter()).map(|(a, b)| a + b).collect();
                let v = h.violation(&y).max(0.0);
                let q: Vec<f64> = y.iter().zip(&h.normal).map(|(a, n)| a - v * n).collect();
                for i in 0..self.dim {
                    inc[i] = y[i] - q[i];
                }
                p = q;
            }
            if dist(&p, &prev) < 1e-14 * self.scale_length() {
                break;
            }
        }
        p
    }

    /// Edges of a planar polygon in counterclockwise order.
    pub(crate) fn edges_2d(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i].as_slice(), self.vertices[(i + 1) % n].as_slice()))
    }

    /// For each facet of a 3-polytope: its halfspace and its vertices in
    /// counterclockwise order seen from outside.
    pub(crate) fn facets_3d(&self) -> Vec<(&Halfspace, Vec<Vec<f64>>)> {
        let tol = TOL * self.scale_length() * 10.0;
        self.halfspaces
            .iter()
            .map(|h| {
                let on: Vec<Vec<f64>> = self
                    .vertices
                    .iter()
                    .filter(|v| h.violation(v).abs() <= tol)
                    .cloned()
                    .collect();
                (h, order_facet(&on, &h.normal))
            })
            .collect()
    }

    pub fn volume(&self) -> Result<f64> {
        match self.dim {
            2 => Ok(polygon_area(&self.vertices)),
            3 => {
                let c = self.vertex_centroid();
                Ok(self
                    .facets_3d()
                    .iter()
                    .map(|(h, poly)| -h.violation(&c) * facet_area(poly, &h.normal) / 3.0)
                    .sum())
            }
            d => unsupported(format!("polytope volume in d = {d}")),
        }
    }

    pub fn perimeter(&self) -> Result<f64> {
        match self.dim {
            2 => Ok(self.edges_2d().map(|(a, b)| dist(a, b)).sum()),
            3 => Ok(self
                .facets_3d()
                .iter()
                .map(|(h, poly)| facet_area(poly, &h.normal))
                .sum()),
            d => unsupported(format!("polytope surface measure in d = {d}")),
        }
    }

    pub fn vertex_centroid(&self) -> Vec<f64> {
        let n = self.vertices.len() as f64;
        (0..self.dim)
            .map(|i| self.vertices.iter().map(|v| v[i]).sum::<f64>() / n)
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(dist(a, b));
            }
        }
        best
    }

    /// Chebyshev centre and inradius: the linear program
    /// `max r s.t. nᵢ·x + r ≤ bᵢ`, solved by enumerating its basic solutions
    /// (every choice of `d+1` active constraints).
    pub fn inradius(&self) -> Result<(Vec<f64>, f64)> {
        let d = self.dim;
        let m = self.halfspaces.len();
        let combos = binomial(m, d + 1);
        if combos > 20_000_000 {
            return unsupported(format!("inradius LP with {m} facets in d = {d} is too large"));
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut idx: Vec<usize> = (0..=d).collect();
        loop {
            let a = DMatrix::from_fn(d + 1, d + 1, |r, c| {
                let h = &self.halfspaces[idx[r]];
                if c < d {
                    h.normal[c]
                } else {
                    1.0
                }
            });
            let b = DVector::from_fn(d + 1, |r, _| self.halfspaces[idx[r]].offset);
            if let Some(sol) = a.lu().solve(&b) {
                let x: Vec<f64> = sol.iter().take(d).copied().collect();
                let r = sol[d];
                if r.is_finite() && r > 0.0 && best.as_ref().is_none_or(|(_, br)| r > *br) {
                    let tol = TOL * self.scale_length();
                    let feasible = self
                        .halfspaces
                        .iter()
                        .all(|h| dot(&h.normal, &x) + r <= h.offset + tol);
                    if feasible {
                        best = Some((x, r));
                    }
                }
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
        best.ok_or_else(|| Error::Consistency("inradius LP has no feasible basis".into()))
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|x| x * t).collect())
                .collect(),
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Halfspace {
                    normal: h.normal.clone(),
                    offset: h.offset * t,
                })
                .collect(),
        }
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(v, u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn support_point(&self, u: &[f64]) -> Vec<f64> {
        self.vertices
            .iter()
            .max_by(|a, b| dot(a, u).total_cmp(&dot(b, u)))
            .expect("non-empty vertex list")
            .clone()
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn enumerate_vertices(dim: usize, halfspaces: &[Halfspace]) -> Result<Vec<Vec<f64>>> {
    let m = halfspaces.len();
    if m <= dim {
        return invalid("too few halfspaces to bound a polytope");
    }
    if binomial(m, dim) > 5_000_000 {
        return unsupported("vertex enumeration too large");
    }
    let scale = halfspaces.iter().map(|h| h.offset.abs()).fold(1.0, f64::max);
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    loop {
        let a = DMatrix::from_fn(dim, dim, |r, c| halfspaces[idx[r]].normal[c]);
        if a.determinant().abs() > 1e-12 {
            let b = DVector::from_fn(dim, |r, _| halfspaces[idx[r]].offset);
            if let Some(x) = a.lu().solve(&b) {
                let x: Vec<f64> = x.iter().copied().collect();
                let ok = halfspaces.iter().all(|h| h.violation(&x) <= TOL * scale);
                if ok && !out.iter().any(|v| dist(v, &x) <= TOL * scale) {
                    out.push(x);
                }
            }
        }
        if !next_combination(&mut idx, m) {
            break;
        }
    }
    Ok(out)
}

/// Convex hull of planar points by Andrew's monotone chain; vertices come
/// out counterclockwise, collinear boundary points dropped.
pub fn hull_2d(points: &[Vec<f64>]) -> Result<Polytope> {
    if points.iter().any(|p| p.len() != 2 || p.iter().any(|v| !v.is_finite())) {
        return invalid("hull_2d expects finite planar points");
    }
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::RankDeficient("need at least 3 distinct points".into()));
    }
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2
                && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    let span = pts
        .iter()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(1.0, f64::max);
    let area = polygon_area(&hull.iter().map(|p| p.to_vec()).collect::<Vec<_>>());
    if hull.len() < 3 || area <= 1e-14 * span * span {
        return Err(Error::RankDeficient("points are collinear".into()));
    }
    let n = hull.len();
    let halfspaces = (0..n)
        .map(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % n];
            let normal = vec![b[1] - a[1], a[0] - b[0]];
            let offset = normal[0] * a[0] + normal[1] * a[1];
            Halfspace::new(normal, offset)
        })
        .collect::<Result<Vec<_>>>()?;
    Polytope::new(hull.into_iter().map(|p| p.to_vec()).collect(), halfspaces)
}

fn polygon_area(v: &[Vec<f64>]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (&v[i], &v[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Facet enumeration for a 3D point cloud: a plane through three points is a
/// facet iff every point lies on one side of it.
fn hull_3d(points: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Halfspace>)> {
    let n = points.len();
    if n < 4 {
        return Err(Error::RankDeficient("need at least 4 points in 3D".into()));
    }
    let scale = points.iter().map(|p| norm(p)).fold(1.0, f64::max);
    let tol = TOL * scale;
    let mut planes: Vec<Halfspace> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let c = cross3(&sub(&points[j], &points[i]), &sub(&points[k], &points[i]));
                let len = norm(&c);
                if len <= 1e-12 * scale * scale {
                    continue;
                }
                let normal: Vec<f64> = c.iter().map(|x| x / len).collect();
                let offset = dot(&normal, &points[i]);
                let side: Vec<f64> = points.iter().map(|p| dot(&normal, p) - offset).collect();
                let (normal, offset) = if side.iter().all(|s| *s <= tol) {
                    (normal, offset)
                } else if side.iter().all(|s| *s >= -tol) {
                    (normal.iter().map(|x| -x).collect(), -offset)
                } else {
                    continue;
                };
                let dup = planes.iter().any(|h| {
                    dist(&h.normal, &normal) <= 1e-9 && (h.offset - offset).abs() <= tol
                });
                if !dup {
                    planes.push(Halfspace { normal, offset });
                }
            }
        }
    }
    if planes.len() < 4 {
        return Err(Error::RankDeficient("points are coplanar".into()));
    }
    let vertices: Vec<Vec<f64>> = {
        let mut vs: Vec<Vec<f64>> = Vec::new();
        for p in points {
            let tight = planes.iter().filter(|h| h.violation(p).abs() <= tol).count();
            // extreme points lie on at least three facets; exclude points in
            // the relative interior of edges by requiring them to be vertices
            // of every facet polygon they touch
            if tight >= 3 && !vs.iter().any(|v| dist(v, p) <= tol) {
                vs.push(p.clone());
            }
        }
        vs.into_iter()
            .filter(|p| {
                let hs: Vec<&Halfspace> =
                    planes.iter().filter(|h| h.violation(p).abs() <= tol).collect();
                let a = DMatrix::from_fn(hs.len(), 3, |r, c| hs[r].normal[c]);
                a.rank(1e-9) == 3
            })
            .collect()
    };
    Ok((vertices, planes))
}

fn plane_basis(normal: &[f64]) -> ([f64; 3], [f64; 3]) {
    let helper = if normal[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = cross3(normal, &helper);
    let l = norm(&e1);
    let e1 = [e1[0] / l, e1[1] / l, e1[2] / l];
    let e2 = cross3(normal, &e1);
    (e1, e2)
}

fn order_facet(points: &[Vec<f64>], normal: &[f64]) -> Vec<Vec<f64>> {
    if points.is_empty() {
        return Vec::new();
    }
    let m = points.len() as f64;
    let c: Vec<f64> = (0..3).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / m).collect();
    let (e1, e2) = plane_basis(normal);
    let mut with_angle: Vec<(f64, Vec<f64>)> = points
        .iter()
        .map(|p| {
            let r = sub(p, &c);
            (dot(&r, &e2).atan2(dot(&r, &e1)), p.clone())
        })
        .collect();
    with_angle.sort_by(|a, b| a.0.total_cmp(&b.0));
    with_angle.into_iter().map(|(_, p)| p).collect()
}

fn facet_area(poly: &[Vec<f64>], normal: &[f64]) -> f64 {
    let n = poly.len();
    let mut s = [0.0; 3];
    for i in 0..n {
        let c = cross3(&poly[i], &poly[(i + 1) % n]);
        for k in 0..3 {
            s[k] += c[k];
        }
    }
    0.5 * dot(&s, normal).abs()
}

fn facet_distance(x: &[f64], h: &Halfspace, poly: &[Vec<f64>]) -> f64 {
    let v = h.violation(x);
    let q: Vec<f64> = x.iter().zip(&h.normal).map(|(a, n)| a - v * n).collect();
    let n = poly.len();
    let inside = (0..n).all(|i| {
        let e = sub(&poly[(i + 1) % n], &poly[i]);
        let r = sub(&q, &poly[i]);
        dot(&cross3(&e, &r), &h.normal) >= -1e-12 * (1.0 + norm(&e) * norm(&r))
    });
    if inside {
        v.abs()
    } else {
        (0..n)
            .map(|i| segment_distance(x, &poly[i], &poly[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}
