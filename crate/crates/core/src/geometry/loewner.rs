use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{Body, Capsule, Ellipsoid, EllipsoidSlab};
use crate::error::{invalid, unsupported, Error, Result};
use crate::rng::{stream, unit_vector, Channel};

/// Stop when every active weight has `|Mᵢ/(d+1) − 1| ≤ KHACHIYAN_TOL`; the
/// volume of the output then exceeds the optimum by a factor at most
/// `(1+tol)^{d/2}` before the final exact rescaling.
const KHACHIYAN_TOL: f64 = 1e-9;
const MAX_ITER: usize = 200_000;

/// Minimum-volume ellipsoid containing `points`, by Khachiyan's
/// barycentric-coordinate ascent with Todd-Yildirim away steps.
pub fn loewner_ellipsoid(points: &[Vec<f64>]) -> Result<Ellipsoid> {
    let n = points.len();
    let d = points.first().map(Vec::len).unwrap_or(0);
    if d == 0 || points.iter().any(|p| p.len() != d || p.iter().any(|x| !x.is_finite())) {
        return invalid("points must be finite and of one dimension");
    }
    if n <= d {
        return Err(Error::RankDeficient(format!(
            "{n} points cannot span R^{d}"
        )));
    }
    let p = DMatrix::from_fn(d, n, |i, j| points[j][i]);
    check_rank(&p)?;
    let q = DMatrix::from_fn(d + 1, n, |i, j| if i < d { points[j][i] } else { 1.0 });
    let mut u = DVector::from_element(n, 1.0 / n as f64);
    let target = (d + 1) as f64;
    for _ in 0..MAX_ITER {
        let mut x = DMatrix::<f64>::zeros(d + 1, d + 1);
        for (i, qi) in q.column_iter().enumerate() {
            x.ger(u[i], &qi, &qi, 1.0);
        }
        let xinv = x
            .try_inverse()
            .ok_or_else(|| Error::RankDeficient("moment matrix lost definiteness".into()))?;
        let m: Vec<f64> = q
            .column_iter()
            .map(|qi| (&xinv * qi).dot(&qi))
            .collect();
        let (j, mj) = m
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("n > 0");
        let (k, mk) = m
            .iter()
            .copied()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("some weight positive");
        let up = mj / target - 1.0;
        let down = 1.0 - mk / target;
        if up <= KHACHIYAN_TOL && down <= KHACHIYAN_TOL {
            break;
        }
        if up >= down {
            let step = (mj - target) / (target * (mj - 1.0));
            u *= 1.0 - step;
            u[j] += step;
        } else {
            let uk = u[k];
            let step = ((target - mk) / (target * (mk - 1.0))).min(uk / (1.0 - uk));
            u *= 1.0 + step;
            u[k] -= step;
            if u[k] < 1e-300 {
                u[k] = 0.0;
            }
        }
    }
    let c = &p * &u;
    let mut second = DMatrix::<f64>::zeros(d, d);
    for (i, pi) in p.column_iter().enumerate() {
        second.ger(u[i], &pi, &pi, 1.0);
    }
    let shape = (second - &c * c.transpose()) * d as f64;
    // `shape` is the matrix S with E = {x : (x−c)ᵀS⁻¹(x−c) ≤ 1}; rescale so
    // every point is covered exactly.
    let sinv = shape
        .clone()
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("degenerate enclosing ellipsoid".into()))?;
    let rho = (0..n)
        .map(|i| {
            let v = p.column(i) - &c;
            v.dot(&sinv.solve(&v))
        })
        .fold(0.0, f64::max);
    let shape = shape * (rho * (1.0 + 1e-12));
    from_shape_matrix(shape, c.iter().copied().collect())
}

fn check_rank(p: &DMatrix<f64>) -> Result<()> {
    let (d, n) = p.shape();
    let mean = p.column_mean();
    let centered = DMatrix::from_fn(d, n, |i, j| p[(i, j)] - mean[i]);
    let sv = centered.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin <= 1e-10 * smax {
        return Err(Error::RankDeficient(
            "points do not affinely span the space".into(),
        ));
    }
    Ok(())
}

fn from_shape_matrix(shape: DMatrix<f64>, center: Vec<f64>) -> Result<Ellipsoid> {
    let d = center.len();
    let eig = SymmetricEigen::new(shape);
    if eig.eigenvalues.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::RankDeficient("non-positive ellipsoid axis".into()));
    }
    let axes: Vec<f64> = eig.eigenvalues.iter().map(|l| l.sqrt()).collect();
    let mut rot = vec![0.0; d * d];
    for r in 0..d {
        for col in 0..d {
            rot[r * d + col] = eig.eigenvectors[(r, col)];
        }
    }
    Ellipsoid::with_frame(axes, center, Some(rot))
}

/// Sandwich `inner ⊂ Ω ⊂ outer` with `inner` the outer ellipsoid shrunk by
/// the dimension about its centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JohnPair {
    pub inner: Ellipsoid,
    pub outer: Ellipsoid,
}

impl JohnPair {
    /// Semi-axes of the outer ellipsoid in non-increasing order.
    pub fn outer_axes_sorted(&self) -> Vec<f64> {
        self.outer.sorted_axes().0
    }
}

const CONTAINMENT_DIRECTIONS: usize = 10_000;
const CONTAINMENT_TOL: f64 = 1e-8;

static DIRECTION_CACHE: [OnceLock<Vec<Vec<f64>>>; 9] = [const { OnceLock::new() }; 9];

fn directions(d: usize, count: usize, channel_index: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(0x005e_ed0f_d1ec, Channel::Sampling, channel_index);
    let mut out = Vec::with_capacity(count + 2 * d);
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            out.push(e);
        }
    }
    for _ in 0..count {
        let mut u = vec![0.0; d];
        unit_vector(&mut rng, &mut u);
        out.push(u);
    }
    out
}

/// Löwner-based John sandwich for a convex body.
///
/// Ellipsoids are their own outer ellipsoid and polytopes use the Löwner
/// ellipsoid of their vertices. A cut ellipsoid `E(a) ∩ {|x_k| ≤ h}` is
/// contained in an axis-aligned centred ellipsoid iff the finitely many
/// points where the squared coordinates are extreme are, so its Löwner
/// ellipsoid is that of a finite point set. Capsules reduce to a
/// one-parameter family of spheroids by rotational symmetry.
pub fn john_pair(body: &Body) -> Result<JohnPair> {
    if !body.is_convex() {
        return unsupported("John ellipsoids are defined for convex bodies");
    }
    let d = body.dim();
    let outer = if let Some(e) = body.as_ellipsoid() {
        e
    } else {
        match body {
            Body::Polytope(p) => loewner_ellipsoid(p.vertices())?,
            Body::EllipsoidSlab(s) => loewner_ellipsoid(&slab_extreme_points(s))?,
            Body::Capsule(c) => capsule_loewner(c)?,
            _ => return unsupported(format!("John pair of a {}", body.kind())),
        }
    };
    let inner = outer.shrunk(1.0 / d as f64);
    let pair = JohnPair { inner, outer };
    if body.as_ellipsoid().is_some() {
        // the outer ellipsoid is the body itself
        return Ok(pair);
    }
    if d < DIRECTION_CACHE.len() {
        let dirs = DIRECTION_CACHE[d].get_or_init(|| directions(d, CONTAINMENT_DIRECTIONS, 1));
        verify_containment(body, &pair, dirs)?;
    } else {
        verify_containment(body, &pair, &directions(d, CONTAINMENT_DIRECTIONS, 1))?;
    }
    Ok(pair)
}

fn slab_extreme_points(s: &EllipsoidSlab) -> Vec<Vec<f64>> {
    let a = s.semi_axes();
    let d = a.len();
    let k = s.axis();
    let h = s.half_width();
    let shrink = (1.0 - (h / a[k]).powi(2)).max(0.0).sqrt();
    let mut pts = Vec::new();
    let mut push = |coords: &[(usize, f64)]| {
        let m = coords.len();
        for mask in 0..1usize << m {
            let mut x = vec![0.0; d];
            for (bit, (i, v)) in coords.iter().enumerate() {
                x[*i] = if mask >> bit & 1 == 1 { -v } else { *v };
            }
            pts.push(x);
        }
    };
    push(&[(k, h)]);
    for j in (0..d).filter(|j| *j != k) {
        push(&[(j, a[j])]);
        push(&[(k, h), (j, a[j] * shrink)]);
    }
    pts
}

/// Minimum-volume spheroid around a capsule with half-length `ℓ` and radius
/// `r`. With `B² = r² + t` the smallest admissible polar semi-axis is
/// `A² = ℓ² + r² + t + ℓ²r²/t` for `0 < t ≤ ℓr`, and volume grows for larger
/// `t`; the remaining one-dimensional problem is solved by golden section in
/// `ln t`.
fn capsule_loewner(c: &Capsule) -> Result<Ellipsoid> {
    let d = c.a.len();
    let len = c.length();
    let r = c.radius;
    let center: Vec<f64> = c.a.iter().zip(&c.b).map(|(x, y)| 0.5 * (x + y)).collect();
    if len == 0.0 {
        return Ellipsoid::with_frame(vec![r; d], center, None);
    }
    let l = 0.5 * len;
    let a2 = |t: f64| l * l + r * r + t + l * l * r * r / t;
    let f = |lt: f64| {
        let t = lt.exp();
        0.5 * a2(t).ln() + 0.5 * (d - 1) as f64 * (r * r + t).ln()
    };
    let (mut lo, mut hi) = ((l * r).ln() - 60.0, (l * r).ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let t = (0.5 * (lo + hi)).exp().min(l * r);
    let polar = a2(t).sqrt();
    let equatorial = (r * r + t).sqrt();
    let u: Vec<f64> = c.b.iter().zip(&c.a).map(|(b, a)| (b - a) / len).collect();
    let frame = orthonormal_frame(&u);
    let mut axes = vec![equatorial; d];
    axes[0] = polar;
    Ellipsoid::with_frame(axes, center, Some(frame))
}

/// Row-major orthogonal matrix whose first column is the unit vector `u`.
fn orthonormal_frame(u: &[f64]) -> Vec<f64> {
    let d = u.len();
    let mut cols: Vec<Vec<f64>> = vec![u.to_vec()];
    for i in 0..d {
        if cols.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        for c in &cols {
            let p = super::dot(&v, c);
            for (vk, ck) in v.iter_mut().zip(c) {
                *vk -= p * ck;
            }
        }
        let n = super::norm(&v);
        if n > 1e-6 {
            cols.push(v.iter().map(|x| x / n).collect());
        }
    }
    let mut q = vec![0.0; d * d];
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            q[i * d + j] = *v;
        }
    }
    q
}

fn verify_containment(body: &Body, pair: &JohnPair, dirs: &[Vec<f64>]) -> Result<()> {
    let (_, scale) = body.bounding_ball();
    let tol = CONTAINMENT_TOL * scale;
    for u in dirs {
        let hb = body.support(u);
        let hi = pair.inner.support(u);
        let ho = pair.outer.support(u);
        if hi > hb + tol {
            return Err(Error::Consistency(format!(
                "inner ellipsoid leaves the body: h_inner = {hi}, h_body = {hb}"
            )));
        }
        if hb > ho + tol {
            return Err(Error::Consistency(format!(
                "body leaves the outer ellipsoid: h_body = {hb}, h_outer = {ho}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Capsule, Polytope};

    #[test]
    fn cube_gives_ball() {
        let c = Polytope::cube(3, 1.0).unwrap();
        let e = loewner_ellipsoid(c.vertices()).unwrap();
        for a in e.semi_axes() {
            assert!((a - 3f64.sqrt()).abs() < 1e-6, "{a}");
        }
        assert!(e.center().iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn triangle_circumcircle() {
        let s3 = 3f64.sqrt();
        let pts = vec![vec![1.0, 0.0], vec![-0.5, s3 / 2.0], vec![-0.5, -s3 / 2.0]];
        let e = loewner_ellipsoid(&pts).unwrap();
        for a in e.semi_axes() {
            assert!((a - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn flat_points_rejected() {
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert!(matches!(loewner_ellipsoid(&pts), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn non_symmetric_point_set_is_enclosed() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![4.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 2.0],
            vec![3.0, 0.5],
        ];
        let e = loewner_ellipsoid(&pts).unwrap();
        for p in &pts {
            assert!(e.level(p) <= 1.0 + 1e-9);
        }
        // some point must lie on the boundary
        assert!(pts.iter().any(|p| (e.level(p) - 1.0).abs() < 1e-6));
    }

    #[test]
    fn john_pair_of_ellipsoid_is_trivial() {
        let b = Body::ellipsoid(vec![2.0, 1.0, 1.0]).unwrap();
        let jp = john_pair(&b).unwrap();
        assert_eq!(jp.outer.semi_axes(), &[2.0, 1.0, 1.0]);
        let inner = jp.inner.semi_axes();
        assert!((inner[0] - 2.0 / 3.0).abs() < 1e-15 && (inner[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn john_pair_of_cube() {
        let c = Body::Polytope(Polytope::cube(3, 1.0).unwrap());
        let jp = john_pair(&c).unwrap();
        for (o, i) in jp.outer.semi_axes().iter().zip(jp.inner.semi_axes()) {
            assert!((o - 3f64.sqrt()).abs() < 1e-6);
            assert!((i - 3f64.sqrt() / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn john_pair_of_capsule_contains_body() {
        let c = Body::Capsule(Capsule::new(vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], 0.5).unwrap());
        let jp = john_pair(&c).unwrap();
        let axes = jp.outer_axes_sorted();
        assert!(axes[0] > 1.5 && axes[1] >= 0.5);
        // no spheroid on a perturbed parameter has smaller volume while still
        // containing the capsule
        let vol = jp.outer.volume();
        for (da, db) in [(1.01, 0.995), (0.99, 1.006), (1.02, 0.99)] {
            let (pa, pb) = (axes[0] * da, axes[1] * db);
            let e = Ellipsoid::new(vec![pa, pb, pb]).unwrap();
            let contains = (0..2000).all(|k| {
                let phi = k as f64 / 1999.0 * std::f64::consts::FRAC_PI_2;
                let u = [phi.cos(), phi.sin(), 0.0];
                e.support(&u) >= c.support(&u) - 1e-12
            });
            assert!(!contains || e.volume() >= vol * (1.0 - 1e-9));
        }
        assert!((jp.inner.volume() - jp.outer.volume() / 27.0).abs() < 1e-12 * jp.outer.volume());
    }

    #[test]
    fn john_pair_of_slab() {
        let s = Body::EllipsoidSlab(
            crate::geometry::EllipsoidSlab::new(vec![2.0, 1.0, 1.0], 0, 0.5).unwrap(),
        );
        let jp = john_pair(&s).unwrap();
        assert!(jp.outer.volume() < Ellipsoid::new(vec![2.0, 1.0, 1.0]).unwrap().volume());
    }

    #[test]
    fn union_of_balls_has_no_john_pair() {
        let u = Body::BallUnion(
            crate::geometry::BallUnion::new(vec![
                crate::geometry::Ball::new(vec![0.0, 0.0], 1.0).unwrap(),
                crate::geometry::Ball::new(vec![5.0, 0.0], 1.0).unwrap(),
            ])
            .unwrap(),
        );
        assert!(john_pair(&u).is_err());
    }
}
