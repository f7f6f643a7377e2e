//! Shape representations and their geometric queries.

mod body;
mod ellipsoid;
mod loewner;
mod polytope;

pub use body::{Ball, BallUnion, Body, Capsule, EllipsoidSlab};
pub use ellipsoid::Ellipsoid;
pub use loewner::{john_pair, loewner_ellipsoid, JohnPair};
pub use polytope::{hull_2d, Halfspace, Polytope};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Euclidean distance from `p` to the segment `[a, b]`.
pub(crate) fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    let t = if len2 > 0.0 {
        (dot(&sub(p, a), &ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.iter()
        .zip(a.iter().zip(&ab))
        .map(|(pi, (ai, di))| {
            let q = ai + t * di;
            (pi - q) * (pi - q)
        })
        .sum::<f64>()
        .sqrt()
}
