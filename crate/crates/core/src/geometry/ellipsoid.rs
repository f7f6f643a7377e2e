use serde::{Deserialize, Serialize};

use super::dot;
use crate::error::{invalid, Result};
use crate::special::{carlson_rg, ellipse_perimeter, unit_ball_volume};

/// A solid ellipsoid `{x : Σ yᵢ²/aᵢ² < 1}` with `y = Qᵀ(x − c)`.
///
/// Ellipsoids are axis-aligned (`Q = I`) unless they come out of the Löwner
/// construction, in which case `rotation` holds `Q` row-major with the
/// principal directions as columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    semi_axes: Vec<f64>,
    center: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation: Option<Vec<f64>>,
}

impl Ellipsoid {
    /// Axis-aligned ellipsoid centred at the origin.
    pub fn new(semi_axes: Vec<f64>) -> Result<Self> {
        let d = semi_axes.len();
        Self::with_frame(semi_axes, vec![0.0; d], None)
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::new(vec![radius; dim])
    }

    /// General ellipsoid. `rotation`, when present, must be an orthogonal
    /// `d×d` matrix in row-major order.
    pub fn with_frame(
        semi_axes: Vec<f64>,
        center: Vec<f64>,
        rotation: Option<Vec<f64>>,
    ) -> Result<Self> {
        let d = semi_axes.len();
        if d < 1 {
            return invalid("ellipsoid needs at least one semi-axis");
        }
        if semi_axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return invalid(format!("semi-axes must be positive, got {semi_axes:?}"));
        }
        if center.len() != d || center.iter().any(|c| !c.is_finite()) {
            return invalid("ellipsoid centre must be a finite point of matching dimension");
        }
        if let Some(q) = &rotation {
            if q.len() != d * d {
                return invalid("rotation must be a d×d matrix");
            }
            for i in 0..d {
                for j in 0..d {
                    let g: f64 = (0..d).map(|k| q[k * d + i] * q[k * d + j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    if (g - want).abs() > 1e-9 {
                        return invalid("rotation matrix is not orthogonal");
                    }
                }
            }
        }
        Ok(Self {
            semi_axes,
            center,
            rotation,
        })
    }

    pub fn dim(&self) -> usize {
        self.semi_axes.len()
    }

    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn rotation(&self) -> Option<&[f64]> {
        self.rotation.as_deref()
    }

    /// Semi-axes in non-increasing order together with the permutation that
    /// produced them; ties keep their original relative order.
    pub fn sorted_axes(&self) -> (Vec<f64>, Vec<usize>) {
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by(|&i, &j| self.semi_axes[j].total_cmp(&self.semi_axes[i]));
        (idx.iter().map(|&i| self.semi_axes[i]).collect(), idx)
    }

    /// Axis-aligned copy at the origin. Every functional in this crate is
    /// invariant under rigid motions, so this is what gets evaluated.
    pub fn canonical(&self) -> Self {
        Self {
            semi_axes: self.semi_axes.clone(),
            center: vec![0.0; self.dim()],
            rotation: None,
        }
    }

    /// Homothety about the origin.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            semi_axes: self.semi_axes.iter().map(|a| a * t).collect(),
            center: self.center.iter().map(|c| c * t).collect(),
            rotation: self.rotation.clone(),
        }
    }

    /// Same orientation and centre, semi-axes multiplied by `t`.
    pub fn shrunk(&self, t: f64) -> Self {
        Self {
            semi_axes: self.semi_axes.iter().map(|a| a * t).collect(),
            center: self.center.clone(),
            rotation: self.rotation.clone(),
        }
    }

    pub(crate) fn to_local(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let shifted: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        match &self.rotation {
            None => shifted,
            Some(q) => (0..d)
                .map(|i| (0..d).map(|k| q[k * d + i] * shifted[k]).sum())
                .collect(),
        }
    }

    pub(crate) fn to_world(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        match &self.rotation {
            None => y.iter().zip(&self.center).map(|(a, b)| a + b).collect(),
            Some(q) => (0..d)
                .map(|k| self.center[k] + (0..d).map(|i| q[k * d + i] * y[i]).sum::<f64>())
                .collect(),
        }
    }

    fn rotate_to_local(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim();
        match &self.rotation {
            None => u.to_vec(),
            Some(q) => (0..d)
                .map(|i| (0..d).map(|k| q[k * d + i] * u[k]).sum())
                .collect(),
        }
    }

    /// `Σ yᵢ²/aᵢ²` in local coordinates; < 1 inside.
    pub fn level(&self, x: &[f64]) -> f64 {
        let y = self.to_local(x);
        y.iter()
            .zip(&self.semi_axes)
            .map(|(y, a)| (y / a) * (y / a))
            .sum()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.level(x) < 1.0
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.semi_axes.iter().product::<f64>()
    }

    pub fn min_axis(&self) -> f64 {
        self.semi_axes.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_axis(&self) -> f64 {
        self.semi_axes.iter().copied().fold(0.0, f64::max)
    }

    /// Support function `h(u) = max_{x∈E} x·u`.
    pub fn support(&self, u: &[f64]) -> f64 {
        let v = self.rotate_to_local(u);
        let s: f64 = v
            .iter()
            .zip(&self.semi_axes)
            .map(|(v, a)| (v * a) * (v * a))
            .sum();
        dot(&self.center, u) + s.sqrt()
    }

    /// A point of the boundary where the support function in direction `u` is attained.
    pub fn support_point(&self, u: &[f64]) -> Vec<f64> {
        let v = self.rotate_to_local(u);
        let s: f64 = v
            .iter()
            .zip(&self.semi_axes)
            .map(|(v, a)| (v * a) * (v * a))
            .sum::<f64>()
            .sqrt();
        let y: Vec<f64> = v
            .iter()
            .zip(&self.semi_axes)
            .map(|(v, a)| a * a * v / s)
            .collect();
        self.to_world(&y)
    }

    /// Half-widths of the axis-aligned bounding box around the centre.
    pub fn box_half_widths(&self) -> Vec<f64> {
        let d = self.dim();
        match &self.rotation {
            None => self.semi_axes.clone(),
            Some(q) => (0..d)
                .map(|k| {
                    (0..d)
                        .map(|i| (q[k * d + i] * self.semi_axes[i]).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect(),
        }
    }

    /// Exact signed distance to the boundary (negative inside).
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        let y = self.to_local(x);
        let (_, d) = project_local(&self.semi_axes, &y);
        d
    }

    /// Nearest boundary point to `x` (in world coordinates).
    pub fn boundary_projection(&self, x: &[f64]) -> Vec<f64> {
        let y = self.to_local(x);
        let (p, _) = project_local(&self.semi_axes, &y);
        self.to_world(&p)
    }

    /// Conservative signed distance: same sign as the exact value, magnitude
    /// never larger. Uses `y ∈ ρE ⇒ y + |1−ρ|·a_min·B ⊂ E` (inside) or
    /// `⊄ int E` (outside).
    pub fn signed_distance_bound(&self, x: &[f64]) -> f64 {
        let rho = self.level(x).sqrt();
        (rho - 1.0) * self.min_axis()
    }

    /// Surface measure. Planar ellipses use the AGM, `d = 3` a chart
    /// quadrature, `d ≥ 4` a one-dimensional Gaussian-projection integral.
    pub fn perimeter(&self) -> Result<f64> {
        let a = &self.semi_axes;
        match self.dim() {
            1 => Ok(2.0),
            2 => Ok(ellipse_perimeter(a[0], a[1])),
            3 => Ok(surface_area_3d(a[0], a[1], a[2])),
            _ => surface_area_gaussian(a),
        }
    }
}

/// Nearest point on the ellipsoid boundary `Σ yᵢ²/aᵢ² = 1` to `y`, and the signed
/// distance. Newton iteration on the Lagrange multiplier with a bisection
/// safeguard keeps the iterate inside the bracket where the secular function
/// is monotone.
pub(crate) fn project_local(axes: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
    let d = axes.len();
    let z: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    let level: f64 = z.iter().zip(axes).map(|(z, a)| (z / a) * (z / a)).sum();
    if level == 1.0 {
        return (y.to_vec(), 0.0);
    }
    let inside = level < 1.0;
    let secular = |t: f64| -> (f64, f64) {
        let mut f = -1.0;
        let mut df = 0.0;
        for (zi, ai) in z.iter().zip(axes) {
            if *zi == 0.0 {
                continue;
            }
            let den = t + ai * ai;
            let r = ai * zi / den;
            f += r * r;
            df -= 2.0 * r * r / den;
        }
        (f, df)
    };
    let amin = axes.iter().copied().fold(f64::INFINITY, f64::min);
    let (lo, hi) = if inside {
        let lo = -amin * amin;
        let pole = z
            .iter()
            .zip(axes)
            .any(|(zi, ai)| *ai == amin && *zi > 0.0);
        if !pole {
            // The minimum-axis components vanish; either the secular
            // equation still changes sign above t = -a_min², or the nearest
            // point leaves the coordinate plane along the shortest axis.
            let f_lo: f64 = z
                .iter()
                .zip(axes)
                .filter(|(_, a)| **a > amin)
                .map(|(zi, ai)| (ai * zi / (ai * ai - amin * amin)).powi(2))
                .sum::<f64>()
                - 1.0;
            if f_lo <= 0.0 {
                let mut x = vec![0.0; d];
                let mut used = 0.0;
                for i in 0..d {
                    if axes[i] > amin {
                        x[i] = axes[i] * axes[i] * z[i] / (axes[i] * axes[i] - amin * amin);
                        used += (x[i] / axes[i]).powi(2);
                    }
                }
                let k = axes.iter().position(|a| *a == amin).expect("minimum exists");
                x[k] = amin * (1.0 - used).max(0.0).sqrt();
                let dist = x
                    .iter()
                    .zip(&z)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let x = restore_signs(x, y);
                return (x, -dist);
            }
        }
        (lo, 0.0)
    } else {
        let hi = z
            .iter()
            .zip(axes)
            .map(|(z, a)| (z * a) * (z * a))
            .sum::<f64>()
            .sqrt();
        (0.0, hi)
    };
    let (mut lo, mut hi) = (lo, hi);
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = secular(t);
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if f == 0.0 || hi - lo <= 4.0 * f64::EPSILON * (hi.abs().max(lo.abs()).max(amin * amin)) {
            break;
        }
        let newton = t - f / df;
        t = if df < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let x: Vec<f64> = z
        .iter()
        .zip(axes)
        .map(|(zi, ai)| ai * ai * zi / (t + ai * ai))
        .collect();
    let dist = x
        .iter()
        .zip(&z)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    (restore_signs(x, y), if inside { -dist } else { dist })
}

fn restore_signs(mut x: Vec<f64>, y: &[f64]) -> Vec<f64> {
    for (xi, yi) in x.iter_mut().zip(y) {
        if *yi < 0.0 {
            *xi = -*xi;
        }
    }
    x
}

/// Surface area of a triaxial ellipsoid from the parametrisation
/// `(a sinθ cosφ, b sinθ sinφ, c cosθ)`: Gauss-Legendre in `cos θ`,
/// trapezoid (spectrally accurate for periodic integrands) in `φ`, refined
/// until two successive resolutions agree to 1e-12.
/// `4π abc R_G(a⁻², b⁻², c⁻²)`.
fn surface_area_3d(a: f64, b: f64, c: f64) -> f64 {
    4.0 * std::f64::consts::PI * a * b * c * carlson_rg(a.powi(-2), b.powi(-2), c.powi(-2))
}

/// Tensor Gauss–Legendre × midpoint quadrature of the surface element,
/// doubled until stable.
#[cfg(test)]
fn surface_area_3d_quadrature(a: f64, b: f64, c: f64) -> f64 {
    let eval = |n: usize| -> f64 {
        let (x, w) = crate::special::gauss_legendre(n);
        let m = 2 * n;
        let mut total = 0.0;
        for (u, wu) in x.iter().zip(&w) {
            // u = cos θ; dA = sinθ·|…| dθ dφ = |…| du dφ
            let s2 = 1.0 - u * u;
            let mut ring = 0.0;
            for j in 0..m {
                let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                let (sp, cp) = phi.sin_cos();
                let g = s2 * ((b * c * cp).powi(2) + (a * c * sp).powi(2)) + (a * b * u).powi(2);
                ring += g.sqrt();
            }
            total += wu * ring * 2.0 * std::f64::consts::PI / m as f64;
        }
        total
    };
    let mut n = 16;
    let mut prev = eval(n);
    loop {
        n *= 2;
        let cur = eval(n);
        if (cur - prev).abs() <= 1e-12 * cur || n >= 4096 {
            return cur;
        }
        prev = cur;
    }
}

/// `P(E) = d·ω_d·∏aᵢ · E|A⁻¹g| / E|g|` for a standard Gaussian `g`, the
/// Cauchy projection formula with the direction average written as a
/// Gaussian expectation. `E|A⁻¹g|` reduces through
/// `√s = (2√π)⁻¹∫₀^∞ (1 − e^{−λs}) λ^{−3/2} dλ` to a single integral.
fn surface_area_gaussian(a: &[f64]) -> Result<f64> {
    let d = a.len();
    let c: Vec<f64> = a.iter().map(|a| 1.0 / (a * a)).collect();
    let q = crate::quad::integrate_half_line(
        |lambda| {
            let ln_prod: f64 = c.iter().map(|ci| -0.5 * (2.0 * lambda * ci).ln_1p()).sum();
            let one_minus = -ln_prod.exp_m1();
            one_minus * lambda.powf(-1.5)
        },
        1e-13,
    )?;
    let mean_inv = q.value / (2.0 * std::f64::consts::PI.sqrt());
    let ln_mean_norm = 0.5 * 2f64.ln() + crate::special::ln_gamma_half(d as u32 + 1)
        - crate::special::ln_gamma_half(d as u32);
    let p = d as f64 * unit_ball_volume(d) * a.iter().product::<f64>() * mean_inv
        / ln_mean_norm.exp();
    Ok(p)
}
