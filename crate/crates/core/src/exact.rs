//! Closed-form and quadrature values for balls and ellipsoids.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quad::integrate_half_line;
use crate::special::{carlson_rf, ln_gamma_half, unit_ball_volume};

/// Reference values of the unit ball in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallConstants {
    pub d: usize,
    /// Volume `ω_d`.
    pub omega: f64,
    /// Torsional rigidity `τ_d = ω_d/(d(d+2))`.
    pub tau: f64,
    /// Newtonian capacity `κ_d = 4π^{d/2}/Γ((d−2)/2)`, `d ≥ 3`.
    pub kappa: Option<f64>,
    /// `G(B₁) = κ_dτ_d/ω_d²`, `d ≥ 3`.
    pub g_ball: Option<f64>,
    /// `H(B₁)`, `d = 2`.
    pub h_ball: Option<f64>,
    /// `(α, G_α(B₁))` for each requested α, `d ≥ 3`.
    pub g_alpha_ball: Vec<(f64, f64)>,
    /// `(α, H_α(B₁))` for each requested α, `d = 2`.
    pub h_alpha_ball: Vec<(f64, f64)>,
}

/// Unit-ball constants in dimension `d`, with `G_α(B₁)` (or `H_α(B₁)` in
/// the plane) for every α in `alphas`.
pub fn ball_constants(d: usize, alphas: &[f64]) -> Result<BallConstants> {
    if d < 2 {
        return invalid(format!("dimension must be at least 2, got {d}"));
    }
    let omega = unit_ball_volume(d);
    let tau = omega / (d * (d + 2)) as f64;
    let kappa = (d >= 3).then(|| kappa(d));
    let g_ball = kappa.map(|k| k * tau / (omega * omega));
    let h_ball = (d == 2).then(|| 2f64.powf(-1.5) / PI);
    let mut g_alpha_ball = Vec::new();
    let mut h_alpha_ball = Vec::new();
    for &a in alphas {
        if d >= 3 {
            g_alpha_ball.push((a, g_alpha_ball_value(d, a)?));
        } else {
            h_alpha_ball.push((a, h_alpha_ball_value(a)?));
        }
    }
    Ok(BallConstants {
        d,
        omega,
        tau,
        kappa,
        g_ball,
        h_ball,
        g_alpha_ball,
        h_alpha_ball,
    })
}

impl BallConstants {
    pub fn kappa(&self) -> Result<f64> {
        self.kappa
            .ok_or_else(|| Error::DimensionMismatch("Newtonian capacity needs d ≥ 3".into()))
    }

    pub fn g_ball(&self) -> Result<f64> {
        self.g_ball
            .ok_or_else(|| Error::DimensionMismatch("G needs d ≥ 3".into()))
    }

    pub fn h_ball(&self) -> Result<f64> {
        self.h_ball
            .ok_or_else(|| Error::DimensionMismatch("H needs d = 2".into()))
    }

    /// Surface measure of the unit sphere, `d·ω_d`.
    pub fn sphere_area(&self) -> f64 {
        self.d as f64 * self.omega
    }

    pub fn g_alpha(&self, alpha: f64) -> Result<f64> {
        g_alpha_ball_value(self.d, alpha)
    }

    pub fn h_alpha(&self, alpha: f64) -> Result<f64> {
        if self.d != 2 {
            return Err(Error::DimensionMismatch("H_α needs d = 2".into()));
        }
        h_alpha_ball_value(alpha)
    }
}

fn kappa(d: usize) -> f64 {
    (4f64.ln() + 0.5 * d as f64 * PI.ln() - ln_gamma_half(d as u32 - 2)).exp()
}

/// `G_α(B₁) = τ_dκ_d / (ω_d^α (dω_d)^{d(2−α)/(d−1)})`.
fn g_alpha_ball_value(d: usize, alpha: f64) -> Result<f64> {
    if d < 3 {
        return Err(Error::DimensionMismatch("G_α needs d ≥ 3".into()));
    }
    if !(0.0..=2.0).contains(&alpha) {
        return invalid(format!("α must lie in [0, 2], got {alpha}"));
    }
    let omega = unit_ball_volume(d);
    let tau = omega / (d * (d + 2)) as f64;
    let df = d as f64;
    let ln = tau.ln() + kappa(d).ln()
        - alpha * omega.ln()
        - df * (2.0 - alpha) / (df - 1.0) * (df * omega).ln();
    Ok(ln.exp())
}

/// `H_α(B₁) = 2^{(4α−9)/2} π^{(2α−5)/2}`.
fn h_alpha_ball_value(alpha: f64) -> Result<f64> {
    if !(0.0..=1.5).contains(&alpha) {
        return invalid(format!("α must lie in [0, 3/2], got {alpha}"));
    }
    Ok(2f64.powf((4.0 * alpha - 9.0) / 2.0) * PI.powf((2.0 * alpha - 5.0) / 2.0))
}

fn check_axes(a: &[f64]) -> Result<()> {
    if a.len() < 2 {
        return invalid("need at least two semi-axes");
    }
    if a.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return invalid(format!("semi-axes must be positive, got {a:?}"));
    }
    Ok(())
}

/// `T(E(a)) = ω_d/(d+2) · ∏aᵢ · (Σaᵢ⁻²)⁻¹`.
pub fn torsion_ellipsoid(a: &[f64]) -> Result<f64> {
    check_axes(a)?;
    let d = a.len();
    let prod: f64 = a.iter().product();
    let s: f64 = a.iter().map(|x| 1.0 / (x * x)).sum();
    Ok(unit_ball_volume(d) / (d + 2) as f64 * prod / s)
}

/// `∫₀^∞ ∏(aᵢ² + t)^{−1/2} dt` for `d ≥ 3`.
///
/// `d = 3` is `2R_F(a₁², a₂², a₃²)`; higher dimensions use adaptive
/// quadrature on the half-line after normalising the largest axis to one.
pub fn carlson_integral(a: &[f64]) -> Result<f64> {
    check_axes(a)?;
    let d = a.len();
    if d < 3 {
        return invalid("the integral diverges for d < 3");
    }
    if d == 3 {
        return Ok(2.0 * carlson_rf(a[0] * a[0], a[1] * a[1], a[2] * a[2]));
    }
    let s = a.iter().copied().fold(0.0, f64::max);
    let sq: Vec<f64> = a.iter().map(|x| (x / s) * (x / s)).collect();
    let q = integrate_half_line(
        |t| {
            let ln: f64 = sq.iter().map(|c| (c + t).ln()).sum();
            (-0.5 * ln).exp()
        },
        1e-13,
    )?;
    Ok(q.value * s.powi(2 - d as i32))
}

/// `cap(Ē(a)) = κ_d / (d/2 − 1) · 𝔢(a)⁻¹`.
pub fn cap_newtonian_ellipsoid(a: &[f64]) -> Result<f64> {
    let e = carlson_integral(a)?;
    let d = a.len();
    Ok(kappa(d) / (0.5 * d as f64 - 1.0) / e)
}

/// Logarithmic capacity of an ellipse: `(a₁ + a₂)/2`.
pub fn cap_log_ellipse(a1: f64, a2: f64) -> Result<f64> {
    check_axes(&[a1, a2])?;
    Ok(0.5 * (a1 + a2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eccentricity {
    /// `C(a) = (d−1)⁻¹ Σ_{i≥2} b₁²/bᵢ²` with `b` the axes sorted decreasingly.
    pub value: f64,
    /// `b₁²/((d−1)b_d²) ≤ C(a)`.
    pub lower_bound: f64,
}

pub fn eccentricity(a: &[f64]) -> Result<Eccentricity> {
    check_axes(a)?;
    let d = a.len();
    let mut b = a.to_vec();
    b.sort_by(|x, y| y.total_cmp(x));
    let b1 = b[0] * b[0];
    let value = b[1..].iter().map(|x| b1 / (x * x)).sum::<f64>() / (d - 1) as f64;
    let lower_bound = b1 / ((d - 1) as f64 * b[d - 1] * b[d - 1]);
    Ok(Eccentricity { value, lower_bound })
}

/// `G(E(a))` from the single integral
/// `G(B₁)·(2d/(d−2))·(∫₀^∞ Σcᵢ / ∏(1+cᵢt)^{1/2} dt)⁻¹`, `cᵢ = aᵢ⁻²`,
/// cross-checked against `T·cap/|E|²` assembled from the component values.
pub fn g_ellipsoid_direct(a: &[f64]) -> Result<f64> {
    check_axes(a)?;
    let d = a.len();
    if d < 3 {
        return invalid("G needs d ≥ 3");
    }
    let direct = g_ellipsoid_integral(a)?;
    let t = torsion_ellipsoid(a)?;
    let cap = cap_newtonian_ellipsoid(a)?;
    let vol = unit_ball_volume(d) * a.iter().product::<f64>();
    let assembled = t * cap / (vol * vol);
    if (direct - assembled).abs() > 1e-9 * assembled {
        return Err(Error::Consistency(format!(
            "G by direct integral {direct} differs from component assembly {assembled}"
        )));
    }
    Ok(direct)
}

pub(crate) fn g_ellipsoid_integral(a: &[f64]) -> Result<f64> {
    let d = a.len();
    // scale invariance of G: normalise the largest axis to one
    let s = a.iter().copied().fold(0.0, f64::max);
    let c: Vec<f64> = a.iter().map(|x| (s / x) * (s / x)).collect();
    let csum: f64 = c.iter().sum();
    let q = integrate_half_line(
        |t| {
            let ln: f64 = c.iter().map(|ci| (ci * t).ln_1p()).sum();
            csum * (-0.5 * ln).exp()
        },
        1e-13,
    )?;
    let df = d as f64;
    let g_ball = (df - 2.0) / (df + 2.0);
    Ok(g_ball * 2.0 * df / (df - 2.0) / q.value)
}

/// `H(E) = (b₁ + b₂) / (4π √(b₁² + b₂²))` for an ellipse.
pub fn h_ellipse(a1: f64, a2: f64) -> Result<f64> {
    check_axes(&[a1, a2])?;
    Ok((a1 + a2) / (4.0 * PI * (a1 * a1 + a2 * a2).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn constants_in_three_dimensions() {
        let c = ball_constants(3, &[0.0]).unwrap();
        assert!(rel(c.kappa.unwrap(), 4.0 * PI) < 1e-15);
        assert!(rel(c.tau, 4.0 * PI / 45.0) < 1e-15);
        assert!(rel(c.g_ball.unwrap(), 0.2) < 1e-14);
        assert!(rel(c.g_alpha_ball[0].1, 1.0 / (180.0 * PI)) < 1e-14);
    }

    #[test]
    fn g_ball_reduces_to_rational() {
        for d in 3..=64 {
            let c = ball_constants(d, &[]).unwrap();
            let want = (d as f64 - 2.0) / (d as f64 + 2.0);
            assert!(rel(c.g_ball.unwrap(), want) < 1e-13, "d = {d}");
        }
    }

    #[test]
    fn planar_constants() {
        let c = ball_constants(2, &[1.5, 0.0]).unwrap();
        assert!(c.kappa.is_none());
        assert!(rel(c.h_alpha_ball[0].1, c.h_ball.unwrap()) < 1e-15);
        // H_0(B₁) = √(π/8)/(2π)³
        let want = (PI / 8.0).sqrt() / (2.0 * PI).powi(3);
        assert!(rel(c.h_alpha_ball[1].1, want) < 1e-14);
        assert!(ball_constants(1, &[]).is_err());
        assert!(c.h_alpha(1.6).is_err());
    }

    #[test]
    fn torsion_values() {
        assert!(rel(torsion_ellipsoid(&[1.0, 1.0, 1.0]).unwrap(), 4.0 * PI / 45.0) < 1e-15);
        assert!(rel(torsion_ellipsoid(&[2.0, 1.0, 1.0]).unwrap(), 32.0 * PI / 135.0) < 1e-15);
        let t = 1.7f64;
        let want = t.powi(5) * 4.0 * PI / 45.0;
        assert!(rel(torsion_ellipsoid(&[t, t, t]).unwrap(), want) < 1e-14);
    }

    #[test]
    fn carlson_integral_values() {
        assert!(rel(carlson_integral(&[1.0, 1.0, 1.0]).unwrap(), 2.0) < 1e-14);
        let s3 = 3f64.sqrt();
        let prolate = ((2.0 + s3) / (2.0 - s3)).ln() / s3;
        assert!(rel(carlson_integral(&[2.0, 1.0, 1.0]).unwrap(), prolate) < 1e-13);
        // d = 4 ball: ∫(1+t)^{-2} = 1
        assert!(rel(carlson_integral(&[1.0; 4]).unwrap(), 1.0) < 1e-12);
        // d = 5 ball: ∫(1+t)^{-5/2} = 2/3
        assert!(rel(carlson_integral(&[1.0; 5]).unwrap(), 2.0 / 3.0) < 1e-12);
        assert!(carlson_integral(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn capacity_values() {
        assert!(rel(cap_newtonian_ellipsoid(&[1.0, 1.0, 1.0]).unwrap(), 4.0 * PI) < 1e-14);
        assert!(rel(cap_newtonian_ellipsoid(&[2.0, 2.0, 2.0]).unwrap(), 8.0 * PI) < 1e-14);
        for d in 4..=8 {
            let want = kappa(d);
            assert!(rel(cap_newtonian_ellipsoid(&vec![1.0; d]).unwrap(), want) < 1e-11);
        }
        assert_eq!(cap_log_ellipse(2.0, 1.0).unwrap(), 1.5);
    }

    #[test]
    fn eccentricity_values() {
        assert_eq!(eccentricity(&[1.0; 4]).unwrap().value, 1.0);
        assert_eq!(eccentricity(&[2.0, 1.0, 1.0]).unwrap().value, 4.0);
        assert_eq!(eccentricity(&[2.0, 1.0, 1.0, 1.0]).unwrap().value, 4.0);
        let e = eccentricity(&[3.0, 2.0, 1.0]).unwrap();
        assert!(e.lower_bound <= e.value);
    }

    #[test]
    fn direct_g_matches_assembly() {
        assert!(rel(g_ellipsoid_direct(&[1.0, 1.0, 1.0]).unwrap(), 0.2) < 1e-12);
        let g = g_ellipsoid_direct(&[2.0, 1.0, 1.0]).unwrap();
        assert!((g - 0.17531).abs() < 5e-5, "{g}");
        for a in [vec![5.0, 1.0, 0.3, 0.2], vec![1.0, 2.0, 3.0, 4.0, 5.0]] {
            let g = g_ellipsoid_direct(&a).unwrap();
            let d = a.len() as f64;
            assert!(g <= (d - 2.0) / (d + 2.0));
        }
    }

    #[test]
    fn planar_h() {
        assert!(rel(h_ellipse(2.0, 1.0).unwrap(), 3.0 / (4.0 * PI * 5f64.sqrt())) < 1e-15);
        assert!(rel(h_ellipse(1.0, 1.0).unwrap(), 2f64.powf(-1.5) / PI) < 1e-15);
    }
}
