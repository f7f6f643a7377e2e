//! Special functions needed by the closed-form ellipsoid values: log-gamma at
//! half-integers, unit-ball constants, Carlson's `R_F` and the AGM form of the
//! complete elliptic integral of the second kind.

use std::f64::consts::PI;

/// `ln Γ(m/2)` for a positive integer `m`.
///
/// Only half-integer arguments occur in the ball constants, so the value is
/// assembled from the recurrence `Γ(x+1) = xΓ(x)` starting at `Γ(1) = 1` or
/// `Γ(1/2) = √π`; no series or asymptotic approximation is involved.
pub fn ln_gamma_half(m: u32) -> f64 {
    assert!(m > 0, "Γ has a pole at 0");
    let (mut acc, mut x) = if m.is_multiple_of(2) {
        (0.0, 1.0)
    } else {
        (0.5 * PI.ln(), 0.5)
    };
    let target = m as f64 / 2.0;
    while x < target {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

/// Volume of the unit ball in `R^d`: `π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    (0.5 * d as f64 * PI.ln() - ln_gamma_half(d as u32 + 2)).exp()
}

/// Carlson's symmetric elliptic integral of the first kind,
/// `R_F(x,y,z) = ½ ∫₀^∞ dt / √((t+x)(t+y)(t+z))`, by the duplication theorem.
///
/// At most one argument may be zero. The truncation tolerance is chosen so
/// the fifth-order remainder is below 1e-16 relative.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    debug_assert!(x >= 0.0 && y >= 0.0 && z >= 0.0);
    const ERRTOL: f64 = 8e-4;
    let (mut x, mut y, mut z) = (x, y, z);
    loop {
        let mu = (x + y + z) / 3.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0)
                / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
}

/// Carlson's `R_D(x,y,z) = (3/2) ∫₀^∞ dt / ((t+z)√((t+x)(t+y)(t+z)))`, by
/// duplication. `z` must be positive.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    debug_assert!(x >= 0.0 && y >= 0.0 && z > 0.0);
    const ERRTOL: f64 = 5e-4;
    let (mut x, mut y, mut z) = (x, y, z);
    let (mut sum, mut fac) = (0.0, 1.0);
    loop {
        let mu = (x + y + 3.0 * z) / 5.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ef = ed + ec + ec;
            let s1 = ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 9.0 / 52.0 * dz * ef);
            let s2 = dz * (ef / 6.0 + dz * (-9.0 / 22.0 * ec + dz * 3.0 / 26.0 * ea));
            return 3.0 * sum + fac * (1.0 + s1 + s2) / (mu * mu.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lambda));
        fac *= 0.25;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
}

/// Carlson's `R_G`, from `R_F` and `R_D` with the middle argument in the
/// `z` slot so that every term is non-negative.
pub fn carlson_rg(x: f64, y: f64, z: f64) -> f64 {
    let mut v = [x, y, z];
    v.sort_by(f64::total_cmp);
    let [x, z, y] = v;
    if z == 0.0 {
        // two zeros
        return 0.5 * y.sqrt();
    }
    0.5 * (z * carlson_rf(x, y, z) - (x - z) * (y - z) * carlson_rd(x, y, z) / 3.0 + (x * y / z).sqrt())
}

/// Perimeter of the ellipse with semi-axes `a`, `b` via the
/// arithmetic-geometric mean form of the complete elliptic integral `E`.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let (mut an, mut bn) = (a, b);
    let mut weight = 0.5;
    let mut corr = weight * (a * a - b * b);
    loop {
        let c = 0.5 * (an - bn);
        let g = (an * bn).sqrt();
        an = 0.5 * (an + bn);
        bn = g;
        weight *= 2.0;
        corr += weight * c * c;
        if c * c * weight <= 1e-17 * a * a {
            break;
        }
    }
    2.0 * PI * (a * a - corr) / an
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_half_integers() {
        assert_eq!(ln_gamma_half(2), 0.0);
        assert!((ln_gamma_half(1) - PI.sqrt().ln()).abs() < 1e-15);
        assert!((ln_gamma_half(10).exp() - 24.0).abs() < 1e-12);
        // Γ(5/2) = 3√π/4
        assert!((ln_gamma_half(5).exp() - 0.75 * PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
        assert!(unit_ball_volume(64) > 0.0);
    }

    #[test]
    fn rf_known_values() {
        assert!((carlson_rf(1.0, 1.0, 1.0) - 1.0).abs() < 1e-15);
        // R_F(0,1,2) = 1.31102877714605990523 (DLMF 19.20.1 lemniscate-type value)
        assert!((carlson_rf(0.0, 1.0, 2.0) - 1.311_028_777_146_06).abs() < 1e-13);
        // Homogeneity of degree -1/2.
        let r = carlson_rf(2.0, 3.0, 5.0);
        assert!((carlson_rf(8.0, 12.0, 20.0) - r / 2.0).abs() < 1e-15);
    }

    #[test]
    fn ellipse_perimeter_values() {
        assert!((ellipse_perimeter(1.0, 1.0) - 2.0 * PI).abs() < 1e-14);
        assert!((ellipse_perimeter(1.0, 1e-9) - 4.0).abs() < 1e-6);
        // 4·E(3/4) for a=2,b=1: 9.688448220547675...
        assert!((ellipse_perimeter(2.0, 1.0) - 9.688_448_220_547_675).abs() < 1e-12);
        assert_eq!(ellipse_perimeter(2.0, 1.0), ellipse_perimeter(1.0, 2.0));
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn carlson_rd_and_rg_reference_values() {
        // Carlson (1995) test values
        assert!((carlson_rd(0.0, 2.0, 1.0) - 1.7972103521034).abs() < 1e-12);
        assert!((carlson_rd(2.0, 3.0, 4.0) - 0.16510527294261).abs() < 1e-13);
        assert!((carlson_rg(0.0, 16.0, 16.0) - std::f64::consts::PI).abs() < 1e-12);
        assert!((carlson_rg(2.0, 3.0, 4.0) - 1.7255030280692).abs() < 1e-12);
        assert!((carlson_rg(0.0, 0.0, 4.0) - 1.0).abs() < 1e-15);
    }
}
