//! Disjoint balls of radii `r_j = j^{−β}`, `j = 1..k`, far apart. For
//! `1/d < β < 1/(d−2)` the measure stays bounded, the torsion stays above
//! `τ_d`, and the capacity grows like `k^{1−β(d−2)}`, so `G` is unbounded on
//! non-convex sets.
//!
//! All quantities are finite sums and are enclosed in intervals. Measure and
//! torsion are additive over disjoint components. Capacity is subadditive
//! from above; from below, the energy of the uniform surface charges
//! `q_j = κ_d r_j^{d−2}` bounds it via
//! `cap ≥ (Σq)² / (Σq + Σ_{i≠j} q_i q_j / (κ_d S^{d−2}))`,
//! which is exact for `k = 1`. Newton's theorem makes each cross term the
//! point-charge interaction at the centre distance, which is at least `S`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::ball_constants;
use crate::geometry::{Ball, BallUnion, Body};

/// Relative widening applied to each enclosure to absorb floating-point
/// rounding in `powf` and the compensated sums.
const ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalValue {
    pub lower: f64,
    pub upper: f64,
}

impl IntervalValue {
    fn around(x: f64) -> Self {
        Self {
            lower: x * (1.0 - ROUNDING),
            upper: x * (1.0 + ROUNDING),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub k: u64,
    pub g: IntervalValue,
    pub volume: IntervalValue,
    pub torsion: IntervalValue,
    pub capacity: IntervalValue,
    /// Minimum centre distance `S = k³ Σ r_j`.
    pub separation: f64,
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// `1, 2, 4, …, 2^max_exp`.
pub fn doubling_grid(max_exp: u32) -> Vec<u64> {
    (0..=max_exp).map(|e| 1u64 << e).collect()
}

fn check_beta(d: usize, beta: f64) -> Result<()> {
    if d < 3 {
        return Err(Error::DimensionMismatch(format!(
            "the disjoint-ball sequence needs d ≥ 3, got {d}"
        )));
    }
    let (lo, hi) = (1.0 / d as f64, 1.0 / (d as f64 - 2.0));
    if !(beta > lo && beta < hi) {
        return invalid(format!("β must lie in ({lo}, {hi}), got {beta}"));
    }
    Ok(())
}

/// Interval enclosures of `G(Ω_k)` for every `k` in `k_list`. All `k` share
/// one pass over `j`, so the cost is linear in the largest `k`.
pub fn counterexample_sequence(d: usize, beta: f64, k_list: &[u64]) -> Result<Vec<CounterexampleRow>> {
    check_beta(d, beta)?;
    if k_list.contains(&0) {
        return invalid("k must be at least 1");
    }
    let bc = ball_constants(d, &[])?;
    let kappa = bc.kappa.expect("d ≥ 3");
    let df = d as f64;
    let mut order: Vec<usize> = (0..k_list.len()).collect();
    order.sort_by_key(|i| k_list[*i]);
    let mut rows: Vec<Option<CounterexampleRow>> = vec![None; k_list.len()];

    let (mut radii, mut vol, mut tor, mut cap, mut cap_sq) =
        (Sum::default(), Sum::default(), Sum::default(), Sum::default(), Sum::default());
    let mut j = 0u64;
    for idx in order {
        let k = k_list[idx];
        while j < k {
            j += 1;
            let r = (j as f64).powf(-beta);
            let q = r.powf(df - 2.0);
            radii.add(r);
            vol.add(r.powf(df));
            tor.add(r.powf(df + 2.0));
            cap.add(q);
            cap_sq.add(q * q);
        }
        let kf = k as f64;
        let separation = kf.powi(3) * radii.value();
        let volume = IntervalValue::around(bc.omega * vol.value());
        let torsion = IntervalValue::around(bc.tau * tor.value());
        let c = kappa * cap.value();
        let cross = (kappa * kappa * (cap.value() * cap.value() - cap_sq.value())).max(0.0)
            / (kappa * separation.powf(df - 2.0));
        let lower = c * c / (c + cross);
        let capacity = IntervalValue {
            lower: lower * (1.0 - ROUNDING),
            upper: c * (1.0 + ROUNDING),
        };
        let g = IntervalValue {
            lower: torsion.lower * capacity.lower / (volume.upper * volume.upper),
            upper: torsion.upper * capacity.upper / (volume.lower * volume.lower),
        };
        rows[idx] = Some(CounterexampleRow {
            k,
            g,
            volume,
            torsion,
            capacity,
            separation,
        });
    }
    Ok(rows.into_iter().map(|r| r.expect("every k visited")).collect())
}

/// The union of the `k` balls, centred on the first axis at consecutive
/// distance `S`. Intended for small `k` cross-checks.
pub fn counterexample_body(d: usize, beta: f64, k: u64) -> Result<Body> {
    check_beta(d, beta)?;
    if k == 0 {
        return invalid("k must be at least 1");
    }
    let radii: Vec<f64> = (1..=k).map(|j| (j as f64).powf(-beta)).collect();
    let separation = (k as f64).powi(3) * radii.iter().sum::<f64>();
    let balls = radii
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut c = vec![0.0; d];
            c[0] = i as f64 * separation;
            Ball::new(c, *r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Body::BallUnion(BallUnion::new(balls)?))
}

/// Least-squares slope of `ln G_lower` against `ln k` over rows with
/// `k ≥ k_max / span`.
pub fn loglog_slope(rows: &[CounterexampleRow], span: f64) -> Option<f64> {
    let kmax = rows.iter().map(|r| r.k).max()? as f64;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.k as f64 >= kmax / span && r.g.lower > 0.0)
        .map(|r| ((r.k as f64).ln(), r.g.lower.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// CSV table with columns `k, G_lower, G_upper, |Ω|, T, cap_lower, cap_upper`.
/// Measure and torsion are reported by their interval midpoints.
pub fn counterexample_csv(rows: &[CounterexampleRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
    w.write_record(["k", "G_lower", "G_upper", "|Ω|", "T", "cap_lower", "cap_upper"])
        .map_err(io)?;
    for r in rows {
        let mid = |i: &IntervalValue| 0.5 * (i.lower + i.upper);
        w.write_record([
            r.k.to_string(),
            crate::report::fmt_f64(r.g.lower),
            crate::report::fmt_f64(r.g.upper),
            crate::report::fmt_f64(mid(&r.volume)),
            crate::report::fmt_f64(mid(&r.torsion)),
            crate::report::fmt_f64(r.capacity.lower),
            crate::report::fmt_f64(r.capacity.upper),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(format!("csv: {e}")))
}
