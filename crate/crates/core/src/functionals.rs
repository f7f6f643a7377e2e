//! The scale-invariant functionals
//! `G_α = T·cap / (|Ω|^α P^{d(2−α)/(d−1)})` (`d ≥ 3`) and
//! `H_α = T^{1/2}·cap / (|Ω|^α P^{3−2α})` (`d = 2`), with `G = G_2` and
//! `H = H_{3/2}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{fekete_logcap, wos_capacity, wos_torsion, Estimate, EstimatorConfig};
use crate::exact::{cap_log_ellipse, cap_newtonian_ellipsoid, torsion_ellipsoid};
use crate::geometry::Body;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FunctionalId {
    G,
    H,
    GAlpha(f64),
    HAlpha(f64),
}

/// Powers applied to each component.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Exponents {
    torsion: f64,
    volume: f64,
    perimeter: f64,
}

impl FunctionalId {
    /// `G` is `G_alpha(2)` and `H` is `H_alpha(3/2)`; everything is computed
    /// from this form.
    pub fn canonical(self) -> Self {
        match self {
            FunctionalId::G => FunctionalId::GAlpha(2.0),
            FunctionalId::H => FunctionalId::HAlpha(1.5),
            other => other,
        }
    }

    pub fn is_planar(self) -> bool {
        matches!(self, FunctionalId::H | FunctionalId::HAlpha(_))
    }

    pub fn alpha(self) -> f64 {
        match self.canonical() {
            FunctionalId::GAlpha(a) | FunctionalId::HAlpha(a) => a,
            _ => unreachable!(),
        }
    }

    /// Checks α and the dimension.
    pub fn validate(self, d: usize) -> Result<()> {
        match self.canonical() {
            FunctionalId::GAlpha(a) => {
                if !(0.0..=2.0).contains(&a) {
                    return invalid(format!("G_alpha needs α in [0, 2], got {a}"));
                }
                if d < 3 {
                    return Err(Error::DimensionMismatch(format!("{self} needs d ≥ 3, got {d}")));
                }
            }
            FunctionalId::HAlpha(a) => {
                if !(0.0..=1.5).contains(&a) {
                    return invalid(format!("H_alpha needs α in [0, 3/2], got {a}"));
                }
                if d != 2 {
                    return Err(Error::DimensionMismatch(format!("{self} needs d = 2, got {d}")));
                }
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    /// Whether the functional involves `P(Ω)` in dimension `d`.
    pub fn needs_perimeter(self, d: usize) -> bool {
        self.exponents(d).perimeter != 0.0
    }

    fn exponents(self, d: usize) -> Exponents {
        let df = d as f64;
        match self.canonical() {
            FunctionalId::GAlpha(a) => Exponents {
                torsion: 1.0,
                volume: a,
                perimeter: df * (2.0 - a) / (df - 1.0),
            },
            FunctionalId::HAlpha(a) => Exponents {
                torsion: 0.5,
                volume: a,
                perimeter: 3.0 - 2.0 * a,
            },
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for FunctionalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalId::G => write!(f, "G"),
            FunctionalId::H => write!(f, "H"),
            FunctionalId::GAlpha(a) => write!(f, "G_alpha({a})"),
            FunctionalId::HAlpha(a) => write!(f, "H_alpha({a})"),
        }
    }
}

impl FromStr for FunctionalId {
    type Err = Error;

    /// Accepts `G`, `H`, `G_alpha(α)`, `H_alpha(α)` and the shorthand
    /// `G_alpha:α`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "G" => return Ok(FunctionalId::G),
            "H" => return Ok(FunctionalId::H),
            _ => {}
        }
        let (name, arg) = if let Some(rest) = s.strip_suffix(')') {
            rest.split_once('(')
                .ok_or_else(|| Error::Invalid(format!("unknown functional {s:?}")))?
        } else {
            s.split_once(':')
                .ok_or_else(|| Error::Invalid(format!("unknown functional {s:?}")))?
        };
        let alpha: f64 = arg
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad α in {s:?}")))?;
        if !alpha.is_finite() {
            return invalid(format!("α must be finite in {s:?}"));
        }
        match name.trim() {
            "G_alpha" | "G_α" => Ok(FunctionalId::GAlpha(alpha)),
            "H_alpha" | "H_α" => Ok(FunctionalId::HAlpha(alpha)),
            _ => invalid(format!("unknown functional {s:?}")),
        }
    }
}

impl From<FunctionalId> for String {
    fn from(f: FunctionalId) -> String {
        f.to_string()
    }
}

impl TryFrom<String> for FunctionalId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Component values a functional is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub torsion: Estimate,
    pub capacity: Estimate,
    pub volume: Estimate,
    /// Absent when the functional does not involve `P(Ω)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perimeter: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub functional: FunctionalId,
    pub dim: usize,
    pub value: f64,
    /// First-order propagated standard error; zero on exact backends.
    pub stderr: f64,
    /// `value ± 3·stderr`.
    pub bracket: [f64; 2],
    pub components: Components,
}

impl Evaluation {
    pub fn is_exact(&self) -> bool {
        self.stderr == 0.0
    }

    /// The value assembled again from the stored components.
    pub fn recompute(&self) -> f64 {
        assemble(self.functional, self.dim, &self.components)
    }
}

fn assemble(f: FunctionalId, d: usize, c: &Components) -> f64 {
    let e = f.exponents(d);
    let mut den = c.volume.value.powf(e.volume);
    if let Some(p) = &c.perimeter {
        den *= p.value.powf(e.perimeter);
    }
    c.torsion.value.powf(e.torsion) * c.capacity.value / den
}

/// Components by closed form or deterministic quadrature.
fn exact_components(body: &Body, need_perimeter: bool) -> Option<Result<Components>> {
    let e = body.as_ellipsoid()?;
    Some((|| {
        let a = e.semi_axes();
        let capacity = if a.len() == 2 {
            Estimate::exact(cap_log_ellipse(a[0], a[1])?, "closed_form")
        } else {
            Estimate::exact(cap_newtonian_ellipsoid(a)?, "carlson_quadrature")
        };
        let perimeter = if need_perimeter {
            Some(Estimate::exact(e.perimeter()?, "perimeter_quadrature"))
        } else {
            None
        };
        Ok(Components {
            torsion: Estimate::exact(torsion_ellipsoid(a)?, "closed_form"),
            capacity,
            volume: Estimate::exact(e.volume(), "closed_form"),
            perimeter,
        })
    })())
}

fn estimated_components(body: &Body, need_perimeter: bool, cfg: &EstimatorConfig) -> Result<Components> {
    let volume = Estimate::exact(body.measure()?, "geometry");
    let perimeter = if need_perimeter {
        Some(Estimate::exact(body.perimeter()?, "geometry"))
    } else {
        None
    };
    let torsion = wos_torsion(body, cfg)?;
    let capacity = if body.dim() == 2 {
        fekete_logcap(body, cfg.fekete_points)?
    } else {
        wos_capacity(body, cfg)?
    };
    Ok(Components {
        torsion,
        capacity,
        volume,
        perimeter,
    })
}

/// Component values of `body`. Ellipsoids and balls use closed forms; any
/// other body goes through the Monte Carlo and Fekete estimators. `P(Ω)` is
/// computed only when asked for.
pub fn components(body: &Body, with_perimeter: bool, cfg: &EstimatorConfig) -> Result<Components> {
    match exact_components(body, with_perimeter) {
        Some(c) => c,
        None => estimated_components(body, with_perimeter, cfg),
    }
}

/// Assembles `f` from precomputed components of a `d`-dimensional body,
/// combining the component errors to first order.
pub fn evaluate_components(f: FunctionalId, d: usize, components: &Components) -> Result<Evaluation> {
    f.validate(d)?;
    let e = f.exponents(d);
    let mut components = components.clone();
    if e.perimeter == 0.0 {
        components.perimeter = None;
    } else if components.perimeter.is_none() {
        return Err(Error::Unsupported(format!("{f} needs the surface measure")));
    }
    let value = assemble(f, d, &components);
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::DegenerateEstimate(format!("{f} evaluated to {value}")));
    }
    let rel2 = |est: &Estimate, power: f64| (power * est.stderr / est.value).powi(2);
    let mut var = rel2(&components.torsion, e.torsion)
        + rel2(&components.capacity, 1.0)
        + rel2(&components.volume, e.volume);
    if let Some(p) = &components.perimeter {
        var += rel2(p, e.perimeter);
    }
    let stderr = value * var.sqrt();
    Ok(Evaluation {
        functional: f,
        dim: d,
        value,
        stderr,
        bracket: [value - 3.0 * stderr, value + 3.0 * stderr],
        components,
    })
}

pub fn evaluate(f: FunctionalId, body: &Body, cfg: &EstimatorConfig) -> Result<Evaluation> {
    let d = body.dim();
    f.validate(d)?;
    let with_perimeter = f.needs_perimeter(d);
    evaluate_components(f, d, &components(body, with_perimeter, cfg)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleCheck {
    /// Largest `|f(tΩ) − f(Ω)| / f(Ω)` over the scale factors.
    pub max_relative_deviation: f64,
    /// Exact backends: deviation ≤ 1e−10. Stochastic backends: every scaled
    /// value within three combined standard errors of the unscaled one.
    pub consistent: bool,
    pub exact: bool,
}

/// Evaluates `f` on `tΩ` for each `t`, reusing the random streams of the
/// unscaled run so the paired estimates share their noise.
pub fn scale_invariance_check(
    f: FunctionalId,
    body: &Body,
    ts: &[f64],
    cfg: &EstimatorConfig,
) -> Result<ScaleCheck> {
    let base = evaluate(f, body, cfg)?;
    let mut dev: f64 = 0.0;
    let mut consistent = true;
    let mut exact = base.is_exact();
    for &t in ts {
        let ev = evaluate(f, &body.scale(t)?, &cfg.scaled(t))?;
        let diff = (ev.value - base.value).abs();
        dev = dev.max(diff / base.value);
        exact &= ev.is_exact();
        if !ev.is_exact() || !base.is_exact() {
            let tol = 3.0 * (ev.stderr.powi(2) + base.stderr.powi(2)).sqrt();
            consistent &= diff <= tol;
        }
    }
    if exact {
        consistent = dev <= 1e-10;
    }
    Ok(ScaleCheck {
        max_relative_deviation: dev,
        consistent,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ball_constants, g_ellipsoid_direct, h_ellipse};
    use std::f64::consts::PI;

    fn cfg() -> EstimatorConfig {
        EstimatorConfig::default()
    }

    #[test]
    fn g_of_unit_ball() {
        let ev = evaluate(FunctionalId::G, &Body::unit_ball(3), &cfg()).unwrap();
        assert!((ev.value - 0.2).abs() < 1e-14);
        assert!(ev.is_exact());
        assert!(ev.components.perimeter.is_none());
    }

    #[test]
    fn h_of_ellipse_matches_closed_form() {
        let b = Body::ellipsoid(vec![2.0, 1.0]).unwrap();
        let ev = evaluate(FunctionalId::H, &b, &cfg()).unwrap();
        assert!((ev.value - 3.0 / (4.0 * PI * 5f64.sqrt())).abs() < 1e-12);
        assert!((ev.value - h_ellipse(2.0, 1.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn h_alpha_three_halves_is_h() {
        let b = Body::ellipsoid(vec![3.0, 0.4]).unwrap();
        let h = evaluate(FunctionalId::H, &b, &cfg()).unwrap();
        let ha = evaluate(FunctionalId::HAlpha(1.5), &b, &cfg()).unwrap();
        assert_eq!(h.value, ha.value);
    }

    #[test]
    fn g_alpha_two_is_g() {
        let b = Body::ellipsoid(vec![3.0, 1.0, 0.4, 0.2]).unwrap();
        let g = evaluate(FunctionalId::G, &b, &cfg()).unwrap();
        let ga = evaluate(FunctionalId::GAlpha(2.0), &b, &cfg()).unwrap();
        assert_eq!(g.value, ga.value);
    }

    #[test]
    fn g_alpha_zero_of_unit_ball() {
        let ev = evaluate(FunctionalId::GAlpha(0.0), &Body::unit_ball(3), &cfg()).unwrap();
        let omega = 4.0 * PI / 3.0;
        assert!((ev.value - 1.0 / (135.0 * omega)).abs() < 1e-15);
    }

    #[test]
    fn ball_values_match_constants() {
        for d in 3..=7 {
            let c = ball_constants(d, &[0.0, 0.5, 1.3]).unwrap();
            for &(a, want) in &c.g_alpha_ball {
                let ev = evaluate(FunctionalId::GAlpha(a), &Body::unit_ball(d), &cfg()).unwrap();
                assert!((ev.value - want).abs() < 1e-12 * want, "d={d} α={a}");
            }
        }
        let c = ball_constants(2, &[0.0, 1.0]).unwrap();
        for &(a, want) in &c.h_alpha_ball {
            let ev = evaluate(FunctionalId::HAlpha(a), &Body::unit_ball(2), &cfg()).unwrap();
            assert!((ev.value - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn assembled_g_agrees_with_single_integral() {
        for a in [vec![2.0, 1.0, 1.0], vec![5.0, 2.0, 0.3], vec![1.0, 0.9, 0.8, 0.1]] {
            let ev = evaluate(FunctionalId::G, &Body::ellipsoid(a.clone()).unwrap(), &cfg()).unwrap();
            let direct = g_ellipsoid_direct(&a).unwrap();
            assert!((ev.value - direct).abs() < 1e-9 * direct);
        }
    }

    #[test]
    fn breakdown_recombines() {
        let b = Body::ellipsoid(vec![2.0, 1.5, 0.5, 0.25]).unwrap();
        let ev = evaluate(FunctionalId::GAlpha(0.7), &b, &cfg()).unwrap();
        assert!((ev.recompute() - ev.value).abs() < 1e-12 * ev.value);
    }

    #[test]
    fn dimension_and_alpha_checked() {
        let c = cfg();
        assert!(matches!(
            evaluate(FunctionalId::G, &Body::unit_ball(2), &c),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            evaluate(FunctionalId::H, &Body::unit_ball(3), &c),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            evaluate(FunctionalId::HAlpha(1.8), &Body::unit_ball(2), &c),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            evaluate(FunctionalId::GAlpha(-0.1), &Body::unit_ball(3), &c),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn exact_scale_invariance() {
        let b = Body::ellipsoid(vec![2.0, 1.0, 1.0]).unwrap();
        let s = scale_invariance_check(FunctionalId::G, &b, &[0.1, 7.3], &cfg()).unwrap();
        assert!(s.exact && s.consistent && s.max_relative_deviation <= 1e-10);
        let e = Body::ellipsoid(vec![3.0, 2.0]).unwrap();
        let s = scale_invariance_check(FunctionalId::H, &e, &[5.0], &cfg()).unwrap();
        assert!(s.max_relative_deviation <= 1e-10);
    }

    #[test]
    fn names_round_trip() {
        for f in [
            FunctionalId::G,
            FunctionalId::H,
            FunctionalId::GAlpha(0.25),
            FunctionalId::HAlpha(1.0),
        ] {
            assert_eq!(f.to_string().parse::<FunctionalId>().unwrap(), f);
            let js = serde_json::to_string(&f).unwrap();
            assert_eq!(serde_json::from_str::<FunctionalId>(&js).unwrap(), f);
        }
        assert_eq!("G_alpha:1".parse::<FunctionalId>().unwrap(), FunctionalId::GAlpha(1.0));
        assert!("K".parse::<FunctionalId>().is_err());
    }
}
