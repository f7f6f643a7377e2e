//! Property tests for the geometric, exact-backend, functional, ledger and
//! search invariants.

use std::f64::consts::PI;

use proptest::prelude::*;
use shapefn::bounds::{check_g_bounds, check_planar, LedgerConfig, Status};
use shapefn::estimators::EstimatorConfig;
use shapefn::exact::{ball_constants, cap_newtonian_ellipsoid, carlson_integral, g_ellipsoid_direct, torsion_ellipsoid};
use shapefn::functionals::{evaluate, FunctionalId};
use shapefn::geometry::{john_pair, loewner_ellipsoid, Body, Capsule, Ellipsoid, Polytope};
use shapefn::report::fmt_f64;
use shapefn::search::{counterexample_sequence, doubling_grid, Family, NelderMead};
use shapefn::special::unit_ball_volume;

fn axes(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, d).prop_map(|v| v.into_iter().map(f64::exp).collect())
}

fn axes_any_dim(lo: usize, hi: usize) -> impl Strategy<Value = Vec<f64>> {
    (lo..=hi).prop_flat_map(axes)
}

fn point(d: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, d)
}

/// Convex bodies of several kinds with exact measures.
fn convex_body() -> impl Strategy<Value = Body> {
    prop_oneof![
        axes_any_dim(2, 5).prop_map(|a| Body::ellipsoid(a).unwrap()),
        axes_any_dim(2, 3).prop_map(|a| Body::Polytope(Polytope::cuboid(&a).unwrap())),
        (0.1f64..2.0, 0.2f64..1.5).prop_map(|(h, r)| {
            Body::Capsule(Capsule::new(vec![-h, 0.0, 0.0], vec![h, 0.0, 0.0], r).unwrap())
        }),
    ]
}

/// Orthogonal matrix (row-major) from Gram–Schmidt on `raw`.
fn orthogonal(d: usize, raw: &[f64]) -> Vec<f64> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut v: Vec<f64> = raw[i * d..(i + 1) * d].to_vec();
        for r in &rows {
            let p: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
            for (vk, rk) in v.iter_mut().zip(r) {
                *vk -= p * rk;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        rows.push(v.into_iter().map(|x| x / n).collect());
    }
    rows.concat()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contains_matches_signed_distance(body in convex_body(), pts in prop::collection::vec(point(5, 3.0), 50)) {
        let d = body.dim();
        for p in &pts {
            let x = &p[..d];
            let sd = body.signed_distance(x);
            if sd.abs() > 1e-12 {
                prop_assert_eq!(body.contains(x), sd < 0.0, "{:?} sd {}", x, sd);
            }
        }
    }

    #[test]
    fn measure_and_perimeter_scale(body in convex_body()) {
        let d = body.dim() as i32;
        let m = body.measure().unwrap();
        let p = body.perimeter().unwrap();
        for t in [0.1, 1.0, 7.3] {
            let s = body.scale(t).unwrap();
            let ms = s.measure().unwrap();
            let ps = s.perimeter().unwrap();
            prop_assert!((ms - t.powi(d) * m).abs() <= 1e-12 * ms);
            prop_assert!((ps - t.powi(d - 1) * p).abs() <= 1e-9 * ps);
        }
    }

    #[test]
    fn measure_inradius_perimeter_chain(body in convex_body()) {
        let d = body.dim();
        let m = body.measure().unwrap();
        let p = body.perimeter().unwrap();
        let (diam, r) = body.diameter_inradius().unwrap();
        prop_assert!(m <= r * p * (1.0 + 1e-9));
        prop_assert!(m <= d as f64 * unit_ball_volume(d) * r * diam.powi(d as i32 - 1) * (1.0 + 1e-9));
    }

    #[test]
    fn john_pair_volume_ratio(body in convex_body()) {
        let pair = john_pair(&body).unwrap();
        let d = body.dim() as f64;
        let ratio = pair.inner.volume() / pair.outer.volume();
        prop_assert!((ratio - d.powf(-d)).abs() < 1e-12 * ratio);
    }

    #[test]
    fn carlson_integral_is_homogeneous(a in axes_any_dim(3, 6), t in 0.05f64..20.0) {
        let d = a.len() as i32;
        let at: Vec<f64> = a.iter().map(|x| t * x).collect();
        let lhs = carlson_integral(&at).unwrap();
        let rhs = t.powi(2 - d) * carlson_integral(&a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * rhs, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn capacity_grows_with_the_axes(a in axes_any_dim(3, 6), grow in prop::collection::vec(0.0f64..1.0, 6)) {
        let b: Vec<f64> = a.iter().zip(&grow).map(|(x, g)| x * (1.0 + g)).collect();
        prop_assert!(cap_newtonian_ellipsoid(&b).unwrap() >= cap_newtonian_ellipsoid(&a).unwrap() * (1.0 - 1e-12));
        prop_assert!(torsion_ellipsoid(&b).unwrap() >= torsion_ellipsoid(&a).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn direct_g_matches_assembly_and_the_ball(a in axes_any_dim(3, 6)) {
        let d = a.len();
        let g = g_ellipsoid_direct(&a).unwrap();
        let vol = unit_ball_volume(d) * a.iter().product::<f64>();
        let assembled = torsion_ellipsoid(&a).unwrap() * cap_newtonian_ellipsoid(&a).unwrap() / (vol * vol);
        prop_assert!((g - assembled).abs() <= 1e-9 * assembled);
        let g_ball = ball_constants(d, &[]).unwrap().g_ball.unwrap();
        prop_assert!(g <= g_ball * (1.0 + 1e-10));
    }

    #[test]
    fn planar_closed_form(a in axes(2)) {
        let body = Body::ellipsoid(a.clone()).unwrap();
        let h = evaluate(FunctionalId::H, &body, &EstimatorConfig::default()).unwrap().value;
        let formula = (a[0] + a[1]) / (4.0 * PI * (a[0] * a[0] + a[1] * a[1]).sqrt());
        prop_assert!((h - formula).abs() <= 1e-12 * formula);
        prop_assert!(formula <= 2f64.powf(-1.5) / PI * (1.0 + 1e-12));
    }

    #[test]
    fn evaluations_recombine_and_alias(a in axes_any_dim(3, 5)) {
        let body = Body::ellipsoid(a).unwrap();
        let cfg = EstimatorConfig::default();
        let g = evaluate(FunctionalId::G, &body, &cfg).unwrap();
        let g2 = evaluate(FunctionalId::GAlpha(2.0), &body, &cfg).unwrap();
        prop_assert_eq!(g.value, g2.value);
        for f in [FunctionalId::G, FunctionalId::GAlpha(0.0), FunctionalId::GAlpha(1.3)] {
            let e = evaluate(f, &body, &cfg).unwrap();
            prop_assert!((e.recompute() - e.value).abs() <= 1e-12 * e.value);
        }
    }

    #[test]
    fn exact_rows_pass_iff_within_tolerance(a in axes_any_dim(2, 6)) {
        let body = Body::ellipsoid(a).unwrap();
        let cfg = LedgerConfig::default();
        let rows = if body.dim() == 2 {
            check_planar("e", &body, &cfg).unwrap()
        } else {
            check_g_bounds("e", &body, &cfg).unwrap()
        };
        for r in rows.iter().filter(|r| r.antecedent.is_none() && r.stderr == 0.0) {
            let within = r.lhs <= r.rhs * (1.0 + r.tol);
            prop_assert_eq!(r.status == Status::Pass, within, "{:?}", r);
        }
    }

    #[test]
    fn loewner_is_smallest_among_inflated_ellipsoids(
        pts in prop::collection::vec(point(3, 2.0), 12..24),
        raw in prop::collection::vec(-1.0f64..1.0, 9 * 20),
        ax in prop::collection::vec(0.2f64..2.0, 3 * 20),
    ) {
        let l = loewner_ellipsoid(&pts).unwrap();
        let c = l.center().to_vec();
        for k in 0..20 {
            let q = orthogonal(3, &raw[9 * k..9 * (k + 1)]);
            let trial = Ellipsoid::with_frame(ax[3 * k..3 * (k + 1)].to_vec(), c.clone(), Some(q)).unwrap();
            let s = pts.iter().map(|p| trial.level(p)).fold(0.0, f64::max).sqrt();
            let volume = trial.volume() * s.powi(3);
            prop_assert!(volume >= l.volume() * (1.0 - 1e-7));
        }
        for p in &pts {
            prop_assert!(l.level(p) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn family_bodies_are_convex(p in prop::collection::vec(-2.0f64..2.0, 4), eps in 0.0f64..0.2) {
        for fam in [
            Family::Ellipsoids { dim: 4 },
            Family::Boxes { dim: 3 },
            Family::Capsules { dim: 3 },
            Family::EllipsoidSlab { dim: 3, epsilon: eps },
        ] {
            let n = fam.parameter_count();
            let body = fam.body(&p[..n]).unwrap();
            prop_assert!(body.is_convex());
            prop_assert!(fam.enclosure_ratio(&body).unwrap() <= (1.0 + eps) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn nelder_mead_trace_is_monotone(target in prop::collection::vec(-2.0f64..2.0, 1..5)) {
        let m = NelderMead::default().minimize(
            |x| x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>() + (x[0] - target[0]).powi(4),
            &vec![0.0; target.len()],
        );
        prop_assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(m.trace.iter().all(|v| m.f <= *v));
    }

    #[test]
    fn counterexample_intervals_are_ordered(beta in 0.34f64..0.99, max_exp in 1u32..12) {
        let rows = counterexample_sequence(3, beta, &doubling_grid(max_exp)).unwrap();
        for r in &rows {
            prop_assert!(r.g.lower <= r.g.upper);
            prop_assert!(r.capacity.lower <= r.capacity.upper);
        }
    }

    #[test]
    fn float_formatting_round_trips(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}

#[test]
fn stochastic_scale_invariance_under_common_random_numbers() {
    let cube = Body::Polytope(Polytope::cube(3, 1.0).unwrap());
    let cfg = EstimatorConfig::default().with_walks(5000);
    let check = shapefn::functionals::scale_invariance_check(FunctionalId::GAlpha(1.0), &cube, &[2.0], &cfg).unwrap();
    assert!(!check.exact);
    assert!(check.consistent, "{check:?}");
}
