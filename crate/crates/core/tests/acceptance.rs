//! End-to-end acceptance gate. Every criterion runs in sequence, without
//! the test harness, so measured runtimes are not shared with other tests
//! and each criterion always prints one PASS or FAIL line.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::Rng;
use shapefn::bounds::{
    check_axis_ratio, check_g_bounds, check_planar, check_planar_weighted, ledger, standard_corpus, BoundKind,
    BoundReport, CorpusSpec, LedgerConfig, Status,
};
use shapefn::estimators::{fekete_logcap, fekete_logcap_boundary, wos_capacity, wos_torsion, EstimatorConfig, PlanarBoundary};
use shapefn::exact::{ball_constants, cap_newtonian_ellipsoid, torsion_ellipsoid};
use shapefn::functionals::{evaluate, scale_invariance_check, FunctionalId};
use shapefn::geometry::{john_pair, loewner_ellipsoid, Body, Polytope};
use shapefn::rng::{stream, unit_vector, Channel};
use shapefn::search::{
    ball_value, counterexample_sequence, doubling_grid, loglog_slope, maximize, maximize_constrained, Family,
    SearchConfig,
};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `ω_d` by the recursion `ω_d = 2π ω_{d−2} / d`.
fn omega(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI * omega(d - 2) / d as f64,
    }
}

/// `∫₀^∞ Π(a_i² + t)^{−1/2} dt` by the trapezoid rule in `t = eˢ`, which
/// converges exponentially for this integrand.
fn potential_integral(a: &[f64]) -> f64 {
    let h = 0.05;
    let (lo, hi) = (-60.0, 100.0);
    let n = ((hi - lo) / h) as usize;
    (0..=n)
        .map(|i| {
            let t = (lo + i as f64 * h).exp();
            let p: f64 = a.iter().map(|ai| (ai * ai + t).sqrt()).product();
            t / p
        })
        .sum::<f64>()
        * h
}

/// Ellipsoid capacity normalised so the unit ball has `(d−2)dω_d`.
fn oracle_capacity(a: &[f64]) -> f64 {
    let d = a.len() as f64;
    (d - 2.0) * d * omega(a.len()) * (2.0 / (d - 2.0)) / potential_integral(a)
}

/// `∫u` for `u = (1 − Σx_i²/a_i²) / (2Σa_i^{−2})`.
fn oracle_torsion(a: &[f64]) -> f64 {
    let d = a.len() as f64;
    let vol = omega(a.len()) * a.iter().product::<f64>();
    vol / ((d + 2.0) * a.iter().map(|x| x.powi(-2)).sum::<f64>())
}

fn random_axes(rng: &mut impl Rng, d: usize, spread: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-spread..spread).exp()).collect()
}

fn no_violations(rows: &[BoundReport], what: &str) -> Result<(), String> {
    for r in rows {
        if matches!(r.status, Status::Fail | Status::Error | Status::Inconclusive) {
            return Err(format!("{what}: {} on {} is {:?} (lhs {}, rhs {})", r.kind.name(), r.body_id, r.status, r.lhs, r.rhs));
        }
    }
    Ok(())
}

fn golden_values() -> Check {
    for d in 3..=8 {
        let ones = vec![1.0; d];
        let df = d as f64;
        let kappa = (df - 2.0) * df * omega(d);
        let tau = omega(d) / (df * (df + 2.0));
        let cap = cap_newtonian_ellipsoid(&ones).map_err(|e| e.to_string())?;
        let tor = torsion_ellipsoid(&ones).map_err(|e| e.to_string())?;
        ensure(rel(cap, kappa) < 1e-9, || format!("d={d}: cap {cap} vs κ_d {kappa}"))?;
        ensure(rel(tor, tau) < 1e-12, || format!("d={d}: torsion {tor} vs τ_d {tau}"))?;
        let g = evaluate(FunctionalId::G, &Body::unit_ball(d), &EstimatorConfig::default())
            .map_err(|e| e.to_string())?
            .value;
        let closed = (df - 2.0) / (df + 2.0);
        let assembled = tau * kappa / (omega(d) * omega(d));
        ensure(rel(g, closed) < 1e-12 && rel(assembled, closed) < 1e-12, || {
            format!("d={d}: G {g}, assembled {assembled}, closed form {closed}")
        })?;
        let bc = ball_constants(d, &[]).map_err(|e| e.to_string())?;
        ensure(rel(bc.g_ball.unwrap(), closed) < 1e-12, || format!("d={d}: ball constant"))?;
    }
    Ok("κ_d, τ_d and G(B₁) for d = 3..8".into())
}

fn prolate_capacity() -> Check {
    let s3 = 3f64.sqrt();
    let analytic = 8.0 * PI * s3 / ((2.0 + s3) / (2.0 - s3)).ln();
    let cap = cap_newtonian_ellipsoid(&[2.0, 1.0, 1.0]).map_err(|e| e.to_string())?;
    ensure(rel(cap, analytic) < 1e-9, || format!("{cap} vs {analytic}"))?;
    ensure((analytic - 16.527).abs() < 1e-3, || format!("analytic value {analytic}"))?;
    Ok(format!("cap E(2,1,1) = {cap:.10}"))
}

fn optimizer_reproduction() -> Check {
    let mut cases = Vec::new();
    for d in 3..=5 {
        for f in [FunctionalId::G, FunctionalId::GAlpha(0.0), FunctionalId::GAlpha(1.0)] {
            cases.push((f, d));
        }
    }
    for f in [FunctionalId::H, FunctionalId::HAlpha(0.0), FunctionalId::HAlpha(1.0)] {
        cases.push((f, 2));
    }
    let cfg = SearchConfig::default();
    let mut worst_axis: f64 = 0.0;
    let mut worst_value: f64 = 0.0;
    for (f, d) in cases {
        let ball = ball_value(f, d).map_err(|e| e.to_string())?;
        let res = maximize(f, Family::Ellipsoids { dim: d }, &cfg).map_err(|e| e.to_string())?;
        ensure(res.restarts.len() == 20, || format!("{f} d={d}: {} restarts", res.restarts.len()))?;
        ensure(res.evaluation.value <= ball + 1e-8, || format!("{f} d={d}: exceeds the ball value"))?;
        for r in &res.restarts {
            let axis = r.params.iter().map(|p| (p.exp() - 1.0).abs()).fold(0.0, f64::max);
            let gap = (r.value - ball).abs();
            worst_axis = worst_axis.max(axis);
            worst_value = worst_value.max(gap);
            ensure(r.converged && axis < 1e-4 && gap < 1e-8, || {
                format!("{f} d={d} restart {}: converged {}, axis deviation {axis:e}, value gap {gap:e}", r.index, r.converged)
            })?;
        }
    }
    Ok(format!("12 searches × 20 starts; axis deviation ≤ {worst_axis:.1e}, value gap ≤ {worst_value:.1e}"))
}

fn property_suite() -> Check {
    const N: usize = 10_000;
    let cfg = LedgerConfig::default();
    let mut rows = 0usize;
    let mut seen = std::collections::BTreeSet::new();
    for d in 3..=6 {
        let g_ball = (d as f64 - 2.0) / (d as f64 + 2.0);
        let mut rng = stream(41, Channel::Sampling, d as u64);
        for k in 0..N {
            let a = random_axes(&mut rng, d, 2.5);
            let body = Body::ellipsoid(a.clone()).map_err(|e| e.to_string())?;
            let id = format!("e{d}_{k}");
            let mut r = check_g_bounds(&id, &body, &cfg).map_err(|e| e.to_string())?;
            r.extend(check_axis_ratio(&id, &body, &cfg).map_err(|e| e.to_string())?);
            no_violations(&r, "ellipsoid")?;
            rows += r.len();
            seen.extend(r.iter().map(|r| r.kind));
            // independent quadrature: G ≤ G(B₁)
            let vol = omega(d) * a.iter().product::<f64>();
            let g = oracle_torsion(&a) * oracle_capacity(&a) / (vol * vol);
            ensure(g <= g_ball * (1.0 + 1e-10), || format!("oracle G {g} above ball on {a:?}"))?;
            let ge = r.iter().find(|r| r.kind == BoundKind::GEllipsoid).expect("G row");
            ensure(rel(ge.lhs, g) < 1e-8, || format!("G {} vs oracle {g} on {a:?}", ge.lhs))?;
        }
    }
    let h_ball = 2f64.powf(-1.5) / PI;
    let mut rng = stream(41, Channel::Sampling, 2);
    for k in 0..N {
        let a = random_axes(&mut rng, 2, 2.5);
        let body = Body::ellipsoid(a.clone()).map_err(|e| e.to_string())?;
        let id = format!("e2_{k}");
        let mut r = check_planar(&id, &body, &cfg).map_err(|e| e.to_string())?;
        for alpha in [0.0, 0.5, 1.0, 1.5] {
            r.extend(check_planar_weighted(&id, &body, alpha, &cfg).map_err(|e| e.to_string())?);
        }
        no_violations(&r, "ellipse")?;
        rows += r.len();
        seen.extend(r.iter().map(|r| r.kind));
        let formula = (a[0] + a[1]) / (4.0 * PI * (a[0] * a[0] + a[1] * a[1]).sqrt());
        ensure(formula <= h_ball * (1.0 + 1e-10), || format!("planar formula above bound on {a:?}"))?;
        let h = evaluate(FunctionalId::H, &body, &cfg.estimator).map_err(|e| e.to_string())?.value;
        ensure(rel(h, formula) < 1e-10, || format!("H {h} vs formula {formula} on {a:?}"))?;
    }
    for kind in [
        BoundKind::GEllipsoid,
        BoundKind::GEccentricity,
        BoundKind::GJohnAxes,
        BoundKind::HEllipse,
        BoundKind::HAlphaConvex,
        BoundKind::HAlphaDiameter,
    ] {
        ensure(seen.contains(&kind), || format!("no {} rows", kind.name()))?;
    }
    Ok(format!("{rows} rows over 5×10⁴ ellipsoids, zero violations"))
}

fn stochastic_calibration() -> Check {
    let ball = Body::unit_ball(3);
    let t_exact = 4.0 * PI / 45.0;
    let c_exact = 4.0 * PI;
    let cfg = EstimatorConfig::default().with_walks(100_000);
    let t = wos_torsion(&ball, &cfg).map_err(|e| e.to_string())?;
    let c = wos_capacity(&ball, &cfg).map_err(|e| e.to_string())?;
    ensure(rel(t.value, t_exact) < 0.02, || format!("torsion {} vs {t_exact}", t.value))?;
    ensure(rel(c.value, c_exact) < 0.02, || format!("capacity {} vs {c_exact}", c.value))?;
    let (mut t_cover, mut c_cover) = (0, 0);
    for seed in 1..=100 {
        let cfg = cfg.clone().with_seed(seed);
        let t = wos_torsion(&ball, &cfg).map_err(|e| e.to_string())?;
        let c = wos_capacity(&ball, &cfg).map_err(|e| e.to_string())?;
        t_cover += usize::from((t.value - t_exact).abs() <= 3.0 * t.stderr);
        c_cover += usize::from((c.value - c_exact).abs() <= 3.0 * c.stderr);
    }
    ensure(t_cover >= 95 && c_cover >= 95, || format!("coverage torsion {t_cover}/100, capacity {c_cover}/100"))?;
    Ok(format!(
        "errors {:.2}% / {:.2}%, coverage {t_cover}/100 and {c_cover}/100",
        100.0 * rel(t.value, t_exact),
        100.0 * rel(c.value, c_exact)
    ))
}

fn fekete_capacity() -> Check {
    let n = EstimatorConfig::default().fekete_points;
    let disk = fekete_logcap(&Body::unit_ball(2), n).map_err(|e| e.to_string())?.value;
    let ellipse = fekete_logcap(&Body::ellipsoid(vec![2.0, 1.0]).unwrap(), n).map_err(|e| e.to_string())?.value;
    let seg = PlanarBoundary::segment([-2.0, 0.0], [2.0, 0.0]).map_err(|e| e.to_string())?;
    let segment = fekete_logcap_boundary(&seg, n).map_err(|e| e.to_string())?.value;
    ensure(rel(disk, 1.0) < 0.01, || format!("disk {disk}"))?;
    ensure(rel(ellipse, 1.5) < 0.01, || format!("ellipse {ellipse}"))?;
    ensure(rel(segment, 1.0) < 0.02, || format!("segment {segment}"))?;
    Ok(format!("disk {disk:.5}, ellipse {ellipse:.5}, segment {segment:.5}"))
}

fn counterexample_divergence() -> Check {
    let rows = counterexample_sequence(3, 0.5, &doubling_grid(23)).map_err(|e| e.to_string())?;
    let upto22: Vec<_> = rows.iter().filter(|r| r.k <= 1 << 22).cloned().collect();
    ensure(upto22.windows(2).all(|w| w[1].g.lower >= w[0].g.lower), || "lower endpoints not monotone".into())?;
    let slope = loglog_slope(&upto22, 10.0).ok_or("no slope")?;
    ensure((slope - 0.5).abs() <= 0.05, || format!("slope {slope}"))?;
    let threshold = 3f64.powi(6) * 0.2;
    ensure((threshold - 145.8).abs() < 1e-9, || format!("threshold {threshold}"))?;
    let first = rows.iter().find(|r| r.g.lower > threshold).ok_or("never exceeds 145.8")?;
    Ok(format!("slope {slope:.4}, G_lower > 145.8 first at k = {}", first.k))
}

fn john_loewner() -> Check {
    let cube = Polytope::cube(3, 1.0).map_err(|e| e.to_string())?;
    let e = loewner_ellipsoid(cube.vertices()).map_err(|e| e.to_string())?;
    for a in e.semi_axes() {
        ensure((a - 3f64.sqrt()).abs() < 1e-6, || format!("Löwner axes {:?}", e.semi_axes()))?;
    }
    let corpus = standard_corpus(&CorpusSpec::default()).map_err(|e| e.to_string())?;
    let mut dirs: Vec<Vec<Vec<f64>>> = vec![Vec::new(); 7];
    for (d, set) in dirs.iter_mut().enumerate().skip(2) {
        let mut rng = stream(97, Channel::Sampling, d as u64);
        *set = (0..10_000)
            .map(|_| {
                let mut u = vec![0.0; d];
                unit_vector(&mut rng, &mut u);
                u
            })
            .collect();
    }
    let mut checked = 0usize;
    for (id, body) in &corpus {
        let pair = john_pair(body).map_err(|e| format!("{id}: {e}"))?;
        let scale = body.bounding_ball().1;
        for u in &dirs[body.dim()] {
            let (hi, hb, ho) = (pair.inner.support(u), body.support(u), pair.outer.support(u));
            ensure(hi <= hb + 1e-8 * scale && hb <= ho + 1e-8 * scale, || {
                format!("{id}: supports {hi} / {hb} / {ho} along {u:?}")
            })?;
        }
        checked += 1;
    }
    Ok(format!("Löwner radius √3; {checked} corpus bodies × 10⁴ directions"))
}

fn scale_invariance() -> Check {
    let ts = [0.1, 1.0, 7.3];
    let cfg = EstimatorConfig::default();
    let exact_cases = [
        (FunctionalId::G, Body::ellipsoid(vec![2.0, 1.0, 0.5]).unwrap()),
        (FunctionalId::GAlpha(0.0), Body::ellipsoid(vec![2.0, 1.0, 0.5]).unwrap()),
        (FunctionalId::GAlpha(1.0), Body::ellipsoid(vec![1.5, 1.0, 0.8, 0.3]).unwrap()),
        (FunctionalId::H, Body::ellipsoid(vec![3.0, 1.0]).unwrap()),
        (FunctionalId::HAlpha(0.0), Body::ellipsoid(vec![3.0, 1.0]).unwrap()),
        (FunctionalId::HAlpha(1.0), Body::ellipsoid(vec![3.0, 1.0]).unwrap()),
    ];
    let mut worst: f64 = 0.0;
    for (f, body) in &exact_cases {
        let s = scale_invariance_check(*f, body, &ts, &cfg).map_err(|e| e.to_string())?;
        ensure(s.exact && s.consistent && s.max_relative_deviation <= 1e-10, || format!("{f}: {s:?}"))?;
        worst = worst.max(s.max_relative_deviation);
    }
    let cube = Body::Polytope(Polytope::cube(3, 1.0).unwrap());
    let square = Body::Polytope(Polytope::cube(2, 1.0).unwrap());
    for (f, body) in [
        (FunctionalId::G, &cube),
        (FunctionalId::GAlpha(1.0), &cube),
        (FunctionalId::H, &square),
    ] {
        let s = scale_invariance_check(f, body, &ts, &cfg).map_err(|e| e.to_string())?;
        ensure(!s.exact && s.consistent, || format!("{f} on {}: {s:?}", body.kind()))?;
    }
    Ok(format!("exact deviation ≤ {worst:.1e}; cube and square within 3 s.e."))
}

fn desk_scale_limits() -> Check {
    let mut bodies = vec![
        ("ball".to_string(), Body::unit_ball(3)),
        ("cube".to_string(), Body::Polytope(Polytope::cube(3, 1.0).unwrap())),
    ];
    let mut rng = stream(5, Channel::Sampling, 0);
    for k in 0..20 {
        bodies.push((format!("e{k}"), Body::ellipsoid(random_axes(&mut rng, 3, 1.5)).unwrap()));
    }
    let led = ledger(&bodies, &LedgerConfig::default());
    let conditional: Vec<_> = led
        .rows
        .iter()
        .filter(|r| matches!(r.kind, BoundKind::MaximiserDiameter | BoundKind::JohnAxisRatio))
        .collect();
    ensure(!conditional.is_empty(), || "no conditional rows".into())?;
    for r in &conditional {
        ensure(r.antecedent.is_some() && matches!(r.status, Status::Vacuous | Status::Pass), || {
            format!("{} on {}: {:?}", r.kind.name(), r.body_id, r.status)
        })?;
        ensure(r.antecedent == Some(false) || r.body_id == "ball", || format!("{} antecedent on {}", r.kind.name(), r.body_id))?;
    }

    let exact = maximize_constrained(FunctionalId::G, 4, 0.0, &SearchConfig::default()).map_err(|e| e.to_string())?;
    ensure(rel(exact.evaluation.value, 1.0 / 3.0) < 1e-8, || format!("ε = 0, d = 4: {}", exact.evaluation.value))?;
    let cheap = SearchConfig {
        estimator: EstimatorConfig {
            walk_count: 2000,
            fekete_points: 32,
            ..EstimatorConfig::default()
        },
        restarts: 2,
        max_evaluations: 40,
        escalations: 0,
        ..SearchConfig::default()
    };
    let mut summary = Vec::new();
    for (f, d, eps) in [(FunctionalId::G, 4, 0.05), (FunctionalId::H, 2, 0.05)] {
        let res = maximize_constrained(f, d, eps, &cheap).map_err(|e| e.to_string())?;
        let c = res.constraint.as_ref().ok_or("no constraint record")?;
        let ball = res.ball_value.ok_or("no ball value")?;
        ensure(res.evaluation.value >= ball * (1.0 - 1e-12), || format!("{f} d={d}: below the ball"))?;
        ensure(c.enclosure_ratio <= (1.0 + eps) * (1.0 + 1e-12), || format!("{f} d={d}: ratio {}", c.enclosure_ratio))?;
        ensure(c.bound.is_some() && (!c.applies || c.holds), || format!("{f} d={d}: {c:?}"))?;
        summary.push(format!("{f} d={d} ≥ {:.4}", res.evaluation.value));
    }
    Ok(format!("{} conditional rows; {}", conditional.len(), summary.join(", ")))
}

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 exact golden values", Duration::from_secs(1), golden_values),
        ("2 prolate capacity", Duration::from_secs(1), prolate_capacity),
        ("3 optimizer reproduction", Duration::from_secs(30), optimizer_reproduction),
        ("4 property suite", Duration::from_secs(60), property_suite),
        ("5 stochastic calibration", Duration::from_secs(300), stochastic_calibration),
        ("6 logarithmic capacity", Duration::from_secs(60), fekete_capacity),
        ("7 counterexample divergence", Duration::from_secs(60), counterexample_divergence),
        ("8 John and Löwner ellipsoids", Duration::from_secs(10), john_loewner),
        ("9 scale invariance", Duration::from_secs(120), scale_invariance),
        ("10 desk-scale limits", Duration::from_secs(120), desk_scale_limits),
    ];
    let mut failed = Vec::new();
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({elapsed:.2?}): {detail}"),
            Err(why) => {
                println!("FAIL criterion {name} ({elapsed:.2?}): {why}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
