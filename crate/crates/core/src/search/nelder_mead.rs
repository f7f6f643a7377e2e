//! Nelder–Mead simplex minimisation with dimension-adaptive coefficients
//! (Gao & Han 2012).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    /// Edge length of the initial simplex.
    pub step: f64,
    /// Stop once every vertex lies within this distance of the best one.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            step: 0.5,
            tolerance: 1e-6,
            max_evaluations: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Final simplex diameter (max distance to the best vertex).
    pub diameter: f64,
    /// Best value after each iteration.
    pub trace: Vec<f64>,
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

impl NelderMead {
    /// Minimises `f` from `x0`. Non-finite values count as `+∞`.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let evaluations = std::cell::Cell::new(0usize);
        let mut eval = |x: &[f64]| -> f64 {
            evaluations.set(evaluations.get() + 1);
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        if n == 0 {
            let v = eval(x0);
            return Minimum {
                x: Vec::new(),
                f: v,
                evaluations: 1,
                iterations: 0,
                converged: true,
                diameter: 0.0,
                trace: vec![v],
            };
        }
        let nf = n as f64;
        let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
        let rho = rho.max(0.25);
        let sigma = sigma.max(0.5);

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.step;
            let v = eval(&x);
            simplex.push((x, v));
        }

        let mut trace = Vec::new();
        let mut iterations = 0;
        let mut converged = false;
        let mut diameter;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            trace.push(simplex[0].1);
            diameter = simplex[1..]
                .iter()
                .map(|(x, _)| dist(x, &simplex[0].0))
                .fold(0.0, f64::max);
            if diameter < self.tolerance {
                converged = true;
                break;
            }
            if evaluations.get() >= self.max_evaluations {
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let worst = simplex[n].clone();
            let xr = lerp(&centroid, &worst.0, -alpha);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = lerp(&centroid, &worst.0, -gamma);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = lerp(&centroid, &xr, rho);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = lerp(&centroid, &worst.0, rho);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (xc, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for v in simplex.iter_mut().skip(1) {
                v.0 = lerp(&best, &v.0, sigma);
                v.1 = eval(&v.0);
            }
        }
        let (x, f) = simplex.swap_remove(0);
        Minimum {
            x,
            f,
            evaluations: evaluations.get(),
            iterations,
            converged,
            diameter,
            trace,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead {
            tolerance: 1e-9,
            max_evaluations: 20_000,
            ..Default::default()
        };
        let m = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn quadratic_in_five_dimensions() {
        let target = [0.3, -0.7, 1.1, 0.0, 2.0];
        let m = NelderMead::default().minimize(
            |x| x.iter().zip(&target).enumerate().map(|(i, (a, b))| (i + 1) as f64 * (a - b).powi(2)).sum(),
            &[0.0; 5],
        );
        assert!(m.converged);
        for (a, b) in m.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-5);
        }
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let nm = NelderMead {
            max_evaluations: 10,
            ..Default::default()
        };
        let m = nm.minimize(|x| x[0] * x[0] + x[1] * x[1], &[3.0, 3.0]);
        assert!(!m.converged);
        assert!(m.f <= 18.0);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let m = NelderMead::default().minimize(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) },
            &[0.5],
        );
        assert!((m.x[0] - 1.0).abs() < 1e-5);
    }
}
