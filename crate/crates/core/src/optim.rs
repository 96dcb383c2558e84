//! Derivative-free minimization.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Initial simplex edge along each axis.
    pub step: f64,
    /// Stop once every vertex is within this relative distance of the best one.
    pub x_tol: f64,
    /// ...and the spread of values is within this relative tolerance.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            step: 0.5,
            x_tol: 1e-9,
            f_tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0`. Non-finite values are treated as `+inf`, so
    /// infeasible points are simply never accepted.
    pub fn minimize<F>(&self, f: F, x0: &[f64]) -> Minimum
    where
        F: Fn(&[f64]) -> f64,
    {
        let d = x0.len();
        let eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..d {
            let mut x = x0.to_vec();
            x[i] += self.step;
            let v = eval(&x);
            simplex.push((x, v));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if self.is_converged(&simplex) {
                converged = true;
                break;
            }
            iterations += 1;

            let worst = simplex[d].clone();
            let centroid: Vec<f64> = (0..d)
                .map(|j| simplex[..d].iter().map(|v| v.0[j]).sum::<f64>() / d as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(1.0);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = eval(&xe);
                simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[d - 1].1 {
                simplex[d] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst.1 {
                let x = along(0.5);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = eval(&x);
                (x, v)
            };
            if fc < worst.1.min(fr) {
                simplex[d] = (xc, fc);
                continue;
            }
            // shrink toward the best vertex
            let best = simplex[0].0.clone();
            for v in simplex.iter_mut().skip(1) {
                for (xi, bi) in v.0.iter_mut().zip(&best) {
                    *xi = bi + 0.5 * (*xi - bi);
                }
                v.1 = eval(&v.0);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            iterations,
            converged,
        }
    }

    fn is_converged(&self, simplex: &[(Vec<f64>, f64)]) -> bool {
        let best = &simplex[0];
        if !best.1.is_finite() {
            return false;
        }
        let spread = simplex.iter().map(|v| (v.1 - best.1).abs()).fold(0.0, f64::max);
        let diameter = simplex
            .iter()
            .flat_map(|v| v.0.iter().zip(&best.0).map(|(a, b)| (a - b).abs() / (1.0 + b.abs())))
            .fold(0.0, f64::max);
        diameter < self.x_tol && spread <= self.f_tol * (1.0 + best.1.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let m = NelderMead::default().minimize(|x| (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2), &[0.0, 0.0]);
        assert!(m.converged);
        assert!((m.x[0] - 3.0).abs() < 1e-8 && (m.x[1] + 1.0).abs() < 1e-8, "{:?}", m.x);
    }

    #[test]
    fn rosenbrock() {
        let m = NelderMead::default().minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let m = NelderMead::default().minimize(
            |x| if x[0] <= 0.0 { f64::INFINITY } else { x[0] - x[0].ln() },
            &[3.0],
        );
        assert!((m.x[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn iteration_cap() {
        let nm = NelderMead {
            max_iter: 3,
            ..Default::default()
        };
        let m = nm.minimize(|x| x[0] * x[0], &[10.0]);
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }
}
