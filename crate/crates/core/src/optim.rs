//! Derivative-free simplex minimization (Nelder–Mead with dimension-adaptive
//! coefficients and restarts).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Relative tolerance on the spread of simplex values and on the
    /// improvement between restarts.
    pub tol: f64,
    /// Absolute floor added to `|f|` in both tolerance tests, for objectives
    /// whose minimum is zero.
    pub f_floor: f64,
    /// Edge length of the initial simplex, relative to `max(|x_i|, 1)`.
    pub initial_step: f64,
    /// Simplex diameter, relative to `max(|x_i|, 1)`, below which the simplex
    /// counts as collapsed.
    pub xtol: f64,
    pub max_restarts: usize,
    /// Keep the best value after every iteration.
    pub record_history: bool,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            tol: 1e-10,
            f_floor: 0.0,
            initial_step: 0.05,
            xtol: 1e-12,
            max_restarts: 8,
            record_history: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn around<F: FnMut(&[f64]) -> f64>(x0: &[f64], step: f64, f: &mut F) -> Self {
        let mut points = vec![x0.to_vec()];
        for i in 0..x0.len() {
            let mut p = x0.to_vec();
            p[i] += step * x0[i].abs().max(1.0);
            points.push(p);
        }
        let values = points.iter().map(|p| f(p)).collect();
        let mut s = Self { points, values };
        s.sort();
        s
    }

    fn sort(&mut self) {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = idx.iter().map(|&i| self.points[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn collapsed(&self, tol: f64, f_floor: f64, xtol: f64) -> bool {
        let best = self.values[0];
        let worst = *self.values.last().unwrap();
        if worst - best <= tol * (best.abs() + f_floor) + f64::MIN_POSITIVE {
            return true;
        }
        let x0 = &self.points[0];
        self.points[1..].iter().all(|p| {
            p.iter()
                .zip(x0)
                .all(|(a, b)| (a - b).abs() <= xtol * b.abs().max(1.0))
        })
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let nf = n as f64;
        let (alpha, beta, gamma, delta) = if n > 1 {
            (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
        } else {
            (1.0, 2.0, 0.5, 0.5)
        };
        let mut simplex = Simplex::around(x0, self.initial_step, &mut f);
        let mut history = Vec::new();
        let mut iterations = 0;
        let mut restarts = 0;
        let mut last_restart_value = f64::INFINITY;
        let mut converged = false;

        while iterations < self.max_iter {
            if simplex.collapsed(self.tol, self.f_floor, self.xtol) {
                let best = simplex.values[0];
                let improved = last_restart_value - best
                    > self.tol * (best.abs() + self.f_floor) + f64::MIN_POSITIVE;
                if !improved || restarts >= self.max_restarts {
                    converged = true;
                    break;
                }
                last_restart_value = best;
                restarts += 1;
                let x = simplex.points[0].clone();
                simplex = Simplex::around(&x, self.initial_step, &mut f);
                continue;
            }
            iterations += 1;

            let worst = n;
            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex.points[..n].iter().map(|p| p[j]).sum::<f64>() / nf)
                .collect();
            let xr = lerp(&centroid, &simplex.points[worst], -alpha);
            let fr = f(&xr);
            if fr < simplex.values[0] {
                let xe = lerp(&centroid, &simplex.points[worst], -alpha * beta);
                let fe = f(&xe);
                if fe < fr {
                    simplex.points[worst] = xe;
                    simplex.values[worst] = fe;
                } else {
                    simplex.points[worst] = xr;
                    simplex.values[worst] = fr;
                }
            } else if fr < simplex.values[n - 1] {
                simplex.points[worst] = xr;
                simplex.values[worst] = fr;
            } else {
                let outside = fr < simplex.values[worst];
                let xc = if outside {
                    lerp(&centroid, &xr, gamma)
                } else {
                    lerp(&centroid, &simplex.points[worst], gamma)
                };
                let fc = f(&xc);
                let bound = if outside { fr } else { simplex.values[worst] };
                if fc <= bound {
                    simplex.points[worst] = xc;
                    simplex.values[worst] = fc;
                } else {
                    let best = simplex.points[0].clone();
                    for i in 1..=n {
                        simplex.points[i] = lerp(&best, &simplex.points[i], delta);
                        simplex.values[i] = f(&simplex.points[i]);
                    }
                }
            }
            simplex.sort();
            if self.record_history {
                history.push(simplex.values[0]);
            }
        }

        Minimum {
            x: simplex.points[0].clone(),
            value: simplex.values[0],
            iterations,
            converged,
            history,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    }

    #[test]
    fn quadratic_bowl() {
        let nm = NelderMead::default();
        let m = nm.minimize(
            |x| {
                x.iter()
                    .enumerate()
                    .map(|(i, v)| (v - i as f64).powi(2))
                    .sum()
            },
            &[5.0; 6],
        );
        assert!(m.converged);
        for (i, v) in m.x.iter().enumerate() {
            assert!((v - i as f64).abs() < 1e-4, "{:?}", m.x);
        }
    }

    #[test]
    fn rosenbrock_4d() {
        let nm = NelderMead {
            initial_step: 0.5,
            ..NelderMead::default()
        };
        let m = nm.minimize(rosenbrock, &[-1.2, 1.0, -1.2, 1.0]);
        assert!(m.value < 1e-8, "{}", m.value);
    }

    #[test]
    fn history_never_increases() {
        let nm = NelderMead {
            record_history: true,
            ..NelderMead::default()
        };
        let m = nm.minimize(rosenbrock, &[0.0, 0.0, 0.0]);
        assert!(!m.history.is_empty());
        assert!(m.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn iteration_cap() {
        let nm = NelderMead {
            max_iter: 5,
            ..NelderMead::default()
        };
        let m = nm.minimize(rosenbrock, &[-1.2, 1.0]);
        assert!(!m.converged);
        assert_eq!(m.iterations, 5);
    }
}
