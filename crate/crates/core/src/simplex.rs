//! Nelder-Mead downhill simplex for small, derivative-free problems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Converged once every vertex lies within this distance (max-norm) of the best one.
    pub width_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            width_tol: 1e-6,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<const D: usize> {
    pub x: [f64; D],
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

impl NelderMead {
    /// Minimizes `f` from an axis-aligned initial simplex `x0 + step_i e_i`.
    pub fn minimize<const D: usize, F>(&self, mut f: F, x0: [f64; D], step: [f64; D]) -> Result<Minimum<D>>
    where
        F: FnMut(&[f64; D]) -> f64,
    {
        let mut evaluations = 0;
        let mut eval = |x: &[f64; D]| {
            evaluations += 1;
            f(x)
        };
        let mut simplex: Vec<([f64; D], f64)> = Vec::with_capacity(D + 1);
        simplex.push((x0, eval(&x0)));
        for i in 0..D {
            let mut x = x0;
            x[i] += step[i];
            let v = eval(&x);
            simplex.push((x, v));
        }

        for iteration in 0..=self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].0;
            let width = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(best.iter()).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if width < self.width_tol {
                return Ok(Minimum {
                    x: best,
                    value: simplex[0].1,
                    iterations: iteration,
                    evaluations,
                });
            }
            if iteration == self.max_iter {
                break;
            }

            let centroid: [f64; D] =
                std::array::from_fn(|i| simplex[..D].iter().map(|(x, _)| x[i]).sum::<f64>() / D as f64);
            let (worst, f_worst) = simplex[D];
            let along =
                |coef: f64| -> [f64; D] { std::array::from_fn(|i| centroid[i] + coef * (centroid[i] - worst[i])) };

            let xr = along(self.reflection);
            let fr = eval(&xr);
            let f_best = simplex[0].1;
            let f_second_worst = simplex[D - 1].1;

            if fr < f_best {
                let xe = along(self.reflection * self.expansion);
                let fe = eval(&xe);
                simplex[D] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < f_second_worst {
                simplex[D] = (xr, fr);
                continue;
            }
            // contraction, outside if the reflection beat the worst vertex
            let (xc, fc) = if fr < f_worst {
                let xc = along(self.reflection * self.contraction);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-self.contraction);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < f_worst.min(fr) {
                simplex[D] = (xc, fc);
                continue;
            }
            for vertex in simplex.iter_mut().skip(1) {
                let x: [f64; D] = std::array::from_fn(|i| best[i] + self.shrink * (vertex.0[i] - best[i]));
                *vertex = (x, eval(&x));
            }
        }
        Err(Error::NoConvergence {
            iterations: self.max_iter,
        })
    }
}
