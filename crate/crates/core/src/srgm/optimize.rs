//! Nelder–Mead minimiser for the low-dimensional profile likelihoods.

#[derive(Debug, Clone, Copy)]
pub(crate) struct NelderMead {
    pub step: f64,
    pub max_evals: usize,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { step: 1.0, max_evals: 4000, f_tol: 1e-11, x_tol: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
}

impl NelderMead {
    /// Minimises `f` from `start`. Non-finite values count as +inf, so box
    /// constraints can be imposed by returning infinity outside them.
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, start: &[f64]) -> Minimum {
        let d = start.len();
        let eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() { f64::INFINITY } else { v }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
        simplex.push((start.to_vec(), eval(start)));
        for i in 0..d {
            let mut x = start.to_vec();
            x[i] += self.step;
            let v = eval(&x);
            simplex.push((x, v));
        }
        let mut evals = d + 1;
        while evals < self.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[d].1;
            let spread = simplex
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if best.is_finite() && (worst - best).abs() <= self.f_tol * (1.0 + best.abs()) && spread <= self.x_tol {
                break;
            }
            let centroid: Vec<f64> = (0..d)
                .map(|k| simplex[..d].iter().map(|(x, _)| x[k]).sum::<f64>() / d as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[d].0).map(|(c, w)| c + t * (c - w)).collect()
            };
            let xr = along(1.0);
            let fr = eval(&xr);
            evals += 1;
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = eval(&xe);
                evals += 1;
                simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[d - 1].1 {
                simplex[d] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst {
                let x = along(0.5);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = eval(&x);
                (x, v)
            };
            evals += 1;
            if fc < fr.min(worst) {
                simplex[d] = (xc, fc);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for (x, v) in simplex.iter_mut().skip(1) {
                for (xi, ai) in x.iter_mut().zip(&anchor) {
                    *xi = ai + 0.5 * (*xi - ai);
                }
                *v = eval(x);
                evals += 1;
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum { x, value }
    }
}
