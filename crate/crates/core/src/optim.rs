//! Nelder–Mead simplex search on a box.

/// Stopping rules for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Stop once the spread of objective values across the simplex falls
    /// below this.
    pub f_tol: f64,
    /// ... and every vertex lies within this distance of the best one.
    pub x_tol: f64,
    pub max_iter: usize,
    /// Number of restarts from the best vertex with a fresh simplex.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-15,
            x_tol: 1e-10,
            max_iter: 4000,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
}

fn clamp_into(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Minimises `f` over the box `[lower, upper]` starting from `x0`.
///
/// Trial points are projected onto the box. `step` sets the initial edge
/// length along each axis.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: SimplexOptions,
) -> SimplexResult {
    let dim = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best = x0.to_vec();
    clamp_into(&mut best, lower, upper);
    let mut best_f = eval(&best);
    let mut iterations = 0;

    for _round in 0..=opts.restarts {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((best.clone(), best_f));
        for i in 0..dim {
            let mut v = best.clone();
            v[i] += step[i];
            if v[i] > upper[i] {
                v[i] = best[i] - step[i];
            }
            clamp_into(&mut v, lower, upper);
            let fv = eval(&v);
            simplex.push((v, fv));
        }

        for _ in 0..opts.max_iter {
            iterations += 1;
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let f_spread = simplex[dim].1 - simplex[0].1;
            let x_spread = simplex[1..]
                .iter()
                .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if f_spread <= opts.f_tol && x_spread <= opts.x_tol {
                break;
            }

            let mut centroid = vec![0.0; dim];
            for (v, _) in &simplex[..dim] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / dim as f64;
                }
            }
            let towards = |coef: f64| {
                let mut p: Vec<f64> = centroid
                    .iter()
                    .zip(&simplex[dim].0)
                    .map(|(c, w)| c + coef * (c - w))
                    .collect();
                clamp_into(&mut p, lower, upper);
                p
            };

            let reflected = towards(1.0);
            let fr = eval(&reflected);
            if fr < simplex[0].1 {
                let expanded = towards(2.0);
                let fe = eval(&expanded);
                simplex[dim] = if fe < fr {
                    (expanded, fe)
                } else {
                    (reflected, fr)
                };
            } else if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
            } else {
                let (contracted, fc) = if fr < simplex[dim].1 {
                    let p = towards(0.5);
                    let fp = eval(&p);
                    (p, fp)
                } else {
                    let p = towards(-0.5);
                    let fp = eval(&p);
                    (p, fp)
                };
                if fc < simplex[dim].1.min(fr) {
                    simplex[dim] = (contracted, fc);
                } else {
                    // shrink towards the best vertex
                    let anchor = simplex[0].0.clone();
                    for (v, fv) in simplex.iter_mut().skip(1) {
                        for (x, a) in v.iter_mut().zip(&anchor) {
                            *x = a + 0.5 * (*x - a);
                        }
                        *fv = eval(v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= best_f {
            best = simplex[0].0.clone();
            best_f = simplex[0].1;
        }
    }
    SimplexResult {
        x: best,
        f: best_f,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.5, 0.5],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            SimplexOptions::default(),
        );
        assert!(
            (r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6,
            "{r:?}"
        );
    }

    #[test]
    fn respects_bounds() {
        let r = nelder_mead(
            |x| (x[0] - 3.0).powi(2),
            &[0.0],
            &[0.1],
            &[-1.0],
            &[1.0],
            SimplexOptions::default(),
        );
        assert_eq!(r.x[0], 1.0);
    }
}
