//! Quadrature rules: adaptive Gauss–Kronrod for general integrands and
//! Gauss–Jacobi for the `θ_s` angular integral.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
    #[error("adaptive quadrature hit the subdivision limit (estimated error {0:e})")]
    NoConvergence(f64),
    #[error("invalid quadrature rule parameters: {0}")]
    InvalidRule(String),
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFinite(x))
        }
    };
    let fc = eval(c)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let pair = eval(c - h * x)? + eval(c + h * x)?;
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the total
/// estimate is below `max(abs_tol, rel_tol·|I|)`. Endpoints are never
/// evaluated, so integrable endpoint singularities are tolerated.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadError> {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&f, a, b)?;
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if intervals.len() >= MAX_INTERVALS {
            return Err(QuadError::NoConvergence(err));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, v0, e0) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid)?;
        let (v2, e2) = gk15(&f, mid, hi)?;
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
        if mid <= lo || mid >= hi {
            return Err(QuadError::NoConvergence(err));
        }
    }
    // Re-sum to shed accumulated update error.
    Ok(intervals.iter().map(|iv| iv.2).sum())
}

/// Integral of `f` over `[a, ∞)` via the map `x = a + u/(1-u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadError> {
    integrate(
        |u| {
            let one_minus = 1.0 - u;
            let x = a + u / one_minus;
            let y = f(x) / (one_minus * one_minus);
            // f decays at infinity; the map's Jacobian must not manufacture NaNs
            if y.is_nan() && f(x) == 0.0 {
                0.0
            } else {
                y
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Gauss–Jacobi rule for the symmetric weight `(1-u²)^α` on `[-1, 1]`,
/// built with the Golub–Welsch eigenvalue method.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricJacobiRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alpha: f64,
}

impl SymmetricJacobiRule {
    /// `n`-point rule; weights are scaled to sum to one, so the rule
    /// integrates against the probability law with density `∝ (1-u²)^α`.
    pub fn new(n: usize, alpha: f64) -> Result<Self, QuadError> {
        if n < 2 || !(alpha.is_finite() && alpha > -1.0) {
            return Err(QuadError::InvalidRule(format!("n={n}, alpha={alpha}")));
        }
        // Jacobi matrix of the Gegenbauer family: zero diagonal.
        let mut jm = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let kf = k as f64;
            let b2 = if k == 1 {
                // the general expression is 0/0 at alpha = -1/2
                1.0 / (2.0 * alpha + 3.0)
            } else {
                kf * (kf + 2.0 * alpha)
                    / ((2.0 * kf + 2.0 * alpha - 1.0) * (2.0 * kf + 2.0 * alpha + 1.0))
            };
            let b = b2.sqrt();
            jm[(k - 1, k)] = b;
            jm[(k, k - 1)] = b;
        }
        let eig = SymmetricEigen::new(jm);
        let mut pairs: Vec<(f64, f64)> = eig
            .eigenvalues
            .iter()
            .zip(eig.eigenvectors.row(0).iter())
            .map(|(&x, &v)| (x, v * v))
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));

        // Enforce exact mirror symmetry.
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let j = n - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[i].1 + pairs[j].1);
            nodes[j] = x;
            nodes[i] = -x;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            nodes,
            weights,
            alpha,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Expectation of `f(θ)` under the normalised weight.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(u, w)| w * f(u)).sum()
    }
}
