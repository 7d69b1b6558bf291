//! Statistical checks of the algebra's structural identities at fixed
//! parameters.
//!
//! Each check compares two characteristic-function curves on a grid and
//! reports the largest deviation in units of its allowance, four combined
//! standard errors per point. A check passes iff that statistic is at most
//! 1. Every check has a corrupted configuration that must fail.
//!
//! Monte Carlo work is split into a fixed number of batches. Batch `b` of
//! stream `k` draws from `ChaCha8Rng` seeded with the master seed on stream
//! `(k << 32) | b`, and batches are concatenated in index order, so a report
//! depends only on its parameters and seed, not on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{
    fit_radial_poisson, gof_threshold, radial_poisson_chf, sigma_chf, CharMeasure, DistError,
    FitError, RadialPoissonFit, RadialPoissonParams, RadialPoissonSampler,
};
use crate::kernel::{ShapeParam, ThetaDist};
use crate::measures::{
    rad_chf, radial_sum, Grid, Measure, MeasureError, MeasureSampler, RadChfCurve,
};
use crate::tau::{ordinary_convolve_samples, symmetric_chf, tau_sample, SymmetricSample, TauError};

/// Allowance per grid point, in combined standard errors.
pub const ALLOWANCE_SE: f64 = 4.0;
/// Added to every allowance so that exact agreement of degenerate samples
/// (zero standard error) still has a strictly positive allowance.
pub const ALLOWANCE_FLOOR: f64 = 1e-12;
/// Grid used by the sampling checks: 20 points on `(0, 5]`.
pub const VERIFY_GRID_POINTS: usize = 20;
pub const VERIFY_T_MAX: f64 = 5.0;
/// Number of independent Monte Carlo batches.
pub const BATCHES: usize = 16;
/// Tolerance of the deterministic classical-reduction check.
pub const CLASSICAL_TOL: f64 = 1e-12;
/// Tolerance on `â_Y + â_Z - a` in the decomposition check.
pub const RATE_SUM_TOL: f64 = 0.07;
/// Tolerance on each fitted `ĉ - c` in the decomposition check.
pub const RADIUS_TOL: f64 = 0.01;
/// Scale error injected into one factor by the homomorphism control.
pub const HOMOMORPHISM_CONTROL_SCALE: f64 = 1.5;
/// Scale pair used by the Cramér–Lévy control; violates `α² + β² = 1`.
pub const CRAMER_LEVY_CONTROL: (f64, f64) = (0.8, 0.8);

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("scale pair must be nonnegative with alpha^2 + beta^2 = 1 (got {0}, {1})")]
    BadScalePair(f64, f64),
    #[error("split must lie strictly between 0 and 1, got {0}")]
    BadSplit(f64),
    #[error("sample size must be >= 1")]
    NoSamples,
    #[error("inconclusive: fitting factor {factor} failed: {source}")]
    Inconclusive {
        factor: &'static str,
        #[source]
        source: FitError,
    },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Tau(#[from] TauError),
}

/// Whether a check runs as stated or with its built-in corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Control {
    #[default]
    Genuine,
    Corrupted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub t: f64,
    pub deviation: f64,
    pub allowance: f64,
}

/// Outcome of one check. `passed == (statistic <= threshold)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub per_point: Vec<PointCheck>,
    pub passed: bool,
    pub n_samples: usize,
    pub seed: u64,
}

/// Nonnegative `(α, β)` with `α² + β² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalePair {
    alpha: f64,
    beta: f64,
}

impl ScalePair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, VerifyError> {
        let ok = alpha.is_finite()
            && beta.is_finite()
            && alpha >= 0.0
            && beta >= 0.0
            && (alpha * alpha + beta * beta - 1.0).abs() <= 1e-12;
        if ok {
            Ok(Self { alpha, beta })
        } else {
            Err(VerifyError::BadScalePair(alpha, beta))
        }
    }

    /// Skips the `α² + β² = 1` check; only for negative controls.
    pub fn unconstrained(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

pub fn verify_grid() -> Grid {
    Grid::interior(VERIFY_T_MAX, VERIFY_GRID_POINTS).expect("static grid")
}

fn batch_rng(seed: u64, stream: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 32) | batch as u64);
    rng
}

fn batch_sizes(n: usize) -> Vec<usize> {
    (0..BATCHES)
        .map(|b| n / BATCHES + usize::from(b < n % BATCHES))
        .collect()
}

/// Runs `f(rng, count)` on every batch in parallel and concatenates the
/// results in batch order.
fn batched<T: Send, F>(n: usize, seed: u64, stream: u64, f: F) -> Vec<T>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Vec<T> + Sync,
{
    let parts: Vec<Vec<T>> = batch_sizes(n)
        .into_par_iter()
        .enumerate()
        .map(|(b, count)| f(&mut batch_rng(seed, stream, b), count))
        .collect();
    parts.into_iter().flatten().collect()
}

fn batched_triples<F>(n: usize, seed: u64, stream: u64, f: F) -> (Vec<f64>, Vec<f64>, Vec<f64>)
where
    F: Fn(&mut ChaCha8Rng) -> (f64, f64, f64) + Sync,
{
    let rows = batched(n, seed, stream, |rng, count| {
        (0..count).map(|_| f(rng)).collect::<Vec<_>>()
    });
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for (x, y, z) in rows {
        a.push(x);
        b.push(y);
        c.push(z);
    }
    (a, b, c)
}

/// Values on a grid with their per-point standard errors.
struct Side<'a> {
    values: &'a [f64],
    se: &'a [f64],
}

/// Builds a report from observed values and reference values, each with
/// its own (possibly zero) standard errors.
fn compare(
    name: String,
    t: &[f64],
    observed: Side<'_>,
    expected: Side<'_>,
    n_samples: usize,
    seed: u64,
) -> (VerifyReport, f64) {
    let per_point: Vec<PointCheck> = (0..t.len())
        .map(|k| PointCheck {
            t: t[k],
            deviation: observed.values[k] - expected.values[k],
            allowance: ALLOWANCE_SE * observed.se[k].hypot(expected.se[k]) + ALLOWANCE_FLOOR,
        })
        .collect();
    let statistic = per_point
        .iter()
        .map(|p| p.deviation.abs() / p.allowance)
        .fold(0.0, f64::max);
    let report = VerifyReport {
        name,
        statistic,
        threshold: 1.0,
        passed: statistic <= 1.0,
        per_point,
        n_samples,
        seed,
    };
    (report, statistic)
}

fn std_errors(c: &RadChfCurve) -> Vec<f64> {
    c.std_errors
        .clone()
        .unwrap_or_else(|| vec![0.0; c.values.len()])
}

fn control_name(base: &str, control: Control) -> String {
    match control {
        Control::Genuine => base.to_string(),
        Control::Corrupted => format!("{base}:negative_control"),
    }
}

/// `τ_s(μ ∗_s ν)` against `τ_s(μ) ⋆ τ_s(ν)` at the characteristic-function
/// level.
pub fn verify_homomorphism(
    mu: &Measure,
    nu: &Measure,
    shape: ShapeParam,
    n: usize,
    seed: u64,
) -> Result<VerifyReport, VerifyError> {
    verify_homomorphism_with(mu, nu, shape, n, seed, Control::Genuine)
}

/// As [`verify_homomorphism`]; the corrupted run dilates `ν` by 1.5 on the
/// right-hand side only.
pub fn verify_homomorphism_with(
    mu: &Measure,
    nu: &Measure,
    shape: ShapeParam,
    n: usize,
    seed: u64,
    control: Control,
) -> Result<VerifyReport, VerifyError> {
    if n == 0 {
        return Err(VerifyError::NoSamples);
    }
    let grid = verify_grid();
    let theta = ThetaDist::new(shape);

    // Left: draw X ⊕_s Y, then multiply each radial sum by its own θ_s.
    let lhs: Vec<f64> = {
        let ms = MeasureSampler::new(mu);
        let ns = MeasureSampler::new(nu);
        batched(n, seed, 1, |rng, count| {
            (0..count)
                .map(|_| {
                    let r = radial_sum(ms.draw(rng), ns.draw(rng), theta.draw(rng));
                    r * theta.draw(rng)
                })
                .collect()
        })
    };
    let lhs = SymmetricSample::new(
        lhs,
        crate::tau::Provenance {
            source: "tau(radial_sum)".into(),
            s: Some(shape.s()),
        },
    )?;
    let left = symmetric_chf(&lhs, &grid)?;

    // Right: τ_s of each factor, then ordinary convolution.
    let nu_rhs = match control {
        Control::Genuine => nu.clone(),
        Control::Corrupted => nu.scaled(HOMOMORPHISM_CONTROL_SCALE)?,
    };
    let tau_factor = |m: &Measure, stream: u64| -> Result<SymmetricSample, VerifyError> {
        let v = batched(n, seed, stream, |rng, count| {
            tau_sample(m, shape, count, rng)
                .map(|s| s.samples().to_vec())
                .unwrap_or_default()
        });
        Ok(SymmetricSample::new(
            v,
            crate::tau::Provenance {
                source: "tau".into(),
                s: Some(shape.s()),
            },
        )?)
    };
    let tau_mu = tau_factor(mu, 2)?;
    let tau_nu = tau_factor(&nu_rhs, 3)?;
    let conv = {
        let mut rng = batch_rng(seed, 4, 0);
        ordinary_convolve_samples(&tau_mu, &tau_nu, &mut rng)
    };
    let right = symmetric_chf(&conv, &grid)?;
    let chf_mu = symmetric_chf(&tau_mu, &grid)?;
    let chf_nu = symmetric_chf(&tau_nu, &grid)?;

    // The resampled convolution inherits the noise of both factor samples;
    // fold it into the right-hand standard error to first order.
    let se_r = std_errors(&right);
    let se_mu = std_errors(&chf_mu);
    let se_nu = std_errors(&chf_nu);
    let right_se: Vec<f64> = (0..grid.len())
        .map(|k| {
            let a = se_r[k];
            let b = chf_nu.values[k] * se_mu[k];
            let c = chf_mu.values[k] * se_nu[k];
            (a * a + b * b + c * c).sqrt()
        })
        .collect();

    let (report, _) = compare(
        control_name("homomorphism", control),
        grid.points(),
        Side {
            values: &left.values,
            se: &std_errors(&left),
        },
        Side {
            values: &right.values,
            se: &right_se,
        },
        n,
        seed,
    );
    Ok(report)
}

/// Radial sum of `α·σ_s` and `β·σ_s` draws against the closed form of
/// `σ_s`.
pub fn verify_cramer_levy(
    pair: ScalePair,
    shape: ShapeParam,
    n: usize,
    seed: u64,
) -> Result<VerifyReport, VerifyError> {
    if n == 0 {
        return Err(VerifyError::NoSamples);
    }
    let sigma = CharMeasure::new(shape)?.sampler();
    let theta = ThetaDist::new(shape);
    let (alpha, beta) = (pair.alpha, pair.beta);
    let sums: Vec<f64> = batched(n, seed, 1, |rng, count| {
        (0..count)
            .map(|_| {
                let y = alpha * sigma.draw(rng);
                let z = beta * sigma.draw(rng);
                radial_sum(y, z, theta.draw(rng))
            })
            .collect()
    });
    let grid = verify_grid();
    let observed = rad_chf(&Measure::empirical(sums)?, shape, &grid);
    let expected: Vec<f64> = grid.points().iter().map(|&t| sigma_chf(shape, t)).collect();
    let constrained = (alpha * alpha + beta * beta - 1.0).abs() <= 1e-12;
    let name = if constrained {
        "cramer_levy".to_string()
    } else {
        "cramer_levy:negative_control".to_string()
    };
    let (report, _) = compare(
        name,
        grid.points(),
        Side {
            values: &observed.values,
            se: &std_errors(&observed),
        },
        Side {
            values: &expected,
            se: &vec![0.0; grid.len()],
        },
        n,
        seed,
    );
    Ok(report)
}

/// Full outcome of the decomposition check, including both factor fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaikovReport {
    #[serde(flatten)]
    pub report: VerifyReport,
    pub fit_y: RadialPoissonFit,
    pub fit_z: RadialPoissonFit,
    pub gof_threshold: f64,
}

impl RaikovReport {
    pub fn gof_y_passed(&self) -> bool {
        self.fit_y.gof <= self.gof_threshold
    }

    pub fn gof_z_passed(&self) -> bool {
        self.fit_z.gof <= self.gof_threshold
    }
}

/// Splits `π_s(a, c)` as `π_s(split·a, c) ⊕_s π_s((1-split)·a, c)` and
/// checks that (i) the radial sum has the radial characteristic function of
/// `π_s(a, c)`; (ii) each factor fits a radial Poisson law within the
/// calibrated gof threshold; (iii) the fitted rates add up to `a` within
/// 0.07 and both fitted radii are within 0.01 of `c`.
///
/// The statistic is the largest of the chf statistic, `gof/threshold` for
/// each factor, `|â_Y + â_Z - a| / 0.07` and `|ĉ - c| / 0.01`, so the check
/// passes iff every part does. A factor whose fit fails (for instance, one
/// with a rate so small that no nonzero draw occurs) makes the whole check
/// [`VerifyError::Inconclusive`].
pub fn verify_raikov(
    p: RadialPoissonParams,
    split: f64,
    shape: ShapeParam,
    n: usize,
    seed: u64,
) -> Result<RaikovReport, VerifyError> {
    verify_raikov_with(p, split, shape, n, seed, Control::Genuine)
}

/// As [`verify_raikov`]; the corrupted run replaces the second factor by
/// `σ_s` draws.
pub fn verify_raikov_with(
    p: RadialPoissonParams,
    split: f64,
    shape: ShapeParam,
    n: usize,
    seed: u64,
    control: Control,
) -> Result<RaikovReport, VerifyError> {
    if !(split > 0.0 && split < 1.0) {
        return Err(VerifyError::BadSplit(split));
    }
    if n == 0 {
        return Err(VerifyError::NoSamples);
    }
    let py = RadialPoissonParams::new(split * p.a(), p.c())?;
    let pz = RadialPoissonParams::new((1.0 - split) * p.a(), p.c())?;
    let y_sampler = RadialPoissonSampler::new(py, shape);
    let z_sampler = RadialPoissonSampler::new(pz, shape);
    let sigma = CharMeasure::new(shape)?.sampler();
    let theta = ThetaDist::new(shape);

    let (ys, zs, xs) = batched_triples(n, seed, 1, |rng| {
        let y = y_sampler.draw(rng);
        let z = match control {
            Control::Genuine => z_sampler.draw(rng),
            Control::Corrupted => sigma.draw(rng),
        };
        (y, z, radial_sum(y, z, theta.draw(rng)))
    });

    let grid = verify_grid();
    let observed = rad_chf(&Measure::empirical(xs)?, shape, &grid);
    let expected: Vec<f64> = grid
        .points()
        .iter()
        .map(|&t| radial_poisson_chf(p, shape, t))
        .collect();
    let (mut report, chf_stat) = compare(
        control_name("raikov", control),
        grid.points(),
        Side {
            values: &observed.values,
            se: &std_errors(&observed),
        },
        Side {
            values: &expected,
            se: &vec![0.0; grid.len()],
        },
        n,
        seed,
    );

    let fit = |v: Vec<f64>, factor: &'static str| -> Result<RadialPoissonFit, VerifyError> {
        let e = crate::measures::Empirical::new(v)?;
        fit_radial_poisson(&e, shape).map_err(|source| VerifyError::Inconclusive { factor, source })
    };
    let fit_y = fit(ys, "Y")?;
    let fit_z = fit(zs, "Z")?;
    let threshold = gof_threshold(shape, n);

    let statistic = [
        chf_stat,
        fit_y.gof / threshold,
        fit_z.gof / threshold,
        (fit_y.a + fit_z.a - p.a()).abs() / RATE_SUM_TOL,
        (fit_y.c - p.c()).abs() / RADIUS_TOL,
        (fit_z.c - p.c()).abs() / RADIUS_TOL,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    report.statistic = statistic;
    report.passed = statistic <= report.threshold;

    Ok(RaikovReport {
        report,
        fit_y,
        fit_z,
        gof_threshold: threshold,
    })
}

/// Deterministic check that at `s = -1/2` the radial Poisson
/// characteristic function is `exp(a(cos(ct) - 1))`.
pub fn classical_reduction_check(p: RadialPoissonParams, grid: &Grid) -> VerifyReport {
    classical_reduction_check_with(p, grid, Control::Genuine)
}

/// As [`classical_reduction_check`]; the corrupted run evaluates the
/// radial Poisson law at `s = 0` instead.
pub fn classical_reduction_check_with(
    p: RadialPoissonParams,
    grid: &Grid,
    control: Control,
) -> VerifyReport {
    let shape = match control {
        Control::Genuine => ShapeParam::CLASSICAL,
        Control::Corrupted => ShapeParam::new(0.0).expect("valid shape"),
    };
    let per_point: Vec<PointCheck> = grid
        .points()
        .iter()
        .map(|&t| {
            let closed = (p.a() * ((p.c() * t).cos() - 1.0)).exp();
            PointCheck {
                t,
                deviation: (radial_poisson_chf(p, shape, t) - closed).abs(),
                allowance: CLASSICAL_TOL,
            }
        })
        .collect();
    let statistic = per_point.iter().map(|q| q.deviation).fold(0.0, f64::max);
    VerifyReport {
        name: control_name("classical", control),
        statistic,
        threshold: CLASSICAL_TOL,
        passed: statistic <= CLASSICAL_TOL,
        per_point,
        n_samples: 0,
        seed: 0,
    }
}
