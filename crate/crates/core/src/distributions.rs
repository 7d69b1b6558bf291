//! The characteristic measure `σ_s` and the radial Poisson law `π_s`.
//!
//! `σ_s` has density
//! `2(s+1)^(s+1)/Γ(s+1) · x^(2s+1) · exp(-(s+1)x²)` on `(0, ∞)` and radial
//! characteristic function `exp(-t²/(4(s+1)))`; it plays the role of the
//! Gaussian for `∗_s`. Its square is Gamma distributed with shape and rate
//! both `s+1`, which gives an exact sampler.
//!
//! `π_s(a, c)` is the law of `c ⊕_s c ⊕_s … ⊕_s c` with a Poisson(`a`)
//! number of summands, with radial characteristic function
//! `exp(a(Λ_s(ct) - 1))`. It has atoms at `0` (mass `e^{-a}`) and, for
//! `s > -1/2`, at `c` (mass `a·e^{-a}`); the rest is absolutely continuous.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{lambda_unchecked, ShapeParam, ThetaDist};
use crate::measures::{rad_chf, radial_sum, Empirical, Grid, Measure, MeasureError};
use crate::optim::{nelder_mead, SimplexOptions};
use crate::quad::{self, QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("radial Poisson parameters must be finite and > 0 (a={a}, c={c})")]
    BadParams { a: f64, c: f64 },
    #[error("density argument must be finite and >= 0, got {0}")]
    BadArgument(f64),
    #[error("density of sigma_s integrates to {0}, not 1")]
    SelfTest(f64),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("rate indistinguishable from 0 ({nonzero} nonzero values out of {n})")]
    DegenerateRate { nonzero: usize, n: usize },
    #[error("need at least {MIN_FIT_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
}

/// Largest rate sampled by sequential Poisson inversion.
pub const INVERSION_MAX_RATE: f64 = 30.0;
/// Minimum sample size accepted by [`fit_radial_poisson`].
pub const MIN_FIT_SAMPLES: usize = 1000;
/// Below this many nonzero values the rate is treated as zero.
pub const MIN_NONZERO_FOR_FIT: usize = 10;
/// Number of grid points used by the radial Poisson fit.
pub const FIT_GRID_POINTS: usize = 40;
/// The fit grid spans `(0, FIT_GRID_SPAN / c₀]`.
pub const FIT_GRID_SPAN: f64 = 8.0;
/// Upper bound on the fitted rate.
pub const FIT_MAX_RATE: f64 = INVERSION_MAX_RATE;

/// The characteristic measure `σ_s`.
#[derive(Debug, Clone, Copy)]
pub struct CharMeasure {
    shape: ShapeParam,
    log_norm: f64,
}

impl CharMeasure {
    /// Builds `σ_s` and checks by quadrature that its density has unit
    /// mass.
    pub fn new(shape: ShapeParam) -> Result<Self, DistError> {
        let m = Self::unchecked(shape);
        let mass = quad::integrate_to_infinity(|x| m.density_unchecked(x), 0.0, 1e-13, 1e-13)?;
        if (mass - 1.0).abs() > 1e-9 {
            return Err(DistError::SelfTest(mass));
        }
        Ok(m)
    }

    fn unchecked(shape: ShapeParam) -> Self {
        let p = shape.s() + 1.0;
        let log_norm = std::f64::consts::LN_2 + p * p.ln() - libm::lgamma(p);
        Self { shape, log_norm }
    }

    pub fn shape(&self) -> ShapeParam {
        self.shape
    }

    fn density_unchecked(&self, x: f64) -> f64 {
        let p = self.shape.s() + 1.0;
        if x == 0.0 {
            // x^(2s+1) at the origin: 1 when s = -1/2, else 0
            return if self.shape.is_atomic() {
                self.log_norm.exp()
            } else {
                0.0
            };
        }
        (self.log_norm + (2.0 * p - 1.0) * x.ln() - p * x * x).exp()
    }

    pub fn density(&self, x: f64) -> Result<f64, DistError> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(DistError::BadArgument(x));
        }
        Ok(self.density_unchecked(x))
    }

    /// `exp(-t²/(4(s+1)))`.
    pub fn chf(&self, t: f64) -> f64 {
        sigma_chf(self.shape, t)
    }

    /// Sampler for `X = √G`, `G ~ Gamma(shape s+1, rate s+1)`.
    pub fn sampler(&self) -> SigmaSampler {
        let p = self.shape.s() + 1.0;
        SigmaSampler(Gamma::new(p, 1.0 / p).expect("positive Gamma parameters"))
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Measure, DistError> {
        let g = self.sampler();
        Ok(Measure::empirical((0..n).map(|_| g.draw(rng)).collect())?)
    }
}

/// Single-draw sampler for `σ_s`.
#[derive(Debug, Clone, Copy)]
pub struct SigmaSampler(Gamma<f64>);

impl SigmaSampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.0.sample(rng).sqrt()
    }
}

/// Density of `σ_s` at `x ≥ 0`.
pub fn sigma_density(shape: ShapeParam, x: f64) -> Result<f64, DistError> {
    CharMeasure::unchecked(shape).density(x)
}

/// `n` draws of `σ_s`.
pub fn sigma_sample<R: Rng + ?Sized>(
    shape: ShapeParam,
    n: usize,
    rng: &mut R,
) -> Result<Measure, DistError> {
    CharMeasure::unchecked(shape).sample(n, rng)
}

/// Radial characteristic function of `σ_s`: `exp(-t²/(4(s+1)))`.
pub fn sigma_chf(shape: ShapeParam, t: f64) -> f64 {
    (-t * t / (4.0 * (shape.s() + 1.0))).exp()
}

/// Rate `a` and jump radius `c` of a radial Poisson law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct RadialPoissonParams {
    a: f64,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    a: f64,
    c: f64,
}

impl TryFrom<ParamsRepr> for RadialPoissonParams {
    type Error = DistError;
    fn try_from(r: ParamsRepr) -> Result<Self, Self::Error> {
        Self::new(r.a, r.c)
    }
}

impl From<RadialPoissonParams> for ParamsRepr {
    fn from(p: RadialPoissonParams) -> Self {
        ParamsRepr { a: p.a, c: p.c }
    }
}

impl RadialPoissonParams {
    pub fn new(a: f64, c: f64) -> Result<Self, DistError> {
        if a.is_finite() && c.is_finite() && a > 0.0 && c > 0.0 {
            Ok(Self { a, c })
        } else {
            Err(DistError::BadParams { a, c })
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// `exp(a(Λ_s(ct) - 1))`, always in `(0, 1]`.
pub fn radial_poisson_chf(p: RadialPoissonParams, shape: ShapeParam, t: f64) -> f64 {
    (p.a * (lambda_unchecked(shape, p.c * t) - 1.0)).exp()
}

/// Poisson(`rate`) counts; sequential inversion up to
/// [`INVERSION_MAX_RATE`].
#[derive(Debug, Clone, Copy)]
pub struct PoissonCount {
    rate: f64,
    p0: f64,
    fallback: Option<Poisson<f64>>,
}

impl PoissonCount {
    pub fn new(rate: f64) -> Self {
        let fallback =
            (rate > INVERSION_MAX_RATE).then(|| Poisson::new(rate).expect("positive finite rate"));
        Self {
            rate,
            p0: (-rate).exp(),
            fallback,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if let Some(p) = &self.fallback {
            return p.sample(rng) as u64;
        }
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut pk = self.p0;
        let mut cdf = pk;
        while u > cdf {
            k += 1;
            pk *= self.rate / k as f64;
            let next = cdf + pk;
            if next == cdf {
                // tail mass below rounding; u sits in the last representable step
                break;
            }
            cdf = next;
        }
        k
    }
}

/// Single-draw sampler for `π_s(a, c)`.
#[derive(Debug, Clone, Copy)]
pub struct RadialPoissonSampler {
    c: f64,
    count: PoissonCount,
    theta: ThetaDist,
}

impl RadialPoissonSampler {
    pub fn new(p: RadialPoissonParams, shape: ShapeParam) -> Self {
        Self {
            c: p.c,
            count: PoissonCount::new(p.a),
            theta: ThetaDist::new(shape),
        }
    }

    /// Left fold of `N` copies of `c` under `⊕_s`; `N = 0` gives 0 and
    /// `N = 1` gives exactly `c`.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n = self.count.draw(rng);
        if n == 0 {
            return 0.0;
        }
        let mut r = self.c;
        for _ in 1..n {
            r = radial_sum(r, self.c, self.theta.draw(rng));
        }
        r
    }
}

/// `n` draws of `π_s(a, c)`.
pub fn radial_poisson_sample<R: Rng + ?Sized>(
    p: RadialPoissonParams,
    shape: ShapeParam,
    n: usize,
    rng: &mut R,
) -> Result<Measure, DistError> {
    let sampler = RadialPoissonSampler::new(p, shape);
    Ok(Measure::empirical(
        (0..n).map(|_| sampler.draw(rng)).collect(),
    )?)
}

/// Outcome of [`fit_radial_poisson`]; serialises as
/// `{"a":…, "c":…, "gof":…, "n":…}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPoissonFit {
    pub a: f64,
    pub c: f64,
    /// Minimised squared deviation per grid point.
    pub gof: f64,
    pub n: usize,
}

impl RadialPoissonFit {
    pub fn params(&self) -> RadialPoissonParams {
        RadialPoissonParams {
            a: self.a,
            c: self.c,
        }
    }
}

/// Starting point for the fit: rate from the zero fraction, jump radius
/// from the most frequent repeated nonzero value (the atom at `c`), falling
/// back to a percentile estimate.
fn initial_guess(samples: &[f64]) -> Result<(f64, f64), FitError> {
    let n = samples.len();
    let mut nonzero: Vec<f64> = samples.iter().copied().filter(|&v| v != 0.0).collect();
    if nonzero.len() < MIN_NONZERO_FOR_FIT {
        return Err(FitError::DegenerateRate {
            nonzero: nonzero.len(),
            n,
        });
    }
    let zero_frac = (n - nonzero.len()) as f64 / n as f64;
    let a0 = -(zero_frac.max(1.0 / n as f64)).ln();

    nonzero.sort_by(f64::total_cmp);
    let mut best: Option<(f64, usize)> = None;
    let mut i = 0;
    while i < nonzero.len() {
        let mut j = i + 1;
        while j < nonzero.len() && nonzero[j] == nonzero[i] {
            j += 1;
        }
        let run = j - i;
        if run >= 2 && best.is_none_or(|(_, r)| run > r) {
            best = Some((nonzero[i], run));
        }
        i = j;
    }
    let c0 = match best {
        Some((v, _)) => v,
        None => {
            let mut all = samples.to_vec();
            all.sort_by(f64::total_cmp);
            let mut q = percentile_sorted(&all, 0.6);
            if q == 0.0 {
                q = percentile_sorted(&nonzero, 0.6);
            }
            q / a0.max(1.0).sqrt()
        }
    };
    Ok((a0, c0))
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Least-squares fit of `(a, c)` to the empirical radial characteristic
/// function on a fixed 40-point grid over `(0, 8/c₀]`.
///
/// The search is Nelder–Mead in `(ln a, ln c)` on the box
/// `a ∈ [1e-8, 30]`, `c ∈ [c₀/100, 100·c₀]`, with simplex spread tolerances
/// `1e-15` (objective) and `1e-10` (log-parameters) and two restarts.
/// Deterministic given the input.
pub fn fit_radial_poisson(
    samples: &Empirical,
    shape: ShapeParam,
) -> Result<RadialPoissonFit, FitError> {
    let n = samples.len();
    if n < MIN_FIT_SAMPLES {
        return Err(FitError::TooFewSamples(n));
    }
    let (a0, c0) = initial_guess(samples.samples())?;
    let grid = Grid::interior(FIT_GRID_SPAN / c0, FIT_GRID_POINTS).expect("c0 > 0");
    let emp = rad_chf(&Measure::Empirical(samples.clone()), shape, &grid);
    let t = grid.points();

    let objective = |x: &[f64]| -> f64 {
        let a = x[0].exp();
        let c = x[1].exp();
        t.iter()
            .zip(&emp.values)
            .map(|(&tk, &ek)| {
                let model = (a * (lambda_unchecked(shape, c * tk) - 1.0)).exp();
                (ek - model).powi(2)
            })
            .sum()
    };
    let lower = [1e-8f64.ln(), (c0 / 100.0).ln()];
    let upper = [FIT_MAX_RATE.ln(), (c0 * 100.0).ln()];
    let x0 = [a0.min(FIT_MAX_RATE).ln(), c0.ln()];
    let result = nelder_mead(
        objective,
        &x0,
        &[0.1, 0.05],
        &lower,
        &upper,
        SimplexOptions::default(),
    );
    Ok(RadialPoissonFit {
        a: result.x[0].exp(),
        c: result.x[1].exp(),
        gof: result.f / FIT_GRID_POINTS as f64,
        n,
    })
}

/// One calibrated gof acceptance threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofThreshold {
    pub s: f64,
    pub n: usize,
    /// 99th percentile of gof over self-fits at `(s, n)`.
    pub threshold: f64,
    pub fits: usize,
}

fn threshold_table() -> &'static [GofThreshold] {
    static TABLE: OnceLock<Vec<GofThreshold>> = OnceLock::new();
    TABLE.get_or_init(|| {
        serde_json::from_str(include_str!("../fixtures/gof_thresholds.json"))
            .expect("bundled gof threshold table is valid JSON")
    })
}

/// Calibrated thresholds bundled with the crate.
pub fn gof_thresholds() -> &'static [GofThreshold] {
    threshold_table()
}

/// gof acceptance threshold for a sample of size `n` at `shape`.
///
/// Uses the calibration at the nearest tabulated `s`; gof of a correct
/// model scales like `1/n`, so the threshold is rescaled by `n_ref / n`.
pub fn gof_threshold(shape: ShapeParam, n: usize) -> f64 {
    let table = threshold_table();
    let nearest = table
        .iter()
        .min_by(|p, q| {
            (p.s - shape.s())
                .abs()
                .total_cmp(&(q.s - shape.s()).abs())
                .then(q.threshold.total_cmp(&p.threshold))
        })
        .expect("threshold table is nonempty");
    nearest.threshold * nearest.n as f64 / n.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sh(s: f64) -> ShapeParam {
        ShapeParam::new(s).unwrap()
    }

    #[test]
    fn sigma_density_half_normal_limit() {
        let want = (2.0 / std::f64::consts::PI).sqrt();
        assert!((sigma_density(sh(-0.5), 0.001).unwrap() - want).abs() < 1e-6);
        for s in [-0.5, 0.0, 1.0, 2.5] {
            assert!(sigma_density(sh(s), 10.5).unwrap() < 1e-20);
        }
        assert!(sigma_density(sh(0.0), -1.0).is_err());
    }

    #[test]
    fn char_measure_self_test_passes() {
        for s in [-0.5, 0.0, 1.0, 2.5, 10.0] {
            CharMeasure::new(sh(s)).unwrap();
        }
    }

    #[test]
    fn sigma_chf_values() {
        assert_eq!(sigma_chf(sh(1.0), 0.0), 1.0);
        assert!((sigma_chf(sh(0.0), 2.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(RadialPoissonParams::new(0.0, 1.0).is_err());
        assert!(RadialPoissonParams::new(1.0, -1.0).is_err());
        assert!(RadialPoissonParams::new(f64::NAN, 1.0).is_err());
        let p = RadialPoissonParams::new(0.7, 1.3).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"a":0.7,"c":1.3}"#);
        assert!(serde_json::from_str::<RadialPoissonParams>(r#"{"a":-1,"c":1}"#).is_err());
    }

    #[test]
    fn radial_poisson_chf_limits() {
        let p = RadialPoissonParams::new(2.0, 0.7).unwrap();
        assert_eq!(radial_poisson_chf(p, sh(1.0), 0.0), 1.0);
        for i in 0..40 {
            let t = i as f64 * 0.37;
            let v = radial_poisson_chf(p, sh(-0.5), t);
            assert!((v - (2.0 * ((0.7 * t).cos() - 1.0)).exp()).abs() < 1e-12);
            assert!(v > 0.0 && v <= 1.0);
        }
        let tiny = RadialPoissonParams::new(1e-9, 1.0).unwrap();
        assert!((radial_poisson_chf(tiny, sh(0.0), 3.0) - 1.0).abs() <= 2e-9);
    }

    #[test]
    fn poisson_inversion_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for rate in [0.1, 1.8, 12.0, 30.0, 45.0] {
            let pc = PoissonCount::new(rate);
            let n = 50_000;
            let mean = (0..n).map(|_| pc.draw(&mut rng) as f64).sum::<f64>() / n as f64;
            let se = (rate / n as f64).sqrt();
            assert!((mean - rate).abs() < 4.0 * se, "rate={rate} mean={mean}");
        }
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let zeros = Empirical::new(vec![0.0; 5000]).unwrap();
        assert!(matches!(
            fit_radial_poisson(&zeros, sh(1.0)),
            Err(FitError::DegenerateRate { nonzero: 0, .. })
        ));
        let few = Empirical::new(vec![1.0; 10]).unwrap();
        assert_eq!(
            fit_radial_poisson(&few, sh(1.0)),
            Err(FitError::TooFewSamples(10))
        );
    }

    #[test]
    fn initial_guess_uses_atom() {
        let mut v = vec![0.0; 500];
        v.extend(std::iter::repeat_n(1.3, 300));
        v.extend((0..200).map(|i| 1.5 + i as f64 * 0.01));
        let (a0, c0) = initial_guess(&v).unwrap();
        assert!((a0 - 2f64.ln()).abs() < 1e-12);
        assert_eq!(c0, 1.3);
    }

    #[test]
    fn threshold_table_loads() {
        assert!(!gof_thresholds().is_empty());
        let t = gof_threshold(sh(1.0), 200_000);
        assert!(t > 0.0 && t.is_finite());
        assert!((gof_threshold(sh(1.0), 100_000) - 2.0 * t).abs() < 1e-18);
    }
}
