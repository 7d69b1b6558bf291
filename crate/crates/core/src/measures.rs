//! Probability measures on `[0, ∞)`, their radial characteristic functions,
//! and the Kingman convolution `∗_s`.
//!
//! The convolution of two measures is never materialised. It is reached
//! either through expectations,
//!
//! ```text
//! ∫ f d(μ ∗_s ν) = E f( sqrt(x² + 2uxy + y²) ),   x ~ μ, y ~ ν, u ~ θ_s,
//! ```
//!
//! computed by Gauss–Jacobi quadrature in `u` for atomic `μ, ν`, or through
//! samples of the radial sum `X ⊕_s Y`.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::fmt_f64;
use crate::kernel::{lambda_unchecked, ShapeParam, ThetaDist};
use crate::quad::SymmetricJacobiRule;

/// Tolerance on the total weight of a discrete measure.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Node count of the Gauss–Jacobi rule used by [`convolve_expect`].
pub const JACOBI_NODES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("atom location must be finite and >= 0, got {0}")]
    BadLocation(f64),
    #[error("atom weight must be finite and > 0, got {0}")]
    BadWeight(f64),
    #[error("weights sum to {0}, expected 1")]
    NotNormalised(f64),
    #[error("a measure needs at least one atom or sample")]
    Empty,
    #[error("sample value must be finite and >= 0, got {0}")]
    BadSample(f64),
    #[error("t-grid must be finite, >= 0 and strictly ascending")]
    BadGrid,
    #[error("mixture weight must lie in [0, 1], got {0}")]
    BadMixture(f64),
    #[error("integrand is not finite at radius {0}")]
    NonFiniteIntegrand(f64),
    #[error("scale factor must be finite and >= 0, got {0}")]
    BadScale(f64),
}

/// Finitely many atoms with positive weights summing to one. Atoms are kept
/// sorted by location with duplicates merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiscreteRepr", into = "DiscreteRepr")]
pub struct Discrete {
    atoms: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct DiscreteRepr {
    atoms: Vec<(f64, f64)>,
}

impl TryFrom<DiscreteRepr> for Discrete {
    type Error = MeasureError;
    fn try_from(r: DiscreteRepr) -> Result<Self, Self::Error> {
        Discrete::new(r.atoms)
    }
}

impl From<Discrete> for DiscreteRepr {
    fn from(d: Discrete) -> Self {
        DiscreteRepr { atoms: d.atoms }
    }
}

impl Discrete {
    /// Builds a measure from `(location, weight)` pairs.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::Empty);
        }
        for &(x, w) in &atoms {
            if !(x.is_finite() && x >= 0.0) {
                return Err(MeasureError::BadLocation(x));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(MeasureError::BadWeight(w));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(MeasureError::NotNormalised(total));
        }
        Ok(Self { atoms: merged })
    }

    /// The Dirac mass `δ_c`.
    pub fn point_mass(c: f64) -> Result<Self, MeasureError> {
        Self::new(vec![(c, 1.0)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `alpha·self + (1-alpha)·other`.
    pub fn mixture(&self, alpha: f64, other: &Discrete) -> Result<Self, MeasureError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(MeasureError::BadMixture(alpha));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|&(x, w)| (x, alpha * w))
            .chain(other.atoms.iter().map(|&(x, w)| (x, (1.0 - alpha) * w)))
            .filter(|a| a.1 > 0.0)
            .collect();
        Self::new(atoms)
    }
}

/// A nonempty sample of finite nonnegative values, read as the uniform law
/// on its entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EmpiricalRepr", into = "EmpiricalRepr")]
pub struct Empirical {
    samples: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EmpiricalRepr {
    samples: Vec<f64>,
}

impl TryFrom<EmpiricalRepr> for Empirical {
    type Error = MeasureError;
    fn try_from(r: EmpiricalRepr) -> Result<Self, Self::Error> {
        Empirical::new(r.samples)
    }
}

impl From<Empirical> for EmpiricalRepr {
    fn from(e: Empirical) -> Self {
        EmpiricalRepr { samples: e.samples }
    }
}

impl Empirical {
    pub fn new(samples: Vec<f64>) -> Result<Self, MeasureError> {
        if samples.is_empty() {
            return Err(MeasureError::Empty);
        }
        if let Some(&bad) = samples.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(MeasureError::BadSample(bad));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// A probability measure on the half-line.
///
/// JSON: `{"type":"discrete","atoms":[[x,w],...]}` or
/// `{"type":"empirical","samples":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Measure {
    Discrete(Discrete),
    Empirical(Empirical),
}

impl Measure {
    pub fn point_mass(c: f64) -> Result<Self, MeasureError> {
        Discrete::point_mass(c).map(Measure::Discrete)
    }

    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self, MeasureError> {
        Discrete::new(atoms).map(Measure::Discrete)
    }

    pub fn empirical(samples: Vec<f64>) -> Result<Self, MeasureError> {
        Empirical::new(samples).map(Measure::Empirical)
    }

    /// Pushes the measure forward under `x ↦ k·x`.
    pub fn scaled(&self, k: f64) -> Result<Self, MeasureError> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(MeasureError::BadScale(k));
        }
        Ok(match self {
            Measure::Discrete(d) => {
                Measure::discrete(d.atoms.iter().map(|&(x, w)| (k * x, w)).collect())?
            }
            Measure::Empirical(e) => Measure::empirical(e.samples.iter().map(|x| k * x).collect())?,
        })
    }

    pub fn as_discrete(&self) -> Option<&Discrete> {
        match self {
            Measure::Discrete(d) => Some(d),
            Measure::Empirical(_) => None,
        }
    }

    pub fn as_empirical(&self) -> Option<&Empirical> {
        match self {
            Measure::Empirical(e) => Some(e),
            Measure::Discrete(_) => None,
        }
    }
}

impl From<Discrete> for Measure {
    fn from(d: Discrete) -> Self {
        Measure::Discrete(d)
    }
}

impl From<Empirical> for Measure {
    fn from(e: Empirical) -> Self {
        Measure::Empirical(e)
    }
}

/// Draws from a [`Measure`]: categorical by weight for atoms, uniform
/// resampling with replacement for samples.
pub(crate) enum MeasureSampler<'a> {
    Atom(f64),
    Atoms(&'a [(f64, f64)], WeightedIndex<f64>),
    Samples(&'a [f64]),
}

impl<'a> MeasureSampler<'a> {
    pub(crate) fn new(m: &'a Measure) -> Self {
        match m {
            Measure::Discrete(d) if d.atoms.len() == 1 => MeasureSampler::Atom(d.atoms[0].0),
            Measure::Discrete(d) => MeasureSampler::Atoms(
                &d.atoms,
                WeightedIndex::new(d.atoms.iter().map(|a| a.1))
                    .expect("validated positive weights"),
            ),
            Measure::Empirical(e) => MeasureSampler::Samples(&e.samples),
        }
    }

    #[inline]
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MeasureSampler::Atom(x) => *x,
            MeasureSampler::Atoms(atoms, idx) => atoms[idx.sample(rng)].0,
            MeasureSampler::Samples(v) => v[rng.random_range(0..v.len())],
        }
    }
}

/// Ascending grid of nonnegative evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Grid(Vec<f64>);

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self, MeasureError> {
        let ok = !points.is_empty()
            && points.iter().all(|t| t.is_finite() && *t >= 0.0)
            && points.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(Self(points))
        } else {
            Err(MeasureError::BadGrid)
        }
    }

    /// `points` equispaced values from 0 to `t_max` inclusive.
    pub fn linspace(t_max: f64, points: usize) -> Result<Self, MeasureError> {
        if points < 2 || t_max.is_nan() || t_max <= 0.0 {
            return Err(MeasureError::BadGrid);
        }
        let step = t_max / (points - 1) as f64;
        Self::new((0..points).map(|k| k as f64 * step).collect())
    }

    /// `points` equispaced values on `(0, t_max]`: `t_k = k·t_max/points`.
    pub fn interior(t_max: f64, points: usize) -> Result<Self, MeasureError> {
        if points < 1 || t_max.is_nan() || t_max <= 0.0 {
            return Err(MeasureError::BadGrid);
        }
        Self::new(
            (1..=points)
                .map(|k| k as f64 * t_max / points as f64)
                .collect(),
        )
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Grid {
    type Error = MeasureError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Grid::new(v)
    }
}

impl From<Grid> for Vec<f64> {
    fn from(g: Grid) -> Self {
        g.0
    }
}

/// A radial characteristic function tabulated on a grid. Standard errors
/// are present iff the source was a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadChfCurve {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
}

impl RadChfCurve {
    /// Pointwise product. Standard errors, when either side has them, are
    /// propagated to first order.
    pub fn product(&self, other: &RadChfCurve) -> Result<RadChfCurve, MeasureError> {
        if self.t_grid != other.t_grid {
            return Err(MeasureError::BadGrid);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        let std_errors = match (&self.std_errors, &other.std_errors) {
            (None, None) => None,
            (sa, sb) => {
                let zero = vec![0.0; self.values.len()];
                let sa = sa.as_ref().unwrap_or(&zero);
                let sb = sb.as_ref().unwrap_or(&zero);
                Some(
                    (0..self.values.len())
                        .map(|k| (other.values[k] * sa[k]).hypot(self.values[k] * sb[k]))
                        .collect(),
                )
            }
        };
        Ok(RadChfCurve {
            t_grid: self.t_grid.clone(),
            values,
            std_errors,
        })
    }

    /// CSV with header `t,value,std_error`; the last column is empty for
    /// exact curves.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,value,std_error")?;
        for k in 0..self.t_grid.len() {
            let se = match &self.std_errors {
                Some(se) => fmt_f64(se[k]),
                None => String::new(),
            };
            writeln!(
                w,
                "{},{},{se}",
                fmt_f64(self.t_grid[k]),
                fmt_f64(self.values[k])
            )?;
        }
        Ok(())
    }
}

/// Mean and standard error of `f` over `values`, single pass (Welford).
pub(crate) fn mean_and_se<F: Fn(f64) -> f64>(values: &[f64], f: F) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let y = f(v);
        let delta = y - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (y - mean);
    }
    let n = values.len();
    let se = if n > 1 {
        (m2 / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    (mean, se)
}

/// Radial characteristic function `∫ Λ_s(t x) μ(dx)` on `grid`.
///
/// Exact weighted sum for atoms; sample mean with standard error
/// `sd/√n` for samples.
pub fn rad_chf(m: &Measure, shape: ShapeParam, grid: &Grid) -> RadChfCurve {
    let t_grid = grid.points().to_vec();
    match m {
        Measure::Discrete(d) => {
            let values = t_grid
                .iter()
                .map(|&t| {
                    d.atoms
                        .iter()
                        .map(|&(x, w)| w * lambda_unchecked(shape, t * x))
                        .sum()
                })
                .collect();
            RadChfCurve {
                t_grid,
                values,
                std_errors: None,
            }
        }
        Measure::Empirical(e) => {
            let (values, ses): (Vec<f64>, Vec<f64>) = t_grid
                .par_iter()
                .map(|&t| mean_and_se(&e.samples, |x| lambda_unchecked(shape, t * x)))
                .unzip();
            RadChfCurve {
                t_grid,
                values,
                std_errors: Some(ses),
            }
        }
    }
}

/// `sqrt(x² + 2uxy + y²)`, evaluated as `sqrt((x+uy)² + (1-u²)y²)` so the
/// radicand is a sum of nonnegative terms for `|u| ≤ 1`.
#[inline]
pub fn radial_sum(x: f64, y: f64, u: f64) -> f64 {
    let a = x + u * y;
    let radicand = a * a + (1.0 - u * u) * y * y;
    debug_assert!(radicand >= 0.0);
    radicand.max(0.0).sqrt()
}

/// Expectations under `μ ∗_s ν` for atomic `μ, ν`.
///
/// Holds the Gauss–Jacobi rule for `θ_s` so that repeated expectations at
/// the same shape reuse it.
#[derive(Debug, Clone)]
pub struct KingmanConvolution {
    shape: ShapeParam,
    rule: Option<SymmetricJacobiRule>,
}

impl KingmanConvolution {
    pub fn new(shape: ShapeParam) -> Self {
        let rule = if shape.is_atomic() {
            None
        } else {
            Some(
                SymmetricJacobiRule::new(JACOBI_NODES, shape.s() - 0.5)
                    .expect("alpha = s - 1/2 > -1 for s > -1/2"),
            )
        };
        Self { shape, rule }
    }

    pub fn shape(&self) -> ShapeParam {
        self.shape
    }

    /// `∫ f d(μ ∗_s ν)`.
    pub fn expect<F: Fn(f64) -> f64>(
        &self,
        f: F,
        mu: &Discrete,
        nu: &Discrete,
    ) -> Result<f64, MeasureError> {
        let angular = |x: f64, y: f64| -> Result<f64, MeasureError> {
            let eval = |u: f64| {
                let r = radial_sum(x, y, u);
                let v = f(r);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(MeasureError::NonFiniteIntegrand(r))
                }
            };
            match &self.rule {
                None => Ok(0.5 * (eval(-1.0)? + eval(1.0)?)),
                Some(rule) => {
                    let mut acc = 0.0;
                    for (u, w) in rule.iter() {
                        acc += w * eval(u)?;
                    }
                    Ok(acc)
                }
            }
        };
        let mut total = 0.0;
        for &(x, wx) in mu.atoms() {
            for &(y, wy) in nu.atoms() {
                total += wx * wy * angular(x, y)?;
            }
        }
        Ok(total)
    }
}

/// `∫ f d(μ ∗_s ν)` for atomic `μ, ν`; see [`KingmanConvolution`].
pub fn convolve_expect<F: Fn(f64) -> f64>(
    f: F,
    mu: &Discrete,
    nu: &Discrete,
    shape: ShapeParam,
) -> Result<f64, MeasureError> {
    KingmanConvolution::new(shape).expect(f, mu, nu)
}

/// `n` i.i.d. draws of `X ⊕_s Y` with `X ~ x_src`, `Y ~ y_src`.
pub fn radial_sum_sample<R: Rng + ?Sized>(
    x_src: &Measure,
    y_src: &Measure,
    shape: ShapeParam,
    n: usize,
    rng: &mut R,
) -> Result<Measure, MeasureError> {
    let xs = MeasureSampler::new(x_src);
    let ys = MeasureSampler::new(y_src);
    let theta = ThetaDist::new(shape);
    let out = (0..n)
        .map(|_| {
            let x = xs.draw(rng);
            let y = ys.draw(rng);
            radial_sum(x, y, theta.draw(rng))
        })
        .collect();
    Measure::empirical(out)
}

/// Radial sums of paired draws, `xs[i] ⊕_s ys[i]`, with fresh `θ_s` per pair.
pub fn radial_sum_paired<R: Rng + ?Sized>(
    xs: &[f64],
    ys: &[f64],
    shape: ShapeParam,
    rng: &mut R,
) -> Vec<f64> {
    let theta = ThetaDist::new(shape);
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| radial_sum(x, y, theta.draw(rng)))
        .collect()
}
