//! The transform `τ_s` from laws on `[0, ∞)` to symmetric laws on the line.
//!
//! `τ_s(G)` is the scale mixture `∫ T_c(F_s) G(dc)`, where `T_c` dilates by
//! `c`; pathwise it is the law of `X·θ_s` with `X ~ G` independent of
//! `θ_s`. Its Fourier transform equals the radial characteristic function
//! of `G`, and it carries `∗_s` to ordinary convolution.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{ShapeParam, ThetaDist};
use crate::measures::{mean_and_se, Grid, Measure, MeasureSampler, RadChfCurve};

/// Tolerance multiplier for the imaginary-part symmetry diagnostic.
pub const SYMMETRY_SE_MULTIPLIER: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TauError {
    #[error("a symmetric sample needs at least one finite value")]
    Empty,
    #[error("sample value is not finite: {0}")]
    NonFinite(f64),
    #[error("sample is not symmetric: imaginary part {im:e} at t={t} exceeds 5 standard errors ({se:e})")]
    Asymmetric { t: f64, im: f64, se: f64 },
}

/// Where a symmetric sample came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub s: Option<f64>,
}

/// A sample on the full line whose law is symmetric about 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymmetricRepr", into = "SymmetricRepr")]
pub struct SymmetricSample {
    samples: Vec<f64>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct SymmetricRepr {
    samples: Vec<f64>,
    provenance: Provenance,
}

impl TryFrom<SymmetricRepr> for SymmetricSample {
    type Error = TauError;
    fn try_from(r: SymmetricRepr) -> Result<Self, Self::Error> {
        SymmetricSample::new(r.samples, r.provenance)
    }
}

impl From<SymmetricSample> for SymmetricRepr {
    fn from(s: SymmetricSample) -> Self {
        SymmetricRepr {
            samples: s.samples,
            provenance: s.provenance,
        }
    }
}

impl SymmetricSample {
    pub fn new(samples: Vec<f64>, provenance: Provenance) -> Result<Self, TauError> {
        if samples.is_empty() {
            return Err(TauError::Empty);
        }
        if let Some(&bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(TauError::NonFinite(bad));
        }
        Ok(Self {
            samples,
            provenance,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn describe(m: &Measure) -> String {
    match m {
        Measure::Discrete(d) => format!("discrete({} atoms)", d.atoms().len()),
        Measure::Empirical(e) => format!("empirical({} samples)", e.len()),
    }
}

/// `n` draws of `X·θ_s`, `X ~ m`.
pub fn tau_sample<R: Rng + ?Sized>(
    m: &Measure,
    shape: ShapeParam,
    n: usize,
    rng: &mut R,
) -> Result<SymmetricSample, TauError> {
    let xs = MeasureSampler::new(m);
    let theta = ThetaDist::new(shape);
    let samples = (0..n).map(|_| xs.draw(rng) * theta.draw(rng)).collect();
    SymmetricSample::new(
        samples,
        Provenance {
            source: format!("tau({})", describe(m)),
            s: Some(shape.s()),
        },
    )
}

/// Empirical characteristic function `mean cos(t v)` with standard errors.
///
/// The imaginary part `mean sin(t v)` is checked at every grid point and
/// must stay within 5 standard errors of zero.
pub fn symmetric_chf(sym: &SymmetricSample, grid: &Grid) -> Result<RadChfCurve, TauError> {
    let mut values = Vec::with_capacity(grid.len());
    let mut ses = Vec::with_capacity(grid.len());
    for &t in grid.points() {
        let (re, se) = mean_and_se(&sym.samples, |v| (t * v).cos());
        let (im, se_im) = mean_and_se(&sym.samples, |v| (t * v).sin());
        if im.abs() > SYMMETRY_SE_MULTIPLIER * se_im + 1e-12 {
            return Err(TauError::Asymmetric { t, im, se: se_im });
        }
        values.push(re);
        ses.push(se);
    }
    Ok(RadChfCurve {
        t_grid: grid.points().to_vec(),
        values,
        std_errors: Some(ses),
    })
}

/// Ordinary convolution realised pathwise: sums of independently resampled
/// entries, as many as the larger input.
pub fn ordinary_convolve_samples<R: Rng + ?Sized>(
    u: &SymmetricSample,
    v: &SymmetricSample,
    rng: &mut R,
) -> SymmetricSample {
    let n = u.len().max(v.len());
    let samples = (0..n)
        .map(|_| u.samples[rng.random_range(0..u.len())] + v.samples[rng.random_range(0..v.len())])
        .collect();
    SymmetricSample {
        samples,
        provenance: Provenance {
            source: format!("({}) * ({})", u.provenance.source, v.provenance.source),
            s: if u.provenance.s == v.provenance.s {
                u.provenance.s
            } else {
                None
            },
        },
    }
}
