#![allow(clippy::excessive_precision)]

mod common;

use common::{ks_critical_001, ks_distance, lambda_exact};
use kingman::distributions::{
    fit_radial_poisson, radial_poisson_chf, radial_poisson_sample, sigma_chf, sigma_density,
    sigma_sample, CharMeasure, FitError, RadialPoissonParams,
};
use kingman::kernel::ShapeParam;
use kingman::measures::{rad_chf, Empirical, Grid, Measure};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sh(s: f64) -> ShapeParam {
    ShapeParam::new(s).unwrap()
}

fn empirical(m: Measure) -> Empirical {
    m.as_empirical().unwrap().clone()
}

/// CDF of σ_s: X² ~ Gamma(s+1, rate s+1), so P(X ≤ x) is the regularised
/// lower incomplete gamma at (s+1)x². Computed from its power series.
fn sigma_cdf(s: f64, x: f64) -> f64 {
    let p = s + 1.0;
    let z = p * x * x;
    if z == 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / p;
    let mut sum = term;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= z / (p + k);
        sum += term;
        k += 1.0;
    }
    (p * z.ln() - z - libm::lgamma(p)).exp() * sum
}

#[test]
fn sigma_samples_match_cdf() {
    let n = 50_000;
    for (i, s) in [-0.5, 0.0, 1.0, 2.5].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + i as u64);
        let e = empirical(sigma_sample(sh(s), n, &mut rng).unwrap());
        let d = ks_distance(e.samples(), |x| sigma_cdf(s, x));
        assert!(d < ks_critical_001(n), "s={s}: KS {d}");
    }
}

#[test]
fn sigma_density_integrates_to_cdf() {
    for s in [-0.5, 0.0, 1.0] {
        let m = CharMeasure::new(sh(s)).unwrap();
        let got = common::simpson(|x| m.density(x).unwrap(), 0.0, 1.2, 20_000);
        assert!((got - sigma_cdf(s, 1.2)).abs() < 1e-9, "s={s}");
    }
}

#[test]
fn sigma_density_frozen_values() {
    // 2(s+1)^(s+1) x^(2s+1) e^{-(s+1)x²} / Γ(s+1) at s = 1, x = 1: 8/e².
    let want = 8.0 * (-2.0f64).exp();
    assert!((sigma_density(sh(1.0), 1.0).unwrap() - want).abs() < 1e-15);
}

#[test]
fn sigma_chf_matches_exact_rad_chf() {
    // ∫ Λ_s(tx) σ_s(dx) by quadrature against the high-precision kernel.
    for s in [0.0, 1.0] {
        let m = CharMeasure::new(sh(s)).unwrap();
        for t in [0.5, 2.0, 4.0] {
            let q = common::simpson(
                |x| m.density(x).unwrap() * lambda_exact(s, t * x),
                0.0,
                8.0,
                4000,
            );
            assert!((q - sigma_chf(sh(s), t)).abs() < 1e-9, "s={s} t={t}");
        }
    }
}

#[test]
fn sigma_log_chf_is_additive_in_t_squared() {
    for s in [-0.5, 0.0, 1.0, 4.0] {
        for (t, u) in [(0.5, 1.5), (2.0, 3.0), (0.0, 7.0)] {
            let lhs = sigma_chf(sh(s), t).ln() + sigma_chf(sh(s), u).ln();
            let rhs = sigma_chf(sh(s), (t * t + u * u).sqrt()).ln();
            assert!((lhs - rhs).abs() <= 1e-12);
        }
    }
}

#[test]
fn radial_poisson_chf_frozen() {
    // exp(a(Λ_1(ct) - 1)) from the multiprecision kernel, a = 0.7, c = 1.3, t = 2.
    let want = (0.7 * (lambda_exact(1.0, 2.6) - 1.0)).exp();
    let p = RadialPoissonParams::new(0.7, 1.3).unwrap();
    let got = radial_poisson_chf(p, sh(1.0), 2.0);
    assert!((got - want).abs() < 1e-15);
    assert!((got - 6.398_749_758_954_227_5e-1).abs() < 1e-15);
}

#[test]
fn radial_poisson_atoms() {
    let (a, c) = (0.7, 1.3);
    let p = RadialPoissonParams::new(a, c).unwrap();
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    let e = empirical(radial_poisson_sample(p, sh(1.0), n, &mut rng).unwrap());
    let frac = |pred: &dyn Fn(f64) -> bool| {
        e.samples().iter().filter(|&&v| pred(v)).count() as f64 / n as f64
    };
    let p0 = (-a).exp();
    let p1 = a * p0;
    let se = |q: f64| (q * (1.0 - q) / n as f64).sqrt();
    assert!((frac(&|v| v == 0.0) - p0).abs() <= 4.0 * se(p0));
    assert!((frac(&|v| v == c) - p1).abs() <= 4.0 * se(p1));
}

#[test]
fn radial_poisson_samples_match_chf() {
    let p = RadialPoissonParams::new(0.7, 1.3).unwrap();
    let grid = Grid::linspace(10.0, 21).unwrap();
    for (i, s) in [-0.5, 0.0, 1.0].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + i as u64);
        let m = radial_poisson_sample(p, sh(s), 100_000, &mut rng).unwrap();
        let curve = rad_chf(&m, sh(s), &grid);
        let se = curve.std_errors.unwrap();
        for (k, &t) in grid.points().iter().enumerate() {
            let want = radial_poisson_chf(p, sh(s), t);
            assert!(
                (curve.values[k] - want).abs() <= 4.0 * se[k] + 1e-12,
                "s={s} t={t}"
            );
        }
    }
}

#[test]
fn fit_recovers_parameters() {
    let n = 200_000;
    let mut seed = 600;
    for s in [-0.5, 0.0, 1.0] {
        for (a, c) in [(0.7, 1.3), (1.1, 1.3), (2.0, 0.5)] {
            seed += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = RadialPoissonParams::new(a, c).unwrap();
            let e = empirical(radial_poisson_sample(p, sh(s), n, &mut rng).unwrap());
            let fit = fit_radial_poisson(&e, sh(s)).unwrap();
            assert!((fit.a - a).abs() <= 0.05, "s={s} ({a},{c}): a={}", fit.a);
            assert!((fit.c - c).abs() <= 0.01, "s={s} ({a},{c}): c={}", fit.c);
            assert_eq!(fit.n, n);
        }
    }
}

#[test]
fn fit_rejects_degenerate_input() {
    let zeros = Empirical::new(vec![0.0; 5000]).unwrap();
    assert!(matches!(
        fit_radial_poisson(&zeros, sh(1.0)),
        Err(FitError::DegenerateRate {
            nonzero: 0,
            n: 5000
        })
    ));
    let few = Empirical::new(vec![1.0; 10]).unwrap();
    assert!(matches!(
        fit_radial_poisson(&few, sh(1.0)),
        Err(FitError::TooFewSamples(10))
    ));
}

#[test]
fn fit_is_deterministic() {
    let p = RadialPoissonParams::new(1.1, 1.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let e = empirical(radial_poisson_sample(p, sh(0.0), 20_000, &mut rng).unwrap());
    let a = fit_radial_poisson(&e, sh(0.0)).unwrap();
    let b = fit_radial_poisson(&e, sh(0.0)).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn radial_poisson_chf_is_bounded(a in 0.0f64..30.0, c in 0.01f64..10.0, s in -0.5f64..5.0, t in 0.0f64..20.0) {
        let p = RadialPoissonParams::new(a, c).unwrap();
        let v = radial_poisson_chf(p, sh(s), t);
        // Λ_s ≥ -1 gives the floor e^{-2a}.
        prop_assert!(v <= 1.0 && v >= (-2.0 * a).exp() * (1.0 - 1e-12));
    }

    #[test]
    fn radial_poisson_chf_exponents_add(a1 in 0.0f64..5.0, a2 in 0.0f64..5.0, c in 0.1f64..3.0, s in -0.5f64..3.0, t in 0.0f64..8.0) {
        let p1 = RadialPoissonParams::new(a1, c).unwrap();
        let p2 = RadialPoissonParams::new(a2, c).unwrap();
        let p = RadialPoissonParams::new(a1 + a2, c).unwrap();
        let lhs = radial_poisson_chf(p1, sh(s), t) * radial_poisson_chf(p2, sh(s), t);
        prop_assert!((lhs - radial_poisson_chf(p, sh(s), t)).abs() <= 1e-13);
    }
}
