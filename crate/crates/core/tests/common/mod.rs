//! Test-only reference implementations, independent of the library's
//! evaluation paths.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

const FRAC_BITS: u32 = 400;

fn to_fixed(x: f64) -> BigInt {
    // x * 2^FRAC_BITS is exact for any f64 in the ranges used here: split the
    // scaling so the intermediate stays finite.
    let scaled = x * 2f64.powi(200);
    BigInt::from_f64(scaled).expect("finite") << (FRAC_BITS - 200)
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    // Keep 120 significant bits before handing off to f64.
    let bits = v.bits() as i64;
    let shift = (bits - 120).max(0) as u32;
    let head = (v >> shift).to_f64().expect("fits");
    head * 2f64.powi(shift as i32 - FRAC_BITS as i32)
}

/// Normalised kernel `Γ(s+1) J_s(x) / (x/2)^s` from the ascending series,
/// evaluated in 400-bit fixed point. Valid for `s > -1` and moderate `x`
/// (cancellation is absorbed by the extra ~280 bits of headroom).
pub fn lambda_exact(s: f64, x: f64) -> f64 {
    let one = BigInt::one() << FRAC_BITS;
    let xf = to_fixed(x);
    let sf = to_fixed(s);
    // z = x^2 / 4
    let z = (&xf * &xf) >> (FRAC_BITS + 2);
    let mut term = one.clone();
    let mut sum = one.clone();
    let mut j = 0u32;
    loop {
        // (j+1)(s+1+j) formed exactly in fixed point
        let denom = (&sf + (BigInt::from(j + 1) << FRAC_BITS)) * (j + 1);
        term = -((&term * &z) / &denom);
        sum += &term;
        j += 1;
        if term.is_zero() || (term.abs().bits() < 2 && j > 10) {
            break;
        }
        assert!(j < 2000, "oracle series did not terminate");
    }
    fixed_to_f64(&sum)
}

/// Bessel `J_s(x)` from the fixed-point series; the prefactor
/// `(x/2)^s / Γ(s+1)` is supplied by the caller through `gamma_s_plus_1`
/// so that no library gamma routine is involved.
pub fn bessel_j_exact(s: f64, x: f64, gamma_s_plus_1: f64) -> f64 {
    lambda_exact(s, x) * (x / 2.0).powf(s) / gamma_s_plus_1
}

/// Bisection for a root of `f` on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule, used where a crude but obviously-correct
/// integrator is enough.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 0.1% critical value of the one-sample KS statistic.
pub fn ks_critical_001(n: usize) -> f64 {
    1.949 / (n as f64).sqrt()
}

/// Standard normal CDF via the complementary error function series
/// (Abramowitz–Stegun 7.1.26 is too coarse here, so use libm).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}
