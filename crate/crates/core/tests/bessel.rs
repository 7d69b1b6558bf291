#![allow(clippy::excessive_precision)]

mod common;

use std::f64::consts::PI;

use common::{bessel_j_exact, bisect, lambda_exact};
use kingman::kernel::{bessel_j, lambda_s, ShapeParam};
use proptest::prelude::*;

// Γ(s+1) for the orders checked below, in closed form.
const ORDERS: [(f64, f64); 6] = [
    (0.0, 1.0),
    (0.5, 0.886_226_925_452_758_0), // √π/2
    (1.0, 1.0),
    (2.5, 3.323_350_970_447_842_6),   // 15√π/8
    (-0.25, 1.225_416_702_465_177_6), // Γ(3/4)
    (7.0, 5040.0),
];

#[test]
fn bessel_matches_high_precision_series_on_0_50() {
    for &(s, gamma) in &ORDERS {
        let mut worst: f64 = 0.0;
        for i in 1..=500 {
            let x = i as f64 * 0.1;
            let got = bessel_j(s, x).unwrap();
            let want = bessel_j_exact(s, x, gamma);
            worst = worst.max((got - want).abs());
        }
        assert!(worst <= 1e-12, "s={s}: max abs error {worst:e}");
    }
}

#[test]
fn lambda_matches_high_precision_series() {
    for s in [-0.4, -0.25, 0.0, 0.3, 0.5, 1.0, 2.5, 7.0, 20.0] {
        let shape = ShapeParam::new(s).unwrap();
        for i in 0..=400 {
            let x = i as f64 * 0.125;
            let got = lambda_s(shape, x).unwrap();
            let want = lambda_exact(s, x);
            assert!((got - want).abs() <= 1e-13, "s={s} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn first_zero_of_j0() {
    // Root located by bisection on the high-precision series.
    let root = bisect(|x| lambda_exact(0.0, x), 2.0, 3.0);
    assert!((root - 2.404_825_557_695_773).abs() < 1e-14);
    assert!(bessel_j(0.0, 2.404_825_557_695_773).unwrap().abs() < 1e-9);
}

#[test]
fn frozen_reference_values() {
    // Values produced by the fixed-point series oracle.
    let cases = [
        (0.0, 1.0, 7.651_976_865_579_666e-1),
        (0.0, 10.0, -2.459_357_644_513_483_5e-1),
        (0.0, 30.0, -8.636_798_358_104_021e-2),
        (0.0, 50.0, 5.581_232_766_925_181_5e-2),
        (2.5, 45.0, -1.456_237_683_359_960_1e-4),
        (-0.25, 37.0, 1.528_844_349_627_377_4e-1),
    ];
    for (s, x, v) in cases {
        let got = lambda_s(ShapeParam::new(s).unwrap(), x).unwrap();
        assert!((got - v).abs() < 1e-13, "s={s} x={x}");
    }
}

#[test]
fn closed_form_reductions() {
    let classical = ShapeParam::new(-0.5).unwrap();
    let half = ShapeParam::new(0.5).unwrap();
    assert!((lambda_s(classical, 1.5).unwrap() - 1.5f64.cos()).abs() < 1e-15);
    assert!(lambda_s(half, PI).unwrap().abs() < 1e-10);
    for i in 1..=200 {
        let x = i as f64 * 0.1;
        assert!((lambda_s(half, x).unwrap() - x.sin() / x).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn lambda_bounded_by_one(s in -0.5f64..30.0, x in 0.0f64..200.0) {
        let v = lambda_s(ShapeParam::new(s).unwrap(), x).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-15, "s={} x={} v={}", s, x, v);
    }

    #[test]
    fn lambda_is_even(s in -0.5f64..10.0, x in 0.0f64..60.0) {
        let shape = ShapeParam::new(s).unwrap();
        prop_assert_eq!(lambda_s(shape, x).unwrap(), lambda_s(shape, -x).unwrap());
    }
}
