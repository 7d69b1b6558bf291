use kingman::distributions::RadialPoissonParams;
use kingman::io::to_json_string;
use kingman::kernel::ShapeParam;
use kingman::measures::{Grid, Measure};
use kingman::verify::{
    classical_reduction_check, verify_cramer_levy, verify_homomorphism, verify_homomorphism_with,
    verify_raikov, Control, ScalePair, VerifyError,
};

fn sh(s: f64) -> ShapeParam {
    ShapeParam::new(s).unwrap()
}

#[test]
fn homomorphism_on_point_masses_and_its_control() {
    let d1 = Measure::point_mass(1.0).unwrap();
    let d2 = Measure::point_mass(2.0).unwrap();
    let ok = verify_homomorphism(&d1, &d2, sh(1.0), 100_000, 42).unwrap();
    assert!(ok.passed, "statistic {}", ok.statistic);
    assert_eq!(ok.per_point.len(), 20);
    let bad = verify_homomorphism_with(&d1, &d2, sh(1.0), 100_000, 42, Control::Corrupted).unwrap();
    assert!(!bad.passed, "control statistic {}", bad.statistic);
    assert_eq!(bad.name, "homomorphism:negative_control");
}

#[test]
fn reports_are_reproducible() {
    let d1 = Measure::point_mass(1.0).unwrap();
    let d2 = Measure::discrete(vec![(0.5, 0.5), (2.0, 0.5)]).unwrap();
    let a = verify_homomorphism(&d1, &d2, sh(0.0), 5_000, 9).unwrap();
    let b = verify_homomorphism(&d1, &d2, sh(0.0), 5_000, 9).unwrap();
    assert_eq!(to_json_string(&a).unwrap(), to_json_string(&b).unwrap());
    let c = verify_homomorphism(&d1, &d2, sh(0.0), 5_000, 10).unwrap();
    assert_ne!(a.per_point, c.per_point);
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| verify_cramer_levy(ScalePair::new(0.6, 0.8).unwrap(), sh(1.0), 4_000, 3))
            .unwrap()
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn cramer_levy_trivial_pair_passes() {
    let r = verify_cramer_levy(ScalePair::new(1.0, 0.0).unwrap(), sh(0.0), 20_000, 1).unwrap();
    assert!(r.passed);
    assert_eq!(r.threshold, 1.0);
}

#[test]
fn cramer_levy_control_fails() {
    let r = verify_cramer_levy(ScalePair::unconstrained(0.8, 0.8), sh(1.0), 100_000, 42).unwrap();
    assert!(!r.passed);
    assert_eq!(r.name, "cramer_levy:negative_control");
}

#[test]
fn classical_reduction_is_exact() {
    let grid = Grid::linspace(10.0, 40).unwrap();
    for (a, c) in [(1.0, 1.0), (5.0, 0.3)] {
        let r = classical_reduction_check(RadialPoissonParams::new(a, c).unwrap(), &grid);
        assert!(r.passed && r.statistic <= 1e-12);
        assert_eq!(r.per_point.len(), 40);
    }
}

#[test]
fn raikov_near_degenerate_split_is_inconclusive() {
    let p = RadialPoissonParams::new(1.8, 1.3).unwrap();
    let r = verify_raikov(p, 1.0 - 1e-6, sh(1.0), 20_000, 42);
    match r {
        Err(VerifyError::Inconclusive { factor, .. }) => assert_eq!(factor, "Z"),
        other => panic!("expected inconclusive, got {other:?}"),
    }
}

#[test]
fn scale_pair_rejects_constraint_violation() {
    assert!(matches!(
        ScalePair::new(0.8, 0.8),
        Err(VerifyError::BadScalePair(..))
    ));
}
