//! Regenerates `fixtures/gof_thresholds.json`.
//!
//! For each shape, fits radial Poisson laws to samples drawn from known
//! radial Poisson laws and records the 99th percentile of the resulting
//! gof values. Also prints the gof of `σ_s` samples for comparison.
//!
//! Usage: `cargo run --release --example calibrate_gof -- [fits] [n]`

use std::time::Instant;

use kingman::distributions::{
    fit_radial_poisson, radial_poisson_sample, sigma_sample, GofThreshold, RadialPoissonParams,
};
use kingman::io::to_json_string;
use kingman::kernel::ShapeParam;
use kingman::measures::Measure;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SHAPES: [f64; 3] = [-0.5, 0.0, 1.0];
const PARAMS: [(f64, f64); 3] = [(0.7, 1.3), (1.1, 1.3), (2.0, 0.5)];

fn main() {
    let mut args = std::env::args().skip(1);
    let fits: usize = args.next().map_or(200, |v| v.parse().expect("fits"));
    let n: usize = args.next().map_or(200_000, |v| v.parse().expect("n"));
    let mut table = Vec::new();
    for (si, &s) in SHAPES.iter().enumerate() {
        let shape = ShapeParam::new(s).unwrap();
        let started = Instant::now();
        let mut gofs = Vec::with_capacity(fits);
        let mut worst_a: f64 = 0.0;
        let mut worst_c: f64 = 0.0;
        for k in 0..fits {
            let (a, c) = PARAMS[k % PARAMS.len()];
            let p = RadialPoissonParams::new(a, c).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1_000_000 * si as u64 + k as u64);
            let Measure::Empirical(e) = radial_poisson_sample(p, shape, n, &mut rng).unwrap()
            else {
                unreachable!()
            };
            let f = fit_radial_poisson(&e, shape).unwrap();
            worst_a = worst_a.max((f.a - a).abs());
            worst_c = worst_c.max((f.c - c).abs());
            gofs.push(f.gof);
        }
        gofs.sort_by(f64::total_cmp);
        let idx = ((fits as f64 * 0.99).ceil() as usize).clamp(1, fits) - 1;
        let threshold = gofs[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(77 + si as u64);
        let Measure::Empirical(sig) = sigma_sample(shape, n, &mut rng).unwrap() else {
            unreachable!()
        };
        let control = fit_radial_poisson(&sig, shape).unwrap();
        eprintln!(
            "s={s}: p99 gof {threshold:.3e}, median {:.3e}, max |da| {worst_a:.4}, max |dc| {worst_c:.5}, sigma gof {:.3e} (a={:.3}, c={:.4}), {:.1}s",
            gofs[fits / 2],
            control.gof,
            control.a,
            control.c,
            started.elapsed().as_secs_f64()
        );
        table.push(GofThreshold {
            s,
            n,
            threshold,
            fits,
        });
    }
    print!("{}", to_json_string(&table).unwrap());
}
