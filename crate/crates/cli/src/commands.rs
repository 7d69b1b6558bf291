use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use kingman::distributions::{
    fit_radial_poisson, gof_threshold, radial_poisson_sample, sigma_sample, RadialPoissonFit,
    RadialPoissonParams,
};
use kingman::io::{fmt_f64, parse_column_csv, to_json_string, write_column_csv};
use kingman::kernel::{lambda_s, ShapeParam, ThetaDist};
use kingman::measures::{rad_chf, radial_sum_sample, Grid, Measure, RadChfCurve};
use kingman::tau::{tau_sample, Provenance, SymmetricSample};
use kingman::verify::{
    classical_reduction_check_with, verify_cramer_levy, verify_homomorphism_with,
    verify_raikov_with, Control, RaikovReport, ScalePair, VerifyError, VerifyReport,
    CRAMER_LEVY_CONTROL,
};

use crate::args::{Check, Cli, Command, ConvolveMode, Format, GlobalArgs, Law, VerifyArgs};

const SAMPLE_N: usize = 10_000;
const VERIFY_N: usize = 100_000;
const RAIKOV_N: usize = 200_000;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input. Exit status 2.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    /// A verification failed or a fit could not be made. Exit status 1.
    #[error("{0}")]
    Failed(String),
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Validated global flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub shape: ShapeParam,
    pub seed: u64,
    pub n: Option<usize>,
    pub grid: Grid,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn from_args(g: &GlobalArgs) -> Result<Self, CliError> {
        let shape = ShapeParam::new(g.s).map_err(usage)?;
        if g.t_points < 2 {
            return Err(usage("--t-points must be at least 2"));
        }
        if g.n == Some(0) {
            return Err(usage("--n must be at least 1"));
        }
        let grid = Grid::linspace(g.t_max, g.t_points).map_err(usage)?;
        Ok(Self {
            shape,
            seed: g.seed,
            n: g.n,
            grid,
            format: g.format,
            out: g.out.clone(),
        })
    }

    fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn json<T: Serialize + ?Sized>(v: &T) -> Result<String, CliError> {
    to_json_string(v).map_err(usage)
}

fn column_csv(header: &str, values: &[f64]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_column_csv(&mut buf, header, values)?;
    Ok(String::from_utf8(buf).expect("ascii"))
}

fn curve_csv(c: &RadChfCurve) -> Result<String, CliError> {
    let mut buf = Vec::new();
    c.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii"))
}

/// Reads a measure: a JSON measure document, or a CSV/plain column of
/// sample values (optionally under a header line).
pub fn load_measure(path: &Path) -> Result<Measure, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let body = text.trim();
    if body.is_empty() {
        return Err(usage(format!("{}: empty input", path.display())));
    }
    let parsed = if body.starts_with('{') {
        serde_json::from_str::<Measure>(body).map_err(|e| e.to_string())
    } else {
        parse_column_csv(body)
            .map_err(|e| e.to_string())
            .and_then(|v| Measure::empirical(v).map_err(|e| e.to_string()))
    };
    parsed.map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::from_args(&cli.global)?;
    match cli.command {
        Command::Kernel { x } => cmd_kernel(&cfg, &x),
        Command::Sample { law, a, c } => cmd_sample(&cfg, law, a, c),
        Command::Chf { input } => cmd_chf(&cfg, &input),
        Command::Convolve { mu, nu, mode } => cmd_convolve(&cfg, &mu, &nu, mode),
        Command::Tau { input } => cmd_tau(&cfg, &input),
        Command::Verify(v) => cmd_verify(&cfg, &v),
        Command::Fit { input } => cmd_fit(&cfg, &input),
    }
}

#[derive(Serialize)]
struct KernelRow {
    x: f64,
    value: f64,
}

fn cmd_kernel(cfg: &RunConfig, xs: &[f64]) -> Result<(), CliError> {
    let rows = xs
        .iter()
        .map(|&x| {
            lambda_s(cfg.shape, x)
                .map(|value| KernelRow { x, value })
                .map_err(usage)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let text = match cfg.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut s = String::from("x,value\n");
            for r in &rows {
                let _ = writeln!(s, "{},{}", fmt_f64(r.x), fmt_f64(r.value));
            }
            s
        }
    };
    cfg.emit(&text)
}

fn emit_measure(cfg: &RunConfig, m: &Measure) -> Result<(), CliError> {
    let text = match (cfg.format, m) {
        (Format::Json, _) => json(m)?,
        (Format::Csv, Measure::Empirical(e)) => column_csv("value", e.samples())?,
        (Format::Csv, Measure::Discrete(d)) => {
            let mut s = String::from("x,weight\n");
            for &(x, w) in d.atoms() {
                let _ = writeln!(s, "{},{}", fmt_f64(x), fmt_f64(w));
            }
            s
        }
    };
    cfg.emit(&text)
}

fn emit_symmetric(cfg: &RunConfig, sym: &SymmetricSample) -> Result<(), CliError> {
    let text = match cfg.format {
        Format::Json => json(sym)?,
        Format::Csv => column_csv("value", sym.samples())?,
    };
    cfg.emit(&text)
}

fn emit_curve(cfg: &RunConfig, c: &RadChfCurve) -> Result<(), CliError> {
    let text = match cfg.format {
        Format::Json => json(c)?,
        Format::Csv => curve_csv(c)?,
    };
    cfg.emit(&text)
}

fn cmd_sample(cfg: &RunConfig, law: Law, a: f64, c: f64) -> Result<(), CliError> {
    let n = cfg.n_or(SAMPLE_N);
    let mut rng = cfg.rng();
    match law {
        Law::Sigma => {
            let m = sigma_sample(cfg.shape, n, &mut rng).map_err(usage)?;
            emit_measure(cfg, &m)
        }
        Law::RadPoisson => {
            let p = RadialPoissonParams::new(a, c).map_err(usage)?;
            let m = radial_poisson_sample(p, cfg.shape, n, &mut rng).map_err(usage)?;
            emit_measure(cfg, &m)
        }
        Law::Theta => {
            let v = ThetaDist::new(cfg.shape).sample(n, &mut rng);
            let sym = SymmetricSample::new(
                v,
                Provenance {
                    source: "theta".into(),
                    s: Some(cfg.shape.s()),
                },
            )
            .map_err(usage)?;
            emit_symmetric(cfg, &sym)
        }
    }
}

fn cmd_chf(cfg: &RunConfig, input: &Path) -> Result<(), CliError> {
    let m = load_measure(input)?;
    emit_curve(cfg, &rad_chf(&m, cfg.shape, &cfg.grid))
}

fn cmd_convolve(cfg: &RunConfig, mu: &Path, nu: &Path, mode: ConvolveMode) -> Result<(), CliError> {
    let mu = load_measure(mu)?;
    let nu = load_measure(nu)?;
    match mode {
        ConvolveMode::Sample => {
            let n = cfg.n_or(SAMPLE_N);
            let m = radial_sum_sample(&mu, &nu, cfg.shape, n, &mut cfg.rng()).map_err(usage)?;
            emit_measure(cfg, &m)
        }
        ConvolveMode::Chf => {
            let a = rad_chf(&mu, cfg.shape, &cfg.grid);
            let b = rad_chf(&nu, cfg.shape, &cfg.grid);
            emit_curve(cfg, &a.product(&b).map_err(usage)?)
        }
    }
}

fn cmd_tau(cfg: &RunConfig, input: &Path) -> Result<(), CliError> {
    let m = load_measure(input)?;
    let sym = tau_sample(&m, cfg.shape, cfg.n_or(SAMPLE_N), &mut cfg.rng()).map_err(usage)?;
    emit_symmetric(cfg, &sym)
}

#[derive(Serialize)]
struct Inconclusive {
    name: String,
    inconclusive: bool,
    reason: String,
}

fn report_csv(r: &VerifyReport) -> String {
    let mut s = String::from("t,deviation,allowance\n");
    for p in &r.per_point {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.deviation),
            fmt_f64(p.allowance)
        );
    }
    s
}

fn finish_report<T: Serialize>(
    cfg: &RunConfig,
    full: &T,
    report: &VerifyReport,
) -> Result<(), CliError> {
    let text = match cfg.format {
        Format::Json => json(full)?,
        Format::Csv => report_csv(report),
    };
    cfg.emit(&text)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{} failed: statistic {} exceeds threshold {}",
            report.name,
            fmt_f64(report.statistic),
            fmt_f64(report.threshold)
        )))
    }
}

fn cmd_verify(cfg: &RunConfig, v: &VerifyArgs) -> Result<(), CliError> {
    let control = if v.negative_control {
        Control::Corrupted
    } else {
        Control::Genuine
    };
    let verify_err = |e: VerifyError| match e {
        VerifyError::Inconclusive { .. } => CliError::Failed(e.to_string()),
        other => usage(other),
    };
    match v.which {
        Check::Homomorphism => {
            let load = |p: &Option<PathBuf>, default: f64| match p {
                Some(path) => load_measure(path),
                None => Measure::point_mass(default).map_err(usage),
            };
            let mu = load(&v.mu, 1.0)?;
            let nu = load(&v.nu, 2.0)?;
            let n = cfg.n_or(VERIFY_N);
            let r = verify_homomorphism_with(&mu, &nu, cfg.shape, n, cfg.seed, control)
                .map_err(verify_err)?;
            finish_report(cfg, &r, &r)
        }
        Check::CramerLevy => {
            let pair = if v.negative_control {
                ScalePair::unconstrained(CRAMER_LEVY_CONTROL.0, CRAMER_LEVY_CONTROL.1)
            } else {
                ScalePair::new(v.alpha, v.beta).map_err(usage)?
            };
            let r = verify_cramer_levy(pair, cfg.shape, cfg.n_or(VERIFY_N), cfg.seed)
                .map_err(verify_err)?;
            finish_report(cfg, &r, &r)
        }
        Check::Raikov => {
            let p =
                RadialPoissonParams::new(v.a.unwrap_or(1.8), v.c.unwrap_or(1.3)).map_err(usage)?;
            let n = cfg.n_or(RAIKOV_N);
            match verify_raikov_with(p, v.split, cfg.shape, n, cfg.seed, control) {
                Ok(r) => finish_raikov(cfg, &r),
                Err(e @ VerifyError::Inconclusive { .. }) => {
                    let body = Inconclusive {
                        name: "raikov".into(),
                        inconclusive: true,
                        reason: e.to_string(),
                    };
                    if cfg.format == Format::Json {
                        cfg.emit(&json(&body)?)?;
                    }
                    Err(CliError::Failed(e.to_string()))
                }
                Err(e) => Err(verify_err(e)),
            }
        }
        Check::Classical => {
            let p =
                RadialPoissonParams::new(v.a.unwrap_or(1.0), v.c.unwrap_or(1.0)).map_err(usage)?;
            let r = classical_reduction_check_with(p, &cfg.grid, control);
            finish_report(cfg, &r, &r)
        }
    }
}

fn finish_raikov(cfg: &RunConfig, r: &RaikovReport) -> Result<(), CliError> {
    if !r.gof_z_passed() {
        eprintln!(
            "kingman: gof of factor Z ({}) exceeds threshold {}",
            fmt_f64(r.fit_z.gof),
            fmt_f64(r.gof_threshold)
        );
    }
    if !r.gof_y_passed() {
        eprintln!(
            "kingman: gof of factor Y ({}) exceeds threshold {}",
            fmt_f64(r.fit_y.gof),
            fmt_f64(r.gof_threshold)
        );
    }
    finish_report(cfg, r, &r.report)
}

fn fit_csv(f: &RadialPoissonFit) -> String {
    format!(
        "a,c,gof,n\n{},{},{},{}\n",
        fmt_f64(f.a),
        fmt_f64(f.c),
        fmt_f64(f.gof),
        f.n
    )
}

fn cmd_fit(cfg: &RunConfig, input: &Path) -> Result<(), CliError> {
    let m = load_measure(input)?;
    let Measure::Empirical(e) = m else {
        return Err(usage("fit needs a sample (empirical) file"));
    };
    let fit = fit_radial_poisson(&e, cfg.shape).map_err(|e| CliError::Failed(e.to_string()))?;
    let text = match cfg.format {
        Format::Json => json(&fit)?,
        Format::Csv => fit_csv(&fit),
    };
    cfg.emit(&text)?;
    let threshold = gof_threshold(cfg.shape, fit.n);
    if fit.gof > threshold {
        return Err(CliError::Failed(format!(
            "gof {} exceeds threshold {}: sample is not radial Poisson",
            fmt_f64(fit.gof),
            fmt_f64(threshold)
        )));
    }
    Ok(())
}
