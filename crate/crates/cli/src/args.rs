use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kingman",
    version,
    about = "Kingman convolution: kernel evaluation, sampling, radial characteristic functions, fitting and verification",
    after_help = "Exit status: 0 success, 1 verification failure or fit error, 2 usage or input error."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Shape parameter s (>= -1/2).
    #[arg(
        long,
        global = true,
        default_value_t = 1.0,
        allow_negative_numbers = true
    )]
    pub s: f64,
    /// Seed of the random generator.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Sample size. Defaults to 10000 for sampling commands, 100000 for
    /// verify homomorphism and cramer-levy, 200000 for verify raikov.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Largest t of the evaluation grid.
    #[arg(long, global = true, default_value_t = 10.0)]
    pub t_max: f64,
    /// Number of grid points, including t = 0.
    #[arg(long, global = true, default_value_t = 40)]
    pub t_points: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate Λ_s at the given points.
    Kernel {
        #[arg(required = true, allow_negative_numbers = true)]
        x: Vec<f64>,
    },
    /// Draw samples from σ_s, a radial Poisson law, or θ_s.
    Sample {
        #[arg(value_enum)]
        law: Law,
        /// Rate of the radial Poisson law.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Jump radius of the radial Poisson law.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Radial characteristic function of a measure file on the grid.
    Chf { input: PathBuf },
    /// Kingman convolution of two measure files.
    Convolve {
        mu: PathBuf,
        nu: PathBuf,
        #[arg(long, value_enum, default_value_t = ConvolveMode::Sample)]
        mode: ConvolveMode,
    },
    /// Symmetric image τ_s of a measure file.
    Tau { input: PathBuf },
    /// Check a structural identity and write a report.
    Verify(VerifyArgs),
    /// Fit a radial Poisson law to a sample file.
    Fit { input: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Law {
    Sigma,
    RadPoisson,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConvolveMode {
    Sample,
    Chf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub which: Check,
    /// First factor for the homomorphism check (default: point mass at 1).
    #[arg(long)]
    pub mu: Option<PathBuf>,
    /// Second factor for the homomorphism check (default: point mass at 2).
    #[arg(long)]
    pub nu: Option<PathBuf>,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub alpha: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub beta: f64,
    /// Rate for raikov (default 1.8) and classical (default 1).
    #[arg(long)]
    pub a: Option<f64>,
    /// Jump radius for raikov (default 1.3) and classical (default 1).
    #[arg(long)]
    pub c: Option<f64>,
    /// Share of the rate given to the first factor in raikov.
    #[arg(long, default_value_t = 0.389)]
    pub split: f64,
    /// Run the built-in corrupted configuration, which must fail.
    #[arg(long)]
    pub negative_control: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Homomorphism,
    CramerLevy,
    Raikov,
    Classical,
}
