//! Command-line experiment runner for `gidlab`.
//!
//! Every subcommand prints an [`ExperimentReport`] as JSON on stdout (and to
//! `--report` if given) and exits 0 when the checked property holds, 1 when
//! it is violated and 2 on invalid input or I/O failure.

mod experiments;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gidlab::distributions::DistributionSpec;

pub use report::{emit_report, ExperimentReport, Verdict};

pub const SEED_ENV: &str = "GIDLAB_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "gidlab", version, about = "Seeded experiments on geometrically infinitely divisible laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw samples from a family and compare the empirical transform with the closed form.
    Sample(SampleArgs),
    /// Numerical GID check: ψ(0) = 0 and ψ' completely monotone.
    VerifyGid(VerifyGidArgs),
    /// Compound-then-scale fixed point, in transform and in distribution.
    VerifyEq1(VerifyEq1Args),
    /// Renewal equation with Mittag-Leffler inputs against the exact solution.
    SolveRenewal(SolveRenewalArgs),
    /// p-thinning of a renewal process.
    Thin(ThinArgs),
    /// Superposition of the two thinned sub-processes.
    Superpose(ThinArgs),
    /// Thinned Mittag-Leffler renewal processes are rescaled Mittag-Leffler.
    Thm31(ThinningArgs),
    /// Thinned inter-arrivals are of the same type as the original ones.
    Thm32(ThinningArgs),
    /// Thinned inter-arrivals show no lag-1 dependence.
    Thm33(ThinningArgs),
    /// GID witnesses from simple random walks.
    Feller(FellerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Exponential,
    Gamma,
    Stable,
    Ml,
    Linnik,
    #[value(alias = "two-param")]
    TwoParamMl,
    SemiMl,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// RNG seed; falls back to $GIDLAB_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV artifact path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyParams {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long = "grid-min", default_value_t = 1e-3)]
    pub grid_min: f64,
    #[arg(long = "grid-max", default_value_t = 10.0)]
    pub grid_max: f64,
    #[arg(long = "grid-points", default_value_t = 200)]
    pub grid_points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub dist: Family,
    #[command(flatten)]
    pub params: FamilyParams,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyGidArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[command(flatten)]
    pub params: FamilyParams,
    /// Scale ratio of the semi-ML candidate.
    #[arg(long)]
    pub b: Option<f64>,
    /// Also check the geometric compound with this p.
    #[arg(long)]
    pub p: Option<f64>,
    /// Highest difference order of the monotonicity check.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyEq1Args {
    #[arg(long, value_enum, default_value = "ml")]
    pub dist: Family,
    #[command(flatten)]
    pub params: FamilyParams,
    #[arg(long)]
    pub p: f64,
    /// Defaults to p^{1/α}.
    #[arg(long)]
    pub b: Option<f64>,
    /// Sample size of the distributional check.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 60)]
    pub iters: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SolveRenewalArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    #[arg(long, default_value_t = 5.0)]
    pub horizon: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ThinArgs {
    #[arg(long, value_enum, default_value = "ml")]
    pub dist: Family,
    #[command(flatten)]
    pub params: FamilyParams,
    #[arg(long)]
    pub p: f64,
    /// Number of renewal events; ignored when --horizon is set.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Simulate on [0, horizon] instead of a fixed event count.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ThinningArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    #[value(name = "4.1")]
    FirstReturn,
    #[value(name = "4.2")]
    ReturnTransform,
    #[value(name = "4.3")]
    ExcursionTransform,
}

#[derive(Debug, Clone, Args)]
pub struct FellerArgs {
    #[arg(long, value_enum)]
    pub example: Example,
    /// Up-step probability of the walk.
    #[arg(long)]
    pub p: f64,
    /// Truncation length of the sequences.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, parameters outside a family's range, or I/O failure.
    Input(String),
    /// A numerical routine broke down; the property could not be checked.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<gidlab::Error> for CliError {
    fn from(e: gidlab::Error) -> Self {
        match e {
            gidlab::Error::NonFinite { .. } | gidlab::Error::Divergence { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("I/O: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn build_spec(family: Family, params: &FamilyParams, b: Option<f64>) -> CliResult<DistributionSpec> {
    let need = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| CliError::Input(format!("--{name} is required for {family:?}")))
    };
    let spec = match family {
        Family::Exponential => DistributionSpec::exponential(1.0 / params.scale)?,
        Family::Gamma => DistributionSpec::gamma_exponent(need("alpha", params.alpha)?)?,
        Family::Stable => DistributionSpec::positive_stable(need("alpha", params.alpha)?)?,
        Family::Ml => DistributionSpec::mittag_leffler(need("alpha", params.alpha)?, params.scale)?,
        Family::Linnik => DistributionSpec::linnik(need("alpha", params.alpha)?, params.scale)?,
        Family::TwoParamMl => {
            DistributionSpec::two_param_ml(need("alpha", params.alpha)?, need("beta", params.beta)?)?
        }
        Family::SemiMl => DistributionSpec::semi_ml_candidate(
            need("alpha", params.alpha)?,
            need("eps", params.eps)?,
            need("b", b)?,
        )?,
    };
    Ok(spec)
}

fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn common_of(cmd: &Command) -> &Common {
    match cmd {
        Command::Sample(a) => &a.common,
        Command::VerifyGid(a) => &a.common,
        Command::VerifyEq1(a) => &a.common,
        Command::SolveRenewal(a) => &a.common,
        Command::Thin(a) | Command::Superpose(a) => &a.common,
        Command::Thm31(a) | Command::Thm32(a) | Command::Thm33(a) => &a.common,
        Command::Feller(a) => &a.common,
    }
}

/// Runs an already parsed command and returns its report.
pub fn execute(cmd: &Command) -> CliResult<ExperimentReport> {
    let common = common_of(cmd);
    let seed = resolve_seed(common.seed)?;
    let start = Instant::now();
    let outcome = match cmd {
        Command::Sample(a) => experiments::sample(a, seed)?,
        Command::VerifyGid(a) => experiments::verify_gid(a)?,
        Command::VerifyEq1(a) => experiments::verify_eq1(a, seed)?,
        Command::SolveRenewal(a) => experiments::solve_renewal(a)?,
        Command::Thin(a) => experiments::thin(a, seed)?,
        Command::Superpose(a) => experiments::superpose(a, seed)?,
        Command::Thm31(a) => experiments::thm31(a, seed)?,
        Command::Thm32(a) => experiments::thm32(a, seed)?,
        Command::Thm33(a) => experiments::thm33(a, seed)?,
        Command::Feller(a) => experiments::feller(a)?,
    };
    let report = ExperimentReport {
        experiment: outcome.name.to_string(),
        parameters: outcome.parameters,
        metrics: outcome.metrics,
        verdict: Verdict::from_pass(outcome.pass),
        seed,
        runtime_seconds: start.elapsed().as_secs_f64(),
        artifacts: outcome
            .artifacts
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
    };
    if let Some(path) = &common.report {
        emit_report(&report, path)?;
    }
    Ok(report)
}

/// Parses `argv` (program name first), runs the command, prints the report
/// on stdout and diagnostics on stderr, and returns the exit code.
pub fn run<I, T>(argv: I) -> (i32, Option<ExperimentReport>)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return (code, None);
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            // a closed stdout (e.g. piped into `head`) is not a failure of the run
            let _ = writeln!(std::io::stdout(), "{}", report.to_json());
            (report.verdict.exit_code(), Some(report))
        }
        Err(e) => {
            eprintln!("gidlab: {e}");
            (e.exit_code(), None)
        }
    }
}
