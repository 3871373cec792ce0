//! The `ldproj` command line.
//!
//! Exit codes: 0 success, 1 failed verification verdict, 2 usage or input
//! error, 3 numerical non-convergence. Every failure also prints one line
//! `error[<kind>]: <message>` to standard error.

mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

pub use config::{
    BracketPoint, CheckBoundsParams, GridSpec, OracleParams, OracleWhat, RateParams, RunConfig, SampleParams,
    VerifyLdpParams, VerifyRepresentationParams,
};

use crate::error::Error;
use crate::io::write_atomic;
use crate::rates::{moment_audit, RateCurve, RateQuery};
use crate::sampling::{check_dimensions, Method, PExponent, Quantity, QuantityConfig, SampleBatch};
use crate::verify::{
    check_gaussian_bracket, check_representation, check_tail_bracket, exact_v1_interval_probability,
    exact_v_interval_probability, ln_exact_v1_interval_probability, ln_exact_v_interval_probability,
    oracle_quadrature, run_ldp_convergence, BracketKind, Interval, LdpConfig, DEFAULT_ALPHA, DEFAULT_LEVEL,
};

/// Environment variable replacing the default worker count.
pub const WORKERS_ENV: &str = "LDPROJ_WORKERS";

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0;

/// Draws per method of `verify-representation` when `--trials` is absent.
pub const DEFAULT_REPRESENTATION_TRIALS: usize = 200_000;

#[derive(Parser, Debug)]
#[command(name = "ldproj", version, about = "Random projections of l_p^n-balls: sampling, rate functions and LDP checks")]
struct Cli {
    /// JSON file `{"command": ..., "parameters": {...}}`; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a batch of a quantity.
    Sample(SampleParams),
    /// Tabulate a rate function.
    Rate(RateParams),
    /// Compare empirical and theoretical rates along a dimension schedule.
    VerifyLdp(VerifyLdpParams),
    /// KS test of direct against product sampling.
    VerifyRepresentation(VerifyRepresentationParams),
    /// Exact reference values.
    Oracle(OracleParams),
    /// Check the analytic tail brackets against quadrature.
    CheckBounds(CheckBoundsParams),
}

impl Command {
    fn into_config(self) -> RunConfig {
        match self {
            Command::Sample(p) => RunConfig::Sample(p),
            Command::Rate(p) => RunConfig::Rate(p),
            Command::VerifyLdp(p) => RunConfig::VerifyLdp(p),
            Command::VerifyRepresentation(p) => RunConfig::VerifyRepresentation(p),
            Command::Oracle(p) => RunConfig::Oracle(p),
            Command::CheckBounds(p) => RunConfig::CheckBounds(p),
        }
    }
}

/// Failure of a CLI run.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(Error::NonConvergence { .. }) => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Run(e) => match e {
                Error::Domain(_) => "domain",
                Error::Precondition(_) => "precondition",
                Error::UnsupportedRegime(_) => "unsupported_regime",
                Error::NonConvergence { .. } => "non_convergence",
                Error::Io(_) => "io",
                Error::Format(_) => "format",
            },
        }
    }

    /// `error[<kind>]: <message>` on one line.
    pub fn reason(&self) -> String {
        let msg = match self {
            CliError::Usage(m) => m.clone(),
            CliError::Run(e) => e.to_string(),
        };
        format!("error[{}]: {}", self.kind(), msg.split_whitespace().collect::<Vec<_>>().join(" "))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Result of a successful run: whether its verdict (if any) held.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Done,
    VerdictPassed,
    VerdictFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::VerdictFailed => 1,
            _ => 0,
        }
    }

    fn from_verdict(ok: bool) -> Self {
        if ok {
            Outcome::VerdictPassed
        } else {
            Outcome::VerdictFailed
        }
    }
}

/// Parses the arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return report(&usage(first.trim_start_matches("error: ")));
        }
    };
    match config_from_cli(cli).and_then(|cfg| execute(&cfg)) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> i32 {
    eprintln!("{}", e.reason());
    e.exit_code()
}

/// Builds a validated [`RunConfig`] from command-line arguments.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let text = e.to_string();
        usage(text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "))
    })?;
    config_from_cli(cli)
}

fn config_from_cli(cli: Cli) -> Result<RunConfig, CliError> {
    let from_flags = cli.command.map(Command::into_config);
    let cfg = match (cli.config, from_flags) {
        (None, None) => return Err(usage("no command given (see --help)")),
        (None, Some(cfg)) => cfg,
        (Some(path), flags) => merge_with_file(&path, flags)?,
    };
    validate(&cfg)?;
    Ok(cfg)
}

/// Overlays the non-null flag values on the file's parameters.
fn merge_with_file(path: &Path, flags: Option<RunConfig>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| usage(format!("config {}: {e}", path.display()));
    let file: Value = serde_json::from_str(&text).map_err(bad)?;
    // Parse the file alone first so unknown keys are reported against it.
    let from_file: RunConfig = serde_json::from_value(file.clone()).map_err(bad)?;
    let Some(flags) = flags else {
        return Ok(from_file);
    };
    if flags.command() != from_file.command() {
        return Err(usage(format!(
            "config {} is for `{}`, not `{}`",
            path.display(),
            from_file.command(),
            flags.command()
        )));
    }
    let mut params = match file.get("parameters") {
        Some(Value::Object(m)) => m.clone(),
        _ => Map::new(),
    };
    let flag_value = serde_json::to_value(&flags).map_err(|e| usage(e.to_string()))?;
    if let Some(Value::Object(m)) = flag_value.get("parameters") {
        for (key, v) in m {
            if !v.is_null() {
                params.insert(key.clone(), v.clone());
            }
        }
    }
    let merged = serde_json::json!({ "command": flags.command(), "parameters": params });
    serde_json::from_value(merged).map_err(|e| usage(e.to_string()))
}

fn required<T: Clone>(v: &Option<T>, key: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| usage(format!("missing required parameter `{key}`")))
}

fn workers(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(w) = flag {
        return if w == 0 { Err(usage("`workers` must be >= 1")) } else { Ok(w) };
    }
    if let Ok(s) = std::env::var(WORKERS_ENV) {
        return match s.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Ok(w),
            _ => Err(usage(format!("{WORKERS_ENV}={s:?} is not a positive integer"))),
        };
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn check_positive(v: Option<usize>, key: &str) -> Result<(), CliError> {
    match v {
        Some(0) => Err(usage(format!("`{key}` must be >= 1"))),
        _ => Ok(()),
    }
}

fn check_probability(v: Option<f64>, key: &str) -> Result<(), CliError> {
    match v {
        Some(a) if !(a > 0.0 && a < 1.0) => Err(usage(format!("`{key}` must lie in (0,1), got {a}"))),
        _ => Ok(()),
    }
}

/// Whether the quantity depends on `p`.
fn quantity_needs_p(q: Quantity) -> bool {
    matches!(q, Quantity::ScaledNorm | Quantity::FactorW | Quantity::MeanZ2 | Quantity::MeanZp)
}

fn sample_config(p: &SampleParams) -> Result<QuantityConfig, CliError> {
    let quantity = p.quantity.unwrap_or(Quantity::ScaledNorm);
    let n = required(&p.n, "n")?;
    let k = if quantity.needs_k() { required(&p.k, "k")? } else { p.k.unwrap_or(1) };
    let exponent = if quantity_needs_p(quantity) {
        required(&p.p, "p")?
    } else {
        p.p.unwrap_or(PExponent::Finite(2.0))
    };
    let cfg = QuantityConfig {
        quantity,
        n,
        k,
        p: exponent,
        method: p.method.unwrap_or(Method::Product),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn ldp_config(p: &VerifyLdpParams) -> Result<LdpConfig, CliError> {
    let mut cfg = LdpConfig::new(required(&p.rate, "rate")?, p.p, p.lambda, required(&p.interval, "interval")?);
    if let Some(s) = &p.n_schedule {
        cfg.n_schedule = s.clone();
    }
    if let Some(t) = p.trials {
        cfg.trials = t;
    }
    cfg.seed = p.seed.unwrap_or(DEFAULT_SEED);
    cfg.use_exact_oracle = p.exact.unwrap_or(false);
    if let Some(t) = p.tolerance {
        cfg.tolerance = t;
    }
    if let Some(m) = p.method {
        cfg.method = m;
    }
    cfg.level = p.level.unwrap_or(DEFAULT_LEVEL);
    cfg.rule = p.rule;
    Ok(cfg)
}

/// Checks everything that can be checked without doing the work.
pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg {
        RunConfig::Sample(p) => {
            sample_config(p)?;
            required(&p.trials, "trials")?;
            check_positive(p.trials, "trials")?;
            check_positive(p.workers, "workers")?;
        }
        RunConfig::Rate(p) => {
            let name = required(&p.name, "name")?;
            RateQuery { name, p: p.p, lambda: p.lambda, y: 0.0 }.validate()?;
            required(&p.grid, "grid")?.linear()?;
            check_positive(p.workers, "workers")?;
        }
        RunConfig::VerifyLdp(p) => {
            let cfg = ldp_config(p)?;
            RateQuery { name: cfg.rate_name, p: cfg.p, lambda: cfg.lambda, y: 0.0 }.validate()?;
            if cfg.n_schedule.is_empty() || cfg.n_schedule.iter().any(|&n| n < 2) {
                return Err(usage("`n_schedule` needs at least one n >= 2"));
            }
            if !(cfg.tolerance > 0.0) {
                return Err(usage(format!("`tolerance` must be positive, got {}", cfg.tolerance)));
            }
            check_positive(p.trials, "trials")?;
            check_positive(p.workers, "workers")?;
            check_probability(p.level, "level")?;
            if let Some(rule) = &p.rule {
                rule.validate()?;
            }
        }
        RunConfig::VerifyRepresentation(p) => {
            check_dimensions(required(&p.n, "n")?, required(&p.k, "k")?)?;
            required(&p.p, "p")?;
            check_positive(p.trials, "trials")?;
            check_positive(p.workers, "workers")?;
            check_probability(p.alpha, "alpha")?;
        }
        RunConfig::Oracle(p) => match required(&p.what, "what")? {
            OracleWhat::MomentM => {
                required(&p.p, "p")?.require_finite()?;
            }
            OracleWhat::V | OracleWhat::V1 => {
                check_dimensions(required(&p.n, "n")?, required(&p.k, "k")?)?;
                required(&p.interval, "interval")?;
            }
        },
        RunConfig::CheckBounds(p) => match p.kind.unwrap_or(BracketKind::Z2Tail) {
            BracketKind::Z2Tail => {
                required(&p.p, "p")?;
                required(&p.t_grid, "t_grid")?;
            }
            BracketKind::GaussianIntegral => {
                if required(&p.points, "points")?.is_empty() {
                    return Err(usage("`points` must not be empty"));
                }
            }
        },
    }
    Ok(())
}

/// Writes `bytes` to `out`, or to standard output when `out` is absent.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, bytes).map_err(|e| CliError::Run(e.into())),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::Run(e.into())),
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Run(e.into()))? + "\n";
    emit(out, text.as_bytes())
}

#[derive(Serialize)]
struct ProbabilityOracle {
    what: OracleWhat,
    n: usize,
    k: usize,
    interval: Interval,
    probability: f64,
    ln_probability: f64,
}

/// Runs a validated configuration.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    validate(cfg)?;
    match cfg {
        RunConfig::Sample(p) => {
            let qcfg = sample_config(p)?;
            let batch = SampleBatch::generate(
                &qcfg,
                p.seed.unwrap_or(DEFAULT_SEED),
                required(&p.trials, "trials")?,
                workers(p.workers)?,
            )?;
            match &p.out {
                Some(path) => batch.write(path)?,
                None => emit(None, batch.to_csv().as_bytes())?,
            }
            Ok(Outcome::Done)
        }
        RunConfig::Rate(p) => {
            let name = required(&p.name, "name")?;
            let ys = required(&p.grid, "grid")?.linear()?;
            let rate_cfg = p.rate_config.unwrap_or_default();
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers(p.workers)?)
                .build()
                .map_err(|e| CliError::Run(Error::Precondition(format!("cannot start worker pool: {e}"))))?;
            let curve = pool.install(|| RateCurve::compute(name, p.p, p.lambda, &ys, &rate_cfg))?;
            match &p.out {
                Some(path) => curve.write(path)?,
                None => emit(None, curve.to_csv().as_bytes())?,
            }
            Ok(Outcome::Done)
        }
        RunConfig::VerifyLdp(p) => {
            let mut cfg = ldp_config(p)?;
            cfg.workers = workers(p.workers)?;
            let report = run_ldp_convergence(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            match &p.out {
                Some(path) => report.write(path)?,
                None => emit_json(None, &report)?,
            }
            Ok(Outcome::from_verdict(report.verdict))
        }
        RunConfig::VerifyRepresentation(p) => {
            let report = check_representation(
                required(&p.n, "n")?,
                required(&p.k, "k")?,
                required(&p.p, "p")?,
                p.trials.unwrap_or(DEFAULT_REPRESENTATION_TRIALS),
                p.seed.unwrap_or(DEFAULT_SEED),
                workers(p.workers)?,
                p.alpha.unwrap_or(DEFAULT_ALPHA),
            )?;
            match &p.out {
                Some(path) => report.write(path)?,
                None => emit_json(None, &report)?,
            }
            Ok(Outcome::from_verdict(report.passed))
        }
        RunConfig::Oracle(p) => {
            let out = p.out.as_deref();
            match required(&p.what, "what")? {
                OracleWhat::MomentM => emit_json(out, &moment_audit(required(&p.p, "p")?)?)?,
                what => {
                    let (n, k) = (required(&p.n, "n")?, required(&p.k, "k")?);
                    let interval = required(&p.interval, "interval")?;
                    let (a, b) = (interval.lo(), interval.hi_f64());
                    let q = oracle_quadrature();
                    let (probability, ln_probability) = if what == OracleWhat::V {
                        (exact_v_interval_probability(n, k, a, b)?, ln_exact_v_interval_probability(n, k, a, b)?)
                    } else {
                        (
                            exact_v1_interval_probability(n, k, a, b, &q)?,
                            ln_exact_v1_interval_probability(n, k, a, b, &q)?,
                        )
                    };
                    emit_json(out, &ProbabilityOracle { what, n, k, interval, probability, ln_probability })?;
                }
            }
            Ok(Outcome::Done)
        }
        RunConfig::CheckBounds(p) => {
            let report = match p.kind.unwrap_or(BracketKind::Z2Tail) {
                BracketKind::Z2Tail => {
                    let spec = required(&p.t_grid, "t_grid")?;
                    let grid = if p.log_grid.unwrap_or(false) { spec.logarithmic()? } else { spec.linear()? };
                    check_tail_bracket(required(&p.p, "p")?, &grid)?
                }
                BracketKind::GaussianIntegral => {
                    let points: Vec<(u32, f64)> =
                        required(&p.points, "points")?.iter().map(|b| (b.k, b.t)).collect();
                    check_gaussian_bracket(&points)?
                }
            };
            emit_json(p.out.as_deref(), &report)?;
            Ok(Outcome::from_verdict(report.all_inside()))
        }
    }
}
