//! The `chawkes` command line: model validation, transforms, twists,
//! estimators and table reproduction.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 invalid model,
//! 3 numerical failure, 4 run cap exceeded. Failures also print a one-line
//! JSON record `{"error": reason, "message": ...}` on stderr.
//!
//! Components are numbered from 1 on the command line and in CSV output.

mod output;
mod reproduce;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use output::{fmt_float, RunManifest, Table};
pub use reproduce::{read_series, ReproduceTarget, MC_EXCEED_HORIZON_LIMIT, MC_RUIN_LEVEL_LIMIT};

use crate::estimate::{
    derive_seed, estimate_exceedance_is, estimate_exceedance_mc, estimate_ruin_is,
    estimate_ruin_mc, estimate_union, speedup_ratio, EstimateError, EstimatorResult, StoppingRule,
    UnionCombination, DEFAULT_MC_HORIZON_CAP,
};
use crate::model::{
    mean_drift, validate_net_profit, MarkRegime, ModelConfig, ModelError, ModelSpec,
};
use crate::numerics::NumericsConfig;
use crate::optimize::{dominant_point_partial, solve_theta_star, OptimizeError};
use crate::simulate::{simulate_hawkes, RunRng, SimError};
use crate::transforms::{domain_boundary, embed, limiting_cumulant_with_gradient, TransformError};
use crate::twist::{TwistError, TwistedModel};
use output::{estimator_row, estimator_table, failed_row, Sink};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MODEL: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_RUN_CAP: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "chawkes",
    version,
    about = "Rare-event simulation for compound Hawkes processes"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Model file (TOML, or JSON by extension). Defaults to the bundled
    /// bivariate random-marks model.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; mandatory for every command that simulates.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Target relative standard error.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; CSVs get a `.manifest.json` sidecar.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub max_runs: Option<u64>,
    /// Time cap for plain Monte Carlo ruin runs.
    #[arg(long, global = true)]
    pub horizon_cap: Option<f64>,
    /// Override a numerical tolerance, e.g. `--numerics newton_tol=1e-12`.
    #[arg(long = "numerics", global = true, value_name = "KEY=VALUE")]
    pub numerics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Is,
    Mc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Ruin,
    Exceed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConfigFormat {
    Toml,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check stability and the net profit condition.
    Validate,
    /// Evaluate Λ(θ) and ∇Λ(θ).
    Cumulant {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        theta: Vec<f64>,
    },
    /// Boundary point (ẑ, x̂) of the PGF domain in direction r.
    Boundary {
        #[arg(long, value_delimiter = ',', required = true)]
        direction: Vec<f64>,
    },
    /// Cramér root θ* of Ψ_i.
    ThetaStar {
        #[arg(long)]
        component: usize,
    },
    /// Dominant point and twist for {Z(t) ≥ a t}; `-` leaves a coordinate free.
    Twist {
        #[arg(long, value_delimiter = ',', required = true)]
        target: Vec<String>,
    },
    /// Print the twisted model as a config file.
    TwistModel {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        theta: Vec<f64>,
        #[arg(long, value_enum, default_value = "toml")]
        format: ConfigFormat,
    },
    /// Simulate one path on [0, horizon] and dump its events.
    Simulate {
        #[arg(long)]
        horizon: f64,
    },
    /// Ruin probability P(sup Y_i > u).
    Ruin {
        #[arg(long)]
        component: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        level: Vec<f64>,
        #[arg(long, value_enum, default_value = "is")]
        method: Method,
    },
    /// Exceedance probability P(Z(t) ≥ a t).
    Exceed {
        #[arg(long, value_delimiter = ',', required = true)]
        target: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        horizon: Vec<f64>,
        #[arg(long, value_enum, default_value = "is")]
        method: Method,
    },
    /// P(Z_1(t) ≥ a_1 t or Z_2(t) ≥ a_2 t).
    Union {
        #[arg(long, value_delimiter = ',', required = true)]
        target: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        horizon: Vec<f64>,
        /// Add the joint estimate instead of subtracting it.
        #[arg(long)]
        plain_sum: bool,
    },
    /// Monte Carlo vs importance sampling with the speedup ratio κ.
    Compare {
        #[arg(value_enum)]
        problem: Problem,
        #[arg(long, default_value_t = 1)]
        component: usize,
        /// Ruin levels.
        #[arg(long, value_delimiter = ',')]
        level: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        target: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        horizon: Vec<f64>,
    },
    /// Regenerate a results table or figure series as CSV.
    Reproduce {
        #[arg(value_enum)]
        target: ReproduceTarget,
        /// Model for the deterministic-marks columns (default: bundled).
        #[arg(long)]
        config_det: Option<PathBuf>,
        /// Override the default grid of levels or horizons.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        /// Exceedance target for table3 / fig3.
        #[arg(long = "target", value_delimiter = ',', default_value = "10,12")]
        exceed_target: Vec<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Cumulant { .. } => "cumulant",
            Command::Boundary { .. } => "boundary",
            Command::ThetaStar { .. } => "theta-star",
            Command::Twist { .. } => "twist",
            Command::TwistModel { .. } => "twist-model",
            Command::Simulate { .. } => "simulate",
            Command::Ruin { .. } => "ruin",
            Command::Exceed { .. } => "exceed",
            Command::Union { .. } => "union",
            Command::Compare { .. } => "compare",
            Command::Reproduce { .. } => "reproduce",
        }
    }

    fn needs_seed(&self) -> bool {
        !matches!(
            self,
            Command::Validate
                | Command::Cumulant { .. }
                | Command::Boundary { .. }
                | Command::ThetaStar { .. }
                | Command::Twist { .. }
                | Command::TwistModel { .. }
        )
    }
}

/// A failure with its exit code and machine-readable reason.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub reason: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            reason: "usage",
            message: message.into(),
        }
    }

    fn io(e: std::io::Error) -> Self {
        CliError {
            code: EXIT_USAGE,
            reason: "io",
            message: e.to_string(),
        }
    }

    fn csv(e: csv::Error) -> Self {
        CliError {
            code: EXIT_USAGE,
            reason: "io",
            message: e.to_string(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERICAL,
            reason: "numerical",
            message: message.into(),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let (code, reason) = match &e {
            ModelError::Parse(_) => (EXIT_USAGE, "parse"),
            ModelError::Unstable { .. } => (EXIT_MODEL, "unstable"),
            ModelError::NonConvergent { .. } => (EXIT_NUMERICAL, "numerical"),
            ModelError::IndexOutOfRange { .. } => (EXIT_USAGE, "usage"),
            _ => (EXIT_MODEL, "invalid_model"),
        };
        CliError {
            code,
            reason,
            message: e.to_string(),
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::InvalidInput(m) => CliError::usage(m),
            e => CliError::numerical(e.to_string()),
        }
    }
}

impl From<OptimizeError> for CliError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::Model(m) => m.into(),
            OptimizeError::NetProfitViolated { .. } => CliError {
                code: EXIT_MODEL,
                reason: "net_profit",
                message: e.to_string(),
            },
            OptimizeError::InfeasibleRareEvent { .. } | OptimizeError::InvalidInput(_) => {
                CliError::usage(e.to_string())
            }
            e => CliError::numerical(e.to_string()),
        }
    }
}

impl From<TwistError> for CliError {
    fn from(e: TwistError) -> Self {
        match e {
            TwistError::Model(m) => m.into(),
            e => CliError::numerical(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidInput(m) => CliError::usage(m),
            e => CliError::numerical(e.to_string()),
        }
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::Sim(e) => e.into(),
            EstimateError::Optimize(e) => e.into(),
            EstimateError::Twist(e) => e.into(),
            EstimateError::Transform(e) => e.into(),
            EstimateError::Model(e) => e.into(),
            EstimateError::MaxRunsExceeded(_) | EstimateError::NoHits(_) => CliError {
                code: EXIT_RUN_CAP,
                reason: "run_cap",
                message: e.to_string(),
            },
            EstimateError::NonRareSubEvent { .. } | EstimateError::InvalidInput(_) => {
                CliError::usage(e.to_string())
            }
            EstimateError::MissingTiming => CliError::numerical(e.to_string()),
        }
    }
}

/// Parse `args` (program name first) and run, writing results to `stdout`
/// and diagnostics to `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let argv: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, argv, stdout) {
        Ok(code) => code,
        Err(e) => {
            let record = json!({"error": e.reason, "message": e.message});
            let _ = writeln!(stderr, "{record}");
            e.code
        }
    }
}

/// Loaded model plus the bookkeeping every command shares.
struct Context<'a> {
    global: &'a GlobalArgs,
    argv: Vec<String>,
    subcommand: &'static str,
    numerics: NumericsConfig,
    started: Instant,
    started_unix: f64,
}

impl Context<'_> {
    fn load(&self, path: Option<&PathBuf>, default: MarkRegime) -> Result<ModelSpec, CliError> {
        let cfg = match path {
            Some(p) => ModelConfig::from_path(p)?,
            None => ModelConfig::from_toml_str(default.toml())?,
        };
        let base = cfg.numerics.unwrap_or_default();
        let numerics = apply_overrides(base, &self.global.numerics)?;
        Ok(ModelConfig {
            numerics: Some(numerics),
            ..cfg
        }
        .build()?)
    }

    fn model(&self) -> Result<ModelSpec, CliError> {
        self.load(self.global.config.as_ref(), MarkRegime::Random)
    }

    fn seed(&self) -> u64 {
        self.global.seed.expect("checked before dispatch")
    }

    fn rule(&self) -> StoppingRule {
        let mut rule = StoppingRule::with_epsilon(self.global.epsilon);
        if let Some(n) = self.global.max_runs {
            rule.max_runs = n;
            rule.min_runs = rule.min_runs.min(n);
        }
        rule
    }

    fn horizon_cap(&self) -> f64 {
        self.global.horizon_cap.unwrap_or(DEFAULT_MC_HORIZON_CAP)
    }

    fn manifest(&self) -> RunManifest {
        RunManifest {
            command: self.argv.clone(),
            subcommand: self.subcommand.into(),
            config: self.global.config.as_ref().map(|p| p.display().to_string()),
            numerics_overrides: self.global.numerics.clone(),
            numerics: self.numerics,
            seed: self.global.seed,
            epsilon: self.global.epsilon,
            max_runs: self.global.max_runs,
            horizon_cap: self.global.horizon_cap,
            threads: self.global.threads,
            output: String::new(),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Apply `KEY=VALUE` overrides to a numerics config.
pub fn apply_overrides(
    base: NumericsConfig,
    overrides: &[String],
) -> Result<NumericsConfig, CliError> {
    let mut value = serde_json::to_value(base).expect("numerics serialize");
    let map = value.as_object_mut().expect("numerics is a struct");
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("expected KEY=VALUE, got {item:?}")))?;
        let slot = map
            .get_mut(key.trim())
            .ok_or_else(|| CliError::usage(format!("unknown numerics key {key:?}")))?;
        let number: f64 = raw
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad number in {item:?}")))?;
        *slot = if slot.is_u64() {
            if number < 0.0 || number.fract() != 0.0 {
                return Err(CliError::usage(format!(
                    "{key} must be a non-negative integer"
                )));
            }
            json!(number as u64)
        } else {
            json!(number)
        };
    }
    serde_json::from_value(value).map_err(|e| CliError::usage(e.to_string()))
}

fn component_index(spec: &ModelSpec, one_based: usize) -> Result<usize, CliError> {
    if one_based == 0 || one_based > spec.dstar() {
        return Err(CliError::usage(format!(
            "component must be in 1..={}, got {one_based}",
            spec.dstar()
        )));
    }
    Ok(one_based - 1)
}

fn execute(cli: &Cli, argv: Vec<String>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    if !(cli.global.epsilon >= 0.0) {
        return Err(CliError::usage("--epsilon must be non-negative"));
    }
    if cli.command.needs_seed() && cli.global.seed.is_none() {
        return Err(CliError::usage(format!(
            "`{}` simulates and requires --seed",
            cli.command.name()
        )));
    }
    let numerics = apply_overrides(NumericsConfig::default(), &cli.global.numerics)?;
    let ctx = Context {
        global: &cli.global,
        argv,
        subcommand: cli.command.name(),
        numerics,
        started: Instant::now(),
        started_unix,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::usage(e.to_string()))?;
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| {
        let mut sink = Sink {
            out_dir: cli.global.out.clone(),
            stdout: &mut buf,
        };
        dispatch(&cli.command, &ctx, &mut sink)
    });
    stdout.write_all(&buf).map_err(CliError::io)?;
    result
}

fn dispatch(command: &Command, ctx: &Context, sink: &mut Sink) -> Result<i32, CliError> {
    match command {
        Command::Validate => cmd_validate(ctx, sink),
        Command::Cumulant { theta } => {
            let spec = ctx.model()?;
            if theta.len() != spec.dstar() {
                return Err(CliError::usage(format!(
                    "theta must have {} entries",
                    spec.dstar()
                )));
            }
            let eval = limiting_cumulant_with_gradient(&spec, theta);
            sink.json(
                "cumulant",
                &json!({
                    "theta": eval.theta,
                    "value": eval.in_domain.then_some(eval.value),
                    "gradient": eval.gradient,
                    "in_domain": eval.in_domain,
                }),
            )?;
            Ok(EXIT_OK)
        }
        Command::Boundary { direction } => {
            let spec = ctx.model()?;
            let b = domain_boundary(&spec, direction)?;
            sink.json(
                "boundary",
                &json!({
                    "r": b.r,
                    "z_hat": b.z_hat,
                    "x_hat": b.x_hat,
                    "fixed_point_residual": b.fixed_point_residual,
                    "eigen_residual": b.eigen_residual,
                }),
            )?;
            Ok(EXIT_OK)
        }
        Command::ThetaStar { component } => {
            let spec = ctx.model()?;
            let i = component_index(&spec, *component)?;
            let t = solve_theta_star(&spec, i)?;
            sink.json(
                "theta_star",
                &json!({
                    "theta": embed(spec.dstar(), i, t),
                    "rate": t,
                    "active_set": [component],
                }),
            )?;
            Ok(EXIT_OK)
        }
        Command::Twist { target } => {
            let spec = ctx.model()?;
            let thresholds = parse_thresholds(target)?;
            if thresholds.len() != spec.dstar() {
                return Err(CliError::usage(format!(
                    "target must have {} entries",
                    spec.dstar()
                )));
            }
            let sol = dominant_point_partial(&spec, &thresholds)?;
            sink.json(
                "twist",
                &json!({
                    "theta": sol.theta,
                    "rate": sol.rate,
                    "active_set": sol.active_set.iter().map(|k| k + 1).collect::<Vec<_>>(),
                    "dominant_point": sol.target,
                }),
            )?;
            Ok(EXIT_OK)
        }
        Command::TwistModel { theta, format } => {
            let spec = ctx.model()?;
            if theta.len() != spec.dstar() {
                return Err(CliError::usage(format!(
                    "theta must have {} entries",
                    spec.dstar()
                )));
            }
            let q = TwistedModel::build(&spec, theta)?;
            let cfg = ModelConfig::from_spec(&q.base);
            match format {
                ConfigFormat::Toml => sink.text("twist_model.toml", &cfg.to_toml_string())?,
                ConfigFormat::Json => {
                    sink.text("twist_model.json", &(cfg.to_json_string() + "\n"))?
                }
            }
            Ok(EXIT_OK)
        }
        Command::Simulate { horizon } => {
            let spec = ctx.model()?;
            let mut rng = RunRng::new(ctx.seed(), 0);
            let path = simulate_hawkes(&spec, *horizon, &mut rng)?;
            let mut buf = Vec::new();
            path.write_csv(&mut buf).map_err(CliError::csv)?;
            sink.text("events.csv", &String::from_utf8_lossy(&buf))?;
            Ok(EXIT_OK)
        }
        Command::Ruin {
            component,
            level,
            method,
        } => {
            let spec = ctx.model()?;
            let i = component_index(&spec, *component)?;
            let mut table = estimator_table(false);
            let mut code = EXIT_OK;
            for (row, &u) in level.iter().enumerate() {
                let seed = row_seed(ctx.seed(), row);
                if matches!(method, Method::Is | Method::Both) {
                    let r = estimate_ruin_is(&spec, i, u, &ctx.rule(), seed);
                    code = code.max(record(&mut table, r, "is", u, true)?);
                }
                if matches!(method, Method::Mc | Method::Both) {
                    let r = estimate_ruin_mc(&spec, i, u, &ctx.rule(), ctx.horizon_cap(), seed);
                    code = code.max(record(&mut table, r, "mc", u, false)?);
                }
            }
            sink.csv("ruin", &table, &ctx.manifest())?;
            Ok(code)
        }
        Command::Exceed {
            target,
            horizon,
            method,
        } => {
            let spec = ctx.model()?;
            let mut table = estimator_table(false);
            let mut code = EXIT_OK;
            for (row, &t) in horizon.iter().enumerate() {
                let seed = row_seed(ctx.seed(), row);
                if matches!(method, Method::Is | Method::Both) {
                    let r = estimate_exceedance_is(&spec, target, t, &ctx.rule(), seed);
                    code = code.max(record(&mut table, r, "is", t, false)?);
                }
                if matches!(method, Method::Mc | Method::Both) {
                    let r = estimate_exceedance_mc(&spec, target, t, &ctx.rule(), seed);
                    code = code.max(record(&mut table, r, "mc", t, false)?);
                }
            }
            sink.csv("exceed", &table, &ctx.manifest())?;
            Ok(code)
        }
        Command::Union {
            target,
            horizon,
            plain_sum,
        } => {
            let spec = ctx.model()?;
            let combination = if *plain_sum {
                UnionCombination::PlainSum
            } else {
                UnionCombination::InclusionExclusion
            };
            let mut table = estimator_table(false);
            let mut code = EXIT_OK;
            for (row, &t) in horizon.iter().enumerate() {
                let r = estimate_union(
                    &spec,
                    target,
                    t,
                    &ctx.rule(),
                    row_seed(ctx.seed(), row),
                    combination,
                )
                .map(|u| u.as_result());
                code = code.max(record(&mut table, r, "is-union", t, false)?);
            }
            sink.csv("union", &table, &ctx.manifest())?;
            Ok(code)
        }
        Command::Compare {
            problem,
            component,
            level,
            target,
            horizon,
        } => cmd_compare(ctx, sink, *problem, *component, level, target, horizon),
        Command::Reproduce {
            target,
            config_det,
            grid,
            exceed_target,
        } => reproduce::run(ctx, sink, *target, config_det.as_ref(), grid, exceed_target),
    }
}

fn parse_thresholds(items: &[String]) -> Result<Vec<Option<f64>>, CliError> {
    items
        .iter()
        .map(|s| match s.trim() {
            "-" | "" => Ok(None),
            v => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::usage(format!("bad target entry {s:?}"))),
        })
        .collect()
}

/// Independent master seed per output row.
fn row_seed(seed: u64, row: usize) -> u64 {
    derive_seed(seed, 0x100 + row as u64)
}

/// Append an estimator outcome as a row; run-cap failures keep their partial
/// estimate. Returns the row's exit code.
fn record(
    table: &mut Table,
    result: Result<EstimatorResult, EstimateError>,
    method: &str,
    level: f64,
    lundberg: bool,
) -> Result<i32, CliError> {
    match result {
        Ok(r) => {
            table.push(estimator_row(&r, level, lundberg, "ok"));
            Ok(EXIT_OK)
        }
        Err(EstimateError::MaxRunsExceeded(r)) => {
            table.push(estimator_row(&r, level, lundberg, "max_runs_exceeded"));
            Ok(EXIT_RUN_CAP)
        }
        Err(EstimateError::NoHits(r)) => {
            table.push(estimator_row(&r, level, lundberg, "no_hits"));
            Ok(EXIT_RUN_CAP)
        }
        Err(e) => {
            let e = CliError::from(e);
            if e.code == EXIT_NUMERICAL {
                table.push(failed_row(method, level, e.reason));
                Ok(EXIT_NUMERICAL)
            } else {
                Err(e)
            }
        }
    }
}

fn cmd_validate(ctx: &Context, sink: &mut Sink) -> Result<i32, CliError> {
    let spec = match ctx.model() {
        Ok(spec) => spec,
        Err(e) if e.code == EXIT_MODEL => {
            let rho = match ctx
                .global
                .config
                .as_ref()
                .map(ModelConfig::from_path)
                .unwrap_or_else(|| ModelConfig::from_toml_str(MarkRegime::Random.toml()))
                .and_then(|c| c.build())
            {
                Err(ModelError::Unstable { rho }) => Some(rho),
                _ => None,
            };
            sink.json(
                "validate",
                &json!({"status": "invalid", "reason": e.reason, "message": e.message, "rho": rho}),
            )?;
            return Err(e);
        }
        Err(e) => return Err(e),
    };
    let drift = mean_drift(&spec)?;
    let net_profit = (0..spec.dstar())
        .map(|i| validate_net_profit(&spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    let ok = net_profit.iter().all(|b| *b);
    sink.json(
        "validate",
        &json!({
            "status": if ok { "ok" } else { "invalid" },
            "reason": if ok { None } else { Some("net_profit") },
            "rho": crate::model::validate_stability(&spec)?,
            "drift": drift,
            "premium": spec.premium(),
            "net_profit": net_profit,
            "stationary_rates": spec.stationary_rates()?,
        }),
    )?;
    if ok {
        Ok(EXIT_OK)
    } else {
        Err(CliError {
            code: EXIT_MODEL,
            reason: "net_profit",
            message: "premium does not exceed the drift for every component".into(),
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    ctx: &Context,
    sink: &mut Sink,
    problem: Problem,
    component: usize,
    level: &[f64],
    target: &[f64],
    horizon: &[f64],
) -> Result<i32, CliError> {
    let spec = ctx.model()?;
    let mut table = estimator_table(true);
    let mut code = EXIT_OK;
    let points = match problem {
        Problem::Ruin if level.is_empty() => {
            return Err(CliError::usage("compare ruin needs --level"))
        }
        Problem::Exceed if target.is_empty() || horizon.is_empty() => {
            return Err(CliError::usage(
                "compare exceed needs --target and --horizon",
            ))
        }
        Problem::Ruin => level,
        Problem::Exceed => horizon,
    };
    for (row, &x) in points.iter().enumerate() {
        let seed = row_seed(ctx.seed(), row);
        let (is_, mc, lundberg) = match problem {
            Problem::Ruin => {
                let i = component_index(&spec, component)?;
                (
                    estimate_ruin_is(&spec, i, x, &ctx.rule(), seed),
                    estimate_ruin_mc(&spec, i, x, &ctx.rule(), ctx.horizon_cap(), seed),
                    true,
                )
            }
            Problem::Exceed => (
                estimate_exceedance_is(&spec, target, x, &ctx.rule(), seed),
                estimate_exceedance_mc(&spec, target, x, &ctx.rule(), seed),
                false,
            ),
        };
        let kappa = match (&is_, &mc) {
            (Ok(a), Ok(b)) => speedup_ratio(b, a)
                .map(fmt_float)
                .unwrap_or_else(|_| "n/a".into()),
            _ => "n/a".into(),
        };
        let start = table.rows.len();
        code = code.max(record(&mut table, mc, "mc", x, false)?);
        code = code.max(record(&mut table, is_, "is", x, lundberg)?);
        for r in &mut table.rows[start..] {
            r.push(kappa.clone());
        }
    }
    sink.csv("compare", &table, &ctx.manifest())?;
    Ok(code)
}
