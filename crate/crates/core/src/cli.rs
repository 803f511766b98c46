//! Command-line front end.
//!
//! Every subcommand resolves its parameters from command-line flags, then
//! the `params` object of a JSON config (`--config`), then built-in
//! defaults, and writes the resolved config to `resolved_config.json` in
//! the output directory next to its results.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::certificates::{
    binomial_param_compare, cim_check, default_lambda_grid, epsilon_max, nbound_margin, NBOUND_TOL,
};
use crate::dist::Pmf;
use crate::operator::{iterate, verify_bootstrap, StarParams};
use crate::output::{batch_csv_row, write_trial_record, BATCH_CSV_HEADER};
use crate::sim::{
    cover_time, critical_search, dominance_experiment, run_batch_with, FrogLaw, ProxySettings, SimConfig, Variant,
};
use crate::transience::{supermartingale_check, TransienceSettings};

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "FROGTREE_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "frogtree-out";
pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.json";

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid input, failed preconditions and negative verification results.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for I/O and other internal errors.
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "frogtree",
    version,
    about = "Frog model on d-ary trees: exact operators, certificates and simulation"
)]
pub struct Cli {
    /// JSON experiment config; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory [default: $FROGTREE_OUT_DIR, else ./frogtree-out]
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (results do not depend on it) [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the frog model on the infinite d-ary tree
    Simulate(SimulateArgs),
    /// Iterate the star-graph operator from a point mass at 0
    OperatorIterate(OperatorIterateArgs),
    /// Largest certified bootstrap step epsilon_max(d, mu)
    FindEpsilon(FindEpsilonArgs),
    /// Check the bootstrap inequality on a lambda grid
    VerifyInequality(VerifyInequalityArgs),
    /// Check x^-2 + x^(-2/x) < 1 on a grid
    CimCheck(CimCheckArgs),
    /// Statistical check of the weight supermartingale
    TransienceCheck(TransienceCheckArgs),
    /// Bisection on mu for the recurrence-proxy crossing
    CriticalSearch(CriticalSearchArgs),
    /// Cover time of the one-per-site model on finite trees
    CoverTime(CoverTimeArgs),
    /// Compare nonbacktracking and simple root-visit laws
    CouplingCheck(CouplingCheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::OperatorIterate(_) => "operator-iterate",
            Command::FindEpsilon(_) => "find-epsilon",
            Command::VerifyInequality(_) => "verify-inequality",
            Command::CimCheck(_) => "cim-check",
            Command::TransienceCheck(_) => "transience-check",
            Command::CriticalSearch(_) => "critical-search",
            Command::CoverTime(_) => "cover-time",
            Command::CouplingCheck(_) => "coupling-check",
        }
    }
}

/// On-disk experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub subcommand: String,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("{0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Failed(_) => EXIT_FAILURE,
            CliError::Core(E::SupportCapExceeded { .. }) => EXIT_INTERNAL,
            CliError::Core(_) => EXIT_FAILURE,
            CliError::Io(_) | CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

macro_rules! flag_set {
    (
        $(#[$meta:meta])*
        $args:ident => $params:ident {
            $( $(#[doc = $doc:literal])* $field:ident : $flag:ty => $ty:ty = $default:expr ),* $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, Args, Serialize)]
        pub struct $args {
            $(
                $(#[doc = $doc])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$flag>,
            )*
        }

        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $params {
            $( pub $field: $ty, )*
        }

        impl Default for $params {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }
    };
}

flag_set! {
    SimulateArgs => SimulateParams {
        /// Children per vertex [default: 2]
        d: usize => usize = 2,
        /// Mean of the Poisson number of sleeping frogs per vertex [default: 1]
        mu: f64 => f64 = 1.0,
        /// Exactly this many sleeping frogs per vertex instead of Poisson
        fixed: u32 => Option<u32> = None,
        /// JSON file with a custom frog-count law (a serialized pmf)
        pmf_file: PathBuf => Option<PathBuf> = None,
        /// simple or nonbacktracking [default: simple]
        variant: String => String = "simple".into(),
        /// Number of steps T [default: 100]
        horizon: u32 => u32 = 100,
        /// Absorbing depth D [default: 20]
        depth_cap: u32 => u32 = 20,
        /// Independent trials [default: 1000]
        trials: u64 => u64 = 1000,
        /// Base seed; trial i uses stream i [default: 1]
        seed: u64 => u64 = 1,
        /// Record weights exp(-theta * depth) per step
        weight_theta: f64 => Option<f64> = None,
        /// Drop frogs that cannot reach the root before the horizon (true/false) [default: false]
        prune_unreachable: bool => bool = false,
        /// Per-trial limit on frog moves [default: 50000000]
        max_frog_steps: u64 => Option<u64> = None,
        /// Write per-trial records to trials.jsonl (true/false) [default: true]
        jsonl: bool => bool = true,
    }
}

flag_set! {
    OperatorIterateArgs => OperatorIterateParams {
        /// Children per vertex [default: 2]
        d: usize => usize = 2,
        /// Poisson frog density [default: 6]
        mu: f64 => f64 = 6.0,
        /// Number of iterates [default: 10]
        iterations: usize => usize = 10,
        /// Truncation tolerance for tail masses [default: 1e-12]
        tol: f64 => f64 = 1e-12,
        /// Also check Poi(k * epsilon) ⪯ nu_k
        epsilon: f64 => Option<f64> = None,
    }
}

flag_set! {
    FindEpsilonArgs => FindEpsilonParams {
        /// Children per vertex [default: 2]
        d: usize => usize = 2,
        /// Poisson frog density [default: 6]
        mu: f64 => f64 = 6.0,
    }
}

flag_set! {
    VerifyInequalityArgs => VerifyInequalityParams {
        /// Children per vertex [default: 2]
        d: usize => usize = 2,
        /// Poisson frog density [default: 6]
        mu: f64 => f64 = 6.0,
        /// Step to certify [default: epsilon_max(d, mu)]
        epsilon: f64 => Option<f64> = None,
        /// Grid of lambda values [default: 0 and 512 log-spaced points on 1e-6..1e3]
        lambdas: Vec<f64> => Option<Vec<f64>> = None,
    }
}

flag_set! {
    CimCheckArgs => CimCheckParams {
        /// Smallest x [default: 2]
        xmin: f64 => f64 = 2.0,
        /// Largest x [default: 64]
        xmax: f64 => f64 = 64.0,
        /// Grid spacing [default: 0.01]
        step: f64 => f64 = 0.01,
    }
}

flag_set! {
    TransienceCheckArgs => TransienceCheckParams {
        /// Children per vertex [default: 5]
        d: usize => usize = 5,
        /// Poisson frog density [default: 0.5]
        mu: f64 => f64 = 0.5,
        /// Independent trials [default: 10000]
        trials: u64 => u64 = 10_000,
        /// Steps [default: 200]
        horizon: u32 => u32 = 200,
        /// Absorbing depth [default: chosen so the absorbed weight is below 1e-6]
        depth_cap: u32 => Option<u32> = None,
        /// Base seed [default: 1]
        seed: u64 => u64 = 1,
    }
}

flag_set! {
    CriticalSearchArgs => CriticalSearchParams {
        /// Children per vertex [default: 2]
        d: usize => usize = 2,
        /// Steps T [default: 100]
        horizon: u32 => u32 = 100,
        /// Absorbing depth D [default: 20]
        depth_cap: u32 => u32 = 20,
        /// Trials per evaluation [default: 10000]
        trials: u64 => u64 = 10_000,
        /// Mean root visits defining the crossing [default: 1.5]
        threshold: f64 => f64 = 1.5,
        /// Lower end of the bracket [default: 0]
        mu_lo: f64 => f64 = 0.0,
        /// Upper end of the bracket [default: 4]
        mu_hi: f64 => f64 = 4.0,
        /// Bisection steps [default: 6]
        iterations: u32 => u32 = 6,
        /// Base seed shared by all evaluations [default: 1]
        seed: u64 => u64 = 1,
        /// Per-trial limit on frog moves [default: 50000000]
        max_frog_steps: u64 => Option<u64> = None,
    }
}

flag_set! {
    CoverTimeArgs => CoverTimeParams {
        /// Children per vertex [default: 2]
        d: usize => usize = 2,
        /// Tree height (levels below the root) [default: 1]
        height: u32 => u32 = 1,
        /// Also run every height up to this one
        max_height: u32 => Option<u32> = None,
        /// Trials per height [default: 10000]
        trials: u64 => u64 = 10_000,
        /// Base seed [default: 1]
        seed: u64 => u64 = 1,
    }
}

flag_set! {
    CouplingCheckArgs => CouplingCheckParams {
        /// Children per vertex [default: 2]
        d: usize => usize = 2,
        /// Poisson frog density [default: 2]
        mu: f64 => f64 = 2.0,
        /// Steps T [default: 200]
        horizon: u32 => u32 = 200,
        /// Absorbing depth D [default: 25]
        depth_cap: u32 => u32 = 25,
        /// Trials per variant [default: 100000]
        trials: u64 => u64 = 100_000,
        /// Joint level of the confidence bands [default: 0.01]
        alpha: f64 => f64 = 0.01,
        /// Base seed [default: 1]
        seed: u64 => u64 = 1,
        /// Per-trial limit on frog moves [default: 50000000]
        max_frog_steps: u64 => Option<u64> = None,
    }
}

/// Merges defaults, then config values, then flags, and deserializes.
pub fn resolve_params<P, A>(config: Option<&Map<String, Value>>, flags: &A) -> CliResult<P>
where
    P: Serialize + DeserializeOwned + Default,
    A: Serialize,
{
    let Value::Object(mut merged) = to_json(&P::default())? else {
        return Err(CliError::Internal("parameters must serialize to an object".into()));
    };
    if let Some(config) = config {
        for (key, value) in config {
            if !merged.contains_key(key) {
                return Err(CliError::Config(format!("unknown field `params.{key}`")));
            }
            merged.insert(key.clone(), value.clone());
        }
    }
    if let Value::Object(flags) = to_json(flags)? {
        merged.extend(flags);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("params: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<Value> {
    serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "field `schema_version` is {}, expected {SCHEMA_VERSION}",
            config.schema_version
        )));
    }
    Ok(config)
}

struct Run {
    out_dir: PathBuf,
    subcommand: &'static str,
}

impl Run {
    fn create(&self, name: &str) -> CliResult<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.out_dir.join(name))?))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    fn write_resolved<P: Serialize>(&self, params: &P) -> CliResult<()> {
        let Value::Object(params) = to_json(params)? else {
            return Err(CliError::Internal("parameters must serialize to an object".into()));
        };
        let config = ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            subcommand: self.subcommand.to_string(),
            out_dir: Some(self.out_dir.clone()),
            params,
        };
        self.write_json(RESOLVED_CONFIG_FILE, &config)
    }
}

/// Parses `args` and runs the selected subcommand, returning the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let config = cli.config.as_deref().map(load_config).transpose()?;
    let subcommand = cli.command.name();
    if let Some(c) = &config {
        if c.subcommand != subcommand {
            return Err(CliError::Config(format!(
                "field `subcommand` is {:?} but the command line selects {subcommand:?}",
                c.subcommand
            )));
        }
    }
    let out_dir = cli
        .out_dir
        .or_else(|| config.as_ref().and_then(|c| c.out_dir.clone()))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    fs::create_dir_all(&out_dir)?;
    let run = Run { out_dir, subcommand };
    let params = config.as_ref().map(|c| &c.params);

    match &cli.command {
        Command::Simulate(a) => simulate(&run, resolve_params(params, a)?),
        Command::OperatorIterate(a) => operator_iterate(&run, resolve_params(params, a)?),
        Command::FindEpsilon(a) => find_epsilon(&run, resolve_params(params, a)?),
        Command::VerifyInequality(a) => verify_inequality(&run, resolve_params(params, a)?),
        Command::CimCheck(a) => cim(&run, resolve_params(params, a)?),
        Command::TransienceCheck(a) => transience(&run, resolve_params(params, a)?),
        Command::CriticalSearch(a) => critical(&run, resolve_params(params, a)?),
        Command::CoverTime(a) => cover(&run, resolve_params(params, a)?),
        Command::CouplingCheck(a) => coupling(&run, resolve_params(params, a)?),
    }
}

fn frog_law(p: &SimulateParams) -> CliResult<FrogLaw> {
    match (&p.pmf_file, p.fixed) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "fields `fixed` and `pmf_file` are mutually exclusive".into(),
        )),
        (Some(path), None) => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::Config(format!("pmf_file {}: {e}", path.display())))?;
            let pmf: Pmf = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("pmf_file: {e}")))?;
            Ok(FrogLaw::Custom { pmf })
        }
        (None, Some(k)) => Ok(FrogLaw::Fixed { k }),
        (None, None) => Ok(FrogLaw::Poisson { mu: p.mu }),
    }
}

fn simulate(run: &Run, p: SimulateParams) -> CliResult<()> {
    let variant: Variant = p.variant.parse()?;
    let mut config = SimConfig::new(p.d, frog_law(&p)?, variant, p.horizon, p.depth_cap, p.trials, p.seed);
    config.weight_theta = p.weight_theta;
    config.prune_unreachable = p.prune_unreachable;
    config.max_frog_steps = p.max_frog_steps;
    config.validate()?;
    run.write_resolved(&p)?;

    let mut records = if p.jsonl {
        Some(run.create("trials.jsonl")?)
    } else {
        None
    };
    let summary = run_batch_with(&config, |o| {
        if let Some(w) = records.as_mut() {
            write_trial_record(w, o).map_err(|e| crate::Error::Precondition(format!("writing trials.jsonl: {e}")))?;
        }
        Ok(())
    })?;
    if let Some(mut w) = records {
        w.flush()?;
    }
    let row = batch_csv_row(&config, &summary);
    let mut csv = run.create("summary.csv")?;
    writeln!(csv, "{BATCH_CSV_HEADER}")?;
    writeln!(csv, "{row}")?;
    csv.flush()?;
    run.write_json("summary.json", &summary)?;
    println!("{BATCH_CSV_HEADER}\n{row}");
    if summary.truncated_trials > 0 {
        println!(
            "{} trials stopped by the work budget; their counts are lower bounds",
            summary.truncated_trials
        );
    }
    Ok(())
}

fn operator_iterate(run: &Run, p: OperatorIterateParams) -> CliResult<()> {
    let params = StarParams::new(p.d, p.mu, p.tol)?;
    run.write_resolved(&p)?;
    let iterates = iterate(&params, p.iterations)?;
    let verdicts = p
        .epsilon
        .map(|eps| verify_bootstrap(&params, eps, p.iterations))
        .transpose()?;
    let mut csv = run.create("iterates.csv")?;
    write!(csv, "k,mean,variance,max_value,tail_mass")?;
    if verdicts.is_some() {
        write!(csv, ",poisson_dominated")?;
    }
    writeln!(csv)?;
    for (i, nu) in iterates.iter().enumerate() {
        write!(
            csv,
            "{},{},{},{},{}",
            i + 1,
            nu.mean(),
            nu.variance(),
            nu.max_value(),
            nu.tail_mass()
        )?;
        if let Some(v) = &verdicts {
            write!(csv, ",{}", v[i].is_dominates())?;
        }
        writeln!(csv)?;
        println!("nu_{}: mean {:.6}, support 0..={}", i + 1, nu.mean(), nu.max_value());
    }
    csv.flush()?;
    run.write_json("iterates.json", &iterates)?;
    if let Some(v) = verdicts {
        run.write_json("bootstrap.json", &v)?;
        if let Some(k) = v.iter().position(|v| !v.is_dominates()) {
            return Err(CliError::Failed(format!(
                "Poi(k epsilon) ⪯ nu_k not certified at k = {}",
                k + 1
            )));
        }
    }
    Ok(())
}

fn find_epsilon(run: &Run, p: FindEpsilonParams) -> CliResult<()> {
    let cert = epsilon_max(p.d, p.mu)?;
    run.write_resolved(&p)?;
    run.write_json("epsilon.json", &cert)?;
    match cert.epsilon_max {
        Some(eps) => println!("epsilon_max = {eps}"),
        None => println!("epsilon_max: none (e^-m + e^-m/d >= 1 at m = {})", cert.m),
    }
    Ok(())
}

fn verify_inequality(run: &Run, p: VerifyInequalityParams) -> CliResult<()> {
    let epsilon = match p.epsilon {
        Some(e) => e,
        None => epsilon_max(p.d, p.mu)?
            .epsilon_max
            .ok_or_else(|| CliError::Failed(format!("no certified epsilon for d = {}, mu = {}", p.d, p.mu)))?,
    };
    let lambdas = p.lambdas.clone().unwrap_or_else(default_lambda_grid);
    let holds = crate::certificates::verify_nbound(p.d, p.mu, epsilon, &lambdas)?;
    run.write_resolved(&p)?;
    let mut csv = run.create("inequality.csv")?;
    writeln!(csv, "lambda,margin,p_m,p_n")?;
    let mut worst = (f64::INFINITY, 0.0);
    for &l in &lambdas {
        let margin = nbound_margin(p.d, p.mu, epsilon, l);
        let (pm, pn) = binomial_param_compare(p.d, p.mu, epsilon, l)?;
        writeln!(csv, "{l},{margin},{pm},{pn}")?;
        if margin < worst.0 {
            worst = (margin, l);
        }
    }
    csv.flush()?;
    println!(
        "epsilon = {epsilon}: {} on {} grid points (smallest margin {:.3e} at lambda = {})",
        if holds { "holds" } else { "fails" },
        lambdas.len(),
        worst.0,
        worst.1
    );
    if holds {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "inequality fails beyond tolerance {NBOUND_TOL:e}"
        )))
    }
}

fn cim(run: &Run, p: CimCheckParams) -> CliResult<()> {
    if !(p.step > 0.0 && p.xmax >= p.xmin) {
        return Err(CliError::Config("need step > 0 and xmax >= xmin".into()));
    }
    let points = ((p.xmax - p.xmin) / p.step + 1e-9).floor() as usize + 1;
    let values: Vec<(f64, f64, bool)> = (0..points)
        .map(|i| {
            let x = p.xmin + i as f64 * p.step;
            cim_check(x).map(|(v, ok)| (x, v, ok))
        })
        .collect::<crate::Result<_>>()?;
    run.write_resolved(&p)?;
    let mut csv = run.create("cim.csv")?;
    writeln!(csv, "x,value,holds")?;
    for (x, v, ok) in &values {
        writeln!(csv, "{x},{v},{ok}")?;
    }
    csv.flush()?;
    let failing = values.iter().filter(|v| !v.2).count();
    let worst = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    println!("{points} grid points, {failing} failing, largest value {worst}");
    if failing == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{failing} grid points have value >= 1")))
    }
}

fn transience(run: &Run, p: TransienceCheckParams) -> CliResult<()> {
    let settings = TransienceSettings {
        d: p.d,
        frog_law: FrogLaw::Poisson { mu: p.mu },
        trials: p.trials,
        horizon: p.horizon,
        depth_cap: p.depth_cap,
        seed: p.seed,
    };
    let report = supermartingale_check(&settings)?;
    run.write_resolved(&p)?;
    let mut csv = run.create("transience.csv")?;
    report.write_csv(&mut csv)?;
    csv.flush()?;
    run.write_json("transience.json", &report)?;
    println!(
        "theta = {}, m = {}, depth cap {}: mean bound {}, step excess {:.3e} (se {:.1e}), absorbed weight {:.2e}",
        report.params.theta,
        report.params.m,
        report.depth_cap,
        if report.mean_bound_holds { "holds" } else { "violated" },
        report.step_excess,
        report.step_excess_stderr,
        report.absorbed_weight
    );
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failed("supermartingale check failed".into()))
    }
}

fn critical(run: &Run, p: CriticalSearchParams) -> CliResult<()> {
    let settings = ProxySettings {
        d: p.d,
        horizon: p.horizon,
        depth_cap: p.depth_cap,
        trials: p.trials,
        seed: p.seed,
        max_frog_steps: p.max_frog_steps,
    };
    settings.config(p.mu_lo).validate()?;
    run.write_resolved(&p)?;
    let result = critical_search(&settings, p.threshold, p.mu_lo, p.mu_hi, p.iterations)?;
    let mut csv = run.create("curve.csv")?;
    writeln!(csv, "mu,proxy,stderr,truncated_trials,mean_absorbed")?;
    for c in &result.curve {
        writeln!(
            csv,
            "{},{},{},{},{}",
            c.mu, c.mean, c.stderr, c.truncated_trials, c.mean_absorbed
        )?;
    }
    csv.flush()?;
    run.write_json("critical.json", &result)?;
    println!(
        "crossing of {} visits: mu in [{}, {}], estimate {}{}",
        p.threshold,
        result.mu_lo,
        result.mu_hi,
        result.crossing,
        if result.ambiguous {
            " (ambiguous: a truncated estimate fell below the threshold)"
        } else {
            ""
        }
    );
    Ok(())
}

fn cover(run: &Run, p: CoverTimeParams) -> CliResult<()> {
    let last = p.max_height.unwrap_or(p.height);
    if last < p.height {
        return Err(CliError::Config("field `max_height` is below `height`".into()));
    }
    run.write_resolved(&p)?;
    let mut csv = run.create("cover.csv")?;
    writeln!(csv, "d,height,trials,mean,stderr,p10,p50,p90")?;
    for h in p.height..=last {
        let s = cover_time(p.d, h, p.trials, p.seed.wrapping_add(h as u64))?;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            s.d, s.height, s.trials, s.mean, s.stderr, s.p10, s.p50, s.p90
        )?;
        println!("height {h}: mean {:.4} (se {:.4}), median {}", s.mean, s.stderr, s.p50);
    }
    csv.flush()?;
    Ok(())
}

fn coupling(run: &Run, p: CouplingCheckParams) -> CliResult<()> {
    let mut simple = SimConfig::new(
        p.d,
        FrogLaw::Poisson { mu: p.mu },
        Variant::Simple,
        p.horizon,
        p.depth_cap,
        p.trials,
        p.seed,
    );
    simple.prune_unreachable = true;
    simple.max_frog_steps = p.max_frog_steps;
    simple.validate()?;
    let mut nb = simple.clone();
    nb.variant = Variant::Nonbacktracking;
    run.write_resolved(&p)?;
    let report = dominance_experiment(&simple, &nb, p.alpha)?;
    run.write_json("coupling.json", &report)?;
    println!(
        "nonbacktracking ⪯ simple: {} (statistic {:.4}, margin {:.4}); reverse order violated: {} (statistic {:.4})",
        if report.consistent() { "consistent" } else { "violated" },
        report.forward_statistic,
        report.band_simple + report.band_nb,
        report.reverse_violated(),
        report.reverse_statistic
    );
    if !report.sound() {
        return Err(CliError::Failed(format!(
            "{} nonbacktracking trials hit the work budget; the comparison is not valid",
            report.truncated_nb
        )));
    }
    if report.consistent() {
        Ok(())
    } else {
        Err(CliError::Failed(
            "significant violation of nonbacktracking ⪯ simple".into(),
        ))
    }
}
