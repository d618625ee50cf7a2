//! Command-line laboratory for trimmed ergodic sums.
//!
//! Subcommands: digits, trim, mainterm, mixing, experiment, counterexample,
//! check-hypothesis. Every run is reproducible from its seed; flags override
//! config-file values and the effective config is echoed into output
//! headers. Exit codes: 0 success, 1 usage error, 2 runtime error.

mod config;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ergotrim::dynamics::{doubling_orbit, gauss_digits, parse_rational, RealInput, SystemModel};
use ergotrim::experiments::persist::{echo_pairs, to_csv_string, to_json_string};
use ergotrim::experiments::{
    persist, ClassicalObservable, ExperimentConfig, Normalization, OutputFormat, SystemSpec,
};
use ergotrim::mainterm::{build_main_terms, check_growth_hypothesis, TailProfile};
use ergotrim::mixing::{estimate_g, GEstimateOptions, MixingMode, MixingModel};
use ergotrim::trimming::trim;

use config::{reject_unknown, take, FileConfig};

#[derive(Parser)]
#[command(
    name = "ergotrim",
    version,
    about = "Trimmed Birkhoff sums over symbolic dynamical systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print orbit digits (Gauss) or observable values (doubling) for one sample
    Digits(DigitsArgs),
    /// Trim an explicit value sequence against a threshold
    Trim(TrimArgs),
    /// Build the F1/F2/G/F3 main-term table over an N grid
    Mainterm(MaintermArgs),
    /// Estimate or assert the correlation-sum mixing bound g(N)
    Mixing(MixingArgs),
    /// Run the seeded trimmed-sum (or classical-average) experiment
    Experiment(ExperimentArgs),
    /// Dispersion report for normalized trimmed sums (Gauss control vs doubling)
    Counterexample(CounterexampleArgs),
    /// Check the bounded-growth hypothesis on a consecutive main-term table
    #[command(name = "check-hypothesis")]
    CheckHypothesis(CheckArgs),
}

#[derive(Args)]
struct DigitsArgs {
    /// gauss | doubling
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Orbit length
    #[arg(long)]
    n: Option<usize>,
    /// Exact rational test hook "p/q"
    #[arg(long = "x-rational")]
    x_rational: Option<String>,
    /// Exact quadratic test hook "p,r,d,q" meaning (p + r*sqrt(d))/q
    #[arg(long = "x-quadratic", allow_hyphen_values = true)]
    x_quadratic: Option<String>,
    /// Refinement bit budget (default 64*N + 4096)
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrimArgs {
    /// Comma-separated non-negative values
    #[arg(long)]
    values: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MaintermArgs {
    /// gauss | doubling-indicator | doubling-reciprocal
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "phi-p")]
    phi_p: Option<f64>,
    #[arg(long = "phi-q")]
    phi_q: Option<f64>,
    /// Comma-separated increasing N grid
    #[arg(long)]
    ngrid: Option<String>,
    /// Constant mixing bound g
    #[arg(long)]
    gconst: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MixingArgs {
    /// doubling | markov | gauss
    #[arg(long)]
    system: Option<String>,
    /// exact | empirical | asserted
    #[arg(long)]
    gmode: Option<String>,
    /// Largest cell index in the supremum
    #[arg(long)]
    gcap: Option<usize>,
    /// Largest horizon N
    #[arg(long)]
    n: Option<usize>,
    /// Doubling cylinder level
    #[arg(long)]
    level: Option<usize>,
    /// Seed for the empirical orbit
    #[arg(long)]
    seed: Option<u64>,
    /// Constant for asserted mode
    #[arg(long)]
    gconst: Option<f64>,
    /// Markov transition matrix: rows split by ';', rational entries by ','
    #[arg(long)]
    matrix: Option<String>,
    /// Markov per-state observable values, comma-separated
    #[arg(long)]
    mvalues: Option<String>,
    /// Orbit length override for empirical mode
    #[arg(long = "orbit-len")]
    orbit_len: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// trim | classical
    #[arg(long)]
    kind: Option<String>,
    /// gauss | doubling-indicator | doubling-reciprocal
    #[arg(long)]
    system: Option<String>,
    /// Base seed for the sample family
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated increasing N grid
    #[arg(long)]
    ngrid: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "phi-p")]
    phi_p: Option<f64>,
    #[arg(long = "phi-q")]
    phi_q: Option<f64>,
    #[arg(long)]
    gconst: Option<f64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// doubling | gauss (control)
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ngrid: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "phi-p")]
    phi_p: Option<f64>,
    #[arg(long = "phi-q")]
    phi_q: Option<f64>,
    /// nlogn | n | n2 | a power like 1.5
    #[arg(long)]
    normalization: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-sample normalized records here
    #[arg(long = "records-out")]
    records_out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// gauss | doubling-indicator | doubling-reciprocal
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "phi-p")]
    phi_p: Option<f64>,
    #[arg(long = "phi-q")]
    phi_q: Option<f64>,
    /// Check the consecutive grid 2..=nmax
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    gconst: Option<f64>,
    /// Optional JSON report output
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<ergotrim::Error> for CliError {
    fn from(e: ergotrim::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn usage<T>(message: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(message.into()))
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if e.kind() == ErrorKind::DisplayHelp || e.kind() == ErrorKind::DisplayVersion =>
        {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };
    let outcome = match cli.command {
        Command::Digits(args) => run_digits(args),
        Command::Trim(args) => run_trim(args),
        Command::Mainterm(args) => run_mainterm(args),
        Command::Mixing(args) => run_mixing(args),
        Command::Experiment(args) => run_experiment(args),
        Command::Counterexample(args) => run_counterexample(args),
        Command::CheckHypothesis(args) => run_check(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run 'ergotrim --help' for usage");
            1
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn load_section(path: Option<&PathBuf>, section: &str) -> Result<BTreeMap<String, String>, CliError> {
    match path {
        None => Ok(BTreeMap::new()),
        Some(p) => Ok(FileConfig::load(p).map_err(CliError::Usage)?.section(section)),
    }
}

fn taken<T: std::str::FromStr>(
    section: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    take(section, key).map_err(CliError::Usage)
}

fn parse_grid(raw: &str) -> Result<Vec<usize>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Usage(format!("bad grid entry '{s}': {e}")))
        })
        .collect()
}

#[derive(Clone, Copy)]
enum SystemContext {
    Experiment,
    Counterexample,
}

fn parse_system(raw: &str, context: SystemContext) -> Result<SystemSpec, CliError> {
    match raw {
        "gauss" | "gauss-digit" => Ok(SystemSpec::GaussDigit),
        "doubling-indicator" => Ok(SystemSpec::DoublingIndicator),
        "doubling-reciprocal" => Ok(SystemSpec::DoublingReciprocal),
        "doubling" => Ok(match context {
            SystemContext::Experiment => SystemSpec::DoublingIndicator,
            SystemContext::Counterexample => SystemSpec::DoublingReciprocal,
        }),
        other => usage(format!(
            "unknown system '{other}' (expected gauss, doubling, doubling-indicator, doubling-reciprocal)"
        )),
    }
}

fn parse_format(raw: Option<String>) -> Result<OutputFormat, CliError> {
    match raw.as_deref() {
        None | Some("csv") => Ok(OutputFormat::Csv),
        Some("json") => Ok(OutputFormat::Json),
        Some(other) => usage(format!("unknown format '{other}' (expected csv or json)")),
    }
}

fn setup_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return usage("--threads must be at least 1");
        }
        // ignore the error when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Write `body` to the path, or to stdout when no path is given.
fn emit(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display()))),
    }
}

fn run_digits(args: DigitsArgs) -> Result<(), CliError> {
    let mut section = load_section(args.config.as_ref(), "digits")?;
    let system = args
        .system
        .or(taken::<String>(&mut section, "system")?)
        .unwrap_or_else(|| "gauss".to_string());
    let n = match args.n.or(taken(&mut section, "n")?) {
        Some(n) => n,
        None => return usage("missing required --n"),
    };
    let seed = args.seed.or(taken(&mut section, "seed")?);
    let budget = args.budget.or(taken(&mut section, "budget")?);
    let x_rational = args.x_rational.or(taken(&mut section, "x-rational")?);
    let x_quadratic = args.x_quadratic.or(taken(&mut section, "x-quadratic")?);
    reject_unknown(&section, "digits").map_err(CliError::Usage)?;

    let mut input = match (x_rational, x_quadratic) {
        (Some(_), Some(_)) => {
            return usage("--x-rational and --x-quadratic are mutually exclusive")
        }
        (Some(r), None) => RealInput::rational(
            parse_rational(&r).map_err(|e| CliError::Usage(e.to_string()))?,
        )
        .map_err(|e| CliError::Usage(e.to_string()))?,
        (None, Some(q)) => {
            let parts: Vec<i64> = q
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<i64>()
                        .map_err(|e| CliError::Usage(format!("bad quadratic part '{s}': {e}")))
                })
                .collect::<Result<_, _>>()?;
            if parts.len() != 4 {
                return usage("--x-quadratic expects four integers p,r,d,q");
            }
            RealInput::quadratic(parts[0], parts[1], parts[2], parts[3])
                .map_err(|e| CliError::Usage(e.to_string()))?
        }
        (None, None) => RealInput::seeded(seed.unwrap_or(0)),
    };

    let orbit = match system.as_str() {
        "gauss" => gauss_digits(&mut input, n, budget)?,
        "doubling" => doubling_orbit(&mut input, n, budget)?,
        other => return usage(format!("unknown system '{other}' (expected gauss or doubling)")),
    };
    let line: Vec<String> = orbit.values.iter().map(|v| v.to_string()).collect();
    println!("{}", line.join(" "));
    Ok(())
}

fn run_trim(args: TrimArgs) -> Result<(), CliError> {
    let mut section = load_section(args.config.as_ref(), "trim")?;
    let raw_values = match args.values.or(taken(&mut section, "values")?) {
        Some(v) => v,
        None => return usage("missing required --values"),
    };
    let threshold = match args.threshold.or(taken(&mut section, "threshold")?) {
        Some(t) => t,
        None => return usage("missing required --threshold"),
    };
    reject_unknown(&section, "trim").map_err(CliError::Usage)?;
    let values: Vec<f64> = raw_values
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad value '{s}': {e}")))
        })
        .collect::<Result<_, _>>()?;
    let t = trim(&values, threshold)?;
    println!(
        "raw={} max={} argmax={} delta={} exceedances={} trimmed={}",
        t.raw_sum, t.max_term, t.argmax, t.delta, t.exceedances, t.trimmed_sum
    );
    Ok(())
}

fn run_mainterm(args: MaintermArgs) -> Result<(), CliError> {
    let mut section = load_section(args.config.as_ref(), "mainterm")?;
    let system_raw = args
        .system
        .or(taken::<String>(&mut section, "system")?)
        .unwrap_or_else(|| "gauss".to_string());
    let system = parse_system(&system_raw, SystemContext::Experiment)?;
    let epsilon = args.epsilon.or(taken(&mut section, "epsilon")?).unwrap_or(0.5);
    let phi_p = args.phi_p.or(taken(&mut section, "phi-p")?).unwrap_or(1.0);
    let phi_q = args.phi_q.or(taken(&mut section, "phi-q")?).unwrap_or(0.0);
    let gconst = args.gconst.or(taken(&mut section, "gconst")?).unwrap_or(1.0);
    let grid_raw = match args.ngrid.or(taken(&mut section, "ngrid")?) {
        Some(g) => g,
        None => return usage("missing required --ngrid"),
    };
    let format = parse_format(args.format.or(taken(&mut section, "format")?))?;
    let out = args.out.or(taken::<String>(&mut section, "out")?.map(PathBuf::from));
    reject_unknown(&section, "mainterm").map_err(CliError::Usage)?;

    let grid = parse_grid(&grid_raw)?;
    let profile = TailProfile::new(phi_p, phi_q, epsilon)?;
    let table = build_main_terms(
        &system.model(),
        &profile,
        &MixingModel::Constant(gconst),
        &grid,
    )?;
    let echo = serde_json::json!({
        "system": system.to_string(),
        "epsilon": epsilon,
        "phi_p": phi_p,
        "phi_q": phi_q,
        "gconst": gconst,
    });
    let body = match format {
        OutputFormat::Csv => {
            let mut head = String::new();
            for (k, v) in echo_pairs(&echo) {
                head.push_str(&format!("# {k}={v}\n"));
            }
            head + &table.to_csv()
        }
        OutputFormat::Json => serde_json::to_string_pretty(&serde_json::json!({
            "config": echo,
            "table": table,
        }))
        .expect("table serializes"),
    };
    emit(out.as_deref(), &body)
}

fn run_mixing(args: MixingArgs) -> Result<(), CliError> {
    let mut section = load_section(args.config.as_ref(), "mixing")?;
    let system_raw = args
        .system
        .or(taken::<String>(&mut section, "system")?)
        .unwrap_or_else(|| "doubling".to_string());
    let gmode_raw = args
        .gmode
        .or(taken::<String>(&mut section, "gmode")?)
        .unwrap_or_else(|| "exact".to_string());
    let gcap = args.gcap.or(taken(&mut section, "gcap")?).unwrap_or(2);
    let n_max = args.n.or(taken(&mut section, "n")?).unwrap_or(32);
    let level = args.level.or(taken(&mut section, "level")?).unwrap_or(1);
    let seed = args.seed.or(taken(&mut section, "seed")?).unwrap_or(0);
    let gconst = args.gconst.or(taken(&mut section, "gconst")?).unwrap_or(1.0);
    let orbit_len = args.orbit_len.or(taken(&mut section, "orbit-len")?);
    let matrix = args.matrix.or(taken::<String>(&mut section, "matrix")?);
    let mvalues = args.mvalues.or(taken::<String>(&mut section, "mvalues")?);
    let format = parse_format(args.format.or(taken(&mut section, "format")?))?;
    let out = args.out.or(taken::<String>(&mut section, "out")?.map(PathBuf::from));
    reject_unknown(&section, "mixing").map_err(CliError::Usage)?;

    let mode = match gmode_raw.as_str() {
        "exact" => MixingMode::Exact,
        "empirical" => MixingMode::Empirical,
        "asserted" => MixingMode::Asserted,
        other => return usage(format!("unknown gmode '{other}'")),
    };
    let system = match system_raw.as_str() {
        "gauss" => SystemModel::gauss(),
        "doubling" => SystemModel::doubling_indicator().with_doubling_level(level),
        "markov" => {
            let matrix_raw = match matrix {
                Some(m) => m,
                None => return usage("markov system needs --matrix"),
            };
            let rows: Vec<Vec<num_rational::BigRational>> = matrix_raw
                .split(';')
                .map(|row| {
                    row.split(',')
                        .map(|cell| {
                            parse_rational(cell.trim())
                                .map_err(|e| CliError::Usage(e.to_string()))
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<_, _>>()?;
            let values: Vec<f64> = match mvalues {
                Some(v) => v
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|e| CliError::Usage(format!("bad mvalue '{s}': {e}")))
                    })
                    .collect::<Result<_, _>>()?,
                None => (0..rows.len()).map(|i| i as f64).collect(),
            };
            SystemModel::markov(rows, values)?
        }
        other => return usage(format!("unknown system '{other}'")),
    };
    let options = GEstimateOptions {
        mode,
        asserted_constant: gconst,
        seed,
        orbit_len,
    };
    let profile = estimate_g(&system, n_max, gcap, &options)?;
    let echo = serde_json::json!({
        "system": system_raw,
        "gmode": gmode_raw,
        "gcap": gcap,
        "n": n_max,
        "seed": seed,
    });
    let body = match format {
        OutputFormat::Csv => {
            let mut head = String::new();
            for (k, v) in echo_pairs(&echo) {
                head.push_str(&format!("# {k}={v}\n"));
            }
            head + &profile.to_csv()
        }
        OutputFormat::Json => serde_json::to_string_pretty(&serde_json::json!({
            "config": echo,
            "profile": profile,
        }))
        .expect("profile serializes"),
    };
    emit(out.as_deref(), &body)
}

struct ExperimentSettings {
    config: ExperimentConfig,
    out: Option<PathBuf>,
    format: OutputFormat,
}

fn resolve_experiment_settings(
    section: &mut BTreeMap<String, String>,
    system: Option<String>,
    seed: Option<u64>,
    ngrid: Option<String>,
    samples: Option<usize>,
    epsilon: Option<f64>,
    phi_p: Option<f64>,
    phi_q: Option<f64>,
    gconst: Option<f64>,
    budget: Option<u64>,
    out: Option<PathBuf>,
    format: Option<String>,
    threads: Option<usize>,
    context: SystemContext,
) -> Result<ExperimentSettings, CliError> {
    let system_raw = system
        .or(taken::<String>(section, "system")?)
        .unwrap_or_else(|| match context {
            SystemContext::Experiment => "gauss".to_string(),
            SystemContext::Counterexample => "doubling".to_string(),
        });
    let system = parse_system(&system_raw, context)?;
    let grid_raw = match ngrid.or(taken(section, "ngrid")?) {
        Some(g) => g,
        None => return usage("missing required --ngrid"),
    };
    let n_grid = parse_grid(&grid_raw)?;
    let sample_count = samples.or(taken(section, "samples")?).unwrap_or(100);
    let base_seed = seed.or(taken(section, "seed")?).unwrap_or(0);
    let threads = threads.or(taken(section, "threads")?);
    setup_threads(threads)?;
    let mut config = ExperimentConfig::new(system, n_grid, sample_count, base_seed);
    config.epsilon = epsilon.or(taken(section, "epsilon")?).unwrap_or(0.5);
    config.phi_p = phi_p.or(taken(section, "phi-p")?).unwrap_or(1.0);
    config.phi_q = phi_q.or(taken(section, "phi-q")?).unwrap_or(0.0);
    config.g_constant = gconst.or(taken(section, "gconst")?).unwrap_or(1.0);
    config.orbit_budget = budget.or(taken(section, "budget")?);
    let format = parse_format(format.or(taken(section, "format")?))?;
    let out = out.or(taken::<String>(section, "out")?.map(PathBuf::from));
    Ok(ExperimentSettings {
        config,
        out,
        format,
    })
}

fn log_samples(config: &ExperimentConfig, failures: &[ergotrim::experiments::SampleFailure]) {
    for index in 0..config.sample_count as u64 {
        let seed = ergotrim::experiments::sample_seed(config.base_seed, index);
        match failures.iter().find(|f| f.seed == seed) {
            Some(f) => eprintln!("sample {index} seed={seed} failed: {}", f.message),
            None => eprintln!("sample {index} seed={seed} ok"),
        }
    }
}

fn run_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let mut section = load_section(args.config.as_ref(), "experiment")?;
    let kind = args
        .kind
        .or(taken::<String>(&mut section, "kind")?)
        .unwrap_or_else(|| "trim".to_string());
    let settings = resolve_experiment_settings(
        &mut section,
        args.system,
        args.seed,
        args.ngrid,
        args.samples,
        args.epsilon,
        args.phi_p,
        args.phi_q,
        args.gconst,
        args.budget,
        args.out,
        args.format,
        args.threads,
        SystemContext::Experiment,
    )?;
    reject_unknown(&section, "experiment").map_err(CliError::Usage)?;
    let config_json = serde_json::to_value(&settings.config).expect("config serializes");

    match kind.as_str() {
        "trim" => {
            let result = ergotrim::experiments::run_trim_experiment(&settings.config)?;
            log_samples(&settings.config, &result.failures);
            write_records(&result.records, &settings, &config_json)
        }
        "classical" => {
            let result = ergotrim::experiments::run_classical_experiment(
                &settings.config,
                ClassicalObservable::FromSystem,
            )?;
            log_samples(&settings.config, &result.failures);
            write_records(&result.records, &settings, &config_json)
        }
        other => usage(format!("unknown kind '{other}' (expected trim or classical)")),
    }
}

fn write_records<T: ergotrim::experiments::CsvRecord + serde::Serialize>(
    records: &[T],
    settings: &ExperimentSettings,
    config_json: &serde_json::Value,
) -> Result<(), CliError> {
    match &settings.out {
        Some(path) => {
            persist(records, path, settings.format, Some(config_json))?;
            Ok(())
        }
        None => {
            let body = match settings.format {
                OutputFormat::Csv => to_csv_string(records, &echo_pairs(config_json)),
                OutputFormat::Json => to_json_string(records, Some(config_json)),
            };
            print!("{body}");
            Ok(())
        }
    }
}

fn run_counterexample(args: CounterexampleArgs) -> Result<(), CliError> {
    let mut section = load_section(args.config.as_ref(), "counterexample")?;
    let normalization_raw = args
        .normalization
        .or(taken::<String>(&mut section, "normalization")?)
        .unwrap_or_else(|| "nlogn".to_string());
    let records_out = args
        .records_out
        .or(taken::<String>(&mut section, "records-out")?.map(PathBuf::from));
    let settings = resolve_experiment_settings(
        &mut section,
        args.system,
        args.seed,
        args.ngrid,
        args.samples,
        args.epsilon,
        args.phi_p,
        args.phi_q,
        None,
        None,
        args.out,
        args.format,
        args.threads,
        SystemContext::Counterexample,
    )?;
    reject_unknown(&section, "counterexample").map_err(CliError::Usage)?;

    let normalization = match normalization_raw.as_str() {
        "nlogn" => Normalization::NLogN,
        "n" => Normalization::Power(1.0),
        "n2" => Normalization::Power(2.0),
        other => match other.parse::<f64>() {
            Ok(p) if p > 0.0 => Normalization::Power(p),
            _ => return usage(format!("unknown normalization '{other}'")),
        },
    };
    let result = ergotrim::experiments::run_counterexample(&settings.config, normalization)?;
    log_samples(&settings.config, &result.failures);
    let mut config_json = serde_json::to_value(&settings.config).expect("config serializes");
    config_json["normalization"] = serde_json::json!(normalization_raw);
    if let Some(path) = &records_out {
        persist(&result.records, path, settings.format, Some(&config_json))?;
    }
    write_records(&result.rows, &settings, &config_json)
}

fn run_check(args: CheckArgs) -> Result<(), CliError> {
    let mut section = load_section(args.config.as_ref(), "check-hypothesis")?;
    let system_raw = args
        .system
        .or(taken::<String>(&mut section, "system")?)
        .unwrap_or_else(|| "gauss".to_string());
    let system = parse_system(&system_raw, SystemContext::Experiment)?;
    let epsilon = args.epsilon.or(taken(&mut section, "epsilon")?).unwrap_or(0.5);
    let phi_p = args.phi_p.or(taken(&mut section, "phi-p")?).unwrap_or(1.0);
    let phi_q = args.phi_q.or(taken(&mut section, "phi-q")?).unwrap_or(0.0);
    let nmax = args.nmax.or(taken(&mut section, "nmax")?).unwrap_or(10_000);
    let gconst = args.gconst.or(taken(&mut section, "gconst")?).unwrap_or(1.0);
    let out = args.out.or(taken::<String>(&mut section, "out")?.map(PathBuf::from));
    reject_unknown(&section, "check-hypothesis").map_err(CliError::Usage)?;
    if nmax < 5 {
        return usage("--nmax must be at least 5");
    }

    let profile = TailProfile::new(phi_p, phi_q, epsilon)?;
    let grid: Vec<usize> = (2..=nmax).collect();
    let table = build_main_terms(
        &system.model(),
        &profile,
        &MixingModel::Constant(gconst),
        &grid,
    )?;
    let report = check_growth_hypothesis(&table)?;
    println!("verdict: {}", report.verdict);
    println!("max_r1: {}", report.max_r1);
    println!("max_r2: {}", report.max_r2);
    println!("slope_r1: {}", report.slope_r1);
    println!("slope_r2: {}", report.slope_r2);
    if let Some(path) = out {
        let body = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(&path, body)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
