//! `semcheck`: evaluate entanglement measures on state files and run
//! verification sweeps.
//!
//! Exit codes: 0 success (every verdict pass or skipped), 1 a verdict failed,
//! 2 unreadable input or bad configuration, 3 state and measure do not fit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semcheck_core::measures::{to_base, EvalOptions, Measure};
use semcheck_core::qstate::load_state;
use semcheck_core::verifier::{run_sweep, summarize, write_reports, Base, SweepConfig, Verdict};
use semcheck_core::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "semcheck", version, about = "Entanglement measures and strict-monotonicity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one measure on a JSON state file.
    Measure(MeasureArgs),
    /// Run a verification sweep and write JSON-lines and CSV reports.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct MeasureArgs {
    state_file: PathBuf,
    /// eof, concurrence, g-concurrence, tangle, negativity, negativity-roof,
    /// log-negativity, renyi:<alpha>, tsallis:<q> or ree
    #[arg(long)]
    measure: String,
    #[arg(long, default_value = "nats")]
    base: Base,
    /// Print the value with solver diagnostics as JSON.
    #[arg(long)]
    json: bool,
    /// Seed for the optimizers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON sweep configuration; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Local dimensions as AxB; repeatable.
    #[arg(long = "dims", value_parser = parse_dims)]
    dims: Vec<(usize, usize)>,
    /// Measure id; repeatable. Listing measures also enables optimizer-based
    /// evaluation where no closed form exists.
    #[arg(long = "measure")]
    measures: Vec<String>,
    /// Check id; repeatable.
    #[arg(long = "check")]
    checks: Vec<String>,
    #[arg(long)]
    n_kraus: Option<usize>,
    #[arg(long)]
    base: Option<Base>,
    /// JSON-lines report path; the CSV summary goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the summary as JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected AxB, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::DimensionMismatch(_) | Error::InvalidParameter(_) => EXIT_MISMATCH,
        _ => EXIT_INPUT,
    }
}

fn run_measure(args: &MeasureArgs) -> Result<(), (u8, Error)> {
    let measure: Measure = args.measure.parse().map_err(|e| (EXIT_INPUT, e))?;
    let state = load_state(&args.state_file).map_err(|e| (EXIT_INPUT, e))?;
    let rho = state.to_density().map_err(|e| (EXIT_INPUT, e))?;
    let opts = EvalOptions {
        seed: args.seed,
        ..EvalOptions::default()
    };
    let mut value = measure
        .evaluate(&rho, &opts)
        .map_err(|e| (exit_code(&e), e))?;
    value.value = to_base(value.value, &measure, args.base == Base::Bits);
    if args.json {
        let mut obj = serde_json::to_value(&value).map_err(|e| (EXIT_INPUT, e.into()))?;
        let unit = if measure.is_log2() {
            "bits"
        } else if measure.is_entropic() {
            if args.base == Base::Bits { "bits" } else { "nats" }
        } else {
            "dimensionless"
        };
        obj["unit"] = unit.into();
        println!("{obj}");
    } else {
        println!("{}", value.value);
    }
    Ok(())
}

fn build_config(args: &VerifyArgs) -> Result<SweepConfig, Error> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?
        }
        None => SweepConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if !args.dims.is_empty() {
        config.dims = args.dims.clone();
    }
    if !args.measures.is_empty() {
        config.measures = args.measures.clone();
        config.allow_optimizers = true;
    }
    if !args.checks.is_empty() {
        config.checks = args.checks.clone();
    }
    if args.n_kraus.is_some() {
        config.n_kraus = args.n_kraus;
    }
    if let Some(base) = args.base {
        config.base = base;
    }
    if let Some(out) = &args.out {
        config.output_path = Some(out.display().to_string());
    }
    config.validate()?;
    Ok(config)
}

fn run_verify(args: &VerifyArgs) -> Result<bool, (u8, Error)> {
    let config = build_config(args).map_err(|e| (EXIT_INPUT, e))?;
    eprintln!(
        "running {} check(s) over {} measure(s), dims {:?}, {} trials, seed {}",
        config.checks.len(),
        config.measures.len(),
        config.dims,
        config.trials,
        config.seed
    );
    let reports = run_sweep(&config).map_err(|e| (EXIT_INPUT, e))?;
    let out = PathBuf::from(
        config
            .output_path
            .clone()
            .unwrap_or_else(|| "semcheck-report.jsonl".into()),
    );
    let summary_path = write_reports(&reports, &out).map_err(|e| (EXIT_INPUT, e))?;
    eprintln!("wrote {} and {}", out.display(), summary_path.display());

    let failures = reports.iter().filter(|r| r.verdict == Verdict::Fail).count();
    if args.json {
        let rows = serde_json::to_string(&summarize(&reports)).map_err(|e| (EXIT_INPUT, e.into()))?;
        println!("{rows}");
    } else {
        print!("{}", std::fs::read_to_string(&summary_path).map_err(|e| (EXIT_INPUT, e.into()))?);
    }
    eprintln!("{} reports, {failures} failed", reports.len());
    Ok(failures == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Measure(args) => match run_measure(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err((code, e)) => {
                eprintln!("error: {e}");
                ExitCode::from(code)
            }
        },
        Command::Verify(args) => match run_verify(&args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(EXIT_FAIL),
            Err((code, e)) => {
                eprintln!("error: {e}");
                ExitCode::from(code)
            }
        },
    }
}
