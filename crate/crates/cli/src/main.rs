use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use noma_coverage::coverage::conditional_coverage;
use noma_coverage::experiment::{load_builder, SpecBuilder};
use noma_coverage::{
    fading_oracle, run_sweep, run_validate, to_csv, ConditionalCoverageInputs, ConstantInterference, Engine,
    Level, OrderedDistancePair, RankingScheme, SirThreshold, UserRole, ValidateOptions,
};

/// Exit status for a failed validation check.
const EXIT_CHECK_FAILED: u8 = 1;
/// Exit status for bad configuration or a failed computation.
const EXIT_ERROR: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "noma-cov", version, about = "Coverage of two-user uplink NOMA, analytic and simulated")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic coverage only.
    Analytic(SweepArgs),
    /// Monte Carlo coverage only.
    Simulate(SweepArgs),
    /// Engine taken from the config (`both` by default).
    Sweep(SweepArgs),
    /// Run the self-check suite.
    Validate(ValidateArgs),
    /// Fading-only Monte Carlo for one distance pair, next to the closed forms.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set mc.trials=1e4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// CSV destination (default: stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, default_value = "fast")]
    level: Level,

    /// Also write the machine-readable report here.
    #[arg(long)]
    report_csv: Option<PathBuf>,

    /// Run only these criteria (1-8), e.g. `--only 2,5`.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,

    /// Reverse the bound-chain check; the run must then fail.
    #[arg(long, hide = true)]
    invert_bound_check: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    r1: f64,
    #[arg(long)]
    r2: f64,
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    /// Threshold in dB.
    #[arg(long, allow_hyphen_values = true)]
    t_db: f64,
    /// Deterministic interference power.
    #[arg(long, default_value_t = 0.0)]
    interference: f64,
    #[arg(long, default_value_t = 1_000_000)]
    draws: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    let result = match cli.command {
        Command::Analytic(a) => sweep(a, Some(Engine::Analytic)),
        Command::Simulate(a) => sweep(a, Some(Engine::MonteCarlo)),
        Command::Sweep(a) => sweep(a, None),
        Command::Validate(a) => validate(a, cli.threads.unwrap_or(0)),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn sweep(args: SweepArgs, engine: Option<Engine>) -> Result<ExitCode> {
    let mut builder = match &args.config {
        Some(path) => load_builder(path)?,
        None => SpecBuilder::default(),
    };
    if let Some(out) = &args.output {
        builder.set("output", &out.to_string_lossy())?;
    }
    for pair in &args.overrides {
        builder.set_pair(pair)?;
    }
    let mut spec = builder.build()?;
    if let Some(e) = engine {
        spec.engine = e;
    }
    let rows = run_sweep(&spec)?;
    let csv = to_csv(&rows);
    match spec.resolved_output() {
        Some(path) => write_file(&path, &csv)?,
        None => std::io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn validate(args: ValidateArgs, threads: usize) -> Result<ExitCode> {
    let opts = ValidateOptions {
        level: Some(args.level),
        invert_bound_check: args.invert_bound_check,
        threads,
        only: args.only,
    };
    let report = run_validate(&opts);
    print!("{}", report.to_text());
    if let Some(path) = &args.report_csv {
        write_file(path, &report.to_csv())?;
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    })
}

fn oracle(a: OracleArgs) -> Result<ExitCode> {
    let pair = OrderedDistancePair::from_unordered(a.r1, a.r2)?;
    let t = SirThreshold::from_db(a.t_db)?;
    let outcome = fading_oracle(&pair, a.alpha, t, a.interference, a.draws, a.seed)?;
    let lt = ConstantInterference(a.interference);
    let inp = ConditionalCoverageInputs::new(pair, t, a.alpha, &lt)?;
    println!("scheme,role,oracle,std_error,closed_form");
    for scheme in RankingScheme::ALL {
        for role in UserRole::ALL {
            println!(
                "{scheme},{role},{},{},{}",
                outcome.probability(scheme, role),
                outcome.std_error(scheme, role),
                conditional_coverage(scheme, role, &inp)?
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
