use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multiris::harness::{self, spec::OutputFormat, ExperimentSpec, RunOptions, Trials};

/// Monte Carlo experiments for MIMO links through cascades of RISs.
#[derive(Parser)]
#[command(name = "multiris", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a spec file or a named preset.
    Run(RunArgs),
    /// Run the self-check suite; exits with status 1 on any failure.
    Validate {
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    spec: Option<PathBuf>,
    /// Built-in preset name (see `multiris presets`).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per grid point, replacing the spec file's trial policy.
    #[arg(long)]
    trials: Option<usize>,
    /// Output file; stdout when absent and the spec file names none.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Worker threads for trials.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    parallel: u64,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: multiris::Error| e.to_string())
}

enum Failure {
    Validation,
    BadInput(String),
}

impl From<multiris::Error> for Failure {
    fn from(e: multiris::Error) -> Self {
        Failure::BadInput(e.to_string())
    }
}

fn load_spec(args: &RunArgs) -> Result<ExperimentSpec, Failure> {
    let mut spec = match (&args.spec, &args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?;
            ExperimentSpec::from_json(&text)?
        }
        (None, Some(name)) => harness::figure_preset(name)?,
        (None, None) => unreachable!("clap requires --spec or --preset"),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(n) = args.trials {
        spec.trials = Trials::Fixed(n);
    }
    spec.validate()?;
    Ok(spec)
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let spec = load_spec(&args)?;
    let threads = usize::try_from(args.parallel).map_err(|e| Failure::BadInput(e.to_string()))?;
    let table = harness::run_experiment_with(&spec, RunOptions { threads })?;
    let configured = spec.output.clone().unwrap_or_default();
    let format = args.format.unwrap_or(configured.format);
    let text = harness::render(&table, format)?;
    match args.out.or_else(|| configured.path.map(PathBuf::from)) {
        Some(path) => fs::write(&path, text).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::BadInput(e.to_string()))?,
    }
    Ok(())
}

fn validate(json: bool) -> Result<(), Failure> {
    let report = harness::validate();
    if json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::BadInput(e.to_string()))?;
        println!("{text}");
    } else {
        println!("{report}");
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { json } => validate(json),
        Command::Presets => {
            for p in &harness::PRESETS {
                println!("{:<12} {}", p.name, p.description);
            }
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::BadInput(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
