use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use peerpred::config::{ExperimentConfig, ExperimentKind};
use peerpred::experiments::tradeoff;
use peerpred::output::{read_csv, write_csv, Record};
use peerpred::run_to_dir;
use peerpred_core::{Mechanism, Strategy};

#[derive(Parser)]
#[command(name = "peerpred", version, about = "Peer prediction mechanisms in simulated peer assessment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run(RunArgs),
    /// Print every mechanism and strategy name.
    ListMechanisms,
    /// Compare true-score estimates against the consensus grade.
    ValidateEstimation(RunArgs),
    /// Build the integrity/robustness trade-off table from result directories.
    Summarize {
        /// Directories holding measurement_integrity.csv and deviation.csv.
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Where to write tradeoff.csv (defaults to the first directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set replications=20`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads (defaults to one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn load_config(args: &RunArgs, forced: Option<ExperimentKind>) -> Result<ExperimentConfig, Failure> {
    let base = match (&args.config, forced) {
        (Some(path), _) => {
            std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(usage)?
        }
        (None, Some(kind)) => serde_json::to_string(&ExperimentConfig::new(kind)).map_err(usage)?,
        (None, None) => return Err(usage(anyhow!("--config is required"))),
    };
    let mut config = ExperimentConfig::from_json(&base, &args.overrides).map_err(usage)?;
    if let Some(kind) = forced {
        config.experiment = kind;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    config.validate().map_err(usage)?;
    Ok(config)
}

fn prepare_output(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display())).map_err(usage)?;
    let probe = dir.join(".peerpred-write-test");
    std::fs::write(&probe, b"").with_context(|| format!("output directory {} is not writable", dir.display())).map_err(usage)?;
    std::fs::remove_file(&probe).map_err(usage)
}

fn run(args: &RunArgs, forced: Option<ExperimentKind>) -> Result<(), Failure> {
    let config = load_config(args, forced)?;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(usage)?;
    }
    prepare_output(&config.output_dir)?;
    let files = run_to_dir(&config, &config.output_dir).map_err(runtime)?;
    for f in files {
        println!("{}", config.output_dir.join(f).display());
    }
    Ok(())
}

fn summarize(dirs: &[PathBuf], out: Option<&Path>) -> Result<(), Failure> {
    let mut integrity = Vec::<Record>::new();
    let mut deviation = Vec::<Record>::new();
    for dir in dirs {
        for (name, target) in [("measurement_integrity.csv", &mut integrity), ("deviation.csv", &mut deviation)] {
            let path = dir.join(name);
            if path.exists() {
                target.extend(read_csv::<Record>(&path).map_err(usage)?);
            }
        }
    }
    let rows = tradeoff(&integrity, &deviation).map_err(usage)?;
    let out = out.unwrap_or(&dirs[0]);
    prepare_output(out)?;
    let path = out.join("tradeoff.csv");
    write_csv(&path, &rows).map_err(runtime)?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run(args, None),
        Command::ValidateEstimation(args) => run(args, Some(ExperimentKind::ValidateEstimation)),
        Command::ListMechanisms => {
            println!("mechanisms:");
            for m in Mechanism::all() {
                println!("  {m}");
            }
            println!("strategies:");
            for s in Strategy::ALL {
                println!("  {s}");
            }
            Ok(())
        }
        Command::Summarize { dirs, out } => summarize(dirs, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
