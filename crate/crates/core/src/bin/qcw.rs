use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcw::cli::{cmd_fit, cmd_imbalance, cmd_simulate, Overrides};

/// Coupled-wave bid/ask simulation and spread calibration.
#[derive(Debug, Parser)]
#[command(name = "qcw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one bid/ask/trade path (path.csv, summary.json).
    Simulate(RunArgs),
    /// Fit the spread law to quotes or OHLC bars (fit.json, pdf.csv, law.csv).
    Fit(RunArgs),
    /// Estimate Q(I) over an ensemble of paths (qi.csv, moments.json).
    Imbalance(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configuration's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the configuration's out_dir, else ".").
    #[arg(long)]
    out: Option<PathBuf>,
}

type Runner = fn(&std::path::Path, &Overrides) -> qcw::Result<qcw::cli::Outputs>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QCW_LOG", "warn")).init();
    let cli = Cli::parse();
    let (run, args): (Runner, RunArgs) = match cli.command {
        Command::Simulate(a) => (cmd_simulate, a),
        Command::Fit(a) => (cmd_fit, a),
        Command::Imbalance(a) => (cmd_imbalance, a),
    };
    let overrides = Overrides {
        seed: args.seed,
        out_dir: args.out,
    };
    match run(&args.config, &overrides) {
        Ok(out) => {
            for f in out.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qcw: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
