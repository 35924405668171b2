//! `jscc` — distortion-bound sweeps and protocol Monte Carlo runs.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric non-convergence.

use jscc_cli::{config, experiments, table};

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use config::{ExperimentConfig, FigureId, Mode, OutputFormat};
use experiments::{run_experiment, RunError};

#[derive(Parser)]
#[command(
    name = "jscc",
    version,
    about = "Distortion bounds and Monte Carlo simulation of a two-way retransmission protocol",
    after_help = "Energies are in dB over N0. Config files are flat `key = value` text; CLI flags \
override file values. Defaults: 99-point lambda grid {0.01..0.99}, mu = 1, B list {2,4,6,8}."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed; identical seed + config reproduce output byte-for-byte.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per grid point.
    #[arg(long)]
    trials: Option<u64>,
    /// Output format.
    #[arg(long, value_parser = ["csv", "jsonl"])]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Information-theoretic lower bounds over the energy grid.
    Bounds(CommonArgs),
    /// Closed-form protocol upper bounds (1 and 2 rounds) at fixed average energy.
    Protocol(CommonArgs),
    /// Event-level Monte Carlo simulation of the protocol.
    Mc(CommonArgs),
    /// Preset parameterizations reproducing the reference curves.
    Figure {
        /// numeric1 (single AWGN), numeric2 (dual uniform), numeric3
        /// (fading, alpha=0.5), numeric4 (fading, alpha=0.1).
        id: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn apply_common(cfg: &mut ExperimentConfig, common: &CommonArgs) -> Result<(), String> {
    if let Some(path) = &common.config {
        cfg.load_file(path).map_err(|e| e.message)?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.display().to_string());
    }
    if let Some(fmt) = &common.format {
        cfg.format = match fmt.as_str() {
            "jsonl" => OutputFormat::Jsonl,
            _ => OutputFormat::Csv,
        };
    }
    Ok(())
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::default();
    match &cli.command {
        Command::Bounds(c) => {
            apply_common(&mut cfg, c)?;
            cfg.mode = Mode::Bounds;
        }
        Command::Protocol(c) => {
            apply_common(&mut cfg, c)?;
            cfg.mode = Mode::Protocol;
        }
        Command::Mc(c) => {
            apply_common(&mut cfg, c)?;
            cfg.mode = Mode::Mc;
        }
        Command::Figure { id, common } => {
            apply_common(&mut cfg, common)?;
            cfg.mode = Mode::Figure;
            if let Some(id) = id {
                cfg.figure_id =
                    Some(FigureId::parse(id).ok_or_else(|| format!("unknown figure id `{id}`"))?);
            }
        }
    }
    cfg.validate().map_err(|e| e.message)?;
    Ok(cfg)
}

fn write_rows(cfg: &ExperimentConfig, rows: &[table::Row]) -> std::io::Result<()> {
    match &cfg.out {
        Some(path) if path != "-" => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            table::write_table(&mut f, cfg, rows)?;
            f.flush()
        }
        _ => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table::write_table(&mut lock, cfg, rows)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("jscc: config error: {msg}");
            return ExitCode::from(2);
        }
    };
    let rows = match run_experiment(&cfg) {
        Ok(rows) => rows,
        Err(RunError::Config(msg)) => {
            eprintln!("jscc: config error: {msg}");
            return ExitCode::from(2);
        }
        Err(RunError::Numeric(e)) => {
            eprintln!("jscc: {e}");
            return ExitCode::from(3);
        }
    };
    if let Err(e) = write_rows(&cfg, &rows) {
        eprintln!("jscc: io error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
