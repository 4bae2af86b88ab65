//! Entry point: `homcell <command> --config cfg.json --out dir`.

mod commands;
mod config;
mod errors;
mod output;

use clap::{Parser, Subcommand};
use errors::AppError;
use output::Format;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "homcell",
    version,
    about = "Homogenized energy densities under convex gradient constraints: \
             density tables, cell solves, envelopes, hyperelastic demos, and \
             epsilon sweeps."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run-config JSON file (required by every command except `report`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts and run logs.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the density and its truncations over a gradient list.
    Density,
    /// Discrete multi-cell solves (with the duality oracle where it applies).
    Cell,
    /// Lamination and discrete envelopes plus radial boundary probes.
    Envelope,
    /// Epsilon-ladder minimization against the homogenized prediction.
    Sweep,
    /// Barrier hyperelastic demo: homogenized polar table, blow-up ladders,
    /// hypothesis certification.
    Hyper,
    /// Aggregate run logs in the output directory (hashes must match).
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("config error: cannot size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    if matches!(cli.command, Command::Report) {
        return commands::report::run(&cli.out);
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| AppError::config("--config is required for this command"))?;
    let loaded = config::load(config_path, cli.seed)?;
    let ctx = commands::Ctx {
        cfg: &loaded,
        out_dir: &cli.out,
        format: cli.format,
    };
    match cli.command {
        Command::Density => commands::density::run(&ctx),
        Command::Cell => commands::cell::run(&ctx),
        Command::Envelope => commands::envelope::run(&ctx),
        Command::Sweep => commands::sweep::run(&ctx),
        Command::Hyper => commands::hyper::run(&ctx),
        Command::Report => unreachable!("handled above"),
    }
}
