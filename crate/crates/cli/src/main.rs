use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinswap::pst::DEFAULT_TOL_REL;
use spinswap_cli::{Axis, AxisSpec, CliError, CliResult};

#[derive(Parser)]
#[command(name = "spinswap", version, about = "Mixed-state swapping between two collective spin species")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one scenario and write trajectory, diagnostics and manifest.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config and SPINSWAP_OUTPUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one rate or tuning error and write one row per point.
    Sweep {
        config: PathBuf,
        #[arg(long, requires_all = ["from", "to", "points"])]
        axis: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<u32>,
        #[arg(long)]
        log: bool,
        /// Worker threads; all cores by default.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report mirror symmetry and odd commensurability of a chain file.
    CheckPst {
        chain: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        mirror_tol: f64,
        #[arg(long, default_value_t = DEFAULT_TOL_REL)]
        tol: f64,
    },
    /// Compare the reduced simulation with the full-space one.
    OracleCompare { config: PathBuf },
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, out } => {
            let dir = spinswap_cli::cmd_run(&config, out.as_deref())?;
            println!("{}", dir.display());
        }
        Command::Sweep { config, axis, from, to, points, log, threads, out } => {
            let spec = match axis {
                Some(name) => Some(AxisSpec {
                    axis: Axis::parse(&name)?,
                    from: from.unwrap_or_default(),
                    to: to.unwrap_or_default(),
                    points: points.unwrap_or_default(),
                    log,
                }),
                None => None,
            };
            let dir = spinswap_cli::cmd_sweep(&config, spec, threads, out.as_deref())?;
            println!("{}", dir.display());
        }
        Command::CheckPst { chain, mirror_tol, tol } => {
            let report = spinswap_cli::cmd_check_pst(&chain, mirror_tol, tol)?;
            println!("{}", serde_json::to_string(&report).map_err(CliError::from)?);
        }
        Command::OracleCompare { config } => {
            let report = spinswap_cli::cmd_oracle_compare(&config)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(CliError::from)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
