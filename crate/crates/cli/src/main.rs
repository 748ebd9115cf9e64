use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use drosc_cli::config::{RunConfig, OUT_DIR_ENV};
use drosc_cli::figures::{self, FigureId};
use drosc_cli::{trajectory, verify, CliError};

#[derive(Parser)]
#[command(name = "drosc", version, about = "Driven damped quantum harmonic oscillator solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured variants and write one CSV per variant plus a JSON sidecar.
    Trajectory {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the CSV bundle behind a figure.
    Figures {
        #[arg(value_enum)]
        id: FigureId,
        /// Output directory; falls back to $DROSC_OUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base number of grid points per series.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Compare the Gaussian solution against the Fock and thermal-ansatz oracles.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Trajectory { config } => {
            let cfg = RunConfig::load(&config)?;
            let out = trajectory::run(&cfg)?;
            for f in &out.files {
                println!("{}", out.dir.join(&f.file).display());
            }
            println!("{}", out.sidecar.display());
        }
        Command::Figures { id, out, points } => {
            let dir = match out.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)) {
                Some(d) => d,
                None => return Err(CliError::Config(format!("--out is required unless {OUT_DIR_ENV} is set"))),
            };
            if points.is_some_and(|n| n < 2) {
                return Err(CliError::Config("--points: need at least 2 points".into()));
            }
            println!("{}", figures::run(id, &dir, points)?.display());
        }
        Command::Verify { config } => {
            let cfg = RunConfig::load(&config)?;
            let report = verify::run(&cfg)?;
            print!("{}", report.render());
            verify::check(&report)?;
            println!("all deviations within tolerance");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("drosc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
