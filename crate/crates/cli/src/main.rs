use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fulldisp_cli::commands::{self, Command, CommandError, Options};
use fulldisp_cli::config::RunConfig;
use fulldisp_cli::snapshot::SnapshotError;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Simulate,
    DtnCheck,
    ConsistencySweep,
    DispersionCheck,
    MultiplierCheck,
    EnergyCheck,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Simulate => Command::Simulate,
            Sub::DtnCheck => Command::DtnCheck,
            Sub::ConsistencySweep => Command::ConsistencySweep,
            Sub::DispersionCheck => Command::DispersionCheck,
            Sub::MultiplierCheck => Command::MultiplierCheck,
            Sub::EnergyCheck => Command::EnergyCheck,
        }
    }
}

/// Full-dispersion shallow-water solvers and their verification harness.
///
/// Exit status: 0 when every assertion passes, 1 on an assertion or run
/// failure, 2 on a configuration error. Set FULLDISP_LOG=error|info|debug
/// for verbosity.
#[derive(Debug, Parser)]
#[command(name = "fulldisp", version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// Config file (same as --config).
    config_file: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write a gnuplot script next to each sweep table.
    #[arg(long)]
    emit_gnuplot: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FULLDISP_LOG", "warn")).init();
    let cli = Cli::parse();

    let path = match (&cli.config_file, &cli.config) {
        (Some(a), Some(b)) if a != b => {
            eprintln!("error: two different config files given: {} and {}", a.display(), b.display());
            return ExitCode::from(2);
        }
        (a, b) => a.clone().or_else(|| b.clone()),
    };
    let loaded = match &path {
        Some(p) => RunConfig::load(p),
        None => RunConfig::parse("", "<defaults>"),
    };
    let cfg = match loaded {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let opts = Options {
        out_dir: cli.out.clone().unwrap_or_else(|| cfg.out_dir.clone()),
        emit_gnuplot: cli.emit_gnuplot,
    };
    let cmd = Command::from(cli.command);
    match commands::run(cmd, &cfg, &opts) {
        Ok(report) => {
            print!("{}", commands::summary(&report));
            if report.passed() {
                println!("PASS {}", cmd.name());
                ExitCode::SUCCESS
            } else {
                for t in report.failing_tables() {
                    println!("failing table: {}", t.display());
                }
                println!("FAIL {}", cmd.name());
                ExitCode::from(1)
            }
        }
        Err(CommandError::Snapshot(e @ SnapshotError::Mismatch { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
