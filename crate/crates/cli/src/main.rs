mod config;
mod output;
mod suites;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use psibeta::asymptotics::approx_reports;

use config::{CommonArgs, Format, RunConfig, Suite};
use output::{emit, render_reports, render_verify, Verdict};

/// Witness brackets and verification suites for best approximation of
/// (ψ,β)-differentiable periodic functions.
#[derive(Debug, Parser)]
#[command(name = "psibeta", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One report row per n (JSON by default).
    Report(CommonArgs),
    /// Runs a verification suite and writes case,value,bound,pass rows.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Report rows over an n range as CSV (default n = 4..64).
    Sweep(CommonArgs),
}

const EXIT_USAGE: u8 = 1;
const EXIT_FAILED: u8 = 2;

enum Failure {
    Usage(String),
    Verification(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Report(args) => {
            let cfg = RunConfig::resolve(&args, None, Format::Json).map_err(Failure::Usage)?;
            report(&cfg, &[8])
        }
        Command::Sweep(args) => {
            let cfg = RunConfig::resolve(&args, None, Format::Csv).map_err(Failure::Usage)?;
            report(&cfg, &[4, 8, 16, 32, 64])
        }
        Command::Verify { suite, common } => {
            let cfg = RunConfig::resolve(&common, suite, Format::Csv).map_err(Failure::Usage)?;
            let suite = cfg.suite.ok_or_else(|| Failure::Usage("--suite is required".into()))?;
            let rows = suites::run(suite, &cfg).map_err(|e| Failure::Verification(e.to_string()))?;
            write(&render_verify(&rows, cfg.format), &cfg)?;
            let failed = rows.iter().filter(|r| r.pass == Verdict::Fail).count();
            if failed > 0 {
                return Err(Failure::Verification(format!("{failed} of {} cases failed", rows.len())));
            }
            Ok(())
        }
    }
}

fn report(cfg: &RunConfig, default_n: &[u64]) -> Result<(), Failure> {
    let grid: Vec<usize> = cfg.n_or(default_n).iter().map(|&n| n as usize).collect();
    if grid[0] < 2 {
        return Err(Failure::Usage("report rows need n ≥ 2".into()));
    }
    let rows = approx_reports(&cfg.psi, &cfg.omega, cfg.beta, &grid, cfg.tol)
        .map_err(|e| Failure::Verification(e.to_string()))?;
    write(&render_reports(&rows, cfg.format), cfg)?;
    // lower ≤ witness_best is the hard ordering; an upper violation off the
    // pilot grid is flagged in the row only
    let bad: Vec<usize> = rows.iter().filter(|r| !(r.flags.lower_ok && r.flags.remez_converged)).map(|r| r.n).collect();
    if !bad.is_empty() {
        return Err(Failure::Verification(format!("ordering or Remez failure at n = {bad:?}")));
    }
    Ok(())
}

fn write(text: &str, cfg: &RunConfig) -> Result<(), Failure> {
    emit(text, cfg.out.as_deref()).map_err(|e| {
        let target = cfg.out.as_ref().map_or("stdout".to_string(), |p| p.display().to_string());
        Failure::Usage(format!("cannot write {target}: {e}"))
    })
}
