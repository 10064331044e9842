use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use psk_core::interface::{self, Report, SolveOptions};
use psk_core::solver::SolveConfig;

/// Homogeneous projective special Kähler structures: checks, search and c-map.
#[derive(Parser)]
#[command(name = "psk", version)]
struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every residual of the candidate embedded in FILE.
    Check { file: PathBuf },
    /// Search for a candidate on the algebra in FILE.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Scan a one-parameter family; `{c}` in TEMPLATE is replaced by the parameter.
    Scan {
        template: PathBuf,
        /// lo:hi:steps
        #[arg(long)]
        param_range: String,
        /// Skip the golden-section polish around grid minima.
        #[arg(long)]
        no_polish: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Verify flatness of the special connection on the cone.
    ConeVerify { file: PathBuf },
    /// Apply the c-map and write the output algebra.
    Cmap {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 64)]
    starts: usize,
    /// Defaults to $PSK_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Success threshold on the residual ∞-norm.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Use only κ-free equations when the Kähler form is not exact.
    #[arg(long)]
    kappa_free: bool,
}

impl SolverArgs {
    fn options(&self) -> Result<SolveOptions, String> {
        let seed = match self.seed {
            Some(s) => s,
            None => match std::env::var("PSK_SEED") {
                Ok(v) => v.trim().parse().map_err(|_| format!("PSK_SEED={v:?} is not an unsigned integer"))?,
                Err(_) => 0,
            },
        };
        let config = SolveConfig {
            starts: self.starts,
            seed,
            max_iters: self.max_iters,
            success_threshold: self.tol,
            ..SolveConfig::default()
        };
        Ok(SolveOptions { config, kappa_free: self.kappa_free })
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn fail(msg: String) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

/// Writes to stdout, ignoring a closed pipe.
fn out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(report: &Report, to_stdout: bool, path: Option<&Path>) -> ExitCode {
    let json = report.to_json();
    if to_stdout {
        out(&format!("{json}\n"));
    }
    if let Some(p) = path {
        if let Err(e) = fs::write(p, &json) {
            return fail(format!("{}: {e}", p.display()));
        }
    }
    if let Some(m) = &report.message {
        eprintln!("error: {m}");
    }
    ExitCode::from(report.exit_code as u8)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let report_path = cli.report.as_deref();
    Ok(match cli.command {
        Command::Check { file } => emit(&interface::cmd_check(&read(&file)?), true, report_path),
        Command::Solve { file, solver } => emit(&interface::cmd_solve(&read(&file)?, &solver.options()?), true, report_path),
        Command::Scan { template, param_range, no_polish, solver } => {
            let (report, table) = interface::cmd_scan(&read(&template)?, &param_range, &solver.options()?, !no_polish);
            out(&table);
            emit(&report, false, report_path)
        }
        Command::ConeVerify { file } => emit(&interface::cmd_cone_verify(&read(&file)?), true, report_path),
        Command::Cmap { file, output } => {
            let report = interface::cmd_cmap(&read(&file)?);
            if let (Some(out), Some(alg)) = (output, &report.output_algebra) {
                fs::write(&out, alg.to_json()).map_err(|e| format!("{}: {e}", out.display()))?;
            }
            emit(&report, true, report_path)
        }
    })
}

fn main() -> ExitCode {
    run(Cli::parse()).unwrap_or_else(fail)
}
