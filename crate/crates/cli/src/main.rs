//! Command-line front end: `run`, `study` and `check`.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use dp_ibvp::diagnostics::InequalityReport;
use dp_ibvp::hyperbolic::Scheme;
use dp_ibvp::runner::{
    check_fields, convergence_study, parse_config, run_scenario, BoundarySource, CheckName, CheckRequest, ExitStatus,
};
use dp_ibvp::Error;

#[derive(Parser)]
#[command(name = "dp-ibvp", version, about = "Finite-volume lab for Dirichlet conservation laws and the DP system")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one configured scenario and evaluate its diagnostics.
    Run { config: PathBuf },
    /// Grid refinement study.
    Study {
        config: PathBuf,
        /// Ascending cell counts, at least three.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        cells: Vec<usize>,
    },
    /// Evaluate one diagnostic on a stored fields.csv.
    Check {
        fields: PathBuf,
        #[arg(long)]
        diag: String,
        /// Constant left boundary value.
        #[arg(long, requires = "g1", conflicts_with = "scenario")]
        g0: Option<f64>,
        /// Constant right boundary value.
        #[arg(long, requires = "g0")]
        g1: Option<f64>,
        /// Take boundary data from a registered scenario.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value = "godunov")]
        scheme: String,
    },
}

fn config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_) | Error::InvalidArgument(_) | Error::UnknownScheme { .. } | Error::Incompatible(_)
    )
}

/// Maps a library error to the exit code table.
fn fail(e: Error) -> ExitCode {
    let status = if config_error(&e) { ExitStatus::ConfigError } else { ExitStatus::SolverAbort };
    eprintln!("error: {e}");
    code(status)
}

fn code(s: ExitStatus) -> ExitCode {
    ExitCode::from(s.code() as u8)
}

fn print_json(v: &[InequalityReport]) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v).context("serializing report")?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { code(ExitStatus::ConfigError) } else { ExitCode::SUCCESS };
        }
    };
    match cli.cmd {
        Cmd::Run { config } => {
            let cfg = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let out = match run_scenario(&cfg) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return code(ExitStatus::SolverAbort);
                }
            };
            if let Some(msg) = &out.failure {
                eprintln!("error: {msg}");
            }
            for r in &out.reports {
                let tag = if r.passed { "ok  " } else { "FAIL" };
                println!("{tag} {:<28} margin {:+.3e} (tol {:.1e})", r.name, r.worst_violation, r.tolerance);
            }
            println!("artifacts in {}", out.dir.display());
            code(out.status)
        }
        Cmd::Study { config, cells } => {
            let cfg = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match convergence_study(&cfg, &cells) {
                Ok(res) => {
                    println!("{:>6} {:>12} {:>12} {:>8}", "n", "dx", "error", "order");
                    for r in &res.rows {
                        let o = r.order.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
                        println!("{:>6} {:>12.4e} {:>12.4e} {:>8}", r.n, r.dx, r.error, o);
                    }
                    println!("observed order {:.3} ({:?})", res.observed_order, res.measure);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Cmd::Check { fields, diag, g0, g1, scenario, scheme } => {
            let diag: CheckName = match diag.parse() {
                Ok(d) => d,
                Err(e) => return fail(e),
            };
            let scheme: Scheme = match scheme.parse() {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let boundary = match (g0, g1, scenario) {
                (Some(g0), Some(g1), None) => BoundarySource::Constant { g0, g1 },
                (None, None, Some(s)) => BoundarySource::Scenario(s),
                _ => {
                    eprintln!("error: give either --g0 and --g1, or --scenario");
                    return code(ExitStatus::ConfigError);
                }
            };
            let req = CheckRequest { fields, diag, boundary, scheme };
            match check_fields(&req) {
                Ok(out) => {
                    if let Err(e) = print_json(&out.reports) {
                        eprintln!("error: {e:#}");
                        return code(ExitStatus::SolverAbort);
                    }
                    code(out.status)
                }
                Err(e) => fail(e),
            }
        }
    }
}
