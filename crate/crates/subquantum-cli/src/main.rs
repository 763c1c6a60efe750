//! `subq`: command-line front end for the density-diagnostics library.
//!
//! Subcommands:
//! - `analyze`     evaluate checks on a density snapshot
//! - `evolve`      run a Crank-Nicolson evolution, then evaluate checks
//! - `convergence` repeat checks across grid refinements and fit the order
//! - `catalog`     list the analytic density models and reference values
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical error
//! (overflow or boundary-mass escalation), 4 I/O error.

mod config;
mod report;
mod runner;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Scenario;
use crate::report::{ConvergenceReport, RunReport};

/// Errors split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or usage; exit code 2.
    Config(String),
    /// A computation refused to produce a number; exit code 3.
    Numerical(String),
    /// Reading or writing a file failed; exit code 4.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "subq", version, about = "density diagnostics runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write per-point diagnostic fields as CSV next to --out.
    #[arg(long)]
    dump_fields: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the configured checks on a density snapshot.
    Analyze(RunArgs),
    /// Evolve the initial state, then evaluate the checks on the trajectory.
    Evolve(RunArgs),
    /// Repeat the checks across grid refinements and fit convergence orders.
    Convergence {
        #[command(flatten)]
        args: RunArgs,
        /// Number of grid refinements (each halves the spacing).
        #[arg(long)]
        refinements: usize,
    },
    /// List the analytic density models and their reference values.
    Catalog,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let scenario = load_scenario(&args.config)?;
            let (report, frame) = runner::run_analyze(&scenario)?;
            write_run_outputs(&args, &scenario, &report, &frame)
        }
        Command::Evolve(args) => {
            let scenario = load_scenario(&args.config)?;
            let (report, frame) = runner::run_evolve(&scenario)?;
            write_run_outputs(&args, &scenario, &report, &frame)
        }
        Command::Convergence { args, refinements } => {
            if args.dump_fields {
                return Err(CliError::Config(
                    "--dump-fields applies to analyze and evolve runs".into(),
                ));
            }
            let scenario = load_scenario(&args.config)?;
            let report = runner::run_convergence(&scenario, refinements)?;
            let text = match args.format {
                Format::Json => report::to_json::<ConvergenceReport>(&report),
                Format::Csv => report::convergence_csv(&report),
            };
            emit(args.out.as_deref(), &text)
        }
        Command::Catalog => {
            print!("{}", runner::catalog_text());
            Ok(())
        }
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading config {}: {e}", path.display())))?;
    config::parse_config(&text)
}

fn write_run_outputs(
    args: &RunArgs,
    scenario: &Scenario,
    report: &RunReport,
    frame: &subquantum::DensityField,
) -> Result<(), CliError> {
    let text = match args.format {
        Format::Json => report::to_json(report),
        Format::Csv => report::run_report_csv(report),
    };
    emit(args.out.as_deref(), &text)?;

    if args.dump_fields {
        let out = args.out.as_deref().ok_or_else(|| {
            CliError::Config("--dump-fields needs --out to name the fields file".into())
        })?;
        let columns = runner::dump_columns(scenario, frame)?;
        let csv = report::fields_csv(&columns);
        let fields_path = out.with_extension("fields.csv");
        std::fs::write(&fields_path, csv)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", fields_path.display())))?;
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
