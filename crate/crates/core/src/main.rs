#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Parser, Subcommand, ValueEnum};
use semiorbit::report::{emit, run_modes, Format, Mode, SystemConfig};
use semiorbit::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "semiorbit", version, about = "Degree and height counting for semigroups of rational maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Growth exponent of the degrees.
    Rho(Flags),
    /// Exact counts of words by weight.
    CountWords(Flags),
    /// Growth exponent and asymptotic constants.
    Constants(Flags),
    /// Cyclic / acyclic classification of the degrees.
    Classify(Flags),
    /// Critical simplicity and separation of the maps.
    CritCheck(Flags),
    /// Preperiodicity of the base point, with a witness.
    Preperiodic(Flags),
    /// Exact function and point counts by height.
    OrbitCensus(Flags),
    /// Height sums and their convergence bounds.
    Beta(Flags),
    /// Exact versus predicted function counts.
    Predict(Flags),
    /// Function count divided by X^rho on the height grid.
    Theta(Flags),
    /// Every mode listed in the config's `mode` key.
    Run(Flags),
}

#[derive(clap::Args)]
struct Flags {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy)]
enum OutputFormat {
    Csv,
    Jsonl,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, flags) = match cli.command {
        Command::Rho(f) => (Some(Mode::Rho), f),
        Command::CountWords(f) => (Some(Mode::CountWords), f),
        Command::Constants(f) => (Some(Mode::Constants), f),
        Command::Classify(f) => (Some(Mode::Classify), f),
        Command::CritCheck(f) => (Some(Mode::CritCheck), f),
        Command::Preperiodic(f) => (Some(Mode::Preperiodic), f),
        Command::OrbitCensus(f) => (Some(Mode::OrbitCensus), f),
        Command::Beta(f) => (Some(Mode::Beta), f),
        Command::Predict(f) => (Some(Mode::Predict), f),
        Command::Theta(f) => (Some(Mode::Theta), f),
        Command::Run(f) => (None, f),
    };
    match execute(mode, &flags) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("semiorbit: {e}");
            match e {
                Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn execute(mode: Option<Mode>, flags: &Flags) -> semiorbit::Result<ExitCode> {
    let path = flags.config.as_ref().ok_or_else(|| Error::Parse {
        line: 0,
        field: "--config".into(),
        message: "a config file is required".into(),
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        field: "--config".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut config = SystemConfig::parse(&text)?;
    if let Some(b) = flags.budget {
        config.budget = b;
    }
    if let Some(t) = flags.tol {
        if !(t > 0.0) {
            return Err(Error::Parse {
                line: 0,
                field: "--tol".into(),
                message: "tolerance must be positive".into(),
            });
        }
        config.tol = t;
    }
    let modes = match mode {
        Some(m) => vec![m],
        None => config.modes.clone(),
    };
    let report = run_modes(&config, &modes)?;
    let format = match flags.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Jsonl => Format::JsonLines,
    };
    let bytes = emit(&report, format);
    match &flags.out {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{bytes}"),
    }
    Ok(if report.budget_exhausted() {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}
