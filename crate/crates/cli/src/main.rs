//! `locality-lab`: command-line front end for the locality-lab library.

mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

/// Environment variable supplying the default tolerance when `--tol` is absent.
pub const TOL_ENV: &str = "LOCALITY_LAB_TOL";

#[derive(Parser, Debug)]
#[command(name = "locality-lab", version, about = "Local causality, Bell inequalities and relative-state traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run condition checks on a behavior or hidden-variable model file.
    Check(CheckArgs),
    /// CHSH demonstrations: optimisation, correlator grids, classical bound.
    Chsh(ChshArgs),
    /// Three-setting inequality for the singlet at angles a, b, c.
    Bell1964(Bell1964Args),
    /// Relative-state trace of the EPR protocol with B measuring at theta.
    Everett(EverettArgs),
    /// One particle split between two boxes, each opened locally.
    Boxes(FormatArg),
    /// Monte Carlo local sign model.
    Signmodel(SignModelArgs),
    /// Light-cone checks on an event timeline file.
    Timeline(TimelineArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct FormatArg {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConditionName {
    NoSignalling,
    ParameterIndependence,
    OutcomeIndependence,
    Factorizability,
    Jarrett,
    SuppesZanotti,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Comma-separated conditions; defaults to no-signalling, parameter
    /// independence, outcome independence and factorizability.
    #[arg(long, value_enum, value_delimiter = ',')]
    conditions: Vec<ConditionName>,
    /// Violation tolerance (default: $LOCALITY_LAB_TOL, else 1e-9).
    #[arg(long, value_parser = parse_tolerance)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    file: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateName {
    Singlet,
    Triplet0,
    Product,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").required(true).args(["optimize", "grid", "classical"])))]
struct ChshArgs {
    /// Search all four angles for the largest |S|.
    #[arg(long)]
    optimize: bool,
    /// Emit E(a,b) as CSV on a square angle grid.
    #[arg(long, requires = "step")]
    grid: bool,
    /// Grid spacing in radians.
    #[arg(long)]
    step: Option<f64>,
    /// Enumerate the 16 deterministic local strategies.
    #[arg(long)]
    classical: bool,
    #[arg(long, value_enum, default_value_t = StateName::Singlet)]
    state: StateName,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug)]
struct Bell1964Args {
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, allow_hyphen_values = true)]
    c: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug)]
struct EverettArgs {
    /// B-side measurement angle in radians; A measures along z.
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug)]
struct SignModelArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    seed: u64,
    /// Measurement angles in radians, used on both sides.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    settings: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug)]
struct TimelineArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    file: PathBuf,
}

/// Which subcommand a [`RunConfig`] drives.
#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    Check { conditions: Vec<ConditionName> },
    Chsh { mode: ChshMode, state: StateName },
    Bell1964 { a: f64, b: f64, c: f64 },
    Everett { theta: f64 },
    Boxes,
    SignModel { n: u64, settings: Vec<f64> },
    Timeline,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChshMode {
    Optimize,
    Grid { step: f64 },
    Classical,
}

/// Fully resolved invocation. Identical configurations produce identical
/// output bytes.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub input_path: Option<PathBuf>,
    pub output_format: Format,
    pub seed: Option<u64>,
    pub tolerance: f64,
}

/// Outcome of a run: the text to print and the process exit status.
pub struct Outcome {
    pub output: String,
    pub code: u8,
}

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT_ERROR: u8 = 2;

fn default_tolerance() -> Result<f64, String> {
    match std::env::var(TOL_ENV) {
        Ok(v) => parse_tolerance(&v).map_err(|e| format!("{TOL_ENV}: {e}")),
        Err(_) => Ok(locality_lab::causality::DEFAULT_HYPOTHESIS_TOL),
    }
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(format!("tolerance must be a finite nonnegative number, got `{s}`")),
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, String> {
    let tol = default_tolerance()?;
    let cfg = |mode, input_path, output_format, seed, tolerance| RunConfig {
        mode,
        input_path,
        output_format,
        seed,
        tolerance,
    };
    Ok(match cli.command {
        Command::Check(a) => {
            let tolerance = a.tol.unwrap_or(tol);
            cfg(
                Mode::Check {
                    conditions: a.conditions,
                },
                Some(a.file),
                a.format,
                None,
                tolerance,
            )
        }
        Command::Chsh(a) => {
            let mode = if a.optimize {
                ChshMode::Optimize
            } else if a.grid {
                let step = a.step.ok_or("--grid requires --step")?;
                if !(step.is_finite() && step > 0.0) {
                    return Err(format!("--step must be positive, got {step}"));
                }
                ChshMode::Grid { step }
            } else {
                ChshMode::Classical
            };
            cfg(Mode::Chsh { mode, state: a.state }, None, a.format, None, tol)
        }
        Command::Bell1964(a) => cfg(Mode::Bell1964 { a: a.a, b: a.b, c: a.c }, None, a.format, None, tol),
        Command::Everett(a) => cfg(Mode::Everett { theta: a.theta }, None, a.format, None, tol),
        Command::Boxes(a) => cfg(Mode::Boxes, None, a.format, None, tol),
        Command::Signmodel(a) => cfg(
            Mode::SignModel {
                n: a.n,
                settings: a.settings,
            },
            None,
            a.format,
            Some(a.seed),
            tol,
        ),
        Command::Timeline(a) => cfg(Mode::Timeline, Some(a.file), a.format, None, tol),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = resolve(cli).and_then(|cfg| commands::run(&cfg));
    match outcome {
        Ok(o) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(o.output.as_bytes()).and_then(|_| out.flush());
            ExitCode::from(o.code)
        }
        Err(msg) => {
            let _ = writeln!(std::io::stderr(), "error: {msg}");
            ExitCode::from(EXIT_INPUT_ERROR)
        }
    }
}
