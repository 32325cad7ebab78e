//! `ccn-lab`: coefficient queries, region maps, chain diagnostics,
//! simulations, solitary waves and the validation suite.
//!
//! Exit codes: 0 ok, 1 a validation gate failed, 2 domain or parameter
//! error, 3 degenerate characteristics, 4 I/O or configuration error,
//! 5 solver failure.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use ccn_core::CcnError;
use clap::{Parser, Subcommand};

use config::{PointArgs, RegionsArgs, SimulateArgs, SolitonArgs, ValidateArgs};

#[derive(Parser, Debug)]
#[command(name = "ccn-lab", version, about = "Characteristic Cross-Newell laboratory for the real Ginzburg-Landau equation")]
struct Cli {
    /// JSON file with parameters for the subcommand; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficient bundle and its cross-checks at one wavenumber
    Coeffs(PointArgs),
    /// Region map of the wavenumber plane
    Regions(RegionsArgs),
    /// Twisted Jordan chain and its residuals
    Chain(PointArgs),
    /// Evolve the RGL or CCN equation
    Simulate(SimulateArgs),
    /// KdV solitary wave and its image in the slow plane
    Soliton(SolitonArgs),
    /// Run the acceptance gates
    Validate(ValidateArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Coeffs(_) => "coeffs",
            Command::Regions(_) => "regions",
            Command::Chain(_) => "chain",
            Command::Simulate(_) => "simulate",
            Command::Soliton(_) => "soliton",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(Debug)]
pub enum LabError {
    Core(CcnError),
    Config(String),
    Io(String),
}

impl std::fmt::Display for LabError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabError::Core(e) => write!(f, "{e}"),
            LabError::Config(m) => write!(f, "configuration error: {m}"),
            LabError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<CcnError> for LabError {
    fn from(e: CcnError) -> Self {
        LabError::Core(e)
    }
}

impl LabError {
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) | LabError::Io(_) => 4,
            LabError::Core(e) => match e {
                CcnError::OutsideExistence { .. }
                | CcnError::ComplexCharacteristics { .. }
                | CcnError::NotCharacteristic { .. }
                | CcnError::Parameter(_) => 2,
                CcnError::DegenerateLeading { .. }
                | CcnError::CoalescingCharacteristics { .. }
                | CcnError::DegenerateReduction(_) => 3,
                CcnError::Config(_) | CcnError::Io(_) | CcnError::Format(_) => 4,
                CcnError::Dimension(_)
                | CcnError::Singular
                | CcnError::IllPosed(_)
                | CcnError::Divergence { .. }
                | CcnError::DefectPresent { .. } => 5,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Config(_) => "config",
            LabError::Io(_) => "io",
            LabError::Core(e) => match e {
                CcnError::OutsideExistence { .. } => "outside_existence",
                CcnError::ComplexCharacteristics { .. } => "complex_characteristics",
                CcnError::DegenerateLeading { .. } => "degenerate_leading",
                CcnError::CoalescingCharacteristics { .. } => "coalescing_characteristics",
                CcnError::NotCharacteristic { .. } => "not_characteristic",
                CcnError::Dimension(_) => "dimension",
                CcnError::Singular => "singular",
                CcnError::DegenerateReduction(_) => "degenerate_reduction",
                CcnError::Parameter(_) => "parameter",
                CcnError::Config(_) => "config",
                CcnError::IllPosed(_) => "ill_posed",
                CcnError::Divergence { .. } => "divergence",
                CcnError::DefectPresent { .. } => "defect_present",
                CcnError::Io(_) => "io",
                CcnError::Format(_) => "format",
            },
        }
    }
}

fn init_threads() -> Result<(), LabError> {
    let Ok(raw) = std::env::var("CCN_LAB_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| LabError::Config(format!("CCN_LAB_THREADS = {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| LabError::Config(e.to_string()))
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let name = cli.command.name();
    let outcome = init_threads().and_then(|()| commands::run(cli.command, cli.config.as_deref()));
    match outcome {
        Ok((doc, code)) => {
            emit(&output::render(&doc));
            ExitCode::from(code)
        }
        Err(e) => {
            emit(&output::render(&output::error_document(name, &e)));
            eprintln!("ccn-lab {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
