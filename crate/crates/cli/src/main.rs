use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use apl_core::scanner::DefectMode;

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "apl",
    version,
    about = "Almost anti-periodic function analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Anti,
    Plain,
}

impl From<ModeArg> for DefectMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Anti => DefectMode::Anti,
            ModeArg::Plain => DefectMode::Plain,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectrum and Bohr coefficients of a function
    Analyze {
        function: PathBuf,
        /// frequencies at which to report Bohr coefficients
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        freqs: Vec<f64>,
        /// horizon for the numeric long-time average
        #[arg(long = "numeric-T")]
        numeric_t: Option<f64>,
    },
    /// Certify or refute ε-(anti)periods on a τ grid
    Scan {
        function: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        tau_max: f64,
        #[arg(long)]
        tau_step: f64,
        #[arg(long, value_enum, default_value = "anti")]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Relative-density summary of a scan report
    Density { report: PathBuf },
    /// Membership in the closed span of almost anti-periodic functions
    Anp { function: PathBuf },
    /// Write e^{-irt} f(t)
    Modulate {
        function: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        freq: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convolve a signal with an exponential-power kernel
    Convolve {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        signal: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long)]
        step: f64,
        /// H(t) = ∫_0^t R(t-s) f(s) ds instead of the infinite product
        #[arg(long)]
        finite: bool,
        /// exponent for the summability constant (default: inf)
        #[arg(long, default_value_t = f64::INFINITY)]
        q: f64,
    },
    /// Stepanov S^p anti-periodicity bracket at one τ
    Stepanov {
        function: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Generate seeded random functions
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// Exactly ω-anti-periodic polynomial with odd harmonics of π/ω
    Anti {
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        terms: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

const VALIDATION_EXIT: u8 = 1;
const NUMERIC_EXIT: u8 = 2;

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("APL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("APL_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(VALIDATION_EXIT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(VALIDATION_EXIT);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() {
                NUMERIC_EXIT
            } else {
                VALIDATION_EXIT
            })
        }
    }
}
