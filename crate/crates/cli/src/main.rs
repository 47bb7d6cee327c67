//! `latfuzz`: validate knowledge bases, run consultations on patient files,
//! explain rule activations, export surface grids and serve the HTTP API.
//!
//! Exit status: 0 on success, 1 for validation or inference errors, 2 for
//! usage errors (bad flags, missing files, names the knowledge base lacks).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use latfuzz_core::kb::ConflictPolicy;
use latfuzz_core::MatchingMode;

#[derive(Debug, Parser)]
#[command(name = "latfuzz", version, about = "Lattice fuzzy expert system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    SubsetClosure,
    StrictLevel,
}

impl From<Mode> for MatchingMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::SubsetClosure => Self::SubsetClosure,
            Mode::StrictLevel => Self::StrictLevel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    /// Stop at the first unresolvable conflict.
    Strict,
    /// Report every unresolvable conflict before failing.
    Lenient,
}

impl From<Policy> for ConflictPolicy {
    fn from(policy: Policy) -> Self {
        match policy {
            Policy::Strict => Self::Strict,
            Policy::Lenient => Self::Lenient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and compile a knowledge base and print its statistics.
    Validate {
        kb: PathBuf,
        #[arg(long, value_enum, default_value = "strict")]
        policy: Policy,
        /// Also write the compiled artifact here.
        #[arg(long, value_name = "PATH")]
        emit: Option<PathBuf>,
    },
    /// Run a consultation on a patient file.
    Infer {
        kb: PathBuf,
        #[arg(long, value_name = "FILE")]
        patient: PathBuf,
        #[arg(long, value_enum, default_value = "subset-closure")]
        mode: Mode,
        /// Probable-list cut-off on the output universe.
        #[arg(long, value_name = "R")]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the rule activations behind a consultation.
    Explain {
        kb: PathBuf,
        #[arg(long, value_name = "FILE")]
        patient: PathBuf,
        #[arg(long)]
        disease: Option<String>,
        #[arg(long, value_enum, default_value = "subset-closure")]
        mode: Mode,
        /// Include rules that did not fire.
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Export the chance of one disease over two attributes as CSV.
    Surface {
        kb: PathBuf,
        #[arg(long)]
        disease: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Grid points per axis.
        #[arg(long, default_value_t = 21)]
        resolution: usize,
        /// Hold another attribute constant, as `name=value`.
        #[arg(long, value_name = "NAME=VALUE")]
        fixed: Vec<String>,
        #[arg(long, value_enum, default_value = "subset-closure")]
        mode: Mode,
    },
    /// Serve the HTTP API (and the UI bundle, if configured).
    Serve {
        /// Knowledge base file; falls back to LATFUZZ_KB.
        kb: Option<PathBuf>,
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        /// Session journal, replayed at startup.
        #[arg(long, value_name = "PATH")]
        journal: Option<PathBuf>,
        #[arg(long)]
        max_sessions: Option<usize>,
        /// Directory holding the built UI.
        #[arg(long, value_name = "DIR")]
        ui_dir: Option<PathBuf>,
    },
}

/// A failed command: its message and exit status.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1.
    Invalid(String),
    /// Exit 2.
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Invalid(_) => 1,
            Self::Usage(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Invalid(m) | Self::Usage(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { kb, policy, emit } => {
            commands::validate(&kb, policy.into(), emit.as_deref())
        }
        Command::Infer {
            kb,
            patient,
            mode,
            threshold,
            format,
        } => commands::infer(&kb, &patient, mode.into(), threshold, format),
        Command::Explain {
            kb,
            patient,
            disease,
            mode,
            all,
            format,
        } => commands::explain(&kb, &patient, disease.as_deref(), mode.into(), all, format),
        Command::Surface {
            kb,
            disease,
            x,
            y,
            resolution,
            fixed,
            mode,
        } => commands::surface(&kb, &disease, &x, &y, resolution, &fixed, mode.into()),
        Command::Serve {
            kb,
            host,
            port,
            journal,
            max_sessions,
            ui_dir,
        } => commands::serve(commands::ServeFlags {
            kb,
            host,
            port,
            journal,
            max_sessions,
            ui_dir,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
