//! `bsa`: best separable approximation of two-qubit density matrices.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid input, 3 no
//! admissible solution, 4 a check failed (verification verdict or oracle
//! tolerance).

mod files;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bsa_core::bsa::{compute_with, verify_theorem1, BsaError, VERIFY_TOL};
use bsa_core::mat4::PSD_TOL;
use bsa_core::qstate::{concurrence_mixed, random_density};
use bsa_core::solver::{ls_oracle, OracleConfig, OracleError, SolverConfig};
use bsa_core::spectra::{spectral_report, SpectralReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use files::{pairs_of, Invalid, MatrixFile, Pair, ResultRecord, Timings};

#[derive(Parser)]
#[command(name = "bsa", version, about = "Best separable approximation of two-qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct Emit {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Numerics {
    /// Slack for positivity of ρ_s and its partial transpose in the solver.
    #[arg(long, default_value_t = PSD_TOL)]
    tol_psd: f64,
    /// Residual tolerance for the optimality conditions.
    #[arg(long, default_value_t = VERIFY_TOL)]
    tol_eig: f64,
    /// Number of solver starts.
    #[arg(long, default_value_t = 64)]
    starts: usize,
    /// Seed for solver starts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Numerics {
    fn solver(&self) -> SolverConfig {
        SolverConfig {
            n_starts: self.starts,
            seed: self.seed,
            psd_slack: self.tol_psd,
            ..SolverConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a state and verify the result.
    Compute {
        input: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
        #[command(flatten)]
        emit: Emit,
    },
    /// Check a decomposition against the optimality conditions.
    Verify {
        input: PathBuf,
        decomposition: PathBuf,
        #[arg(long, default_value_t = VERIFY_TOL)]
        tol_eig: f64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Spectra of X and Y with the identities relating them.
    Spectra {
        input: PathBuf,
        #[command(flatten)]
        emit: Emit,
    },
    /// Concurrence of a state.
    Concurrence {
        input: PathBuf,
        #[command(flatten)]
        emit: Emit,
    },
    /// Emit a seeded random density matrix as a matrix file.
    Random {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        rank: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        label: Option<String>,
        #[command(flatten)]
        emit: Emit,
    },
    /// Compare the algebraic weight with direct numerical maximization.
    OracleCompare {
        input: PathBuf,
        /// Largest accepted |λ_algebraic − λ_oracle|.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Random starts of the oracle.
        #[arg(long, default_value_t = 400)]
        oracle_starts: usize,
        #[command(flatten)]
        numerics: Numerics,
        #[command(flatten)]
        emit: Emit,
    },
}

enum Failure {
    Invalid(String),
    NoSolution(String),
    CheckFailed,
    Internal(String),
}

impl From<Invalid> for Failure {
    fn from(e: Invalid) -> Self {
        Failure::Invalid(e.0)
    }
}

impl From<BsaError> for Failure {
    fn from(e: BsaError) -> Self {
        match e {
            BsaError::NoAdmissibleSolution { .. } | BsaError::MultipleAdmissible { .. } => {
                Failure::NoSolution(e.to_string())
            }
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn emit<T: Serialize>(value: &T, emit: &Emit) -> Result<(), Failure> {
    let text = match emit.format {
        Format::Json => output::to_json(value),
        Format::Table => output::to_table(value),
    };
    match &emit.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Internal(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

#[derive(Serialize)]
struct SpectraRecord {
    input_label: Option<String>,
    concurrence: f64,
    phi4: Vec<Pair>,
    #[serde(flatten)]
    report: SpectralReport,
}

#[derive(Serialize)]
struct ConcurrenceRecord {
    input_label: Option<String>,
    concurrence: f64,
}

#[derive(Serialize)]
struct OracleRecord {
    input_label: Option<String>,
    path: bsa_core::Path,
    lambda_algebraic: f64,
    lambda_oracle: f64,
    difference: f64,
    tol: f64,
    oracle_evaluations: usize,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compute {
            input,
            numerics,
            emit: e,
        } => {
            let (file, rho) = MatrixFile::load(&input)?;
            let t0 = Instant::now();
            let d = compute_with(&rho, &numerics.solver())?;
            let compute_ms = ms(t0);
            let t1 = Instant::now();
            let report = verify_theorem1(&rho, &d, numerics.tol_eig)?;
            let verify_ms = ms(t1);
            let c = concurrence_mixed(&rho).map_err(|e| Failure::Internal(e.to_string()))?;
            let mut record = ResultRecord::new(file.label, &d, c);
            record.verification = Some(report);
            record.timings = Some(Timings {
                compute_ms,
                verify_ms,
            });
            emit(&record, &e)
        }
        Command::Verify {
            input,
            decomposition,
            tol_eig,
            emit: e,
        } => {
            let (_, rho) = MatrixFile::load(&input)?;
            let record: ResultRecord = files::read_json(&decomposition)?;
            let d = record.decomposition()?;
            let report = verify_theorem1(&rho, &d, tol_eig)?;
            emit(&report, &e)?;
            if report.verdict {
                Ok(())
            } else {
                eprintln!("verification failed");
                Err(Failure::CheckFailed)
            }
        }
        Command::Spectra { input, emit: e } => {
            let (file, rho) = MatrixFile::load(&input)?;
            let report = spectral_report(&rho).map_err(|e| Failure::Internal(e.to_string()))?;
            let record = SpectraRecord {
                input_label: file.label,
                concurrence: report.concurrence(),
                phi4: pairs_of(report.phi4.amplitudes()),
                report,
            };
            emit(&record, &e)
        }
        Command::Concurrence { input, emit: e } => {
            let (file, rho) = MatrixFile::load(&input)?;
            let c = concurrence_mixed(&rho).map_err(|e| Failure::Internal(e.to_string()))?;
            emit(
                &ConcurrenceRecord {
                    input_label: file.label,
                    concurrence: c,
                },
                &e,
            )
        }
        Command::Random {
            rank,
            seed,
            label,
            emit: e,
        } => {
            let rho = random_density(rank as usize, seed)
                .map_err(|e| Failure::Internal(e.to_string()))?;
            let label = label.unwrap_or_else(|| format!("random rank {rank} seed {seed}"));
            emit(&MatrixFile::from_state(&rho, Some(label)), &e)
        }
        Command::OracleCompare {
            input,
            tol,
            oracle_starts,
            numerics,
            emit: e,
        } => {
            let (file, rho) = MatrixFile::load(&input)?;
            let d = compute_with(&rho, &numerics.solver())?;
            let cfg = OracleConfig {
                random_starts: oracle_starts,
                seed: numerics.seed,
                ..OracleConfig::default()
            };
            let (lambda_oracle, evaluations) = match ls_oracle(&rho, &cfg) {
                Ok(o) => (o.lambda, o.evaluations),
                // a separable state is its own separable part
                Err(OracleError::NotEntangled) => (1.0, 0),
                Err(other) => return Err(Failure::Internal(other.to_string())),
            };
            let difference = (d.lambda - lambda_oracle).abs();
            emit(
                &OracleRecord {
                    input_label: file.label,
                    path: d.path,
                    lambda_algebraic: d.lambda,
                    lambda_oracle,
                    difference,
                    tol,
                    oracle_evaluations: evaluations,
                },
                &e,
            )?;
            if difference <= tol {
                Ok(())
            } else {
                eprintln!("difference {difference:e} exceeds {tol:e}");
                Err(Failure::CheckFailed)
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("invalid input: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::NoSolution(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
        Err(Failure::CheckFailed) => ExitCode::from(4),
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
