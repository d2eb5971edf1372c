use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use omp_lab_core::harness::csv;
use omp_lab_core::sensing::rip_delta_lower_bound;
use omp_lab_core::{
    check_rip_premise, constants, generate, omp_decode, rip_delta_exact, run_experiment, run_suite,
    Ensemble, Error, ExperimentConfig, MatrixSpec, OmpOptions, PremiseOptions, Result, Suite,
    VerifyConfig, SCHEMA_VERSION,
};

/// Orthogonal Matching Pursuit experiments and bound checks.
#[derive(Debug, Parser)]
#[command(name = "omp-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a random measurement matrix and write it as CSV.
    GenMatrix {
        #[arg(long, value_enum)]
        ensemble: EnsembleArg,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run OMP for a fixed number of iterations on y.
    Decode {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        iters: usize,
        #[arg(long)]
        stop_rel: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute or bound the restricted isometry constant of order k.
    Rip {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        /// Enumerate every support (the default when no sampling is requested).
        #[arg(long, conflicts_with = "samples")]
        exact: bool,
        /// Number of random supports for a Monte-Carlo lower bound.
        #[arg(long, requires = "seed")]
        samples: Option<usize>,
        #[arg(long, requires = "samples")]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the RIP premise δ_k + (1+δ)δ_{αk} ≤ δ.
    Premise {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a randomized verification suite.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a seeded batch of recovery trials.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print α, C0, C1, C2 and C3 as JSON.
    Constants {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        q: f64,
        #[arg(long = "C-bound")]
        c_bound: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnsembleArg {
    Gaussian,
    Bernoulli,
    Orthogonal,
}

impl From<EnsembleArg> for Ensemble {
    fn from(arg: EnsembleArg) -> Self {
        match arg {
            EnsembleArg::Gaussian => Ensemble::Gaussian,
            EnsembleArg::Bernoulli => Ensemble::Bernoulli,
            EnsembleArg::Orthogonal => Ensemble::Orthogonal,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Theorem1,
    Theorem2,
    Zhang,
    Lemma1,
    Lemma2,
    Holder,
}

impl From<SuiteArg> for Suite {
    fn from(arg: SuiteArg) -> Self {
        match arg {
            SuiteArg::Theorem1 => Suite::Theorem1,
            SuiteArg::Theorem2 => Suite::Theorem2,
            SuiteArg::Zhang => Suite::Zhang,
            SuiteArg::Lemma1 => Suite::Lemma1,
            SuiteArg::Lemma2 => Suite::Lemma2,
            SuiteArg::Holder => Suite::Holder,
        }
    }
}

/// Adds the schema version to a report body.
#[derive(Serialize)]
struct Versioned<'a, T> {
    v: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| with_path(e, path))
}

fn write_versioned<T: Serialize>(path: &Path, body: &T) -> Result<()> {
    write_json(
        path,
        &Versioned {
            v: SCHEMA_VERSION,
            body,
        },
    )
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| with_path(e, path))?;
    serde_json::from_str(&text).map_err(|e| match Error::from(e) {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

fn with_path(err: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(
        err.kind(),
        format!("{}: {err}", path.display()),
    ))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenMatrix {
            ensemble,
            rows,
            cols,
            seed,
            out,
        } => {
            let phi = generate(&MatrixSpec::new(ensemble.into(), rows, cols, seed))?;
            csv::save_matrix(&phi, &out)
        }
        Command::Decode {
            matrix,
            y,
            iters,
            stop_rel,
            out,
        } => {
            let phi = csv::load_matrix(&matrix)?;
            let y = csv::load_vector(&y)?;
            let mut opts = OmpOptions::new(iters);
            if let Some(rel) = stop_rel {
                opts = opts.with_residual_stop(rel);
            }
            write_versioned(&out, &omp_decode(&phi, &y, &opts)?)
        }
        Command::Rip {
            matrix,
            k,
            exact: _,
            samples,
            seed,
            out,
        } => {
            let phi = csv::load_matrix(&matrix)?;
            let estimate = match (samples, seed) {
                (Some(samples), Some(seed)) => rip_delta_lower_bound(&phi, k, samples, seed)?,
                _ => rip_delta_exact(&phi, k)?,
            };
            write_versioned(&out, &estimate)
        }
        Command::Premise {
            matrix,
            k,
            delta,
            out,
        } => {
            let phi = csv::load_matrix(&matrix)?;
            write_versioned(
                &out,
                &check_rip_premise(&phi, k, delta, &PremiseOptions::default())?,
            )
        }
        Command::Verify { suite, config, out } => {
            let config: VerifyConfig = read_json(&config)?;
            let report = run_suite(suite.into(), &config)?;
            write_json(&out, &report)?;
            println!(
                "{}: {}/{} hold, {} counterexamples",
                report.suite, report.holds, report.trials, report.counterexamples
            );
            Ok(())
        }
        Command::Experiment { config, out } => {
            let config: ExperimentConfig = read_json(&config)?;
            let mut report = run_experiment(&config)?;
            report.timestamp = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs());
            write_json(&out, &report)
        }
        Command::Constants { delta, q, c_bound } => {
            let c = constants(delta, q, c_bound)?;
            println!("{}", serde_json::to_string_pretty(&c)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_io() { 2 } else { 1 })
        }
    }
}
