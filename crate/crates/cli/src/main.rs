use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use janus_cli::output::to_json;
use janus_cli::scenario::validate_tol;
use janus_cli::{run, CliError, RunOptions, Scenario, Stage, Summary, ValidationOptions};
use rayon::prelude::*;
use serde_json::{json, Value};

/// Verify, evolve and find steady states of Janus-pair master equations.
///
/// Exit status: 0 when every hard check passes, 1 when a check fails, 2 on
/// invalid input or a numerical error (reported as JSON on stderr).
#[derive(Debug, Parser)]
#[command(name = "janus", version)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Output directory; `batch` writes each scenario to `<out>/<file stem>/`.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the scenario tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Accept |beta| above 0.5.
    #[arg(long, global = true)]
    allow_large_beta: bool,

    /// Check the trajectory against a dense matrix exponential and solve the
    /// steady state with a dense null-space decomposition.
    #[arg(long, global = true)]
    dense_oracle: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Commutator contract, charge conservation and Liouvillian assembly checks.
    Verify { config: PathBuf },
    /// Time evolution from the vacuum, written to `trajectory.csv`.
    Evolve { config: PathBuf },
    /// Steady state in the configured sector.
    Steady { config: PathBuf },
    /// All three stages.
    Run { config: PathBuf },
    /// `run` for every `*.toml` in a directory.
    Batch { dir: PathBuf },
}

fn single(
    path: &Path,
    stages: &[Stage],
    out: &Path,
    global: &Global,
    options: &RunOptions,
) -> Result<Summary, CliError> {
    let scenario = Scenario::load(
        path,
        ValidationOptions {
            allow_large_beta: global.allow_large_beta,
        },
    )?;
    run(&scenario, stages, out, options)
}

fn batch_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let read = |source| CliError::Read {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(read)? {
        let path = entry.map_err(read)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "toml") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn print(value: &impl serde::Serialize) {
    print!("{}", to_json(value).expect("summary is plain data"));
}

fn fail(err: &CliError) -> ExitCode {
    eprint!("{}", to_json(&err.to_json()).expect("error is plain data"));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = match cli.global.tol.map(validate_tol).transpose() {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let options = RunOptions {
        tol,
        dense_oracle: cli.global.dense_oracle,
    };

    let (path, stages): (&Path, &[Stage]) = match &cli.command {
        Command::Verify { config } => (config, &[Stage::Verify]),
        Command::Evolve { config } => (config, &[Stage::Evolve]),
        Command::Steady { config } => (config, &[Stage::Steady]),
        Command::Run { config } => (config, &Stage::ALL),
        Command::Batch { dir } => return batch(dir, &cli.global, &options),
    };
    match single(path, stages, &cli.global.out, &cli.global, &options) {
        Ok(summary) => {
            print(&summary);
            if summary.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(&e),
    }
}

fn batch(dir: &Path, global: &Global, options: &RunOptions) -> ExitCode {
    let files = match batch_files(dir) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let results: Vec<(PathBuf, Result<Summary, CliError>)> = files
        .par_iter()
        .map(|f| {
            let out = global
                .out
                .join(f.file_stem().expect("toml files have a stem"));
            (f.clone(), single(f, &Stage::ALL, &out, global, options))
        })
        .collect();

    let mut errors = false;
    let mut pass = true;
    let entries: Vec<Value> = results
        .iter()
        .map(|(file, r)| match r {
            Ok(summary) => {
                pass &= summary.pass;
                serde_json::to_value(summary).expect("summary is plain data")
            }
            Err(e) => {
                errors = true;
                let mut v = e.to_json();
                v["file"] = json!(file);
                v
            }
        })
        .collect();
    print(&json!({ "batch": entries, "pass": pass && !errors }));
    if errors {
        ExitCode::from(2)
    } else if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
