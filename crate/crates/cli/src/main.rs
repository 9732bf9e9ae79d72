mod commands;
mod report;
mod theta;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "onebranch", version, about = "Branch decomposition, initial-state ensembles and Born-rule checks for small qubit models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spin recorded along z then x: branch table, ensemble, replays.
    Toy {
        #[command(flatten)]
        common: Common,
    },
    /// Sampled singlet correlation against -cos θ.
    Bell {
        #[command(flatten)]
        common: Common,
        /// Comma-separated angles in radians; `pi/3` style multiples accepted.
        #[arg(long, default_value = "0,pi/6,pi/4,pi/3,pi/2,2pi/3,pi")]
        theta: String,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
    },
    /// Born-rule equivalence on random schedules, or on one schedule file.
    VerifyBorn {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        qubits: u8,
        #[arg(long, default_value_t = 2)]
        events: u8,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Branch table and ensemble dump for a schedule file.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        config: PathBuf,
        /// Leave initial-state amplitudes out of the ensemble dump.
        #[arg(long)]
        no_amplitudes: bool,
    },
    /// Draw one initial state and replay it; `--n` adds draw counts.
    SampleReplay {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<u64>,
    },
}

fn emit(common: &Common, payload: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, payload).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Exit code 1 names the failed invariants on stderr.
fn verdict(failures: Vec<String>) -> ExitCode {
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in failures {
            eprintln!("invariant failed: {f}");
        }
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Toy { common } => {
            let report = commands::run_toy(common.seed)?;
            let body = match common.format {
                Some(Format::Csv) => report.to_csv(),
                _ => json(&report)?,
            };
            emit(&common, &body)?;
            Ok(verdict(report.failures()))
        }
        Command::Decompose {
            common,
            config,
            no_amplitudes,
        } => {
            let report = commands::run_decompose(&config, common.seed, !no_amplitudes)?;
            let body = match common.format {
                Some(Format::Csv) => report.to_csv(),
                _ => json(&report)?,
            };
            emit(&common, &body)?;
            Ok(verdict(report.failures()))
        }
        Command::Bell { common, theta, n } => {
            let grid = theta::parse_grid(&theta)?;
            let report = commands::run_bell(&grid, n, common.seed)?;
            let body = match common.format {
                Some(Format::Json) => json(&report)?,
                _ => report.to_csv(),
            };
            emit(&common, &body)?;
            let failures = report
                .rows
                .iter()
                .filter(|r| !r.passed)
                .map(|r| {
                    format!(
                        "theta = {}: |{} - {}| > {} x {}",
                        r.result.theta, r.result.estimate, r.result.exact, commands::BELL_SIGMA_BOUND, r.result.stderr
                    )
                })
                .collect();
            Ok(verdict(failures))
        }
        Command::VerifyBorn {
            common,
            config: Some(path),
            ..
        } => {
            let report = commands::run_verify_file(&path, common.seed)?;
            emit(&common, &json(&report)?)?;
            Ok(verdict(report.failures()))
        }
        Command::VerifyBorn {
            common,
            config: None,
            qubits,
            events,
            trials,
        } => {
            let report = commands::run_verify_born(qubits.into(), events.into(), trials, common.seed)?;
            match commands::counterexample_toml(&report)? {
                Some(toml) => {
                    emit(&common, &toml)?;
                    let c = report.counterexample.as_ref().expect("counterexample present");
                    let failures = c
                        .deviations
                        .named()
                        .iter()
                        .filter(|(_, v)| *v >= report.tolerance)
                        .map(|(n, v)| format!("{n} = {v:.3e} in trial {}", c.trial))
                        .collect();
                    Ok(verdict(failures))
                }
                None => {
                    emit(&common, &json(&report)?)?;
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::SampleReplay { common, config, n } => {
            let report = commands::run_sample_replay(config.as_deref(), common.seed, n)?;
            emit(&common, &json(&report)?)?;
            let failures = if report.passed {
                vec![]
            } else {
                vec![format!("replay of {} (leakage {:.3e})", report.drawn_history, report.replay.max_leakage)]
            };
            Ok(verdict(failures))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
