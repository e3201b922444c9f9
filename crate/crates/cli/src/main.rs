//! `afdm-sim`: run or validate sensing experiments described in TOML.
//!
//! Exit codes: 0 success, 2 configuration problem (bad flags, bad config,
//! unknown preset, validation errors), 3 filesystem problem.

use std::path::PathBuf;
use std::process::ExitCode;

use afdm_cli::config::{self, ExperimentConfig, Severity};
use afdm_cli::output::OutputFormat;
use afdm_cli::presets::{preset, PRESET_NAMES};
use afdm_cli::runner::{run, RunOptions};
use afdm_cli::{CliError, Result};
use clap::{Parser, Subcommand};

/// Environment variable consulted for the worker count when `--threads` is
/// not given.
const THREADS_ENV: &str = "AFDM_SIM_THREADS";

/// stdout may close early (e.g. piped into `head`); dropped status lines are
/// not an error.
fn say(line: String) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}

#[derive(Parser)]
#[command(name = "afdm-sim", version, about = "Chirp-waveform sensing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write result files.
    Run {
        /// TOML experiment config (mutually exclusive with --preset).
        config: Option<PathBuf>,
        /// Built-in experiment: table1, desk, fig3, fig4, fig5, fig6, table2.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory; defaults to run.output_dir or ./afdm_out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override run.seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; falls back to AFDM_SIM_THREADS, then all cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Table format for metrics and detections.
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
    /// Check a config file and print diagnostics without running anything.
    Validate {
        /// TOML experiment config.
        config: PathBuf,
    },
}

fn load_config(path: Option<PathBuf>, preset_name: Option<String>) -> Result<ExperimentConfig> {
    match (path, preset_name) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "give either a config file or --preset, not both".into(),
        )),
        (None, None) => Err(CliError::Config(
            "a config file or --preset is required".into(),
        )),
        (Some(p), None) => config::load(&p),
        (None, Some(name)) => preset(&name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset '{name}'; available: {}",
                PRESET_NAMES.join(", ")
            ))
        }),
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(text) => {
            let n: usize = text.trim().parse().map_err(|_| {
                CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{text}'"))
            })?;
            if n == 0 {
                return Err(CliError::Config(format!("{THREADS_ENV} must be nonzero")));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn cmd_run(
    path: Option<PathBuf>,
    preset_name: Option<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
    format: OutputFormat,
) -> Result<()> {
    let mut cfg = load_config(path, preset_name)?;
    if let Some(seed) = seed {
        cfg.run.seed = seed;
    }
    let out_dir = out
        .or_else(|| cfg.run.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("afdm_out"));
    let opts = RunOptions {
        out_dir,
        threads: resolve_threads(threads)?,
        format,
    };
    let summary = run(&cfg, &opts)?;
    for w in &summary.warnings {
        eprintln!("{w}");
    }
    say(format!(
        "wrote {} files to {} ({} metric rows, {} detections)",
        summary.files.len(),
        summary.out_dir.display(),
        summary.metrics_rows,
        summary.detection_rows
    ));
    for f in &summary.files {
        say(format!("  {f}"));
    }
    Ok(())
}

fn cmd_validate(path: PathBuf) -> Result<()> {
    let cfg = config::load(&path)?;
    let diags = cfg.validate();
    for d in &diags {
        say(format!("{d}"));
    }
    let errors = diags
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .count();
    if errors > 0 {
        Err(CliError::Config(format!(
            "{}: {errors} error(s)",
            path.display()
        )))
    } else {
        say(format!("{}: ok", path.display()));
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            preset,
            out,
            seed,
            threads,
            format,
        } => cmd_run(config, preset, out, seed, threads, format),
        Command::Validate { config } => cmd_validate(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
