//! Configuration-driven experiment runner for the sensing library.
//!
//! The binary (`afdm-sim`) loads a TOML experiment description or a named
//! preset, fans (method x sweep point x trial) tasks over a thread pool, and
//! writes machine-readable results plus optional self-contained SVG plots:
//!
//! ```text
//!   config.toml / --preset --> plan --> parallel tasks --> metrics.csv
//!                                         |                detections.csv
//!                                         |                rdm_*.csv, *.svg
//!                                         +--> aggregates --> summary.json
//! ```
//!
//! Output bytes are a pure function of the resolved config and seed; worker
//! count only changes wall time.

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;
pub mod svg;

/// Top-level failure classes, chosen to map onto process exit codes:
/// configuration problems exit 2, filesystem problems exit 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
