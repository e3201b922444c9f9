//! Experiment configuration: TOML schema, validation diagnostics, and the
//! translation into core scenario types.
//!
//! A config is one file with flat sections:
//!
//! ```toml
//! [params]                     # waveform numerology
//! n_subcarriers = 512
//! n_symbols = 64
//! n_cpp = 32
//! alpha_max = 2
//! k_v = 4
//! carrier_hz = 24.0e9
//! bandwidth_hz = 93.1e6
//!
//! [[targets]]                  # one table per target
//! delay_bins = 12              # or range_m = 19.3
//! normalized_doppler = 1.47    # or velocity_mps = 80.0
//! gain_db = 0.0                # optional; 0 dB unit gain
//! phase_rad = 0.0              # optional
//!
//! [noise]
//! snr_db = 0.0                 # omit the section for a noiseless run
//!
//! [sweep]                      # optional; one swept variable
//! variable = "doppler"         # "snr_db" | "doppler" (normalized)
//! start = 0.0
//! stop = 2.0
//! step = 0.1                   # or values = [0.1, 0.98]
//!
//! [run]
//! methods = ["afdm_time", "afdm_daft", "ofdm_division"]
//! trials = 1
//! seed = 1
//! output_dir = "out"
//!
//! [detector]
//! mode = "threshold"           # "threshold" | "cfar"
//! threshold_db = 13.0
//! pfa = 1.0e-4                 # cfar mode
//! guard = 2
//! training = 4
//!
//! [output]
//! write_rdm = "first"          # "none" | "first" | "all" (sweep points)
//! svg = false
//! ```
//!
//! A Doppler sweep overrides every target's normalized Doppler at each point;
//! an SNR sweep overrides `[noise]`.

use crate::{CliError, Result};
use afdm_core::channel::Target;
use afdm_core::estimator::Detector;
use afdm_core::cfar::CfarConfig;
use afdm_core::params::AfdmParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ParamsConfig,
    #[serde(default)]
    pub targets: Vec<TargetConfig>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    pub run: RunConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub n_cpp: usize,
    pub alpha_max: u32,
    pub k_v: u32,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(default)]
    pub range_m: Option<f64>,
    #[serde(default)]
    pub delay_bins: Option<usize>,
    #[serde(default)]
    pub velocity_mps: Option<f64>,
    #[serde(default)]
    pub normalized_doppler: Option<f64>,
    #[serde(default)]
    pub gain_db: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    SnrDb,
    Doppler,
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::Doppler => "doppler",
        })
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

impl SweepConfig {
    /// Materializes the grid: explicit `values` win over start/stop/step.
    /// Returns an empty vector when start/stop/step are inconsistent.
    pub fn points(&self) -> Vec<f64> {
        if let Some(values) = &self.values {
            return values.clone();
        }
        match (self.start, self.stop, self.step) {
            (Some(start), Some(stop), Some(step)) if step > 0.0 && stop >= start => {
                let n = ((stop - start) / step).round() as usize;
                (0..=n).map(|i| start + step * i as f64).collect()
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AfdmTime,
    AfdmDaft,
    OfdmDivision,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::AfdmTime => "afdm_time",
            Method::AfdmDaft => "afdm_daft",
            Method::OfdmDivision => "ofdm_division",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub methods: Vec<Method>,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_trials() -> u32 {
    1
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorMode {
    Threshold,
    Cfar,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default = "default_detector_mode")]
    pub mode: DetectorMode,
    #[serde(default = "default_threshold_db")]
    pub threshold_db: f64,
    #[serde(default = "default_pfa")]
    pub pfa: f64,
    #[serde(default = "default_guard")]
    pub guard: usize,
    #[serde(default = "default_training")]
    pub training: usize,
}

fn default_detector_mode() -> DetectorMode {
    DetectorMode::Threshold
}

fn default_threshold_db() -> f64 {
    13.0
}

fn default_pfa() -> f64 {
    1.0e-4
}

fn default_guard() -> usize {
    2
}

fn default_training() -> usize {
    4
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            mode: default_detector_mode(),
            threshold_db: default_threshold_db(),
            pfa: default_pfa(),
            guard: default_guard(),
            training: default_training(),
        }
    }
}

impl DetectorConfig {
    pub fn to_detector(&self) -> Detector {
        match self.mode {
            DetectorMode::Threshold => Detector::Threshold {
                offset_db: self.threshold_db,
            },
            DetectorMode::Cfar => Detector::Cfar(self.to_cfar()),
        }
    }

    pub fn to_cfar(&self) -> CfarConfig {
        CfarConfig {
            pfa: self.pfa,
            guard: self.guard,
            training: self.training,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RdmPolicy {
    None,
    First,
    All,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_rdm_policy")]
    pub write_rdm: RdmPolicy,
    #[serde(default)]
    pub svg: bool,
}

fn default_rdm_policy() -> RdmPolicy {
    RdmPolicy::First
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            write_rdm: default_rdm_policy(),
            svg: false,
        }
    }
}

/// One human-readable validation finding. Errors abort a run; warnings don't.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

fn error(message: String) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        message,
    }
}

fn warning(message: String) -> Diagnostic {
    Diagnostic {
        severity: Severity::Warning,
        message,
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn build_params(&self) -> std::result::Result<AfdmParams, String> {
        let p = &self.params;
        AfdmParams::new(
            p.n_subcarriers,
            p.n_symbols,
            p.n_cpp,
            p.alpha_max,
            p.k_v,
            p.carrier_hz,
            p.bandwidth_hz,
        )
        .map_err(|e| e.to_string())
    }

    /// Sweep axis name and grid; a sweep-free config is a single unnamed point.
    pub fn sweep_points(&self) -> (String, Vec<f64>) {
        match &self.sweep {
            Some(s) => (s.variable.to_string(), s.points()),
            None => ("none".to_string(), vec![0.0]),
        }
    }

    /// Resolves one target table against the numerology.
    pub fn resolve_target(
        &self,
        t: &TargetConfig,
        p: &AfdmParams,
    ) -> std::result::Result<Target, String> {
        let l = match (t.delay_bins, t.range_m) {
            (Some(l), None) => l,
            (None, Some(r)) => (r / p.range_resolution_m()).round() as usize,
            (Some(_), Some(_)) => return Err("both delay_bins and range_m given".into()),
            (None, None) => return Err("one of delay_bins or range_m is required".into()),
        };
        let nu = match (t.normalized_doppler, t.velocity_mps) {
            (Some(nu), None) => nu,
            (None, Some(v)) => p.velocity_to_doppler(v) / p.subcarrier_spacing_hz(),
            (Some(_), Some(_)) => {
                return Err("both normalized_doppler and velocity_mps given".into())
            }
            (None, None) => {
                return Err("one of normalized_doppler or velocity_mps is required".into())
            }
        };
        let gain = Complex64::from_polar(10f64.powf(t.gain_db / 20.0), t.phase_rad);
        Ok(Target::from_bins(gain, l, nu, p))
    }

    pub fn resolve_targets(&self, p: &AfdmParams) -> std::result::Result<Vec<Target>, String> {
        self.targets
            .iter()
            .enumerate()
            .map(|(i, t)| {
                self.resolve_target(t, p)
                    .map_err(|e| format!("target {i}: {e}"))
            })
            .collect()
    }

    /// Structural and physical checks; never mutates, never touches the
    /// filesystem. An empty list means the config is runnable as-is.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let params = match self.build_params() {
            Ok(p) => Some(p),
            Err(e) => {
                out.push(error(format!("params: {e}")));
                None
            }
        };
        if self.run.methods.is_empty() {
            out.push(error("run.methods must name at least one method".into()));
        }
        if self.run.trials == 0 {
            out.push(error("run.trials must be at least 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.points().is_empty() {
                out.push(error(
                    "sweep needs a nonempty values list, or start <= stop with step > 0".into(),
                ));
            }
            if sweep.values.is_some()
                && (sweep.start.is_some() || sweep.stop.is_some() || sweep.step.is_some())
            {
                out.push(warning(
                    "sweep.values overrides start/stop/step; drop the unused keys".into(),
                ));
            }
        }
        if self.detector.mode == DetectorMode::Cfar
            && !(0.0 < self.detector.pfa && self.detector.pfa < 1.0)
        {
            out.push(error(format!(
                "detector.pfa must lie in (0, 1), got {}",
                self.detector.pfa
            )));
        }
        let Some(p) = params else {
            return out;
        };
        let unambiguous = p.alpha_max as f64 + 0.5;
        for (i, t) in self.targets.iter().enumerate() {
            match self.resolve_target(t, &p) {
                Err(e) => out.push(error(format!("target {i}: {e}"))),
                Ok(target) => {
                    if target.delay_bins >= p.n_cpp {
                        out.push(error(format!(
                            "target {i}: delay {} bins reaches the prefix length {}; \
                             echoes beyond the prefix are not circular",
                            target.delay_bins, p.n_cpp
                        )));
                    }
                    if target.normalized_doppler.abs() > unambiguous {
                        out.push(warning(format!(
                            "target {i}: normalized Doppler {:.3} exceeds the unambiguous \
                             span +-{unambiguous}; estimates will fold",
                            target.normalized_doppler
                        )));
                    }
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.variable == SweepVariable::Doppler {
                for v in sweep.points() {
                    if v.abs() > unambiguous {
                        out.push(warning(format!(
                            "sweep point nu = {v:.3} exceeds the unambiguous span \
                             +-{unambiguous}; estimates will fold"
                        )));
                        break;
                    }
                }
            }
        }
        out
    }
}
