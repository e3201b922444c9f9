//! Canned experiment configurations.
//!
//! Each preset is a complete [`ExperimentConfig`] reproducing one of the
//! standard validation experiments for the simulator: the two reference
//! parameter scales, single- and multi-target scenes, an SNR sweep, and a
//! Doppler sweep. Presets are ordinary configs; `run --preset <name>` and a
//! TOML file with the same contents behave identically.

use crate::config::{
    DetectorConfig, ExperimentConfig, Method, NoiseConfig, OutputConfig, ParamsConfig, RdmPolicy,
    RunConfig, SweepConfig, SweepVariable, TargetConfig,
};
use afdm_core::params::AfdmParams;

/// Names accepted by `run --preset`, in display order.
pub const PRESET_NAMES: [&str; 7] = [
    "table1", "desk", "fig3", "fig4", "fig5", "fig6", "table2",
];

/// Full-scale system: 4096 subcarriers, 256 symbols, 24 GHz carrier.
fn full_params() -> ParamsConfig {
    ParamsConfig {
        n_subcarriers: 4096,
        n_symbols: 256,
        n_cpp: 256,
        alpha_max: 2,
        k_v: 4,
        carrier_hz: 24.0e9,
        bandwidth_hz: 93.1e6,
    }
}

/// Reduced system for fast experiments: 512 subcarriers, 64 symbols. Same
/// carrier and bandwidth, so per-bin resolutions differ from the full scale.
fn desk_params() -> ParamsConfig {
    ParamsConfig {
        n_subcarriers: 512,
        n_symbols: 64,
        n_cpp: 32,
        alpha_max: 2,
        k_v: 4,
        carrier_hz: 24.0e9,
        bandwidth_hz: 93.1e6,
    }
}

fn target_bins(delay_bins: usize, normalized_doppler: f64, phase_rad: f64) -> TargetConfig {
    TargetConfig {
        range_m: None,
        delay_bins: Some(delay_bins),
        velocity_mps: None,
        normalized_doppler: Some(normalized_doppler),
        gain_db: 0.0,
        phase_rad,
    }
}

fn target_velocity(delay_bins: usize, velocity_mps: f64) -> TargetConfig {
    TargetConfig {
        range_m: None,
        delay_bins: Some(delay_bins),
        velocity_mps: Some(velocity_mps),
        normalized_doppler: None,
        gain_db: 0.0,
        phase_rad: 0.0,
    }
}

fn run(methods: Vec<Method>, trials: u32) -> RunConfig {
    RunConfig {
        methods,
        trials,
        seed: 1,
        output_dir: None,
    }
}

fn all_methods() -> Vec<Method> {
    vec![Method::AfdmTime, Method::AfdmDaft, Method::OfdmDivision]
}

fn output(write_rdm: RdmPolicy, svg: bool) -> OutputConfig {
    OutputConfig { write_rdm, svg }
}

/// Look up a preset by name. Returns `None` for unknown names.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    match name {
        // Full-scale sanity run: one fast target at the largest in-prefix
        // delay, noiseless, all three methods.
        "table1" => Some(ExperimentConfig {
            params: full_params(),
            targets: vec![target_velocity(128, 63.9)],
            noise: NoiseConfig { snr_db: None },
            sweep: None,
            run: run(all_methods(), 1),
            detector: DetectorConfig::default(),
            output: output(RdmPolicy::First, false),
        }),
        // Reduced-scale sanity run with a fractional Doppler target.
        "desk" => Some(ExperimentConfig {
            params: desk_params(),
            targets: vec![target_bins(12, 1.47, 0.0)],
            noise: NoiseConfig { snr_db: None },
            sweep: None,
            run: run(all_methods(), 1),
            detector: DetectorConfig::default(),
            output: output(RdmPolicy::First, false),
        }),
        // Doppler-profile comparison: near-integer versus near-half-integer
        // normalized Doppler, time-domain versus matched-filter pipelines.
        "fig3" => Some(ExperimentConfig {
            params: desk_params(),
            targets: vec![target_bins(10, 0.0, 0.0)],
            noise: NoiseConfig { snr_db: None },
            sweep: Some(SweepConfig {
                variable: SweepVariable::Doppler,
                start: None,
                stop: None,
                step: None,
                values: Some(vec![0.1, 0.98]),
            }),
            run: run(vec![Method::AfdmTime, Method::AfdmDaft], 1),
            detector: DetectorConfig::default(),
            output: output(RdmPolicy::All, true),
        }),
        // Image-SNR versus signal SNR, 20 noise trials per point.
        "fig4" => Some(ExperimentConfig {
            params: desk_params(),
            targets: vec![target_bins(10, 0.1, 0.0)],
            noise: NoiseConfig { snr_db: Some(0.0) },
            sweep: Some(SweepConfig {
                variable: SweepVariable::SnrDb,
                start: Some(-20.0),
                stop: Some(0.0),
                step: Some(5.0),
                values: None,
            }),
            run: run(all_methods(), 20),
            detector: DetectorConfig::default(),
            output: output(RdmPolicy::None, true),
        }),
        // Image-SNR versus normalized Doppler at fixed 0 dB SNR.
        "fig5" => Some(ExperimentConfig {
            params: desk_params(),
            targets: vec![target_bins(10, 0.0, 0.0)],
            noise: NoiseConfig { snr_db: Some(0.0) },
            sweep: Some(SweepConfig {
                variable: SweepVariable::Doppler,
                start: Some(0.0),
                stop: Some(2.0),
                step: Some(0.1),
                values: None,
            }),
            run: run(all_methods(), 1),
            detector: DetectorConfig::default(),
            output: output(RdmPolicy::None, true),
        }),
        // Three closely spaced targets, one Doppler bin apart, resolved by
        // the matched-filter pipeline.
        "fig6" => Some(ExperimentConfig {
            params: desk_params(),
            targets: vec![
                target_bins(12, 122.0 / 68.0, 0.0),
                target_bins(13, 122.0 / 68.0, 2.1),
                target_bins(13, 123.0 / 68.0, 4.2),
            ],
            noise: NoiseConfig { snr_db: Some(0.0) },
            sweep: None,
            run: run(vec![Method::AfdmDaft], 1),
            detector: DetectorConfig::default(),
            output: output(RdmPolicy::All, true),
        }),
        // Full-scale velocity anchors: the Doppler sweep values are the
        // normalized Doppler of three reference radial velocities.
        "table2" => {
            let pc = full_params();
            let p = AfdmParams::new(
                pc.n_subcarriers,
                pc.n_symbols,
                pc.n_cpp,
                pc.alpha_max,
                pc.k_v,
                pc.carrier_hz,
                pc.bandwidth_hz,
            )
            .expect("full-scale preset params are valid");
            let values = [63.9, 197.6, 284.1]
                .iter()
                .map(|&v| p.velocity_to_doppler(v) / p.subcarrier_spacing_hz())
                .collect();
            Some(ExperimentConfig {
                params: pc,
                targets: vec![target_bins(128, 0.0, 0.0)],
                noise: NoiseConfig { snr_db: None },
                sweep: Some(SweepConfig {
                    variable: SweepVariable::Doppler,
                    start: None,
                    stop: None,
                    step: None,
                    values: Some(values),
                }),
                run: run(vec![Method::AfdmTime, Method::AfdmDaft], 1),
                detector: DetectorConfig::default(),
                output: output(RdmPolicy::First, false),
            })
        }
        _ => None,
    }
}
