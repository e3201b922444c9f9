//! Experiment execution: expands a config into (sweep point, trial) tasks,
//! runs them on a local thread pool, and writes every output file.
//!
//! Determinism contract: each task derives all randomness from the config
//! seed plus fixed stream offsets, so results are identical for any thread
//! count. Payload bits use stream `2^32 + trial` (the payload is shared by
//! every method and sweep point of a trial); receiver noise uses stream
//! `2 * (point * trials + trial)` for the chirp waveform and the adjacent
//! odd stream for the plain-OFDM waveform, whose echo is synthesized
//! separately.
//!
//! Row order in the tables is methods (config order), then sweep points,
//! then trials; detection rows keep the estimator's strongest-first order
//! within a task.

use std::path::PathBuf;

use afdm_core::channel::{synthesize_echo, Scenario, Target};
use afdm_core::detection::Detection;
use afdm_core::estimator::scan_rdm_and_estimate;
use afdm_core::fccr::{fccr_rdm, rdm_peaks};
use afdm_core::image::RadarImage;
use afdm_core::metrics::{image_snr_db, pslr_db, range_profile};
use afdm_core::ofdm::{ofdm_modulate, symbol_division_rdm};
use afdm_core::params::AfdmParams;
use afdm_core::qam::{map_qam, SymbolGrid};
use afdm_core::rng::{random_bits, stream_rng};
use afdm_core::transforms::{daft_columns, deframe, modulate_frame};
use afdm_core::{cfar::cfar_2d, estimator::matched_filter};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    DetectorMode, Diagnostic, ExperimentConfig, Method, RdmPolicy, Severity, SweepVariable,
};
use crate::output::{self, DetectionRow, MetricsRow, OutputFormat};
use crate::svg;
use crate::{CliError, Result};

/// Invocation-level knobs that are not part of the experiment definition.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// `None` leaves the pool size to the runtime default.
    pub threads: Option<usize>,
    pub format: OutputFormat,
}

/// What a finished run produced; the caller decides how to report it.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub warnings: Vec<Diagnostic>,
    pub files: Vec<String>,
    pub metrics_rows: usize,
    pub detection_rows: usize,
}

/// Everything one method produced for one (point, trial) task; consumers
/// recover the method from its position in the config's method list.
struct MethodOutcome {
    image_snr_db: Option<f64>,
    pslr_db: Option<f64>,
    detections: Vec<Detection>,
    rdm: Option<RadarImage>,
}

struct TaskResult {
    outcomes: Vec<MethodOutcome>,
}

struct TaskCtx<'a> {
    cfg: &'a ExperimentConfig,
    p: AfdmParams,
    base_targets: Vec<Target>,
    points: Vec<f64>,
    trials: usize,
}

impl TaskCtx<'_> {
    fn keep_rdm(&self, point_idx: usize, trial: usize) -> bool {
        trial == 0
            && match self.cfg.output.write_rdm {
                RdmPolicy::None => false,
                RdmPolicy::First => point_idx == 0,
                RdmPolicy::All => true,
            }
    }

    /// Targets and SNR for one sweep point. A Doppler sweep replaces every
    /// target's normalized Doppler; an SNR sweep replaces the noise level.
    fn scene(&self, point_idx: usize) -> (Vec<Target>, Option<f64>) {
        let mut targets = self.base_targets.clone();
        let mut snr = self.cfg.noise.snr_db;
        if let Some(sweep) = &self.cfg.sweep {
            let value = self.points[point_idx];
            match sweep.variable {
                SweepVariable::Doppler => {
                    for t in targets.iter_mut() {
                        *t = Target::from_bins(t.gain, t.delay_bins, value, &self.p);
                    }
                }
                SweepVariable::SnrDb => snr = Some(value),
            }
        }
        (targets, snr)
    }
}

fn core_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("computation failed: {e}"))
}

fn scenario(targets: Vec<Target>, snr: Option<f64>, seed: u64, stream: u64) -> Scenario {
    match snr {
        Some(snr_db) => Scenario::with_noise(targets, snr_db, seed, stream),
        None => Scenario::noiseless(targets),
    }
}

/// Threshold or CFAR detection on a plain range-Doppler image.
fn detect_on_image(img: &RadarImage, cfg: &ExperimentConfig) -> Result<Vec<Detection>> {
    match cfg.detector.mode {
        DetectorMode::Threshold => Ok(rdm_peaks(img, cfg.detector.threshold_db)),
        DetectorMode::Cfar => {
            let power = img.data.mapv(|v| v.norm_sqr());
            let hits = cfar_2d(&power, &cfg.detector.to_cfar()).map_err(core_err)?;
            let mut out: Vec<Detection> = hits
                .into_iter()
                .map(|(r, c, _ratio)| Detection {
                    delay_bins: r,
                    range_m: img.range_of_row(r),
                    doppler_hz: img.doppler_of_col(c),
                    velocity_mps: img.velocity_of_col(c),
                    peak_mag: img.data[(r, c)].norm(),
                    image_index: 0,
                    doppler_parts: None,
                })
                .collect();
            out.sort_by(|a, b| b.peak_mag.partial_cmp(&a.peak_mag).expect("finite peaks"));
            Ok(out)
        }
    }
}

/// Image SNR and range-axis PSLR of a single image, declared peak at the
/// strongest cell. Degenerate images (zero peak) report no metrics.
fn image_metrics(
    img: &RadarImage,
    guard: (usize, usize),
) -> (Option<f64>, Option<f64>) {
    let (pr, pc, mag) = img.peak();
    if mag <= 0.0 {
        return (None, None);
    }
    let snr = image_snr_db(img, &[(pr, pc)], guard).ok();
    let profile = range_profile(img, pc);
    let pslr = pslr_db(&profile, 1).ok();
    (snr, pslr)
}

fn run_method(
    method: Method,
    ctx: &TaskCtx,
    grid: &SymbolGrid,
    afdm_rx: Option<&[num_complex::Complex64]>,
    ofdm_rx: Option<&[num_complex::Complex64]>,
    symbol_matrix: Option<&ndarray::Array2<num_complex::Complex64>>,
    keep_rdm: bool,
) -> Result<MethodOutcome> {
    let p = &ctx.p;
    let (image_snr, pslr, detections, rdm) = match method {
        Method::AfdmTime => {
            let rx = afdm_rx.expect("afdm echo prepared");
            let deframed = deframe(rx, p).map_err(core_err)?;
            let img = fccr_rdm(&deframed, symbol_matrix.expect("tx matrix"), p)
                .map_err(core_err)?;
            let detections = if img.peak().2 > 0.0 {
                detect_on_image(&img, ctx.cfg)?
            } else {
                Vec::new()
            };
            let (snr, pslr) = image_metrics(&img, (1, 3));
            (snr, pslr, detections, keep_rdm.then_some(img))
        }
        Method::AfdmDaft => {
            let rx = afdm_rx.expect("afdm echo prepared");
            let y = daft_columns(&deframe(rx, p).map_err(core_err)?, p).map_err(core_err)?;
            let detector = ctx.cfg.detector.to_detector();
            let (rdm, detections) =
                scan_rdm_and_estimate(&y, grid, p, &detector).map_err(core_err)?;
            // Image SNR comes from the matched-filter image at the detected
            // delay; the scan RDM only records per-column maxima.
            let l_hat = detections
                .first()
                .map(|d| d.delay_bins)
                .unwrap_or_else(|| rdm.peak().0);
            let w = matched_filter(&y, grid, l_hat, p).map_err(core_err)?;
            let w_img = RadarImage::new(w, p);
            let (snr, _) = image_metrics(&w_img, (p.k_v as usize, 3));
            let (_, rdm_pc, rdm_mag) = rdm.peak();
            let pslr = if rdm_mag > 0.0 {
                pslr_db(&range_profile(&rdm, rdm_pc), 1).ok()
            } else {
                None
            };
            (snr, pslr, detections, keep_rdm.then_some(rdm))
        }
        Method::OfdmDivision => {
            let rx = ofdm_rx.expect("ofdm echo prepared");
            let deframed = deframe(rx, p).map_err(core_err)?;
            let img = symbol_division_rdm(&deframed, grid, p).map_err(core_err)?;
            let detections = if img.peak().2 > 0.0 {
                detect_on_image(&img, ctx.cfg)?
            } else {
                Vec::new()
            };
            let (snr, pslr) = image_metrics(&img, (1, 3));
            (snr, pslr, detections, keep_rdm.then_some(img))
        }
    };
    Ok(MethodOutcome {
        image_snr_db: image_snr,
        pslr_db: pslr,
        detections,
        rdm,
    })
}

fn run_task(ctx: &TaskCtx, point_idx: usize, trial: usize) -> Result<TaskResult> {
    let p = &ctx.p;
    let seed = ctx.cfg.run.seed;
    let (targets, snr) = ctx.scene(point_idx);
    let keep_rdm = ctx.keep_rdm(point_idx, trial);

    let mut rng = stream_rng(seed, (1u64 << 32) + trial as u64);
    let bits = random_bits(&mut rng, p.n_subcarriers * p.n_symbols * 4);
    let grid = map_qam(&bits, 16, p.n_subcarriers, p.n_symbols).map_err(core_err)?;

    let noise_base = 2 * (point_idx * ctx.trials + trial) as u64;
    let methods = &ctx.cfg.run.methods;
    let wants_afdm = methods
        .iter()
        .any(|m| matches!(m, Method::AfdmTime | Method::AfdmDaft));
    let wants_ofdm = methods.contains(&Method::OfdmDivision);

    let mut afdm_rx = None;
    let mut symbol_matrix = None;
    if wants_afdm {
        let frame = modulate_frame(&grid, p).map_err(core_err)?;
        let sc = scenario(targets.clone(), snr, seed, noise_base);
        afdm_rx = Some(synthesize_echo(&frame.serialized, &sc, p).map_err(core_err)?);
        symbol_matrix = Some(frame.symbol_matrix);
    }
    let mut ofdm_rx = None;
    if wants_ofdm {
        let frame = ofdm_modulate(&grid, p).map_err(core_err)?;
        let sc = scenario(targets, snr, seed, noise_base + 1);
        ofdm_rx = Some(synthesize_echo(&frame.serialized, &sc, p).map_err(core_err)?);
    }

    let outcomes = methods
        .iter()
        .map(|&m| {
            run_method(
                m,
                ctx,
                &grid,
                afdm_rx.as_deref(),
                ofdm_rx.as_deref(),
                symbol_matrix.as_ref(),
                keep_rdm,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TaskResult { outcomes })
}

#[derive(Serialize)]
struct DerivedValues {
    subcarrier_spacing_hz: f64,
    total_symbol_duration_s: f64,
    doppler_bin_hz: f64,
    range_resolution_m: f64,
    velocity_resolution_mps: f64,
    processing_gain_db: f64,
    frame_len: usize,
}

impl DerivedValues {
    fn new(p: &AfdmParams) -> Self {
        Self {
            subcarrier_spacing_hz: p.subcarrier_spacing_hz(),
            total_symbol_duration_s: p.total_symbol_duration_s(),
            doppler_bin_hz: p.doppler_bin_hz(),
            range_resolution_m: p.range_resolution_m(),
            velocity_resolution_mps: p.velocity_resolution_mps(),
            processing_gain_db: p.processing_gain_db(),
            frame_len: p.frame_len(),
        }
    }
}

#[derive(Serialize)]
struct SweepEcho {
    variable: String,
    points: Vec<f64>,
}

#[derive(Serialize)]
struct Aggregate {
    method: &'static str,
    sweep_value: f64,
    trials: usize,
    mean_image_snr_db: Option<f64>,
    std_image_snr_db: Option<f64>,
    mean_pslr_db: Option<f64>,
    mean_detections: f64,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    derived: DerivedValues,
    sweep: SweepEcho,
    aggregates: Vec<Aggregate>,
    outputs: Vec<String>,
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

/// Run one experiment end to end and write its outputs under `opts.out_dir`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    let diags = cfg.validate();
    let errors: Vec<String> = diags
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.message.clone())
        .collect();
    if !errors.is_empty() {
        return Err(CliError::Config(errors.join("; ")));
    }
    let warnings: Vec<Diagnostic> = diags
        .into_iter()
        .filter(|d| d.severity == Severity::Warning)
        .collect();

    let p = cfg.build_params().map_err(CliError::Config)?;
    let base_targets = cfg.resolve_targets(&p).map_err(CliError::Config)?;
    let (sweep_var, points) = cfg.sweep_points();
    let trials = cfg.run.trials as usize;
    let ctx = TaskCtx {
        cfg,
        p: p.clone(),
        base_targets,
        points: points.clone(),
        trials,
    };

    let plan: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|pi| (0..trials).map(move |t| (pi, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let results: Vec<TaskResult> = pool.install(|| {
        plan.par_iter()
            .map(|&(pi, t)| run_task(&ctx, pi, t))
            .collect::<Result<Vec<_>>>()
    })?;

    std::fs::create_dir_all(&opts.out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", opts.out_dir.display())))?;

    // Assemble rows: methods outer, then points, then trials (results are
    // indexed point-major).
    let mut metrics = Vec::new();
    let mut det_rows = Vec::new();
    let mut images: Vec<(String, &RadarImage)> = Vec::new();
    for (mi, &method) in cfg.run.methods.iter().enumerate() {
        for (pi, &value) in points.iter().enumerate() {
            for t in 0..trials {
                let outcome = &results[pi * trials + t].outcomes[mi];
                metrics.push(MetricsRow {
                    method: method.name().to_string(),
                    sweep_var: sweep_var.clone(),
                    sweep_value: value,
                    trial: t,
                    image_snr_db: outcome.image_snr_db,
                    pslr_db: outcome.pslr_db,
                    detections: outcome.detections.len(),
                });
                for d in &outcome.detections {
                    det_rows.push(DetectionRow {
                        method: method.name().to_string(),
                        trial: t,
                        l_hat: d.delay_bins,
                        alpha_hat: d.doppler_parts.map(|dp| dp.alpha),
                        b_hat: d.doppler_parts.map(|dp| dp.b),
                        beta_hat: d.doppler_parts.map(|dp| dp.beta),
                        f_d_hat_hz: d.doppler_hz,
                        range_m: d.range_m,
                        velocity_mps: d.velocity_mps,
                        peak_db: 20.0 * d.peak_mag.max(1e-300).log10(),
                    });
                }
                if let Some(img) = &outcome.rdm {
                    images.push((format!("rdm_{}_{pi}", method.name()), img));
                }
            }
        }
    }

    let mut files = Vec::new();
    let metrics_path = output::write_metrics(&opts.out_dir, &metrics, opts.format)?;
    files.push(file_name(&metrics_path));
    let det_path = output::write_detections(&opts.out_dir, &det_rows, opts.format)?;
    files.push(file_name(&det_path));
    for (stem, img) in &images {
        let path = output::write_rdm_csv(&opts.out_dir, &format!("{stem}.csv"), img)?;
        files.push(file_name(&path));
    }

    // Per method x point aggregates feed both the summary and the sweep chart.
    let mut aggregates = Vec::new();
    let mut chart = Vec::new();
    for (mi, &method) in cfg.run.methods.iter().enumerate() {
        let mut series = svg::Series {
            name: method.name().to_string(),
            points: Vec::new(),
        };
        for (pi, &value) in points.iter().enumerate() {
            let snrs: Vec<f64> = (0..trials)
                .filter_map(|t| results[pi * trials + t].outcomes[mi].image_snr_db)
                .collect();
            let pslrs: Vec<f64> = (0..trials)
                .filter_map(|t| results[pi * trials + t].outcomes[mi].pslr_db)
                .collect();
            let dets: usize = (0..trials)
                .map(|t| results[pi * trials + t].outcomes[mi].detections.len())
                .sum();
            let (mean_snr, std_snr) = mean_std(&snrs);
            let (mean_pslr, _) = mean_std(&pslrs);
            if let Some(m) = mean_snr {
                series.points.push((value, m));
            }
            aggregates.push(Aggregate {
                method: method.name(),
                sweep_value: value,
                trials,
                mean_image_snr_db: mean_snr,
                std_image_snr_db: std_snr,
                mean_pslr_db: mean_pslr,
                mean_detections: dets as f64 / trials as f64,
            });
        }
        chart.push(series);
    }

    if cfg.output.svg {
        if points.len() >= 2 {
            let name = format!("image_snr_vs_{sweep_var}.svg");
            let doc = svg::line_chart(
                &format!("image SNR vs {sweep_var}"),
                &sweep_var,
                "image SNR (dB)",
                &chart,
            );
            write_text(&opts.out_dir.join(&name), &doc)?;
            files.push(name);
        }
        for (stem, img) in &images {
            let name = format!("{stem}.svg");
            write_text(&opts.out_dir.join(&name), &svg::heatmap(stem, img))?;
            files.push(name);
        }
    }

    files.push("summary.json".to_string());
    let summary = SummaryDoc {
        tool: "afdm-sim",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        derived: DerivedValues::new(&p),
        sweep: SweepEcho {
            variable: sweep_var,
            points,
        },
        aggregates,
        outputs: files.clone(),
    };
    output::write_json(&opts.out_dir.join("summary.json"), &summary)?;

    Ok(RunSummary {
        out_dir: opts.out_dir.clone(),
        warnings,
        files,
        metrics_rows: metrics.len(),
        detection_rows: det_rows.len(),
    })
}

fn file_name(path: &std::path::Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn write_text(path: &std::path::Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(methods: &str, extra: &str) -> ExperimentConfig {
        toml::from_str(&format!(
            r#"
            [params]
            n_subcarriers = 64
            n_symbols = 16
            n_cpp = 16
            alpha_max = 1
            k_v = 2
            carrier_hz = 24.0e9
            bandwidth_hz = 93.1e6

            [[targets]]
            delay_bins = 5
            normalized_doppler = 0.4

            [run]
            methods = [{methods}]
            {extra}
            "#
        ))
        .unwrap()
    }

    fn opts(dir: &std::path::Path) -> RunOptions {
        RunOptions {
            out_dir: dir.to_path_buf(),
            threads: Some(1),
            format: OutputFormat::Csv,
        }
    }

    #[test]
    fn run_writes_all_tables_and_images() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(r#""afdm_time", "afdm_daft", "ofdm_division""#, "");
        let summary = run(&cfg, &opts(dir.path())).unwrap();
        assert_eq!(summary.metrics_rows, 3, "one row per method x point x trial");
        for name in [
            "metrics.csv",
            "detections.csv",
            "rdm_afdm_time_0.csv",
            "rdm_afdm_daft_0.csv",
            "rdm_ofdm_division_0.csv",
            "summary.json",
        ] {
            assert!(
                dir.path().join(name).exists(),
                "expected output file {name}"
            );
        }
        let text = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
        assert_eq!(text.lines().count(), 4, "header plus three metric rows");
        let det = std::fs::read_to_string(dir.path().join("detections.csv")).unwrap();
        assert!(
            det.lines().skip(1).any(|l| l.starts_with("afdm_daft,0,5,")),
            "noiseless run detects the target at delay 5: {det}"
        );
    }

    #[test]
    fn validation_errors_abort_with_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(r#""afdm_daft""#, "");
        cfg.run.methods.clear();
        let err = run(&cfg, &opts(dir.path())).unwrap_err();
        assert_eq!(err.exit_code(), 2, "validation failures are config errors");
        assert!(
            !dir.path().join("metrics.csv").exists(),
            "nothing is written when validation fails"
        );
    }

    #[test]
    fn sweep_rows_are_method_major_and_svg_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(
            r#""afdm_daft""#,
            r#"
            [sweep]
            variable = "doppler"
            values = [0.1, 0.9]

            [output]
            write_rdm = "all"
            svg = true
            "#,
        );
        let summary = run(&cfg, &opts(dir.path())).unwrap();
        assert_eq!(summary.metrics_rows, 2, "two sweep points, one trial each");
        assert!(
            dir.path().join("image_snr_vs_doppler.svg").exists(),
            "sweep chart is written when svg is enabled"
        );
        assert!(
            dir.path().join("rdm_afdm_daft_1.svg").exists(),
            "heatmap per dumped image"
        );
        let text = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert!(rows[0].contains(",doppler,0.1"), "first row is point 0");
        assert!(rows[1].contains(",doppler,0.9"), "second row is point 1");
    }

    #[test]
    fn summary_echoes_config_and_derived_values() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(r#""afdm_time""#, "");
        run(&cfg, &opts(dir.path())).unwrap();
        let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["config"]["params"]["n_subcarriers"], 64);
        assert_eq!(doc["sweep"]["variable"], "none");
        let spacing = doc["derived"]["subcarrier_spacing_hz"].as_f64().unwrap();
        assert!(
            (spacing - 93.1e6 / 64.0).abs() < 1e-6,
            "derived spacing matches bandwidth / N, got {spacing}"
        );
        assert_eq!(
            doc["aggregates"][0]["method"], "afdm_time",
            "aggregates carry the method name"
        );
    }
}
