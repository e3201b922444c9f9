//! Result serialization: metrics and detections tables, radar-image dumps,
//! and the run summary.
//!
//! Tables are written either as CSV (one header line, `{:.6}` floats, empty
//! fields for absent values) or as JSON arrays of objects (absent values are
//! `null`). Radar images are always CSV: two `#` comment lines carrying the
//! axis scales, then the magnitude matrix row-major, one delay bin per line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use afdm_core::image::RadarImage;
use serde::Serialize;

use crate::{CliError, Result};

/// Table format for `metrics` and `detections`; the summary is always JSON
/// and radar-image dumps are always CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One row of the per-trial metrics table.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub method: String,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub trial: usize,
    /// `None` when the image has no off-peak cells to estimate a floor from.
    pub image_snr_db: Option<f64>,
    pub pslr_db: Option<f64>,
    pub detections: usize,
}

/// One declared detection, flattened to physical units.
#[derive(Debug, Clone, Serialize)]
pub struct DetectionRow {
    pub method: String,
    pub trial: usize,
    pub l_hat: usize,
    /// Integer Doppler part; only the matched-filter pipeline splits Doppler.
    pub alpha_hat: Option<i64>,
    pub b_hat: Option<f64>,
    pub beta_hat: Option<i64>,
    pub f_d_hat_hz: f64,
    pub range_m: f64,
    pub velocity_mps: f64,
    pub peak_db: f64,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush()
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn opt_int(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write the metrics table, returning the path written.
pub fn write_metrics(dir: &Path, rows: &[MetricsRow], format: OutputFormat) -> Result<PathBuf> {
    match format {
        OutputFormat::Json => {
            let path = dir.join("metrics.json");
            write_json(&path, rows)?;
            Ok(path)
        }
        OutputFormat::Csv => {
            let path = dir.join("metrics.csv");
            let mut w = create(&path)?;
            let mut emit = || -> std::io::Result<()> {
                writeln!(
                    w,
                    "method,sweep_var,sweep_value,trial,image_snr_db,pslr_db,detections"
                )?;
                for r in rows {
                    writeln!(
                        w,
                        "{},{},{:.6},{},{},{},{}",
                        r.method,
                        r.sweep_var,
                        r.sweep_value,
                        r.trial,
                        opt(r.image_snr_db),
                        opt(r.pslr_db),
                        r.detections
                    )?;
                }
                Ok(())
            };
            emit().map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            finish(w, &path)?;
            Ok(path)
        }
    }
}

/// Write the detections table, returning the path written.
pub fn write_detections(
    dir: &Path,
    rows: &[DetectionRow],
    format: OutputFormat,
) -> Result<PathBuf> {
    match format {
        OutputFormat::Json => {
            let path = dir.join("detections.json");
            write_json(&path, rows)?;
            Ok(path)
        }
        OutputFormat::Csv => {
            let path = dir.join("detections.csv");
            let mut w = create(&path)?;
            let mut emit = || -> std::io::Result<()> {
                writeln!(
                    w,
                    "method,trial,l_hat,alpha_hat,b_hat,beta_hat,f_d_hat_hz,range_m,velocity_mps,peak_db"
                )?;
                for r in rows {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
                        r.method,
                        r.trial,
                        r.l_hat,
                        opt_int(r.alpha_hat),
                        opt(r.b_hat),
                        opt_int(r.beta_hat),
                        r.f_d_hat_hz,
                        r.range_m,
                        r.velocity_mps,
                        r.peak_db
                    )?;
                }
                Ok(())
            };
            emit().map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            finish(w, &path)?;
            Ok(path)
        }
    }
}

/// Dump one radar image as CSV: axis-scale comments, then magnitudes
/// row-major ({:.6e}), rows are delay bins and columns Doppler bins.
pub fn write_rdm_csv(dir: &Path, name: &str, img: &RadarImage) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut w = create(&path)?;
    let mut emit = || -> std::io::Result<()> {
        writeln!(
            w,
            "# delay axis: {} rows, {:.6} m per bin",
            img.n_range_bins(),
            img.range_bin_m
        )?;
        writeln!(
            w,
            "# doppler axis: {} cols, {:.6} Hz per bin, zero at col {}",
            img.n_doppler_bins(),
            img.doppler_bin_hz,
            img.n_doppler_bins() / 2
        )?;
        for row in img.data.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{:.6e}", v.norm())).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    };
    emit().map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    finish(w, &path)?;
    Ok(path)
}

/// Serialize any value as pretty JSON.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let w = create(path)?;
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    w.write_all(b"\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use afdm_core::params::AfdmParams;
    use ndarray::Array2;
    use num_complex::Complex64;

    fn tiny_image() -> RadarImage {
        let p = AfdmParams::new(16, 4, 4, 1, 1, 24.0e9, 93.1e6).unwrap();
        let mut data = Array2::from_elem((4, 4), Complex64::new(0.1, 0.0));
        data[[2, 1]] = Complex64::new(3.0, 4.0);
        RadarImage::new(data, &p)
    }

    #[test]
    fn metrics_csv_has_header_and_empty_optionals() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![MetricsRow {
            method: "afdm_time".into(),
            sweep_var: "snr_db".into(),
            sweep_value: -5.0,
            trial: 3,
            image_snr_db: Some(41.25),
            pslr_db: None,
            detections: 2,
        }];
        let path = write_metrics(dir.path(), &rows, OutputFormat::Csv).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "method,sweep_var,sweep_value,trial,image_snr_db,pslr_db,detections",
            "metrics header is fixed"
        );
        assert_eq!(
            lines.next().unwrap(),
            "afdm_time,snr_db,-5.000000,3,41.250000,,2",
            "optional pslr renders as an empty field"
        );
    }

    #[test]
    fn detections_csv_columns_match_contract() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![DetectionRow {
            method: "afdm_daft".into(),
            trial: 0,
            l_hat: 12,
            alpha_hat: Some(1),
            b_hat: Some(0.47),
            beta_hat: Some(-3),
            f_d_hat_hz: 267236.5,
            range_m: 19.3,
            velocity_mps: 63.7,
            peak_db: 54.2,
        }];
        let path = write_detections(dir.path(), &rows, OutputFormat::Csv).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(
            text.starts_with(
                "method,trial,l_hat,alpha_hat,b_hat,beta_hat,f_d_hat_hz,range_m,velocity_mps,peak_db\n"
            ),
            "detections header is fixed"
        );
        assert!(
            text.contains("afdm_daft,0,12,1,0.470000,-3,"),
            "integer Doppler parts print without decimals"
        );
    }

    #[test]
    fn rdm_csv_carries_axis_scales_and_shape() {
        let dir = tempfile::tempdir().unwrap();
        let img = tiny_image();
        let path = write_rdm_csv(dir.path(), "rdm_afdm_time_0.csv", &img).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# delay axis: 4 rows"), "row scale comment");
        assert!(lines[1].starts_with("# doppler axis: 4 cols"), "col scale comment");
        assert_eq!(lines.len(), 2 + 4, "one line per delay bin after comments");
        assert_eq!(
            lines[2 + 2].split(',').count(),
            4,
            "each row has one field per Doppler bin"
        );
        assert!(
            lines[2 + 2].split(',').nth(1).unwrap().starts_with("5.0"),
            "|3+4j| = 5 lands at row 2 col 1"
        );
    }

    #[test]
    fn json_tables_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![MetricsRow {
            method: "ofdm_division".into(),
            sweep_var: "none".into(),
            sweep_value: 0.0,
            trial: 0,
            image_snr_db: None,
            pslr_db: Some(12.0),
            detections: 0,
        }];
        let path = write_metrics(dir.path(), &rows, OutputFormat::Json).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back[0]["method"], "ofdm_division", "json keeps field names");
        assert!(back[0]["image_snr_db"].is_null(), "absent metric is null");
    }
}
