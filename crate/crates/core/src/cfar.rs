//! Two-dimensional cell-averaging CFAR.
//!
//! The threshold factor `M * (Pfa^(-1/M) - 1)` is exact for independent
//! exponentially distributed cell powers, which is what square-law detection
//! of complex Gaussian noise produces. Training and guard windows wrap at
//! the image edges, matching the cyclic axes of the range-Doppler maps.

use crate::error::{AfdmError, Result};
use ndarray::Array2;

#[derive(Debug, Clone, Copy)]
pub struct CfarConfig {
    /// Design false-alarm probability per cell.
    pub pfa: f64,
    /// Guard cells on each side of the cell under test.
    pub guard: usize,
    /// Training cells on each side beyond the guard.
    pub training: usize,
}

impl Default for CfarConfig {
    fn default() -> Self {
        Self {
            pfa: 1e-4,
            guard: 2,
            training: 4,
        }
    }
}

impl CfarConfig {
    pub fn training_cell_count(&self) -> usize {
        let outer = 2 * (self.guard + self.training) + 1;
        let inner = 2 * self.guard + 1;
        outer * outer - inner * inner
    }

    /// Scale applied to the training mean to realize the design Pfa.
    pub fn threshold_factor(&self) -> f64 {
        let m = self.training_cell_count() as f64;
        m * (self.pfa.powf(-1.0 / m) - 1.0)
    }

    fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(AfdmError::InvalidParam(format!(
                "pfa = {} outside (0, 1)",
                self.pfa
            )));
        }
        if self.training == 0 {
            return Err(AfdmError::InvalidParam("training window is empty".into()));
        }
        let span = 2 * (self.guard + self.training) + 1;
        if span > rows || span > cols {
            return Err(AfdmError::InvalidParam(format!(
                "CFAR window {span} exceeds image dimensions {rows}x{cols}"
            )));
        }
        Ok(())
    }
}

/// Runs CA-CFAR over a power image and returns every exceedance as
/// `(row, col, power / threshold)`.
pub fn cfar_2d(power: &Array2<f64>, cfg: &CfarConfig) -> Result<Vec<(usize, usize, f64)>> {
    let (nr, nc) = power.dim();
    cfg.validate(nr, nc)?;
    let reach = (cfg.guard + cfg.training) as i64;
    let guard = cfg.guard as i64;
    let factor = cfg.threshold_factor();
    let m = cfg.training_cell_count() as f64;
    let mut hits = Vec::new();
    for r in 0..nr {
        for c in 0..nc {
            let mut sum = 0.0;
            for dr in -reach..=reach {
                for dc in -reach..=reach {
                    if dr.abs() <= guard && dc.abs() <= guard {
                        continue;
                    }
                    let rr = (r as i64 + dr).rem_euclid(nr as i64) as usize;
                    let cc = (c as i64 + dc).rem_euclid(nc as i64) as usize;
                    sum += power[(rr, cc)];
                }
            }
            let threshold = factor * sum / m;
            let p = power[(r, c)];
            if p > threshold && threshold > 0.0 {
                hits.push((r, c, p / threshold));
            }
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gen_noise;

    #[test]
    fn threshold_factor_matches_closed_form() {
        let cfg = CfarConfig {
            pfa: 1e-4,
            guard: 2,
            training: 4,
        };
        assert_eq!(cfg.training_cell_count(), 144);
        let want = 144.0 * ((1e-4f64).powf(-1.0 / 144.0) - 1.0);
        assert!((cfg.threshold_factor() - want).abs() < 1e-12);
    }

    #[test]
    fn false_alarm_rate_tracks_design_value() {
        let cfg = CfarConfig::default();
        let mut cells = 0usize;
        let mut alarms = 0usize;
        for trial in 0..4 {
            let noise = gen_noise(256, 256, 1.0, 99, trial);
            let power = noise.mapv(|v| v.norm_sqr());
            alarms += cfar_2d(&power, &cfg).unwrap().len();
            cells += power.len();
        }
        let rate = alarms as f64 / cells as f64;
        assert!(
            rate < 3.0 * cfg.pfa && rate > cfg.pfa / 3.0,
            "false alarm rate {rate:.2e} vs design {:.0e} over {cells} cells",
            cfg.pfa
        );
    }

    #[test]
    fn strong_cell_is_flagged() {
        let cfg = CfarConfig::default();
        let noise = gen_noise(64, 64, 1.0, 5, 0);
        let mut power = noise.mapv(|v| v.norm_sqr());
        power[(20, 30)] = 1e4;
        let hits = cfar_2d(&power, &cfg).unwrap();
        assert!(hits.iter().any(|&(r, c, _)| (r, c) == (20, 30)));
    }

    #[test]
    fn oversized_window_is_rejected() {
        let cfg = CfarConfig {
            pfa: 1e-4,
            guard: 8,
            training: 8,
        };
        let power = Array2::zeros((16, 16));
        assert!(cfar_2d(&power, &cfg).is_err());
    }
}
