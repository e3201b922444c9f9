//! Range-Doppler image container with physical axis scaling.
//!
//! Rows are delay bins, columns are Doppler bins with zero Doppler at column
//! `N_sym / 2` (slow-time DFT output circularly shifted by half a frame).

use ndarray::Array2;
use num_complex::Complex64;

use crate::params::AfdmParams;

#[derive(Debug, Clone)]
pub struct RadarImage {
    pub data: Array2<Complex64>,
    /// Meters per row.
    pub range_bin_m: f64,
    /// Hz per column.
    pub doppler_bin_hz: f64,
    pub carrier_hz: f64,
    /// Set once the image has been scaled to unit peak magnitude.
    pub normalized: bool,
}

impl RadarImage {
    pub fn new(data: Array2<Complex64>, p: &AfdmParams) -> Self {
        Self {
            data,
            range_bin_m: p.range_resolution_m(),
            doppler_bin_hz: p.doppler_bin_hz(),
            carrier_hz: p.carrier_hz,
            normalized: false,
        }
    }

    pub fn n_range_bins(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_doppler_bins(&self) -> usize {
        self.data.ncols()
    }

    pub fn range_of_row(&self, row: usize) -> f64 {
        row as f64 * self.range_bin_m
    }

    /// Doppler of a column; column `ncols/2` is zero.
    pub fn doppler_of_col(&self, col: usize) -> f64 {
        (col as f64 - self.n_doppler_bins() as f64 / 2.0) * self.doppler_bin_hz
    }

    pub fn velocity_of_col(&self, col: usize) -> f64 {
        self.doppler_of_col(col) * crate::params::SPEED_OF_LIGHT / (2.0 * self.carrier_hz)
    }

    /// Location and magnitude of the strongest cell.
    pub fn peak(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for ((r, c), v) in self.data.indexed_iter() {
            let m = v.norm();
            if m > best.2 {
                best = (r, c, m);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::desk_scale;

    #[test]
    fn axis_scaling_matches_params() {
        let p = desk_scale();
        let img = RadarImage::new(Array2::zeros((p.n_subcarriers, p.n_symbols)), &p);
        assert!((img.range_of_row(2) - 2.0 * p.range_resolution_m()).abs() < 1e-12);
        assert_eq!(img.doppler_of_col(p.n_symbols / 2), 0.0);
        let v1 = img.velocity_of_col(p.n_symbols / 2 + 1);
        assert!((v1 - p.velocity_resolution_mps()).abs() < 1e-12);
    }

    #[test]
    fn peak_finds_strongest_cell() {
        let p = desk_scale();
        let mut data = Array2::zeros((8, 8));
        data[(3, 5)] = Complex64::new(0.0, -4.0);
        data[(1, 1)] = Complex64::new(2.0, 0.0);
        let mut img = RadarImage::new(data, &p);
        img.data[(6, 2)] = Complex64::new(1.0, 1.0);
        let (r, c, m) = img.peak();
        assert_eq!((r, c), (3, 5));
        assert!((m - 4.0).abs() < 1e-12);
    }
}
