//! Square-QAM bit mapping for the payload grid.
//!
//! Per-axis reflected Gray coding with all-zero bits on the most positive
//! level, scaled to unit average symbol power. Order 4 therefore maps bits
//! `00` to `(1 + j)/sqrt(2)`.

use crate::error::{AfdmError, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// QAM payload laid out as an N x N_sym matrix (rows = subcarriers,
/// columns = symbols), filled column-major from the bit stream.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    pub data: Array2<Complex64>,
    pub modulation_order: usize,
    /// True when the grid was produced by the unit-average-power mapper.
    pub unit_power: bool,
}

impl SymbolGrid {
    pub fn n_subcarriers(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_symbols(&self) -> usize {
        self.data.ncols()
    }
}

fn bits_per_axis(order: usize) -> Result<u32> {
    match order {
        4 => Ok(1),
        16 => Ok(2),
        64 => Ok(3),
        _ => Err(AfdmError::InvalidParam(format!(
            "unsupported QAM order {order}; expected 4, 16, or 64"
        ))),
    }
}

/// Amplitude normalization so E[|x|^2] = 1 over the constellation.
fn power_scale(order: usize) -> f64 {
    1.0 / (2.0 * (order as f64 - 1.0) / 3.0).sqrt()
}

/// Decodes `m` Gray bits into a PAM level index, then maps index 0 to the
/// most positive level: level = (L - 1) - 2 * index.
fn gray_bits_to_level(bits: &[u8], m: u32) -> f64 {
    let mut code: u32 = 0;
    for &b in bits {
        code = (code << 1) | u32::from(b);
    }
    let mut idx = code;
    let mut shift = code >> 1;
    while shift != 0 {
        idx ^= shift;
        shift >>= 1;
    }
    let levels = 1u32 << m;
    f64::from(levels - 1) - 2.0 * f64::from(idx)
}

/// All constellation points of the given order at unit average power.
pub fn constellation(order: usize) -> Result<Vec<Complex64>> {
    let m = bits_per_axis(order)?;
    let scale = power_scale(order);
    let levels = 1usize << m;
    let mut pts = Vec::with_capacity(order);
    let axis: Vec<f64> = (0..levels)
        .map(|i| (levels as f64 - 1.0) - 2.0 * i as f64)
        .collect();
    for &re in &axis {
        for &im in &axis {
            pts.push(Complex64::new(re * scale, im * scale));
        }
    }
    Ok(pts)
}

/// Maps a 0/1 bit stream onto an `n x n_sym` QAM grid.
///
/// Exactly `n * n_sym * log2(order)` bits are consumed; the in-phase axis
/// takes the first half of each symbol's bits.
pub fn map_qam(bits: &[u8], order: usize, n: usize, n_sym: usize) -> Result<SymbolGrid> {
    let m = bits_per_axis(order)?;
    let per_symbol = 2 * m as usize;
    let needed = n * n_sym * per_symbol;
    if bits.len() != needed {
        return Err(AfdmError::DimensionMismatch {
            expected: needed,
            got: bits.len(),
            context: "bit stream for QAM grid",
        });
    }
    if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
        return Err(AfdmError::InvalidParam(format!(
            "bit stream must contain only 0/1, found {bad}"
        )));
    }
    let scale = power_scale(order);
    let mut data = Array2::zeros((n, n_sym));
    for k in 0..n_sym {
        for row in 0..n {
            let base = (k * n + row) * per_symbol;
            let i_level = gray_bits_to_level(&bits[base..base + m as usize], m);
            let q_level = gray_bits_to_level(&bits[base + m as usize..base + per_symbol], m);
            data[(row, k)] = Complex64::new(i_level * scale, q_level * scale);
        }
    }
    Ok(SymbolGrid {
        data,
        modulation_order: order,
        unit_power: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_all_zero_bits() {
        let g = map_qam(&[0, 0], 4, 1, 1).unwrap();
        let want = Complex64::new(1.0, 1.0) / 2f64.sqrt();
        assert!((g.data[(0, 0)] - want).norm() < 1e-15);
    }

    #[test]
    fn constellations_have_unit_average_power() {
        for order in [4, 16, 64] {
            let pts = constellation(order).unwrap();
            assert_eq!(pts.len(), order);
            let p: f64 = pts.iter().map(|z| z.norm_sqr()).sum::<f64>() / order as f64;
            assert!((p - 1.0).abs() < 1e-12, "order {order}: mean power {p}");
        }
    }

    #[test]
    fn per_axis_map_is_gray() {
        // Walk the levels in amplitude order; adjacent codes differ by 1 bit.
        for m in [1u32, 2, 3] {
            let levels = 1usize << m;
            let mut by_level: Vec<(i64, u32)> = (0..levels as u32)
                .map(|code| {
                    let bits: Vec<u8> = (0..m).rev().map(|s| ((code >> s) & 1) as u8).collect();
                    (gray_bits_to_level(&bits, m) as i64, code)
                })
                .collect();
            by_level.sort();
            for pair in by_level.windows(2) {
                let diff = (pair[0].1 ^ pair[1].1).count_ones();
                assert_eq!(diff, 1, "codes {:?} not Gray-adjacent", pair);
            }
        }
    }

    #[test]
    fn grid_fill_is_column_major() {
        // 2x2 grid of QPSK: third symbol pair lands at (0, 1).
        let bits = [0, 0, 0, 0, 1, 1, 0, 0];
        let g = map_qam(&bits, 4, 2, 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((g.data[(0, 1)] - Complex64::new(-s, -s)).norm() < 1e-15);
    }

    #[test]
    fn wrong_bit_count_is_rejected() {
        assert!(map_qam(&[0, 1, 0], 4, 1, 1).is_err());
    }

    #[test]
    fn sixteen_qam_uses_every_point() {
        let mut bits = Vec::new();
        for v in 0..16u32 {
            for s in (0..4).rev() {
                bits.push(((v >> s) & 1) as u8);
            }
        }
        let g = map_qam(&bits, 16, 4, 4).unwrap();
        let mut seen: Vec<Complex64> = g.data.iter().copied().collect();
        seen.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        seen.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
        assert_eq!(seen.len(), 16);
    }
}
