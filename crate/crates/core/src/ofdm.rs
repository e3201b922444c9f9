//! OFDM reference waveform and its symbol-division range-Doppler processor.
//!
//! The OFDM frame reuses the chirped-prefix machinery with both chirp rates
//! set to zero, which degenerates the subcarrier transform to a unitary DFT
//! and the prefix to a plain cyclic prefix. The receiver divides the received
//! frequency-domain grid by the transmitted symbols, so every target
//! contributes a clean 2-D complex sinusoid regardless of its Doppler, at the
//! cost of noise enhancement on low-magnitude constellation points.

use crate::error::{AfdmError, Result};
use crate::image::RadarImage;
use crate::params::AfdmParams;
use crate::qam::SymbolGrid;
use crate::transforms::{doppler_dft_rows, modulate_frame, TimeFrame, UnitaryFft};
use ndarray::Array2;
use num_complex::Complex64;

/// Returns a copy of `p` with both chirp rates zeroed.
pub fn ofdm_params(p: &AfdmParams) -> AfdmParams {
    p.clone()
        .with_chirp_rates(0.0, 0.0)
        .expect("zero chirp rates are always structurally valid")
}

/// Modulates `grid` as plain CP-OFDM: unitary IDFT per symbol plus cyclic
/// prefix. The returned frame has the same layout as the chirped one.
pub fn ofdm_modulate(grid: &SymbolGrid, p: &AfdmParams) -> Result<TimeFrame> {
    let p0 = ofdm_params(p);
    modulate_frame(grid, &p0)
}

/// Symbol-division range-Doppler map.
///
/// Per symbol: forward DFT of the received block, elementwise division by the
/// transmitted grid, inverse DFT back to delay. A final DFT across symbols
/// with a half-frame shift places zero Doppler at the image center.
pub fn symbol_division_rdm(
    received: &Array2<Complex64>,
    grid: &SymbolGrid,
    p: &AfdmParams,
) -> Result<RadarImage> {
    let n = p.n_subcarriers;
    let n_sym = p.n_symbols;
    if received.dim() != (n, n_sym) {
        return Err(AfdmError::DimensionMismatch {
            expected: n * n_sym,
            got: received.len(),
            context: "symbol_division_rdm received grid",
        });
    }
    if grid.data.dim() != (n, n_sym) {
        return Err(AfdmError::DimensionMismatch {
            expected: n * n_sym,
            got: grid.data.len(),
            context: "symbol_division_rdm symbol grid",
        });
    }
    let fft = UnitaryFft::new(n);
    let mut quotient = Array2::<Complex64>::zeros((n, n_sym));
    let mut buf = vec![Complex64::default(); n];
    for k in 0..n_sym {
        for i in 0..n {
            buf[i] = received[(i, k)];
        }
        fft.forward(&mut buf);
        for (i, v) in buf.iter_mut().enumerate() {
            let x = grid.data[(i, k)];
            if x.norm_sqr() < 1e-24 {
                return Err(AfdmError::ZeroSymbol { row: i, col: k });
            }
            *v /= x;
        }
        fft.inverse(&mut buf);
        for i in 0..n {
            quotient[(i, k)] = buf[i];
        }
    }
    let data = doppler_dft_rows(&quotient);
    Ok(RadarImage::new(data, p))
}
