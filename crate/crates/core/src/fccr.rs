//! Time-domain range-Doppler processing by fast cyclic cross-correlation.
//!
//! Per symbol column, the received samples are correlated against the known
//! transmit samples through the frequency domain (conjugate on the transmit
//! spectrum, so a delay of l bins peaks at row +l); a slow-time DFT across
//! symbols then separates Doppler. The Doppler readout is unambiguous only
//! within ±Δf'/2: slow-time sampling aliases anything faster, and Doppler
//! within the fast-time window progressively destroys the correlation peak.

use crate::error::{AfdmError, Result};
use crate::detection::Detection;
use crate::image::RadarImage;
use crate::metrics::noise_floor_power;
use crate::params::AfdmParams;
use crate::transforms::{doppler_dft_rows, UnitaryFft};
use ndarray::Array2;
use num_complex::Complex64;

/// Circular cross-correlation of every column pair, via FFTs:
/// `col_j(out)[n] = (1/sqrt(N)) Σ_m R[m, j] * conj(S[(m - n) mod N, j])`.
pub(crate) fn cyclic_xcorr_columns(
    r: &Array2<Complex64>,
    s: &Array2<Complex64>,
) -> Array2<Complex64> {
    let n = r.nrows();
    let fft = UnitaryFft::new(n);
    let mut out = Array2::zeros(r.raw_dim());
    let mut rf = Vec::with_capacity(n);
    let mut sf = Vec::with_capacity(n);
    for k in 0..r.ncols() {
        rf.clear();
        rf.extend(r.column(k).iter().copied());
        sf.clear();
        sf.extend(s.column(k).iter().copied());
        fft.forward(&mut rf);
        fft.forward(&mut sf);
        for (a, b) in rf.iter_mut().zip(&sf) {
            *a *= b.conj();
        }
        fft.inverse(&mut rf);
        for (i, &v) in rf.iter().enumerate() {
            out[(i, k)] = v;
        }
    }
    out
}

/// Builds the range-Doppler map from the deframed receive matrix and the
/// known prefix-free transmit matrix.
pub fn fccr_rdm(
    r: &Array2<Complex64>,
    s: &Array2<Complex64>,
    p: &AfdmParams,
) -> Result<RadarImage> {
    if r.dim() != s.dim() {
        return Err(AfdmError::DimensionMismatch {
            expected: s.len(),
            got: r.len(),
            context: "fccr receive vs transmit matrix",
        });
    }
    if r.nrows() != p.n_subcarriers || r.ncols() != p.n_symbols {
        return Err(AfdmError::DimensionMismatch {
            expected: p.n_subcarriers * p.n_symbols,
            got: r.len(),
            context: "fccr matrix shape",
        });
    }
    let corr = cyclic_xcorr_columns(r, s);
    Ok(RadarImage::new(doppler_dft_rows(&corr), p))
}

/// Extracts local maxima at least `threshold_db` above the image noise floor
/// and converts them to physical estimates. Neighborhoods are 3x3 and wrap
/// in both axes.
pub fn rdm_peaks(image: &RadarImage, threshold_db: f64) -> Vec<Detection> {
    let data = &image.data;
    let (nr, nc) = data.dim();
    let floor = noise_floor_power(data);
    let min_power = floor * 10f64.powf(threshold_db / 10.0);
    let mut out = Vec::new();
    for r in 0..nr {
        for c in 0..nc {
            let power = data[(r, c)].norm_sqr();
            if power < min_power {
                continue;
            }
            let mut is_max = true;
            'scan: for dr in [nr - 1, 0, 1] {
                for dc in [nc - 1, 0, 1] {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let nb = data[((r + dr) % nr, (c + dc) % nc)].norm_sqr();
                    if nb > power {
                        is_max = false;
                        break 'scan;
                    }
                }
            }
            if is_max {
                out.push(Detection {
                    delay_bins: r,
                    range_m: image.range_of_row(r),
                    doppler_hz: image.doppler_of_col(c),
                    velocity_mps: image.velocity_of_col(c),
                    peak_mag: power.sqrt(),
                    image_index: 0,
                    doppler_parts: None,
                });
            }
        }
    }
    out.sort_by(|a, b| b.peak_mag.partial_cmp(&a.peak_mag).unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{synthesize_echo, Scenario, Target};
    use crate::qam::map_qam;
    use crate::rng::{random_bits, stream_rng};
    use crate::transforms::{deframe, modulate_frame};

    fn params(n: usize, n_sym: usize, n_cpp: usize) -> AfdmParams {
        AfdmParams::new(n, n_sym, n_cpp, 2, 4, 24.0e9, 93.1e6).unwrap()
    }

    fn grid_for(p: &AfdmParams, seed: u64) -> crate::qam::SymbolGrid {
        let mut rng = stream_rng(seed, 0);
        let bits = random_bits(&mut rng, p.n_subcarriers * p.n_symbols * 4);
        map_qam(&bits, 16, p.n_subcarriers, p.n_symbols).unwrap()
    }

    #[test]
    fn column_correlation_matches_brute_force() {
        let p = params(64, 4, 16);
        let grid = grid_for(&p, 2);
        let frame = modulate_frame(&grid, &p).unwrap();
        let t = Target::from_bins(Complex64::new(0.9, 0.1), 6, 0.4, &p);
        let echo = synthesize_echo(&frame.serialized, &Scenario::noiseless(vec![t]), &p).unwrap();
        let r = deframe(&echo, &p).unwrap();
        let s = &frame.symbol_matrix;
        let fast = cyclic_xcorr_columns(&r, s);
        let n = p.n_subcarriers;
        let scale = 1.0 / (n as f64).sqrt();
        for k in 0..p.n_symbols {
            for lag in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..n {
                    acc += r[(m, k)] * s[((m + n - lag) % n, k)].conj();
                }
                let want = acc * scale;
                assert!(
                    (fast[(lag, k)] - want).norm() < 1e-9,
                    "lag {lag} col {k}"
                );
            }
        }
    }

    #[test]
    fn single_target_peaks_at_expected_cell() {
        let p = params(256, 32, 32);
        let grid = grid_for(&p, 3);
        let frame = modulate_frame(&grid, &p).unwrap();
        let t = Target::from_bins(Complex64::new(1.0, 0.0), 5, 0.0, &p);
        let echo = synthesize_echo(&frame.serialized, &Scenario::noiseless(vec![t]), &p).unwrap();
        let r = deframe(&echo, &p).unwrap();
        let img = fccr_rdm(&r, &frame.symbol_matrix, &p).unwrap();
        let (row, col, _) = img.peak();
        assert_eq!((row, col), (5, p.n_symbols / 2));
        // Peak-to-mean-off-peak power ratio realizes the processing gain.
        let peak_power = img.data[(row, col)].norm_sqr();
        let mut rest = 0.0;
        let mut count = 0usize;
        for ((r0, c0), v) in img.data.indexed_iter() {
            if (r0 as i64 - 5).abs() > 2 || (c0 as i64 - 16).abs() > 2 {
                rest += v.norm_sqr();
                count += 1;
            }
        }
        let ratio_db = 10.0 * (peak_power / (rest / count as f64)).log10();
        let gp = p.processing_gain_db();
        assert!(
            (ratio_db - gp).abs() < 2.0,
            "peak/floor {ratio_db:.2} dB vs processing gain {gp:.2} dB"
        );
    }

    #[test]
    fn doppler_readout_wraps_to_alias_span() {
        let p = params(256, 32, 32);
        let grid = grid_for(&p, 4);
        let frame = modulate_frame(&grid, &p).unwrap();
        // On-grid slow-time Doppler: nu' = 6/32 within the alias span.
        let nu_p = 6.0 / 32.0;
        let nu = nu_p / p.spacing_ratio();
        let t = Target::from_bins(Complex64::new(1.0, 0.0), 9, nu, &p);
        let echo = synthesize_echo(&frame.serialized, &Scenario::noiseless(vec![t]), &p).unwrap();
        let r = deframe(&echo, &p).unwrap();
        let img = fccr_rdm(&r, &frame.symbol_matrix, &p).unwrap();
        let peaks = rdm_peaks(&img, 13.0);
        assert!(!peaks.is_empty());
        let best = &peaks[0];
        assert_eq!(best.delay_bins, 9);
        let want_hz = nu_p * p.alt_spacing_hz();
        assert!(
            (best.doppler_hz - want_hz).abs() < 1e-6,
            "doppler {} vs {}",
            best.doppler_hz,
            want_hz
        );

        // One alias span higher: identical readout.
        let nu_aliased = (nu_p + 1.0) / p.spacing_ratio();
        let t2 = Target::from_bins(Complex64::new(1.0, 0.0), 9, nu_aliased, &p);
        let echo2 =
            synthesize_echo(&frame.serialized, &Scenario::noiseless(vec![t2]), &p).unwrap();
        let img2 = fccr_rdm(&deframe(&echo2, &p).unwrap(), &frame.symbol_matrix, &p).unwrap();
        let peaks2 = rdm_peaks(&img2, 13.0);
        assert!(!peaks2.is_empty());
        assert!(
            (peaks2[0].doppler_hz - want_hz).abs() < 1e-6,
            "aliased doppler {} vs {}",
            peaks2[0].doppler_hz,
            want_hz
        );
    }

    #[test]
    fn noise_only_image_yields_no_peaks() {
        let p = params(128, 16, 16);
        let grid = grid_for(&p, 6);
        let frame = modulate_frame(&grid, &p).unwrap();
        let noise = crate::channel::gen_noise(p.n_subcarriers, p.n_symbols, 1.0, 1, 0);
        let img = fccr_rdm(&noise, &frame.symbol_matrix, &p).unwrap();
        assert!(rdm_peaks(&img, 13.0).is_empty());
    }
}
