//! Chirp-domain delay-Doppler estimation.
//!
//! The pipeline runs four steps per delay hypothesis l:
//!
//! ```text
//!   Y ──compensate(l)──> Z_l ──matched filter──> W_l ──detect──> candidates
//!                                                                   │
//!   (l̂, α̂ from peak row, b̂ from peak column) <──extract────────────┘
//!                                 │
//!   combine: β̂ from interval intersection, â, f̂_d = (β̂+b̂)·Δf'
//! ```
//!
//! A target at delay l with Doppler ν = α + a shifts the chirp-domain rows
//! cyclically by loc = (2*N*c1*l − α) mod N. The matched filter locates that
//! shift by cyclic correlation: both the compensated receive matrix and the
//! transmit grid are first de-chirped by the second chirp rate (row p scaled
//! by e^{+j2π c2 p²}), which turns the residual c2 phases into a pure cyclic
//! shift and keeps the correlation coherent for every shift value. The peak
//! column of the slow-time DFT reads the fractional part b of ν' = f_d/Δf'.
//!
//! The row readout resolves Doppler modulo Δf (integer α); the column
//! readout resolves it modulo Δf' (fractional b). Combining them recovers
//! f_d far beyond the ±Δf'/2 span of slow-time-only processing: β̂ is the
//! unique integer (or one of two, settled by comparing the row neighbors of
//! the peak) consistent with both readouts.

use crate::cfar::{cfar_2d, CfarConfig};
use crate::detection::{Detection, DopplerParts};
use crate::error::{AfdmError, Result};
use crate::image::RadarImage;
use crate::metrics::noise_floor_power;
use crate::params::AfdmParams;
use crate::qam::SymbolGrid;
use crate::transforms::{cis_turns, doppler_dft_rows, UnitaryFft};
use ndarray::Array2;
use num_complex::Complex64;

/// Peak-candidate detector applied to every hypothesis image.
#[derive(Debug, Clone)]
pub enum Detector {
    /// Every cell whose power exceeds the robust noise floor by `offset_db`.
    Threshold { offset_db: f64 },
    /// Cell-averaging CFAR with the given window and false-alarm rate.
    Cfar(CfarConfig),
}

impl Default for Detector {
    fn default() -> Self {
        Detector::Threshold { offset_db: 13.0 }
    }
}

/// One thresholded cell of a hypothesis image, with the two row neighbors
/// recorded for the alias tie-break in [`combine_doppler`].
#[derive(Debug, Clone, Copy)]
pub struct CandidatePeak {
    /// Delay hypothesis (source image index).
    pub l: usize,
    /// Peak row.
    pub p0: usize,
    /// Peak column.
    pub k0: usize,
    pub mag: f64,
    /// |W[p0 − 1, k0]|, cyclic.
    pub mag_prev_row: f64,
    /// |W[p0 + 1, k0]|, cyclic.
    pub mag_next_row: f64,
}

fn check_grid_dims(rows: usize, cols: usize, p: &AfdmParams, context: &'static str) -> Result<()> {
    if rows != p.n_subcarriers || cols != p.n_symbols {
        return Err(AfdmError::DimensionMismatch {
            expected: p.n_subcarriers * p.n_symbols,
            got: rows * cols,
            context,
        });
    }
    Ok(())
}

fn check_delay_hypothesis(l: usize, p: &AfdmParams) -> Result<()> {
    if l >= p.n_cpp {
        return Err(AfdmError::InvalidParam(format!(
            "delay hypothesis {l} outside prefix span {}",
            p.n_cpp
        )));
    }
    Ok(())
}

/// Removes the delay-l row phase: row p of `y` is scaled by e^{+j2π l p / N}.
pub fn compensate(y: &Array2<Complex64>, l: usize, p: &AfdmParams) -> Result<Array2<Complex64>> {
    check_grid_dims(y.nrows(), y.ncols(), p, "compensate input")?;
    check_delay_hypothesis(l, p)?;
    let n = p.n_subcarriers as f64;
    let mut out = y.clone();
    for (row_idx, mut row) in out.rows_mut().into_iter().enumerate() {
        let f = cis_turns(l as f64 * row_idx as f64 / n);
        for v in row.iter_mut() {
            *v *= f;
        }
    }
    Ok(out)
}

/// Precomputed per-column transmit spectra for the hypothesis scan.
///
/// The de-chirped transmit columns are transformed once; every delay
/// hypothesis then costs two FFTs per column plus the slow-time DFT.
pub struct MatchedFilterBank {
    /// conj(DFT(col ⊙ dechirp)) per column.
    xconj: Array2<Complex64>,
    /// e^{+j2π c2 p²} per row.
    dechirp: Vec<Complex64>,
    fft: UnitaryFft,
    n_cpp: usize,
    n: usize,
}

impl MatchedFilterBank {
    pub fn new(grid: &SymbolGrid, p: &AfdmParams) -> Result<Self> {
        check_grid_dims(grid.data.nrows(), grid.data.ncols(), p, "matched filter grid")?;
        let n = p.n_subcarriers;
        let dechirp: Vec<Complex64> = (0..n)
            .map(|q| cis_turns(p.c2 * (q * q) as f64))
            .collect();
        let fft = UnitaryFft::new(n);
        let mut xconj = Array2::zeros((n, p.n_symbols));
        let mut buf = vec![Complex64::default(); n];
        for k in 0..p.n_symbols {
            for q in 0..n {
                buf[q] = grid.data[(q, k)] * dechirp[q];
            }
            fft.forward(&mut buf);
            for q in 0..n {
                xconj[(q, k)] = buf[q].conj();
            }
        }
        Ok(Self {
            xconj,
            dechirp,
            fft,
            n_cpp: p.n_cpp,
            n,
        })
    }

    /// Hypothesis image W_l: cyclic correlation against the shifted transmit
    /// grid per column, then slow-time DFT with the zero-Doppler column
    /// centered.
    pub fn image(&self, y: &Array2<Complex64>, l: usize) -> Result<Array2<Complex64>> {
        if y.dim() != self.xconj.dim() {
            return Err(AfdmError::DimensionMismatch {
                expected: self.xconj.len(),
                got: y.len(),
                context: "matched filter input",
            });
        }
        if l >= self.n_cpp {
            return Err(AfdmError::InvalidParam(format!(
                "delay hypothesis {l} outside prefix span {}",
                self.n_cpp
            )));
        }
        let n = self.n;
        let row_factor: Vec<Complex64> = (0..n)
            .map(|p_idx| cis_turns(l as f64 * p_idx as f64 / n as f64) * self.dechirp[p_idx])
            .collect();
        let mut corr = Array2::zeros(y.raw_dim());
        let mut buf = vec![Complex64::default(); n];
        for k in 0..y.ncols() {
            for (p_idx, b) in buf.iter_mut().enumerate() {
                *b = y[(p_idx, k)] * row_factor[p_idx];
            }
            self.fft.forward(&mut buf);
            for (p_idx, b) in buf.iter_mut().enumerate() {
                *b *= self.xconj[(p_idx, k)];
            }
            self.fft.forward(&mut buf);
            for (p_idx, &b) in buf.iter().enumerate() {
                corr[(p_idx, k)] = b;
            }
        }
        Ok(doppler_dft_rows(&corr))
    }
}

/// Single-shot matched filter for hypothesis `l` (compensation included).
pub fn matched_filter(
    y: &Array2<Complex64>,
    grid: &SymbolGrid,
    l: usize,
    p: &AfdmParams,
) -> Result<Array2<Complex64>> {
    check_grid_dims(y.nrows(), y.ncols(), p, "matched filter input")?;
    check_delay_hypothesis(l, p)?;
    MatchedFilterBank::new(grid, p)?.image(y, l)
}

/// Every cell of the hypothesis image flagged by the detector. No peak
/// shaping happens here; duplicate suppression is the estimator's merge step.
pub fn detect_peaks(
    w: &Array2<Complex64>,
    l: usize,
    detector: &Detector,
) -> Result<Vec<CandidatePeak>> {
    let (nr, nc) = w.dim();
    let candidate = |r: usize, c: usize| CandidatePeak {
        l,
        p0: r,
        k0: c,
        mag: w[(r, c)].norm(),
        mag_prev_row: w[((r + nr - 1) % nr, c)].norm(),
        mag_next_row: w[((r + 1) % nr, c)].norm(),
    };
    match detector {
        Detector::Threshold { offset_db } => {
            let floor = noise_floor_power(w);
            if floor <= 0.0 {
                return Ok(Vec::new());
            }
            let min_power = floor * 10f64.powf(offset_db / 10.0);
            let mut out = Vec::new();
            for r in 0..nr {
                for c in 0..nc {
                    if w[(r, c)].norm_sqr() >= min_power {
                        out.push(candidate(r, c));
                    }
                }
            }
            Ok(out)
        }
        Detector::Cfar(cfg) => {
            let power = w.mapv(|v| v.norm_sqr());
            Ok(cfar_2d(&power, cfg)?
                .into_iter()
                .map(|(r, c, _)| candidate(r, c))
                .collect())
        }
    }
}

/// Reads (l̂, α̂, b̂) off a candidate cell.
///
/// The peak row p0 sits at (2*N*c1*l − α) mod N, so α̂ is the signed wrap of
/// (2*N*c1*l − p0); candidates whose α̂ falls outside the design range
/// ±alpha_max are rejected (they are correlation sidelobes or noise).
pub fn extract(cand: &CandidatePeak, p: &AfdmParams) -> Result<(usize, i64, f64)> {
    let n = p.n_subcarriers as i64;
    let two_n_c1 = p.two_n_c1().round() as i64;
    let raw = (two_n_c1 * cand.l as i64 - cand.p0 as i64).rem_euclid(n);
    let alpha = if raw >= n / 2 { raw - n } else { raw };
    if alpha.abs() > i64::from(p.alpha_max) {
        return Err(AfdmError::CandidateRejected(format!(
            "integer Doppler {alpha} outside design range ±{} (l = {}, p0 = {})",
            p.alpha_max, cand.l, cand.p0
        )));
    }
    let n_sym = p.n_symbols as f64;
    let mut b = (cand.k0 as f64 - n_sym / 2.0) / n_sym;
    if b == -0.5 {
        b = 0.5;
    }
    Ok((cand.l, alpha, b))
}

/// Smallest integer strictly greater than `x`.
fn strict_ceil(x: f64) -> i64 {
    let c = x.ceil();
    if c == x {
        c as i64 + 1
    } else {
        c as i64
    }
}

/// Resolves the slow-time alias count β̂ and the fractional fast-time
/// remainder â from the two Doppler readouts.
///
/// β̂ must keep â = (β̂+b̂)/r − α̂ inside (−1/2, 1/2], which confines it to the
/// half-open interval (r·α̂ − b̂ − r/2, r·α̂ − b̂ + r/2] of width r ≥ 1. That
/// interval holds one integer or two. With two, the sign of â decides: a
/// positive â leaks target energy into row p0−1, a negative â into row p0+1,
/// so the stronger row neighbor of the peak picks the candidate (β̂_max gives
/// the positive â). Orientation is pinned by the fractional-Doppler pipeline
/// test below.
pub fn combine_doppler(
    alpha: i64,
    b: f64,
    cand: &CandidatePeak,
    p: &AfdmParams,
) -> Result<DopplerParts> {
    let r = p.spacing_ratio();
    let center = r * alpha as f64 - b;
    let beta_min = strict_ceil(center - r / 2.0);
    let beta_max = (center + r / 2.0).floor() as i64;
    let beta = match beta_max - beta_min {
        0 => beta_min,
        1 => {
            if cand.mag_prev_row > cand.mag_next_row {
                beta_max
            } else {
                beta_min
            }
        }
        gap => {
            return Err(AfdmError::Internal(format!(
                "alias interval holds {} integers (alpha = {alpha}, b = {b})",
                gap + 1
            )))
        }
    };
    let a = (beta as f64 + b) / r - alpha as f64;
    if a <= -0.5 - 1e-9 || a > 0.5 + 1e-9 {
        return Err(AfdmError::Internal(format!(
            "fractional Doppler {a} outside (-1/2, 1/2] after alias selection"
        )));
    }
    Ok(DopplerParts { alpha, b, beta, a })
}

fn detection_from(cand: &CandidatePeak, parts: DopplerParts, p: &AfdmParams) -> Detection {
    let doppler_hz = (parts.beta as f64 + parts.b) * p.alt_spacing_hz();
    Detection {
        delay_bins: cand.l,
        range_m: p.delay_bin_to_range_m(cand.l),
        doppler_hz,
        velocity_mps: p.doppler_to_velocity(doppler_hz),
        peak_mag: cand.mag,
        image_index: cand.l,
        doppler_parts: Some(parts),
    }
}

fn scan(
    y: &Array2<Complex64>,
    grid: &SymbolGrid,
    p: &AfdmParams,
    detector: &Detector,
    collect_rdm: bool,
) -> Result<(Option<Array2<Complex64>>, Vec<Detection>)> {
    check_grid_dims(y.nrows(), y.ncols(), p, "estimate input")?;
    let bank = MatchedFilterBank::new(grid, p)?;
    let mut rdm = collect_rdm.then(|| Array2::zeros((p.n_cpp, p.n_symbols)));
    let mut cands: Vec<(CandidatePeak, i64, f64)> = Vec::new();
    for l in 0..p.n_cpp {
        let w = bank.image(y, l)?;
        if let Some(rdm) = rdm.as_mut() {
            for k in 0..p.n_symbols {
                let m = w.column(k).iter().map(|v| v.norm()).fold(0.0, f64::max);
                rdm[(l, k)] = Complex64::new(m, 0.0);
            }
        }
        for cand in detect_peaks(&w, l, detector)? {
            match extract(&cand, p) {
                Ok((_, alpha, b)) => cands.push((cand, alpha, b)),
                Err(AfdmError::CandidateRejected(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    // Strongest-first order, with index tie-breaks so the merge below is
    // deterministic regardless of how the scan was scheduled.
    cands.sort_by(|x, y| {
        y.0.mag
            .partial_cmp(&x.0.mag)
            .expect("non-NaN magnitudes")
            .then(x.0.l.cmp(&y.0.l))
            .then(x.0.p0.cmp(&y.0.p0))
            .then(x.0.k0.cmp(&y.0.k0))
    });
    // Duplicate suppression: a fractional-Doppler target smears over several
    // rows of one column, so weaker cells adjacent in p (same l and k0) are
    // the same target. Cells in neighboring columns are kept: two targets
    // one Doppler bin apart are distinct detections.
    let n = p.n_subcarriers as i64;
    let mut kept: Vec<(CandidatePeak, i64, f64)> = Vec::new();
    for c in cands {
        let dup = kept.iter().any(|k| {
            if k.0.l != c.0.l || k.0.k0 != c.0.k0 {
                return false;
            }
            let d = (c.0.p0 as i64 - k.0.p0 as i64).rem_euclid(n);
            d.min(n - d) <= 1
        });
        if !dup {
            kept.push(c);
        }
    }
    let mut detections = Vec::with_capacity(kept.len());
    for (cand, alpha, b) in kept {
        let parts = combine_doppler(alpha, b, &cand, p)?;
        detections.push(detection_from(&cand, parts, p));
    }
    Ok((rdm, detections))
}

/// Full scan over every delay hypothesis; detections sorted strongest first.
pub fn estimate(
    y: &Array2<Complex64>,
    grid: &SymbolGrid,
    p: &AfdmParams,
    detector: &Detector,
) -> Result<Vec<Detection>> {
    scan(y, grid, p, detector, false).map(|(_, d)| d)
}

/// Like [`estimate`], additionally returning the displayable range-Doppler
/// map: row l holds the per-column peak magnitude of hypothesis image W_l.
pub fn scan_rdm_and_estimate(
    y: &Array2<Complex64>,
    grid: &SymbolGrid,
    p: &AfdmParams,
    detector: &Detector,
) -> Result<(RadarImage, Vec<Detection>)> {
    let (rdm, detections) = scan(y, grid, p, detector, true)?;
    Ok((
        RadarImage::new(rdm.expect("rdm requested"), p),
        detections,
    ))
}
