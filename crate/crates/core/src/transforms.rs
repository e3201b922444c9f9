//! Chirp-domain transforms and frame assembly.
//!
//! Signal flow for one symbol (column x of the payload grid):
//!
//! ```text
//!   x --Λ_c2^H--> chirped symbols --IDFT--> --Λ_c1^H--> s --add_cpp--> serialized
//! ```
//!
//! Both transform directions are unitary (1/sqrt(N) each way), so energy is
//! preserved and `daft(idaft(x)) = x` to machine precision. `Λ_c` denotes
//! `diag(exp(-j 2π c n^2))`.

use crate::error::{AfdmError, Result};
use crate::params::AfdmParams;
use crate::qam::SymbolGrid;
use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// `exp(j 2π t)` with the argument reduced in turns before trig evaluation.
/// Keeps dyadic-rational phases (the chirp terms under power-of-two N) exact.
#[inline]
pub(crate) fn cis_turns(turns: f64) -> Complex64 {
    let f = turns - turns.round();
    let (s, c) = (std::f64::consts::TAU * f).sin_cos();
    Complex64::new(c, s)
}

/// Cached unitary FFT pair for one length.
pub(crate) struct UnitaryFft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl UnitaryFft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            scale: 1.0 / (len as f64).sqrt(),
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }
}

/// Unitary slow-time DFT along each row followed by a half-frame circular
/// shift, so zero Doppler lands in the center column. Shared by every
/// range-Doppler processor.
pub(crate) fn doppler_dft_rows(m: &Array2<Complex64>) -> Array2<Complex64> {
    let n_sym = m.ncols();
    let fft = UnitaryFft::new(n_sym);
    let half = n_sym / 2;
    let mut out = Array2::zeros(m.raw_dim());
    let mut row = Vec::with_capacity(n_sym);
    for i in 0..m.nrows() {
        row.clear();
        row.extend(m.row(i).iter().copied());
        fft.forward(&mut row);
        for (k, &v) in row.iter().enumerate() {
            out[(i, (k + half) % n_sym)] = v;
        }
    }
    out
}

fn check_len(len: usize, expected: usize, context: &'static str) -> Result<()> {
    if len != expected {
        return Err(AfdmError::DimensionMismatch {
            expected,
            got: len,
            context,
        });
    }
    Ok(())
}

fn idaft_into(x: &[Complex64], out: &mut Vec<Complex64>, fft: &UnitaryFft, p: &AfdmParams) {
    let n = p.n_subcarriers as f64;
    out.clear();
    out.extend(
        x.iter()
            .enumerate()
            .map(|(m, &v)| v * cis_turns(p.c2 * (m * m) as f64)),
    );
    fft.inverse(out);
    for (i, v) in out.iter_mut().enumerate() {
        *v *= cis_turns(p.c1 * (i * i) as f64);
    }
    let _ = n;
}

/// Synthesizes one time-domain symbol from chirp-domain samples.
pub fn idaft(x: &[Complex64], p: &AfdmParams) -> Result<Vec<Complex64>> {
    check_len(x.len(), p.n_subcarriers, "idaft input")?;
    let fft = UnitaryFft::new(p.n_subcarriers);
    let mut out = Vec::with_capacity(x.len());
    idaft_into(x, &mut out, &fft, p);
    Ok(out)
}

fn daft_into(r: &[Complex64], out: &mut Vec<Complex64>, fft: &UnitaryFft, p: &AfdmParams) {
    out.clear();
    out.extend(
        r.iter()
            .enumerate()
            .map(|(i, &v)| v * cis_turns(-p.c1 * (i * i) as f64)),
    );
    fft.forward(out);
    for (m, v) in out.iter_mut().enumerate() {
        *v *= cis_turns(-p.c2 * (m * m) as f64);
    }
}

/// Analyzes one time-domain symbol back into the chirp domain.
pub fn daft(r: &[Complex64], p: &AfdmParams) -> Result<Vec<Complex64>> {
    check_len(r.len(), p.n_subcarriers, "daft input")?;
    let fft = UnitaryFft::new(p.n_subcarriers);
    let mut out = Vec::with_capacity(r.len());
    daft_into(r, &mut out, &fft, p);
    Ok(out)
}

/// Column-wise [`daft`] of an N x N_sym time matrix.
pub fn daft_columns(r: &Array2<Complex64>, p: &AfdmParams) -> Result<Array2<Complex64>> {
    check_len(r.nrows(), p.n_subcarriers, "daft_columns rows")?;
    let fft = UnitaryFft::new(p.n_subcarriers);
    let mut out = Array2::zeros(r.raw_dim());
    let mut col = Vec::with_capacity(r.nrows());
    let mut buf = Vec::with_capacity(r.nrows());
    for k in 0..r.ncols() {
        col.clear();
        col.extend(r.column(k).iter().copied());
        daft_into(&col, &mut buf, &fft, p);
        for (i, &v) in buf.iter().enumerate() {
            out[(i, k)] = v;
        }
    }
    Ok(out)
}

/// Prefix phase factor for prefix sample `k` of `n_cpp`: the chirp-periodic
/// continuation of the symbol tail. Reduces to 1 (a plain cyclic prefix)
/// whenever `2*N*c1` is an odd integer and N is even.
fn cpp_factor(k: usize, p: &AfdmParams) -> Complex64 {
    let n = p.n_subcarriers as f64;
    let shift = k as f64 - p.n_cpp as f64;
    cis_turns(-p.c1 * (n * n + 2.0 * n * shift))
}

/// Prepends the chirp-periodic prefix to one time-domain symbol.
pub fn add_cpp(s: &[Complex64], p: &AfdmParams) -> Result<Vec<Complex64>> {
    check_len(s.len(), p.n_subcarriers, "add_cpp input")?;
    let n = p.n_subcarriers;
    let mut out = Vec::with_capacity(n + p.n_cpp);
    for k in 0..p.n_cpp {
        out.push(s[n - p.n_cpp + k] * cpp_factor(k, p));
    }
    out.extend_from_slice(s);
    Ok(out)
}

/// A modulated frame: the serialized sample stream (prefixes included) plus
/// the prefix-free N x N_sym symbol matrix the estimators correlate against.
#[derive(Debug, Clone)]
pub struct TimeFrame {
    pub serialized: Vec<Complex64>,
    pub symbol_matrix: Array2<Complex64>,
}

impl TimeFrame {
    pub fn n_subcarriers(&self) -> usize {
        self.symbol_matrix.nrows()
    }

    pub fn n_symbols(&self) -> usize {
        self.symbol_matrix.ncols()
    }
}

/// Modulates a payload grid into a serialized transmit frame.
pub fn modulate_frame(grid: &SymbolGrid, p: &AfdmParams) -> Result<TimeFrame> {
    check_len(grid.n_subcarriers(), p.n_subcarriers, "modulate_frame rows")?;
    check_len(grid.n_symbols(), p.n_symbols, "modulate_frame cols")?;
    let n = p.n_subcarriers;
    let fft = UnitaryFft::new(n);
    let mut serialized = Vec::with_capacity(p.frame_len());
    let mut symbol_matrix = Array2::zeros((n, p.n_symbols));
    let mut col = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for k in 0..p.n_symbols {
        col.clear();
        col.extend(grid.data.column(k).iter().copied());
        idaft_into(&col, &mut s, &fft, p);
        for j in 0..p.n_cpp {
            serialized.push(s[n - p.n_cpp + j] * cpp_factor(j, p));
        }
        serialized.extend_from_slice(&s);
        for (i, &v) in s.iter().enumerate() {
            symbol_matrix[(i, k)] = v;
        }
    }
    Ok(TimeFrame {
        serialized,
        symbol_matrix,
    })
}

/// Strips prefixes from a serialized frame, returning the N x N_sym matrix of
/// core symbol samples.
pub fn deframe(samples: &[Complex64], p: &AfdmParams) -> Result<Array2<Complex64>> {
    check_len(samples.len(), p.frame_len(), "deframe input")?;
    let n = p.n_subcarriers;
    let stride = n + p.n_cpp;
    let mut out = Array2::zeros((n, p.n_symbols));
    for k in 0..p.n_symbols {
        let base = k * stride + p.n_cpp;
        for i in 0..n {
            out[(i, k)] = samples[base + i];
        }
    }
    Ok(out)
}
