//! Waveform and frame geometry shared by every stage of the pipeline.
//!
//! The two chirp rates follow the sensing design rule: `c1` is chosen so
//! that `2*N*c1 = 2*(alpha_max + k_v) + 1` (an odd integer, which makes the
//! chirp-periodic prefix degenerate to a plain cyclic prefix for even `N`)
//! and `c2` is a small positive rational well below `1/(2N)`.

use crate::error::{AfdmError, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default divisor K for the second chirp rate, `c2 = 1 / (2 * N * K)`.
pub const DEFAULT_C2_DIVISOR: u32 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct AfdmParams {
    /// Subcarriers per symbol (N). FFT length of every fast-time transform.
    pub n_subcarriers: usize,
    /// Symbols per frame (N_sym). Slow-time length.
    pub n_symbols: usize,
    /// Chirp-periodic prefix length in samples (N_cp). Must stay below N and
    /// upper-bounds the resolvable delay.
    pub n_cpp: usize,
    /// Largest integer normalized Doppler the design must resolve.
    pub alpha_max: u32,
    /// Guard width covering fractional-Doppler leakage (taps per side).
    pub k_v: u32,
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// Occupied bandwidth in Hz. The sample rate equals the bandwidth.
    pub bandwidth_hz: f64,
    /// First chirp rate.
    pub c1: f64,
    /// Second chirp rate.
    pub c2: f64,
}

impl AfdmParams {
    /// Builds a parameter set with the recommended chirp rates.
    pub fn new(
        n_subcarriers: usize,
        n_symbols: usize,
        n_cpp: usize,
        alpha_max: u32,
        k_v: u32,
        carrier_hz: f64,
        bandwidth_hz: f64,
    ) -> Result<Self> {
        let n = n_subcarriers as f64;
        let c1 = f64::from(2 * (alpha_max + k_v) + 1) / (2.0 * n);
        let c2 = 1.0 / (2.0 * n * f64::from(DEFAULT_C2_DIVISOR));
        let p = Self {
            n_subcarriers,
            n_symbols,
            n_cpp,
            alpha_max,
            k_v,
            carrier_hz,
            bandwidth_hz,
            c1,
            c2,
        };
        p.check()?;
        Ok(p)
    }

    /// Same as [`AfdmParams::new`] but with an explicit `c2 = 1/(2*N*K)`.
    pub fn with_c2_divisor(mut self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(AfdmError::InvalidParam("c2 divisor must be positive".into()));
        }
        self.c2 = 1.0 / (2.0 * self.n_subcarriers as f64 * f64::from(k));
        self.check()?;
        Ok(self)
    }

    /// Overrides both chirp rates. Only structural checks are applied, so
    /// degenerate settings (`c1 = c2 = 0` reduces the waveform to OFDM) are
    /// allowed for cross-checks and baselines.
    pub fn with_chirp_rates(mut self, c1: f64, c2: f64) -> Result<Self> {
        self.c1 = c1;
        self.c2 = c2;
        self.check_structure()?;
        Ok(self)
    }

    fn check_structure(&self) -> Result<()> {
        if self.n_subcarriers == 0 || self.n_symbols == 0 {
            return Err(AfdmError::InvalidParam(
                "subcarrier and symbol counts must be positive".into(),
            ));
        }
        if self.n_cpp >= self.n_subcarriers {
            return Err(AfdmError::InvalidParam(format!(
                "prefix length {} must be below the symbol length {}",
                self.n_cpp, self.n_subcarriers
            )));
        }
        // NaN must fail here too, so test the accepting condition.
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.bandwidth_hz) || !positive(self.carrier_hz) {
            return Err(AfdmError::InvalidParam(
                "carrier and bandwidth must be positive".into(),
            ));
        }
        Ok(())
    }

    fn check(&self) -> Result<()> {
        self.check_structure()?;
        let upper = 1.0 / (2.0 * self.n_subcarriers as f64);
        if !(self.c2 > 0.0 && self.c2 < upper) {
            return Err(AfdmError::InvalidParam(format!(
                "c2 = {} outside (0, 1/(2N)) = (0, {})",
                self.c2, upper
            )));
        }
        Ok(())
    }

    /// `2*N*c1`; an odd integer under the recommended design.
    pub fn two_n_c1(&self) -> f64 {
        2.0 * self.n_subcarriers as f64 * self.c1
    }

    /// Subcarrier spacing Δf = B / N.
    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.bandwidth_hz / self.n_subcarriers as f64
    }

    /// Sample interval t_s = 1 / B.
    pub fn sample_interval_s(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    /// Core symbol duration T = N * t_s (no prefix).
    pub fn symbol_duration_s(&self) -> f64 {
        self.n_subcarriers as f64 * self.sample_interval_s()
    }

    /// Full symbol duration including the prefix.
    pub fn total_symbol_duration_s(&self) -> f64 {
        (self.n_subcarriers + self.n_cpp) as f64 * self.sample_interval_s()
    }

    /// Slow-time sampling rate Δf' = 1 / (T + T_cp); the unambiguous Doppler
    /// span of slow-time processing is ±Δf'/2.
    pub fn alt_spacing_hz(&self) -> f64 {
        self.bandwidth_hz / (self.n_subcarriers + self.n_cpp) as f64
    }

    /// Ratio (N + N_cp) / N linking the two Doppler normalizations.
    pub fn spacing_ratio(&self) -> f64 {
        (self.n_subcarriers + self.n_cpp) as f64 / self.n_subcarriers as f64
    }

    /// Doppler bin width of a frame-length slow-time DFT.
    pub fn doppler_bin_hz(&self) -> f64 {
        self.alt_spacing_hz() / self.n_symbols as f64
    }

    pub fn range_resolution_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)
    }

    pub fn velocity_resolution_mps(&self) -> f64 {
        self.doppler_bin_hz() * SPEED_OF_LIGHT / (2.0 * self.carrier_hz)
    }

    /// Coherent integration gain 10*log10(N * N_sym).
    pub fn processing_gain_db(&self) -> f64 {
        10.0 * (self.n_subcarriers as f64 * self.n_symbols as f64).log10()
    }

    /// Serialized frame length (N + N_cp) * N_sym.
    pub fn frame_len(&self) -> usize {
        (self.n_subcarriers + self.n_cpp) * self.n_symbols
    }

    pub fn doppler_to_velocity(&self, doppler_hz: f64) -> f64 {
        doppler_hz * SPEED_OF_LIGHT / (2.0 * self.carrier_hz)
    }

    pub fn velocity_to_doppler(&self, velocity_mps: f64) -> f64 {
        velocity_mps * 2.0 * self.carrier_hz / SPEED_OF_LIGHT
    }

    pub fn delay_bin_to_range_m(&self, l: usize) -> f64 {
        l as f64 * self.sample_interval_s() * SPEED_OF_LIGHT / 2.0
    }
}

/// Table-scale reference design: N = 4096, N_sym = 256, N_cp = 256,
/// 24 GHz carrier, 93.1 MHz bandwidth.
pub fn full_scale() -> AfdmParams {
    AfdmParams::new(4096, 256, 256, 2, 4, 24.0e9, 93.1e6).expect("reference design is valid")
}

/// Reduced geometry (N = 512, N_sym = 64, N_cp = 32) with the same RF
/// constants; small enough for exhaustive grid tests.
pub fn desk_scale() -> AfdmParams {
    AfdmParams::new(512, 64, 32, 2, 4, 24.0e9, 93.1e6).expect("desk design is valid")
}
