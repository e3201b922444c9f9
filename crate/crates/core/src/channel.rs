//! Point-target echo synthesis and its chirp-domain transfer model.
//!
//! Two independent routes produce the received payload-domain matrix:
//!
//! ```text
//!   serialized frame --delay/Doppler/noise--> echo --deframe+daft--> Y
//!   payload grid  --per-target transfer matrices H_i, phase ramps D_i--> Y
//! ```
//!
//! The first is the simulation ground truth (sample-level, frame-long
//! Doppler phase); the second is the analytic model the estimator theory
//! rests on. They agree to near machine precision, and the test suite pins
//! that equivalence.

use crate::error::{AfdmError, Result};
use crate::params::AfdmParams;
use crate::qam::SymbolGrid;
use crate::rng::stream_rng;
use crate::transforms::cis_turns;
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// One point scatterer. Delay is stored quantized to sample bins; Doppler is
/// stored as the normalized value `nu = f_d / Δf` (single source of truth for
/// every derived frequency).
#[derive(Debug, Clone)]
pub struct Target {
    /// Complex reflection gain h (before the delay-dependent carrier phase).
    pub gain: Complex64,
    /// Delay in whole sample bins; must stay below the prefix length.
    pub delay_bins: usize,
    /// Normalized Doppler nu = f_d / Δf.
    pub normalized_doppler: f64,
    /// Absolute two-way delay in seconds (unquantized when built from range).
    pub delay_s: f64,
}

impl Target {
    /// Target from physical range and radial velocity. The range is
    /// quantized to the nearest delay bin for the discrete model while the
    /// carrier phase keeps the absolute delay.
    pub fn from_physical(gain: Complex64, range_m: f64, velocity_mps: f64, p: &AfdmParams) -> Self {
        let tau = 2.0 * range_m / crate::params::SPEED_OF_LIGHT;
        let delay_bins = (tau / p.sample_interval_s()).round() as usize;
        let f_d = p.velocity_to_doppler(velocity_mps);
        Self {
            gain,
            delay_bins,
            normalized_doppler: f_d / p.subcarrier_spacing_hz(),
            delay_s: tau,
        }
    }

    /// Target on the discrete grid: delay in bins, Doppler normalized to the
    /// subcarrier spacing.
    pub fn from_bins(gain: Complex64, delay_bins: usize, nu: f64, p: &AfdmParams) -> Self {
        Self {
            gain,
            delay_bins,
            normalized_doppler: nu,
            delay_s: delay_bins as f64 * p.sample_interval_s(),
        }
    }

    pub fn doppler_hz(&self, p: &AfdmParams) -> f64 {
        self.normalized_doppler * p.subcarrier_spacing_hz()
    }

    pub fn velocity_mps(&self, p: &AfdmParams) -> f64 {
        p.doppler_to_velocity(self.doppler_hz(p))
    }

    /// Doppler per sample, `f_i = nu / N` (dimensionless cycles/sample).
    pub fn doppler_per_sample(&self, p: &AfdmParams) -> f64 {
        self.normalized_doppler / p.n_subcarriers as f64
    }

    /// Integer part of the normalized Doppler, with the fractional remainder
    /// constrained to (-1/2, 1/2].
    pub fn alpha(&self) -> i64 {
        (self.normalized_doppler - 0.5).ceil() as i64
    }

    /// Fractional Doppler remainder a = nu - alpha, in (-1/2, 1/2].
    pub fn frac_a(&self) -> f64 {
        self.normalized_doppler - self.alpha() as f64
    }

    /// Gain with the carrier phase of the two-way delay folded in:
    /// `h * exp(-j 2π f_d τ)`.
    pub fn effective_gain(&self, p: &AfdmParams) -> Complex64 {
        self.gain * cis_turns(-self.doppler_hz(p) * self.delay_s)
    }
}

/// A sensing scene: targets plus the per-sample echo SNR. `snr_db = None`
/// disables noise entirely.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub targets: Vec<Target>,
    pub snr_db: Option<f64>,
    pub seed: u64,
    /// Stream index for noise draws; distinct trials use distinct streams.
    pub noise_stream: u64,
}

impl Scenario {
    pub fn noiseless(targets: Vec<Target>) -> Self {
        Self {
            targets,
            snr_db: None,
            seed: 0,
            noise_stream: 0,
        }
    }

    pub fn with_noise(targets: Vec<Target>, snr_db: f64, seed: u64, noise_stream: u64) -> Self {
        Self {
            targets,
            snr_db: Some(snr_db),
            seed,
            noise_stream,
        }
    }

    fn validate(&self, p: &AfdmParams) -> Result<()> {
        for (i, t) in self.targets.iter().enumerate() {
            if t.delay_bins >= p.n_cpp.max(1) {
                return Err(AfdmError::InvalidScenario(format!(
                    "target {i}: delay {} bins exceeds the prefix length {}",
                    t.delay_bins, p.n_cpp
                )));
            }
        }
        Ok(())
    }
}

/// Complex white Gaussian noise, CN(0, sigma2), shaped `rows x cols` and
/// filled column-major. Deterministic per `(seed, stream)`.
pub fn gen_noise(rows: usize, cols: usize, sigma2: f64, seed: u64, stream: u64) -> Array2<Complex64> {
    let mut rng = stream_rng(seed, stream);
    let std = (sigma2 / 2.0).sqrt();
    let mut out = Array2::zeros((rows, cols));
    for k in 0..cols {
        for i in 0..rows {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            out[(i, k)] = Complex64::new(re * std, im * std);
        }
    }
    out
}

/// Noise power that realizes `snr_db` against the aggregate echo power of
/// the scene: sigma2 = (Σ_i |h̃_i|^2) * mean|s|^2 / SNR.
pub(crate) fn noise_sigma2(
    frame: &[Complex64],
    scenario: &Scenario,
    p: &AfdmParams,
    snr_db: f64,
) -> f64 {
    let mean_power: f64 =
        frame.iter().map(|v| v.norm_sqr()).sum::<f64>() / frame.len() as f64;
    let gain_power: f64 = scenario
        .targets
        .iter()
        .map(|t| t.effective_gain(p).norm_sqr())
        .sum();
    gain_power * mean_power / 10f64.powf(snr_db / 10.0)
}

/// Applies the scene to a serialized transmit frame.
///
/// Each target contributes `h̃_i * s[n - l_i] * exp(j 2π f_i n)` with the
/// delayed stream zero-filled before the frame start; noise is added last.
/// Errors if any delay reaches the prefix length.
pub fn synthesize_echo(
    frame: &[Complex64],
    scenario: &Scenario,
    p: &AfdmParams,
) -> Result<Vec<Complex64>> {
    if frame.is_empty() {
        return Err(AfdmError::EmptyInput("transmit frame"));
    }
    if frame.len() != p.frame_len() {
        return Err(AfdmError::DimensionMismatch {
            expected: p.frame_len(),
            got: frame.len(),
            context: "synthesize_echo frame",
        });
    }
    scenario.validate(p)?;
    let len = frame.len();
    let mut echo = vec![Complex64::new(0.0, 0.0); len];
    for t in &scenario.targets {
        let h = t.effective_gain(p);
        let f_i = t.doppler_per_sample(p);
        let l = t.delay_bins;
        for n in l..len {
            echo[n] += h * frame[n - l] * cis_turns(f_i * n as f64);
        }
    }
    if let Some(snr_db) = scenario.snr_db {
        let sigma2 = noise_sigma2(frame, scenario, p, snr_db);
        let noise = gen_noise(len, 1, sigma2, scenario.seed, scenario.noise_stream);
        for (n, v) in echo.iter_mut().enumerate() {
            *v += noise[(n, 0)];
        }
    }
    Ok(echo)
}

/// Geometric-sum kernel: `Σ_{n=0}^{N-1} exp(j 2π g n / N)` evaluated in
/// closed form. The numerator argument is reduced modulo one turn so integer
/// `g` collapses to an exact zero; the removable singularity at `g ≡ 0 (mod N)`
/// evaluates to N.
fn dirichlet_kernel(g: f64, n: usize) -> Complex64 {
    let nf = n as f64;
    let g_red = g - nf * (g / nf).round();
    if g_red.abs() < 1e-9 {
        return Complex64::new(nf, 0.0);
    }
    let num = cis_turns(g) - 1.0;
    let den = cis_turns(g_red / nf) - 1.0;
    num / den
}

/// Dense chirp-domain transfer matrix H of one target: `y = h̃ H x` maps the
/// payload column to its received chirp-domain image (per symbol, before the
/// slow-time phase ramp).
///
/// For integer normalized Doppler every row has exactly one nonzero entry of
/// unit magnitude at column `(p + loc) mod N`, `loc = (2*N*c1*l - nu) mod N`;
/// fractional Doppler spreads each row into a Dirichlet-weighted band around
/// that column.
pub fn daft_channel_matrix(t: &Target, p: &AfdmParams) -> Array2<Complex64> {
    let n = p.n_subcarriers;
    let nf = n as f64;
    let nu = t.normalized_doppler;
    let l = t.delay_bins as f64;
    let two_n_c1_l = p.two_n_c1() * l;
    let mut h = Array2::zeros((n, n));
    let c1_l2 = p.c1 * l * l;
    for row in 0..n {
        let p_f = row as f64;
        for col in 0..n {
            let q_f = col as f64;
            // Phase: c1 l^2 - q l / N + c2 (q^2 - p^2), in turns.
            let phase = c1_l2 - q_f * l / nf + p.c2 * (q_f * q_f - p_f * p_f);
            let g = q_f - p_f + nu - two_n_c1_l;
            h[(row, col)] = cis_turns(phase) * dirichlet_kernel(g, n) / nf;
        }
    }
    h
}

/// Slow-time phase ramp of one target: `diag_k(exp(j 2π f_i (N + N_cp) k))`
/// as a vector over symbol index, including the constant prefix offset
/// `exp(j 2π f_i N_cp)` that aligns the model with the frame time origin.
fn slow_time_ramp(t: &Target, p: &AfdmParams) -> Vec<Complex64> {
    let f_i = t.doppler_per_sample(p);
    let stride = (p.n_subcarriers + p.n_cpp) as f64;
    let offset = f_i * p.n_cpp as f64;
    (0..p.n_symbols)
        .map(|k| cis_turns(f_i * stride * k as f64 + offset))
        .collect()
}

/// Analytic chirp-domain receive matrix: `Y = Σ_i h̃_i H_i X D_i` (noise
/// free). This is the model route; it must match daft(deframe(echo)) of the
/// time-domain route.
pub fn build_daft_model(
    scenario: &Scenario,
    grid: &SymbolGrid,
    p: &AfdmParams,
) -> Result<Array2<Complex64>> {
    if grid.n_subcarriers() != p.n_subcarriers || grid.n_symbols() != p.n_symbols {
        return Err(AfdmError::DimensionMismatch {
            expected: p.n_subcarriers * p.n_symbols,
            got: grid.data.len(),
            context: "build_daft_model grid",
        });
    }
    scenario.validate(p)?;
    let mut y = Array2::zeros((p.n_subcarriers, p.n_symbols));
    for t in &scenario.targets {
        let h = daft_channel_matrix(t, p);
        let hx = h.dot(&grid.data);
        let ramp = slow_time_ramp(t, p);
        let g = t.effective_gain(p);
        for k in 0..p.n_symbols {
            let scale = g * ramp[k];
            for row in 0..p.n_subcarriers {
                y[(row, k)] += scale * hx[(row, k)];
            }
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qam::map_qam;
    use crate::rng::random_bits;
    use crate::transforms::{daft_columns, deframe, modulate_frame};

    fn params(n: usize, n_sym: usize, n_cpp: usize) -> AfdmParams {
        AfdmParams::new(n, n_sym, n_cpp, 2, 4, 24.0e9, 93.1e6).unwrap()
    }

    fn random_grid(p: &AfdmParams, seed: u64) -> SymbolGrid {
        let mut rng = stream_rng(seed, 0);
        let bits = random_bits(&mut rng, p.n_subcarriers * p.n_symbols * 4);
        map_qam(&bits, 16, p.n_subcarriers, p.n_symbols).unwrap()
    }

    fn rel_frobenius(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        let num: f64 = (a - b).iter().map(|v| v.norm_sqr()).sum();
        let den: f64 = b.iter().map(|v| v.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// Time-domain echo route vs analytic transfer-matrix route.
    #[test]
    fn model_matches_time_domain_synthesis() {
        let p = params(64, 8, 16);
        let grid = random_grid(&p, 5);
        let frame = modulate_frame(&grid, &p).unwrap();
        for (l, nu) in [(0usize, 0.0), (3, 1.0), (9, -2.0), (5, 0.73), (15, -1.31)] {
            let t = Target::from_bins(Complex64::new(0.8, -0.4), l, nu, &p);
            let sc = Scenario::noiseless(vec![t]);
            let echo = synthesize_echo(&frame.serialized, &sc, &p).unwrap();
            let y_time = daft_columns(&deframe(&echo, &p).unwrap(), &p).unwrap();
            let y_model = build_daft_model(&sc, &grid, &p).unwrap();
            let err = rel_frobenius(&y_time, &y_model);
            assert!(err < 1e-10, "(l={l}, nu={nu}): relative error {err}");
        }
    }

    #[test]
    fn model_matches_for_multiple_targets() {
        let p = params(64, 8, 16);
        let grid = random_grid(&p, 9);
        let frame = modulate_frame(&grid, &p).unwrap();
        let targets = vec![
            Target::from_bins(Complex64::new(1.0, 0.0), 2, 1.8, &p),
            Target::from_bins(Complex64::new(-0.3, 0.9), 11, -0.42, &p),
            Target::from_bins(Complex64::new(0.5, 0.5), 7, 2.0, &p),
        ];
        let sc = Scenario::noiseless(targets);
        let echo = synthesize_echo(&frame.serialized, &sc, &p).unwrap();
        let y_time = daft_columns(&deframe(&echo, &p).unwrap(), &p).unwrap();
        let y_model = build_daft_model(&sc, &grid, &p).unwrap();
        let err = rel_frobenius(&y_time, &y_model);
        assert!(err < 1e-10, "three-target relative error {err}");
    }

    #[test]
    fn integer_doppler_rows_have_single_unit_tap() {
        let p = params(64, 8, 16);
        let t = Target::from_bins(Complex64::new(1.0, 0.0), 5, -2.0, &p);
        let h = daft_channel_matrix(&t, &p);
        let n = p.n_subcarriers;
        let loc = ((p.two_n_c1() * 5.0 - (-2.0)) as i64).rem_euclid(n as i64) as usize;
        for row in 0..n {
            let hot = (row + loc) % n;
            for col in 0..n {
                let mag = h[(row, col)].norm();
                if col == hot {
                    assert!((mag - 1.0).abs() < 1e-10, "peak row {row} mag {mag}");
                } else {
                    assert!(mag < 1e-10, "leak at ({row}, {col}) = {mag}");
                }
            }
        }
    }

    #[test]
    fn fractional_doppler_concentrates_in_guard_band() {
        let p = params(64, 8, 16);
        let t = Target::from_bins(Complex64::new(1.0, 0.0), 4, 1.37, &p);
        let h = daft_channel_matrix(&t, &p);
        let n = p.n_subcarriers as i64;
        let loc = ((p.two_n_c1() as i64) * 4 - 1).rem_euclid(n);
        // Energy within k_v taps of the nominal column should dominate.
        let mut inside = 0.0;
        let mut total = 0.0;
        for row in 0..p.n_subcarriers {
            for col in 0..p.n_subcarriers {
                let e = h[(row, col)].norm_sqr();
                total += e;
                let d = (col as i64 - (row as i64 + loc)).rem_euclid(n);
                let d = d.min(n - d);
                if d <= p.k_v as i64 {
                    inside += e;
                }
            }
        }
        assert!(
            inside / total > 0.95,
            "guard band holds {:.4} of the energy",
            inside / total
        );
    }

    #[test]
    fn delay_at_prefix_length_is_rejected() {
        let p = params(64, 4, 16);
        let t = Target::from_bins(Complex64::new(1.0, 0.0), 16, 0.0, &p);
        let sc = Scenario::noiseless(vec![t]);
        let frame = vec![Complex64::new(1.0, 0.0); p.frame_len()];
        assert!(synthesize_echo(&frame, &sc, &p).is_err());
    }

    #[test]
    fn noise_variance_matches_request() {
        let sigma2 = 0.37;
        let noise = gen_noise(1000, 1000, sigma2, 11, 4);
        let measured: f64 =
            noise.iter().map(|v| v.norm_sqr()).sum::<f64>() / noise.len() as f64;
        assert!(
            (measured - sigma2).abs() / sigma2 < 0.01,
            "measured {measured}, wanted {sigma2}"
        );
    }

    #[test]
    fn noise_is_deterministic_per_stream() {
        let a = gen_noise(16, 4, 1.0, 3, 7);
        let b = gen_noise(16, 4, 1.0, 3, 7);
        let c = gen_noise(16, 4, 1.0, 3, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn physical_constructor_quantizes_delay() {
        let p = params(64, 4, 16);
        for (bins, want) in [(7.6, 8usize), (7.4, 7), (0.2, 0)] {
            let range = bins * p.range_resolution_m();
            let t = Target::from_physical(Complex64::new(1.0, 0.0), range, 30.0, &p);
            assert_eq!(t.delay_bins, want, "{bins} bins of range rounds to {want}");
            assert!((t.delay_s - 2.0 * range / crate::params::SPEED_OF_LIGHT).abs() < 1e-18);
        }
    }

    #[test]
    fn alpha_split_respects_half_open_interval() {
        let p = params(64, 4, 16);
        let t = |nu: f64| Target::from_bins(Complex64::new(1.0, 0.0), 0, nu, &p);
        assert_eq!(t(1.5).alpha(), 1);
        assert!((t(1.5).frac_a() - 0.5).abs() < 1e-12);
        assert_eq!(t(-1.5).alpha(), -2);
        assert!((t(-1.5).frac_a() - 0.5).abs() < 1e-12);
        assert_eq!(t(0.49).alpha(), 0);
        assert_eq!(t(-0.51).alpha(), -1);
    }
}
