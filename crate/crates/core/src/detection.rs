//! Shared detection record produced by every estimator.

/// Chirp-domain Doppler decomposition attached to detections from the
/// matched-filter estimator. `f_d = (beta + b) * Δf' = (alpha + a) * Δf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerParts {
    /// Integer normalized Doppler read from the peak row.
    pub alpha: i64,
    /// Fractional slow-time Doppler read from the peak column, in (-1/2, 1/2].
    pub b: f64,
    /// Integer slow-time alias count resolved by interval intersection.
    pub beta: i64,
    /// Fractional fast-time remainder, in (-1/2, 1/2].
    pub a: f64,
}

/// One detected target.
#[derive(Debug, Clone)]
pub struct Detection {
    /// Delay estimate in sample bins.
    pub delay_bins: usize,
    pub range_m: f64,
    pub doppler_hz: f64,
    pub velocity_mps: f64,
    /// Linear magnitude of the underlying image peak.
    pub peak_mag: f64,
    /// Index of the source image (compensation hypothesis for the
    /// matched-filter scan, 0 for single-image processors).
    pub image_index: usize,
    /// Present only for the chirp-domain estimator.
    pub doppler_parts: Option<DopplerParts>,
}
