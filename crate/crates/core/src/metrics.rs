//! Figures of merit for range-Doppler images.
//!
//! All ratios are reported in dB. The noise floor estimate is robust: the
//! median cell power of a complex-Gaussian image is `sigma^2 * ln 2`, so
//! dividing the median by `ln 2` recovers the mean power without letting a
//! handful of strong target cells bias the estimate.

use crate::error::{AfdmError, Result};
use crate::image::RadarImage;
use crate::params::AfdmParams;
use ndarray::Array2;
use num_complex::Complex64;

/// PSLR reported when no sidelobe energy is measurable (impulse profiles).
pub const PSLR_CAP_DB: f64 = 300.0;

/// Coherent integration gain `10*log10(N * N_sym)`.
pub fn processing_gain_db(p: &AfdmParams) -> f64 {
    p.processing_gain_db()
}

/// Mean noise power estimated from the median cell power.
pub fn noise_floor_power(data: &Array2<Complex64>) -> f64 {
    let mut powers: Vec<f64> = data.iter().map(|v| v.norm_sqr()).collect();
    if powers.is_empty() {
        return 0.0;
    }
    let mid = powers.len() / 2;
    let (_, median, _) =
        powers.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).expect("non-NaN power"));
    *median / std::f64::consts::LN_2
}

/// Peak power over mean off-peak power.
///
/// Cells within the cyclic `(2*guard.0+1) x (2*guard.1+1)` window around each
/// declared peak are excluded from the floor average; the reported peak power
/// is the strongest declared peak.
pub fn image_snr_db(
    image: &RadarImage,
    peaks: &[(usize, usize)],
    guard: (usize, usize),
) -> Result<f64> {
    let (nr, nc) = image.data.dim();
    if peaks.is_empty() {
        return Err(AfdmError::EmptyInput("image_snr_db peak list"));
    }
    if 2 * guard.0 + 1 >= nr || 2 * guard.1 + 1 >= nc {
        return Err(AfdmError::InvalidParam(format!(
            "guard window ({}, {}) covers the whole {nr}x{nc} image",
            guard.0, guard.1
        )));
    }
    let mut excluded = Array2::<bool>::from_elem((nr, nc), false);
    let mut peak_power = 0.0f64;
    for &(pr, pc) in peaks {
        if pr >= nr || pc >= nc {
            return Err(AfdmError::InvalidParam(format!(
                "declared peak ({pr}, {pc}) outside {nr}x{nc} image"
            )));
        }
        peak_power = peak_power.max(image.data[(pr, pc)].norm_sqr());
        for dr in -(guard.0 as i64)..=guard.0 as i64 {
            for dc in -(guard.1 as i64)..=guard.1 as i64 {
                let r = (pr as i64 + dr).rem_euclid(nr as i64) as usize;
                let c = (pc as i64 + dc).rem_euclid(nc as i64) as usize;
                excluded[(r, c)] = true;
            }
        }
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for ((r, c), v) in image.data.indexed_iter() {
        if !excluded[(r, c)] {
            sum += v.norm_sqr();
            count += 1;
        }
    }
    if count == 0 {
        return Err(AfdmError::InvalidParam(
            "guard windows exclude every cell".into(),
        ));
    }
    let floor = sum / count as f64;
    if floor <= 0.0 {
        return Ok(PSLR_CAP_DB);
    }
    Ok(10.0 * (peak_power / floor).log10())
}

/// Peak-to-sidelobe ratio of a 1-D magnitude profile, cyclic indexing.
///
/// The main lobe is the strongest sample plus `halfwidth` bins on each side;
/// the sidelobe level is the largest magnitude outside it.
pub fn pslr_db(profile: &[f64], halfwidth: usize) -> Result<f64> {
    if profile.is_empty() {
        return Err(AfdmError::EmptyInput("pslr profile"));
    }
    if 2 * halfwidth + 1 >= profile.len() {
        return Err(AfdmError::InvalidParam(format!(
            "mainlobe halfwidth {halfwidth} covers the whole profile of {} bins",
            profile.len()
        )));
    }
    let n = profile.len();
    let (peak_idx, &peak) = profile
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("non-NaN magnitude"))
        .expect("nonempty profile");
    if peak <= 0.0 {
        return Err(AfdmError::EmptyInput("all-zero pslr profile"));
    }
    let mut side = 0.0f64;
    for (i, &v) in profile.iter().enumerate() {
        let d = (i as i64 - peak_idx as i64).rem_euclid(n as i64);
        let d = d.min(n as i64 - d);
        if d > halfwidth as i64 {
            side = side.max(v);
        }
    }
    if side <= 0.0 {
        return Ok(PSLR_CAP_DB);
    }
    Ok((20.0 * (peak / side).log10()).min(PSLR_CAP_DB))
}

/// Scales the image so the strongest cell has unit magnitude.
pub fn normalize(image: &mut RadarImage) -> Result<()> {
    let (_, _, peak) = image.peak();
    if peak <= 0.0 {
        return Err(AfdmError::EmptyInput("normalize on an all-zero image"));
    }
    image.data.mapv_inplace(|v| v / peak);
    image.normalized = true;
    Ok(())
}

/// Range cut: magnitudes down column `col`.
pub fn range_profile(image: &RadarImage, col: usize) -> Vec<f64> {
    image.data.column(col).iter().map(|v| v.norm()).collect()
}

/// Doppler cut: magnitudes along row `row`.
pub fn doppler_profile(image: &RadarImage, row: usize) -> Vec<f64> {
    image.data.row(row).iter().map(|v| v.norm()).collect()
}

/// Summary of one image, computed with shared conventions: image SNR uses the
/// strongest cell as the declared peak and PSLR uses the range cut through it.
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub pslr_db: f64,
    pub image_snr_db: f64,
    pub peak_location: (usize, usize),
    pub peak_mag: f64,
    pub noise_floor: f64,
    pub processing_gain_db: f64,
}

pub fn report(
    image: &RadarImage,
    guard: (usize, usize),
    pslr_halfwidth: usize,
    p: &AfdmParams,
) -> Result<MetricReport> {
    let (pr, pc, peak_mag) = image.peak();
    let snr = image_snr_db(image, &[(pr, pc)], guard)?;
    let profile = range_profile(image, pc);
    let pslr = pslr_db(&profile, pslr_halfwidth)?;
    Ok(MetricReport {
        pslr_db: pslr,
        image_snr_db: snr,
        peak_location: (pr, pc),
        peak_mag,
        noise_floor: noise_floor_power(&image.data),
        processing_gain_db: processing_gain_db(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gen_noise;
    use crate::params::desk_scale;

    fn image_from(data: Array2<Complex64>) -> RadarImage {
        RadarImage::new(data, &desk_scale())
    }

    #[test]
    fn image_snr_matches_closed_form() {
        let mut data = Array2::from_elem((32, 32), Complex64::new(0.1, 0.0));
        data[(7, 9)] = Complex64::new(10.0, 0.0);
        let image = image_from(data);
        let snr = image_snr_db(&image, &[(7, 9)], (1, 1)).unwrap();
        assert!(
            (snr - 40.0).abs() < 1e-9,
            "A/sigma = 100 should give 40 dB, got {snr}"
        );
    }

    #[test]
    fn image_snr_rejects_covering_guard() {
        let image = image_from(Array2::from_elem((8, 8), Complex64::new(1.0, 0.0)));
        assert!(image_snr_db(&image, &[(0, 0)], (4, 4)).is_err());
    }

    #[test]
    fn noise_image_snr_follows_order_statistics() {
        // Max/mean of M exponential draws concentrates near ln M.
        let data = gen_noise(320, 320, 1.0, 42, 0);
        let image = image_from(data);
        let (r, c, _) = image.peak();
        let snr = image_snr_db(&image, &[(r, c)], (1, 1)).unwrap();
        let expect = 10.0 * (102400.0f64.ln()).log10();
        assert!(
            (snr - expect).abs() < 3.0,
            "noise-only image SNR {snr:.2} dB vs order-statistics {expect:.2} dB"
        );
    }

    #[test]
    fn pslr_impulse_hits_cap_and_flat_is_zero() {
        let mut impulse = vec![0.0; 64];
        impulse[20] = 3.0;
        assert_eq!(pslr_db(&impulse, 1).unwrap(), PSLR_CAP_DB);
        let flat = vec![2.0; 64];
        assert!(pslr_db(&flat, 1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pslr_ignores_mainlobe_shoulders() {
        let mut profile = vec![0.01; 64];
        profile[30] = 1.0;
        profile[29] = 0.8;
        profile[31] = 0.7;
        profile[45] = 0.1;
        let v = pslr_db(&profile, 1).unwrap();
        assert!((v - 20.0).abs() < 1e-9, "sidelobe at 0.1 gives 20 dB, got {v}");
    }

    #[test]
    fn pslr_rejects_zero_profile() {
        assert!(pslr_db(&[0.0; 16], 1).is_err());
        assert!(pslr_db(&[], 1).is_err());
    }

    #[test]
    fn normalize_is_idempotent_and_scale_invariant() {
        let mut data = gen_noise(16, 16, 1.0, 7, 0);
        data[(3, 4)] = Complex64::new(50.0, 0.0);
        let mut a = image_from(data.clone());
        let mut b = image_from(data.mapv(|v| v * 7.0));
        normalize(&mut a).unwrap();
        normalize(&mut b).unwrap();
        for (x, y) in a.data.iter().zip(b.data.iter()) {
            assert!((x - y).norm() < 1e-12, "scaling input must not change output");
        }
        let snapshot = a.data.clone();
        normalize(&mut a).unwrap();
        for (x, y) in a.data.iter().zip(snapshot.iter()) {
            assert!((x - y).norm() < 1e-12, "normalize must be idempotent");
        }
        assert!(a.normalized);
    }

    #[test]
    fn normalize_rejects_zero_image() {
        let mut image = image_from(Array2::zeros((4, 4)));
        assert!(normalize(&mut image).is_err());
    }

    #[test]
    fn report_uses_strongest_cell() {
        let mut data = gen_noise(64, 64, 1e-4, 3, 0);
        data[(12, 40)] = Complex64::new(5.0, 0.0);
        let p = desk_scale();
        let image = RadarImage::new(data, &p);
        let rep = report(&image, (1, 1), 1, &p).unwrap();
        assert_eq!(rep.peak_location, (12, 40));
        assert!(rep.image_snr_db > 40.0);
        assert!(rep.pslr_db > 20.0);
        assert!((rep.processing_gain_db - p.processing_gain_db()).abs() < 1e-12);
    }
}
