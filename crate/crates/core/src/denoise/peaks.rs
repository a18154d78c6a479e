//! Prominent-peak detection on a power spectrum with parabolic
//! sub-bin refinement.

use crate::denoise::PipelineConfig;
use crate::spectrum::{PowerSpectrum, SpectralPeak};

/// Finds all strict local maxima rising more than
/// `cfg.peak_threshold_db` above the median spectrum level.
///
/// Each maximum is refined by fitting a parabola through the three dB
/// values around it: with neighbors `a`, peak `b`, `c`, the sub-bin
/// offset is `0.5*(a - c)/(a - 2b + c)` and the interpolated height is
/// `b - 0.25*(a - c)*offset`. Results are sorted by height, tallest
/// first (ties broken by ascending frequency).
pub fn detect_noise_peaks(psd: &PowerSpectrum, cfg: &PipelineConfig) -> Vec<SpectralPeak> {
    if psd.len() < 3 {
        return Vec::new();
    }
    let threshold = psd.median_db() + cfg.peak_threshold_db;
    let df = psd.freq_resolution();
    let db = &psd.power_db;

    let mut peaks = Vec::new();
    for k in 1..db.len() - 1 {
        if db[k] > db[k - 1] && db[k] > db[k + 1] && db[k] > threshold {
            let a = db[k - 1];
            let b = db[k];
            let c = db[k + 1];
            // Strict maximum guarantees the curvature a - 2b + c < 0.
            let offset = 0.5 * (a - c) / (a - 2.0 * b + c);
            peaks.push(SpectralPeak {
                freq_hz: (k as f64 + offset) * df,
                magnitude_db: b - 0.25 * (a - c) * offset,
            });
        }
    }
    peaks.sort_by(|p, q| {
        q.magnitude_db
            .partial_cmp(&p.magnitude_db)
            .expect("peak heights are finite")
            .then(p.freq_hz.partial_cmp(&q.freq_hz).expect("finite"))
    });
    peaks
}
