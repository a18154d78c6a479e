//! Spectral tilt: envelope roll-off in dB per octave.

use serde::{Deserialize, Serialize};

use crate::analysis::burg::SpectralEnvelope;
use crate::error::{Error, Result};

/// Lower edge of the default tilt regression band, in Hz.
pub const DEFAULT_TILT_F_LO_HZ: f64 = 465.0;
/// Upper edge of the default tilt regression band, in Hz.
pub const DEFAULT_TILT_F_HI_HZ: f64 = 5000.0;

const GRID_POINTS: usize = 200;

/// Result of regressing envelope level against log2(frequency).
///
/// `rolloff_db_per_octave` is positive for a falling spectrum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TiltEstimate {
    pub rolloff_db_per_octave: f64,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `level_db` against log2 of `freqs_hz`.
/// Returns (rolloff = -slope, r_squared). Shared with the vowel
/// synthesizer, which calibrates its source shaping against the same
/// regression.
pub(crate) fn regress_rolloff(freqs_hz: &[f64], level_db: &[f64]) -> (f64, f64) {
    let n = freqs_hz.len() as f64;
    let xs: Vec<f64> = freqs_hz.iter().map(|f| f.log2()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = level_db.iter().sum::<f64>() / n;
    let mut ss_xy = 0.0;
    let mut ss_xx = 0.0;
    let mut ss_yy = 0.0;
    for (x, y) in xs.iter().zip(level_db) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        ss_xy += dx * dy;
        ss_xx += dx * dx;
        ss_yy += dy * dy;
    }
    // Level variation at or below numerical dust (~1e-12 dB^2 summed) is
    // a flat envelope: the zero-slope line fits it exactly.
    if ss_yy <= 1e-12 {
        return (0.0, 1.0);
    }
    let slope = ss_xy / ss_xx;
    let r_squared = (ss_xy * ss_xy) / (ss_xx * ss_yy);
    (-slope, r_squared)
}

/// Measures how fast the envelope falls with frequency, as the negated
/// slope of an ordinary least-squares line fitted to envelope level in dB
/// over 200 log-uniformly spaced frequencies in `[f_lo_hz, f_hi_hz]`.
pub fn spectral_tilt(env: &SpectralEnvelope, f_lo_hz: f64, f_hi_hz: f64) -> Result<TiltEstimate> {
    if !(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz) {
        return Err(Error::parameter(
            "tilt_band",
            "requires 0 < f_lo_hz < f_hi_hz",
        ));
    }
    if f_hi_hz >= env.fs_model() / 2.0 {
        return Err(Error::parameter(
            "tilt_band",
            "f_hi_hz must lie below the model Nyquist frequency",
        ));
    }
    let ratio = f_hi_hz / f_lo_hz;
    let freqs: Vec<f64> = (0..GRID_POINTS)
        .map(|i| f_lo_hz * ratio.powf(i as f64 / (GRID_POINTS - 1) as f64))
        .collect();
    let levels: Vec<f64> = freqs
        .iter()
        .map(|&f| env.power_db_at(f))
        .collect::<Result<_>>()?;
    let (rolloff_db_per_octave, r_squared) = regress_rolloff(&freqs, &levels);
    Ok(TiltEstimate {
        rolloff_db_per_octave,
        f_lo_hz,
        f_hi_hz,
        r_squared,
    })
}
