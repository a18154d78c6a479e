//! Formant extraction from all-pole envelope resonance poles.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::burg::SpectralEnvelope;
use crate::error::{Error, Result};

/// Number of formants reported by default (F1, F2, F3).
pub const DEFAULT_FORMANT_COUNT: usize = 3;
/// Poles below this frequency are treated as glottal/tilt poles, not formants.
pub const DEFAULT_MIN_FORMANT_HZ: f64 = 200.0;
/// Poles broader than this are treated as spectral shaping, not resonances.
pub const DEFAULT_MAX_BANDWIDTH_HZ: f64 = 600.0;

/// A single vocal-tract resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Formant {
    pub frequency_hz: f64,
    pub bandwidth_hz: f64,
}

/// Formants in ascending frequency order.
///
/// `partial` is set when fewer qualifying resonance poles were found than
/// requested; the ones found are still returned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormantSet {
    pub formants: Vec<Formant>,
    pub partial: bool,
}

/// Roots of the monic polynomial `z^p + c[1] z^(p-1) + ... + c[p]` via the
/// eigenvalues of its companion matrix. `coeffs` starts with the leading 1.
fn polynomial_roots(coeffs: &[f64]) -> Vec<nalgebra::Complex<f64>> {
    let p = coeffs.len() - 1;
    if p == 0 {
        return Vec::new();
    }
    let companion = DMatrix::from_fn(p, p, |row, col| {
        if row == 0 {
            -coeffs[col + 1]
        } else if row == col + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Reads formants off an all-pole envelope.
///
/// Each pole with positive imaginary part maps to a candidate resonance at
/// `frequency = angle * fs_model / 2pi` with
/// `bandwidth = -(fs_model / pi) * ln|pole|`. Candidates below `min_freq_hz`
/// or broader than `max_bw_hz` are discarded; the lowest `count` survivors
/// by frequency are returned.
pub fn extract_formants(
    env: &SpectralEnvelope,
    count: usize,
    min_freq_hz: f64,
    max_bw_hz: f64,
) -> Result<FormantSet> {
    if !(min_freq_hz >= 0.0) || !min_freq_hz.is_finite() {
        return Err(Error::parameter("min_freq_hz", "must be finite and >= 0"));
    }
    if !(max_bw_hz > 0.0) {
        return Err(Error::parameter("max_bw_hz", "must be positive"));
    }
    let fs = env.fs_model();
    let mut formants: Vec<Formant> = polynomial_roots(env.ar_coeffs())
        .into_iter()
        .filter(|root| root.im > 0.0)
        .map(|root| {
            let frequency_hz = root.im.atan2(root.re) * fs / (2.0 * std::f64::consts::PI);
            let bandwidth_hz = -(fs / std::f64::consts::PI) * root.norm().ln();
            Formant {
                frequency_hz,
                bandwidth_hz,
            }
        })
        .filter(|f| f.frequency_hz > min_freq_hz && f.bandwidth_hz < max_bw_hz)
        .collect();
    formants.sort_by(|a, b| {
        a.frequency_hz
            .partial_cmp(&b.frequency_hz)
            .expect("pole frequencies are finite")
    });
    formants.truncate(count);
    let partial = formants.len() < count;
    Ok(FormantSet { formants, partial })
}
