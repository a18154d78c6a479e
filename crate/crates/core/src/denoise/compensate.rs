//! Measurement-response compensation: divides the recording system's
//! magnitude response out of a signal in the frequency domain.

use crate::denoise::ResponseCurve;
use crate::error::{Error, Result};
use crate::fft::{fft_real, ifft};
use crate::signal::SampledSignal;

/// Applies the inverse of `curve` to the signal's spectrum.
///
/// One full-length FFT; every bin at frequency f is scaled by
/// `10^(-g(f)/20)` where g linearly interpolates the curve (flat beyond
/// its ends) and is clamped at `reg_floor_db` from below so no bin is
/// boosted by more than `-reg_floor_db` dB. The scale is real and
/// mirror-symmetric, so phases are untouched and the inverse transform
/// is real up to rounding, which is discarded.
pub fn compensate_response(
    signal: &SampledSignal,
    curve: &ResponseCurve,
    reg_floor_db: f64,
) -> Result<SampledSignal> {
    if signal.len() < 2 {
        return Err(Error::InsufficientData(
            "response compensation needs at least 2 samples".into(),
        ));
    }
    let n = signal.len();
    let mut spec = fft_real(&signal.samples);
    for (k, bin) in spec.iter_mut().enumerate() {
        // Mirrored bin frequency keeps the multiplier conjugate-symmetric.
        let f = k.min(n - k) as f64 * signal.fs / n as f64;
        let g = curve.gain_at(f).max(reg_floor_db);
        *bin *= 10f64.powf(-g / 20.0);
    }
    let back = ifft(&spec);

    let imag_energy: f64 = back.iter().map(|c| c.im * c.im).sum();
    let input_energy = signal.energy();
    debug_assert!(
        imag_energy.sqrt() <= 1e-9 * input_energy.sqrt().max(f64::MIN_POSITIVE),
        "imaginary residue unexpectedly large"
    );

    SampledSignal::new(back.iter().map(|c| c.re).collect(), signal.fs)
}
