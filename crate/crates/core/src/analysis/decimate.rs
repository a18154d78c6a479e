//! Sample-rate reduction with zero-phase anti-alias filtering.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// One second-order section of a recursive filter, direct form I.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn run(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        for (i, &xn) in x.iter().enumerate() {
            let yn = self.b0 * xn + self.b1 * x1 + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
            x2 = x1;
            x1 = xn;
            y2 = y1;
            y1 = yn;
            y[i] = yn;
        }
        y
    }
}

/// Designs an order-8 Butterworth low-pass at `fc` Hz as a cascade of
/// four biquads, via the bilinear transform with frequency pre-warping.
fn butterworth8_lowpass(fs: f64, fc: f64) -> Vec<Biquad> {
    let order = 8;
    let k = 2.0 * fs;
    let omega = k * (std::f64::consts::PI * fc / fs).tan();
    (1..=order / 2)
        .map(|section| {
            // Analog prototype pole pair at radius omega, left half-plane.
            let theta =
                std::f64::consts::PI * (0.5 + (2.0 * section as f64 - 1.0) / (2.0 * order as f64));
            let pole_re = omega * theta.cos();
            let d0 = k * k - 2.0 * pole_re * k + omega * omega;
            let d1 = -2.0 * k * k + 2.0 * omega * omega;
            let d2 = k * k + 2.0 * pole_re * k + omega * omega;
            Biquad {
                b0: omega * omega / d0,
                b1: 2.0 * omega * omega / d0,
                b2: omega * omega / d0,
                a1: d1 / d0,
                a2: d2 / d0,
            }
        })
        .collect()
}

/// Runs the cascade forward and backward (zero phase overall), absorbing
/// start-up transients in odd-reflection padding at both ends.
fn zero_phase(sections: &[Biquad], x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    let pad = pad.min(n.saturating_sub(1));
    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=pad {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }

    let mut y = ext;
    for s in sections {
        y = s.run(&y);
    }
    y.reverse();
    for s in sections {
        y = s.run(&y);
    }
    y.reverse();
    y[pad..pad + n].to_vec()
}

/// Reduces the sample rate by an integer `factor`.
///
/// The signal is low-passed at 0.8 of the new Nyquist frequency with an
/// order-8 Butterworth filter applied forward and backward (zero phase,
/// 16th-order magnitude), then every `factor`-th sample is kept. A factor
/// of 1 returns the input unchanged.
pub fn decimate(signal: &SampledSignal, factor: usize) -> Result<SampledSignal> {
    if factor == 0 {
        return Err(Error::parameter("factor", "must be at least 1"));
    }
    if factor == 1 {
        return Ok(signal.clone());
    }
    let fs = signal.fs;
    let fc = 0.8 * (fs / 2.0 / factor as f64);
    let sections = butterworth8_lowpass(fs, fc);
    // The slowest pole's impulse response decays within a few dozen
    // samples at factor 4; padding scales with the cutoff period.
    let filtered = zero_phase(&sections, &signal.samples, 48 * factor);
    let kept: Vec<f64> = filtered.iter().step_by(factor).copied().collect();
    SampledSignal::new(kept, fs / factor as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tone(freq: f64, fs: f64, n: usize, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|t| amp * (2.0 * std::f64::consts::PI * freq * t as f64 / fs).sin())
            .collect()
    }

    /// Amplitude of the component at `freq` via quadrature projection over
    /// an exact integer number of cycles.
    fn projected_amplitude(x: &[f64], freq: f64, fs: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * freq / fs;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &v) in x.iter().enumerate() {
            re += v * (w * t as f64).cos();
            im += v * (w * t as f64).sin();
        }
        2.0 * (re * re + im * im).sqrt() / x.len() as f64
    }

    #[test]
    fn factor_one_is_identity() {
        let signal = SampledSignal::new(tone(997.0, 44100.0, 2000, 0.3), 44100.0).unwrap();
        let out = decimate(&signal, 1).unwrap();
        assert_eq!(out.samples, signal.samples);
        assert_eq!(out.fs, signal.fs);
    }

    #[test]
    fn passband_tone_survives_with_amplitude_within_one_percent() {
        let fs = 44100.0;
        let signal = SampledSignal::new(tone(1000.0, fs, 44100, 0.5), fs).unwrap();
        let out = decimate(&signal, 4).unwrap();
        assert_relative_eq!(out.fs, 11025.0);
        assert_eq!(out.len(), 11025);

        // 1000 Hz at 11025 Hz completes 40 cycles every 441 samples; use
        // 7056 = 441 * 16 samples from the middle so the projection is exact.
        let mid = &out.samples[2000..2000 + 7056];
        let amp = projected_amplitude(mid, 1000.0, out.fs);
        assert!(
            (amp - 0.5).abs() / 0.5 < 0.01,
            "amplitude {amp:.4}, wanted 0.5 +/- 1%"
        );
    }

    #[test]
    fn stopband_tone_is_attenuated_at_least_40_db() {
        let fs = 44100.0;
        let amp = 0.5;
        let signal = SampledSignal::new(tone(6000.0, fs, 44100, amp), fs).unwrap();
        let out = decimate(&signal, 4).unwrap();

        let mid = &out.samples[1000..10000];
        let rms_out = (mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64).sqrt();
        let rms_in = amp / 2.0_f64.sqrt();
        let atten_db = 20.0 * (rms_in / rms_out).log10();
        assert!(atten_db >= 40.0, "only {atten_db:.1} dB attenuation");
    }

    #[test]
    fn dc_passes_exactly() {
        let signal = SampledSignal::new(vec![0.25; 8000], 44100.0).unwrap();
        let out = decimate(&signal, 4).unwrap();
        for &v in &out.samples {
            assert_relative_eq!(v, 0.25, epsilon = 1e-9);
        }
    }

    #[test]
    fn output_length_covers_all_input_samples() {
        let signal = SampledSignal::new(tone(500.0, 44100.0, 44103, 0.1), 44100.0).unwrap();
        let out = decimate(&signal, 4).unwrap();
        // ceil(44103 / 4)
        assert_eq!(out.len(), 11026);
    }

    #[test]
    fn factor_zero_is_rejected() {
        let signal = SampledSignal::new(vec![0.1; 100], 8000.0).unwrap();
        let err = decimate(&signal, 0).unwrap_err();
        assert!(matches!(err, Error::Parameter { .. }), "got {err:?}");
    }

    #[test]
    fn filter_design_matches_reference_magnitudes() {
        // Order-8 Butterworth at 4410 Hz, fs 44100: unity at DC, exactly
        // -3.0103 dB at the cutoff, -23.495 dB at 6 kHz (single pass).
        let sections = butterworth8_lowpass(44100.0, 4410.0);
        let mag = |f: f64| -> f64 {
            let w = 2.0 * std::f64::consts::PI * f / 44100.0;
            let z_re = w.cos();
            let z_im = -w.sin();
            let mut total = 1.0;
            for s in &sections {
                // Evaluate (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
                let z2_re = z_re * z_re - z_im * z_im;
                let z2_im = 2.0 * z_re * z_im;
                let num_re = s.b0 + s.b1 * z_re + s.b2 * z2_re;
                let num_im = s.b1 * z_im + s.b2 * z2_im;
                let den_re = 1.0 + s.a1 * z_re + s.a2 * z2_re;
                let den_im = s.a1 * z_im + s.a2 * z2_im;
                total *= ((num_re * num_re + num_im * num_im)
                    / (den_re * den_re + den_im * den_im))
                    .sqrt();
            }
            total
        };
        assert_relative_eq!(mag(0.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(20.0 * mag(4410.0).log10(), -3.0103, epsilon = 1e-3);
        assert_relative_eq!(20.0 * mag(6000.0).log10(), -23.495, epsilon = 1e-2);
    }
}
