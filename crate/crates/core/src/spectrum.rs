//! Welch power spectral density estimation and the spectral peak type
//! shared by the detection and filtering stages.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{hann_periodic, FftPlan};
use crate::signal::SampledSignal;

/// Lower clamp for quantities expressed in dB. Bins with zero power are
/// reported at this level instead of negative infinity.
pub const DB_FLOOR: f64 = -200.0;

/// One-sided power spectral density on a uniform frequency grid.
///
/// `power_db[k]` is `10*log10` of the power density (power per Hz) at
/// `freqs_hz[k]`, clamped below at [`DB_FLOOR`]. Integrating the linear
/// density over frequency recovers the mean-square value of the signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    pub freqs_hz: Vec<f64>,
    pub power_db: Vec<f64>,
    /// Sampling rate of the analyzed signal, Hz.
    pub fs: f64,
    /// Analysis frame length in samples.
    pub frame_len: usize,
    /// Number of averaged frames.
    pub frames: usize,
}

impl PowerSpectrum {
    /// Spacing of the frequency grid in Hz.
    pub fn freq_resolution(&self) -> f64 {
        self.fs / self.frame_len as f64
    }

    /// Number of frequency bins (`frame_len/2 + 1`).
    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }

    /// dB level at an arbitrary frequency, linearly interpolated between
    /// the two neighboring bins. Errors outside `[0, fs/2]`.
    pub fn db_at(&self, f_hz: f64) -> Result<f64> {
        let nyquist = self.fs / 2.0;
        if !f_hz.is_finite() || f_hz < 0.0 || f_hz > nyquist {
            return Err(Error::parameter(
                "f_hz",
                format!("{f_hz} outside spectrum range [0, {nyquist}]"),
            ));
        }
        let df = self.freq_resolution();
        let pos = f_hz / df;
        let lo = pos.floor() as usize;
        if lo + 1 >= self.power_db.len() {
            return Ok(self.power_db[self.power_db.len() - 1]);
        }
        let frac = pos - lo as f64;
        Ok(self.power_db[lo] * (1.0 - frac) + self.power_db[lo + 1] * frac)
    }

    /// Median of `power_db`, used as the noise-floor reference for peak
    /// detection.
    pub fn median_db(&self) -> f64 {
        let mut sorted = self.power_db.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("dB values are finite"));
        let n = sorted.len();
        if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        }
    }

    /// Total power obtained by integrating the density over frequency.
    /// For a stationary signal this approximates its mean-square value.
    pub fn integrated_power(&self) -> f64 {
        let df = self.freq_resolution();
        self.power_db
            .iter()
            .map(|&db| 10f64.powf(db / 10.0))
            .sum::<f64>()
            * df
    }
}

/// A detected spectral peak: interpolated frequency and height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub freq_hz: f64,
    pub magnitude_db: f64,
}

/// Welch-averaged one-sided PSD with a periodic Hann window.
///
/// Frames of `frame_len` samples advance by `frame_len * (1 - overlap)`;
/// any tail shorter than one frame is ignored. Averaging happens in
/// linear power; the result is converted to dB with a floor at
/// [`DB_FLOOR`].
pub fn welch_psd(signal: &SampledSignal, frame_len: usize, overlap: f64) -> Result<PowerSpectrum> {
    if frame_len < 4 || !frame_len.is_power_of_two() {
        return Err(Error::parameter(
            "frame_len",
            format!("must be a power of two >= 4, got {frame_len}"),
        ));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::parameter(
            "overlap",
            format!("must lie in [0, 1), got {overlap}"),
        ));
    }
    if signal.len() < frame_len {
        return Err(Error::InsufficientData(format!(
            "signal has {} samples but one PSD frame needs {}",
            signal.len(),
            frame_len
        )));
    }

    let hop = ((frame_len as f64) * (1.0 - overlap)).round().max(1.0) as usize;
    let window = hann_periodic(frame_len);
    let s2: f64 = window.iter().map(|w| w * w).sum();
    let plan = FftPlan::new(frame_len);
    let n_bins = frame_len / 2 + 1;

    let mut mean_power = vec![0.0f64; n_bins];
    let mut frames = 0usize;
    let mut windowed = vec![0.0f64; frame_len];
    let mut start = 0usize;
    while start + frame_len <= signal.len() {
        for (i, w) in window.iter().enumerate() {
            windowed[i] = signal.samples[start + i] * w;
        }
        let spec = plan.forward_real(&windowed);
        for (k, acc) in mean_power.iter_mut().enumerate() {
            // One-sided density: interior bins carry the mirrored half.
            let two_sided = spec[k].norm_sqr() / (signal.fs * s2);
            let one_sided = if k == 0 || k == frame_len / 2 {
                two_sided
            } else {
                2.0 * two_sided
            };
            *acc += one_sided;
        }
        frames += 1;
        start += hop;
    }

    let inv_frames = 1.0 / frames as f64;
    let df = signal.fs / frame_len as f64;
    let power_db: Vec<f64> = mean_power
        .iter()
        .map(|&p| {
            let p = p * inv_frames;
            if p > 0.0 {
                (10.0 * p.log10()).max(DB_FLOOR)
            } else {
                DB_FLOOR
            }
        })
        .collect();
    let freqs_hz: Vec<f64> = (0..n_bins).map(|k| k as f64 * df).collect();

    Ok(PowerSpectrum {
        freqs_hz,
        power_db,
        fs: signal.fs,
        frame_len,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine_at_bin(
        bin: usize,
        amp: f64,
        phase: f64,
        frame_len: usize,
        n_frames: usize,
        fs: f64,
    ) -> SampledSignal {
        let n = frame_len * n_frames;
        let f = bin as f64 * fs / frame_len as f64;
        let samples: Vec<f64> = (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * f * i as f64 / fs + phase).sin())
            .collect();
        SampledSignal::new(samples, fs).unwrap()
    }

    #[test]
    fn frequency_axis_spans_zero_to_nyquist() {
        let sig = SampledSignal::new(vec![0.5; 2048], 8000.0).unwrap();
        let psd = welch_psd(&sig, 512, 0.5).unwrap();
        assert_eq!(psd.len(), 257);
        assert_eq!(psd.freqs_hz[0], 0.0);
        assert_abs_diff_eq!(psd.freqs_hz[256], 4000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(psd.freq_resolution(), 8000.0 / 512.0, epsilon = 1e-12);
    }

    #[test]
    fn silence_sits_on_db_floor() {
        let sig = SampledSignal::zeros(8192, 44100.0).unwrap();
        let psd = welch_psd(&sig, 1024, 0.5).unwrap();
        assert!(psd.power_db.iter().all(|&db| db == DB_FLOOR));
    }

    #[test]
    fn on_bin_sine_peaks_at_its_bin() {
        let psd = welch_psd(&sine_at_bin(100, 0.8, 0.3, 1024, 8, 44100.0), 1024, 0.5).unwrap();
        let argmax = psd
            .power_db
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 100);
    }

    #[test]
    fn integrated_power_matches_sine_mean_square() {
        // An on-bin sine of amplitude A has mean-square A^2/2; integrating
        // the density must recover it.
        let amp = 0.6;
        let sig = sine_at_bin(37, amp, 1.1, 2048, 16, 44100.0);
        let psd = welch_psd(&sig, 2048, 0.5).unwrap();
        let expected = amp * amp / 2.0;
        assert_abs_diff_eq!(psd.integrated_power(), expected, epsilon = 0.05 * expected);
    }

    #[test]
    fn integrated_power_matches_noise_mean_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 512 * 200;
        let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sig = SampledSignal::new(samples, 44100.0).unwrap();
        let mean_square = sig.energy() / sig.len() as f64;
        let psd = welch_psd(&sig, 512, 0.5).unwrap();
        assert_abs_diff_eq!(
            psd.integrated_power(),
            mean_square,
            epsilon = 0.05 * mean_square
        );
    }

    #[test]
    fn white_noise_spectrum_is_flat() {
        // Enough material for several hundred averaged frames; every bin
        // between 1 and 20 kHz must stay within +/-1.5 dB of the band mean.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frame_len = 4096;
        let n = frame_len + 2048 * 399;
        let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sig = SampledSignal::new(samples, 44100.0).unwrap();
        let psd = welch_psd(&sig, frame_len, 0.5).unwrap();
        assert!(
            psd.frames >= 100,
            "expected >=100 frames, got {}",
            psd.frames
        );

        let band: Vec<f64> = psd
            .freqs_hz
            .iter()
            .zip(&psd.power_db)
            .filter(|(f, _)| **f >= 1000.0 && **f <= 20000.0)
            .map(|(_, db)| *db)
            .collect();
        let mean = band.iter().sum::<f64>() / band.len() as f64;
        let worst = band
            .iter()
            .map(|db| (db - mean).abs())
            .fold(0.0f64, f64::max);
        assert!(
            worst <= 1.5,
            "flatness deviation {worst:.3} dB exceeds 1.5 dB"
        );
    }

    #[test]
    fn median_db_even_and_odd() {
        let mut psd = PowerSpectrum {
            freqs_hz: vec![0.0, 1.0, 2.0],
            power_db: vec![-30.0, -10.0, -20.0],
            fs: 6.0,
            frame_len: 4,
            frames: 1,
        };
        assert_eq!(psd.median_db(), -20.0);
        psd.freqs_hz.push(3.0);
        psd.power_db.push(-40.0);
        assert_eq!(psd.median_db(), -25.0);
    }

    #[test]
    fn db_at_interpolates_between_bins() {
        let psd = PowerSpectrum {
            freqs_hz: vec![0.0, 10.0, 20.0],
            power_db: vec![-10.0, -20.0, -40.0],
            fs: 40.0,
            frame_len: 4,
            frames: 1,
        };
        assert_abs_diff_eq!(psd.db_at(5.0).unwrap(), -15.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psd.db_at(15.0).unwrap(), -30.0, epsilon = 1e-12);
        assert!(psd.db_at(21.0).is_err());
        assert!(psd.db_at(-1.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        let sig = SampledSignal::new(vec![0.1; 100], 8000.0).unwrap();
        assert!(welch_psd(&sig, 3, 0.5).is_err());
        assert!(
            welch_psd(&sig, 48, 0.5).is_err(),
            "length not a power of two"
        );
        assert!(welch_psd(&sig, 64, 1.0).is_err());
        assert!(welch_psd(&sig, 64, -0.1).is_err());
        assert!(
            welch_psd(&sig, 128, 0.5).is_err(),
            "signal shorter than one frame"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        // Parseval-style check: integrating the PSD of an on-bin sine
        // recovers its mean-square value to within 5%, for any bin away
        // from DC/Nyquist and any amplitude/phase.
        #[test]
        fn integrated_density_tracks_sine_power(
            bin in 2usize..254,
            amp in 0.01f64..2.0,
            phase in 0.0f64..std::f64::consts::TAU,
        ) {
            let sig = sine_at_bin(bin, amp, phase, 512, 12, 16000.0);
            let psd = welch_psd(&sig, 512, 0.5).unwrap();
            let expected = amp * amp / 2.0;
            let got = psd.integrated_power();
            prop_assert!((got - expected).abs() <= 0.05 * expected,
                "bin {bin}: integrated {got} vs expected {expected}");
        }
    }
}
