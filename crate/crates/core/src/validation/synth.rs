//! Synthetic test-signal factory: source-filter vowels with known
//! formants and surrogate scanner noise with known comb structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{regress_rolloff, Formant};
use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Band over which the vowel source's spectral slope is calibrated, Hz.
/// Matches the band used by the tilt estimator so the two agree about
/// what "roll-off" means.
pub const SOURCE_CALIBRATION_BAND_HZ: (f64, f64) = (465.0, 5000.0);

/// RMS level every synthesized signal is normalized to. Mixing rescales
/// anyway; a common level just keeps WAV fixtures comparable by ear.
pub const SYNTH_RMS: f64 = 0.1;

/// Recipe for a synthetic vowel: a glottal-like pulse train at `f0_hz`,
/// shaped to `rolloff_db_per_octave`, then passed through one two-pole
/// resonator per formant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VowelSpec {
    /// Pulse-train fundamental, Hz.
    pub f0_hz: f64,
    /// Resonances in strictly ascending frequency order; every frequency
    /// must exceed `f0_hz` and stay below Nyquist.
    pub formants: Vec<Formant>,
    /// Source spectral slope over [`SOURCE_CALIBRATION_BAND_HZ`],
    /// dB/octave, downward-positive.
    #[serde(default = "default_rolloff")]
    pub rolloff_db_per_octave: f64,
    /// Signal duration, seconds.
    pub duration_s: f64,
    /// Sample rate, Hz.
    pub fs: f64,
    /// Random per-period perturbation of the pulse spacing, as a fraction
    /// of the period, at most 0.005. Zero (the default) makes the seed
    /// irrelevant.
    #[serde(default)]
    pub pulse_jitter: f64,
}

fn default_rolloff() -> f64 {
    12.0
}

impl VowelSpec {
    /// Checks the structural constraints on the recipe.
    pub fn validate(&self) -> Result<()> {
        if !(self.f0_hz > 0.0) || !self.f0_hz.is_finite() {
            return Err(Error::parameter("f0_hz", "must be positive and finite"));
        }
        if !(self.fs > 0.0) || !self.fs.is_finite() {
            return Err(Error::parameter("fs", "must be positive and finite"));
        }
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return Err(Error::parameter(
                "duration_s",
                "must be positive and finite",
            ));
        }
        if !(self.rolloff_db_per_octave >= 0.0) || !self.rolloff_db_per_octave.is_finite() {
            return Err(Error::parameter(
                "rolloff_db_per_octave",
                "must be finite and >= 0",
            ));
        }
        if !(0.0..=0.005).contains(&self.pulse_jitter) {
            return Err(Error::parameter(
                "pulse_jitter",
                format!("must lie in [0, 0.005], got {}", self.pulse_jitter),
            ));
        }
        let mut prev = self.f0_hz;
        for (i, f) in self.formants.iter().enumerate() {
            if !(f.frequency_hz > prev) {
                return Err(Error::parameter(
                    "formants",
                    format!(
                        "frequencies must be strictly ascending and above f0; \
                         formant {i} at {} Hz follows {prev} Hz",
                        f.frequency_hz
                    ),
                ));
            }
            if f.frequency_hz >= self.fs / 2.0 {
                return Err(Error::parameter(
                    "formants",
                    format!(
                        "formant {i} at {} Hz is at or above Nyquist ({} Hz)",
                        f.frequency_hz,
                        self.fs / 2.0
                    ),
                ));
            }
            if !(f.bandwidth_hz > 0.0) || !f.bandwidth_hz.is_finite() {
                return Err(Error::parameter(
                    "formants",
                    format!("formant {i} bandwidth must be positive and finite"),
                ));
            }
            prev = f.frequency_hz;
        }
        Ok(())
    }
}

/// Recipe for surrogate scanner noise: one harmonic comb per fundamental
/// (sinusoids at `m*d` with `1/m` amplitude taper and seeded phases)
/// over a white floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Comb fundamental spacings, Hz. Empty means white noise only.
    pub fundamentals: Vec<f64>,
    /// Harmonics synthesized per comb; multiples at or above Nyquist are
    /// silently omitted.
    #[serde(default = "default_harmonics_per_comb")]
    pub harmonics_per_comb: usize,
    /// Level of each comb's first harmonic, dB (relative units; the
    /// whole signal is RMS-normalized afterwards).
    #[serde(default)]
    pub comb_level_db: f64,
    /// White-floor RMS relative to the summed combs' RMS, dB.
    #[serde(default = "default_broadband_floor_db")]
    pub broadband_floor_db: f64,
    /// Signal duration, seconds.
    pub duration_s: f64,
    /// Sample rate, Hz.
    pub fs: f64,
}

fn default_harmonics_per_comb() -> usize {
    20
}

fn default_broadband_floor_db() -> f64 {
    -30.0
}

impl NoiseSpec {
    /// Checks the structural constraints on the recipe.
    pub fn validate(&self) -> Result<()> {
        if !(self.fs > 0.0) || !self.fs.is_finite() {
            return Err(Error::parameter("fs", "must be positive and finite"));
        }
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return Err(Error::parameter(
                "duration_s",
                "must be positive and finite",
            ));
        }
        if self.harmonics_per_comb == 0 {
            return Err(Error::parameter("harmonics_per_comb", "must be at least 1"));
        }
        if !self.comb_level_db.is_finite() || !self.broadband_floor_db.is_finite() {
            return Err(Error::parameter(
                "comb_level_db",
                "levels must be finite dB values",
            ));
        }
        for (i, &d) in self.fundamentals.iter().enumerate() {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::parameter(
                    "fundamentals",
                    format!("fundamental {i} must be positive and finite, got {d}"),
                ));
            }
        }
        Ok(())
    }

    /// Fundamentals that sit within `tol_hz` of an integer multiple of
    /// `f0_hz`. Such spacings collide with the speech harmonics the
    /// pipeline protects, so pairing them with a vowel at `f0_hz` makes
    /// the noise unremovable by design.
    pub fn fundamentals_near_multiples_of(&self, f0_hz: f64, tol_hz: f64) -> Vec<f64> {
        self.fundamentals
            .iter()
            .copied()
            .filter(|&d| {
                let m = (d / f0_hz).round();
                m >= 1.0 && (d - m * f0_hz).abs() < tol_hz
            })
            .collect()
    }
}

fn sample_count(duration_s: f64, fs: f64) -> usize {
    (duration_s * fs).round() as usize
}

/// One-pole smoother `y[n] = (1-rho) x[n] + rho y[n-1]` applied in place.
pub(crate) fn one_pole_lowpass(x: &mut [f64], rho: f64) {
    let mut state = 0.0;
    for v in x.iter_mut() {
        state = (1.0 - rho) * *v + rho * state;
        *v = state;
    }
}

/// Magnitude response, in dB, of the source-shaping chain at `f_hz`: a
/// DC blocker followed by `sections` one-pole smoothers with pole `rho`.
fn source_shaping_db(f_hz: f64, fs: f64, rho: f64, sections: u32, dc_pole: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * f_hz / fs;
    let (cos_w, sin_w) = (w.cos(), w.sin());
    // |1 - p e^{-jw}|^2 for a real pole p.
    let denom_sq = |p: f64| (1.0 - p * cos_w).powi(2) + (p * sin_w).powi(2);
    let blocker_sq = denom_sq(1.0) / denom_sq(dc_pole);
    let pole_sq = (1.0 - rho) * (1.0 - rho) / denom_sq(rho);
    10.0 * (blocker_sq * pole_sq.powi(sections as i32)).log10()
}

/// Slope actually produced by the shaping chain, measured the same way
/// the tilt estimator measures it: least squares of dB against log2(f)
/// over a 200-point log-spaced grid spanning the calibration band.
fn measured_rolloff(fs: f64, rho: f64, sections: u32, dc_pole: f64) -> f64 {
    let (band_lo, band_hi_nominal) = SOURCE_CALIBRATION_BAND_HZ;
    let band_hi = band_hi_nominal.min(0.45 * fs);
    let n = 200;
    let ratio = band_hi / band_lo;
    let mut freqs = Vec::with_capacity(n);
    let mut levels = Vec::with_capacity(n);
    for i in 0..n {
        let f = band_lo * ratio.powf(i as f64 / (n - 1) as f64);
        freqs.push(f);
        levels.push(source_shaping_db(f, fs, rho, sections, dc_pole));
    }
    regress_rolloff(&freqs, &levels).0
}

/// Pole of the smoothing cascade that makes the measured in-band slope
/// equal the requested roll-off, found by bisection. The slope is
/// monotone in the pole (a higher pole pulls the corner below the band,
/// steepening it), so bisection converges unconditionally.
fn calibrate_source_pole(fs: f64, rolloff: f64, sections: u32, dc_pole: f64) -> Result<f64> {
    let (band_lo, band_hi_nominal) = SOURCE_CALIBRATION_BAND_HZ;
    if 0.45 * fs <= 1.5 * band_lo {
        return Err(Error::parameter(
            "fs",
            format!(
                "sample rate {fs} Hz leaves no room for the {band_lo}-{band_hi_nominal} Hz \
                 source calibration band"
            ),
        ));
    }
    let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
    if measured_rolloff(fs, lo, sections, dc_pole) >= rolloff {
        return Ok(lo);
    }
    if measured_rolloff(fs, hi, sections, dc_pole) <= rolloff {
        return Err(Error::parameter(
            "rolloff_db_per_octave",
            format!("slope {rolloff} dB/octave is too steep for {sections} smoothing sections"),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if measured_rolloff(fs, mid, sections, dc_pole) < rolloff {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Synthesizes a vowel from its recipe.
///
/// A unit pulse train at `f0_hz` passes through a DC blocker, then a
/// cascade of one-pole smoothers whose pole is calibrated by bisection
/// so the in-band spectral slope equals `rolloff_db_per_octave`, then
/// one two-pole resonator per formant (`radius = exp(-pi*bw/fs)`). The
/// output is RMS-normalized to [`SYNTH_RMS`].
///
/// Deterministic given `(spec, seed)`; with `pulse_jitter = 0` the seed
/// has no effect at all.
pub fn synth_vowel(spec: &VowelSpec, seed: u64) -> Result<SampledSignal> {
    spec.validate()?;
    let fs = spec.fs;
    let n = sample_count(spec.duration_s, fs);
    if n < 2 {
        return Err(Error::parameter(
            "duration_s",
            "too short to hold even two samples",
        ));
    }

    // Pulse train, one unit impulse per fundamental period.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = fs / spec.f0_hz;
    let mut x = vec![0.0f64; n];
    let mut t = 0.0f64;
    while (t.round() as usize) < n {
        x[t.round() as usize] += 1.0;
        let jitter = if spec.pulse_jitter > 0.0 {
            rng.gen_range(-spec.pulse_jitter..spec.pulse_jitter)
        } else {
            0.0
        };
        t += period * (1.0 + jitter);
    }

    // DC blocker: the smoothing cascade below has enormous gain at DC,
    // and a pulse train is all positive; this keeps the signal centered.
    let dc_pole = 0.999;
    let mut prev_in = 0.0;
    let mut prev_out = 0.0;
    for v in x.iter_mut() {
        let cur = *v;
        prev_out = cur - prev_in + dc_pole * prev_out;
        prev_in = cur;
        *v = prev_out;
    }

    // Source roll-off. One extra section beyond the asymptotic need
    // keeps the calibration target strictly inside the reachable range.
    let sections = (spec.rolloff_db_per_octave / 6.0).ceil() as u32 + 1;
    let rho = calibrate_source_pole(fs, spec.rolloff_db_per_octave, sections, dc_pole)?;
    for _ in 0..sections {
        one_pole_lowpass(&mut x, rho);
    }

    // Formant resonators.
    for f in &spec.formants {
        let r = (-std::f64::consts::PI * f.bandwidth_hz / fs).exp();
        let theta = 2.0 * std::f64::consts::PI * f.frequency_hz / fs;
        let (a1, a2) = (2.0 * r * theta.cos(), -r * r);
        let (mut y1, mut y2) = (0.0f64, 0.0f64);
        for v in x.iter_mut() {
            let y = *v + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            *v = y;
        }
    }

    normalize_rms(&mut x)?;
    SampledSignal::new(x, fs)
}

/// Synthesizes surrogate scanner noise from its recipe.
///
/// Each fundamental `d` contributes sinusoids at `m*d` for
/// `m = 1..=harmonics_per_comb` with `1/m` amplitude taper and phases
/// drawn from the seeded generator; a white floor at
/// `broadband_floor_db` relative to the combs' RMS is added, and the
/// total is RMS-normalized to [`SYNTH_RMS`].
pub fn synth_mri_noise(spec: &NoiseSpec, seed: u64) -> Result<SampledSignal> {
    spec.validate()?;
    let fs = spec.fs;
    let n = sample_count(spec.duration_s, fs);
    if n < 2 {
        return Err(Error::parameter(
            "duration_s",
            "too short to hold even two samples",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut combs = vec![0.0f64; n];
    let base_amp = 10.0f64.powf(spec.comb_level_db / 20.0);
    for &d in &spec.fundamentals {
        for m in 1..=spec.harmonics_per_comb {
            // Drawing the phase before the Nyquist check keeps the
            // random stream layout independent of the sample rate.
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let f = d * m as f64;
            if f >= fs / 2.0 {
                continue;
            }
            let amp = base_amp / m as f64;
            let w = std::f64::consts::TAU * f / fs;
            for (i, v) in combs.iter_mut().enumerate() {
                *v += amp * (w * i as f64 + phase).sin();
            }
        }
    }

    let comb_rms = rms(&combs);
    let mut white: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let white_rms = rms(&white);
    // With combs present the floor level is relative to them; a pure
    // white spec just gets normalized below.
    let white_target = if comb_rms > 0.0 {
        comb_rms * 10.0f64.powf(spec.broadband_floor_db / 20.0)
    } else {
        SYNTH_RMS
    };
    if white_rms > 0.0 {
        let g = white_target / white_rms;
        for v in &mut white {
            *v *= g;
        }
    }

    let mut total: Vec<f64> = combs.iter().zip(&white).map(|(c, w)| c + w).collect();
    normalize_rms(&mut total)?;
    SampledSignal::new(total, fs)
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn normalize_rms(x: &mut [f64]) -> Result<()> {
    let r = rms(x);
    if !(r > 0.0) {
        return Err(Error::DegenerateInput(
            "synthesized signal has zero energy".into(),
        ));
    }
    let g = SYNTH_RMS / r;
    for v in x.iter_mut() {
        *v *= g;
    }
    Ok(())
}

/// A speech/noise mixture at an exact signal-to-noise ratio.
#[derive(Debug, Clone)]
pub struct Mixture {
    /// `speech + scaled_noise`.
    pub mixed: SampledSignal,
    /// The noise after scaling, exactly as added into `mixed`.
    pub scaled_noise: SampledSignal,
}

/// Scales `noise` so that `10 log10(|speech|^2 / |scaled|^2) == snr_db`
/// and returns both the mixture and the scaled noise.
pub fn mix_at_snr(speech: &SampledSignal, noise: &SampledSignal, snr_db: f64) -> Result<Mixture> {
    speech.check_compatible(noise, "mix_at_snr inputs")?;
    if !snr_db.is_finite() {
        return Err(Error::parameter("snr_db", "must be finite"));
    }
    let speech_energy = speech.energy();
    if speech_energy <= 0.0 {
        return Err(Error::DegenerateInput(
            "speech has zero energy; SNR undefined".into(),
        ));
    }
    let noise_energy = noise.energy();
    if noise_energy <= 0.0 {
        return Err(Error::DegenerateInput(
            "noise has zero energy; SNR undefined".into(),
        ));
    }
    let scale = (speech_energy / (noise_energy * 10.0f64.powf(snr_db / 10.0))).sqrt();
    let scaled: Vec<f64> = noise.samples.iter().map(|v| v * scale).collect();
    let mixed: Vec<f64> = speech
        .samples
        .iter()
        .zip(&scaled)
        .map(|(s, n)| s + n)
        .collect();
    Ok(Mixture {
        mixed: SampledSignal::new(mixed, speech.fs)?,
        scaled_noise: SampledSignal::new(scaled, speech.fs)?,
    })
}
