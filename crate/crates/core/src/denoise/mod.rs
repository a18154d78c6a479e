//! Six-stage denoising pipeline: crosstalk removal, measurement-response
//! compensation, noise-peak detection, harmonic-structure completion,
//! comb-notch filtering, and magnitude-domain spectral subtraction.

mod comb;
mod compensate;
mod harmonics;
mod peaks;
mod pipeline;
mod subtract;

pub use comb::{apply_filter, design_comb_notch, CombNotchFilter};
pub use compensate::compensate_response;
pub use harmonics::find_harmonics;
pub use peaks::detect_noise_peaks;
pub use pipeline::{denoise, DenoiseOutput, DenoiseReport, LinearChain, StageRms};
pub use subtract::spectral_subtract;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::spectrum::SpectralPeak;

/// Tuning parameters for the denoising pipeline. All fields have working
/// defaults; construct with `PipelineConfig::default()` and override as
/// needed, then call [`PipelineConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Reference fundamental of the speech being protected, Hz.
    pub f0_ref: f64,
    /// Guard multiplier: candidate comb spacings below
    /// `harmonic_guard * f0_ref` are rejected so speech harmonics are
    /// never treated as noise structure.
    pub harmonic_guard: f64,
    /// Candidate spacings within this many Hz of an integer multiple of
    /// `f0_ref` are also rejected: a comb at `m * f0_ref` would place
    /// every notch on a protected speech harmonic. Set to 0 to disable.
    pub f0_multiple_tol_hz: f64,
    /// Comb-notch -3 dB bandwidth, normalized to Nyquist.
    pub notch_bw: f64,
    /// Peak prominence over the median spectrum level required for
    /// detection, dB.
    pub peak_threshold_db: f64,
    /// Tolerance for matching a peak to an integer multiple of a
    /// candidate spacing, Hz. Default is two PSD bins at the default
    /// frame length and 44.1 kHz; parabolic refinement localizes peaks
    /// well inside that.
    pub peak_match_tol_hz: f64,
    /// Cap on the number of comb filters designed per run.
    pub max_combs: usize,
    /// Welch PSD frame length, samples (power of two).
    pub psd_frame_len: usize,
    /// Welch PSD frame overlap fraction in [0, 1).
    pub psd_overlap: f64,
    /// Duration of the leading segment used as the silent sample for
    /// spectral subtraction, seconds.
    pub silent_head_s: f64,
    /// The silent head must sit at least this many dB below the
    /// whole-file RMS or subtraction is skipped with a warning.
    pub silent_gate_db: f64,
    /// Spectral floor: subtracted magnitudes never drop below this
    /// fraction of the original magnitude.
    pub subtraction_floor: f64,
    /// Over-subtraction factor applied to the averaged silent-sample
    /// magnitude before subtracting.
    pub over_subtraction: f64,
    /// Compensation never boosts any bin by more than this many dB
    /// (regularization against deep response notches).
    pub reg_floor_db: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            f0_ref: 104.0,
            harmonic_guard: 1.5,
            f0_multiple_tol_hz: 5.0,
            notch_bw: 6e-3,
            peak_threshold_db: 10.0,
            peak_match_tol_hz: 2.0 * 44100.0 / 4096.0,
            max_combs: 8,
            psd_frame_len: 4096,
            psd_overlap: 0.5,
            silent_head_s: 0.5,
            silent_gate_db: 15.0,
            subtraction_floor: 0.01,
            over_subtraction: 2.0,
            reg_floor_db: -40.0,
        }
    }
}

impl PipelineConfig {
    /// Checks the structural constraints on the configuration.
    pub fn validate(&self) -> Result<()> {
        if !(self.f0_ref > 0.0) {
            return Err(Error::parameter("f0_ref", "must be positive"));
        }
        if !(self.harmonic_guard > 1.0) {
            return Err(Error::parameter(
                "harmonic_guard",
                format!("must exceed 1, got {}", self.harmonic_guard),
            ));
        }
        if !(self.f0_multiple_tol_hz >= 0.0) || !self.f0_multiple_tol_hz.is_finite() {
            return Err(Error::parameter(
                "f0_multiple_tol_hz",
                "must be finite and >= 0",
            ));
        }
        if !(self.notch_bw > 0.0 && self.notch_bw < 0.1) {
            return Err(Error::parameter(
                "notch_bw",
                format!("must lie in (0, 0.1), got {}", self.notch_bw),
            ));
        }
        if !(self.peak_match_tol_hz > 0.0) {
            return Err(Error::parameter("peak_match_tol_hz", "must be positive"));
        }
        if self.max_combs == 0 {
            return Err(Error::parameter("max_combs", "must be at least 1"));
        }
        if self.psd_frame_len < 4 || !self.psd_frame_len.is_power_of_two() {
            return Err(Error::parameter(
                "psd_frame_len",
                format!("must be a power of two >= 4, got {}", self.psd_frame_len),
            ));
        }
        if !(0.0..1.0).contains(&self.psd_overlap) {
            return Err(Error::parameter("psd_overlap", "must lie in [0, 1)"));
        }
        if !(self.silent_head_s > 0.0) {
            return Err(Error::parameter("silent_head_s", "must be positive"));
        }
        if !(self.subtraction_floor > 0.0 && self.subtraction_floor < 1.0) {
            return Err(Error::parameter("subtraction_floor", "must lie in (0, 1)"));
        }
        if !(self.over_subtraction > 0.0) {
            return Err(Error::parameter("over_subtraction", "must be positive"));
        }
        Ok(())
    }

    /// Smallest comb spacing the guard admits, Hz.
    pub fn guard_hz(&self) -> f64 {
        self.harmonic_guard * self.f0_ref
    }
}

/// Measured magnitude response of the recording system, sampled on an
/// ascending frequency grid. Compensation divides this response out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    pub freqs_hz: Vec<f64>,
    pub gain_db: Vec<f64>,
}

impl ResponseCurve {
    /// Validates and builds a curve. The grid must be strictly ascending,
    /// all values finite, and span at least [50 Hz, 10 kHz].
    pub fn new(freqs_hz: Vec<f64>, gain_db: Vec<f64>) -> Result<Self> {
        if freqs_hz.is_empty() {
            return Err(Error::Config("response curve is empty".into()));
        }
        if freqs_hz.len() != gain_db.len() {
            return Err(Error::Config(format!(
                "response curve column lengths differ: {} vs {}",
                freqs_hz.len(),
                gain_db.len()
            )));
        }
        if freqs_hz.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config(
                "response curve frequencies must be strictly ascending".into(),
            ));
        }
        if freqs_hz.iter().any(|f| !f.is_finite()) || gain_db.iter().any(|g| !g.is_finite()) {
            return Err(Error::Config(
                "response curve contains non-finite values".into(),
            ));
        }
        if freqs_hz[0] > 50.0 || *freqs_hz.last().unwrap() < 10_000.0 {
            return Err(Error::Config(format!(
                "response curve must cover at least [50 Hz, 10 kHz]; got [{}, {}]",
                freqs_hz[0],
                freqs_hz.last().unwrap()
            )));
        }
        Ok(ResponseCurve { freqs_hz, gain_db })
    }

    /// A constant-gain curve spanning the audio band.
    pub fn flat(gain_db: f64) -> Self {
        ResponseCurve {
            freqs_hz: vec![0.0, 24_000.0],
            gain_db: vec![gain_db, gain_db],
        }
    }

    /// Gain in dB at an arbitrary frequency: linear interpolation on the
    /// grid, flat extrapolation beyond its ends.
    pub fn gain_at(&self, f_hz: f64) -> f64 {
        let fs = &self.freqs_hz;
        if f_hz <= fs[0] {
            return self.gain_db[0];
        }
        if f_hz >= fs[fs.len() - 1] {
            return self.gain_db[fs.len() - 1];
        }
        // partition_point: first index with grid value > f_hz.
        let hi = fs.partition_point(|&g| g <= f_hz);
        let lo = hi - 1;
        let frac = (f_hz - fs[lo]) / (fs[hi] - fs[lo]);
        self.gain_db[lo] * (1.0 - frac) + self.gain_db[hi] * frac
    }
}

/// The harmonic noise structure found by the detection stages: comb
/// spacings in Hz plus the spectral peaks each comb accounted for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Accepted comb fundamental spacings, in acceptance order.
    pub fundamentals: Vec<f64>,
    /// Peaks claimed by each fundamental (parallel to `fundamentals`).
    pub peaks_removed: Vec<Vec<SpectralPeak>>,
}

impl NoiseModel {
    pub fn empty() -> Self {
        NoiseModel {
            fundamentals: Vec::new(),
            peaks_removed: Vec::new(),
        }
    }
}

/// Least-squares crosstalk coefficient: the scalar k minimizing
/// `||noise - k*speech||^2`, i.e. `<noise,speech> / <speech,speech>`.
/// The caller forms the cleaned reference `n' = noise - k*speech`.
pub fn crosstalk_coefficient(noise: &SampledSignal, speech: &SampledSignal) -> Result<f64> {
    noise.check_compatible(speech, "crosstalk_coefficient")?;
    let speech_energy = speech.energy();
    if speech_energy <= 0.0 {
        return Err(Error::DegenerateInput(
            "speech channel has zero energy; crosstalk coefficient undefined".into(),
        ));
    }
    let cross: f64 = noise
        .samples
        .iter()
        .zip(&speech.samples)
        .map(|(n, s)| n * s)
        .sum();
    Ok(cross / speech_energy)
}
