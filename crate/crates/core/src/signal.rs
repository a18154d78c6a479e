//! Uniformly sampled real-valued signals and frequency unit conversions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled real-valued signal.
///
/// Amplitudes are dimensionless, nominally within [-1, 1] for audio that
/// round-trips through 16-bit WAV, but nothing in the processing chain
/// requires that range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    /// Sample values. Always finite; validated on construction.
    pub samples: Vec<f64>,
    /// Sampling rate in Hz. Always positive.
    pub fs: f64,
}

impl SampledSignal {
    /// Builds a signal, validating the container invariants: `fs > 0`,
    /// at least one sample, and every sample finite.
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        if !(fs > 0.0) || !fs.is_finite() {
            return Err(Error::parameter(
                "fs",
                format!("must be positive, got {fs}"),
            ));
        }
        if samples.is_empty() {
            return Err(Error::InsufficientData("signal has no samples".into()));
        }
        if let Some(idx) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::DegenerateInput(format!(
                "non-finite sample at index {idx}"
            )));
        }
        Ok(SampledSignal { samples, fs })
    }

    /// Convenience for building a silent signal of `n` samples.
    pub fn zeros(n: usize, fs: f64) -> Result<Self> {
        Self::new(vec![0.0; n], fs)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn rms(&self) -> f64 {
        (self.energy() / self.samples.len() as f64).sqrt()
    }

    /// RMS expressed in dB relative to full scale (1.0). Returns the dB
    /// floor used by the spectrum module for an all-zero signal.
    pub fn rms_db(&self) -> f64 {
        let r = self.rms();
        if r <= 0.0 {
            crate::spectrum::DB_FLOOR
        } else {
            20.0 * r.log10()
        }
    }

    /// Checks that `other` has the same rate and length, for binary ops.
    pub(crate) fn check_compatible(&self, other: &Self, what: &'static str) -> Result<()> {
        if (self.fs - other.fs).abs() > f64::EPSILON * self.fs.max(other.fs) {
            return Err(Error::parameter(
                what,
                format!("sampling rates differ: {} vs {} Hz", self.fs, other.fs),
            ));
        }
        if self.len() != other.len() {
            return Err(Error::parameter(
                what,
                format!("lengths differ: {} vs {} samples", self.len(), other.len()),
            ));
        }
        Ok(())
    }
}

/// Signed distance between two frequencies in semitones:
/// `12 * log2(f_test / f_ref)`.
///
/// Positive when `f_test` is above the reference. Antisymmetric under
/// argument swap. This is the unit used throughout for formant-recovery
/// error.
pub fn semitone_distance(f_test: f64, f_ref: f64) -> Result<f64> {
    for (name, f) in [("f_test", f_test), ("f_ref", f_ref)] {
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::parameter(
                // statically pick the right name for the message
                if name == "f_test" { "f_test" } else { "f_ref" },
                format!("frequency must be positive and finite, got {f}"),
            ));
        }
    }
    Ok(12.0 * (f_test / f_ref).log2())
}
