//! Synthetic test-signal factory and end-to-end recovery harness.
//!
//! [`synth_vowel`] builds source-filter vowels whose formants are known
//! by construction; [`synth_mri_noise`] builds surrogate scanner noise
//! with planted harmonic combs; [`mix_at_snr`] combines them at an exact
//! SNR; and [`run_validation`] drives the whole denoise-and-measure
//! protocol over a vowel table ([`canonical_vowels`]) and scores the
//! recovery.

mod harness;
mod synth;
mod table;

pub use harness::{
    measure_formants, run_validation, FormantAnalysis, HarnessOptions, ValidationReport,
    ValidationRun, ValidationThresholds, VowelFixtures, VowelOutcome,
};
pub use synth::{
    mix_at_snr, synth_mri_noise, synth_vowel, Mixture, NoiseSpec, VowelSpec,
    SOURCE_CALIBRATION_BAND_HZ, SYNTH_RMS,
};
pub use table::{canonical_vowels, VowelCase, CANONICAL_BANDWIDTHS_HZ, CANONICAL_F0_HZ};
