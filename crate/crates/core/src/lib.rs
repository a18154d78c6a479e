//! Post-processing toolkit for speech recorded inside an MRI scanner.
//!
//! The scanner's gradient coils emit intense noise whose spectrum is a set of
//! harmonic combs. This crate removes that noise from a two-channel recording
//! (one speech-and-noise channel, one noise reference channel) and measures
//! what is left of the speech:
//!
//! * [`denoise`] — the six-stage pipeline: crosstalk removal, frequency
//!   response compensation, noise peak detection, harmonic structure
//!   completion, comb-notch filtering, and spectral subtraction.
//! * [`analysis`] — Burg autoregressive envelopes, formant extraction from
//!   envelope poles, spectral tilt, and SNR-improvement accounting.
//! * [`validation`] — a synthetic test-signal factory (source-filter vowels,
//!   surrogate scanner noise) and an end-to-end recovery harness.
//! * [`stats`] — Welch's unequal-variance t-test and 1-D k-means clustering
//!   for comparing formant samples.
//! * [`signal`], [`spectrum`], [`wav`], [`csvio`] — shared containers,
//!   Welch PSD estimation, and file I/O.
//!
//! All randomness is drawn from seeded ChaCha streams: identical inputs,
//! configuration, and seed produce bit-identical outputs.

pub mod analysis;
pub mod csvio;
pub mod denoise;
mod error;
pub(crate) mod fft;
pub mod signal;
pub mod spectrum;
pub mod stats;
pub mod validation;
pub mod wav;

pub use error::{Error, Result};
pub use signal::SampledSignal;
pub use spectrum::{PowerSpectrum, SpectralPeak};
