//! Spectral envelope modeling and derived acoustic measurements.
//!
//! The analysis chain fits an autoregressive (all-pole) envelope to a
//! speech signal and reads acoustic quantities off that model:
//!
//! 1. [`decimate`] lowers the sample rate so the model order is spent on
//!    the frequency band that actually contains vowel resonances.
//! 2. [`burg_ar`] fits the all-pole envelope by Burg's lattice method.
//! 3. [`extract_formants`] locates resonance poles and converts them to
//!    formant frequencies and bandwidths.
//! 4. [`spectral_tilt`] regresses the envelope level against log-frequency
//!    to measure the overall roll-off in dB per octave.
//! 5. [`snr_improvement`] scores a denoising run against a known clean
//!    reference, crediting only genuine noise removal.
//!
//! All functions are pure and safe to call concurrently.

mod burg;
mod decimate;
mod formants;
mod linefit;
mod snr;
mod tilt;

pub use burg::{burg_ar, SpectralEnvelope};
pub use decimate::decimate;
pub use formants::{
    extract_formants, Formant, FormantSet, DEFAULT_FORMANT_COUNT, DEFAULT_MAX_BANDWIDTH_HZ,
    DEFAULT_MIN_FORMANT_HZ,
};
pub(crate) use linefit::{pick_comb_lines, refine_formants};
pub use snr::{snr_improvement, SnrReport, SNR_CAP_DB};
pub(crate) use tilt::regress_rolloff;
pub use tilt::{spectral_tilt, TiltEstimate, DEFAULT_TILT_F_HI_HZ, DEFAULT_TILT_F_LO_HZ};
