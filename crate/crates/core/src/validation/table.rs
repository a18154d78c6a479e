//! The eight canonical vowel recipes used by the end-to-end recovery
//! harness: [ɑ e i o u y æ ø] with fixed, known first three formant
//! frequencies at a 104 Hz fundamental, serving as ground truth.

use crate::analysis::Formant;
use crate::validation::synth::VowelSpec;

/// A labeled vowel recipe. Labels are ASCII so they can double as file
/// stems ("ae" for [æ], "oe" for [ø]).
#[derive(Debug, Clone, PartialEq)]
pub struct VowelCase {
    pub label: String,
    pub spec: VowelSpec,
}

/// Fundamental shared by all canonical vowels, Hz.
pub const CANONICAL_F0_HZ: f64 = 104.0;

/// Formant bandwidths assigned to F1, F2, and F3 of every canonical
/// vowel, Hz. Chosen in the range typical of adult vowels: broad enough
/// that each resonance spreads over several source harmonics, narrow
/// enough that the analysis localizes it well inside the recovery
/// tolerance.
pub const CANONICAL_BANDWIDTHS_HZ: [f64; 3] = [90.0, 120.0, 150.0];

const CANONICAL_TABLE: [(&str, [f64; 3]); 8] = [
    ("a", [598.0, 1094.0, 1918.0]),
    ("e", [453.0, 1691.0, 2255.0]),
    ("i", [318.0, 1900.0, 2097.0]),
    ("o", [465.0, 815.0, 2233.0]),
    ("u", [410.0, 898.0, 1934.0]),
    ("y", [379.0, 1535.0, 2034.0]),
    ("ae", [562.0, 1452.0, 2375.0]),
    ("oe", [436.0, 1400.0, 2076.0]),
];

/// Builds the eight canonical vowel cases at the given sample rate and
/// duration. Formant frequencies are fixed; bandwidths come from
/// [`CANONICAL_BANDWIDTHS_HZ`].
pub fn canonical_vowels(fs: f64, duration_s: f64) -> Vec<VowelCase> {
    CANONICAL_TABLE
        .iter()
        .map(|(label, freqs)| VowelCase {
            label: (*label).to_string(),
            spec: VowelSpec {
                f0_hz: CANONICAL_F0_HZ,
                formants: freqs
                    .iter()
                    .zip(CANONICAL_BANDWIDTHS_HZ)
                    .map(|(&frequency_hz, bandwidth_hz)| Formant {
                        frequency_hz,
                        bandwidth_hz,
                    })
                    .collect(),
                rolloff_db_per_octave: 12.0,
                duration_s,
                fs,
                pulse_jitter: 0.0,
            },
        })
        .collect()
}
