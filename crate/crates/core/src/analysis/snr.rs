//! SNR accounting for denoising runs against a known clean reference.

use serde::{Deserialize, Serialize};

use crate::denoise::LinearChain;
use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Sentinel cap applied when a residual is zero (or numerically so),
/// standing in for an infinite SNR gain.
pub const SNR_CAP_DB: f64 = 120.0;

/// Input and output signal-to-noise ratios of a processing run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SnrReport {
    pub snr_in_db: f64,
    pub snr_out_db: f64,
    pub gain_db: f64,
    /// True when the gain hit the sentinel cap instead of being measured.
    pub capped: bool,
}

/// Scores a denoising run.
///
/// Input SNR compares the contamination against the clean signal:
/// `10 log10(||clean||^2 / ||contaminated - clean||^2)`.
///
/// Output SNR compares the processed signal against the same clean signal
/// passed through the run's linear chain (`reference = chain(clean)`):
/// `10 log10(||reference||^2 / ||processed - reference||^2)`. Referencing
/// the chained clean signal charges the run only for noise it failed to
/// remove, not for its deliberate linear shaping of the speech.
///
/// The gain is `snr_out - snr_in`, capped at [`SNR_CAP_DB`] with the
/// `capped` flag set when the residual is zero or vanishingly small.
pub fn snr_improvement(
    clean: &SampledSignal,
    contaminated: &SampledSignal,
    processed: &SampledSignal,
    chain: &LinearChain,
) -> Result<SnrReport> {
    clean.check_compatible(contaminated, "snr signals")?;
    clean.check_compatible(processed, "snr signals")?;
    let clean_energy = clean.energy();
    if clean_energy <= 0.0 {
        return Err(Error::DegenerateInput(
            "clean reference has zero energy; SNR undefined".into(),
        ));
    }

    let noise_energy = difference_energy(contaminated, clean);
    let (snr_in_db, mut capped) = match ratio_db(clean_energy, noise_energy) {
        Some(db) => (db.min(SNR_CAP_DB), false),
        None => (SNR_CAP_DB, true),
    };
    if snr_in_db == SNR_CAP_DB {
        capped = true;
    }

    let reference = chain.apply(clean)?;
    let reference_energy = reference.energy();
    if reference_energy <= 0.0 {
        return Err(Error::DegenerateInput(
            "linear chain annihilated the clean reference; SNR undefined".into(),
        ));
    }
    let residual_energy = difference_energy(processed, &reference);
    let (snr_out_db, gain_db) = match ratio_db(reference_energy, residual_energy) {
        Some(db) if db - snr_in_db <= SNR_CAP_DB => (db, db - snr_in_db),
        _ => {
            capped = true;
            (snr_in_db + SNR_CAP_DB, SNR_CAP_DB)
        }
    };

    Ok(SnrReport {
        snr_in_db,
        snr_out_db,
        gain_db,
        capped,
    })
}

fn difference_energy(a: &SampledSignal, b: &SampledSignal) -> f64 {
    a.samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn ratio_db(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 {
        None
    } else {
        Some(10.0 * (num / den).log10())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::{design_comb_notch, ResponseCurve};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity_chain() -> LinearChain {
        LinearChain {
            curve: ResponseCurve::flat(0.0),
            reg_floor_db: -40.0,
            combs: Vec::new(),
        }
    }

    fn noisy_pair(seed: u64) -> (SampledSignal, SampledSignal) {
        let fs = 44100.0;
        let n = 8192;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let clean: Vec<f64> = (0..n)
            .map(|t| 0.3 * (2.0 * std::f64::consts::PI * 220.0 * t as f64 / fs).sin())
            .collect();
        let contaminated: Vec<f64> = clean
            .iter()
            .map(|&s| s + rng.gen_range(-0.05..0.05))
            .collect();
        (
            SampledSignal::new(clean, fs).unwrap(),
            SampledSignal::new(contaminated, fs).unwrap(),
        )
    }

    #[test]
    fn unprocessed_signal_scores_zero_gain() {
        let (clean, contaminated) = noisy_pair(3);
        let report =
            snr_improvement(&clean, &contaminated, &contaminated, &identity_chain()).unwrap();
        assert!(
            report.gain_db.abs() < 1e-6,
            "gain {} should be ~0",
            report.gain_db
        );
        assert!(!report.capped);
        assert!(report.snr_in_db > 0.0);
    }

    #[test]
    fn perfect_restoration_hits_the_cap() {
        let (clean, contaminated) = noisy_pair(4);
        let report = snr_improvement(&clean, &contaminated, &clean, &identity_chain()).unwrap();
        assert!(report.capped);
        assert_eq!(report.gain_db, SNR_CAP_DB);
        assert_eq!(report.snr_out_db, report.snr_in_db + SNR_CAP_DB);
    }

    #[test]
    fn comb_chain_gets_credit_only_for_removed_noise() {
        // Noise is a tone sitting exactly on a comb notch; applying the
        // chain to the contaminated signal removes nearly all of it, and
        // the chained-clean reference keeps the speech shaping out of the
        // residual, so the gain is large.
        let fs = 44100.0;
        let n = 65536;
        let comb = design_comb_notch(fs, 2205.0, 6e-3).unwrap();
        let clean: Vec<f64> = (0..n)
            .map(|t| {
                let x = t as f64 / fs;
                0.2 * (2.0 * std::f64::consts::PI * 180.0 * x).sin()
                    + 0.1 * (2.0 * std::f64::consts::PI * 847.0 * x).sin()
            })
            .collect();
        let tone: Vec<f64> = (0..n)
            .map(|t| 0.2 * (2.0 * std::f64::consts::PI * 2205.0 * t as f64 / fs).sin())
            .collect();
        let contaminated: Vec<f64> = clean.iter().zip(&tone).map(|(c, v)| c + v).collect();

        let clean = SampledSignal::new(clean, fs).unwrap();
        let contaminated = SampledSignal::new(contaminated, fs).unwrap();
        let chain = LinearChain {
            curve: ResponseCurve::flat(0.0),
            reg_floor_db: -40.0,
            combs: vec![comb],
        };
        let processed = chain.apply(&contaminated).unwrap();

        let report = snr_improvement(&clean, &contaminated, &processed, &chain).unwrap();
        assert!(
            report.gain_db > 25.0,
            "expected large gain, got {:.1} dB",
            report.gain_db
        );
        assert!(report.snr_in_db < 1.0, "snr_in {:.1}", report.snr_in_db);
    }

    #[test]
    fn zero_clean_reference_is_degenerate() {
        let zeros = SampledSignal::zeros(8192, 44100.0).unwrap();
        let (_, contaminated) = noisy_pair(5);
        let err =
            snr_improvement(&zeros, &contaminated, &contaminated, &identity_chain()).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput(_)), "got {err:?}");
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let (clean, contaminated) = noisy_pair(6);
        let short = SampledSignal::new(clean.samples[..4096].to_vec(), clean.fs).unwrap();
        let err = snr_improvement(&clean, &contaminated, &short, &identity_chain()).unwrap_err();
        assert!(matches!(err, Error::Parameter { .. }), "got {err:?}");
    }
}
