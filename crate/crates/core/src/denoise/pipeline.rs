//! End-to-end denoising: wires the six stages together and logs what
//! happened at each one.

use serde::{Deserialize, Serialize};

use crate::denoise::{
    apply_filter, compensate_response, crosstalk_coefficient, design_comb_notch,
    detect_noise_peaks, find_harmonics, CombNotchFilter, NoiseModel, PipelineConfig, ResponseCurve,
};
use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::spectrum::{welch_psd, SpectralPeak};

/// RMS level of the working signal after one pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRms {
    pub stage: String,
    pub rms_db: f64,
}

/// Everything the pipeline observed and decided, for the report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    /// Least-squares crosstalk coefficient removed from the noise channel.
    pub crosstalk_k: f64,
    /// Peaks detected on the compensated noise reference, tallest first.
    pub detected_peaks: Vec<SpectralPeak>,
    /// Accepted comb fundamental spacings, Hz.
    pub fundamentals: Vec<f64>,
    /// Designed comb filters actually applied to the speech channel.
    pub combs: Vec<CombNotchFilter>,
    /// Signal level after each stage.
    pub stage_rms_db: Vec<StageRms>,
    /// Whether the final spectral-subtraction stage ran.
    pub subtraction_applied: bool,
    /// Non-fatal anomalies (skipped combs, gated-out subtraction, ...).
    pub warnings: Vec<String>,
}

/// The linear part of the processing chain: response compensation plus
/// the accepted comb filters, in application order. Re-applying it to a
/// reference signal reproduces the pipeline's linear shaping exactly,
/// which the SNR accounting relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearChain {
    pub curve: ResponseCurve,
    pub reg_floor_db: f64,
    pub combs: Vec<CombNotchFilter>,
}

impl LinearChain {
    pub fn apply(&self, signal: &SampledSignal) -> Result<SampledSignal> {
        let mut out = compensate_response(signal, &self.curve, self.reg_floor_db)?;
        for comb in &self.combs {
            out = apply_filter(&out, comb);
        }
        Ok(out)
    }
}

/// Result bundle of [`denoise`].
#[derive(Debug, Clone)]
pub struct DenoiseOutput {
    pub denoised: SampledSignal,
    pub model: NoiseModel,
    pub report: DenoiseReport,
    pub chain: LinearChain,
}

/// Runs the full pipeline.
///
/// 1. Removes speech crosstalk from the noise reference:
///    `n' = noise - k*speech`.
/// 2. Compensates the measurement response on both channels.
/// 3. Estimates the noise reference's power spectrum.
/// 4. Detects prominent peaks and completes their harmonic structure.
/// 5. Designs one comb notch per accepted fundamental and applies them
///    to the speech channel (skipping, with a warning, spacings whose
///    rounded design would detune high harmonics off the notches).
/// 6. Subtracts the averaged magnitude spectrum of the leading
///    `silent_head_s` seconds, provided that head is quiet enough.
pub fn denoise(
    speech: &SampledSignal,
    noise: &SampledSignal,
    curve: &ResponseCurve,
    cfg: &PipelineConfig,
) -> Result<DenoiseOutput> {
    cfg.validate()?;
    speech.check_compatible(noise, "denoise inputs")?;
    let fs = speech.fs;
    let min_len = (fs * (cfg.silent_head_s + 1.0)).ceil() as usize;
    if speech.len() < min_len {
        return Err(Error::InsufficientData(format!(
            "need at least {min_len} samples ({} s) for the silent head plus analysis, got {}",
            cfg.silent_head_s + 1.0,
            speech.len()
        )));
    }

    let mut warnings: Vec<String> = Vec::new();
    let mut stage_rms_db = vec![
        StageRms {
            stage: "speech_input".into(),
            rms_db: speech.rms_db(),
        },
        StageRms {
            stage: "noise_input".into(),
            rms_db: noise.rms_db(),
        },
    ];

    // Stage 1: crosstalk removal on the noise reference.
    let k = crosstalk_coefficient(noise, speech).map_err(Error::in_stage("crosstalk"))?;
    let n_prime = SampledSignal::new(
        noise
            .samples
            .iter()
            .zip(&speech.samples)
            .map(|(n, s)| n - k * s)
            .collect(),
        fs,
    )
    .map_err(Error::in_stage("crosstalk"))?;
    stage_rms_db.push(StageRms {
        stage: "crosstalk_removed_noise".into(),
        rms_db: n_prime.rms_db(),
    });

    // Stage 2: response compensation on both channels.
    let speech_c = compensate_response(speech, curve, cfg.reg_floor_db)
        .map_err(Error::in_stage("compensate"))?;
    let n_prime_c = compensate_response(&n_prime, curve, cfg.reg_floor_db)
        .map_err(Error::in_stage("compensate"))?;
    stage_rms_db.push(StageRms {
        stage: "compensated_speech".into(),
        rms_db: speech_c.rms_db(),
    });

    // Stage 3: noise power spectrum.
    let psd = welch_psd(&n_prime_c, cfg.psd_frame_len, cfg.psd_overlap)
        .map_err(Error::in_stage("noise_psd"))?;

    // Stage 4: peak detection and harmonic completion.
    let detected_peaks = detect_noise_peaks(&psd, cfg);
    let model = find_harmonics(&detected_peaks, cfg);

    // Stage 5: comb design and filtering of the speech channel.
    let mut combs: Vec<CombNotchFilter> = Vec::new();
    let mut filtered = speech_c;
    for &d in &model.fundamentals {
        let order = (fs / d).round();
        let detune_at_10th = 10.0 * (fs / order - d).abs();
        let half_width = cfg.notch_bw * fs / 4.0;
        if detune_at_10th > half_width {
            warnings.push(format!(
                "skipping comb at {d:.2} Hz: rounding fs/d to {order} drifts the 10th \
                 harmonic {detune_at_10th:.2} Hz off-notch (limit {half_width:.2} Hz)"
            ));
            continue;
        }
        match design_comb_notch(fs, d, cfg.notch_bw) {
            Ok(comb) => {
                filtered = apply_filter(&filtered, &comb);
                combs.push(comb);
            }
            Err(e) => warnings.push(format!("skipping comb at {d:.2} Hz: {e}")),
        }
    }
    stage_rms_db.push(StageRms {
        stage: "comb_filtered_speech".into(),
        rms_db: filtered.rms_db(),
    });

    // Stage 6: spectral subtraction using the leading silent segment.
    let head_len = (cfg.silent_head_s * fs).round() as usize;
    let mut subtraction_applied = false;
    let denoised = if head_len < cfg.psd_frame_len {
        warnings.push(format!(
            "silent head of {head_len} samples is shorter than one {}-sample frame; \
             spectral subtraction skipped",
            cfg.psd_frame_len
        ));
        filtered
    } else {
        let head = SampledSignal::new(filtered.samples[..head_len].to_vec(), fs)
            .map_err(Error::in_stage("subtract"))?;
        let head_db = head.rms_db();
        let whole_db = filtered.rms_db();
        if head_db <= whole_db - cfg.silent_gate_db {
            subtraction_applied = true;
            spectral_subtract_cfg(&filtered, &head, cfg).map_err(Error::in_stage("subtract"))?
        } else {
            warnings.push(format!(
                "silent head RMS {head_db:.1} dB is within {:.1} dB of the whole-file \
                 {whole_db:.1} dB; spectral subtraction skipped",
                cfg.silent_gate_db
            ));
            filtered
        }
    };
    stage_rms_db.push(StageRms {
        stage: "output".into(),
        rms_db: denoised.rms_db(),
    });

    let report = DenoiseReport {
        crosstalk_k: k,
        detected_peaks,
        fundamentals: model.fundamentals.clone(),
        combs: combs.clone(),
        stage_rms_db,
        subtraction_applied,
        warnings,
    };
    Ok(DenoiseOutput {
        denoised,
        model,
        report,
        chain: LinearChain {
            curve: curve.clone(),
            reg_floor_db: cfg.reg_floor_db,
            combs,
        },
    })
}

fn spectral_subtract_cfg(
    signal: &SampledSignal,
    silent: &SampledSignal,
    cfg: &PipelineConfig,
) -> Result<SampledSignal> {
    crate::denoise::spectral_subtract(
        signal,
        silent,
        cfg.psd_frame_len,
        cfg.psd_overlap,
        cfg.subtraction_floor,
        cfg.over_subtraction,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const FS: f64 = 44100.0;

    /// Harmonic series at multiples of f0, equal amplitudes, given RMS.
    fn harmonic_tone(f0: f64, harmonics: usize, rms: f64, n: usize, phase_seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(phase_seed);
        let phases: Vec<f64> = (0..harmonics)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        let raw: Vec<f64> = (0..n)
            .map(|i| {
                (1..=harmonics)
                    .map(|m| {
                        let ph = 2.0 * std::f64::consts::PI * f0 * m as f64 * i as f64 / FS
                            + phases[m - 1];
                        ph.sin() / m as f64
                    })
                    .sum()
            })
            .collect();
        let raw_rms = (raw.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        raw.iter().map(|v| v * rms / raw_rms).collect()
    }

    fn white(seed: u64, n: usize, rms: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let raw_rms = (raw.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        raw.iter().map(|v| v * rms / raw_rms).collect()
    }

    /// Speech-like test signal: half a second of near-silence, then a
    /// harmonic body at 104 Hz with the given number of harmonics.
    fn speech_with_head(n_body: usize, harmonics: usize, seed: u64) -> SampledSignal {
        let head_n = 22050;
        let mut samples = white(seed, head_n, 1e-5);
        samples.extend(harmonic_tone(104.0, harmonics, 0.1, n_body, seed + 1));
        SampledSignal::new(samples, FS).unwrap()
    }

    #[test]
    fn silent_noise_channel_passes_speech_through() {
        let speech = speech_with_head(44100, 8, 1);
        let noise = SampledSignal::zeros(speech.len(), FS).unwrap();
        let out = denoise(
            &speech,
            &noise,
            &ResponseCurve::flat(0.0),
            &PipelineConfig::default(),
        )
        .unwrap();

        assert_eq!(out.report.crosstalk_k, 0.0);
        assert!(out.model.fundamentals.is_empty());
        assert!(out.report.combs.is_empty());
        // Subtraction ran (the head is genuinely silent) but its mu is
        // negligible, so the body passes through nearly unchanged.
        assert!(out.report.subtraction_applied);
        let body = &speech.samples[22050..];
        let body_out = &out.denoised.samples[22050..];
        let num: f64 = body
            .iter()
            .zip(body_out)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let den: f64 = body.iter().map(|v| v * v).sum();
        let err_db = 10.0 * (num / den).log10();
        assert!(err_db < -40.0, "pass-through error {err_db:.1} dB");
    }

    #[test]
    fn planted_comb_is_found_and_removed() {
        // Eight speech harmonics leak into the noise reference through
        // the projection (see the k check below), but any comb their
        // differences suggest sits on a multiple of f0 and is rejected,
        // leaving the planted 530 Hz comb as the only structure.
        let n = 44100 * 2;
        let speech = speech_with_head(n - 22050, 8, 2);
        let noise_core = harmonic_tone(530.0, 8, 0.1, n, 77);
        let noise_floor = white(78, n, 0.002);
        let noise_only: Vec<f64> = noise_core
            .iter()
            .zip(&noise_floor)
            .map(|(a, b)| a + b)
            .collect();

        // Contaminated speech channel and a reference channel carrying
        // 5% speech crosstalk.
        let contaminated = SampledSignal::new(
            speech
                .samples
                .iter()
                .zip(&noise_only)
                .map(|(s, n)| s + n)
                .collect(),
            FS,
        )
        .unwrap();
        let reference = SampledSignal::new(
            noise_only
                .iter()
                .zip(&speech.samples)
                .map(|(n, s)| n + 0.05 * s)
                .collect(),
            FS,
        )
        .unwrap();

        let cfg = PipelineConfig::default();
        let out = denoise(&contaminated, &reference, &ResponseCurve::flat(0.0), &cfg).unwrap();

        assert!(
            out.model
                .fundamentals
                .iter()
                .any(|d| (d - 530.0).abs() <= cfg.peak_match_tol_hz),
            "planted 530 Hz comb not found: {:?}",
            out.model.fundamentals
        );

        // The speech channel carries the same noise waveform as the
        // reference, so the projection coefficient is dominated by that
        // shared component, not by the 5% crosstalk:
        // k ~ (|n|^2 + 0.05 |s|^2) / |s + n|^2.
        let noise_energy: f64 = noise_only.iter().map(|v| v * v).sum();
        let speech_energy = speech.energy();
        let k_expected = (noise_energy + 0.05 * speech_energy) / contaminated.energy();
        assert!(
            (out.report.crosstalk_k - k_expected).abs() < 0.02,
            "k = {}, expected ~{k_expected:.3}",
            out.report.crosstalk_k
        );

        // Residual noise versus what the linear chain would leave of the
        // clean speech alone.
        let shaped_clean = out.chain.apply(&speech).unwrap();
        let before: f64 = contaminated
            .samples
            .iter()
            .zip(&speech.samples)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let after: f64 = out
            .denoised
            .samples
            .iter()
            .zip(&shaped_clean.samples)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let reduction_db = 10.0 * (before / after).log10();
        assert!(
            reduction_db >= 8.0,
            "noise residual only reduced {reduction_db:.2} dB"
        );
    }

    #[test]
    fn comb_filtering_never_adds_energy_to_the_reference() {
        let n = 44100;
        let noise_only: Vec<f64> = harmonic_tone(530.0, 8, 0.1, n, 5)
            .iter()
            .zip(&white(6, n, 0.002))
            .map(|(a, b)| a + b)
            .collect();
        let reference = SampledSignal::new(noise_only, FS).unwrap();
        let cfg = PipelineConfig::default();

        let psd = welch_psd(&reference, cfg.psd_frame_len, cfg.psd_overlap).unwrap();
        let peaks = detect_noise_peaks(&psd, &cfg);
        let model = find_harmonics(&peaks, &cfg);
        assert!(!model.fundamentals.is_empty());

        let mut filtered = reference.clone();
        for &d in &model.fundamentals {
            let comb = design_comb_notch(FS, d, cfg.notch_bw).unwrap();
            filtered = apply_filter(&filtered, &comb);
        }
        assert!(
            filtered.energy() <= reference.energy(),
            "comb filtering increased reference energy"
        );
    }

    #[test]
    fn guard_blocks_combs_at_the_speech_fundamental() {
        // Noise whose comb spacing equals the speech f0: nothing may be
        // accepted, end to end. Twelve noise harmonics give the spacings
        // 208, 312, ... long consecutive support, so the empty result
        // depends on the multiple-of-f0 rejection, not on running out of
        // peaks.
        let n = 44100 * 2;
        let speech = speech_with_head(n - 22050, 8, 3);
        let noise_only = harmonic_tone(104.0, 12, 0.1, n, 9);
        let contaminated = SampledSignal::new(
            speech
                .samples
                .iter()
                .zip(&noise_only)
                .map(|(s, n)| s + n)
                .collect(),
            FS,
        )
        .unwrap();
        let reference = SampledSignal::new(noise_only, FS).unwrap();
        let out = denoise(
            &contaminated,
            &reference,
            &ResponseCurve::flat(0.0),
            &PipelineConfig::default(),
        )
        .unwrap();
        assert!(
            out.model.fundamentals.is_empty(),
            "guard failed: accepted {:?}",
            out.model.fundamentals
        );
        assert!(out.report.combs.is_empty());
    }

    #[test]
    fn pipeline_is_deterministic() {
        let n = 44100 * 2;
        let speech = speech_with_head(n - 22050, 8, 4);
        let noise = SampledSignal::new(harmonic_tone(530.0, 6, 0.05, n, 10), FS).unwrap();
        let contaminated = SampledSignal::new(
            speech
                .samples
                .iter()
                .zip(&noise.samples)
                .map(|(s, n)| s + n)
                .collect(),
            FS,
        )
        .unwrap();
        let cfg = PipelineConfig::default();
        let a = denoise(&contaminated, &noise, &ResponseCurve::flat(0.0), &cfg).unwrap();
        let b = denoise(&contaminated, &noise, &ResponseCurve::flat(0.0), &cfg).unwrap();
        assert_eq!(a.denoised.samples, b.denoised.samples);
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn too_short_input_is_rejected() {
        let speech = SampledSignal::new(white(7, 1000, 0.1), FS).unwrap();
        let noise = SampledSignal::zeros(1000, FS).unwrap();
        let err = denoise(
            &speech,
            &noise,
            &ResponseCurve::flat(0.0),
            &PipelineConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn mismatched_channels_are_rejected() {
        let speech = SampledSignal::new(white(8, 80_000, 0.1), FS).unwrap();
        let noise = SampledSignal::zeros(70_000, FS).unwrap();
        assert!(denoise(
            &speech,
            &noise,
            &ResponseCurve::flat(0.0),
            &PipelineConfig::default()
        )
        .is_err());
    }

    #[test]
    fn stage_errors_carry_the_stage_name() {
        // Zero speech makes the crosstalk stage degenerate.
        let speech = SampledSignal::zeros(80_000, FS).unwrap();
        let noise = SampledSignal::new(white(9, 80_000, 0.1), FS).unwrap();
        let err = denoise(
            &speech,
            &noise,
            &ResponseCurve::flat(0.0),
            &PipelineConfig::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("crosstalk"), "got: {err}");
    }
}
