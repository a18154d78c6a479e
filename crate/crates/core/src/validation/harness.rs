//! End-to-end recovery harness: synthesize known-formant vowels, bury
//! them in surrogate scanner noise at a chosen SNR, run the denoising
//! pipeline, and score how well the formants and SNR were recovered.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    burg_ar, decimate, extract_formants, pick_comb_lines, refine_formants, snr_improvement,
    Formant, FormantSet, SnrReport, DEFAULT_FORMANT_COUNT, DEFAULT_MIN_FORMANT_HZ,
};
use crate::denoise::{denoise, PipelineConfig, ResponseCurve};
use crate::error::{Error, Result};
use crate::signal::{semitone_distance, SampledSignal};
use crate::spectrum::welch_psd;
use crate::validation::synth::{
    mix_at_snr, one_pole_lowpass, synth_mri_noise, synth_vowel, NoiseSpec,
};
use crate::validation::table::VowelCase;

/// Fixed seed for the measurement dither so every call conditions a
/// given signal identically; reports stay byte-reproducible.
const DITHER_SEED: u64 = 0x0d17;
/// PSD frame length (at the decimated rate) for the line-fit stage.
const LINE_FIT_FRAME: usize = 4096;
/// Comb lines are picked from this frequency upward, Hz; below it the
/// source's low-frequency shaping dominates and lines stop following
/// the smooth baseline the fit assumes.
const LINE_WINDOW_LO_HZ: f64 = 230.0;
/// Comb lines are picked up to this far above the highest initial
/// formant estimate, Hz, so the fit sees the upper skirt of the top
/// resonance.
const LINE_WINDOW_ABOVE_HZ: f64 = 350.0;

/// Recipe for turning a signal into formants. Shared by the harness and
/// the analyze command so both measure formants identically.
///
/// The measurement runs in two stages. First the signal is decimated,
/// lightly dithered and pre-emphasized, and an all-pole envelope is
/// fitted whose resonance poles give initial estimates. Then, because a
/// periodic source only samples the true envelope at its harmonics
/// (which biases any envelope fit toward the nearest harmonic), the
/// estimates are refined by fitting resonances directly to the spectral
/// lines of the undithered signal. `burg_order` is the dominant tuning
/// knob: it must be large enough to model every resonance in the
/// decimated band plus spectral tilt, and small enough not to chase
/// individual harmonics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormantAnalysis {
    /// Decimation factor applied before envelope fitting.
    pub decimate_factor: usize,
    /// All-pole model order at the decimated rate.
    pub burg_order: usize,
    /// Number of formants to report.
    pub formant_count: usize,
    /// Resonances below this frequency are discarded, Hz.
    pub min_formant_hz: f64,
    /// Resonances broader than this are discarded, Hz.
    pub max_bandwidth_hz: f64,
    /// First-difference pre-emphasis coefficient in [0, 1); 0 disables.
    /// Flattening the spectrum before the envelope fit stops the fit
    /// from spending all its poles on the strongest harmonics.
    pub pre_emphasis: f64,
    /// Level of the low-frequency dither mixed in before the envelope
    /// fit, dB relative to the signal's RMS. The dither breaks the exact
    /// periodicity of sustained vowels, which would otherwise let the
    /// fit lock onto individual harmonics; well below -100 it is
    /// effectively off.
    pub dither_db: f64,
    /// Corner frequency shaping the dither's spectrum, Hz. Two smoothing
    /// passes above this corner give the dither a steep downward tilt so
    /// it regularizes low frequencies without burying weak high-frequency
    /// resonances.
    pub dither_corner_hz: f64,
    /// Refine the envelope-based estimates against the measured spectral
    /// lines. Skipped automatically when the signal is too short for a
    /// stable line spectrum or too few lines are found.
    pub line_fit: bool,
}

impl Default for FormantAnalysis {
    fn default() -> Self {
        FormantAnalysis {
            decimate_factor: 4,
            burg_order: 18,
            formant_count: DEFAULT_FORMANT_COUNT,
            min_formant_hz: DEFAULT_MIN_FORMANT_HZ,
            // Tighter than the raw pole-reading default: with dither and
            // pre-emphasis active, genuine resonances fit narrow, so a
            // tight gate rejects the fit's broad shaping poles.
            max_bandwidth_hz: 300.0,
            pre_emphasis: 0.7,
            dither_db: -20.0,
            dither_corner_hz: 50.0,
            line_fit: true,
        }
    }
}

impl FormantAnalysis {
    pub fn validate(&self) -> Result<()> {
        if self.decimate_factor == 0 {
            return Err(Error::parameter("decimate_factor", "must be at least 1"));
        }
        if self.burg_order == 0 {
            return Err(Error::parameter("burg_order", "must be at least 1"));
        }
        if self.formant_count == 0 {
            return Err(Error::parameter("formant_count", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.pre_emphasis) {
            return Err(Error::parameter("pre_emphasis", "must lie in [0, 1)"));
        }
        if !self.dither_db.is_finite() {
            return Err(Error::parameter("dither_db", "must be finite"));
        }
        if !(self.dither_corner_hz > 0.0) || !self.dither_corner_hz.is_finite() {
            return Err(Error::parameter(
                "dither_corner_hz",
                "must be positive and finite",
            ));
        }
        Ok(())
    }
}

/// Deterministic low-frequency dither: uniform noise pushed twice
/// through a one-pole smoother with corner `corner_hz`, scaled to
/// `rms_target`.
fn pink_dither(len: usize, fs: f64, corner_hz: f64, rms_target: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(DITHER_SEED);
    let mut noise: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rho = (-2.0 * std::f64::consts::PI * corner_hz / fs).exp();
    one_pole_lowpass(&mut noise, rho);
    one_pole_lowpass(&mut noise, rho);
    let rms = (noise.iter().map(|v| v * v).sum::<f64>() / len.max(1) as f64).sqrt();
    if rms > 0.0 {
        let scale = rms_target / rms;
        for v in &mut noise {
            *v *= scale;
        }
    }
    noise
}

/// Conditions the decimated signal for the envelope fit: add the dither,
/// then apply first-difference pre-emphasis.
fn condition_for_envelope_fit(
    dec: &SampledSignal,
    params: &FormantAnalysis,
) -> Result<SampledSignal> {
    let target = dec.rms() * 10f64.powf(params.dither_db / 20.0);
    let dither = pink_dither(dec.len(), dec.fs, params.dither_corner_hz, target);
    let mut samples: Vec<f64> = dec
        .samples
        .iter()
        .zip(&dither)
        .map(|(s, d)| s + d)
        .collect();
    if params.pre_emphasis > 0.0 {
        let mu = params.pre_emphasis;
        for i in (1..samples.len()).rev() {
            samples[i] -= mu * samples[i - 1];
        }
    }
    SampledSignal::new(samples, dec.fs)
}

/// Refines `initial` against the comb lines of the undithered decimated
/// signal. Returns `None` (keep the envelope-based estimates) when the
/// signal cannot support a stable line spectrum or too few lines emerge.
fn line_fit_refinement(dec: &SampledSignal, initial: &FormantSet) -> Option<FormantSet> {
    let highest = initial.formants.last()?.frequency_hz;
    let spectrum = welch_psd(dec, LINE_FIT_FRAME, 0.5).ok()?;
    let lines = pick_comb_lines(&spectrum, LINE_WINDOW_LO_HZ, highest + LINE_WINDOW_ABOVE_HZ);
    if lines.len() < 2 * initial.formants.len() + 3 {
        return None;
    }
    Some(FormantSet {
        formants: refine_formants(&lines, &initial.formants),
        partial: initial.partial,
    })
}

/// Decimates, conditions, fits the all-pole envelope, extracts formants
/// from its resonance poles, and (unless disabled) refines them against
/// the signal's measured spectral lines. This is the canonical formant
/// measurement everywhere in the crate.
pub fn measure_formants(signal: &SampledSignal, params: &FormantAnalysis) -> Result<FormantSet> {
    params.validate()?;
    let dec = decimate(signal, params.decimate_factor)?;
    let conditioned = condition_for_envelope_fit(&dec, params)?;
    let env = burg_ar(&conditioned, params.burg_order)?;
    let initial = extract_formants(
        &env,
        params.formant_count,
        params.min_formant_hz,
        params.max_bandwidth_hz,
    )?;
    if !params.line_fit || initial.partial {
        return Ok(initial);
    }
    Ok(line_fit_refinement(&dec, &initial).unwrap_or(initial))
}

/// Pass/fail limits for a validation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationThresholds {
    /// Hard cap: every recovered formant must lie within this many
    /// semitones of its clean-signal counterpart.
    pub max_semitone_error: f64,
    /// Soft cap: formant errors beyond this count as outliers.
    pub strict_semitone_error: f64,
    /// Number of outliers tolerated across the whole run.
    pub max_strict_outliers: usize,
    /// Minimum SNR improvement required of every vowel, dB.
    pub min_gain_db: f64,
    /// Minimum median SNR improvement across vowels, dB.
    pub min_median_gain_db: f64,
}

impl Default for ValidationThresholds {
    fn default() -> Self {
        ValidationThresholds {
            max_semitone_error: 1.2,
            strict_semitone_error: 0.6,
            max_strict_outliers: 2,
            min_gain_db: 8.0,
            min_median_gain_db: 10.0,
        }
    }
}

impl ValidationThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.strict_semitone_error > 0.0) || !self.strict_semitone_error.is_finite() {
            return Err(Error::parameter(
                "strict_semitone_error",
                "must be positive and finite",
            ));
        }
        if !(self.max_semitone_error >= self.strict_semitone_error) {
            return Err(Error::parameter(
                "max_semitone_error",
                "must be at least strict_semitone_error",
            ));
        }
        if !self.min_gain_db.is_finite() || !self.min_median_gain_db.is_finite() {
            return Err(Error::parameter("min_gain_db", "must be finite"));
        }
        Ok(())
    }
}

/// Everything about a validation run that is not the vowel table, the
/// noise recipe, or the pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessOptions {
    /// Mixing SNR, dB.
    pub snr_db: f64,
    /// Fraction of the clean speech injected into the noise reference
    /// channel, exercising the crosstalk-removal stage.
    pub crosstalk_fraction: f64,
    /// Silence prepended to each vowel, seconds; gives the pipeline the
    /// quiet head its spectral subtraction samples noise from.
    pub head_s: f64,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    pub analysis: FormantAnalysis,
    pub thresholds: ValidationThresholds,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            snr_db: 0.0,
            crosstalk_fraction: 0.05,
            head_s: 0.5,
            jobs: 0,
            analysis: FormantAnalysis::default(),
            thresholds: ValidationThresholds::default(),
        }
    }
}

impl HarnessOptions {
    pub fn validate(&self) -> Result<()> {
        if !self.snr_db.is_finite() {
            return Err(Error::parameter("snr_db", "must be finite"));
        }
        if !(0.0..1.0).contains(&self.crosstalk_fraction) {
            return Err(Error::parameter("crosstalk_fraction", "must lie in [0, 1)"));
        }
        if !(self.head_s >= 0.0) || !self.head_s.is_finite() {
            return Err(Error::parameter("head_s", "must be finite and >= 0"));
        }
        self.analysis.validate()?;
        self.thresholds.validate()
    }
}

/// Score card for one vowel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VowelOutcome {
    pub label: String,
    pub f0_hz: f64,
    pub passed: bool,
    /// Present when the case aborted before scoring; such a vowel fails.
    pub failure: Option<String>,
    pub clean_formants: Vec<Formant>,
    pub processed_formants: Vec<Formant>,
    /// Signed recovery errors, semitones, aligned with the formants.
    pub semitone_errors: Vec<f64>,
    pub snr: Option<SnrReport>,
    /// Comb fundamentals the pipeline accepted, Hz.
    pub comb_fundamentals_hz: Vec<f64>,
    pub crosstalk_k: Option<f64>,
    pub subtraction_applied: bool,
    pub warnings: Vec<String>,
}

/// The signals a vowel case produced, for writing out as WAV fixtures.
/// Later entries are `None` when the case aborted early.
#[derive(Debug, Clone)]
pub struct VowelFixtures {
    pub label: String,
    pub clean: Option<SampledSignal>,
    pub noise_channel: Option<SampledSignal>,
    pub mixed: Option<SampledSignal>,
    pub processed: Option<SampledSignal>,
}

/// Aggregate result of a validation run. Serializes deterministically:
/// same inputs and seed give byte-identical JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub snr_db: f64,
    pub head_s: f64,
    pub crosstalk_fraction: f64,
    pub thresholds: ValidationThresholds,
    /// Per-vowel score cards, sorted by label.
    pub vowels: Vec<VowelOutcome>,
    /// Formant errors beyond the strict threshold, across all vowels.
    pub strict_outliers: usize,
    /// Total formants scored.
    pub total_formants: usize,
    pub max_abs_semitone_error: f64,
    pub min_gain_db: f64,
    pub median_gain_db: f64,
    pub passed: bool,
    /// Run-level anomalies, e.g. noise fundamentals the pipeline will
    /// refuse to remove because they collide with a vowel's harmonics.
    pub warnings: Vec<String>,
}

/// A report plus the raw signals behind it.
#[derive(Debug, Clone)]
pub struct ValidationRun {
    pub report: ValidationReport,
    /// Parallel to `report.vowels`.
    pub fixtures: Vec<VowelFixtures>,
}

impl ValidationReport {
    /// Header for [`ValidationReport::csv_rows`]: one row per scored
    /// formant (long format), plus one placeholder row for vowels that
    /// produced no formants.
    pub const CSV_HEADER: &'static str = "label,formant_index,clean_hz,processed_hz,\
         error_semitones,snr_in_db,snr_out_db,gain_db,vowel_passed";

    /// Data rows matching [`Self::CSV_HEADER`], sorted like `vowels`.
    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows = Vec::new();
        for v in &self.vowels {
            let (snr_in, snr_out, gain) = match &v.snr {
                Some(s) => (
                    s.snr_in_db.to_string(),
                    s.snr_out_db.to_string(),
                    s.gain_db.to_string(),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            if v.clean_formants.is_empty() {
                rows.push(format!(
                    "{},,,,,{snr_in},{snr_out},{gain},{}",
                    v.label, v.passed
                ));
                continue;
            }
            for (i, (clean, proc)) in v
                .clean_formants
                .iter()
                .zip(&v.processed_formants)
                .enumerate()
            {
                let err = v
                    .semitone_errors
                    .get(i)
                    .map(|e| e.to_string())
                    .unwrap_or_default();
                rows.push(format!(
                    "{},{},{},{},{err},{snr_in},{snr_out},{gain},{}",
                    v.label,
                    i + 1,
                    clean.frequency_hz,
                    proc.frequency_hz,
                    v.passed
                ));
            }
        }
        rows
    }

    /// Pretty-printed JSON rendering. Field order and float formatting are
    /// deterministic, so identical runs serialize byte-identically.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("could not serialize the validation report: {e}")))
    }
}

/// Per-case seeds derived from the master seed: vowel synthesis uses the
/// odd stream, noise synthesis the even stream, so no two draws collide
/// regardless of how many cases run.
fn case_seeds(master: u64, index: usize) -> (u64, u64) {
    let base = master.wrapping_add(2 * index as u64);
    (base.wrapping_add(1), base.wrapping_add(2))
}

struct CaseScore {
    clean: FormantSet,
    processed: FormantSet,
    errors: Vec<f64>,
    snr: SnrReport,
    fundamentals: Vec<f64>,
    crosstalk_k: f64,
    subtraction_applied: bool,
    warnings: Vec<String>,
}

fn run_case(
    case: &VowelCase,
    noise: &NoiseSpec,
    cfg: &PipelineConfig,
    options: &HarnessOptions,
    seeds: (u64, u64),
    fixtures: &mut VowelFixtures,
) -> Result<CaseScore> {
    let fs = case.spec.fs;
    let body = synth_vowel(&case.spec, seeds.0)?;

    let head_n = (options.head_s * fs).round() as usize;
    let mut clean_samples = vec![0.0f64; head_n];
    clean_samples.extend_from_slice(&body.samples);
    let clean = SampledSignal::new(clean_samples, fs)?;
    fixtures.clean = Some(clean.clone());

    let noise_spec = NoiseSpec {
        duration_s: clean.len() as f64 / fs,
        fs,
        ..noise.clone()
    };
    let noise_sig = synth_mri_noise(&noise_spec, seeds.1)?;

    let mix = mix_at_snr(&clean, &noise_sig, options.snr_db)?;
    fixtures.mixed = Some(mix.mixed.clone());

    let reference = SampledSignal::new(
        mix.scaled_noise
            .samples
            .iter()
            .zip(&clean.samples)
            .map(|(n, s)| n + options.crosstalk_fraction * s)
            .collect(),
        fs,
    )?;
    fixtures.noise_channel = Some(reference.clone());

    let out = denoise(&mix.mixed, &reference, &ResponseCurve::flat(0.0), cfg)?;
    fixtures.processed = Some(out.denoised.clone());

    let processed_body = SampledSignal::new(out.denoised.samples[head_n..].to_vec(), fs)?;
    let clean_set = measure_formants(&body, &options.analysis)?;
    if clean_set.partial {
        return Err(Error::DegenerateInput(format!(
            "clean analysis found only {} of {} formants",
            clean_set.formants.len(),
            options.analysis.formant_count
        )));
    }
    let processed_set = measure_formants(&processed_body, &options.analysis)?;
    if processed_set.partial {
        return Err(Error::DegenerateInput(format!(
            "processed analysis found only {} of {} formants",
            processed_set.formants.len(),
            options.analysis.formant_count
        )));
    }

    let errors = clean_set
        .formants
        .iter()
        .zip(&processed_set.formants)
        .map(|(c, p)| semitone_distance(p.frequency_hz, c.frequency_hz))
        .collect::<Result<Vec<f64>>>()?;

    let snr = snr_improvement(&clean, &mix.mixed, &out.denoised, &out.chain)?;

    Ok(CaseScore {
        clean: clean_set,
        processed: processed_set,
        errors,
        snr,
        fundamentals: out.report.fundamentals.clone(),
        crosstalk_k: out.report.crosstalk_k,
        subtraction_applied: out.report.subtraction_applied,
        warnings: out.report.warnings,
    })
}

fn outcome_of(
    case: &VowelCase,
    score: Result<CaseScore>,
    thresholds: &ValidationThresholds,
) -> VowelOutcome {
    match score {
        Ok(s) => {
            let within = s
                .errors
                .iter()
                .all(|e| e.abs() <= thresholds.max_semitone_error);
            let passed = within && s.snr.gain_db >= thresholds.min_gain_db;
            VowelOutcome {
                label: case.label.clone(),
                f0_hz: case.spec.f0_hz,
                passed,
                failure: None,
                clean_formants: s.clean.formants,
                processed_formants: s.processed.formants,
                semitone_errors: s.errors,
                snr: Some(s.snr),
                comb_fundamentals_hz: s.fundamentals,
                crosstalk_k: Some(s.crosstalk_k),
                subtraction_applied: s.subtraction_applied,
                warnings: s.warnings,
            }
        }
        Err(e) => VowelOutcome {
            label: case.label.clone(),
            f0_hz: case.spec.f0_hz,
            passed: false,
            failure: Some(e.to_string()),
            clean_formants: Vec::new(),
            processed_formants: Vec::new(),
            semitone_errors: Vec::new(),
            snr: None,
            comb_fundamentals_hz: Vec::new(),
            crosstalk_k: None,
            subtraction_applied: false,
            warnings: Vec::new(),
        },
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Runs the full recovery protocol over a vowel table.
///
/// Per vowel: synthesize the clean signal (with a silent head), scale
/// the surrogate noise to the requested SNR, mix, contaminate the noise
/// reference with a little speech crosstalk, denoise, then compare
/// formants measured on the clean and processed signals and score the
/// SNR improvement. A failing vowel is recorded in its outcome, never
/// fatal. Cases run concurrently (`options.jobs`), and the report is
/// assembled in label order so identical inputs and seed always produce
/// byte-identical JSON.
pub fn run_validation(
    cases: &[VowelCase],
    noise: &NoiseSpec,
    cfg: &PipelineConfig,
    options: &HarnessOptions,
    seed: u64,
) -> Result<ValidationRun> {
    cfg.validate()?;
    options.validate()?;
    noise.validate()?;
    if cases.is_empty() {
        return Err(Error::parameter("cases", "vowel table is empty"));
    }
    {
        let mut labels: Vec<&str> = cases.iter().map(|c| c.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::parameter("cases", "vowel labels must be unique"));
        }
    }

    // Planted fundamentals the comb stage will refuse on purpose.
    let mut warnings: Vec<String> = Vec::new();
    for case in cases {
        for d in noise.fundamentals_near_multiples_of(case.spec.f0_hz, cfg.f0_multiple_tol_hz) {
            warnings.push(format!(
                "vowel {}: noise fundamental {d} Hz sits within {} Hz of a multiple of \
                 f0 = {} Hz; the pipeline protects that spacing and will not remove it",
                case.label, cfg.f0_multiple_tol_hz, case.spec.f0_hz
            ));
        }
    }

    let jobs = if options.jobs == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        options.jobs
    }
    .min(cases.len());

    let results: Mutex<Vec<Option<(VowelOutcome, VowelFixtures)>>> =
        Mutex::new((0..cases.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);

    let worker = |_thread: usize| loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= cases.len() {
            break;
        }
        let case = &cases[i];
        let mut fixtures = VowelFixtures {
            label: case.label.clone(),
            clean: None,
            noise_channel: None,
            mixed: None,
            processed: None,
        };
        let score = run_case(
            case,
            noise,
            cfg,
            options,
            case_seeds(seed, i),
            &mut fixtures,
        );
        let outcome = outcome_of(case, score, &options.thresholds);
        results.lock().expect("result store poisoned")[i] = Some((outcome, fixtures));
    };

    if jobs <= 1 {
        worker(0);
    } else {
        std::thread::scope(|scope| {
            for t in 0..jobs {
                scope.spawn(move || worker(t));
            }
        });
    }

    let mut scored: Vec<(VowelOutcome, VowelFixtures)> = results
        .into_inner()
        .expect("result store poisoned")
        .into_iter()
        .map(|r| r.expect("every case index was claimed by a worker"))
        .collect();
    scored.sort_by(|a, b| a.0.label.cmp(&b.0.label));

    let (mut vowels, mut fixtures) = (Vec::new(), Vec::new());
    for (outcome, fix) in scored {
        vowels.push(outcome);
        fixtures.push(fix);
    }

    let all_errors: Vec<f64> = vowels
        .iter()
        .flat_map(|v| v.semitone_errors.iter().copied())
        .collect();
    let strict_outliers = all_errors
        .iter()
        .filter(|e| e.abs() > options.thresholds.strict_semitone_error)
        .count();
    let max_abs_semitone_error = all_errors.iter().fold(0.0f64, |a, e| a.max(e.abs()));

    let mut gains: Vec<f64> = vowels
        .iter()
        .filter_map(|v| v.snr.as_ref().map(|s| s.gain_db))
        .collect();
    gains.sort_by(|a, b| a.partial_cmp(b).expect("finite gains"));
    let median_gain_db = median(&gains);
    let min_gain_db = gains.first().copied().unwrap_or(0.0);

    let passed = vowels.iter().all(|v| v.passed)
        && strict_outliers <= options.thresholds.max_strict_outliers
        && median_gain_db >= options.thresholds.min_median_gain_db;

    Ok(ValidationRun {
        report: ValidationReport {
            seed,
            snr_db: options.snr_db,
            head_s: options.head_s,
            crosstalk_fraction: options.crosstalk_fraction,
            thresholds: options.thresholds,
            vowels,
            strict_outliers,
            total_formants: all_errors.len(),
            max_abs_semitone_error,
            min_gain_db,
            median_gain_db,
            passed,
            warnings,
        },
        fixtures,
    })
}


#[cfg(test)]
mod dbgtests {
    use super::*;
    use crate::analysis::pick_comb_lines;
    use crate::validation::table::canonical_vowels;

    #[test]
    fn dbg_i_lines() {
        let case = canonical_vowels(44100.0, 1.2)
            .into_iter()
            .find(|c| c.label == "i")
            .unwrap();
        let signal = synth_vowel(&case.spec, 7).unwrap();
        let params = FormantAnalysis::default();
        let dec = decimate(&signal, params.decimate_factor).unwrap();
        let conditioned = condition_for_envelope_fit(&dec, &params).unwrap();
        let env = burg_ar(&conditioned, params.burg_order).unwrap();
        let initial = extract_formants(&env, 3, 200.0, 300.0).unwrap();
        eprintln!("anchors: {:?}", initial.formants);
        let spectrum = welch_psd(&dec, 4096, 0.5).unwrap();
        let hi = initial.formants.last().unwrap().frequency_hz + 350.0;
        for l in pick_comb_lines(&spectrum, 230.0, hi) {
            eprintln!("line {:9.3} Hz  {:8.3} dB", l.freq_hz, l.level_db);
        }
        let refined = line_fit_refinement(&dec, &initial).unwrap();
        eprintln!("refined: {:?}", refined.formants);
    }
}
