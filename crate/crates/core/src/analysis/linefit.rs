//! Formant refinement against discrete spectral lines.
//!
//! A sustained vowel has a (nearly) periodic source, so its spectrum is
//! not a smooth envelope but a comb of lines at the source harmonics.
//! Any envelope-based estimator can only see the vocal-tract resonances
//! where those lines happen to sample them, which biases its formant
//! frequencies toward the nearest line. This module removes that bias by
//! going back to the lines themselves: it picks the comb peaks out of an
//! averaged power spectrum and fits a physical model — a sum of
//! resonances on top of a smooth source slope — directly to the line
//! frequencies and levels. The resonance frequencies of the best fit are
//! free to sit between lines.
//!
//! The fit is a small coordinate descent: resonance parameters move on a
//! grid inside a trust region around their initial estimates, while the
//! source slope (a quadratic in log-frequency) is re-solved in closed
//! form at every step. Everything is deterministic.

use crate::analysis::formants::Formant;
use crate::spectrum::PowerSpectrum;

/// Only peaks within this many dB of the strongest picked peak count as
/// comb lines; anything weaker is indistinguishable from leakage and
/// numerical floor ripple.
const LINE_DYNAMIC_RANGE_DB: f64 = 70.0;

/// Minimum spacing between picked lines, Hz. Real voice harmonics are at
/// least a fundamental apart; closer "peaks" are sidelobes or leakage of
/// a stronger neighbor, so only the strongest peak in each neighborhood
/// survives.
const LINE_MIN_SPACING_HZ: f64 = 70.0;

/// Half-width of the frequency trust region around each initial formant
/// estimate, Hz.
const TRUST_RADIUS_HZ: f64 = 55.0;
/// Coarse grid step inside the trust region, Hz.
const COARSE_FREQ_STEP_HZ: f64 = 2.0;
/// Bandwidth grid searched at each candidate frequency, Hz.
const BW_MIN_HZ: f64 = 40.0;
const BW_MAX_HZ: f64 = 290.0;
const BW_STEP_HZ: f64 = 10.0;
/// Fine polish around the coarse winner: frequency +/- span at the given
/// step, bandwidth likewise.
const POLISH_FREQ_SPAN_HZ: f64 = 2.0;
const POLISH_FREQ_STEP_HZ: f64 = 0.5;
const POLISH_BW_SPAN_HZ: f64 = 10.0;
const POLISH_BW_STEP_HZ: f64 = 2.5;
/// Full passes of coordinate descent over all resonances.
const SWEEPS: usize = 3;
/// Initial bandwidth guesses are clamped into this range before the
/// descent starts; envelope-based bandwidths are unreliable.
const INIT_BW_LO_HZ: f64 = 60.0;
const INIT_BW_HI_HZ: f64 = 250.0;

/// One picked spectral line: interpolated peak position and level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SpectralLine {
    pub freq_hz: f64,
    pub level_db: f64,
}

/// Picks the comb lines of `spectrum` between `f_lo_hz` and `f_hi_hz`.
///
/// A line is a bin that strictly dominates its neighbors at offsets one
/// and two; its position and level are refined by parabolic
/// interpolation over the three center bins (in dB). Peaks more than
/// [`LINE_DYNAMIC_RANGE_DB`] below the strongest are dropped, then peaks
/// closer than [`LINE_MIN_SPACING_HZ`] to a stronger one. The result is
/// sorted by frequency.
pub(crate) fn pick_comb_lines(
    spectrum: &PowerSpectrum,
    f_lo_hz: f64,
    f_hi_hz: f64,
) -> Vec<SpectralLine> {
    let db = &spectrum.power_db;
    let freqs = &spectrum.freqs_hz;
    let step = spectrum.freq_resolution();
    if !(f_lo_hz.is_finite() && f_hi_hz.is_finite() && f_lo_hz < f_hi_hz) || db.len() < 5 {
        return Vec::new();
    }
    let lo = freqs.partition_point(|f| *f < f_lo_hz).max(2);
    let hi = freqs.partition_point(|f| *f < f_hi_hz).min(db.len() - 2);

    let mut raw = Vec::new();
    for i in lo..hi {
        let is_peak =
            db[i] >= db[i - 1] && db[i] > db[i + 1] && db[i] > db[i - 2] && db[i] > db[i + 2];
        if !is_peak {
            continue;
        }
        let denom = db[i - 1] - 2.0 * db[i] + db[i + 1];
        let delta = if denom < 0.0 {
            0.5 * (db[i - 1] - db[i + 1]) / denom
        } else {
            0.0
        };
        raw.push(SpectralLine {
            freq_hz: (i as f64 + delta) * step,
            level_db: db[i] - 0.25 * (db[i - 1] - db[i + 1]) * delta,
        });
    }
    let Some(top) = raw.iter().map(|l| l.level_db).max_by(|a, b| a.total_cmp(b)) else {
        return Vec::new();
    };
    raw.retain(|l| l.level_db >= top - LINE_DYNAMIC_RANGE_DB);
    raw.sort_by(|a, b| b.level_db.total_cmp(&a.level_db));

    let mut kept: Vec<SpectralLine> = Vec::new();
    for line in raw {
        if kept
            .iter()
            .all(|k| (line.freq_hz - k.freq_hz).abs() >= LINE_MIN_SPACING_HZ)
        {
            kept.push(line);
        }
    }
    kept.sort_by(|a, b| a.freq_hz.total_cmp(&b.freq_hz));
    kept
}

/// Power response, in dB, of a continuous-time conjugate resonance pole
/// pair at `fc_hz` with bandwidth `bw_hz`, evaluated at `f_hz`. Only the
/// shape matters to the fit; the (frequency-independent) gain is
/// absorbed by the source baseline.
fn resonance_db(f_hz: f64, fc_hz: f64, bw_hz: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * f_hz;
    let w0 = 2.0 * std::f64::consts::PI * fc_hz;
    let sigma = std::f64::consts::PI * bw_hz;
    let mag2 = ((w - w0).powi(2) + sigma * sigma) * ((w + w0).powi(2) + sigma * sigma);
    -10.0 * mag2.log10()
}

/// Closed-form least-squares solve for the source baseline: a quadratic
/// in log2(frequency). Holds the fixed design matrix and its
/// pseudo-inverse so each objective evaluation is a handful of dot
/// products.
struct SourceBaseline {
    /// log2 of each line frequency.
    x: Vec<f64>,
    /// Rows of the 3 x n pseudo-inverse of the design matrix [1, x, x^2].
    pinv: [Vec<f64>; 3],
}

impl SourceBaseline {
    fn new(lines: &[SpectralLine]) -> Option<Self> {
        let n = lines.len();
        let x: Vec<f64> = lines.iter().map(|l| l.freq_hz.log2()).collect();
        let design = nalgebra::DMatrix::from_fn(n, 3, |r, c| x[r].powi(c as i32));
        let pinv = design.svd(true, true).pseudo_inverse(1e-12).ok()?;
        let row = |r: usize| (0..n).map(|c| pinv[(r, c)]).collect::<Vec<f64>>();
        Some(SourceBaseline {
            x,
            pinv: [row(0), row(1), row(2)],
        })
    }

    /// Sum of squared residuals after the best-fitting baseline is
    /// removed from `resid`.
    fn residual_sse(&self, resid: &[f64]) -> f64 {
        let dot = |v: &[f64]| v.iter().zip(resid).map(|(a, b)| a * b).sum::<f64>();
        let (c0, c1, c2) = (dot(&self.pinv[0]), dot(&self.pinv[1]), dot(&self.pinv[2]));
        resid
            .iter()
            .zip(&self.x)
            .map(|(r, &x)| {
                let d = r - (c0 + c1 * x + c2 * x * x);
                d * d
            })
            .sum()
    }
}

/// Refines formant estimates by jointly fitting resonances plus a smooth
/// source baseline to the picked spectral lines.
///
/// Each resonance frequency stays within [`TRUST_RADIUS_HZ`] (plus the
/// polish span) of its initial estimate, so a misleading spectrum cannot
/// drag a formant arbitrarily far. Returns the refined formants sorted
/// by frequency; if the problem is under-determined the initial
/// estimates are returned unchanged.
pub(crate) fn refine_formants(lines: &[SpectralLine], inits: &[Formant]) -> Vec<Formant> {
    // Need enough lines to pin down 2 parameters per resonance plus the
    // 3-parameter baseline.
    if inits.is_empty() || lines.len() < 2 * inits.len() + 3 {
        return inits.to_vec();
    }
    let Some(baseline) = SourceBaseline::new(lines) else {
        return inits.to_vec();
    };
    let levels: Vec<f64> = lines.iter().map(|l| l.level_db).collect();

    let mut params: Vec<Formant> = inits
        .iter()
        .map(|f| Formant {
            frequency_hz: f.frequency_hz,
            bandwidth_hz: f.bandwidth_hz.clamp(INIT_BW_LO_HZ, INIT_BW_HI_HZ),
        })
        .collect();
    let anchors: Vec<f64> = inits.iter().map(|f| f.frequency_hz).collect();

    let mut partial = vec![0.0f64; lines.len()];
    let mut resid = vec![0.0f64; lines.len()];
    for _ in 0..SWEEPS {
        for j in 0..params.len() {
            // Levels with every *other* resonance already removed, so a
            // trial for this one is a single response evaluation per line.
            for (p, (line, lv)) in partial.iter_mut().zip(lines.iter().zip(&levels)) {
                *p = lv
                    - params
                        .iter()
                        .enumerate()
                        .filter(|(m, _)| *m != j)
                        .map(|(_, q)| resonance_db(line.freq_hz, q.frequency_hz, q.bandwidth_hz))
                        .sum::<f64>();
            }
            let mut try_point = |fc: f64, bw: f64, best: &mut (f64, f64, f64)| {
                for (r, (p, line)) in resid.iter_mut().zip(partial.iter().zip(lines)) {
                    *r = p - resonance_db(line.freq_hz, fc, bw);
                }
                let sse = baseline.residual_sse(&resid);
                if sse < best.0 {
                    *best = (sse, fc, bw);
                }
            };

            let mut best = (
                f64::INFINITY,
                params[j].frequency_hz,
                params[j].bandwidth_hz,
            );
            let coarse_steps = (2.0 * TRUST_RADIUS_HZ / COARSE_FREQ_STEP_HZ).round() as usize;
            for s in 0..=coarse_steps {
                let fc = anchors[j] - TRUST_RADIUS_HZ + COARSE_FREQ_STEP_HZ * s as f64;
                let mut bw = BW_MIN_HZ;
                while bw <= BW_MAX_HZ + 1e-9 {
                    try_point(fc, bw, &mut best);
                    bw += BW_STEP_HZ;
                }
            }
            let (center_f, center_bw) = (best.1, best.2);
            let polish_steps = (2.0 * POLISH_FREQ_SPAN_HZ / POLISH_FREQ_STEP_HZ).round() as usize;
            for s in 0..=polish_steps {
                let fc = center_f - POLISH_FREQ_SPAN_HZ + POLISH_FREQ_STEP_HZ * s as f64;
                let mut bw = (center_bw - POLISH_BW_SPAN_HZ).max(BW_MIN_HZ);
                while bw <= center_bw + POLISH_BW_SPAN_HZ + 1e-9 {
                    try_point(fc, bw, &mut best);
                    bw += POLISH_BW_STEP_HZ;
                }
            }
            params[j] = Formant {
                frequency_hz: best.1,
                bandwidth_hz: best.2,
            };
        }
    }
    params.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
    params
}
