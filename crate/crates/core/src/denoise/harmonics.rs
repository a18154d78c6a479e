//! Harmonic-structure completion: groups detected spectral peaks into
//! combs of equally spaced harmonics and returns their fundamental
//! spacings.

use crate::denoise::{NoiseModel, PipelineConfig};
use crate::spectrum::SpectralPeak;

/// Index of the nearest value in `sorted` to `target`, if it lies within
/// `tol`. `sorted` must be ascending.
fn nearest_within(sorted: &[f64], target: f64, tol: f64) -> Option<usize> {
    if sorted.is_empty() {
        return None;
    }
    let hi = sorted.partition_point(|&f| f < target);
    let mut best: Option<usize> = None;
    for idx in [hi.wrapping_sub(1), hi] {
        if let Some(&f) = sorted.get(idx) {
            if (f - target).abs() <= tol
                && best.map_or(true, |b| (f - target).abs() < (sorted[b] - target).abs())
            {
                best = Some(idx);
            }
        }
    }
    best
}

/// True when the full detected peak list exhibits four consecutive
/// harmonics of spacing `d`: peaks within `tol` of `m*d`, `(m+1)*d`,
/// `(m+2)*d`, `(m+3)*d` for some integer `m >= 1`.
fn has_consecutive_support(sorted_freqs: &[f64], d: f64, tol: f64) -> bool {
    let Some(&f_max) = sorted_freqs.last() else {
        return false;
    };
    let m_last = ((f_max + tol) / d).floor() as i64;
    if m_last < 4 {
        return false;
    }
    'starts: for m_start in 1..=(m_last - 3) {
        for j in 0..4 {
            let target = (m_start + j) as f64 * d;
            if nearest_within(sorted_freqs, target, tol).is_none() {
                continue 'starts;
            }
        }
        return true;
    }
    false
}

/// True when `d` lies within `tol` of an integer multiple of `f0`.
/// A comb with such a spacing would place every notch on a protected
/// speech harmonic, so candidates matching this test are rejected.
fn near_multiple_of_f0(d: f64, f0: f64, tol: f64) -> bool {
    if !(tol > 0.0) {
        return false;
    }
    let m = (d / f0).round();
    m >= 1.0 && (d - m * f0).abs() < tol
}

/// Least-squares refinement of the spacing: over all integer multiples
/// with a peak within `tol`, minimize sum of (f_i - m_i*d)^2, giving
/// d = sum(m_i*f_i) / sum(m_i^2). Returns the refined spacing and the
/// number of matched multiples.
fn refine_spacing(sorted_freqs: &[f64], d: f64, tol: f64) -> (f64, usize) {
    let f_max = *sorted_freqs.last().expect("support implies peaks exist");
    let m_last = ((f_max + tol) / d).floor() as i64;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut matched = 0;
    for m in 1..=m_last {
        let target = m as f64 * d;
        if let Some(idx) = nearest_within(sorted_freqs, target, tol) {
            num += m as f64 * sorted_freqs[idx];
            den += (m * m) as f64;
            matched += 1;
        }
    }
    if den > 0.0 {
        (num / den, matched)
    } else {
        (d, 0)
    }
}

/// Groups peaks into harmonic combs.
///
/// Repeatedly takes the tallest unclaimed peak p, scans the remaining
/// peaks q in order of increasing |loc(p) - loc(q)|, and treats each
/// distance as a candidate spacing d. A candidate is rejected when it
/// falls below the speech guard `harmonic_guard * f0_ref`, sits within
/// `f0_multiple_tol_hz` of an integer multiple of `f0_ref` (its notches
/// would land on the speech harmonics themselves), duplicates an
/// already-accepted spacing, or lacks four consecutive harmonics in the
/// detected peak list. On acceptance the spacing is least-squares
/// refined over all matching multiples and the best-matching unclaimed
/// peak at each multiple is claimed by the new comb. Stops when all
/// peaks are consumed or `max_combs` spacings are found.
pub fn find_harmonics(peaks: &[SpectralPeak], cfg: &PipelineConfig) -> NoiseModel {
    let tol = cfg.peak_match_tol_hz;
    let guard = cfg.guard_hz();

    // Immutable record of everything detected: harmonic-support checks
    // consult this so a peak claimed by one comb still counts as
    // evidence for another comb sharing (or nearly sharing) a multiple.
    let mut all_freqs: Vec<f64> = peaks.iter().map(|p| p.freq_hz).collect();
    all_freqs.sort_by(|a, b| a.partial_cmp(b).expect("finite frequencies"));

    let mut pool: Vec<SpectralPeak> = peaks.to_vec();
    let mut model = NoiseModel::empty();

    while !pool.is_empty() && model.fundamentals.len() < cfg.max_combs {
        // Tallest peak; ties broken toward lower frequency for
        // determinism.
        let p_idx = pool
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                a.magnitude_db
                    .partial_cmp(&b.magnitude_db)
                    .expect("finite")
                    .then(b.freq_hz.partial_cmp(&a.freq_hz).expect("finite"))
            })
            .map(|(i, _)| i)
            .expect("pool is nonempty");
        let p = pool.remove(p_idx);

        let mut candidates: Vec<f64> = pool.iter().map(|q| (q.freq_hz - p.freq_hz).abs()).collect();
        candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite"));

        for d in candidates {
            if d < guard || near_multiple_of_f0(d, cfg.f0_ref, cfg.f0_multiple_tol_hz) {
                continue;
            }
            if model
                .fundamentals
                .iter()
                .any(|&existing| (existing - d).abs() <= tol)
            {
                continue;
            }
            if !has_consecutive_support(&all_freqs, d, tol) {
                continue;
            }
            let (d_hat, matched) = refine_spacing(&all_freqs, d, tol);
            if matched < 4
                || d_hat < guard
                || near_multiple_of_f0(d_hat, cfg.f0_ref, cfg.f0_multiple_tol_hz)
                || model
                    .fundamentals
                    .iter()
                    .any(|&existing| (existing - d_hat).abs() <= tol)
            {
                continue;
            }

            // Claim the best-matching unclaimed peak at each multiple.
            let mut claimed: Vec<SpectralPeak> = Vec::new();
            let f_max = all_freqs.last().copied().unwrap_or(0.0);
            let m_last = ((f_max + tol) / d_hat).floor() as i64;
            for m in 1..=m_last {
                let target = m as f64 * d_hat;
                let best = pool
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| (q.freq_hz - target).abs() <= tol)
                    .min_by(|(_, a), (_, b)| {
                        (a.freq_hz - target)
                            .abs()
                            .partial_cmp(&(b.freq_hz - target).abs())
                            .expect("finite")
                    })
                    .map(|(i, _)| i);
                if let Some(i) = best {
                    claimed.push(pool.remove(i));
                }
            }
            // The seed peak was removed from the pool up front; list it
            // with this comb when it sits on one of the multiples.
            let p_multiple = (p.freq_hz / d_hat).round().max(1.0) * d_hat;
            if (p.freq_hz - p_multiple).abs() <= tol {
                claimed.push(p);
            }
            claimed.sort_by(|a, b| a.freq_hz.partial_cmp(&b.freq_hz).expect("finite"));

            model.fundamentals.push(d_hat);
            model.peaks_removed.push(claimed);
            break;
        }
    }
    model
}
