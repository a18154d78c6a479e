//! Comb notch filter: a recursive filter with evenly spaced zero-depth
//! notches at multiples of `fs/n`, unit gain between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// H(z) = gain * (1 - z^-n) / (1 - alpha * z^-n).
///
/// Zeros sit exactly on the unit circle at angles `2*pi*k/n`, poles at
/// radius `alpha^(1/n)` on the same angles, so `|H| = 0` at each notch
/// center and the passband peaks at exactly 1 midway between notches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombNotchFilter {
    /// Filter order: number of notches across one full sampling period.
    pub n: usize,
    /// Pole coefficient in (0, 1); larger means narrower notches.
    pub alpha: f64,
    /// Output scale normalizing the passband peak to unity.
    pub gain: f64,
    /// Sampling rate the filter was designed for, Hz.
    pub fs: f64,
}

impl CombNotchFilter {
    /// Magnitude response at `f_hz` for the design rate.
    pub fn magnitude_at(&self, f_hz: f64) -> f64 {
        let wn = 2.0 * std::f64::consts::PI * f_hz / self.fs * self.n as f64;
        let num = 2.0 * (wn / 2.0).sin().abs();
        let den = (1.0 - 2.0 * self.alpha * wn.cos() + self.alpha * self.alpha).sqrt();
        self.gain * num / den
    }

    /// Notch center frequencies in (0, fs/2].
    pub fn notch_frequencies(&self) -> Vec<f64> {
        let spacing = self.fs / self.n as f64;
        (1..=self.n / 2).map(|k| k as f64 * spacing).collect()
    }

    /// Radius of the filter poles; < 1 for every valid design.
    pub fn pole_radius(&self) -> f64 {
        self.alpha.powf(1.0 / self.n as f64)
    }
}

/// Designs a comb notch filter removing `d` Hz and its harmonics.
///
/// `n = round(fs/d)`; `bw` is the -3 dB notch width normalized to
/// Nyquist, so each notch's half-power points sit `bw*fs/4` Hz from its
/// center. Requires `bw < 1/n`, the range over which the pole
/// coefficient stays in (0, 1).
pub fn design_comb_notch(fs: f64, d: f64, bw: f64) -> Result<CombNotchFilter> {
    if !(fs > 0.0) || !(d > 0.0) {
        return Err(Error::parameter(
            "design_comb_notch",
            format!("fs and d must be positive, got fs={fs}, d={d}"),
        ));
    }
    let n_real = (fs / d).round();
    if n_real < 2.0 || n_real > fs / 2.0 {
        return Err(Error::parameter(
            "design_comb_notch",
            format!("order round(fs/d) out of range [2, fs/2]: fs={fs}, d={d}, n={n_real}"),
        ));
    }
    let n = n_real as usize;
    if !(bw > 0.0 && bw < 1.0 / n as f64) {
        return Err(Error::parameter(
            "design_comb_notch",
            format!(
                "bandwidth must lie in (0, 1/n) = (0, {}), got {bw}",
                1.0 / n as f64
            ),
        ));
    }
    let t = (n as f64 * std::f64::consts::PI * bw / 4.0).tan();
    let alpha = (1.0 - t) / (1.0 + t);
    let gain = (1.0 + alpha) / 2.0;
    Ok(CombNotchFilter { n, alpha, gain, fs })
}

/// Runs the comb filter over a signal with zero initial state:
/// `y[t] = gain*(x[t] - x[t-n]) + alpha*y[t-n]`. Output length equals
/// input length.
pub fn apply_filter(signal: &SampledSignal, filt: &CombNotchFilter) -> SampledSignal {
    let n = filt.n;
    let x = &signal.samples;
    let mut y = vec![0.0f64; x.len()];
    for t in 0..x.len() {
        let x_del = if t >= n { x[t - n] } else { 0.0 };
        let y_del = if t >= n { y[t - n] } else { 0.0 };
        y[t] = filt.gain * (x[t] - x_del) + filt.alpha * y_del;
    }
    SampledSignal {
        samples: y,
        fs: signal.fs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const FS: f64 = 44100.0;
    const BW: f64 = 6e-3;

    fn tone(f: f64, fs: f64, len: usize) -> SampledSignal {
        let samples: Vec<f64> = (0..len)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / fs).sin())
            .collect();
        SampledSignal::new(samples, fs).unwrap()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn reference_design_has_order_twenty() {
        let filt = design_comb_notch(FS, 2205.0, BW).unwrap();
        assert_eq!(filt.n, 20);
        assert!(filt.alpha > 0.0 && filt.alpha < 1.0);
        assert!(filt.pole_radius() < 1.0);
        let notches = filt.notch_frequencies();
        assert_eq!(notches.len(), 10);
        assert_abs_diff_eq!(notches[0], 2205.0, epsilon = 1e-9);
        assert_abs_diff_eq!(notches[9], 22050.0, epsilon = 1e-9);
    }

    #[test]
    fn notch_centers_are_nulled() {
        let filt = design_comb_notch(FS, 2205.0, BW).unwrap();
        for f in filt.notch_frequencies() {
            let mag = filt.magnitude_at(f);
            assert!(mag < 1e-3, "|H({f})| = {mag} not below -60 dB");
        }
    }

    #[test]
    fn half_power_points_sit_at_design_bandwidth() {
        let filt = design_comb_notch(FS, 2205.0, BW).unwrap();
        let half_width = BW * FS / 4.0;
        let target = std::f64::consts::FRAC_1_SQRT_2;
        for k in 1..=9 {
            let center = k as f64 * 2205.0;
            for f in [center - half_width, center + half_width] {
                let mag = filt.magnitude_at(f);
                assert!(
                    (mag - target).abs() <= 0.01 * target,
                    "|H({f})| = {mag}, expected {target} within 1%"
                );
            }
        }
    }

    #[test]
    fn passband_midpoints_are_unity() {
        let filt = design_comb_notch(FS, 2205.0, BW).unwrap();
        for k in 0..10 {
            let mid = (k as f64 + 0.5) * 2205.0;
            let db = 20.0 * filt.magnitude_at(mid).log10();
            assert!(db.abs() <= 0.2, "midpoint {mid} Hz off unity by {db} dB");
        }
    }

    #[test]
    fn design_rejects_out_of_range_orders() {
        assert!(design_comb_notch(FS, 30_000.0, BW).is_err(), "n = 1");
        assert!(design_comb_notch(FS, 1.5, BW).is_err(), "n > fs/2");
        assert!(design_comb_notch(FS, 2205.0, 0.0).is_err());
        assert!(
            design_comb_notch(FS, 2205.0, 1.0 / 20.0).is_err(),
            "bw >= 1/n"
        );
        assert!(design_comb_notch(FS, -5.0, BW).is_err());
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let filt = design_comb_notch(FS, 2205.0, BW).unwrap();
        let out = apply_filter(&SampledSignal::zeros(1000, FS).unwrap(), &filt);
        assert_eq!(out.len(), 1000);
        assert!(out.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tone_at_notch_center_is_removed() {
        let filt = design_comb_notch(FS, 2205.0, BW).unwrap();
        let input = tone(2205.0, FS, 44100);
        let out = apply_filter(&input, &filt);
        // Allow the recursion to reach steady state before measuring.
        let discard = (10.0 / (BW * FS / 2.0) * FS) as usize;
        let residual = rms(&out.samples[discard..]);
        let reference = rms(&input.samples[discard..]);
        let rel_db = 20.0 * (residual / reference).log10();
        assert!(rel_db <= -40.0, "residual only {rel_db:.1} dB down");
    }

    #[test]
    fn tone_between_notches_passes_unchanged() {
        let filt = design_comb_notch(FS, 2205.0, BW).unwrap();
        let f_mid = 1.5 * 2205.0;
        let input = tone(f_mid, FS, 44100);
        let out = apply_filter(&input, &filt);
        let discard = (10.0 / (BW * FS / 2.0) * FS) as usize;
        let ratio_db =
            20.0 * (rms(&out.samples[discard..]) / rms(&input.samples[discard..])).log10();
        assert!(
            ratio_db.abs() <= 0.2,
            "passband tone changed by {ratio_db} dB"
        );
    }

    #[test]
    fn output_length_matches_input() {
        let filt = design_comb_notch(FS, 530.0, BW).unwrap();
        for len in [1usize, 5, 83, 44100] {
            let sig = tone(777.0, FS, len);
            assert_eq!(apply_filter(&sig, &filt).len(), len);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        // Any in-range (d, bw) pair yields a stable design with deep
        // notches, half-power points at the design width, and unit
        // passband peaks.
        #[test]
        fn random_designs_meet_magnitude_spec(
            d in 150.0f64..5000.0,
            bw_frac in 0.05f64..0.9,
        ) {
            let n = (FS / d).round();
            let bw = bw_frac / n;
            let filt = design_comb_notch(FS, d, bw).unwrap();
            prop_assert!(filt.alpha > 0.0 && filt.alpha < 1.0);
            prop_assert!(filt.pole_radius() < 1.0);

            let spacing = FS / filt.n as f64;
            let half_width = bw * FS / 4.0;
            for k in 1..=filt.n / 2 {
                let center = k as f64 * spacing;
                prop_assert!(filt.magnitude_at(center) < 1e-6);
                if center + half_width < FS / 2.0 {
                    for f in [center - half_width, center + half_width] {
                        let mag = filt.magnitude_at(f);
                        let target = std::f64::consts::FRAC_1_SQRT_2;
                        prop_assert!((mag - target).abs() <= 0.01 * target,
                            "d={d} bw={bw}: |H({f})|={mag}");
                    }
                }
                let mid = (k as f64 - 0.5) * spacing;
                let db = 20.0 * filt.magnitude_at(mid).log10();
                prop_assert!(db.abs() <= 0.2, "d={d} bw={bw}: midpoint {mid} off {db} dB");
            }
        }
    }
}
