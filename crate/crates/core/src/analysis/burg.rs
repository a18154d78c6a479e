//! All-pole spectral envelope estimation by Burg's lattice method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// An all-pole (autoregressive) model of a signal's spectral envelope.
///
/// The envelope magnitude at angular frequency `w` is
/// `sqrt(gain) / |A(e^{jw})|` where `A` is the prediction-error polynomial
/// `1 + a[1] z^-1 + ... + a[p] z^-p`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralEnvelope {
    ar_coeffs: Vec<f64>,
    gain: f64,
    fs_model: f64,
}

impl SpectralEnvelope {
    /// Builds an envelope from explicit coefficients, validating that the
    /// polynomial has a leading 1, a positive gain, and all roots strictly
    /// inside the unit circle.
    pub fn new(ar_coeffs: Vec<f64>, gain: f64, fs_model: f64) -> Result<Self> {
        if !(fs_model > 0.0) || !fs_model.is_finite() {
            return Err(Error::parameter("fs_model", "must be positive and finite"));
        }
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(Error::parameter("gain", "must be positive and finite"));
        }
        if ar_coeffs.first() != Some(&1.0) {
            return Err(Error::parameter(
                "ar_coeffs",
                "polynomial must start with a leading 1",
            ));
        }
        if ar_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::parameter("ar_coeffs", "must be finite"));
        }
        if !polynomial_is_stable(&ar_coeffs) {
            return Err(Error::parameter(
                "ar_coeffs",
                "polynomial has roots on or outside the unit circle",
            ));
        }
        Ok(Self {
            ar_coeffs,
            gain,
            fs_model,
        })
    }

    /// Prediction-error polynomial coefficients, starting with 1.
    pub fn ar_coeffs(&self) -> &[f64] {
        &self.ar_coeffs
    }

    /// Model order (degree of the prediction-error polynomial).
    pub fn order(&self) -> usize {
        self.ar_coeffs.len() - 1
    }

    /// Final prediction-error power of the fit.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Sample rate the model was fitted at, in Hz.
    pub fn fs_model(&self) -> f64 {
        self.fs_model
    }

    /// Envelope power level in dB at `freq_hz`.
    ///
    /// Only level differences between frequencies are meaningful; the
    /// absolute offset depends on the model gain.
    pub fn power_db_at(&self, freq_hz: f64) -> Result<f64> {
        if !(0.0..=self.fs_model / 2.0).contains(&freq_hz) {
            return Err(Error::parameter(
                "freq_hz",
                "outside the model band [0, fs_model/2]",
            ));
        }
        let w = 2.0 * std::f64::consts::PI * freq_hz / self.fs_model;
        let (mut re, mut im) = (0.0, 0.0);
        for (k, &c) in self.ar_coeffs.iter().enumerate() {
            let phase = -(k as f64) * w;
            re += c * phase.cos();
            im += c * phase.sin();
        }
        let denom_sq = re * re + im * im;
        Ok(10.0 * self.gain.log10() - 10.0 * denom_sq.log10())
    }
}

/// Schur-Cohn stability test: a monic polynomial in z^-1 has all roots
/// strictly inside the unit circle iff the step-down recursion yields
/// reflection coefficients with magnitude < 1 at every stage.
fn polynomial_is_stable(coeffs: &[f64]) -> bool {
    let mut a: Vec<f64> = coeffs.to_vec();
    while a.len() > 1 {
        let p = a.len() - 1;
        let k = a[p];
        if k.abs() >= 1.0 {
            return false;
        }
        let denom = 1.0 - k * k;
        let prev: Vec<f64> = (0..p).map(|i| (a[i] - k * a[p - i]) / denom).collect();
        a = prev;
    }
    true
}

/// Fits an order-`order` all-pole envelope by Burg's method.
///
/// The mean is removed internally. Burg's lattice update minimizes the sum
/// of forward and backward prediction-error power at each stage and keeps
/// every reflection coefficient strictly inside (-1, 1), so the returned
/// model is always stable. The gain is the final prediction-error power.
pub fn burg_ar(signal: &SampledSignal, order: usize) -> Result<SpectralEnvelope> {
    let n = signal.len();
    if n <= 2 * order {
        return Err(Error::InsufficientData(format!(
            "Burg fit of order {order} needs more than {} samples, got {n}",
            2 * order
        )));
    }
    if signal.samples.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::DegenerateInput(
            "constant signal has no spectral envelope".into(),
        ));
    }
    let mean = signal.samples.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = signal.samples.iter().map(|s| s - mean).collect();
    let power = x.iter().map(|v| v * v).sum::<f64>() / n as f64;

    let mut a = vec![1.0];
    let mut gain = power;
    // Forward errors start at x[1..], backward errors at x[..n-1].
    let mut fwd = x[1..].to_vec();
    let mut bwd = x[..n - 1].to_vec();

    for m in 0..order {
        let num: f64 = -2.0 * fwd.iter().zip(&bwd).map(|(f, b)| f * b).sum::<f64>();
        let den: f64 =
            fwd.iter().map(|f| f * f).sum::<f64>() + bwd.iter().map(|b| b * b).sum::<f64>();
        // Cauchy-Schwarz bounds |num| <= den; the clamp guards against
        // the rounding of near-perfectly-predictable inputs landing a
        // reflection coefficient exactly on +/-1.
        let k = if den == 0.0 {
            0.0
        } else {
            (num / den).clamp(-1.0 + 1e-12, 1.0 - 1e-12)
        };

        // Levinson update: a' = [a, 0] + k · reverse([a, 0]).
        a.push(0.0);
        let len = a.len();
        let old = a.clone();
        for i in 0..len {
            a[i] = old[i] + k * old[len - 1 - i];
        }
        gain *= 1.0 - k * k;

        if m + 1 < order {
            let steps = fwd.len() - 1;
            let mut fwd_next = Vec::with_capacity(steps);
            let mut bwd_next = Vec::with_capacity(steps);
            for i in 0..steps {
                fwd_next.push(fwd[i + 1] + k * bwd[i + 1]);
                bwd_next.push(bwd[i] + k * fwd[i]);
            }
            fwd = fwd_next;
            bwd = bwd_next;
        }
    }

    SpectralEnvelope::new(a, gain.max(f64::MIN_POSITIVE), signal.fs)
}
