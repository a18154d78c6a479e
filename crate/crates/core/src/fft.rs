//! Thin wrappers over [`rustfft`] with the normalization conventions used
//! throughout this crate: the forward transform is unnormalized, the
//! inverse divides by the length, so `inverse(forward(x)) == x`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Cached forward/inverse plans for one transform length.
pub(crate) struct FftPlan {
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
    n: usize,
}

impl FftPlan {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPlan {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            n,
        }
    }

    /// Unnormalized DFT of a real frame. Panics if the frame length does
    /// not match the plan (internal misuse, not a data error).
    pub(crate) fn forward_real(&self, frame: &[f64]) -> Vec<Complex<f64>> {
        assert_eq!(frame.len(), self.n, "frame length does not match FFT plan");
        let mut buf: Vec<Complex<f64>> = frame.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse DFT normalized by 1/n. Returns the full complex result so
    /// callers can check how much energy leaked into the imaginary part.
    pub(crate) fn inverse(&self, spectrum: &[Complex<f64>]) -> Vec<Complex<f64>> {
        assert_eq!(
            spectrum.len(),
            self.n,
            "spectrum length does not match FFT plan"
        );
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for v in &mut buf {
            *v *= scale;
        }
        buf
    }
}

/// One-shot unnormalized DFT of a real signal of arbitrary length.
pub(crate) fn fft_real(x: &[f64]) -> Vec<Complex<f64>> {
    FftPlan::new(x.len()).forward_real(x)
}

/// One-shot inverse DFT (normalized by 1/n).
pub(crate) fn ifft(spectrum: &[Complex<f64>]) -> Vec<Complex<f64>> {
    FftPlan::new(spectrum.len()).inverse(spectrum)
}

/// Periodic Hann window: `w[k] = 0.5 * (1 - cos(2*pi*k/n))`, `k = 0..n-1`.
///
/// The periodic variant makes half-overlapped frames sum to a constant,
/// which the overlap-add reconstruction in the subtraction stage relies on.
pub(crate) fn hann_periodic(n: usize) -> Vec<f64> {
    assert!(n > 0, "window length must be positive");
    (0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Direct O(n^2) DFT used as an independent oracle.
    fn dft_naive(x: &[f64]) -> Vec<Complex<f64>> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex::new(0.0, 0.0);
                for (t, &v) in x.iter().enumerate() {
                    let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                    acc += Complex::new(ang.cos(), ang.sin()) * v;
                }
                acc
            })
            .collect()
    }

    #[test]
    fn forward_matches_naive_dft() {
        let x = [1.0, 2.0, -0.5, 0.25, 3.0, -1.0, 0.0, 0.125, 7.0];
        let fast = fft_real(&x);
        let slow = dft_naive(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-10);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        let x: Vec<f64> = (0..257)
            .map(|i| ((i * 37) % 101) as f64 / 50.0 - 1.0)
            .collect();
        let back = ifft(&fft_real(&x));
        for (orig, got) in x.iter().zip(&back) {
            assert_abs_diff_eq!(got.re, *orig, epsilon = 1e-10);
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn parseval_holds_for_unnormalized_forward() {
        let x: Vec<f64> = (0..64).map(|i| ((i as f64) * 0.7).sin()).collect();
        let spec = fft_real(&x);
        let time_energy: f64 = x.iter().map(|v| v * v).sum();
        let freq_energy: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() / x.len() as f64;
        assert_abs_diff_eq!(time_energy, freq_energy, epsilon = 1e-9 * time_energy);
    }

    #[test]
    fn hann_periodic_window_sums() {
        // For the periodic Hann window, sum(w) = n/2 and sum(w^2) = 3n/8
        // exactly (geometric sums of the cosine terms vanish).
        for n in [8usize, 256, 4096] {
            let w = hann_periodic(n);
            let s1: f64 = w.iter().sum();
            let s2: f64 = w.iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(s1, n as f64 / 2.0, epsilon = 1e-9);
            assert_abs_diff_eq!(s2, 3.0 * n as f64 / 8.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn hann_periodic_half_overlap_is_constant() {
        // w[k] + w[k + n/2] == 1 for all k, the property overlap-add needs.
        let n = 1024;
        let w = hann_periodic(n);
        for k in 0..n / 2 {
            assert_abs_diff_eq!(w[k] + w[k + n / 2], 1.0, epsilon = 1e-12);
        }
    }
}
