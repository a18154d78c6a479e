//! Unequal-variance (Welch) two-sample t-test.
//!
//! Compares two formant samples without assuming equal variances. The test
//! statistic divides the mean difference by the combined standard error;
//! the degrees of freedom come from the Smith–Satterthwaite approximation,
//! so they are generally non-integer.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::special::student_t_two_sided_p;

/// When both sample variances vanish but the means differ, the test
/// statistic is formally infinite; it is reported as this sentinel instead,
/// with the sign of the mean difference and `degenerate` set.
pub const T_SENTINEL: f64 = 1e12;

/// Outcome of [`welch_t_test`].
#[derive(Debug, Clone, Serialize)]
pub struct WelchTestResult {
    /// Test statistic: positive when sample `a` has the larger mean.
    pub t_stat: f64,
    /// Smith–Satterthwaite degrees of freedom (non-integer in general).
    pub df: f64,
    /// Two-sided tail probability P(|T| >= |t|).
    pub p_two_sided: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
    /// True when both sample variances are zero, in which case `t_stat`,
    /// `df`, and `p_two_sided` follow the documented conventions rather
    /// than the usual formulas.
    pub degenerate: bool,
}

impl WelchTestResult {
    /// One-sided tail probability in the observed direction (half the
    /// two-sided value). Both conventions are reported so callers can pick
    /// either reading.
    pub fn p_one_sided(&self) -> f64 {
        0.5 * self.p_two_sided
    }

    /// Confidence that the two samples have different means: 1 minus the
    /// two-sided p-value.
    pub fn confidence(&self) -> f64 {
        1.0 - self.p_two_sided
    }
}

fn mean_and_unbiased_variance(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let ss = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Welch's t-test for unequal variances.
///
/// `t = (mean_a - mean_b) / sqrt(var_a/n_a + var_b/n_b)` with unbiased
/// sample variances; degrees of freedom by Smith–Satterthwaite; two-sided
/// p-value from the Student-t distribution via the regularized incomplete
/// beta function (relative accuracy well under 1e-10).
///
/// Degenerate data (both variances exactly zero) yields a flagged result
/// rather than an error: equal means report `t = 0, p = 1`; differing means
/// report `t = ±`[`T_SENTINEL`]` , p = 0`. In both cases `df` falls back to
/// the conservative `min(n_a, n_b) - 1`.
///
/// # Errors
///
/// Returns a degenerate-input error when either sample has fewer than two
/// values, or a parameter error when any value is non-finite.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "the t-test needs at least two values per sample (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    for (name, sample) in [("a", a), ("b", b)] {
        if sample.iter().any(|x| !x.is_finite()) {
            return Err(Error::parameter(
                "sample",
                format!("sample {name} contains a non-finite value"),
            ));
        }
    }

    let n_a = a.len();
    let n_b = b.len();
    let (mean_a, var_a) = mean_and_unbiased_variance(a);
    let (mean_b, var_b) = mean_and_unbiased_variance(b);

    if var_a == 0.0 && var_b == 0.0 {
        let df = (n_a.min(n_b) - 1) as f64;
        let (t_stat, p_two_sided) = if mean_a == mean_b {
            (0.0, 1.0)
        } else {
            (T_SENTINEL.copysign(mean_a - mean_b), 0.0)
        };
        return Ok(WelchTestResult {
            t_stat,
            df,
            p_two_sided,
            mean_a,
            mean_b,
            n_a,
            n_b,
            degenerate: true,
        });
    }

    let se_a = var_a / n_a as f64;
    let se_b = var_b / n_b as f64;
    let se = (se_a + se_b).sqrt();
    let t_stat = (mean_a - mean_b) / se;
    let df = (se_a + se_b) * (se_a + se_b)
        / (se_a * se_a / (n_a as f64 - 1.0) + se_b * se_b / (n_b as f64 - 1.0));
    let p_two_sided = student_t_two_sided_p(t_stat, df);

    Ok(WelchTestResult {
        t_stat,
        df,
        p_two_sided,
        mean_a,
        mean_b,
        n_a,
        n_b,
        degenerate: false,
    })
}

/// Decision rule: reject the equal-means hypothesis iff the confidence
/// `1 - p_two_sided` strictly exceeds `p_threshold` (conventionally 0.95).
pub fn reject_h0(result: &WelchTestResult, p_threshold: f64) -> bool {
    result.confidence() > p_threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_samples_accept_the_null() {
        let sample = [3.0, 5.0, 9.0, 11.0];
        let result = welch_t_test(&sample, &sample).unwrap();
        assert_eq!(result.t_stat, 0.0);
        assert_abs_diff_eq!(result.p_two_sided, 1.0, epsilon = 1e-12);
        assert!(!result.degenerate);
        assert!(!reject_h0(&result, 0.95));
    }

    #[test]
    fn hand_computed_example_is_reproduced() {
        // Both samples have variance 2.5 and n = 5, so the standard error
        // is 1 and the df formula collapses to 8; the mean difference is -1.
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let result = welch_t_test(&a, &b).unwrap();
        assert_abs_diff_eq!(result.t_stat, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(result.df, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(result.p_two_sided, 0.3466, epsilon = 5e-4);
        assert_eq!((result.n_a, result.n_b), (5, 5));
        assert_abs_diff_eq!(result.mean_a, 3.0);
        assert_abs_diff_eq!(result.mean_b, 4.0);
    }

    #[test]
    fn swapping_the_samples_negates_t_only() {
        let a = [4.2, 7.0, 1.3, 9.9, 5.5];
        let b = [2.0, 2.5, 8.8];
        let ab = welch_t_test(&a, &b).unwrap();
        let ba = welch_t_test(&b, &a).unwrap();
        assert_abs_diff_eq!(ab.t_stat, -ba.t_stat, epsilon = 1e-12);
        assert_abs_diff_eq!(ab.df, ba.df, epsilon = 1e-12);
        assert_abs_diff_eq!(ab.p_two_sided, ba.p_two_sided, epsilon = 1e-12);
    }

    #[test]
    fn zero_variance_with_equal_means_is_flagged_neutral() {
        let a = [5.0, 5.0, 5.0];
        let b = [5.0, 5.0];
        let result = welch_t_test(&a, &b).unwrap();
        assert!(result.degenerate);
        assert_eq!(result.t_stat, 0.0);
        assert_eq!(result.p_two_sided, 1.0);
        assert!(result.df > 0.0);
        assert!(!reject_h0(&result, 0.95));
    }

    #[test]
    fn zero_variance_with_differing_means_is_flagged_decisive() {
        let a = [5.0, 5.0, 5.0];
        let b = [2.0, 2.0];
        let result = welch_t_test(&a, &b).unwrap();
        assert!(result.degenerate);
        assert_eq!(result.t_stat, T_SENTINEL);
        assert_eq!(result.p_two_sided, 0.0);
        assert!(reject_h0(&result, 0.95));
        // Sign follows the mean difference.
        let flipped = welch_t_test(&b, &a).unwrap();
        assert_eq!(flipped.t_stat, -T_SENTINEL);
    }

    #[test]
    fn tiny_samples_are_rejected() {
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
        assert!(welch_t_test(&[1.0, 2.0], &[]).is_err());
        assert!(welch_t_test(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rejection_threshold_is_strict() {
        let result = WelchTestResult {
            t_stat: 2.0,
            df: 10.0,
            p_two_sided: 0.05,
            mean_a: 0.0,
            mean_b: 1.0,
            n_a: 5,
            n_b: 5,
            degenerate: false,
        };
        // Confidence is exactly 0.95: the boundary is not a rejection.
        assert!(!reject_h0(&result, 0.95));
        let stronger = WelchTestResult {
            p_two_sided: 0.01,
            ..result
        };
        assert!(reject_h0(&stronger, 0.95));
        let weak = WelchTestResult {
            p_two_sided: 0.5,
            ..stronger
        };
        assert!(!reject_h0(&weak, 0.95));
    }

    #[test]
    fn degrees_of_freedom_stay_in_their_theoretical_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n_a = rng.gen_range(2..30);
            let n_b = rng.gen_range(2..30);
            let a: Vec<f64> = (0..n_a).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let b: Vec<f64> = (0..n_b).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let result = welch_t_test(&a, &b).unwrap();
            if result.degenerate {
                continue;
            }
            let lower = (n_a.min(n_b) - 1) as f64;
            let upper = (n_a + n_b - 2) as f64;
            assert!(
                result.df >= lower - 1e-9 && result.df <= upper + 1e-9,
                "df {} outside [{lower}, {upper}] for n_a={n_a}, n_b={n_b}",
                result.df
            );
        }
    }

    proptest! {
        #[test]
        fn shifting_both_samples_changes_nothing(
            a in proptest::collection::vec(-50.0f64..50.0, 2..12),
            b in proptest::collection::vec(-50.0f64..50.0, 2..12),
            shift in -1000.0f64..1000.0,
        ) {
            let base = welch_t_test(&a, &b).unwrap();
            prop_assume!(!base.degenerate);
            let a2: Vec<f64> = a.iter().map(|x| x + shift).collect();
            let b2: Vec<f64> = b.iter().map(|x| x + shift).collect();
            let shifted = welch_t_test(&a2, &b2).unwrap();
            // Shifting loses a little precision to catastrophic cancellation
            // in the variances, so the tolerance is loose but still tight
            // relative to any decision threshold.
            prop_assert!((base.t_stat - shifted.t_stat).abs() < 1e-6 * (1.0 + base.t_stat.abs()));
            prop_assert!((base.df - shifted.df).abs() < 1e-6 * base.df);
            prop_assert!((base.p_two_sided - shifted.p_two_sided).abs() < 1e-6);
        }

        #[test]
        fn scaling_both_samples_changes_nothing(
            a in proptest::collection::vec(-50.0f64..50.0, 2..12),
            b in proptest::collection::vec(-50.0f64..50.0, 2..12),
            scale in prop_oneof![-8.0f64..-0.125, 0.125f64..8.0],
        ) {
            let base = welch_t_test(&a, &b).unwrap();
            prop_assume!(!base.degenerate);
            let a2: Vec<f64> = a.iter().map(|x| x * scale).collect();
            let b2: Vec<f64> = b.iter().map(|x| x * scale).collect();
            let scaled = welch_t_test(&a2, &b2).unwrap();
            prop_assert!((base.t_stat.abs() - scaled.t_stat.abs()).abs() < 1e-9 * (1.0 + base.t_stat.abs()));
            prop_assert!((base.df - scaled.df).abs() < 1e-9 * base.df);
            prop_assert!((base.p_two_sided - scaled.p_two_sided).abs() < 1e-9);
        }
    }
}
