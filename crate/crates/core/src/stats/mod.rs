//! Statistical comparison of formant samples and 1-D frequency clustering.
//!
//! Two tools live here:
//!
//! * [`welch_t_test`] — the unequal-variance two-sample t-test with
//!   Smith–Satterthwaite degrees of freedom, for deciding whether two sets
//!   of formant measurements share a mean. [`reject_h0`] applies the
//!   strict confidence threshold convention.
//! * [`kmeans_1d`] — seeded, restarted k-means on scalar frequency lists,
//!   for grouping resonances into bands.

mod kmeans;
mod special;
mod welch;

pub use kmeans::{kmeans_1d, kmeans_1d_with, KMeansResult, DEFAULT_ITERS, DEFAULT_RESTARTS};
pub use welch::{reject_h0, welch_t_test, WelchTestResult, T_SENTINEL};
