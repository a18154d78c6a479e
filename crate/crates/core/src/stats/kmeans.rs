//! 1-D k-means clustering of frequency lists.
//!
//! Groups resonance frequencies into `k` clusters with Lloyd's algorithm.
//! Initial centroids are chosen k-means++ style (distance-squared weighted
//! sampling), the best of several restarts by inertia wins, and clusters
//! that empty out mid-run are reseeded at the point currently farthest from
//! its centroid. Everything is driven by a seeded generator, so results are
//! bit-identical for identical inputs and seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Restarts used by [`kmeans_1d`].
pub const DEFAULT_RESTARTS: usize = 20;
/// Lloyd-iteration cap per restart used by [`kmeans_1d`].
pub const DEFAULT_ITERS: usize = 200;

/// Outcome of [`kmeans_1d`]: centroids in ascending order, one cluster
/// index per input point, and the total within-cluster squared distance.
#[derive(Debug, Clone, Serialize)]
pub struct KMeansResult {
    pub centroids: Vec<f64>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
}

/// Clusters `points` into `k` groups; see the module docs for the method.
/// Uses [`DEFAULT_RESTARTS`] restarts of at most [`DEFAULT_ITERS`]
/// iterations each.
///
/// # Errors
///
/// Returns a parameter error when `k` is zero, exceeds the number of
/// distinct points, or any point is non-finite.
pub fn kmeans_1d(points: &[f64], k: usize, seed: u64) -> Result<KMeansResult> {
    kmeans_1d_with(points, k, seed, DEFAULT_RESTARTS, DEFAULT_ITERS)
}

/// [`kmeans_1d`] with explicit restart and iteration budgets.
pub fn kmeans_1d_with(
    points: &[f64],
    k: usize,
    seed: u64,
    restarts: usize,
    iters: usize,
) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::parameter("k", "must be at least 1"));
    }
    if restarts == 0 {
        return Err(Error::parameter("restarts", "must be at least 1"));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::parameter("points", "contains a non-finite value"));
    }
    let mut distinct: Vec<f64> = points.to_vec();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if k > distinct.len() {
        return Err(Error::parameter(
            "k",
            format!(
                "asked for {k} clusters but only {} distinct points exist",
                distinct.len()
            ),
        ));
    }

    let mut best: Option<(Vec<f64>, Vec<usize>, f64)> = None;
    for restart in 0..restarts {
        // Independent, reproducible stream per restart so restarts could be
        // evaluated in any order (or concurrently) without changing the
        // result.
        let stream_seed = seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
        let (centroids, assignments, inertia, _) = lloyd_run(points, k, iters, &mut rng);
        let better = match &best {
            None => true,
            Some((_, _, best_inertia)) => inertia < *best_inertia,
        };
        if better {
            best = Some((centroids, assignments, inertia));
        }
    }
    let (centroids, assignments, inertia) = best.expect("at least one restart ran");
    Ok(sorted_result(centroids, assignments, inertia))
}

/// One seeded k-means++ initialization followed by Lloyd iterations.
/// Returns centroids (unsorted), assignments, final inertia, and the
/// inertia recorded after every update step (non-increasing).
pub(crate) fn lloyd_run(
    points: &[f64],
    k: usize,
    iters: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<usize>, f64, Vec<f64>) {
    let mut centroids = plus_plus_init(points, k, rng);
    let mut assignments = vec![0usize; points.len()];
    let mut history = Vec::new();
    for _ in 0..iters {
        let changed = assign(points, &centroids, &mut assignments);
        repair_empty_clusters(points, &mut centroids, &mut assignments);
        update_means(points, &assignments, &mut centroids);
        history.push(inertia_of(points, &centroids, &assignments));
        if !changed {
            break;
        }
    }
    let inertia = *history.last().expect("at least one iteration");
    (centroids, assignments, inertia, history)
}

/// k-means++ seeding: first centroid uniform over the points, each further
/// one drawn with probability proportional to its squared distance from
/// the nearest centroid chosen so far.
fn plus_plus_init(points: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())]);
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| (p - centroids[0]) * (p - centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        // total > 0 is guaranteed because k never exceeds the number of
        // distinct points, so some point is not yet a centroid.
        let mut target = rng.gen::<f64>() * total;
        let mut chosen = points.len() - 1;
        for (i, w) in d2.iter().enumerate() {
            target -= w;
            if target <= 0.0 {
                chosen = i;
                break;
            }
        }
        let c = points[chosen];
        centroids.push(c);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min((p - c) * (p - c));
        }
    }
    centroids
}

/// Nearest-centroid assignment (ties to the lower index). Returns whether
/// any point moved.
fn assign(points: &[f64], centroids: &[f64], assignments: &mut [usize]) -> bool {
    let mut changed = false;
    for (i, p) in points.iter().enumerate() {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (c_idx, c) in centroids.iter().enumerate() {
            let d = (p - c) * (p - c);
            if d < best_d {
                best_d = d;
                best = c_idx;
            }
        }
        if assignments[i] != best {
            assignments[i] = best;
            changed = true;
        }
    }
    changed
}

/// Gives every empty cluster the point farthest from its current centroid.
/// Moving that point only lowers the total cost, so monotonicity holds.
fn repair_empty_clusters(points: &[f64], centroids: &mut [f64], assignments: &mut [usize]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let farthest = points
            .iter()
            .enumerate()
            // Only points whose cluster keeps at least one other member may
            // move, or the repair would just relocate the hole.
            .filter(|(i, _)| counts[assignments[*i]] > 1)
            .max_by(|(i, p), (j, q)| {
                let dp = (*p - centroids[assignments[*i]]).abs();
                let dq = (*q - centroids[assignments[*j]]).abs();
                dp.total_cmp(&dq)
            })
            .map(|(i, _)| i)
            .expect("more points than clusters");
        centroids[empty] = points[farthest];
        assignments[farthest] = empty;
    }
}

fn update_means(points: &[f64], assignments: &[usize], centroids: &mut [f64]) {
    let k = centroids.len();
    let mut sums = vec![0.0f64; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        sums[a] += p;
        counts[a] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            centroids[c] = sums[c] / counts[c] as f64;
        }
    }
}

fn inertia_of(points: &[f64], centroids: &[f64], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| (p - centroids[a]) * (p - centroids[a]))
        .sum()
}

/// Reorders centroids ascending and remaps the assignments to match.
fn sorted_result(centroids: Vec<f64>, assignments: Vec<usize>, inertia: f64) -> KMeansResult {
    let mut order: Vec<usize> = (0..centroids.len()).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]));
    let mut rank = vec![0usize; centroids.len()];
    for (new_idx, &old_idx) in order.iter().enumerate() {
        rank[old_idx] = new_idx;
    }
    KMeansResult {
        centroids: order.iter().map(|&i| centroids[i]).collect(),
        assignments: assignments.into_iter().map(|a| rank[a]).collect(),
        inertia,
    }
}
