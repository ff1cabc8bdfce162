//! Lloyd's algorithm with k-means++ seeding and best-of-`restarts` selection.
//!
//! Restart `i` draws from `ChaCha8Rng::seed_from_u64(seed)` switched to stream
//! `i`, so every restart is reproducible on its own and independent of how
//! many restarts run in total.

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clustering::Clustering;
use crate::error::{Error, Result};

pub const DEFAULT_RESTARTS: usize = 10;
pub const MAX_ITERATIONS: usize = 300;

#[derive(Clone, Debug)]
pub struct KMeansResult {
    pub clustering: Clustering,
    /// `r x d` matrix of cluster means.
    pub centroids: Array2<f64>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    pub iterations: usize,
}

/// Generator for restart number `restart` of a run seeded with `seed`.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Best of `restarts` seeded Lloyd runs by inertia; ties keep the earlier restart.
pub fn kmeans(data: &Array2<f64>, r: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    validate(data, r)?;
    let mut best: Option<KMeansResult> = None;
    for restart in 0..restarts.max(1) {
        let result = kmeans_single(data, r, seed, restart)?;
        if best.as_ref().is_none_or(|b| result.inertia < b.inertia) {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// The single Lloyd run that [`kmeans`] performs as restart `restart`.
pub fn kmeans_single(data: &Array2<f64>, r: usize, seed: u64, restart: usize) -> Result<KMeansResult> {
    validate(data, r)?;
    let mut rng = restart_rng(seed, restart);
    Ok(lloyd(data, r, &mut rng, MAX_ITERATIONS).0)
}

fn validate(data: &Array2<f64>, r: usize) -> Result<()> {
    let m = data.nrows();
    if r > m {
        return Err(Error::TooManyClusters { clusters: r, points: m });
    }
    if r == 0 {
        return Err(Error::InvalidArgument("need at least one cluster".into()));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("k-means input contains non-finite values".into()));
    }
    Ok(())
}

fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn seed_centroids(data: &Array2<f64>, r: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let m = data.nrows();
    let mut centroids = Array2::zeros((r, data.ncols()));
    let first = rng.random_range(0..m);
    centroids.row_mut(0).assign(&data.row(first));
    let mut closest: Vec<f64> = (0..m)
        .map(|j| squared_distance(data.row(j), centroids.row(0)))
        .collect();
    for c in 1..r {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = m - 1;
            for (j, &d) in closest.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = j;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..m)
        };
        centroids.row_mut(c).assign(&data.row(pick));
        for (j, d) in closest.iter_mut().enumerate() {
            *d = d.min(squared_distance(data.row(j), centroids.row(c)));
        }
    }
    centroids
}

/// Nearest centroid per point (ties to the lower index) and the squared distance.
fn assign(data: &Array2<f64>, centroids: &Array2<f64>) -> Vec<(usize, f64)> {
    (0..data.nrows())
        .into_par_iter()
        .map(|j| {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in centroids.rows().into_iter().enumerate() {
                let d = squared_distance(data.row(j), centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .collect()
}

fn means(data: &Array2<f64>, labels: &[usize], r: usize) -> Array2<f64> {
    let mut sums = Array2::zeros((r, data.ncols()));
    let mut counts = vec![0usize; r];
    for (j, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        let mut row = sums.row_mut(c);
        row += &data.row(j);
    }
    for (c, mut row) in sums.rows_mut().into_iter().enumerate() {
        if counts[c] > 0 {
            row /= counts[c] as f64;
        }
    }
    sums
}

fn inertia_of(data: &Array2<f64>, labels: &[usize], centroids: &Array2<f64>) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(j, &c)| squared_distance(data.row(j), centroids.row(c)))
        .sum()
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair_empty(labels: &mut [usize], distances: &mut [f64], r: usize) {
    let mut counts = vec![0usize; r];
    for &c in labels.iter() {
        counts[c] += 1;
    }
    for empty in 0..r {
        if counts[empty] > 0 {
            continue;
        }
        let mut far: Option<usize> = None;
        for j in 0..labels.len() {
            if counts[labels[j]] > 1 && far.is_none_or(|f| distances[j] > distances[f]) {
                far = Some(j);
            }
        }
        let Some(j) = far else { break };
        counts[labels[j]] -= 1;
        counts[empty] += 1;
        labels[j] = empty;
        distances[j] = 0.0;
    }
}

/// One seeded run; also returns the inertia after every centroid update.
pub(crate) fn lloyd(
    data: &Array2<f64>,
    r: usize,
    rng: &mut ChaCha8Rng,
    max_iterations: usize,
) -> (KMeansResult, Vec<f64>) {
    let mut centroids = seed_centroids(data, r, rng);
    let (mut labels, mut distances): (Vec<usize>, Vec<f64>) = assign(data, &centroids).into_iter().unzip();
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        repair_empty(&mut labels, &mut distances, r);
        centroids = means(data, &labels, r);
        history.push(inertia_of(data, &labels, &centroids));
        iterations += 1;
        let (next, next_distances): (Vec<usize>, Vec<f64>) = assign(data, &centroids).into_iter().unzip();
        if next == labels || iterations >= max_iterations {
            break;
        }
        labels = next;
        distances = next_distances;
    }
    let inertia = inertia_of(data, &labels, &centroids);
    let clustering = Clustering::with_clusters(labels.into_iter().map(Some).collect(), r)
        .expect("labels below r");
    (
        KMeansResult {
            clustering,
            centroids,
            inertia,
            iterations,
        },
        history,
    )
}

/// `tr(Y^T D D^T Y (Y^T Y)^{-1})`: the sum over clusters of `||sum of members||^2 / size`.
/// Noise points do not contribute.
pub fn trace_objective(data: &Array2<f64>, clustering: &Clustering) -> Result<f64> {
    if clustering.len() != data.nrows() {
        return Err(Error::DimensionMismatch {
            expected: data.nrows(),
            found: clustering.len(),
        });
    }
    let mut sums = Array2::<f64>::zeros((clustering.n_clusters(), data.ncols()));
    let mut counts = vec![0usize; clustering.n_clusters()];
    for (j, label) in clustering.labels().iter().enumerate() {
        if let Some(c) = *label {
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += &data.row(j);
        }
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyCluster(empty));
    }
    Ok(sums
        .rows()
        .into_iter()
        .zip(&counts)
        .map(|(s, &n)| s.dot(&s) / n as f64)
        .sum())
}
