//! Lloyd's k-means with k-means++ seeding.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Independent runs with seeds `seed, seed+1, ...`; the lowest objective
    /// wins (earliest on ties).
    pub restarts: usize,
}

impl KMeansOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansOptions {
            k,
            seed,
            max_iter: 300,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances.
    pub objective: f64,
    /// Objective after each centroid update.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    /// Seed of the winning run.
    pub seed: u64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, lowest index on ties.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

pub fn wcss<P: AsRef<[f64]>>(points: &[P], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p.as_ref(), &centroids[a]))
        .sum()
}

fn plus_plus_init<P: AsRef<[f64]>>(points: &[P], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p.as_ref(), points[chosen[0]].as_ref()))
        .collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // every point coincides with a center already
            Err(_) => (0..n).find(|i| !chosen.contains(i)).unwrap(),
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p.as_ref(), points[next].as_ref()));
        }
    }
    chosen.into_iter().map(|i| points[i].as_ref().to_vec()).collect()
}

/// Moves the point farthest from its own centroid into each empty cluster,
/// as long as that point is not already sitting on its centroid.
fn reseed_empty<P: AsRef<[f64]>>(points: &[P], assignments: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for e in 0..k {
        if sizes[e] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            let a = assignments[i];
            if sizes[a] < 2 {
                continue;
            }
            let d = sq_dist(p.as_ref(), &centroids[a]);
            if d > 0.0 && far.is_none_or(|(_, fd)| d > fd) {
                far = Some((i, d));
            }
        }
        if let Some((i, _)) = far {
            sizes[assignments[i]] -= 1;
            sizes[e] += 1;
            assignments[i] = e;
            centroids[e] = points[i].as_ref().to_vec();
        }
    }
}

fn update_centroids<P: AsRef<[f64]>>(points: &[P], assignments: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = centroids[0].len();
    let mut sums = vec![vec![0.0; dim]; centroids.len()];
    let mut counts = vec![0usize; centroids.len()];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p.as_ref()) {
            *s += x;
        }
    }
    for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
        if n > 0 {
            *c = s.into_iter().map(|x| x / n as f64).collect();
        }
    }
}

fn lloyd<P: AsRef<[f64]>>(points: &[P], k: usize, max_iter: usize, seed: u64) -> KMeansResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p.as_ref(), &centroids)).collect();
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        reseed_empty(points, &mut assignments, &mut centroids);
        update_centroids(points, &assignments, &mut centroids);
        trace.push(wcss(points, &assignments, &centroids));
        let next: Vec<usize> = points.iter().map(|p| nearest(p.as_ref(), &centroids)).collect();
        if next == assignments {
            break;
        }
        assignments = next;
    }
    KMeansResult {
        objective: *trace.last().unwrap(),
        assignments,
        centroids,
        objective_trace: trace,
        iterations,
        seed,
    }
}

/// Partitions `points` into `k` clusters by Lloyd iterations from a
/// k-means++ start. Stops when assignments repeat or after `max_iter`
/// updates.
pub fn kmeans<P: AsRef<[f64]>>(points: &[P], opts: &KMeansOptions) -> Result<KMeansResult> {
    if opts.k == 0 || opts.max_iter == 0 {
        return Err(Error::InvalidK);
    }
    if points.len() < opts.k {
        return Err(Error::TooFewPoints {
            k: opts.k,
            points: points.len(),
        });
    }
    let dim = points[0].as_ref().len();
    for (index, p) in points.iter().enumerate() {
        if p.as_ref().len() != dim {
            return Err(Error::DimensionMismatch {
                index,
                expected: dim,
                found: p.as_ref().len(),
            });
        }
    }
    let mut best: Option<KMeansResult> = None;
    for r in 0..opts.restarts.max(1) {
        let run = lloyd(points, opts.k, opts.max_iter, opts.seed.wrapping_add(r as u64));
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}
