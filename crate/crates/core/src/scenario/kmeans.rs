//! Lloyd k-means with k-means++ seeding for scenario reduction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CoreError;

const MAX_LLOYD_ITERATIONS: usize = 300;
const RESTARTS: usize = 10;

/// Reduces paths to `k` centroids with probabilities proportional to cluster
/// sizes. Lloyd iterations run until the assignment reaches a fixpoint or
/// 300 rounds; the best of ten k-means++ restarts wins (Lloyd alone can
/// settle into poor local optima on small instances). An emptied cluster is
/// re-seeded at the point farthest from its centroid; this fails only when
/// there are fewer than `k` distinct paths.
pub fn reduce_kmeans(
    paths: &[Vec<f64>],
    k: usize,
    seed: u64,
) -> Result<Vec<(f64, Vec<f64>)>, CoreError> {
    let n = paths.len();
    if k == 0 {
        return Err(CoreError::Invalid("k must be >= 1".into()));
    }
    if k > n {
        return Err(CoreError::Invalid(format!(
            "k exceeds path count ({k} > {n})"
        )));
    }
    let dim = paths[0].len();
    if paths.iter().any(|p| p.len() != dim) {
        return Err(CoreError::Invalid("ragged path matrix".into()));
    }
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let centroids = lloyd_run(paths, k, &mut rng)?;
        let cost: f64 = paths
            .iter()
            .map(|p| sq_dist(p, &centroids[nearest(p, &centroids)]))
            .sum();
        match &best {
            Some((bc, _)) if cost >= bc - 1e-12 => {}
            _ => best = Some((cost, centroids)),
        }
    }
    let (_, centroids) = best.expect("at least one restart");
    let mut counts = vec![0usize; k];
    for p in paths {
        counts[nearest(p, &centroids)] += 1;
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(CoreError::Invalid(
            "empty cluster persists; fewer distinct paths than k".into(),
        ));
    }
    Ok(centroids
        .into_iter()
        .zip(counts)
        .map(|(c, cnt)| (cnt as f64 / n as f64, c))
        .collect())
}

/// One seeded Lloyd run; returns the converged centroids.
fn lloyd_run(
    paths: &[Vec<f64>],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>, CoreError> {
    let n = paths.len();
    let dim = paths[0].len();
    let mut centroids = seed_plus_plus(paths, k, rng);
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let next: Vec<usize> = paths.iter().map(|p| nearest(p, &centroids)).collect();
        let fixpoint = next == assignment;
        assignment = next;
        // recompute centroids; resolve empty clusters at the farthest point
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0; dim]; k];
        for (p, &c) in paths.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut reseeded = false;
        for c in 0..k {
            if counts[c] == 0 {
                let far = farthest_point(paths, &centroids, &assignment)?;
                centroids[c] = paths[far].clone();
                reseeded = true;
            } else {
                for (s, cv) in sums[c].iter().zip(centroids[c].iter_mut()) {
                    *cv = s / counts[c] as f64;
                }
            }
        }
        if fixpoint && !reseeded {
            break;
        }
    }
    Ok(centroids)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(p, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn farthest_point(
    paths: &[Vec<f64>],
    centroids: &[Vec<f64>],
    assignment: &[usize],
) -> Result<usize, CoreError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in paths.iter().enumerate() {
        let d = sq_dist(p, &centroids[assignment[i]]);
        match best {
            Some((_, bd)) if d <= bd => {}
            _ => best = Some((i, d)),
        }
    }
    match best {
        Some((i, d)) if d > 0.0 => Ok(i),
        _ => Err(CoreError::Invalid(
            "cannot re-seed an empty cluster: fewer distinct paths than k".into(),
        )),
    }
}

/// k-means++: first centroid uniform, the rest sampled proportional to the
/// squared distance from the nearest chosen centroid.
fn seed_plus_plus(paths: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = paths.len();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(paths[rng.gen_range(0..n)].clone());
    let mut d2: Vec<f64> = paths.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(paths[pick].clone());
        for (i, p) in paths.iter().enumerate() {
            let d = sq_dist(p, centroids.last().expect("just pushed"));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}
