use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::MaterialDatabase;

/// How the point-to-state mapping is initialized.
pub enum InitMode<'a> {
    /// Lloyd k-means on the mechanical strains.
    KmeansStrain,
    /// One assignment pass against the stresses of an existing database (the
    /// one-time reinitialization after the first iteration).
    KmeansStress(&'a MaterialDatabase),
}

const LLOYD_MAX_ITERS: usize = 100;

/// Clusters `features` into `k` groups and returns the per-point assignment.
/// Every cluster is guaranteed non-empty: empty ones are re-seeded from the
/// point farthest from its current centroid. Equal component weighting, ties
/// broken towards the lowest index; deterministic for a fixed seed.
pub fn init_mapping(
    features: &[Vec<f64>],
    k: usize,
    rng: &mut ChaCha12Rng,
    mode: InitMode,
) -> crate::Result<Vec<usize>> {
    let n = features.len();
    if k == 0 || k > n {
        return Err(crate::Error::Config(format!(
            "cluster count {k} must lie in [1, {n}]"
        )));
    }
    let dim = features[0].len();
    debug_assert!(features.iter().all(|f| f.len() == dim));

    match mode {
        InitMode::KmeansStrain => {
            let mut centroids = plus_plus_seed(features, k, rng);
            let mut assign = vec![0usize; n];
            for _ in 0..LLOYD_MAX_ITERS {
                let new_assign = assign_nearest(features, &centroids);
                let mut counts = vec![0usize; k];
                for &a in &new_assign {
                    counts[a] += 1;
                }
                let changed = new_assign != assign;
                assign = new_assign;
                recompute_centroids(features, &assign, &mut centroids, &counts);
                reseed_empty(features, &mut assign, &mut centroids);
                if !changed {
                    break;
                }
            }
            reseed_empty(features, &mut assign, &mut centroids);
            Ok(assign)
        }
        InitMode::KmeansStress(db) => {
            let centroids: Vec<Vec<f64>> = (0..db.len())
                .map(|z| db.stresses[z].to_vec())
                .collect();
            if dim != 3 {
                return Err(crate::Error::Config(
                    "stress reinitialization expects 3-component features".into(),
                ));
            }
            let mut assign = assign_nearest(features, &centroids);
            let mut centroids = centroids;
            reseed_empty(features, &mut assign, &mut centroids);
            Ok(assign)
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: subsequent centroids drawn with probability
/// proportional to the squared distance to the nearest chosen one.
fn plus_plus_seed(features: &[Vec<f64>], k: usize, rng: &mut ChaCha12Rng) -> Vec<Vec<f64>> {
    let n = features.len();
    let first = rng.random_range(0..n);
    let mut centroids = vec![features[first].clone()];
    let mut d2: Vec<f64> = features.iter().map(|f| dist2(f, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total <= 0.0 {
            // All remaining points coincide with a centroid; walk forward to
            // keep the index deterministic.
            rng.random_range(0..n)
        } else {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc >= target {
                    pick = i;
                    break;
                }
            }
            pick
        };
        centroids.push(features[idx].clone());
        for (i, f) in features.iter().enumerate() {
            let d = dist2(f, centroids.last().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}

fn assign_nearest(features: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    features
        .iter()
        .map(|f| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (z, c) in centroids.iter().enumerate() {
                let d = dist2(f, c);
                if d < best_d {
                    best_d = d;
                    best = z;
                }
            }
            best
        })
        .collect()
}

fn recompute_centroids(
    features: &[Vec<f64>],
    assign: &[usize],
    centroids: &mut [Vec<f64>],
    counts: &[usize],
) {
    let dim = centroids[0].len();
    for (z, c) in centroids.iter_mut().enumerate() {
        if counts[z] > 0 {
            c.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    for (f, &z) in features.iter().zip(assign) {
        for d in 0..dim {
            centroids[z][d] += f[d];
        }
    }
    for (z, c) in centroids.iter_mut().enumerate() {
        if counts[z] > 0 {
            c.iter_mut().for_each(|v| *v /= counts[z] as f64);
        }
    }
}

/// Reassigns the farthest point of the most distant cluster member to every
/// empty cluster, so the mapping stays surjective.
fn reseed_empty(features: &[Vec<f64>], assign: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assign.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far_pt = 0usize;
        let mut far_d = -1.0;
        for (i, f) in features.iter().enumerate() {
            // Only steal from clusters that keep at least two members.
            if counts[assign[i]] < 2 {
                continue;
            }
            let d = dist2(f, &centroids[assign[i]]);
            if d > far_d {
                far_d = d;
                far_pt = i;
            }
        }
        assign[far_pt] = empty;
        centroids[empty] = features[far_pt].clone();
    }
}
