//! Lloyd's k-means with seeded k-means++ initialisation.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index per input point.
    pub assignments: Vec<usize>,
}

impl Clustering {
    /// Number of clusters with at least one member.
    pub fn occupied(&self) -> usize {
        let mut seen = vec![false; self.centroids.len()];
        for &a in &self.assignments {
            seen[a] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }

    /// Mean over occupied clusters of the mean squared distance to the centroid.
    pub fn mean_intra_cluster_variance(&self, points: &[&[f64]]) -> f64 {
        let k = self.centroids.len();
        let mut sse = vec![0.0; k];
        let mut count = vec![0usize; k];
        for (p, &a) in points.iter().zip(&self.assignments) {
            sse[a] += squared_distance(p, &self.centroids[a]);
            count[a] += 1;
        }
        let per_cluster: Vec<f64> = sse
            .iter()
            .zip(&count)
            .filter(|(_, &n)| n > 0)
            .map(|(s, &n)| s / n as f64)
            .collect();
        if per_cluster.is_empty() {
            0.0
        } else {
            per_cluster.iter().sum::<f64>() / per_cluster.len() as f64
        }
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// k-means++ seeding. Stops early when every remaining point coincides with
/// a chosen centre, so duplicate-heavy inputs get fewer than `k` centres.
fn seed_centroids(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let first = (rng.next_u64() % points.len() as u64) as usize;
    let mut centroids = vec![points[first].to_vec()];
    let mut nearest: Vec<f64> = points.iter().map(|p| squared_distance(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut target = uniform(rng) * total;
        let mut pick = points.len() - 1;
        for (i, d) in nearest.iter().enumerate() {
            if *d > 0.0 && target < *d {
                pick = i;
                break;
            }
            target -= d;
        }
        if nearest[pick] <= 0.0 {
            pick = nearest.iter().position(|&d| d > 0.0).expect("total > 0");
        }
        let c = points[pick].to_vec();
        for (n, p) in nearest.iter_mut().zip(points) {
            *n = n.min(squared_distance(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Clusters `points` into at most `k` groups. Deterministic for a given seed.
///
/// Panics if `points` is empty, `k == 0`, or the points differ in dimension.
pub fn kmeans(points: &[&[f64]], k: usize, seed: u64) -> Clustering {
    assert!(!points.is_empty() && k > 0, "k-means needs points and k >= 1");
    let dim = points[0].len();
    assert!(points.iter().all(|p| p.len() == dim), "mixed dimensions");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(points, k.min(points.len()), &mut rng);
    let mut assignments = vec![usize::MAX; points.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = centroids
                .iter()
                .enumerate()
                .map(|(c, centre)| (c, squared_distance(p, centre)))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
                .0;
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p.iter()) {
                *s += x;
            }
        }
        for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            if n > 0 {
                *c = s.into_iter().map(|x| x / n as f64).collect();
            }
        }
    }
    Clustering {
        centroids,
        assignments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_two_blobs() {
        let pts: Vec<[f64; 2]> = vec![[-10.5, 0.0], [-9.5, 0.0], [9.5, 0.0], [10.5, 0.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
        let c = kmeans(&refs, 2, 0);
        assert_eq!(c.occupied(), 2);
        assert_eq!(c.assignments[0], c.assignments[1]);
        assert_ne!(c.assignments[0], c.assignments[2]);
        assert!((c.mean_intra_cluster_variance(&refs) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn identical_points_collapse() {
        let p = [1.0, 2.0, 3.0];
        let refs: Vec<&[f64]> = vec![&p[..]; 6];
        let c = kmeans(&refs, 3, 9);
        assert_eq!(c.occupied(), 1);
        assert_eq!(c.mean_intra_cluster_variance(&refs), 0.0);
    }

    #[test]
    fn deterministic_for_seed() {
        let pts: Vec<Vec<f64>> = (0..30).map(|i| vec![(i * 7 % 11) as f64, (i * 3 % 5) as f64]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        assert_eq!(kmeans(&refs, 4, 42), kmeans(&refs, 4, 42));
    }
}
