use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::distance::euclidean;
use crate::embedding::PointCloud;
use crate::scalar::Real;

/// Greedy farthest-point landmarks, returned in ascending index order.
///
/// The first landmark is drawn uniformly with `seed`; ties go to the smaller index.
pub fn maxmin_indices<T: Real>(cloud: &PointCloud<T>, n_max: usize, seed: u64) -> Vec<usize> {
    let n = cloud.len();
    if n <= n_max {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..n);
    let mut chosen = vec![false; n];
    let mut min_dist = vec![T::infinity(); n];
    let mut picked = Vec::with_capacity(n_max);
    let mut current = first;
    for _ in 0..n_max.max(1) {
        chosen[current] = true;
        picked.push(current);
        let p = cloud.point(current);
        let mut next = usize::MAX;
        let mut far = T::neg_infinity();
        for i in 0..n {
            if chosen[i] {
                continue;
            }
            let d = euclidean(p, cloud.point(i));
            if d < min_dist[i] {
                min_dist[i] = d;
            }
            if min_dist[i] > far {
                far = min_dist[i];
                next = i;
            }
        }
        if next == usize::MAX {
            break;
        }
        current = next;
    }
    picked.sort_unstable();
    picked
}

pub fn maxmin_subsample<T: Real>(cloud: &PointCloud<T>, n_max: usize, seed: u64) -> PointCloud<T> {
    if cloud.len() <= n_max {
        return cloud.clone();
    }
    cloud.select(&maxmin_indices(cloud, n_max, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(n: usize) -> PointCloud<f64> {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        PointCloud::from_points(&pts).unwrap()
    }

    #[test]
    fn small_cloud_unchanged() {
        let c = circle(10);
        assert_eq!(maxmin_subsample(&c, 10, 1), c);
        assert_eq!(maxmin_subsample(&c, 50, 1), c);
    }

    #[test]
    fn circle_landmarks_are_spread() {
        let c = circle(100);
        for seed in 0..20 {
            let idx = maxmin_indices(&c, 10, seed);
            assert_eq!(idx.len(), 10);
            let mut angles: Vec<f64> = idx.iter().map(|&i| 2.0 * PI * i as f64 / 100.0).collect();
            angles.sort_by(f64::total_cmp);
            let uniform = 2.0 * PI / 10.0;
            for k in 0..10 {
                let gap = if k + 1 < 10 {
                    angles[k + 1] - angles[k]
                } else {
                    angles[0] + 2.0 * PI - angles[k]
                };
                assert!(gap <= 2.5 * uniform && gap >= uniform / 2.5, "seed {seed}: gap {gap}");
            }
        }
    }

    #[test]
    fn deterministic_and_subset() {
        let c = circle(300);
        let a = maxmin_subsample(&c, 40, 7);
        assert_eq!(a, maxmin_subsample(&c, 40, 7));
        for p in a.points() {
            assert!(c.points().any(|q| q == p));
        }
    }

    #[test]
    fn duplicate_points_are_not_repeated() {
        let c = PointCloud::new(2, vec![0.0; 40]).unwrap();
        let idx = maxmin_indices(&c, 5, 3);
        assert_eq!(idx.len(), 5);
        let mut d = idx.clone();
        d.dedup();
        assert_eq!(d, idx);
    }
}
