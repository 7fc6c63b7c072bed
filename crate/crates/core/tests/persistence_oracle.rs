#[path = "support/naive_rips.rs"]
mod naive_rips;

use hopf_tda::persistence::{pairwise_distances, rips_persistence};
use hopf_tda::{PersistenceDiagram64, PointCloud64};
use naive_rips::naive_rips;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn triples(d: &PersistenceDiagram64) -> Vec<(usize, f64, f64)> {
    let mut v: Vec<_> = d.pairs().iter().map(|p| (p.dim, p.birth, p.death)).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn check(cloud: &PointCloud64, eps_frac: f64) {
    let dist = pairwise_distances(cloud).unwrap();
    let eps = dist.max_distance() * eps_frac;
    let n = dist.len();
    let dense: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dist.get(i, j)).collect()).collect();
    let fast = triples(&rips_persistence(&dist, eps).unwrap());
    let slow = naive_rips(&dense, eps);
    assert_eq!(fast, slow, "cloud {:?} eps {eps}", cloud.coords());
}

#[test]
fn random_clouds_match_dense_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let n = rng.random_range(1..=8);
        let dim = rng.random_range(1..=3);
        // half the trials use a coarse integer lattice to force equal distances
        let coords: Vec<f64> = if trial % 2 == 0 {
            (0..n * dim).map(|_| rng.random::<f64>()).collect()
        } else {
            (0..n * dim).map(|_| rng.random_range(0..3) as f64).collect()
        };
        let cloud = PointCloud64::new(dim, coords).unwrap();
        for frac in [1.0, 0.6, 0.3] {
            check(&cloud, frac);
        }
    }
}

#[test]
fn regular_polygons_match_dense_reduction() {
    for k in 3..=8 {
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / k as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        check(&PointCloud64::from_points(&pts).unwrap(), 1.0);
    }
}
