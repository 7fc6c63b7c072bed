//! Scalar topological observables of a parameter sweep and the critical-parameter estimator.
//!
//! For every parameter value the series is embedded, subsampled and turned
//! into a Rips diagram. The dominant functional `H` is the largest H1
//! persistence; the estimate of the critical parameter is the grid point at
//! which `|H(mu_j) - H(mu_{j-1})|` is largest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynsys::{add_noise, integrate, NoiseSpec, SystemParams, TimeSeries, TrajectoryConfig};
use crate::embedding::{delay_embed, select_embedding, AutoEmbedding, EmbeddingParams};
use crate::error::{Error, Result};
use crate::persistence::{
    maxmin_subsample, pairwise_distances, rips_persistence, PersistenceConfig, PersistenceDiagram,
};
use crate::scalar::Real;

/// Largest finite `death - birth` among pairs of dimension `dim`; 0 if there are none.
pub fn max_persistence<T: Real>(diagram: &PersistenceDiagram<T>, dim: usize) -> Result<T> {
    let mut best = T::zero();
    for p in diagram.in_dim(dim) {
        if !p.is_finite() {
            return Err(Error::InvalidInput(format!(
                "infinite pair in dimension {dim} (birth {})",
                p.birth
            )));
        }
        best = best.max(p.persistence());
    }
    Ok(best)
}

/// Betti numbers sampled on a grid of scales.
#[derive(Clone, Debug, PartialEq)]
pub struct BettiGrid<T> {
    pub eps_values: Vec<T>,
    pub counts: Vec<usize>,
}

/// `counts[k]` is the number of `dim` pairs with `birth <= eps_k < death`.
pub fn betti_curve<T: Real>(diagram: &PersistenceDiagram<T>, dim: usize, eps_grid: &[T]) -> Result<BettiGrid<T>> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidInput("empty scale grid".into()));
    }
    if eps_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("scale grid must be strictly ascending".into()));
    }
    let counts = eps_grid
        .iter()
        .map(|&e| diagram.in_dim(dim).filter(|p| p.birth <= e && e < p.death).count())
        .collect();
    Ok(BettiGrid {
        eps_values: eps_grid.to_vec(),
        counts,
    })
}

/// Riemann-sum L1 norm `sum_k counts[k] * d_eps` of a uniformly spaced Betti curve.
pub fn betti_l1<T: Real>(grid: &BettiGrid<T>) -> Result<T> {
    let e = &grid.eps_values;
    if e.len() < 2 || e.len() != grid.counts.len() {
        return Err(Error::InvalidInput("Betti grid needs at least 2 aligned points".into()));
    }
    let step = e[1] - e[0];
    let tol = T::lit(1e-9) * step.abs().max(e[e.len() - 1].abs());
    if !(step > T::zero()) || e.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > tol) {
        return Err(Error::InvalidInput("Betti grid is not uniformly spaced".into()));
    }
    let total: usize = grid.counts.iter().sum();
    Ok(T::from_count(total) * step)
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = T::from_count(count - 1);
            (0..count).map(|j| lo + (hi - lo) * T::from_count(j) / last).collect()
        }
    }
}

/// Absolute first differences `|h[j] - h[j-1]|`.
pub fn delta_series<T: Real>(h_values: &[T]) -> Result<Vec<T>> {
    if h_values.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 values, got {}",
            h_values.len()
        )));
    }
    Ok(h_values.windows(2).map(|w| (w[1] - w[0]).abs()).collect())
}

/// Index and value of the grid point with the largest jump into it.
///
/// The jump between `j - 1` and `j` is attributed to `params[j]`; ties go to the smallest `j`.
pub fn estimate_critical<T: Real>(params: &[T], h_values: &[T]) -> Result<(usize, T)> {
    if params.len() != h_values.len() {
        return Err(Error::LengthMismatch {
            left: params.len(),
            right: h_values.len(),
        });
    }
    if params.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("parameter grid must be strictly ascending".into()));
    }
    let delta = delta_series(h_values)?;
    let mut best = 0;
    for (k, &d) in delta.iter().enumerate() {
        if d > delta[best] {
            best = k;
        }
    }
    Ok((best + 1, params[best + 1]))
}

/// How the delay embedding is chosen for each series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EmbeddingMode {
    Fixed { tau: usize, m: usize },
    Auto(AutoEmbedding),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub embedding: EmbeddingMode,
    pub persistence: PersistenceConfig,
    /// Number of scales in the Betti curve, spread uniformly over `[0, eps_max]`.
    pub betti_grid_size: usize,
}

impl PipelineConfig {
    pub fn fixed(tau: usize, m: usize) -> Self {
        PipelineConfig {
            embedding: EmbeddingMode::Fixed { tau, m },
            persistence: PersistenceConfig::default(),
            betti_grid_size: 64,
        }
    }
}

/// Everything computed for one series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesAnalysis<T> {
    pub embedding: EmbeddingParams,
    /// Points after subsampling.
    pub cloud_size: usize,
    pub eps_max: T,
    pub diagram: PersistenceDiagram<T>,
    pub h: T,
    pub betti_l1: T,
}

/// Embeds, subsamples and computes the diagram and observables of one series.
pub fn analyze_series<T: Real>(series: &TimeSeries<T>, cfg: &PipelineConfig) -> Result<SeriesAnalysis<T>> {
    let params = match cfg.embedding {
        EmbeddingMode::Fixed { tau, m } => EmbeddingParams::new(tau, m)?,
        EmbeddingMode::Auto(auto) => select_embedding(series, &auto)?.0,
    };
    let cloud = delay_embed(series, params)?;
    let cloud = maxmin_subsample(&cloud, cfg.persistence.n_max, cfg.persistence.seed);
    let dist = pairwise_distances(&cloud)?;
    let eps_max = match cfg.persistence.eps_max {
        Some(e) => T::lit(e),
        None => dist.max_distance(),
    };
    let diagram = rips_persistence(&dist, eps_max)?;
    let h = max_persistence(&diagram, 1)?;
    let betti = if eps_max > T::zero() && cfg.betti_grid_size >= 2 {
        let grid = linspace(T::zero(), eps_max, cfg.betti_grid_size);
        betti_l1(&betti_curve(&diagram, 1, &grid)?)?
    } else {
        T::zero()
    };
    Ok(SeriesAnalysis {
        embedding: params,
        cloud_size: cloud.len(),
        eps_max,
        diagram,
        h,
        betti_l1: betti,
    })
}

/// Outcome for one grid point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct GridOutcome<T> {
    pub param: T,
    pub result: Result<SeriesAnalysis<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult<T> {
    /// Parameter values that produced an analysis, ascending.
    pub params: Vec<T>,
    pub h_values: Vec<T>,
    pub betti_l1: Vec<T>,
    /// `delta_h[j - 1] = |h_values[j] - h_values[j - 1]|`.
    pub delta_h: Vec<T>,
    pub mu_hat: T,
    /// Index of `mu_hat` in `params`.
    pub mu_hat_index: usize,
    /// One entry per requested grid point, failed ones included.
    pub outcomes: Vec<GridOutcome<T>>,
}

/// Runs the detection pipeline over a family of series.
///
/// Grid points whose series could not be produced or analysed are kept in
/// `outcomes` but excluded from the observables.
pub fn run_sweep<T: Real>(family: Vec<(T, Result<TimeSeries<T>>)>, cfg: &PipelineConfig) -> Result<SweepResult<T>> {
    let outcomes: Vec<GridOutcome<T>> = family
        .into_par_iter()
        .map(|(param, series)| GridOutcome {
            param,
            result: series.and_then(|s| analyze_series(&s, cfg)),
        })
        .collect();
    summarize(outcomes)
}

/// Builds the sweep observables from per-point outcomes.
pub fn summarize<T: Real>(outcomes: Vec<GridOutcome<T>>) -> Result<SweepResult<T>> {
    let ok: Vec<&GridOutcome<T>> = outcomes.iter().filter(|o| o.result.is_ok()).collect();
    if ok.len() < 2 {
        return Err(Error::TooFewValues(ok.len()));
    }
    let params: Vec<T> = ok.iter().map(|o| o.param).collect();
    let analysis = |o: &&GridOutcome<T>| o.result.as_ref().ok().cloned().unwrap();
    let h_values: Vec<T> = ok.iter().map(|o| analysis(o).h).collect();
    let betti: Vec<T> = ok.iter().map(|o| analysis(o).betti_l1).collect();
    let delta_h = delta_series(&h_values)?;
    let (mu_hat_index, mu_hat) = estimate_critical(&params, &h_values)?;
    Ok(SweepResult {
        params,
        h_values,
        betti_l1: betti,
        delta_h,
        mu_hat,
        mu_hat_index,
        outcomes,
    })
}

/// Simulates one series per grid value of the control parameter.
///
/// With noise, grid point `j` uses seed `noise.seed + j`.
pub fn simulate_family<T: Real>(
    base: &SystemParams<T>,
    grid: &[T],
    trajectory: &TrajectoryConfig<T>,
    noise: Option<NoiseSpec>,
) -> Vec<(T, Result<TimeSeries<T>>)> {
    grid.par_iter()
        .enumerate()
        .map(|(j, &value)| {
            let series = integrate(&base.with_control(value), trajectory).map(|s| match noise {
                Some(spec) => add_noise(
                    &s,
                    &NoiseSpec {
                        sigma_rel: spec.sigma_rel,
                        seed: spec.seed.wrapping_add(j as u64),
                    },
                ),
                None => s,
            });
            (value, series)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::PersistencePair;

    fn dgm(dim: usize, pairs: &[(f64, f64)]) -> PersistenceDiagram<f64> {
        PersistenceDiagram::new(
            pairs
                .iter()
                .map(|&(birth, death)| PersistencePair { dim, birth, death })
                .collect(),
        )
    }

    #[test]
    fn max_persistence_examples() {
        assert_eq!(max_persistence(&dgm(1, &[]), 1).unwrap(), 0.0);
        let d = dgm(1, &[(0.2, 0.9), (0.1, 0.3)]);
        assert!((max_persistence(&d, 1).unwrap() - 0.7).abs() < 1e-15);
        let sq = dgm(1, &[(1.0, 2f64.sqrt())]);
        assert!((max_persistence(&sq, 1).unwrap() - 0.414_213_562_373_095).abs() < 1e-12);
    }

    #[test]
    fn max_persistence_rejects_infinite_h1() {
        assert!(max_persistence(&dgm(1, &[(0.5, f64::INFINITY)]), 1).is_err());
        // infinite H0 is fine when asking about H1
        assert_eq!(max_persistence(&dgm(0, &[(0.0, f64::INFINITY)]), 1).unwrap(), 0.0);
    }

    #[test]
    fn betti_curve_examples() {
        let g = betti_curve(&dgm(1, &[(1.0, 3.0)]), 1, &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(g.counts, vec![0, 1, 1, 0, 0]);
        assert_eq!(betti_l1(&g).unwrap(), 2.0);

        let g = betti_curve(&dgm(1, &[]), 1, &[0.0, 1.0]).unwrap();
        assert_eq!(g.counts, vec![0, 0]);
        assert_eq!(betti_l1(&g).unwrap(), 0.0);

        let g = betti_curve(&dgm(1, &[(1.0, 4.0), (2.0, 3.0)]), 1, &[1.5, 2.5]).unwrap();
        assert_eq!(g.counts, vec![1, 2]);
    }

    #[test]
    fn betti_l1_rejects_nonuniform() {
        let g = BettiGrid {
            eps_values: vec![0.0, 1.0, 3.0],
            counts: vec![0, 0, 0],
        };
        assert!(betti_l1(&g).is_err());
        let g = BettiGrid {
            eps_values: vec![0.0],
            counts: vec![1],
        };
        assert!(betti_l1(&g).is_err());
    }

    #[test]
    fn betti_l1_refinement_bound() {
        let d = dgm(1, &[(0.13, 0.71), (0.4, 0.45), (0.05, 0.93)]);
        let coarse = betti_l1(&betti_curve(&d, 1, &linspace(0.0, 1.0, 33)).unwrap()).unwrap();
        let fine = betti_l1(&betti_curve(&d, 1, &linspace(0.0, 1.0, 65)).unwrap()).unwrap();
        let exact: f64 = d.pairs().iter().map(|p| p.persistence()).sum();
        assert!((coarse - fine).abs() < (1.0 / 32.0) * 3.0);
        assert!((fine - exact).abs() < (1.0 / 64.0) * 3.0);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_series(&[0.0, 0.0, 1.0, 1.5]).unwrap(), vec![0.0, 1.0, 0.5]);
        assert_eq!(delta_series(&[2.0; 4]).unwrap(), vec![0.0; 3]);
        assert_eq!(delta_series(&[3.0, 1.0]).unwrap(), vec![2.0]);
        assert!(delta_series(&[1.0]).is_err());
    }

    #[test]
    fn estimator_examples() {
        let mu = [-1.0, -0.5, 0.0, 0.5, 1.0];
        assert_eq!(estimate_critical(&mu, &[0.0, 0.0, 0.0, 0.8, 1.0]).unwrap(), (3, 0.5));
        assert_eq!(estimate_critical(&mu, &[0.3; 5]).unwrap(), (1, -0.5));
        let b = [3.0, 3.25, 3.5, 3.75];
        assert_eq!(estimate_critical(&b, &[2.0, 1.9, 0.1, 0.05]).unwrap().1, 3.5);
        assert!(matches!(
            estimate_critical(&mu, &[0.0; 4]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(estimate_critical(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn estimator_locality() {
        let mu = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let h = [0.0, 0.0, 0.0, 0.8, 1.0];
        let base = estimate_critical(&mu, &h).unwrap().1;
        let mu2 = [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0];
        let h2 = [0.0, 0.0, 0.0, 0.0, 0.8, 1.0];
        assert_eq!(estimate_critical(&mu2, &h2).unwrap().1, base);
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(-1.0, 1.0, 21);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[10], 0.0);
        assert_eq!(g[20], 1.0);
    }

    #[test]
    fn sweep_of_identical_series_is_flat() {
        let s = TimeSeries::new(0.0, 0.01, (0..800).map(|k| (k as f64 * 0.05).sin()).collect()).unwrap();
        let family = vec![(0.0, Ok(s.clone())), (1.0, Ok(s.clone())), (2.0, Ok(s))];
        let mut cfg = PipelineConfig::fixed(31, 2);
        cfg.persistence.n_max = 120;
        let r = run_sweep(family, &cfg).unwrap();
        assert!(r.h_values.iter().all(|&h| h == r.h_values[0]));
        assert!(r.h_values[0] > 0.5);
        assert_eq!(r.delta_h, vec![0.0, 0.0]);
        assert_eq!(r.mu_hat, 1.0);
    }

    #[test]
    fn failed_points_are_excluded() {
        let s = TimeSeries::new(0.0, 1.0, (0..300).map(|k| (k as f64 * 0.2).cos()).collect()).unwrap();
        let family = vec![
            (0.0, Ok(s.clone())),
            (1.0, Err(Error::Divergence { step: 17 })),
            (2.0, Ok(s.clone())),
        ];
        let mut cfg = PipelineConfig::fixed(8, 2);
        cfg.persistence.n_max = 60;
        let r = run_sweep(family, &cfg).unwrap();
        assert_eq!(r.params, vec![0.0, 2.0]);
        assert_eq!(r.outcomes.len(), 3);
        assert!(r.outcomes[1].result.is_err());

        let family = vec![(0.0, Ok(s)), (1.0, Err(Error::Divergence { step: 1 }))];
        assert_eq!(run_sweep(family, &cfg).unwrap_err(), Error::TooFewValues(1));
    }
}
