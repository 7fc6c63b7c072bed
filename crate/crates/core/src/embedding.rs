//! Delay-coordinate reconstruction and automatic choice of delay and dimension.
//!
//! The delay is picked as the first local minimum of the histogram mutual
//! information between `x[k]` and `x[k - lag]`; the dimension is the smallest
//! `m` whose false-nearest-neighbour fraction drops below a threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynsys::TimeSeries;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbeddingParams {
    /// Delay in samples.
    pub tau: usize,
    pub m: usize,
}

impl EmbeddingParams {
    pub fn new(tau: usize, m: usize) -> Result<Self> {
        if tau == 0 || m == 0 {
            return Err(Error::InvalidParameter("tau and m must be >= 1".into()));
        }
        Ok(EmbeddingParams { tau, m })
    }

    /// Minimum series length giving a nonempty cloud.
    pub fn min_len(&self) -> usize {
        (self.m - 1) * self.tau + 1
    }
}

/// Points in `dim`-dimensional Euclidean space, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    coords: Vec<T>,
    dim: usize,
}

impl<T: Real> PointCloud<T> {
    pub fn new(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("point dimension must be >= 1".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "{} coordinates do not split into {dim}-dimensional points",
                coords.len()
            )));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite coordinate in point {}",
                i / dim
            )));
        }
        Ok(PointCloud { coords, dim })
    }

    pub fn from_points(points: &[Vec<T>]) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        if let Some(p) = points.iter().position(|p| p.len() != dim) {
            return Err(Error::InvalidInput(format!("point {p} does not have dimension {dim}")));
        }
        PointCloud::new(dim, points.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Subset in the given index order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud { coords, dim: self.dim }
    }

    /// Every point with its coordinate order reversed.
    pub fn reversed_coordinates(&self) -> Self {
        let coords = self.points().flat_map(|p| p.iter().rev().copied()).collect();
        PointCloud { coords, dim: self.dim }
    }

    pub fn scaled(&self, s: T) -> Self {
        PointCloud {
            coords: self.coords.iter().map(|&c| c * s).collect(),
            dim: self.dim,
        }
    }
}

/// Point `k` is `(x[k+(m-1)tau], x[k+(m-2)tau], ..., x[k])`, most recent sample first.
pub fn delay_embed<T: Real>(series: &TimeSeries<T>, params: EmbeddingParams) -> Result<PointCloud<T>> {
    embed_values(&series.values, params)
}

pub(crate) fn embed_values<T: Real>(x: &[T], params: EmbeddingParams) -> Result<PointCloud<T>> {
    let EmbeddingParams { tau, m } = EmbeddingParams::new(params.tau, params.m)?;
    let required = params.min_len();
    if x.len() < required {
        return Err(Error::SeriesTooShort { len: x.len(), required });
    }
    let n = x.len() - (m - 1) * tau;
    let mut coords = Vec::with_capacity(n * m);
    for k in 0..n {
        for j in (0..m).rev() {
            coords.push(x[k + j * tau]);
        }
    }
    Ok(PointCloud { coords, dim: m })
}

fn bin_indices<T: Real>(x: &[T], n_bins: usize) -> Vec<usize> {
    let (lo, hi) = x.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let range = hi - lo;
    let nb = T::from_count(n_bins);
    x.iter()
        .map(|&v| {
            if range > T::zero() {
                ((v - lo) / range * nb).to_usize().unwrap_or(0).min(n_bins - 1)
            } else {
                0
            }
        })
        .collect()
}

/// Histogram mutual information (bits) between `x[k]` and `x[k - lag]`.
///
/// Both marginals share one equal-width binning over the series' min-max range.
pub fn mutual_information<T: Real>(series: &TimeSeries<T>, lag: usize, n_bins: usize) -> Result<T> {
    let bins = checked_bins(&series.values, lag, n_bins)?;
    Ok(mi_from_bins(&bins, lag, n_bins))
}

fn checked_bins<T: Real>(x: &[T], lag: usize, n_bins: usize) -> Result<Vec<usize>> {
    if lag == 0 {
        return Err(Error::InvalidParameter("lag must be >= 1".into()));
    }
    if n_bins < 2 {
        return Err(Error::InvalidParameter("n_bins must be >= 2".into()));
    }
    if x.len() < lag + 2 {
        return Err(Error::SeriesTooShort {
            len: x.len(),
            required: lag + 2,
        });
    }
    Ok(bin_indices(x, n_bins))
}

fn mi_from_bins<T: Real>(bins: &[usize], lag: usize, n_bins: usize) -> T {
    let mut joint = vec![0usize; n_bins * n_bins];
    for k in lag..bins.len() {
        joint[bins[k] * n_bins + bins[k - lag]] += 1;
    }
    let mut row = vec![0usize; n_bins];
    let mut col = vec![0usize; n_bins];
    for i in 0..n_bins {
        for j in 0..n_bins {
            let c = joint[i * n_bins + j];
            row[i] += c;
            col[j] += c;
        }
    }
    let total = T::from_count(bins.len() - lag);
    let mut mi = T::zero();
    for i in 0..n_bins {
        for j in 0..n_bins {
            let c = joint[i * n_bins + j];
            if c == 0 {
                continue;
            }
            // p_ij log2(p_ij / (p_i p_j)) = (c/n) log2(c n / (r_i c_j))
            let c_t = T::from_count(c);
            let ratio = c_t * total / (T::from_count(row[i]) * T::from_count(col[j]));
            mi = mi + c_t / total * ratio.log2();
        }
    }
    mi
}

#[derive(Clone, Debug, PartialEq)]
pub struct DelaySelection<T> {
    pub tau: usize,
    /// `false` when MI has no local minimum up to `max_lag` and `tau` is the global argmin.
    pub local_minimum: bool,
    /// `mi[l - 1]` is the mutual information at lag `l`.
    pub mi: Vec<T>,
}

/// First local minimum of the lagged mutual information over lags `1..=max_lag`.
pub fn select_delay<T: Real>(series: &TimeSeries<T>, max_lag: usize, n_bins: usize) -> Result<DelaySelection<T>> {
    if max_lag < 2 {
        return Err(Error::InvalidParameter("max_lag must be >= 2".into()));
    }
    let bins = checked_bins(&series.values, max_lag, n_bins)?;
    let mi: Vec<T> = (1..=max_lag).map(|lag| mi_from_bins(&bins, lag, n_bins)).collect();
    for l in 2..max_lag {
        let (prev, cur, next) = (mi[l - 2], mi[l - 1], mi[l]);
        if prev > cur && cur <= next {
            return Ok(DelaySelection {
                tau: l,
                local_minimum: true,
                mi,
            });
        }
    }
    let mut best = 0;
    for (i, &v) in mi.iter().enumerate() {
        if v < mi[best] {
            best = i;
        }
    }
    Ok(DelaySelection {
        tau: best + 1,
        local_minimum: false,
        mi,
    })
}

/// Kennel-style false-nearest-neighbour thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FnnConfig {
    pub r_tol: f64,
    pub a_tol: f64,
    /// A dimension is accepted once its FNN fraction drops below this.
    pub threshold: f64,
}

impl Default for FnnConfig {
    fn default() -> Self {
        FnnConfig {
            r_tol: 10.0,
            a_tol: 2.0,
            threshold: 0.01,
        }
    }
}

/// Fraction of points whose nearest neighbour in dimension `m` is false in dimension `m + 1`.
///
/// Neighbours are searched exhaustively among the points that exist in both
/// embeddings. A pair at distance zero whose added coordinates agree is a true
/// neighbour.
pub fn fnn_fraction<T: Real>(series: &TimeSeries<T>, tau: usize, m: usize, r_tol: f64, a_tol: f64) -> Result<T> {
    let ext = embed_values(&series.values, EmbeddingParams::new(tau, m + 1)?)?;
    let n = ext.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("FNN needs at least 2 points, got {n}")));
    }
    let r_tol = T::lit(r_tol);
    let a_limit = T::lit(a_tol) * series.std();
    let false_count: usize = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = ext.point(i);
            let mut best = T::infinity();
            let mut best_j = usize::MAX;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let q = ext.point(j);
                let d2 = (0..m).map(|c| (p[c] - q[c]) * (p[c] - q[c])).sum::<T>();
                if d2 < best {
                    best = d2;
                    best_j = j;
                }
            }
            let extra = (p[m] - ext.point(best_j)[m]).abs();
            let dist = best.sqrt();
            let jump_false = if dist > T::zero() {
                extra / dist > r_tol
            } else {
                extra > T::zero()
            };
            let grown = (best + extra * extra).sqrt();
            usize::from(jump_false || grown > a_limit)
        })
        .sum();
    Ok(T::from_count(false_count) / T::from_count(n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionSelection<T> {
    pub m: usize,
    /// `false` when no `m <= m_max` met the threshold and `m_max` was returned.
    pub converged: bool,
    /// `fractions[m - 1]` is the FNN fraction evaluated at dimension `m`.
    pub fractions: Vec<T>,
}

/// Smallest `m <= m_max` with FNN fraction below `cfg.threshold`.
pub fn select_dimension<T: Real>(
    series: &TimeSeries<T>,
    tau: usize,
    m_max: usize,
    cfg: &FnnConfig,
) -> Result<DimensionSelection<T>> {
    if m_max == 0 {
        return Err(Error::InvalidParameter("m_max must be >= 1".into()));
    }
    let mut fractions = Vec::new();
    for m in 1..=m_max {
        let f = fnn_fraction(series, tau, m, cfg.r_tol, cfg.a_tol)?;
        fractions.push(f);
        if f < T::lit(cfg.threshold) {
            return Ok(DimensionSelection {
                m,
                converged: true,
                fractions,
            });
        }
    }
    Ok(DimensionSelection {
        m: m_max,
        converged: false,
        fractions,
    })
}

/// Settings for choosing `(tau, m)` from the data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoEmbedding {
    pub max_lag: usize,
    pub n_bins: usize,
    pub m_max: usize,
    #[serde(default)]
    pub fnn: FnnConfig,
}

impl Default for AutoEmbedding {
    fn default() -> Self {
        AutoEmbedding {
            max_lag: 200,
            n_bins: 16,
            m_max: 6,
            fnn: FnnConfig::default(),
        }
    }
}

pub fn select_embedding<T: Real>(
    series: &TimeSeries<T>,
    auto: &AutoEmbedding,
) -> Result<(EmbeddingParams, DelaySelection<T>, DimensionSelection<T>)> {
    let delay = select_delay(series, auto.max_lag, auto.n_bins)?;
    let dim = select_dimension(series, delay.tau, auto.m_max, &auto.fnn)?;
    Ok((
        EmbeddingParams {
            tau: delay.tau,
            m: dim.m,
        },
        delay,
        dim,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn ts(values: Vec<f64>) -> TimeSeries<f64> {
        TimeSeries::new(0.0, 1.0, values).unwrap()
    }

    fn sinusoid(period: f64, len: usize) -> TimeSeries<f64> {
        ts((0..len)
            .map(|k| (2.0 * std::f64::consts::PI * k as f64 / period).sin())
            .collect())
    }

    fn uniform_noise(len: usize, seed: u64) -> TimeSeries<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ts((0..len).map(|_| rng.random::<f64>()).collect())
    }

    fn points(c: &PointCloud<f64>) -> Vec<Vec<f64>> {
        c.points().map(<[f64]>::to_vec).collect()
    }

    #[test]
    fn embed_examples() {
        let c = delay_embed(&ts(vec![1., 2., 3., 4., 5.]), EmbeddingParams { tau: 1, m: 2 }).unwrap();
        assert_eq!(points(&c), vec![vec![2., 1.], vec![3., 2.], vec![4., 3.], vec![5., 4.]]);

        let c = delay_embed(&ts(vec![1., 2., 3., 4., 5., 6.]), EmbeddingParams { tau: 2, m: 3 }).unwrap();
        assert_eq!(points(&c), vec![vec![5., 3., 1.], vec![6., 4., 2.]]);

        let s = ts(vec![0.5, -1.0, 2.0]);
        let c = delay_embed(&s, EmbeddingParams { tau: 7, m: 1 }).unwrap();
        assert_eq!(c.coords(), &s.values[..]);
    }

    #[test]
    fn embed_too_short() {
        let err = delay_embed(&ts(vec![1., 2., 3.]), EmbeddingParams { tau: 2, m: 3 }).unwrap_err();
        assert_eq!(err, Error::SeriesTooShort { len: 3, required: 5 });
    }

    #[test]
    fn mi_constant_is_zero() {
        let s = ts(vec![3.0; 100]);
        assert_eq!(mutual_information(&s, 5, 16).unwrap(), 0.0);
    }

    #[test]
    fn mi_periodic_copy_equals_entropy() {
        let period = 7;
        let base = [0.0, 0.9, 0.3, 0.5, 0.2, 0.95, 0.6];
        let s = ts((0..700).map(|k| base[k % period]).collect());
        let mi = mutual_information(&s, period, 8).unwrap();
        // pairs are (x, x): MI = H of the marginal histogram over x[lag..]
        let bins = bin_indices(&s.values, 8);
        let mut counts = [0usize; 8];
        for &b in &bins[period..] {
            counts[b] += 1;
        }
        let n = (bins.len() - period) as f64;
        let h: f64 = counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum();
        assert!((mi - h).abs() < 1e-12, "{mi} vs {h}");
    }

    #[test]
    fn mi_of_iid_noise_is_small() {
        let s = uniform_noise(10_000, 5);
        for lag in [1, 10, 50] {
            let mi = mutual_information(&s, lag, 16).unwrap();
            assert!(mi < 0.05, "lag {lag}: {mi}");
        }
    }

    #[test]
    fn mi_argument_checks() {
        let s = ts(vec![1.0, 2.0, 3.0]);
        assert!(mutual_information(&s, 0, 16).is_err());
        assert!(mutual_information(&s, 1, 1).is_err());
        assert!(mutual_information(&s, 2, 16).is_err());
    }

    #[test]
    fn delay_of_noisy_sinusoid_is_within_half_period() {
        // binning makes MI of a clean sinusoid jagged; a little noise smooths it
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values = sinusoid(97.3, 10_000)
            .values
            .iter()
            .map(|v| v + 0.05 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let sel = select_delay(&ts(values), 60, 16).unwrap();
        assert!(sel.local_minimum);
        assert!((12..=48).contains(&sel.tau), "tau = {}", sel.tau);
    }

    #[test]
    fn ramp_has_no_local_minimum() {
        let s = ts((0..10_000).map(|k| k as f64).collect());
        let sel = select_delay(&s, 50, 16).unwrap();
        assert!(!sel.local_minimum);
        assert_eq!(sel.tau, 50);
    }

    #[test]
    fn select_delay_rejects_short_series() {
        assert!(select_delay(&ts(vec![0.0; 11]), 10, 16).is_err());
        assert!(select_delay(&ts(vec![0.0; 12]), 10, 16).is_ok());
        assert!(select_delay(&ts(vec![0.0; 12]), 1, 16).is_err());
    }

    #[test]
    fn fnn_noise_is_high() {
        let f = fnn_fraction(&uniform_noise(2000, 9), 1, 1, 10.0, 2.0).unwrap();
        assert!(f > 0.5, "{f}");
    }

    #[test]
    fn fnn_circle_is_low() {
        // tau = quarter period; N = 500 points in the 3-D extension
        let s = sinusoid(100.0, 500 + 2 * 25);
        let f2 = fnn_fraction(&s, 25, 2, 10.0, 2.0).unwrap();
        let f1 = fnn_fraction(&s, 25, 1, 10.0, 2.0).unwrap();
        assert!(f2 < 0.02, "{f2}");
        assert!(f2 <= f1);
    }

    #[test]
    fn fnn_constant_is_zero() {
        assert_eq!(fnn_fraction(&ts(vec![1.0; 50]), 2, 2, 10.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn fnn_needs_two_points() {
        assert!(fnn_fraction(&ts(vec![1.0, 2.0, 3.0]), 1, 2, 10.0, 2.0).is_err());
    }

    #[test]
    fn dimension_of_sinusoid_is_two() {
        // a period commensurate with the sampling repeats points exactly, and R = 0 breaks the ratio test
        let sel = select_dimension(&sinusoid(97.3, 3000), 25, 5, &FnnConfig::default()).unwrap();
        assert!(sel.converged);
        assert_eq!(sel.m, 2);
    }

    #[test]
    fn dimension_of_noise_does_not_converge() {
        let sel = select_dimension(&uniform_noise(2000, 1), 1, 6, &FnnConfig::default()).unwrap();
        assert!(!sel.converged);
        assert_eq!(sel.m, 6);
    }

    #[test]
    fn point_cloud_validation() {
        assert!(PointCloud::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(PointCloud::new(1, vec![f64::NAN]).is_err());
        assert!(PointCloud::<f64>::from_points(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
