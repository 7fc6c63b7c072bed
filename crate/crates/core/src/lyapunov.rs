//! Largest Lyapunov exponent by two-trajectory renormalization, and
//! Pearson/Spearman correlation against the topological functional.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dynsys::{Rk4, SystemParams};
use crate::error::{Error, Result};
use crate::functional::SweepResult;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig<T> {
    pub dt: T,
    pub n_steps: usize,
    /// Steps before log-stretching is accumulated. The perturbation is
    /// renormalized during the transient too, so it starts aligned.
    pub transient_steps: usize,
    pub renorm_interval: usize,
    /// Separation kept between the two trajectories.
    pub d0: T,
    pub seed: u64,
    /// Defaults to the system's standard initial state.
    #[serde(default)]
    pub initial_state: Option<Vec<T>>,
    /// Double the run length within 2% of the known critical parameter.
    #[serde(default = "yes")]
    pub extend_near_critical: bool,
}

fn yes() -> bool {
    true
}

impl<T: Real> Default for LyapunovConfig<T> {
    fn default() -> Self {
        LyapunovConfig {
            dt: T::lit(0.01),
            n_steps: 200_000,
            transient_steps: 40_000,
            renorm_interval: 10,
            d0: T::lit(1e-8),
            seed: 0,
            initial_state: None,
            extend_near_critical: true,
        }
    }
}

impl<T: Real> LyapunovConfig<T> {
    fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !(self.d0 > T::zero()) {
            return Err(Error::InvalidParameter("dt and d0 must be > 0".into()));
        }
        if self.renorm_interval == 0 {
            return Err(Error::InvalidParameter("renorm_interval must be >= 1".into()));
        }
        if self.transient_steps + self.renorm_interval > self.n_steps {
            return Err(Error::InvalidParameter(
                "n_steps leaves no renormalization interval after the transient".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate<T> {
    pub lambda1: T,
    /// Steps actually integrated (differs from the config when extended).
    pub n_steps: usize,
    pub extended: bool,
    /// The separation collapsed to exactly zero at least once and was redrawn.
    pub reseeded: bool,
}

fn random_unit<T: Real>(rng: &mut ChaCha8Rng, dim: usize) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| T::lit(x / norm)).collect();
        }
    }
}

/// Largest Lyapunov exponent in inverse time units.
pub fn largest_lyapunov<T: Real>(params: &SystemParams<T>, config: &LyapunovConfig<T>) -> Result<LyapunovEstimate<T>> {
    params.validate()?;
    config.validate()?;
    let dim = params.id().dimension();
    let mut reference = config
        .initial_state
        .clone()
        .unwrap_or_else(|| params.default_initial_state());
    if reference.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: reference.len(),
        });
    }

    let critical = params.critical_control();
    let near = (params.control() - critical).abs() <= T::lit(0.02) * critical.abs().max(T::one());
    let extended = config.extend_near_critical && near;
    let factor = if extended { 2 } else { 1 };
    let (n_steps, transient) = (config.n_steps * factor, config.transient_steps * factor);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let d0 = config.d0;
    let dir: Vec<T> = random_unit(&mut rng, dim);
    let mut perturbed: Vec<T> = reference.iter().zip(&dir).map(|(&r, &u)| r + d0 * u).collect();

    let mut rk_ref = Rk4::new(dim);
    let mut rk_pert = Rk4::new(dim);
    let field = |s: &[T], o: &mut [T]| params.eval_into(s, o);
    let mut log_sum = T::zero();
    let mut intervals = 0usize;
    let mut reseeded = false;
    for step in 1..=n_steps {
        rk_ref.step(field, &mut reference, config.dt);
        rk_pert.step(field, &mut perturbed, config.dt);
        if step % config.renorm_interval != 0 {
            continue;
        }
        if reference.iter().chain(&perturbed).any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step });
        }
        let d = reference
            .iter()
            .zip(&perturbed)
            .map(|(&a, &b)| (b - a) * (b - a))
            .sum::<T>()
            .sqrt();
        if d == T::zero() {
            reseeded = true;
            let u: Vec<T> = random_unit(&mut rng, dim);
            for k in 0..dim {
                perturbed[k] = reference[k] + d0 * u[k];
            }
            continue;
        }
        if step >= transient + config.renorm_interval {
            log_sum = log_sum + (d / d0).ln();
            intervals += 1;
        }
        let scale = d0 / d;
        for k in 0..dim {
            perturbed[k] = reference[k] + (perturbed[k] - reference[k]) * scale;
        }
    }
    if intervals == 0 {
        return Err(Error::InvalidParameter("no accumulation interval completed".into()));
    }
    let elapsed = T::from_count(intervals * config.renorm_interval) * config.dt;
    Ok(LyapunovEstimate {
        lambda1: log_sum / elapsed,
        n_steps,
        extended,
        reseeded,
    })
}

/// Two-sided p-value of a correlation coefficient via `t = r sqrt((n-2)/(1-r^2))`.
fn t_test_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

fn check_pair<T>(x: &[T], y: &[T]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 samples, got {}", x.len())));
    }
    Ok(())
}

fn pearson_r<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    let n = T::from_count(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx == T::zero() {
        return Err(Error::ZeroVariance("x"));
    }
    if syy == T::zero() {
        return Err(Error::ZeroVariance("y"));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

/// Sample Pearson correlation and its two-sided p-value.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<(T, T)> {
    check_pair(x, y)?;
    let r = pearson_r(x, y)?;
    Ok((r, T::lit(t_test_p(r.to_f64_lossy(), x.len()))))
}

/// 1-based ranks; tied values share the mean of their rank range.
pub fn average_ranks<T: Real>(v: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![T::zero(); v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let mean = T::from_count(start + 1 + end) / T::lit(2.0);
        for &i in &idx[start..end] {
            ranks[i] = mean;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation (Pearson on average ranks) and its t-approximation p-value.
pub fn spearman<T: Real>(x: &[T], y: &[T]) -> Result<(T, T)> {
    check_pair(x, y)?;
    let r = pearson_r(&average_ranks(x), &average_ranks(y))?;
    Ok((r, T::lit(t_test_p(r.to_f64_lossy(), x.len()))))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub pearson_r: f64,
    pub pearson_p: f64,
    pub spearman_rho: f64,
    pub spearman_p: f64,
    pub n: usize,
    pub p_value_method: String,
}

pub fn correlate<T: Real>(x: &[T], y: &[T]) -> Result<CorrelationReport> {
    let (r, rp) = pearson(x, y)?;
    let (rho, sp) = spearman(x, y)?;
    Ok(CorrelationReport {
        pearson_r: r.to_f64_lossy(),
        pearson_p: rp.to_f64_lossy(),
        spearman_rho: rho.to_f64_lossy(),
        spearman_p: sp.to_f64_lossy(),
        n: x.len(),
        p_value_method: "student-t approximation, n-2 degrees of freedom".into(),
    })
}

/// Correlates `H` with `lambda1` over the sweep's successful grid points.
///
/// `lyapunov` holds `(parameter, lambda1)` pairs; every sweep parameter must
/// appear in it (to within 1e-9 relative).
pub fn correlate_sweep<T: Real>(sweep: &SweepResult<T>, lyapunov: &[(T, T)]) -> Result<CorrelationReport> {
    let tol = T::lit(1e-9);
    let mut lambdas = Vec::with_capacity(sweep.params.len());
    for &p in &sweep.params {
        let hit = lyapunov
            .iter()
            .find(|(q, _)| (*q - p).abs() <= tol * p.abs().max(T::one()))
            .ok_or_else(|| Error::InvalidInput(format!("no Lyapunov value for parameter {p}")))?;
        lambdas.push(hit.1);
    }
    correlate(&sweep.h_values, &lambdas)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        let (r, p) = pearson::<f64>(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        assert!(p < 1e-6);
        let (r, _) = pearson::<f64>(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]).unwrap();
        assert!((r + 1.0).abs() < 1e-15);
        // centred sums: sxy = 25, sxx = 5, syy = 129
        let (r, _) = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 4.0, 9.0, 16.0]).unwrap();
        assert!((r - 25.0 / 645f64.sqrt()).abs() < 1e-12);
        assert!((r - 0.9844).abs() < 1e-4);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            Error::ZeroVariance("x")
        );
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn p_value_reference() {
        // r = 0.5, n = 12: t = 0.5 sqrt(10 / 0.75) = 1.8257, two-sided p = 0.0979 (t table, 10 df)
        let x: Vec<f64> = (0..12).map(f64::from).collect();
        let p = t_test_p(0.5, x.len());
        assert!((p - 0.0979).abs() < 5e-4, "{p}");
    }

    #[test]
    fn spearman_examples() {
        let (rho, _) = spearman::<f64>(&[1.0, 2.0, 3.0], &[1.0, 8.0, 27.0]).unwrap();
        assert!((rho - 1.0).abs() < 1e-15);
        let (rho, _) = spearman::<f64>(&[1.0, 2.0, 3.0], &[27.0, 8.0, 1.0]).unwrap();
        assert!((rho + 1.0).abs() < 1e-15);
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
        // ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4): cov 4.5, var 4.5 and 5 -> 4.5 / sqrt(22.5)
        let (rho, _) = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((rho - 4.5 / 22.5f64.sqrt()).abs() < 1e-12);
        assert!((rho - 0.9487).abs() < 1e-4);
        assert!(spearman(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn lyapunov_hopf_stable() {
        let est = largest_lyapunov(&SystemParams::<f64>::hopf(-0.5), &LyapunovConfig::default()).unwrap();
        assert!((est.lambda1 + 0.5).abs() < 0.025, "{}", est.lambda1);
        assert!(!est.extended);
    }

    #[test]
    fn lyapunov_hopf_cycle() {
        let est = largest_lyapunov(&SystemParams::<f64>::hopf(0.5), &LyapunovConfig::default()).unwrap();
        assert!(est.lambda1.abs() < 0.02, "{}", est.lambda1);
    }

    #[test]
    fn lyapunov_deterministic() {
        let cfg = LyapunovConfig {
            n_steps: 20_000,
            transient_steps: 4000,
            ..Default::default()
        };
        let a = largest_lyapunov(&SystemParams::lorenz(28.0), &cfg).unwrap();
        let b = largest_lyapunov(&SystemParams::lorenz(28.0), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lyapunov_extends_near_critical() {
        let cfg = LyapunovConfig {
            n_steps: 2000,
            transient_steps: 400,
            ..Default::default()
        };
        let est = largest_lyapunov(&SystemParams::hopf(0.01), &cfg).unwrap();
        assert!(est.extended);
        assert_eq!(est.n_steps, 4000);
        let est = largest_lyapunov(&SystemParams::lorenz(20.0), &cfg).unwrap();
        assert!(!est.extended);
    }

    #[test]
    fn lyapunov_config_checks() {
        let cfg = LyapunovConfig::<f64> {
            renorm_interval: 0,
            ..Default::default()
        };
        assert!(largest_lyapunov(&SystemParams::hopf(1.0), &cfg).is_err());
        let cfg = LyapunovConfig::<f64> {
            n_steps: 100,
            transient_steps: 100,
            ..Default::default()
        };
        assert!(largest_lyapunov(&SystemParams::hopf(1.0), &cfg).is_err());
    }
}
