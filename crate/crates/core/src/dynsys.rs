//! Benchmark ODE systems, fixed-step RK4 integration and observational noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mean_std, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemId {
    HopfNormalForm,
    Lorenz,
    BzReduced,
}

impl SystemId {
    pub fn dimension(self) -> usize {
        match self {
            SystemId::HopfNormalForm | SystemId::BzReduced => 2,
            SystemId::Lorenz => 3,
        }
    }

    /// Name of the parameter swept in the benchmark experiments.
    pub fn control_name(self) -> &'static str {
        match self {
            SystemId::HopfNormalForm => "mu",
            SystemId::Lorenz => "rho",
            SystemId::BzReduced => "b",
        }
    }
}

/// Parameters of one member of a benchmark family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemParams<T> {
    /// Supercritical Hopf normal form in Cartesian coordinates.
    HopfNormalForm {
        mu: T,
        omega: T,
    },
    Lorenz {
        sigma: T,
        rho: T,
        beta: T,
    },
    /// Two-variable chlorite-iodide reduction of the BZ kinetics.
    BzReduced {
        a: T,
        b: T,
    },
}

impl<T: Real> SystemParams<T> {
    pub fn hopf(mu: T) -> Self {
        SystemParams::HopfNormalForm { mu, omega: T::one() }
    }

    pub fn lorenz(rho: T) -> Self {
        SystemParams::Lorenz {
            sigma: T::lit(10.0),
            rho,
            beta: T::lit(8.0) / T::lit(3.0),
        }
    }

    pub fn bz(b: T) -> Self {
        SystemParams::BzReduced { a: T::lit(10.0), b }
    }

    pub fn id(&self) -> SystemId {
        match self {
            SystemParams::HopfNormalForm { .. } => SystemId::HopfNormalForm,
            SystemParams::Lorenz { .. } => SystemId::Lorenz,
            SystemParams::BzReduced { .. } => SystemId::BzReduced,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        let finite = match *self {
            SystemParams::HopfNormalForm { mu, omega } => mu.is_finite() && omega.is_finite(),
            SystemParams::Lorenz { sigma, rho, beta } => sigma.is_finite() && rho.is_finite() && beta.is_finite(),
            SystemParams::BzReduced { a, b } => a.is_finite() && b.is_finite(),
        };
        if !finite {
            return bad("parameters must be finite");
        }
        match *self {
            SystemParams::HopfNormalForm { omega, .. } if omega <= T::zero() => bad("omega must be > 0"),
            SystemParams::Lorenz { sigma, .. } if sigma <= T::zero() => bad("sigma must be > 0"),
            SystemParams::Lorenz { beta, .. } if beta <= T::zero() => bad("beta must be > 0"),
            SystemParams::Lorenz { rho, .. } if rho < T::zero() => bad("rho must be >= 0"),
            SystemParams::BzReduced { a, b } if a <= T::zero() || b <= T::zero() => bad("a and b must be > 0"),
            _ => Ok(()),
        }
    }

    /// Current value of the control parameter (`mu`, `rho` or `b`).
    pub fn control(&self) -> T {
        match *self {
            SystemParams::HopfNormalForm { mu, .. } => mu,
            SystemParams::Lorenz { rho, .. } => rho,
            SystemParams::BzReduced { b, .. } => b,
        }
    }

    pub fn with_control(mut self, value: T) -> Self {
        match &mut self {
            SystemParams::HopfNormalForm { mu, .. } => *mu = value,
            SystemParams::Lorenz { rho, .. } => *rho = value,
            SystemParams::BzReduced { b, .. } => *b = value,
        }
        self
    }

    /// Analytic Hopf point of the control parameter with the other parameters held fixed.
    pub fn critical_control(&self) -> T {
        match *self {
            SystemParams::HopfNormalForm { .. } => T::zero(),
            // rho_H = sigma (sigma + beta + 3) / (sigma - beta - 1)
            SystemParams::Lorenz { sigma, beta, .. } => {
                sigma * (sigma + beta + T::lit(3.0)) / (sigma - beta - T::one())
            }
            // trace of the Jacobian at (a/5, 1 + a^2/25) vanishes at b = 3a/5 - 25/a
            SystemParams::BzReduced { a, .. } => T::lit(3.0) * a / T::lit(5.0) - T::lit(25.0) / a,
        }
    }

    pub fn default_initial_state(&self) -> Vec<T> {
        match self.id() {
            SystemId::HopfNormalForm => vec![T::lit(0.5), T::zero()],
            SystemId::Lorenz => vec![T::one(); 3],
            SystemId::BzReduced => vec![T::one(); 2],
        }
    }

    /// Writes `f(state)` into `out`; both slices must have the system dimension.
    pub(crate) fn eval_into(&self, s: &[T], out: &mut [T]) {
        match *self {
            SystemParams::HopfNormalForm { mu, omega } => {
                let (x, y) = (s[0], s[1]);
                let r2 = x * x + y * y;
                out[0] = mu * x - omega * y - x * r2;
                out[1] = omega * x + mu * y - y * r2;
            }
            SystemParams::Lorenz { sigma, rho, beta } => {
                let (x, y, z) = (s[0], s[1], s[2]);
                out[0] = sigma * (y - x);
                out[1] = x * (rho - z) - y;
                out[2] = x * y - beta * z;
            }
            SystemParams::BzReduced { a, b } => {
                let (x, y) = (s[0], s[1]);
                let q = T::one() + x * x;
                out[0] = a - x - T::lit(4.0) * x * y / q;
                out[1] = b * x * (T::one() - y / q);
            }
        }
    }

    fn check_dim(&self, state: &[T]) -> Result<()> {
        let expected = self.id().dimension();
        if state.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: state.len(),
            });
        }
        Ok(())
    }
}

/// Evaluates the vector field of the system at `state`.
pub fn vector_field<T: Real>(params: &SystemParams<T>, state: &[T]) -> Result<Vec<T>> {
    params.check_dim(state)?;
    let mut out = vec![T::zero(); state.len()];
    params.eval_into(state, &mut out);
    Ok(out)
}

/// Classical fourth-order Runge-Kutta stepper with reusable stage buffers.
pub struct Rk4<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Real> Rk4<T> {
    pub fn new(dim: usize) -> Self {
        let z = vec![T::zero(); dim];
        Rk4 {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advances `state` in place by one step of size `dt` under `f`.
    pub fn step<F>(&mut self, f: F, state: &mut [T], dt: T)
    where
        F: Fn(&[T], &mut [T]),
    {
        let half = dt / T::lit(2.0);
        let n = state.len();
        f(state, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = state[i] + half * self.k1[i];
        }
        f(&self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = state[i] + half * self.k2[i];
        }
        f(&self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = state[i] + dt * self.k3[i];
        }
        f(&self.tmp, &mut self.k4);
        let sixth = dt / T::lit(6.0);
        for i in 0..n {
            state[i] = state[i] + sixth * (self.k1[i] + T::lit(2.0) * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

/// One RK4 step of the benchmark system.
pub fn rk4_step<T: Real>(params: &SystemParams<T>, state: &[T], dt: T) -> Result<Vec<T>> {
    params.check_dim(state)?;
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter("dt must be > 0".into()));
    }
    let mut next = state.to_vec();
    Rk4::new(state.len()).step(|s, o| params.eval_into(s, o), &mut next, dt);
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { step: 1 });
    }
    Ok(next)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig<T> {
    pub dt: T,
    pub n_steps: usize,
    pub transient_steps: usize,
    pub initial_state: Vec<T>,
    pub observe_index: usize,
}

impl<T: Real> TrajectoryConfig<T> {
    /// `dt = 0.01`, 20 000 steps with the first 10 000 discarded, observing `x`.
    pub fn defaults_for(params: &SystemParams<T>) -> Self {
        TrajectoryConfig {
            dt: T::lit(0.01),
            n_steps: 20_000,
            transient_steps: 10_000,
            initial_state: params.default_initial_state(),
            observe_index: 0,
        }
    }

    pub fn recorded_len(&self) -> usize {
        self.n_steps.saturating_sub(self.transient_steps)
    }

    pub fn validate(&self, system: SystemId) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter("dt must be > 0".into()));
        }
        if self.transient_steps >= self.n_steps || self.recorded_len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_steps ({}) - transient_steps ({}) must be >= 2",
                self.n_steps, self.transient_steps
            )));
        }
        if self.initial_state.len() != system.dimension() {
            return Err(Error::DimensionMismatch {
                expected: system.dimension(),
                got: self.initial_state.len(),
            });
        }
        if self.observe_index >= system.dimension() {
            return Err(Error::InvalidParameter(format!(
                "observe_index {} out of range for a {}-dimensional system",
                self.observe_index,
                system.dimension()
            )));
        }
        Ok(())
    }
}

/// Uniformly sampled scalar observations.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries<T> {
    pub t0: T,
    pub dt: T,
    pub values: Vec<T>,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(t0: T, dt: T, values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("time series is empty".into()));
        }
        if !(dt > T::zero()) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidInput("time series needs finite t0 and dt > 0".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {i}")));
        }
        Ok(TimeSeries { t0, dt, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> T {
        self.t0 + T::from_count(i) * self.dt
    }

    /// Population standard deviation of the samples.
    pub fn std(&self) -> T {
        mean_std(&self.values).1
    }
}

/// Integrates the system and records one coordinate after the transient.
///
/// The sample at index `k` is the state after `transient_steps + k + 1` steps.
pub fn integrate<T: Real>(params: &SystemParams<T>, config: &TrajectoryConfig<T>) -> Result<TimeSeries<T>> {
    params.validate()?;
    config.validate(params.id())?;
    let mut state = config.initial_state.clone();
    let mut stepper = Rk4::new(state.len());
    let mut values = Vec::with_capacity(config.recorded_len());
    let field = |s: &[T], o: &mut [T]| params.eval_into(s, o);
    for step in 1..=config.n_steps {
        stepper.step(field, &mut state, config.dt);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step });
        }
        if step > config.transient_steps {
            values.push(state[config.observe_index]);
        }
    }
    let t0 = T::from_count(config.transient_steps + 1) * config.dt;
    TimeSeries::new(t0, config.dt, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Noise standard deviation relative to the clean series' standard deviation.
    pub sigma_rel: f64,
    pub seed: u64,
}

/// Adds i.i.d. Gaussian observational noise with `std = sigma_rel * std(series)`.
pub fn add_noise<T: Real>(series: &TimeSeries<T>, spec: &NoiseSpec) -> TimeSeries<T> {
    if spec.sigma_rel == 0.0 {
        return series.clone();
    }
    let scale = spec.sigma_rel * series.std().to_f64_lossy();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = series
        .values
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + T::lit(scale * z)
        })
        .collect();
    TimeSeries {
        t0: series.t0,
        dt: series.dt,
        values,
    }
}
