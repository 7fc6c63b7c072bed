//! Detection of Hopf-type transitions from scalar time series.
//!
//! The pipeline reconstructs phase space by delay embedding, computes
//! Vietoris-Rips persistence in dimensions 0 and 1, and tracks the largest
//! one-dimensional persistence `H` along a parameter sweep; the critical
//! parameter estimate is where `H` jumps the most.
//!
//! * [`dynsys`]: benchmark ODEs (Hopf normal form, Lorenz, reduced BZ), RK4, noise.
//! * [`embedding`]: delay embedding, mutual-information delay, false nearest neighbours.
//! * [`persistence`]: distances, maxmin subsampling, Rips persistence, bottleneck distance.
//! * [`functional`]: `H`, Betti curves, the jump estimator and whole sweeps.
//! * [`lyapunov`]: largest Lyapunov exponent and Pearson/Spearman correlation.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.
//!
//! ```
//! use hopf_tda::{dynsys, functional};
//!
//! let params = dynsys::SystemParams::hopf(1.0);
//! let mut traj = dynsys::TrajectoryConfig::defaults_for(&params);
//! traj.n_steps = 12_000;
//! let series = dynsys::integrate(&params, &traj).unwrap();
//! let mut cfg = functional::PipelineConfig::fixed(26, 2);
//! cfg.persistence.n_max = 100;
//! let analysis = functional::analyze_series(&series, &cfg).unwrap();
//! assert!(analysis.h > 0.1);
//! ```

pub mod dynsys;
pub mod embedding;
mod error;
pub mod functional;
pub mod lyapunov;
pub mod persistence;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TimeSeries64 = dynsys::TimeSeries<f64>;
pub type SystemParams64 = dynsys::SystemParams<f64>;
pub type TrajectoryConfig64 = dynsys::TrajectoryConfig<f64>;
pub type PointCloud64 = embedding::PointCloud<f64>;
pub type DistanceMatrix64 = persistence::DistanceMatrix<f64>;
pub type PersistenceDiagram64 = persistence::PersistenceDiagram<f64>;
pub type PersistencePair64 = persistence::PersistencePair<f64>;
pub type SweepResult64 = functional::SweepResult<f64>;
pub type SeriesAnalysis64 = functional::SeriesAnalysis<f64>;
pub type LyapunovConfig64 = lyapunov::LyapunovConfig<f64>;

pub type TimeSeries32 = dynsys::TimeSeries<f32>;
pub type PointCloud32 = embedding::PointCloud<f32>;
pub type PersistenceDiagram32 = persistence::PersistenceDiagram<f32>;
