//! Running a whole experiment and writing its artifacts.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hopf_tda::functional::{analyze_series, simulate_family, summarize, GridOutcome};
use hopf_tda::lyapunov::{largest_lyapunov, LyapunovConfig};
use hopf_tda::SweepResult64;
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Grid};
use crate::error::{io_err, CliError, Result};
use crate::io::{write_diagram, write_sweep, SweepRow};
use crate::svg::{render_svg, PlotLabels};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub simulate_s: f64,
    pub analyze_s: f64,
    pub write_s: f64,
}

#[derive(Debug)]
pub struct LevelReport {
    pub noise: f64,
    pub dir: PathBuf,
    pub sweep: SweepResult64,
    pub timings: StageTimings,
}

#[derive(Debug)]
pub struct CaseReport {
    pub out_dir: PathBuf,
    pub levels: Vec<LevelReport>,
}

#[derive(Serialize)]
struct PointSummary {
    index: usize,
    param: f64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    betti_l1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cloud_size: Option<usize>,
}

#[derive(Serialize)]
struct LevelSummary {
    noise: f64,
    directory: String,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    mu_hat: Option<f64>,
    points: Vec<PointSummary>,
}

#[derive(Serialize)]
struct Summary<'a> {
    name: &'a str,
    parameter: &'a str,
    grid_step: f64,
    critical_reference: Option<f64>,
    levels: Vec<LevelSummary>,
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct Timings {
    levels: Vec<(f64, StageTimings)>,
    total_s: f64,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

/// Runs every noise level of the experiment and writes, per level,
/// `sweep.csv`, `diagram_<j>.csv` and `sweep.svg`, then `summary.json` and
/// `timings.json` at the top. With several noise levels each one gets its
/// own `noise_<k>` directory.
///
/// A level with fewer than two analysable grid points is an error, reported
/// after everything else has been written.
pub fn run_case(cfg: &ExperimentConfig, out: &Path) -> Result<CaseReport> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let started = Instant::now();
    let grid = cfg.grid.values();
    let trajectory = cfg.trajectory_config();
    let pipeline = cfg.pipeline();
    let single = cfg.noise.levels.len() == 1;

    let mut levels = Vec::new();
    let mut summaries = Vec::new();
    let mut timings = Vec::new();
    let mut failure = None;

    for (k, &noise) in cfg.noise.levels.iter().enumerate() {
        let rel = if single {
            String::from(".")
        } else {
            format!("noise_{k}")
        };
        let dir = out.join(&rel);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        info!("{}: noise level {noise}, {} grid points", cfg.name, grid.len());

        let t = Instant::now();
        let family = simulate_family(&cfg.system, &grid, &trajectory, cfg.noise_spec(noise));
        let simulate_s = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let outcomes: Vec<GridOutcome<f64>> = family
            .into_par_iter()
            .map(|(param, series)| GridOutcome {
                param,
                result: series.and_then(|s| analyze_series(&s, &pipeline)),
            })
            .collect();
        let analyze_s = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let mut points = Vec::with_capacity(outcomes.len());
        for (j, o) in outcomes.iter().enumerate() {
            match &o.result {
                Ok(a) => {
                    write_diagram(create(&dir.join(format!("diagram_{j}.csv")))?, &a.diagram)?;
                    points.push(PointSummary {
                        index: j,
                        param: o.param,
                        status: "ok",
                        error: None,
                        h: Some(a.h),
                        betti_l1: Some(a.betti_l1),
                        tau: Some(a.embedding.tau),
                        m: Some(a.embedding.m),
                        cloud_size: Some(a.cloud_size),
                    });
                }
                Err(e) => {
                    warn!("{} = {}: {e}", cfg.parameter, o.param);
                    points.push(PointSummary {
                        index: j,
                        param: o.param,
                        status: "failed",
                        error: Some(e.to_string()),
                        h: None,
                        betti_l1: None,
                        tau: None,
                        m: None,
                        cloud_size: None,
                    });
                }
            }
        }
        let (summary, sweep) = match summarize(outcomes) {
            Ok(sweep) => {
                let rows = sweep_rows(&sweep);
                write_sweep(create(&dir.join("sweep.csv"))?, &rows)?;
                let labels = PlotLabels {
                    title: format!("{} (noise {noise})", cfg.name),
                    parameter: cfg.parameter.clone(),
                    reference: cfg.critical_reference,
                };
                write_text(&dir.join("sweep.svg"), &render_svg(&rows, &labels)?)?;
                info!("{}: estimated critical {} = {}", cfg.name, cfg.parameter, sweep.mu_hat);
                (
                    LevelSummary {
                        noise,
                        directory: rel,
                        status: "ok",
                        error: None,
                        mu_hat: Some(sweep.mu_hat),
                        points,
                    },
                    Some(sweep),
                )
            }
            Err(e) => {
                failure.get_or_insert(CliError::SweepFailed {
                    noise,
                    reason: e.to_string(),
                    dir: dir.clone(),
                });
                (
                    LevelSummary {
                        noise,
                        directory: rel,
                        status: "failed",
                        error: Some(e.to_string()),
                        mu_hat: None,
                        points,
                    },
                    None,
                )
            }
        };
        let stage = StageTimings {
            simulate_s,
            analyze_s,
            write_s: t.elapsed().as_secs_f64(),
        };
        timings.push((noise, stage));
        summaries.push(summary);
        if let Some(sweep) = sweep {
            levels.push(LevelReport {
                noise,
                dir,
                sweep,
                timings: stage,
            });
        }
    }

    let summary = Summary {
        name: &cfg.name,
        parameter: &cfg.parameter,
        grid_step: cfg.grid.step(),
        critical_reference: cfg.critical_reference,
        levels: summaries,
        config: cfg,
    };
    write_text(
        &out.join("summary.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    let timings = Timings {
        levels: timings,
        total_s: started.elapsed().as_secs_f64(),
    };
    write_text(
        &out.join("timings.json"),
        &(serde_json::to_string_pretty(&timings)? + "\n"),
    )?;

    match failure {
        Some(e) => Err(e),
        None => Ok(CaseReport {
            out_dir: out.to_path_buf(),
            levels,
        }),
    }
}

pub fn sweep_rows(sweep: &SweepResult64) -> Vec<SweepRow> {
    (0..sweep.params.len())
        .map(|i| SweepRow {
            mu: sweep.params[i],
            h: sweep.h_values[i],
            betti_l1: sweep.betti_l1[i],
            delta_h: i.checked_sub(1).map(|k| sweep.delta_h[k]),
        })
        .collect()
}

/// Largest Lyapunov exponent at every grid value of the control parameter.
pub fn lyapunov_grid(
    system: &hopf_tda::SystemParams64,
    grid: &Grid,
    config: &LyapunovConfig<f64>,
) -> Result<Vec<(f64, f64)>> {
    grid.values()
        .par_iter()
        .map(|&v| Ok((v, largest_lyapunov(&system.with_control(v), config)?.lambda1)))
        .collect()
}
