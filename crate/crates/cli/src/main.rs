use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hopf_tda::dynsys::{add_noise, integrate, NoiseSpec, SystemParams, TrajectoryConfig};
use hopf_tda::embedding::{delay_embed, select_embedding, AutoEmbedding, EmbeddingParams};
use hopf_tda::lyapunov::{correlate, LyapunovConfig};
use hopf_tda::persistence::{maxmin_subsample, pairwise_distances, rips_persistence};
use hopf_tda_cli::config::Grid;
use hopf_tda_cli::io::{
    read_cloud, read_pairs, read_series, read_sweep, write_cloud, write_diagram, write_pairs, write_series,
};
use hopf_tda_cli::svg::{render_svg, PlotLabels};
use hopf_tda_cli::{cases, lyapunov_grid, run_case, CliError, ExperimentConfig};
use log::info;

/// Topological detection of Hopf bifurcations from time series.
#[derive(Parser)]
#[command(name = "hopf-tda", version)]
struct Cli {
    /// Experiment config (JSON) for `sweep` and `lyapunov`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for `sweep`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of hardware threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for noise, subsampling and Lyapunov perturbations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a benchmark system and write `t,x`.
    Simulate(SimulateArgs),
    /// Delay-embed a series into a point cloud.
    Embed(EmbedArgs),
    /// Rips persistence diagram of a point cloud.
    Persist(PersistArgs),
    /// Run a full parameter sweep.
    Sweep(SweepArgs),
    /// Largest Lyapunov exponent over a parameter grid.
    Lyapunov(LyapunovArgs),
    /// Pearson and Spearman correlation of two aligned CSVs.
    Correlate(CorrelateArgs),
    /// Plot a sweep.csv as SVG.
    Render(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    Hopf,
    Lorenz,
    Bz,
}

/// Non-swept parameters; unset ones keep their standard values.
#[derive(Args)]
struct FixedParams {
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
}

impl FixedParams {
    fn params(&self, system: System, control: f64) -> SystemParams<f64> {
        let mut p = match system {
            System::Hopf => SystemParams::hopf(control),
            System::Lorenz => SystemParams::lorenz(control),
            System::Bz => SystemParams::bz(control),
        };
        match &mut p {
            SystemParams::HopfNormalForm { omega, .. } => *omega = self.omega.unwrap_or(*omega),
            SystemParams::Lorenz { sigma, beta, .. } => {
                *sigma = self.sigma.unwrap_or(*sigma);
                *beta = self.beta.unwrap_or(*beta);
            }
            SystemParams::BzReduced { a, .. } => *a = self.a.unwrap_or(*a),
        }
        p
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    system: System,
    #[command(flatten)]
    fixed: FixedParams,
    /// Value of the control parameter (mu, rho or b).
    #[arg(long, allow_hyphen_values = true)]
    control: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 20_000)]
    steps: usize,
    #[arg(long, default_value_t = 10_000)]
    transient: usize,
    /// Observational noise, relative to the series standard deviation.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Series CSV; stdin when omitted.
    input: Option<PathBuf>,
    #[arg(long, conflicts_with = "auto")]
    tau: Option<usize>,
    #[arg(long, conflicts_with = "auto")]
    m: Option<usize>,
    /// Choose tau by mutual information and m by false nearest neighbours.
    #[arg(long)]
    auto: bool,
    #[arg(long, default_value_t = 200)]
    max_lag: usize,
    #[arg(long, default_value_t = 16)]
    bins: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PersistArgs {
    /// Point-cloud CSV; stdin when omitted.
    input: Option<PathBuf>,
    /// Filtration cap; the cloud diameter when omitted.
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long, default_value_t = 400)]
    n_max: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Bundled experiment (a, b or c) instead of --config.
    #[arg(long, conflicts_with = "config")]
    case: Option<String>,
}

#[derive(Args)]
struct LyapunovArgs {
    /// Bundled experiment whose system, grid and settings to use.
    #[arg(long, conflicts_with = "system")]
    case: Option<String>,
    /// System to scan when neither --case nor --config is given.
    #[arg(long, value_enum, requires_all = ["min", "max", "count"])]
    system: Option<System>,
    #[command(flatten)]
    fixed: FixedParams,
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    transient: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// First CSV; its second column is x (e.g. sweep.csv).
    x: PathBuf,
    /// Second CSV; its second column is y (e.g. lyapunov.csv).
    y: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    input: PathBuf,
    /// Known critical value to mark.
    #[arg(long, allow_hyphen_values = true)]
    reference: Option<f64>,
    #[arg(long, default_value = "mu")]
    parameter: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn open_input(path: Option<&Path>) -> Result<(Box<dyn Read>, String)> {
    Ok(match path {
        Some(p) if p != Path::new("-") => (
            Box::new(BufReader::new(
                File::open(p).with_context(|| format!("opening {}", p.display()))?,
            )),
            p.display().to_string(),
        ),
        _ => (Box::new(io::stdin().lock()), "stdin".into()),
    })
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_config(cli: &Cli, case: Option<&str>) -> Result<ExperimentConfig> {
    let mut cfg = match (case, &cli.config) {
        (Some(name), _) => cases::bundled(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?
        }
        (None, None) => bail!("need --config <path> or --case <a|b|c>"),
    };
    if let Some(seed) = cli.seed {
        cfg.reseed(seed);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            || matches!(c.downcast_ref::<CliError>(), Some(CliError::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn run() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HOPF_TDA_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()?;
    }
    let seed = cli.seed.unwrap_or(0);

    match &cli.command {
        Command::Simulate(args) => {
            let params = args.fixed.params(args.system, args.control);
            let traj = TrajectoryConfig {
                dt: args.dt,
                n_steps: args.steps,
                transient_steps: args.transient,
                ..TrajectoryConfig::defaults_for(&params)
            };
            let mut series = integrate(&params, &traj)?;
            if args.noise > 0.0 {
                series = add_noise(
                    &series,
                    &NoiseSpec {
                        sigma_rel: args.noise,
                        seed,
                    },
                );
            }
            write_series(open_output(args.output.as_deref())?, &series)?;
        }
        Command::Embed(args) => {
            let (input, name) = open_input(args.input.as_deref())?;
            let series = read_series(input, &name)?;
            let params = if args.auto {
                let auto = AutoEmbedding {
                    max_lag: args.max_lag,
                    n_bins: args.bins,
                    ..AutoEmbedding::default()
                };
                let (params, delay, dim) = select_embedding(&series, &auto)?;
                info!(
                    "tau = {} (local minimum: {}), m = {} (converged: {})",
                    params.tau, delay.local_minimum, params.m, dim.converged
                );
                params
            } else {
                match (args.tau, args.m) {
                    (Some(tau), Some(m)) => EmbeddingParams::new(tau, m)?,
                    _ => bail!("give both --tau and --m, or --auto"),
                }
            };
            write_cloud(open_output(args.output.as_deref())?, &delay_embed(&series, params)?)?;
        }
        Command::Persist(args) => {
            let (input, name) = open_input(args.input.as_deref())?;
            let cloud = maxmin_subsample(&read_cloud(input, &name)?, args.n_max, seed);
            let dist = pairwise_distances(&cloud)?;
            let eps = args.eps_max.unwrap_or_else(|| dist.max_distance());
            write_diagram(open_output(args.output.as_deref())?, &rips_persistence(&dist, eps)?)?;
        }
        Command::Sweep(args) => {
            let cfg = load_config(&cli, args.case.as_deref())?;
            let out = cli
                .out
                .clone()
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("runs").join(&cfg.name));
            let report = run_case(&cfg, &out)?;
            for level in &report.levels {
                println!("noise {}: {} = {}", level.noise, cfg.parameter, level.sweep.mu_hat);
            }
            println!("artifacts in {}", out.display());
        }
        Command::Lyapunov(args) => {
            let (system, grid, mut lcfg) = if let (Some(system), Some(min), Some(max), Some(count)) =
                (args.system, args.min, args.max, args.count)
            {
                (
                    args.fixed.params(system, 0.0),
                    Grid { min, max, count },
                    LyapunovConfig::default(),
                )
            } else {
                let cfg = load_config(&cli, args.case.as_deref())?;
                let lcfg = cfg.lyapunov.clone().unwrap_or_default();
                (cfg.system, cfg.grid, lcfg)
            };
            if grid.count < 2 || !(grid.min < grid.max) {
                bail!("grid needs count >= 2 and min < max");
            }
            lcfg.dt = args.dt.unwrap_or(lcfg.dt);
            lcfg.n_steps = args.steps.unwrap_or(lcfg.n_steps);
            lcfg.transient_steps = args.transient.unwrap_or(lcfg.transient_steps);
            if let Some(s) = cli.seed {
                lcfg.seed = s;
            }
            let rows = lyapunov_grid(&system, &grid, &lcfg)?;
            write_pairs(open_output(args.output.as_deref())?, ["mu", "lambda1"], &rows)?;
        }
        Command::Correlate(args) => {
            let (rx, nx) = open_input(Some(&args.x))?;
            let (ry, ny) = open_input(Some(&args.y))?;
            let xs = read_pairs(rx, &nx)?;
            let ys = read_pairs(ry, &ny)?;
            let (x, y) = align(&xs, &ys)?;
            let report = correlate(&x, &y)?;
            let mut out = open_output(args.output.as_deref())?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Render(args) => {
            let (input, name) = open_input(Some(&args.input))?;
            let rows = read_sweep(input, &name)?;
            let labels = PlotLabels {
                title: name,
                parameter: args.parameter.clone(),
                reference: args.reference,
            };
            let svg = render_svg(&rows, &labels)?;
            open_output(args.output.as_deref())?.write_all(svg.as_bytes())?;
        }
    }
    Ok(())
}

/// Pairs second-column values whose first columns agree to 1e-9 relative.
fn align(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut x = Vec::with_capacity(xs.len());
    let mut y = Vec::with_capacity(xs.len());
    for &(key, value) in xs {
        let tol = 1e-9 * key.abs().max(1.0);
        match ys.iter().find(|(k, _)| (k - key).abs() <= tol) {
            Some(&(_, other)) => {
                x.push(value);
                y.push(other);
            }
            None => bail!("no row for {key} in the second file"),
        }
    }
    Ok((x, y))
}
