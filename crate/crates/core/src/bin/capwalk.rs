use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use capwalk::asymptotics::{trajectory, write_trajectory_csv, TrajectoryKind, TrajectorySettings};
use capwalk::capacity::{ball_capacity, capacity_bounds, capacity_exact, PointSet};
use capwalk::constructions::{
    check_construction_events, cube_blueprint, realize_bridges, realize_deterministic, slow_default,
    sphere_blueprint, EventThresholds,
};
use capwalk::estimator::{capacity_mc_subsampled_set, McSettings, DEFAULT_KILL_RADIUS_FACTOR, DEFAULT_SAMPLES_PER_POINT};
use capwalk::expcli::{load_config, run_suite, write_records, write_records_to, Format, THREADS_ENV};
use capwalk::green::{build_green_table, green, DEFAULT_TABLE_RADIUS, DEFAULT_TABLE_TOL};
use capwalk::walk::{simulate_bridge, simulate_srw, WalkPath};
use capwalk::{CapError, LatticePoint, Result};

#[derive(Parser)]
#[command(name = "capwalk", version, about = "Capacity of random walk ranges on Z^3")]
struct Cli {
    /// Random seed; for `experiment` it replaces the config's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the Green's function table, or evaluate G at points.
    Green(GreenArgs),
    /// Exact capacity of a point set or a ball.
    Cap(CapArgs),
    /// Simulate a walk or a bridge and write it in the text path format.
    Simulate(SimulateArgs),
    /// Monte Carlo capacity of a path range or point set, or a capacity trajectory.
    Estimate(EstimateArgs),
    /// Build a path blueprint and optionally realize it.
    Construct(ConstructArgs),
    /// Run an experiment suite from a TOML config.
    Experiment(ExperimentArgs),
}

fn parse_point(s: &str) -> std::result::Result<LatticePoint, String> {
    let v: Vec<i64> = s
        .split(',')
        .map(|w| w.trim().parse::<i64>().map_err(|e| format!("`{w}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != 3 {
        return Err(format!("expected x,y,z, got `{s}`"));
    }
    LatticePoint::try_new(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

#[derive(Args)]
struct GreenArgs {
    /// Points x,y,z at which to print G.
    #[arg(long = "point", value_parser = parse_point, allow_hyphen_values = true)]
    points: Vec<LatticePoint>,
    #[arg(long, default_value_t = DEFAULT_TABLE_RADIUS)]
    radius: usize,
    #[arg(long, default_value_t = DEFAULT_TABLE_TOL)]
    tol: f64,
}

#[derive(Args)]
struct CapArgs {
    /// File with one `x y z` per line.
    #[arg(long, conflicts_with = "ball", required_unless_present = "ball")]
    points: Option<PathBuf>,
    /// Radius of a lattice ball.
    #[arg(long)]
    ball: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    /// Condition the walk to end at x,y,z.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    bridge_to: Option<LatticePoint>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    F,
    G,
}

#[derive(Args)]
struct EstimateArgs {
    /// Path in the text format written by `simulate`.
    #[arg(long, conflicts_with = "points", required_unless_present = "points")]
    path: Option<PathBuf>,
    /// Point set, one `x y z` per line.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_POINT)]
    samples: u32,
    #[arg(long, default_value_t = DEFAULT_KILL_RADIUS_FACTOR)]
    kill_factor: f64,
    /// Fraction of points whose escape probability is sampled.
    #[arg(long, default_value_t = 1.0)]
    fraction: f64,
    /// Emit the trajectory CSV on this many uniform cells of [0, 1] instead.
    #[arg(long, requires = "path")]
    trajectory_cells: Option<usize>,
    #[arg(long, value_enum, default_value_t = Kind::F)]
    kind: Kind,
    /// Ranges up to this size are solved exactly in trajectory mode.
    #[arg(long, default_value_t = 2000)]
    exact_max_points: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Realize {
    None,
    Deterministic,
    Bridges,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum, default_value_t = ShapeArg::Sphere)]
    kind: ShapeArg,
    #[arg(long)]
    n: u64,
    /// k_n, the diameter scale in units of √(n·log⁽²⁾n)/log⁽³⁾n.
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 8)]
    m: u32,
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long)]
    t_fn: Option<f64>,
    #[arg(long)]
    g_fn: Option<f64>,
    /// Rescale the schedule to exactly this many steps.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = Realize::None)]
    realize: Realize,
    #[arg(long, default_value_t = 0.1)]
    ball_frac: f64,
    /// Run the event checkers on the realized path.
    #[arg(long)]
    events: bool,
    /// Write the realized path here.
    #[arg(long)]
    path_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Cube,
    Sphere,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn install_threads(threads: Option<usize>) -> Result<()> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CapError::resource(format!("cannot start {t} worker threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    let seed = cli.seed.unwrap_or(0);
    if !matches!(cli.cmd, Cmd::Experiment(_)) {
        install_threads(cli.threads)?;
    }
    match cli.cmd {
        Cmd::Green(a) => {
            if a.points.is_empty() {
                let t = build_green_table(a.radius, a.tol)?;
                if let Some(p) = out {
                    t.save(p)?;
                }
                print!("{}", pretty(t.report()));
            } else {
                let rows: Vec<_> = a.points.iter().map(|p| json!({"point": p, "green": green(p)})).collect();
                emit(out, &pretty(&rows))?;
            }
        }
        Cmd::Cap(a) => {
            let v = match (a.points, a.ball) {
                (Some(p), _) => {
                    let set = PointSet::read_text(&p)?;
                    let (lo, hi) = capacity_bounds(&set)?;
                    json!({"points": set.len(), "capacity": capacity_exact(&set)?, "lower": lo, "upper": hi})
                }
                (None, Some(r)) => serde_json::to_value(ball_capacity(r)?).expect("serializable"),
                (None, None) => unreachable!("clap requires one source"),
            };
            emit(out, &pretty(&v))?;
        }
        Cmd::Simulate(a) => {
            let p = match a.bridge_to {
                Some(b) => simulate_bridge(LatticePoint::ORIGIN, b, a.n, seed)?,
                None => simulate_srw(a.n, seed),
            };
            let mut buf = Vec::new();
            p.write_text(&mut buf)?;
            emit(out, std::str::from_utf8(&buf).expect("ascii"))?;
            log::info!("range {} points, diameter {:.2}", p.range().len(), p.diameter());
        }
        Cmd::Estimate(a) => {
            if let Some(cells) = a.trajectory_cells {
                let p = WalkPath::load(a.path.as_deref().expect("clap requires --path"))?;
                if cells == 0 {
                    return Err(CapError::domain("trajectory needs at least one cell"));
                }
                let grid: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
                let settings = TrajectorySettings {
                    exact_max_points: a.exact_max_points,
                    mc: McSettings { kill_radius_factor: a.kill_factor, samples_per_point: a.samples },
                    subsample_fraction: a.fraction,
                    seed,
                };
                let kind = match a.kind {
                    Kind::F => TrajectoryKind::F,
                    Kind::G => TrajectoryKind::G,
                };
                let tr = trajectory(&p, &grid, kind, &settings)?;
                let mut buf = Vec::new();
                write_trajectory_csv(&tr, &mut buf)?;
                emit(out, std::str::from_utf8(&buf).expect("utf-8"))?;
            } else {
                let set = match (a.path, a.points) {
                    (Some(p), _) => WalkPath::load(&p)?.range().clone(),
                    (None, Some(p)) => PointSet::read_text(&p)?,
                    (None, None) => unreachable!("clap requires one source"),
                };
                let e = capacity_mc_subsampled_set(&set, a.fraction, a.kill_factor, a.samples, seed)?;
                emit(out, &pretty(&e))?;
            }
        }
        Cmd::Construct(a) => {
            let slow = slow_default(a.n);
            let mut b = match a.kind {
                ShapeArg::Cube => cube_blueprint(a.n, a.k, a.kappa, a.delta)?,
                ShapeArg::Sphere => sphere_blueprint(
                    a.n,
                    a.k,
                    a.m,
                    a.t_fn.unwrap_or(slow),
                    a.g_fn.unwrap_or(slow),
                    a.epsilon,
                    a.kappa,
                )?,
            };
            if let Some(s) = a.budget {
                b = b.with_budget(s)?;
            }
            let path = match a.realize {
                Realize::None => None,
                Realize::Deterministic => Some(realize_deterministic(&b)?),
                Realize::Bridges => Some(realize_bridges(&b, a.ball_frac, seed)?.path),
            };
            emit(out, &pretty(&b))?;
            if let Some(p) = path {
                if let Some(po) = &a.path_out {
                    p.save(po)?;
                }
                if a.events {
                    let th = EventThresholds { delta: a.delta, ..EventThresholds::default() };
                    let rep = check_construction_events(p.positions(), &b, &th)?;
                    eprint!("{}", pretty(&rep.summary));
                }
                eprintln!("realized {} steps, range {} points", p.len(), p.range().len());
            }
        }
        Cmd::Experiment(a) => {
            let mut cfg = load_config(&a.config)?;
            if let Some(s) = cli.seed {
                cfg.seeds = Some(vec![s]);
            }
            if cli.threads.is_some() {
                cfg.threads = cli.threads;
            }
            if let Some(o) = &cli.out {
                cfg.output = Some(o.clone());
            }
            if let Some(f) = a.format {
                cfg.format = Some(match f {
                    FormatArg::Jsonl => Format::Jsonl,
                    FormatArg::Csv => Format::Csv,
                });
            }
            let records = run_suite(&cfg)?;
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            match &cfg.output {
                Some(p) => write_records(&records, p, cfg.output_format())?,
                None => write_records_to(&records, std::io::stdout().lock(), cfg.output_format())?,
            }
            eprintln!("{} records ({failed} failed), config hash {}", records.len(), cfg.hash());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CapError::Config(_) => 2,
                _ => 1,
            })
        }
    }
}
