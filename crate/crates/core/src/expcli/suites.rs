use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;

use crate::asymptotics::{
    holder_check, membership_s, normalizers, rate_k, rate_s, trajectory, Membership, PiecewiseLinear, Trajectory,
    TrajectoryKind, TrajectorySettings,
};
use crate::capacity::{
    ball_points, capacity_bounds, capacity_exact, incremental_capacity, union_capacity_upper, PointSet,
};
use crate::constructions::{
    check_construction_events, cube_blueprint, realize_bridges, realize_deterministic, slow_default,
    sphere_blueprint, BlueprintKind, EventThresholds, PathBlueprint,
};
use crate::error::{CapError, Result};
use crate::estimator::{capacity_mc_subsampled_set, McSettings};
use crate::lattice::LatticePoint;
use crate::rng::{label_key, stream_id, substream, StreamRng};
use crate::walk::{simulate_srw_with, WalkPath};

use super::config::{ExperimentConfig, Realization, Suite};
use super::record::{regime_predicates, ResultRecord};

/// Relative slack for comparing exact capacities.
const CMP_TOL: f64 = 1e-10;

/// Identity residuals above this count as violations.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Task {
    n: u64,
    seed: u64,
    k_n: Option<f64>,
    /// Case number within a seed (identity suite).
    case: usize,
}

fn tasks(cfg: &ExperimentConfig) -> Vec<Task> {
    let seeds = cfg.seed_values();
    let mut out = Vec::new();
    match cfg.suite {
        Suite::IdentitySuite => {
            for &seed in &seeds {
                for case in 0..cfg.identity.cases {
                    out.push(Task { n: 0, seed, k_n: None, case });
                }
            }
        }
        Suite::PhaseM2 => {
            for n in cfg.n_values() {
                for &k in &cfg.construction.k_grid {
                    for &seed in &seeds {
                        out.push(Task { n, seed, k_n: Some(k), case: 0 });
                    }
                }
            }
        }
        _ => {
            for n in cfg.n_values() {
                for &seed in &seeds {
                    out.push(Task { n, seed, k_n: None, case: 0 });
                }
            }
        }
    }
    out
}

impl Task {
    fn keys(&self, suite: Suite, tag: &str) -> Vec<u64> {
        vec![label_key(suite.name()), self.n, self.k_n.map_or(0, f64::to_bits), self.case as u64, label_key(tag)]
    }

    fn rng(&self, suite: Suite, tag: &str) -> StreamRng {
        substream(self.seed, &self.keys(suite, tag))
    }

    fn seed_for(&self, suite: Suite, tag: &str) -> u64 {
        let mut k = self.keys(suite, tag);
        k.insert(0, self.seed);
        stream_id(&k)
    }
}

/// Runs every task of the suite and returns one record per task, in task order.
///
/// Numeric output depends only on the config: each task draws from its own
/// substream, so the thread count does not matter. A failing task yields a
/// record with `error` set.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let list = tasks(cfg);
    let hash = cfg.hash();
    let ball = if cfg.suite == Suite::IdentitySuite { Some(ball_points(cfg.identity.ball_radius)?) } else { None };
    let work = || -> Vec<ResultRecord> {
        list.par_iter()
            .enumerate()
            .map(|(i, t)| {
                let mut rec = ResultRecord::new(cfg.suite, i, t.n, t.seed, &hash);
                rec.k_n = t.k_n;
                let res = match cfg.suite {
                    Suite::IdentitySuite => identity_case(cfg, t, ball.as_ref().unwrap(), &mut rec),
                    Suite::LimsupSweep => limsup_case(cfg, t, &mut rec),
                    Suite::StrassenCloud | Suite::LiminfCloud => cloud_case(cfg, t, &mut rec),
                    Suite::PhaseM2 => phase_case(cfg, t, &mut rec),
                };
                if let Err(e) = res {
                    rec.error = Some(e.to_string());
                }
                rec
            })
            .collect()
    };
    match cfg.thread_budget()? {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CapError::resource(format!("cannot start {threads} worker threads: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

fn le(a: f64, b: f64) -> bool {
    a <= b + CMP_TOL * b.abs().max(1.0)
}

/// A random multiset containing `base` and some repeated points of it.
fn with_repeats(base: &[LatticePoint], rng: &mut StreamRng) -> PointSet {
    let mut pts = base.to_vec();
    let extra = rng.random_range(0..=base.len());
    for _ in 0..extra {
        pts.push(base[rng.random_range(0..base.len())]);
    }
    PointSet::from_points(pts)
}

fn identity_case(cfg: &ExperimentConfig, t: &Task, ball: &PointSet, rec: &mut ResultRecord) -> Result<()> {
    let mut rng = t.rng(cfg.suite, "sets");
    let max = cfg.identity.max_set.min(ball.len() / 2).max(1);
    let (na, nb) = (rng.random_range(1..=max), rng.random_range(1..=max));
    let idx = sample_indices(&mut rng, ball.len(), na + nb).into_vec();
    let pa: Vec<LatticePoint> = idx[..na].iter().map(|&i| ball.points()[i]).collect();
    let pb: Vec<LatticePoint> = idx[na..].iter().map(|&i| ball.points()[i]).collect();
    let a = PointSet::from_distinct(pa.iter().copied())?;
    let b = PointSet::from_distinct(pb.iter().copied())?;
    let ab = a.union(&b);
    rec.n = ab.len() as u64;

    let (ca, cb, cab) = (capacity_exact(&a)?, capacity_exact(&b)?, capacity_exact(&ab)?);
    let inc = incremental_capacity(&a, &b)?;
    let residual = (cab - ca - inc).abs() / cab;

    let x = with_repeats(&pa, &mut rng);
    let y = with_repeats(&pb, &mut rng);
    let (lo, hi) = capacity_bounds(&x)?;
    let cx = capacity_exact(&x.distinct())?;
    let (lo_ab, hi_ab) = capacity_bounds(&ab)?;
    let union_upper = union_capacity_upper(&x, &y)?;
    let cxy = capacity_exact(&x.union(&y))?;

    let checks = [
        ("identity", residual <= RESIDUAL_TOL),
        ("sandwich", le(lo, cx) && le(cx, hi) && le(lo_ab, cab) && le(cab, hi_ab)),
        ("union_bound", le(cxy, union_upper)),
        ("monotone", le(ca, cab) && le(cb, cab)),
        ("subadditive", le(cab, ca + cb)),
    ];
    rec.cap = Some(cab);
    rec.cap_stderr = Some(0.0);
    rec.cap_exact = Some(true);
    rec.residual = Some(residual);
    rec.violations = Some(checks.iter().filter(|c| !c.1).count() as u64);
    rec.events = checks.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Ok(())
}

/// R̂ of a range: exact when small, subsampled Monte Carlo otherwise.
fn range_capacity(cfg: &ExperimentConfig, set: &PointSet, seed: u64) -> Result<(f64, f64, bool)> {
    let e = &cfg.estimator;
    if set.len() <= e.exact_max_points {
        return Ok((capacity_exact(set)?, 0.0, true));
    }
    let est = capacity_mc_subsampled_set(set, e.subsample_fraction, e.kill_radius_factor, e.samples_per_point, seed)?;
    Ok((est.value, est.stderr, false))
}

fn fill_capacity(rec: &mut ResultRecord, n: u64, cap: (f64, f64, bool), diameter: f64, eps: f64) -> Result<()> {
    let nz = normalizers(n)?;
    rec.cap = Some(cap.0);
    rec.cap_stderr = Some(cap.1);
    rec.cap_exact = Some(cap.2);
    rec.diameter = Some(diameter);
    rec.ratio_h3 = Some(cap.0 / nz.h3);
    rec.ratio_hhat3 = Some(cap.0 / nz.hhat3);
    rec.events.insert("A1".into(), nz.h3 - cap.0 < eps * cap.0);
    Ok(())
}

fn walk(cfg: &ExperimentConfig, t: &Task) -> Result<WalkPath> {
    let n = usize::try_from(t.n).map_err(|_| CapError::resource(format!("n = {} does not fit in memory", t.n)))?;
    Ok(simulate_srw_with(n, &mut t.rng(cfg.suite, "walk")))
}

fn limsup_case(cfg: &ExperimentConfig, t: &Task, rec: &mut ResultRecord) -> Result<()> {
    let p = walk(cfg, t)?;
    let cap = range_capacity(cfg, p.range(), t.seed_for(cfg.suite, "mc"))?;
    fill_capacity(rec, t.n, cap, p.diameter(), cfg.events.epsilon)?;
    rec.events.insert("below_one".into(), rec.ratio_h3.unwrap() < 1.0);
    Ok(())
}

fn trajectory_settings(cfg: &ExperimentConfig, seed: u64) -> TrajectorySettings {
    let e = &cfg.estimator;
    TrajectorySettings {
        exact_max_points: e.exact_max_points,
        mc: McSettings { kill_radius_factor: e.kill_radius_factor, samples_per_point: e.samples_per_point },
        subsample_fraction: e.subsample_fraction,
        seed,
    }
}

/// ∫₀¹ g⁻² with g replaced by its right limit g(t₁) on the first cell; members
/// of 𝒦 vanish at 0 but may jump immediately.
pub fn rate_k_right_limit(traj: &Trajectory) -> Result<f64> {
    let mut v = traj.values.clone();
    if v.len() < 2 {
        return Err(CapError::domain("rate_K needs at least two grid points"));
    }
    v[0] = v[1];
    rate_k(&PiecewiseLinear::new(traj.grid.clone(), v)?)
}

fn cloud_case(cfg: &ExperimentConfig, t: &Task, rec: &mut ResultRecord) -> Result<()> {
    let p = walk(cfg, t)?;
    let cells = cfg.trajectory.grid_cells;
    let grid: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    let kind = if cfg.suite == Suite::StrassenCloud { TrajectoryKind::F } else { TrajectoryKind::G };
    let traj = trajectory(&p, &grid, kind, &trajectory_settings(cfg, t.seed_for(cfg.suite, "mc")))?;
    let last = grid.len() - 1;
    let cap = (traj.capacity_at(last), traj.meta.stderr[last] * traj.scale, traj.meta.exact[last]);
    fill_capacity(rec, t.n, cap, p.diameter(), cfg.events.epsilon)?;
    let f = traj.as_function();
    let holder = holder_check(&f, cfg.events.holder_delta);
    rec.violations = Some(holder.len() as u64);
    rec.events.insert("holder".into(), holder.is_empty());
    match kind {
        TrajectoryKind::F => {
            rec.rate_s = Some(rate_s(&f)?);
            let m = membership_s(&f, cfg.events.membership_epsilon)?;
            rec.events.insert("inside_S".into(), m == Membership::Inside);
            rec.events.insert("outside_S".into(), matches!(m, Membership::Outside { .. }));
        }
        TrajectoryKind::G => {
            let r = rate_k_right_limit(&traj)?;
            rec.rate_k = Some(r);
            rec.events.insert("inside_K".into(), r <= 1.0);
        }
    }
    rec.trajectory = Some(traj.values);
    Ok(())
}

/// The phase-m2 blueprint for one (n, k_n), rescaled to n steps when budgets are matched.
pub fn phase_blueprint(cfg: &ExperimentConfig, n: u64, k_n: f64) -> Result<PathBlueprint> {
    let c = &cfg.construction;
    let b = match c.kind {
        BlueprintKind::Cube => cube_blueprint(n, k_n, c.kappa, c.delta)?,
        BlueprintKind::Sphere => {
            let slow = slow_default(n);
            sphere_blueprint(n, k_n, c.m, c.t_fn.unwrap_or(slow), c.g_fn.unwrap_or(slow), c.epsilon, c.kappa)?
        }
    };
    if c.matched_budget {
        b.with_budget(n)
    } else {
        Ok(b)
    }
}

fn phase_case(cfg: &ExperimentConfig, t: &Task, rec: &mut ResultRecord) -> Result<()> {
    let k = t.k_n.expect("phase tasks carry k_n");
    let c = &cfg.construction;
    let b = phase_blueprint(cfg, t.n, k)?;
    let p = match c.realization {
        Realization::Deterministic => realize_deterministic(&b)?,
        Realization::Bridges => realize_bridges(&b, c.ball_frac, t.seed_for(cfg.suite, "bridges"))?.path,
    };
    let cap = range_capacity(cfg, p.range(), t.seed_for(cfg.suite, "mc"))?;
    fill_capacity(rec, t.n, cap, p.diameter(), cfg.events.epsilon)?;
    if let Some(ev) = regime_predicates(rec, cfg.events.epsilon) {
        rec.cap_ball = Some(ev.cap_ball);
        rec.cap_ball_asymptotic = Some(ev.cap_ball_asymptotic);
        rec.ratio_cap_ball = Some(cap.0 / ev.cap_ball);
        rec.events.insert("A2".into(), ev.a2);
        rec.events.insert("B".into(), ev.b);
    }
    if c.check_events {
        let th = EventThresholds { delta: c.delta, ..EventThresholds::default() };
        let report = check_construction_events(p.positions(), &b, &th)?;
        rec.events.insert("all_FE".into(), report.summary.all_fe);
        rec.events.insert("all_SG".into(), report.summary.all_sg);
        rec.violations = Some((report.summary.edges - report.summary.fe) as u64);
    }
    Ok(())
}
