//! Monte Carlo capacity estimates for large sets and Green-sum profiles along
//! paths.
//!
//! Cap(A) = Σ_{a∈A} P^a(walk never returns to A). Each escape probability is
//! estimated by walks that are stopped on the sphere of radius
//! ρ = kill_radius_factor · (diam A + 1) around the centroid. A walk stopped
//! there still returns to A with probability h ≈ Ĉ · 3/(2πρ), so the raw sum
//! is multiplied by (1 − h); the reported `correction` is 1/(1 − h).

pub mod transport;
pub mod tree;

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::PointSet;
use crate::error::{CapError, Result};
use crate::green::{default_table, GreenTable};
use crate::lattice::LatticePoint;
use crate::rng::{label_key, substream};
use crate::walk::WalkPath;

pub use transport::Transport;
pub use tree::Octree;

pub const DEFAULT_KILL_RADIUS_FACTOR: f64 = 50.0;
pub const DEFAULT_SAMPLES_PER_POINT: u32 = 2000;
pub const DEFAULT_OPENING_ANGLE: f64 = 0.3;

/// Samples per independent substream; also the unit of parallel work.
const SAMPLE_BLOCK: u32 = 256;

/// Corrections outside this range are flagged.
pub const CORRECTION_RANGE: (f64, f64) = (1.0, 1.5);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples_per_point: u32,
    pub kill_radius_factor: f64,
    /// 1/(1 − h); the raw escape sum is divided by it.
    pub correction: f64,
    pub subsample_fraction: f64,
    /// Σ of raw escape frequencies, scaled up when subsampling.
    pub raw: f64,
    pub kill_radius: f64,
    /// Distinct points whose escape probability was sampled.
    pub points_sampled: usize,
    /// The correction fell outside [`CORRECTION_RANGE`].
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub kill_radius_factor: f64,
    pub samples_per_point: u32,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            kill_radius_factor: DEFAULT_KILL_RADIUS_FACTOR,
            samples_per_point: DEFAULT_SAMPLES_PER_POINT,
        }
    }
}

fn check_settings(kill_radius_factor: f64, samples_per_point: u32) -> Result<()> {
    if !(kill_radius_factor > 2.0) {
        return Err(CapError::domain(format!("kill_radius_factor must exceed 2, got {kill_radius_factor}")));
    }
    if samples_per_point == 0 {
        return Err(CapError::domain("samples_per_point must be positive"));
    }
    Ok(())
}

/// Euclidean diameter of a point set (exact for small sets, otherwise the
/// bounding-box diagonal, which is an upper bound within a factor √3).
fn set_diameter(points: &[LatticePoint]) -> f64 {
    if points.len() <= 2000 {
        let mut d2 = 0i64;
        for (i, p) in points.iter().enumerate() {
            for q in &points[i + 1..] {
                d2 = d2.max((*p - *q).norm2());
            }
        }
        return (d2 as f64).sqrt();
    }
    let (mut lo, mut hi) = ([i64::MAX; 3], [i64::MIN; 3]);
    for p in points {
        let c = p.coords();
        for k in 0..3 {
            lo[k] = lo[k].min(c[k] as i64);
            hi[k] = hi[k].max(c[k] as i64);
        }
    }
    ((0..3).map(|k| ((hi[k] - lo[k]) as f64).powi(2)).sum::<f64>()).sqrt()
}

/// Escape counts for the points `which` of `set`, parallel over
/// (point, block) pairs with one substream each.
fn escape_counts(t: &Transport, set: &PointSet, which: &[usize], samples: u32, seed: u64) -> Vec<u32> {
    let blocks = samples.div_ceil(SAMPLE_BLOCK);
    let tasks: Vec<(usize, u32)> = which.iter().flat_map(|&i| (0..blocks).map(move |b| (i, b))).collect();
    let per_task: Vec<u32> = tasks
        .par_iter()
        .map(|&(i, b)| {
            let mut rng = substream(seed, &[label_key("capacity-mc"), i as u64, b as u64]);
            let n = SAMPLE_BLOCK.min(samples - b * SAMPLE_BLOCK);
            let a = set.points()[i];
            (0..n).filter(|_| t.escapes_from(a, &mut rng)).count() as u32
        })
        .collect();
    per_task.chunks(blocks as usize).map(|c| c.iter().sum()).collect()
}

fn finish(
    raw: f64,
    raw_var: f64,
    kill_radius: f64,
    settings: (f64, u32),
    fraction: f64,
    points_sampled: usize,
) -> Result<CapEstimate> {
    let h = raw * 3.0 / (2.0 * std::f64::consts::PI * kill_radius);
    if h >= 1.0 {
        return Err(CapError::numeric(
            format!("kill sphere of radius {kill_radius} too small for a set of capacity {raw}"),
            vec![raw, kill_radius],
        ));
    }
    let correction = 1.0 / (1.0 - h);
    Ok(CapEstimate {
        value: raw / correction,
        stderr: raw_var.sqrt() / correction,
        samples_per_point: settings.1,
        kill_radius_factor: settings.0,
        correction,
        subsample_fraction: fraction,
        raw,
        kill_radius,
        points_sampled,
        flagged: !(CORRECTION_RANGE.0..=CORRECTION_RANGE.1).contains(&correction),
    })
}

/// Monte Carlo estimate of Cap(A) over the distinct points of A.
pub fn capacity_mc(a: &PointSet, kill_radius_factor: f64, samples_per_point: u32, seed: u64) -> Result<CapEstimate> {
    check_settings(kill_radius_factor, samples_per_point)?;
    if a.is_empty() {
        return Err(CapError::domain("Monte Carlo capacity needs a nonempty set"));
    }
    let set = a.distinct();
    let rho = kill_radius_factor * (set_diameter(set.points()) + 1.0);
    let t = Transport::new(&set, rho);
    let which: Vec<usize> = (0..set.len()).collect();
    let counts = escape_counts(&t, &set, &which, samples_per_point, seed);
    let m = samples_per_point as f64;
    let (mut raw, mut var) = (0.0, 0.0);
    for &c in &counts {
        let p = c as f64 / m;
        raw += p;
        var += p * (1.0 - p) / m;
    }
    finish(raw, var, rho, (kill_radius_factor, samples_per_point), 1.0, set.len())
}

/// Estimate of Cap(range of `p`) from the escape probabilities of a uniform
/// random subset of ⌈fraction · |range|⌉ fresh points, scaled up.
///
/// The variance combines between-point sampling (with finite-population
/// correction) and the within-point Monte Carlo variance.
pub fn capacity_mc_subsampled(
    p: &WalkPath,
    fraction: f64,
    kill_radius_factor: f64,
    samples_per_point: u32,
    seed: u64,
) -> Result<CapEstimate> {
    capacity_mc_subsampled_set(p.range(), fraction, kill_radius_factor, samples_per_point, seed)
}

/// [`capacity_mc_subsampled`] for an arbitrary set (multiplicities ignored).
pub fn capacity_mc_subsampled_set(
    a: &PointSet,
    fraction: f64,
    kill_radius_factor: f64,
    samples_per_point: u32,
    seed: u64,
) -> Result<CapEstimate> {
    check_settings(kill_radius_factor, samples_per_point)?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CapError::domain(format!("subsample fraction must lie in (0, 1], got {fraction}")));
    }
    if a.is_empty() {
        return Err(CapError::domain("Monte Carlo capacity needs a nonempty set"));
    }
    let distinct;
    let set = if a.has_repeats() {
        distinct = a.distinct();
        &distinct
    } else {
        a
    };
    let n = set.len();
    let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut which = if k == n {
        (0..n).collect::<Vec<_>>()
    } else {
        sample_indices(&mut substream(seed, &[label_key("subsample")]), n, k).into_vec()
    };
    which.sort_unstable();
    let rho = kill_radius_factor * (set_diameter(set.points()) + 1.0);
    let t = Transport::new(set, rho);
    let counts = escape_counts(&t, set, &which, samples_per_point, seed);
    let m = samples_per_point as f64;
    let ps: Vec<f64> = counts.iter().map(|&c| c as f64 / m).collect();
    let mean = ps.iter().sum::<f64>() / k as f64;
    let within: f64 = ps.iter().map(|p| p * (1.0 - p) / m).sum();
    let (nf, kf) = (n as f64, k as f64);
    let between = if k > 1 {
        let s2 = ps.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (kf - 1.0);
        nf * nf * (1.0 - kf / nf) * s2 / kf
    } else {
        0.0
    };
    let var = between + (nf / kf) * within;
    finish(nf * mean, var, rho, (kill_radius_factor, samples_per_point), fraction, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMethod {
    Exact,
    Tree,
}

/// sums[j] = Σ_{l ∈ window} G(S_l − S_j) for every path index j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenSumProfile {
    pub sums: Vec<f64>,
    /// Inclusive index range of the summed positions.
    pub window: (usize, usize),
    pub method: ProfileMethod,
    pub opening_angle: f64,
}

/// Green sums with the default table.
pub fn green_sum_profile(
    p: &WalkPath,
    window: (usize, usize),
    method: ProfileMethod,
    opening_angle: f64,
) -> Result<GreenSumProfile> {
    green_sum_profile_with(p, window, method, opening_angle, default_table())
}

pub fn green_sum_profile_with(
    p: &WalkPath,
    window: (usize, usize),
    method: ProfileMethod,
    opening_angle: f64,
    table: &GreenTable,
) -> Result<GreenSumProfile> {
    if !(opening_angle > 0.0) {
        return Err(CapError::domain(format!("opening angle must be positive, got {opening_angle}")));
    }
    let (w0, w1) = window;
    if w0 > w1 || w1 > p.len() {
        return Err(CapError::domain(format!("window [{w0}, {w1}] outside path of length {}", p.len())));
    }
    let pos = p.positions();
    let src = &pos[w0..=w1];
    let sums = match method {
        ProfileMethod::Exact => pos
            .par_iter()
            .map(|y| src.iter().map(|s| table.get(&(*s - *y))).sum())
            .collect(),
        ProfileMethod::Tree => {
            let tree = Octree::new(src);
            pos.par_iter().map(|y| tree.sum_at(y, table, opening_angle)).collect()
        }
    };
    Ok(GreenSumProfile { sums, window, method, opening_angle })
}
