//! Normalizers, capacity trajectories and the Strassen-type rate functionals.
//!
//! Iterated logarithms are natural: log⁽¹⁾n = ln n, log⁽ᵏ⁺¹⁾n = ln log⁽ᵏ⁾n.
//! The range capacity at time m is R_m = Cap{S_1, ..., S_m} with R_0 = 0, so
//! every trajectory starts at 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_exact, PointSet};
use crate::error::{CapError, Result};
use crate::estimator::{capacity_mc_subsampled_set, McSettings};
use crate::lattice::LatticePoint;
use crate::rng::label_key;
use crate::walk::WalkPath;

/// Smallest n with log⁽³⁾n > 0.
pub const MIN_NORMALIZER_N: u64 = 16;

/// Rates within this relative margin of 1 count as inside the unit-rate set.
pub const RATE_TOL: f64 = 1e-12;

/// Iterated natural logarithm, or None once an intermediate value is ≤ 0.
pub fn iterated_log(x: f64, k: u32) -> Option<f64> {
    let mut v = x;
    for _ in 0..k {
        if !(v > 0.0) {
            return None;
        }
        v = v.ln();
    }
    Some(v)
}

/// φ(x) = √((2/3)·x·log⁽²⁾x), defined for x > e.
pub fn phi(x: f64) -> Result<f64> {
    match iterated_log(x, 2) {
        Some(l2) if l2 > 0.0 => Ok((2.0 / 3.0 * x * l2).sqrt()),
        _ => Err(CapError::domain(format!("φ(x) needs x > e, got {x}"))),
    }
}

/// h₃(x) = (√6π/9)·√(x·log⁽²⁾x)/log⁽³⁾x, defined for x with log⁽³⁾x > 0.
pub fn h3(x: f64) -> Result<f64> {
    match (iterated_log(x, 2), iterated_log(x, 3)) {
        (Some(l2), Some(l3)) if l3 > 0.0 => {
            Ok(6f64.sqrt() * std::f64::consts::PI / 9.0 * (x * l2).sqrt() / l3)
        }
        _ => Err(CapError::domain(format!("h₃(x) needs log⁽³⁾x > 0 (x > e^e), got {x}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizers {
    pub n: u64,
    /// log⁽¹⁾n .. log⁽⁴⁾n; log⁽⁴⁾ is NaN when log⁽³⁾n ≤ 0 would make it undefined.
    pub logs: [f64; 4],
    pub h3: f64,
    pub hhat3: f64,
    pub phi: f64,
    pub psi: f64,
}

impl Normalizers {
    /// j₃(k) = k·√(n·log⁽²⁾n)/log⁽³⁾n.
    pub fn j3(&self, k: f64) -> f64 {
        k * (self.n as f64 * self.logs[1]).sqrt() / self.logs[2]
    }
}

pub fn normalizers(n: u64) -> Result<Normalizers> {
    if n < MIN_NORMALIZER_N {
        return Err(CapError::domain(format!("normalizers need n ≥ {MIN_NORMALIZER_N}, got {n}")));
    }
    let x = n as f64;
    let l1 = x.ln();
    let l2 = l1.ln();
    let l3 = l2.ln();
    let l4 = l3.ln();
    let pi = std::f64::consts::PI;
    let s6 = 6f64.sqrt();
    Ok(Normalizers {
        n,
        logs: [l1, l2, l3, l4],
        h3: s6 * pi / 9.0 * (x * l2).sqrt() / l3,
        hhat3: s6 * pi * pi / 9.0 * (x / l2).sqrt(),
        phi: (2.0 / 3.0 * x * l2).sqrt(),
        psi: pi * (x / (6.0 * l2)).sqrt(),
    })
}

/// A function on [0, T] given by its values at increasing grid points and
/// linear in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() != v.len() || t.is_empty() {
            return Err(CapError::domain("grid and values must be nonempty and of equal length"));
        }
        if t.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(CapError::domain("grid and values must be finite"));
        }
        if t.windows(2).any(|w| w[1] < w[0]) {
            return Err(CapError::domain("grid must be nondecreasing"));
        }
        Ok(PiecewiseLinear { t, v })
    }

    /// Samples `f` on `t`.
    pub fn sample(t: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let v = t.iter().map(|&x| f(x)).collect();
        Self::new(t, v)
    }

    pub fn scaled(&self, c: f64) -> Self {
        PiecewiseLinear { t: self.t.clone(), v: self.v.iter().map(|x| c * x).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn check_cells(&self) -> Result<()> {
        if let Some(i) = self.t.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(CapError::domain(format!("zero-length cell at grid index {i}")));
        }
        Ok(())
    }
}

/// ∫₀¹ ℓ′² for the piecewise-linear ℓ: Σ (Δf)²/Δt.
pub fn rate_s(f: &PiecewiseLinear) -> Result<f64> {
    if f.t[0] != 0.0 || f.v[0] != 0.0 {
        return Err(CapError::domain("rate_S needs f(0) = 0 at a grid point t = 0"));
    }
    f.check_cells()?;
    Ok(f.t.windows(2).zip(f.v.windows(2)).map(|(t, v)| (v[1] - v[0]).powi(2) / (t[1] - t[0])).sum())
}

/// ∫₀ᵀ g⁻² for the piecewise-linear g, with T the last grid point.
///
/// On a cell where g runs linearly from g₀ to g₁ the integral is Δt/(g₀g₁);
/// a zero at t = 0 makes it diverge.
pub fn rate_k(g: &PiecewiseLinear) -> Result<f64> {
    if g.t[0] != 0.0 {
        return Err(CapError::domain("rate_K needs a grid starting at t = 0"));
    }
    g.check_cells()?;
    if g.v[0] < 0.0 {
        return Err(CapError::domain("rate_K needs g(0) ≥ 0"));
    }
    if let Some(i) = g.v[1..].iter().position(|&x| !(x > 0.0)) {
        return Err(CapError::domain(format!("rate_K needs g > 0 on (0, T]; g = {} at t = {}", g.v[i + 1], g.t[i + 1])));
    }
    if g.v[0] == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(g.t.windows(2).zip(g.v.windows(2)).map(|(t, v)| (t[1] - t[0]) / (v[0] * v[1])).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Membership {
    Inside,
    /// Not certified either way; f/√rate lies in the set, at sup distance ≤ dist_upper.
    Near { dist_upper: f64 },
    /// The sup distance to the set exceeds ε: any member ℓ has
    /// |ℓ(t) − ℓ(s)| ≤ √|t − s| and ℓ(0) = 0, which the increment (s, t) of f
    /// violates by more than the reported lower bound allows.
    Outside { s: f64, t: f64, dist_lower: f64 },
}

/// Where f sits relative to {ℓ : ℓ(0) = 0, ∫₀¹ ℓ′² ≤ 1} in sup norm.
pub fn membership_s(f: &PiecewiseLinear, eps: f64) -> Result<Membership> {
    let r = rate_s(f)?;
    if r <= 1.0 + RATE_TOL {
        return Ok(Membership::Inside);
    }
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..f.t.len() {
        for j in i + 1..f.t.len() {
            let gap = (f.v[j] - f.v[i]).abs() - (f.t[j] - f.t[i]).sqrt();
            // ℓ(0) = f(0) = 0 is pinned, so the whole gap counts from t = 0
            let lower = if i == 0 { gap } else { 0.5 * gap };
            if lower > best.2 {
                best = (f.t[i], f.t[j], lower);
            }
        }
    }
    if best.2 > eps {
        return Ok(Membership::Outside { s: best.0, t: best.1, dist_lower: best.2 });
    }
    Ok(Membership::Near { dist_upper: f.sup_norm() * (1.0 - r.powf(-0.5)) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderViolation {
    pub s: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// All grid pairs with |f(t) − f(s)| > 8√|t − s| + δ.
pub fn holder_check(f: &PiecewiseLinear, delta: f64) -> Vec<HolderViolation> {
    let mut out = Vec::new();
    for i in 0..f.t.len() {
        for j in i + 1..f.t.len() {
            let lhs = (f.v[j] - f.v[i]).abs();
            let rhs = 8.0 * (f.t[j] - f.t[i]).sqrt() + delta;
            if lhs > rhs {
                out.push(HolderViolation { s: f.t[i], t: f.t[j], lhs, rhs });
            }
        }
    }
    out
}

/// Pool-adjacent-violators fit of a nondecreasing sequence (weighted L²).
pub fn isotonic(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (v1, w1, c1) = blocks[blocks.len() - 1];
            let (v0, w0, c0) = blocks[blocks.len() - 2];
            if v0 <= v1 {
                break;
            }
            blocks.pop();
            let w = w0 + w1;
            *blocks.last_mut().unwrap() = ((v0 * w0 + v1 * w1) / w, w, c0 + c1);
        }
    }
    blocks.iter().flat_map(|&(v, _, c)| std::iter::repeat_n(v, c)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryKind {
    /// f_n(t) = R_{⌊nt⌋}/h₃(n)
    F,
    /// g_n(t) = R_{⌊nt⌋}/ĥ₃(n)
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySettings {
    /// Ranges with at most this many points are solved exactly.
    pub exact_max_points: usize,
    pub mc: McSettings,
    /// Fraction of range points whose escape probability is sampled in
    /// Monte Carlo mode.
    #[serde(default = "one")]
    pub subsample_fraction: f64,
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl Default for TrajectorySettings {
    fn default() -> Self {
        TrajectorySettings { exact_max_points: 2000, mc: McSettings::default(), subsample_fraction: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub settings: TrajectorySettings,
    /// Per grid point: solved exactly (true) or by Monte Carlo.
    pub exact: Vec<bool>,
    pub stderr: Vec<f64>,
    /// Largest change made by the isotonic cleanup (0 when not needed).
    pub isotonic_adjustment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub n: u64,
    /// h₃(n) or ĥ₃(n).
    pub scale: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn as_function(&self) -> PiecewiseLinear {
        PiecewiseLinear { t: self.grid.clone(), v: self.values.clone() }
    }

    /// Unnormalized R at grid point i.
    pub fn capacity_at(&self, i: usize) -> f64 {
        self.values[i] * self.scale
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        self.grid
            .iter()
            .position(|&g| (g - t).abs() <= 1e-12 * t.abs().max(1.0))
            .ok_or_else(|| CapError::domain(format!("time {t} is not a grid point of the trajectory")))
    }
}

/// Trajectory of R_{⌊nt⌋} over `grid` for an arbitrary sequence of positions
/// (consecutive points need not be neighbours).
pub fn trajectory_of_positions(
    positions: &[LatticePoint],
    n: u64,
    grid: &[f64],
    kind: TrajectoryKind,
    settings: &TrajectorySettings,
) -> Result<Trajectory> {
    let norms = normalizers(n)?;
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
        return Err(CapError::domain("trajectory grid must be nonempty, nonnegative and increasing"));
    }
    let times: Vec<usize> = grid.iter().map(|&t| (t * n as f64).floor() as usize).collect();
    let last = *times.last().unwrap();
    if last >= positions.len() {
        return Err(CapError::domain(format!(
            "grid reaches time {last} but the path has {} positions",
            positions.len()
        )));
    }
    // ranges S_1..S_m at each grid time, built incrementally
    let mut ranges = Vec::with_capacity(times.len());
    let mut acc = PointSet::new();
    let mut next = 1;
    for &m in &times {
        while next <= m {
            acc.insert(positions[next]);
            next += 1;
        }
        ranges.push(acc.clone());
    }
    let solved: Vec<Result<(f64, f64, bool)>> = ranges
        .par_iter()
        .enumerate()
        .map(|(i, set)| {
            if set.is_empty() {
                Ok((0.0, 0.0, true))
            } else if set.len() <= settings.exact_max_points {
                Ok((capacity_exact(set)?, 0.0, true))
            } else {
                let seed = settings.seed ^ label_key("trajectory").rotate_left(i as u32);
                let e = capacity_mc_subsampled_set(
                    set,
                    settings.subsample_fraction,
                    settings.mc.kill_radius_factor,
                    settings.mc.samples_per_point,
                    seed,
                )?;
                Ok((e.value, e.stderr, false))
            }
        })
        .collect();
    let solved: Vec<(f64, f64, bool)> = solved.into_iter().collect::<Result<_>>()?;
    let scale = match kind {
        TrajectoryKind::F => norms.h3,
        TrajectoryKind::G => norms.hhat3,
    };
    let raw: Vec<f64> = solved.iter().map(|s| s.0 / scale).collect();
    let stderr: Vec<f64> = solved.iter().map(|s| s.1 / scale).collect();
    let exact: Vec<bool> = solved.iter().map(|s| s.2).collect();
    let (values, adj) = if exact.iter().all(|&e| e) {
        (raw, 0.0)
    } else {
        // exact points get a large weight so the fit moves only MC noise
        let w: Vec<f64> = stderr.iter().map(|s| if *s > 0.0 { 1.0 / (s * s) } else { 1e12 }).collect();
        let fit = isotonic(&raw, &w);
        let adj = fit.iter().zip(&raw).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        (fit, adj)
    };
    Ok(Trajectory {
        kind,
        n,
        scale,
        grid: grid.to_vec(),
        values,
        meta: TrajectoryMeta { settings: *settings, exact, stderr, isotonic_adjustment: adj },
    })
}

/// Writes `t,value,stderr,exact` rows, one per grid point.
pub fn write_trajectory_csv<W: std::io::Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    let io = |e: csv::Error| CapError::Io(e.into());
    w.write_record(["t", "value", "stderr", "exact"]).map_err(io)?;
    for i in 0..traj.grid.len() {
        w.write_record([
            traj.grid[i].to_string(),
            traj.values[i].to_string(),
            traj.meta.stderr[i].to_string(),
            traj.meta.exact[i].to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Trajectory of a walk, normalized at n = path length.
pub fn trajectory(
    p: &WalkPath,
    grid: &[f64],
    kind: TrajectoryKind,
    settings: &TrajectorySettings,
) -> Result<Trajectory> {
    trajectory_of_positions(p.positions(), p.len() as u64, grid, kind, settings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPointSpec {
    pub a: Vec<f64>,
    pub t: Vec<f64>,
    /// Band half-width for the S¹ increments.
    pub delta: f64,
    /// Band half-width for the capacity increments.
    pub delta_tilde: f64,
}

impl MultiPointSpec {
    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() || self.a.len() != self.t.len() {
            return Err(CapError::domain("a and t must be nonempty lists of equal length"));
        }
        if self.a.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(CapError::domain("each a_i must lie in (0, 1]"));
        }
        if !(self.t[0] > 0.0) || self.t.windows(2).any(|w| w[1] < w[0]) || *self.t.last().unwrap() > 1.0 {
            return Err(CapError::domain("times must satisfy 0 < t_1 ≤ ... ≤ t_k ≤ 1"));
        }
        if !(self.delta >= 0.0 && self.delta_tilde >= 0.0) {
            return Err(CapError::domain("band tolerances must be nonnegative"));
        }
        Ok(())
    }

    fn times(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        std::iter::once(0.0).chain(self.t.iter().copied()).zip(self.t.iter().copied())
    }
}

/// For each i: a_i(1−δ̃)h₃(Δt·n) ≤ R_{t_i n} − R_{t_{i−1} n} ≤ a_i(1+δ̃)h₃(Δt·n).
/// Each t_i must be a grid point of the trajectory.
pub fn check_multipoint_e(traj: &Trajectory, spec: &MultiPointSpec) -> Result<Vec<bool>> {
    spec.validate()?;
    let n = traj.n as f64;
    let mut out = Vec::with_capacity(spec.a.len());
    for ((t0, t1), &a) in spec.times().zip(&spec.a) {
        let r0 = if t0 == 0.0 { 0.0 } else { traj.capacity_at(traj.index_of(t0)?) };
        let r1 = traj.capacity_at(traj.index_of(t1)?);
        let h = h3((t1 - t0) * n)?;
        let inc = r1 - r0;
        out.push(a * (1.0 - spec.delta_tilde) * h <= inc && inc <= a * (1.0 + spec.delta_tilde) * h);
    }
    Ok(out)
}

/// For each i: a_i(1−δ)φ(Δt·n) ≤ S¹_{⌊t_i n⌋} − S¹_{⌊t_{i−1} n⌋} ≤ a_i(1+δ)φ(Δt·n),
/// with n the path length.
pub fn check_multipoint_f(p: &WalkPath, spec: &MultiPointSpec) -> Result<Vec<bool>> {
    spec.validate()?;
    let n = p.len() as f64;
    let pos = p.positions();
    let x_at = |t: f64| pos[(t * n).floor() as usize].x as f64;
    let mut out = Vec::with_capacity(spec.a.len());
    for ((t0, t1), &a) in spec.times().zip(&spec.a) {
        let f = phi((t1 - t0) * n)?;
        let inc = x_at(t1) - x_at(t0);
        out.push(a * (1.0 - spec.delta) * f <= inc && inc <= a * (1.0 + spec.delta) * f);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorridorSpec {
    pub a: f64,
    pub delta: f64,
    pub kappa: f64,
    pub theta: f64,
    /// Anchor index j.
    pub j: usize,
    /// Anchors need min(j, n − j) ≥ n/(log⁽²⁾n)^χ.
    pub chi: f64,
}

impl CorridorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.delta && self.delta <= self.kappa && self.kappa < 1.0) {
            return Err(CapError::domain("corridor needs 0 < δ ≤ κ < 1"));
        }
        if !(self.theta > 0.0 && self.a > 0.0 && self.chi > 0.0) {
            return Err(CapError::domain("corridor needs a, θ, χ > 0"));
        }
        Ok(())
    }
}

/// r(n) = n·(log⁽³⁾n)^{3/2}/log⁽²⁾n.
pub fn corridor_cutoff(n: u64) -> Result<f64> {
    let nz = normalizers(n)?;
    Ok(n as f64 * nz.logs[2].powf(1.5) / nz.logs[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorridorReport {
    pub r_n: f64,
    /// S¹_{j+l} − S¹_j ≤ U(l) for r ≤ l ≤ n − j.
    pub upper_forward: bool,
    /// S¹_{j+l} − S¹_j ≥ L(l) for r ≤ l ≤ n − j.
    pub lower_forward: bool,
    /// S¹_{j+l} − S¹_j ≤ L(l) for −j ≤ l ≤ −r.
    pub upper_backward: bool,
    /// S¹_{j+l} − S¹_j ≥ U(l) for −j ≤ l ≤ −r.
    pub lower_backward: bool,
    /// |S^i_{j+l} − S^i_j| ≤ θ|l|φ(n)/n, i = 2, 3, for |l| ≥ r.
    pub transverse: bool,
    /// Conjunction of the five events above.
    pub all: bool,
    pub anchor_admissible: bool,
}

/// Evaluates the line and transverse events around S_j, with n the path length,
/// U(l) = l·a(1+δ)φ(n)/((1−κ)n) and L(l) = l·aφ(n)/((1+κ)n).
pub fn check_corridor(p: &WalkPath, spec: &CorridorSpec) -> Result<CorridorReport> {
    spec.validate()?;
    let n = p.len();
    let r = corridor_cutoff(n as u64)?;
    if r >= n as f64 {
        return Err(CapError::domain(format!("cutoff r(n) = {r} is not below n = {n}")));
    }
    if spec.j > n {
        return Err(CapError::domain(format!("anchor {} outside path of length {n}", spec.j)));
    }
    let nf = n as f64;
    let ph = phi(nf)?;
    let su = spec.a * (1.0 + spec.delta) * ph / ((1.0 - spec.kappa) * nf);
    let sl = spec.a * ph / ((1.0 + spec.kappa) * nf);
    let st = spec.theta * ph / nf;
    let pos = p.positions();
    let j = spec.j;
    let base = pos[j];
    let r0 = r.ceil() as usize;
    let mut rep = CorridorReport {
        r_n: r,
        upper_forward: true,
        lower_forward: true,
        upper_backward: true,
        lower_backward: true,
        transverse: true,
        all: false,
        anchor_admissible: (j.min(n - j) as f64) >= nf / normalizers(n as u64)?.logs[1].powf(spec.chi),
    };
    for l in r0..=(n - j) {
        let d = pos[j + l] - base;
        let (lf, x) = (l as f64, d.x as f64);
        rep.upper_forward &= x <= lf * su;
        rep.lower_forward &= x >= lf * sl;
        rep.transverse &= (d.y.abs() as f64) <= st * lf && (d.z.abs() as f64) <= st * lf;
    }
    for l in r0..=j {
        let d = pos[j - l] - base;
        let (lf, x) = (-(l as f64), d.x as f64);
        rep.upper_backward &= x <= lf * sl;
        rep.lower_backward &= x >= lf * su;
        rep.transverse &= (d.y.abs() as f64) <= -st * lf && (d.z.abs() as f64) <= -st * lf;
    }
    rep.all = rep.upper_forward && rep.lower_forward && rep.upper_backward && rep.lower_backward && rep.transverse;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::singleton_capacity;
    use crate::lattice::LatticePoint as P;
    use crate::walk::simulate_srw;
    use proptest::prelude::*;

    #[test]
    fn normalizer_values() {
        // independent high-precision evaluations of the closed forms
        let z = normalizers(1_000_000).unwrap();
        assert!((z.h3 - 1435.2042290290126).abs() < 1e-9);
        assert!((z.hhat3 - 1657.6876723972435).abs() < 1e-9);
        assert!((z.phi - 1323.0751841766239).abs() < 1e-9);
        assert!((z.psi - 791.48756149355919).abs() < 1e-9);
        assert!((z.j3(1.0) - 1678.5362197364481).abs() < 1e-9);
        assert!((z.logs[1] - 2.6257919144760108).abs() < 1e-14);
        assert!((z.logs[2] - 0.96538253225195856).abs() < 1e-14);
        assert!((z.logs[3] + 0.035230849712728423).abs() < 1e-14);
        let z = normalizers(100_000).unwrap();
        assert!((z.h3 - 473.076301283861).abs() < 1e-9);
        assert!((z.hhat3 - 543.4121240343388).abs() < 1e-9);
        assert!((z.phi - 403.60627329796351).abs() < 1e-9);
        assert!((z.psi - 259.46017702839349).abs() < 1e-9);
        assert!((z.j3(1.0) - 553.28411827572787).abs() < 1e-9);
        let z = normalizers(16).unwrap();
        assert!((z.h3 - 176.31899914304651).abs() < 1e-9);
        assert!((z.hhat3 - 10.639942980456105).abs() < 1e-12);
        assert!((z.phi - 3.2981310918570859).abs() < 1e-12);
        assert!((z.psi - 5.0801985586665079).abs() < 1e-12);
        assert!((z.j3(1.0) - 206.21303944283496).abs() < 1e-9);
        assert!(matches!(normalizers(15), Err(CapError::Domain(_))));
    }

    #[test]
    fn normalizer_ratio_identity() {
        for n in [16u64, 100, 12345, 1_000_000, 1 << 40] {
            let z = normalizers(n).unwrap();
            let lhs = z.h3 / z.hhat3;
            let rhs = z.logs[1] / z.logs[2] / std::f64::consts::PI;
            assert!(((lhs - rhs) / rhs).abs() < 1e-12);
            assert!(((h3(n as f64).unwrap() - z.h3) / z.h3).abs() < 1e-15);
        }
    }

    fn pl(t: &[f64], v: &[f64]) -> PiecewiseLinear {
        PiecewiseLinear::new(t.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn rate_examples() {
        let grid = vec![0.0, 0.25, 0.5, 1.0];
        assert!((rate_s(&PiecewiseLinear::sample(grid.clone(), |t| t).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!((rate_s(&PiecewiseLinear::sample(grid.clone(), |t| 2.0 * t).unwrap()).unwrap() - 4.0).abs() < 1e-14);
        assert!((rate_s(&pl(&[0.0, 0.5, 1.0], &[0.0, 0.0, 1.0])).unwrap() - 2.0).abs() < 1e-15);
        assert!(rate_s(&pl(&[0.0, 0.5, 0.5, 1.0], &[0.0, 0.0, 0.0, 1.0])).is_err());
        assert!(rate_s(&pl(&[0.0, 1.0], &[0.1, 1.0])).is_err());
        assert!((rate_k(&pl(&[0.0, 4.0], &[2.0, 2.0])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(rate_k(&PiecewiseLinear::sample(grid.clone(), |t| t).unwrap()).unwrap(), f64::INFINITY);
        let g = PiecewiseLinear::sample(grid, |t| 1.0 + t).unwrap();
        assert!((rate_k(&g).unwrap() - 0.5).abs() < 1e-15);
        assert!(rate_k(&pl(&[0.0, 0.5, 1.0], &[1.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn rate_k_matches_fine_quadrature() {
        let g = pl(&[0.0, 0.3, 1.1, 2.0], &[0.5, 1.7, 0.9, 2.5]);
        let exact = rate_k(&g).unwrap();
        // composite Simpson on each cell
        let mut num = 0.0;
        for c in 0..3 {
            let (a, b) = (g.t[c], g.t[c + 1]);
            let f = |x: f64| {
                let y = g.v[c] + (g.v[c + 1] - g.v[c]) * (x - a) / (b - a);
                1.0 / (y * y)
            };
            let m = 20_000;
            let h = (b - a) / m as f64;
            let mut s = f(a) + f(b);
            for i in 1..m {
                s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            num += s * h / 3.0;
        }
        assert!((exact - num).abs() < 1e-9, "{exact} vs {num}");
    }

    #[test]
    fn membership_examples() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let id = PiecewiseLinear::sample(grid.clone(), |t| t).unwrap();
        assert_eq!(membership_s(&id, 0.01).unwrap(), Membership::Inside);
        let two = PiecewiseLinear::sample(grid.clone(), |t| 2.0 * t).unwrap();
        match membership_s(&two, 1.0).unwrap() {
            Membership::Near { dist_upper } => assert!((dist_upper - 1.0).abs() < 1e-12),
            m => panic!("{m:?}"),
        }
        assert!(matches!(membership_s(&two, 0.5).unwrap(), Membership::Outside { .. }));
        let fine: Vec<f64> = (0..=40).map(|k| if k == 0 { 0.0 } else { 2f64.powi(k - 40) }).collect();
        let sq = PiecewiseLinear::sample(fine, f64::sqrt).unwrap();
        assert!(rate_s(&sq).unwrap() > 4.0);
        assert!(!matches!(membership_s(&sq, 0.01).unwrap(), Membership::Inside));
    }

    #[test]
    fn holder_examples() {
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
        assert!(holder_check(&PiecewiseLinear::sample(grid.clone(), |_| 0.0).unwrap(), 0.0).is_empty());
        assert!(holder_check(&PiecewiseLinear::sample(grid.clone(), |t| t).unwrap(), 0.0).is_empty());
        let jump = PiecewiseLinear::sample(grid, |t| if t > 0.5 { 10.0 } else { 0.0 }).unwrap();
        assert!(!holder_check(&jump, 0.5).is_empty());
    }

    #[test]
    fn isotonic_fit() {
        assert_eq!(isotonic(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic(&[3.0, 1.0], &[3.0, 1.0]), vec![2.5, 2.5]);
    }

    #[test]
    fn constant_path_trajectory() {
        let pos = vec![P::ORIGIN; 101];
        let grid = [0.0, 0.25, 0.5, 1.0];
        let tr = trajectory_of_positions(&pos, 100, &grid, TrajectoryKind::F, &TrajectorySettings::default()).unwrap();
        let h = normalizers(100).unwrap().h3;
        assert_eq!(tr.values[0], 0.0);
        for v in &tr.values[1..] {
            assert!((v - singleton_capacity() / h).abs() < 1e-12);
        }
        let mut buf = Vec::new();
        write_trajectory_csv(&tr, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,value,stderr,exact");
        assert_eq!(lines[1], "0,0,0,true");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn srw_trajectory_is_monotone() {
        let w = simulate_srw(2000, 3);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let tr = trajectory(&w, &grid, TrajectoryKind::G, &TrajectorySettings::default()).unwrap();
        assert!(tr.values.windows(2).all(|v| v[1] >= v[0]));
        assert!(tr.meta.exact.iter().all(|&e| e));
        let settings = TrajectorySettings { exact_max_points: 100, mc: McSettings { kill_radius_factor: 20.0, samples_per_point: 200 }, subsample_fraction: 1.0, seed: 1 };
        let tr = trajectory(&w, &grid, TrajectoryKind::F, &settings).unwrap();
        assert!(tr.values.windows(2).all(|v| v[1] >= v[0]));
        assert!(tr.meta.exact.iter().any(|&e| !e));
    }

    #[test]
    fn multipoint_e_examples() {
        let n = 10_000u64;
        let spec = MultiPointSpec { a: vec![0.5, 0.8], t: vec![0.5, 1.0], delta: 0.1, delta_tilde: 0.05 };
        // constant path: no increment can reach a positive band
        let pos = vec![P::ORIGIN; n as usize + 1];
        let grid = [0.0, 0.5, 1.0];
        let tr = trajectory_of_positions(&pos, n, &grid, TrajectoryKind::F, &TrajectorySettings::default()).unwrap();
        assert_eq!(check_multipoint_e(&tr, &spec).unwrap(), vec![false, false]);
        // synthetic increments exactly on the band centres
        let h = normalizers(n).unwrap().h3;
        let c1 = 0.5 * h3(5000.0).unwrap();
        let c2 = c1 + 0.8 * h3(5000.0).unwrap();
        let mut syn = tr.clone();
        syn.values = vec![0.0, c1 / h, c2 / h];
        assert_eq!(check_multipoint_e(&syn, &spec).unwrap(), vec![true, true]);
        let bad = MultiPointSpec { t: vec![0.3, 1.0], ..spec };
        assert!(check_multipoint_e(&syn, &bad).is_err());
    }

    /// Path whose first coordinate follows ⌊slope·l⌋ and which otherwise
    /// alternates ±y.
    fn staircase(n: usize, slope: f64) -> WalkPath {
        let mut pos = vec![P::ORIGIN];
        let mut up = true;
        for l in 1..=n {
            let prev = *pos.last().unwrap();
            let target = (slope * l as f64).floor() as i32;
            let next = if target > prev.x {
                prev + P::new(1, 0, 0)
            } else {
                up = !up;
                prev + P::new(0, if up { -1 } else { 1 }, 0)
            };
            pos.push(next);
        }
        WalkPath::from_positions(pos).unwrap()
    }

    #[test]
    fn multipoint_f_examples() {
        let n = 10_000usize;
        let spec = MultiPointSpec { a: vec![0.6], t: vec![1.0], delta: 0.05, delta_tilde: 0.1 };
        let slope = 0.6 * phi(n as f64).unwrap() / n as f64 * 1.02;
        assert_eq!(check_multipoint_f(&staircase(n, slope), &spec).unwrap(), vec![true]);
        let zero = WalkPath::from_steps(P::ORIGIN, &[2, 3].repeat(n / 2)).unwrap();
        assert_eq!(check_multipoint_f(&zero, &spec).unwrap(), vec![false]);
    }

    #[test]
    fn corridor_examples() {
        let n = 10_000usize;
        let a = 1.0;
        let slope = a * phi(n as f64).unwrap() / n as f64;
        let spec = CorridorSpec { a, delta: 0.05, kappa: 0.1, theta: 0.2, j: n / 2, chi: 1.5 };
        let p = staircase(n, slope);
        let rep = check_corridor(&p, &spec).unwrap();
        assert!(rep.upper_forward && rep.lower_forward && rep.upper_backward && rep.lower_backward, "{rep:?}");
        assert!(rep.transverse && rep.all && rep.anchor_admissible);
        // one long excursion in y right after the anchor
        let mut codes = p.step_codes();
        for c in codes.iter_mut().skip(n / 2).take(200) {
            if *c == 3 {
                *c = 2;
            }
        }
        let q = WalkPath::from_steps(P::ORIGIN, &codes).unwrap();
        assert!(!check_corridor(&q, &spec).unwrap().transverse);
        assert!(check_corridor(&p, &CorridorSpec { kappa: 0.01, ..spec }).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn rate_scaling(vals in proptest::collection::vec(-3.0f64..3.0, 1..12), c in 0.1f64..5.0) {
            let k = vals.len();
            let t: Vec<f64> = (0..=k).map(|i| (i as f64 / k as f64).powf(1.3)).collect();
            let mut v = vec![0.0];
            v.extend(vals.iter().copied());
            let f = PiecewiseLinear::new(t.clone(), v).unwrap();
            let r = rate_s(&f).unwrap();
            prop_assert!((rate_s(&f.scaled(c)).unwrap() - c * c * r).abs() <= 1e-12 * (1.0 + c * c * r));
            if r > 1.0 {
                prop_assert_eq!(membership_s(&f.scaled(r.powf(-0.5)), 0.0).unwrap(), Membership::Inside);
            }
            let g = PiecewiseLinear::new(t, vals.iter().map(|x| 0.1 + x.abs()).chain([1.0]).collect()).unwrap();
            let rk = rate_k(&g).unwrap();
            prop_assert!((rate_k(&g.scaled(c)).unwrap() - rk / (c * c)).abs() <= 1e-12 * rk / (c * c));
        }
    }
}
