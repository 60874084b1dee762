//! Path blueprints that wrap a cube or a sphere with stacked polygonal
//! cross-sections, their lattice realizations, and the event checks run on
//! realized paths.
//!
//! A blueprint is a vertex sequence v_0..v_f with scheduled arrival times
//! t_0..t_f. Each level is a closed polygon p_{0,l} → ... → p_{m,l} = p_{0,l}
//! at height h_l, and consecutive levels are joined at vertex a = 0. Times
//! follow t_i = d_i·√(3n/(2·log⁽²⁾n))/(1−κ), rounded, with single-step delays
//! wherever an edge would otherwise have the wrong parity.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{iterated_log, normalizers};
use crate::error::{CapError, Result};
use crate::estimator::{Octree, DEFAULT_OPENING_ANGLE};
use crate::green::default_table;
use crate::lattice::{LatticePoint, UNIT_STEPS};
use crate::rng::{label_key, substream};
use crate::walk::{BridgeSampler, WalkPath};

/// Cube side over sphere radius: the cube's corners lie on the sphere.
pub const CUBE_SCALE: f64 = 1.154_700_538_379_251_5; // 2/√3

/// Longest path [`realize_deterministic`] and [`realize_bridges`] will build.
pub const MAX_REALIZED_STEPS: u64 = 50_000_000;

const TARGET_TRIES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlueprintKind {
    Cube,
    Sphere,
}

/// Planar edges run along a cross-section; level edges join two cross-sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Planar,
    Level,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlueprintParams {
    pub kappa: f64,
    /// Cube only; 0 for spheres.
    pub delta: f64,
    /// Cube side / j₃ (cube) or 1 (sphere).
    pub scale: f64,
    /// Polygon order: 4 for the cube squares.
    pub m: u32,
    /// Real level parameter: ℓ for the cube, (1−ε)·log⁽³⁾n·t(n) for the sphere.
    pub ell: f64,
    /// Levels run over −levels..=levels.
    pub levels: i64,
    /// Height difference between consecutive levels.
    pub spacing: f64,
    pub t_fn: f64,
    pub g_fn: f64,
    pub epsilon: f64,
    /// n·k_n·t(n), the sphere's target point count; 0 for the cube.
    pub nominal_points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathBlueprint {
    pub kind: BlueprintKind,
    pub n: u64,
    pub k_n: f64,
    pub j3: f64,
    pub vertices: Vec<[f64; 3]>,
    /// Nearest lattice points of the vertices.
    pub lattice: Vec<LatticePoint>,
    pub edges: Vec<EdgeKind>,
    pub times: Vec<u64>,
    pub perimeters: Vec<f64>,
    /// Scheduled steps per unit of Euclidean length.
    pub steps_per_unit: f64,
    /// Edges whose duration was lengthened by one step to fix parity.
    pub parity_fixups: Vec<usize>,
    /// Set when the times were rescaled to a fixed step budget.
    pub budget: Option<u64>,
    pub params: BlueprintParams,
}

/// max(2, log⁽⁴⁾n), the default slowly growing function.
pub fn slow_default(n: u64) -> f64 {
    iterated_log(n as f64, 4).filter(|v| v.is_finite()).map_or(2.0, |v| v.max(2.0))
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Stacked closed polygons joined at vertex 0, bottom to top.
fn polygon_levels(
    heights: &[f64],
    radius: impl Fn(f64) -> f64,
    m: u32,
    phase: f64,
) -> (Vec<[f64; 3]>, Vec<EdgeKind>) {
    let mut v = Vec::with_capacity(heights.len() * (m as usize + 1));
    let mut e = Vec::new();
    for (li, &h) in heights.iter().enumerate() {
        if li > 0 {
            e.push(EdgeKind::Level);
        }
        let r = radius(h);
        for a in 0..=m {
            let th = phase + 2.0 * PI * (a % m) as f64 / m as f64;
            v.push([r * th.cos(), r * th.sin(), h]);
            if a > 0 {
                e.push(EdgeKind::Planar);
            }
        }
    }
    (v, e)
}

/// Rounded arrival times with parity delays; returns (times, fixups).
fn schedule(lattice: &[LatticePoint], perimeters: &[f64], steps_per_unit: f64) -> (Vec<u64>, Vec<usize>) {
    let mut times = Vec::with_capacity(lattice.len());
    let mut fixups = Vec::new();
    times.push(0u64);
    let mut shift = 0u64;
    for i in 0..lattice.len() - 1 {
        let need = (lattice[i + 1] - lattice[i]).norm_l1() as u64;
        let raw = (perimeters[i + 1] * steps_per_unit).round() as u64 + shift;
        let mut dt = raw.saturating_sub(times[i]);
        if dt == 0 {
            dt = if need % 2 == 0 { 2 } else { 1 };
            shift += dt;
            fixups.push(i);
        } else if (dt + need) % 2 == 1 {
            dt += 1;
            shift += 1;
            fixups.push(i);
        }
        times.push(times[i] + dt);
    }
    (times, fixups)
}

fn assemble(
    kind: BlueprintKind,
    n: u64,
    k_n: f64,
    j3: f64,
    vertices: Vec<[f64; 3]>,
    edges: Vec<EdgeKind>,
    steps_per_unit: f64,
    params: BlueprintParams,
) -> Result<PathBlueprint> {
    let lattice = vertices.iter().map(|v| LatticePoint::round(*v)).collect::<Result<Vec<_>>>()?;
    let mut perimeters = Vec::with_capacity(vertices.len());
    perimeters.push(0.0);
    for w in vertices.windows(2) {
        let d = perimeters.last().unwrap() + norm(sub(w[1], w[0]));
        perimeters.push(d);
    }
    let (times, parity_fixups) = schedule(&lattice, &perimeters, steps_per_unit);
    Ok(PathBlueprint {
        kind,
        n,
        k_n,
        j3,
        vertices,
        lattice,
        edges,
        times,
        perimeters,
        steps_per_unit,
        parity_fixups,
        budget: None,
        params,
    })
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(CapError::domain(format!("κ must lie in (0, 1), got {kappa}")));
    }
    Ok(())
}

/// Square cross-sections of the cube of side K·j₃ inscribed in the sphere of
/// radius j₃(n, k_n).
pub fn cube_blueprint(n: u64, k_n: f64, kappa: f64, delta: f64) -> Result<PathBlueprint> {
    check_kappa(kappa)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CapError::domain(format!("δ must lie in (0, 1), got {delta}")));
    }
    if !(k_n > 0.0 && k_n.is_finite()) {
        return Err(CapError::domain(format!("k_n must be positive, got {k_n}")));
    }
    let nz = normalizers(n)?;
    let (l2, l3) = (nz.logs[1], nz.logs[2]);
    let j3 = nz.j3(k_n);
    let jt = CUBE_SCALE * j3;
    let lower = (n as f64 / l2).sqrt() * l3 * l3;
    if j3 <= lower {
        log::warn!("j₃ = {j3:.1} is not above √(n/log⁽²⁾n)·(log⁽³⁾n)² = {lower:.1}");
    }
    let ell = nz.phi / (8.0 * jt);
    if ell < 1.0 {
        log::warn!("cube has ℓ = {ell:.4} < 1 at n = {n}, k_n = {k_n}; only the square at height 0 remains");
    }
    let levels = ell.floor() as i64;
    let spacing = 4.0 * jt * jt / nz.phi;
    let heights: Vec<f64> = (-levels..=levels).map(|k| k as f64 * spacing).collect();
    let (vertices, edges) = polygon_levels(&heights, |_| jt / 2f64.sqrt(), 4, PI / 4.0);
    let spu = (3.0 * n as f64 / (2.0 * l2)).sqrt() / (1.0 - kappa);
    let params = BlueprintParams {
        kappa,
        delta,
        scale: CUBE_SCALE,
        m: 4,
        ell,
        levels,
        spacing,
        t_fn: 0.0,
        g_fn: slow_default(n),
        epsilon: 0.0,
        nominal_points: 0.0,
    };
    assemble(BlueprintKind::Cube, n, k_n, j3, vertices, edges, spu, params)
}

/// m-gon cross-sections of the sphere of radius j₃(n, k_n).
pub fn sphere_blueprint(
    n: u64,
    k_n: f64,
    m: u32,
    t_fn: f64,
    g_fn: f64,
    epsilon: f64,
    kappa: f64,
) -> Result<PathBlueprint> {
    check_kappa(kappa)?;
    if m < 3 {
        return Err(CapError::domain(format!("polygon order must be at least 3, got {m}")));
    }
    if !(t_fn >= 2.0 && g_fn >= 2.0) {
        return Err(CapError::domain(format!("slow functions must be ≥ 2, got t = {t_fn}, g = {g_fn}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CapError::domain(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    if !(k_n > 0.0 && k_n.is_finite()) {
        return Err(CapError::domain(format!("k_n must be positive, got {k_n}")));
    }
    let nz = normalizers(n)?;
    let (l2, l3) = (nz.logs[1], nz.logs[2]);
    let j3 = nz.j3(k_n);
    let ell = (1.0 - epsilon) * l3 * t_fn;
    if ell < 1.0 {
        log::warn!("sphere height count (1−ε)·log⁽³⁾n·t(n) = {ell:.4} < 1 at n = {n}; only the equator remains");
    }
    let levels = ell.floor() as i64;
    let spacing = j3 / (l3 * t_fn);
    let heights: Vec<f64> = (-levels..=levels).map(|l| l as f64 * spacing).collect();
    let (vertices, edges) = polygon_levels(&heights, |h| (j3 * j3 - h * h).max(0.0).sqrt(), m, 0.0);
    let spu = (3.0 * n as f64 / (2.0 * l2)).sqrt() / (1.0 - kappa);
    let params = BlueprintParams {
        kappa,
        delta: 0.0,
        scale: 1.0,
        m,
        ell,
        levels,
        spacing,
        t_fn,
        g_fn,
        epsilon,
        nominal_points: n as f64 * k_n * t_fn,
    };
    assemble(BlueprintKind::Sphere, n, k_n, j3, vertices, edges, spu, params)
}

impl PathBlueprint {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Final scheduled time t_f.
    pub fn t_final(&self) -> u64 {
        *self.times.last().unwrap()
    }

    /// Total perimeter d_f.
    pub fn d_final(&self) -> f64 {
        *self.perimeters.last().unwrap()
    }

    /// (n + √(3n/(2·log⁽²⁾n))·K·j₃)/(1−κ): the cube schedule's nominal end
    /// time, which counts 2ℓ squares for the whole perimeter.
    pub fn closed_form_t_final(&self) -> Result<f64> {
        let l2 = normalizers(self.n)?.logs[1];
        let n = self.n as f64;
        Ok((n + (3.0 * n / (2.0 * l2)).sqrt() * self.params.scale * self.j3) / (1.0 - self.params.kappa))
    }

    /// Vertices per level (m + 1).
    pub fn level_block(&self) -> usize {
        self.params.m as usize + 1
    }

    pub fn level_count(&self) -> usize {
        (2 * self.params.levels + 1) as usize
    }

    /// Unit vector of edge i.
    pub fn direction(&self, i: usize) -> [f64; 3] {
        let d = sub(self.vertices[i + 1], self.vertices[i]);
        let r = norm(d);
        if r == 0.0 {
            return [0.0; 3];
        }
        [d[0] / r, d[1] / r, d[2] / r]
    }

    /// Length scale of the endpoint tolerance for edge i.
    pub fn edge_scale(&self, i: usize) -> f64 {
        match (self.edges[i], self.kind) {
            (EdgeKind::Level, _) => self.params.spacing,
            (EdgeKind::Planar, BlueprintKind::Cube) => CUBE_SCALE * self.j3,
            (EdgeKind::Planar, BlueprintKind::Sphere) => self.j3,
        }
    }

    /// Same geometry with times rescaled so that t_f ≈ `steps` (up to the
    /// parity delays).
    pub fn with_budget(&self, steps: u64) -> Result<PathBlueprint> {
        let df = self.d_final();
        if steps == 0 || !(df > 0.0) {
            return Err(CapError::domain("step budget must be positive on a nondegenerate blueprint"));
        }
        let spu = steps as f64 / df;
        let (times, parity_fixups) = schedule(&self.lattice, &self.perimeters, spu);
        Ok(PathBlueprint {
            times,
            parity_fixups,
            steps_per_unit: spu,
            budget: Some(steps),
            ..self.clone()
        })
    }

    /// Checks the structural invariants a deserialized blueprint must satisfy.
    pub fn validate(&self) -> Result<()> {
        let f = self.vertices.len();
        if f < 2 || self.lattice.len() != f || self.times.len() != f || self.perimeters.len() != f {
            return Err(CapError::domain("blueprint arrays have inconsistent lengths"));
        }
        if self.edges.len() != f - 1 {
            return Err(CapError::domain("blueprint needs one edge kind per consecutive vertex pair"));
        }
        if self.times[0] != 0 || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CapError::domain("blueprint times must start at 0 and increase strictly"));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if LatticePoint::round(*v)? != self.lattice[i] {
                return Err(CapError::domain(format!("lattice vertex {i} is not the rounding of v_{i}")));
            }
        }
        Ok(())
    }
}

/// Writes the monotone staircase from `a` to `b` padded to exactly `dt` steps.
///
/// Moves are spread over the segment in Bresenham fashion, and the slack is
/// spent on forward/back oscillations along the dominant axis, evenly
/// interleaved with the moves.
fn staircase(a: LatticePoint, b: LatticePoint, dt: u64, out: &mut Vec<LatticePoint>) {
    let d = (b - a).coords();
    let mag: [u64; 3] = std::array::from_fn(|k| d[k].unsigned_abs() as u64);
    let moves: u64 = mag.iter().sum();
    let pairs = (dt - moves) / 2;
    let dom = (0..3).max_by_key(|&k| (mag[k], std::cmp::Reverse(k))).unwrap();
    let osc = UNIT_STEPS[2 * dom + (d[dom] < 0) as usize];
    let step_of = |k: usize| UNIT_STEPS[2 * k + (d[k] < 0) as usize];
    let units = moves + pairs;
    let mut done = [0u64; 3];
    let mut moved = 0u64;
    let mut cur = a;
    for u in 0..units {
        let is_pair = pairs > 0 && (u + 1) * pairs / units > u * pairs / units;
        if is_pair {
            cur = cur + osc;
            out.push(cur);
            cur = cur - osc;
            out.push(cur);
        } else {
            // axis lagging furthest behind its share of the moves so far
            let k = (0..3)
                .filter(|&k| done[k] < mag[k])
                .max_by(|&i, &j| {
                    let li = (moved + 1) as f64 * mag[i] as f64 / moves as f64 - done[i] as f64;
                    let lj = (moved + 1) as f64 * mag[j] as f64 / moves as f64 - done[j] as f64;
                    li.partial_cmp(&lj).unwrap().then(j.cmp(&i))
                })
                .unwrap();
            done[k] += 1;
            moved += 1;
            cur = cur + step_of(k);
            out.push(cur);
        }
    }
    debug_assert_eq!(cur, b);
}

fn check_length(b: &PathBlueprint) -> Result<()> {
    if b.t_final() > MAX_REALIZED_STEPS {
        return Err(CapError::resource(format!(
            "blueprint needs {} steps, above the realization limit {MAX_REALIZED_STEPS}",
            b.t_final()
        )));
    }
    Ok(())
}

fn edge_span(b: &PathBlueprint, i: usize, from: LatticePoint, to: LatticePoint) -> Result<u64> {
    let dt = b.times[i + 1] - b.times[i];
    let need = (to - from).norm_l1() as u64;
    if need > dt {
        return Err(CapError::domain(format!(
            "edge {i} ({from} → {to}) needs {need} steps but is scheduled for {dt}"
        )));
    }
    if (dt - need) % 2 == 1 {
        return Err(CapError::domain(format!("edge {i} ({from} → {to}) has a parity mismatch over {dt} steps")));
    }
    Ok(dt)
}

/// Nearest-neighbour path that sits at round(v_i) at every time t_i.
pub fn realize_deterministic(b: &PathBlueprint) -> Result<WalkPath> {
    b.validate()?;
    check_length(b)?;
    let mut pos = Vec::with_capacity(b.t_final() as usize + 1);
    pos.push(b.lattice[0]);
    for i in 0..b.edge_count() {
        let dt = edge_span(b, i, b.lattice[i], b.lattice[i + 1])?;
        staircase(b.lattice[i], b.lattice[i + 1], dt, &mut pos);
    }
    WalkPath::from_positions(pos)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeRealization {
    pub path: WalkPath,
    /// Position at each scheduled time t_i.
    pub targets: Vec<LatticePoint>,
    pub ball_frac: f64,
}

/// Uniform lattice point of the ball of radius r around v that the walk at
/// `from` can reach in exactly `dt` steps.
fn sample_target<R: Rng + ?Sized>(
    v: [f64; 3],
    r: f64,
    from: LatticePoint,
    dt: u64,
    rng: &mut R,
) -> Option<LatticePoint> {
    let lo: [i64; 3] = std::array::from_fn(|k| (v[k] - r).ceil() as i64);
    let hi: [i64; 3] = std::array::from_fn(|k| (v[k] + r).floor() as i64);
    if (0..3).any(|k| lo[k] > hi[k]) {
        return None;
    }
    let f = from.coords();
    for _ in 0..TARGET_TRIES {
        let c: [i64; 3] = std::array::from_fn(|k| rng.random_range(lo[k]..=hi[k]));
        let off: [f64; 3] = std::array::from_fn(|k| c[k] as f64 - v[k]);
        if norm(off) > r {
            continue;
        }
        let l1: u64 = (0..3).map(|k| (c[k] - f[k] as i64).unsigned_abs()).sum();
        if l1 <= dt && (dt - l1) % 2 == 0 {
            return LatticePoint::try_new(c[0], c[1], c[2]).ok();
        }
    }
    None
}

/// Concatenated exact bridges through targets drawn uniformly from the balls
/// of radius `ball_frac`·scale around each vertex (scale as in the endpoint
/// events). `ball_frac = 0` pins every target to round(v_i).
pub fn realize_bridges(b: &PathBlueprint, ball_frac: f64, seed: u64) -> Result<BridgeRealization> {
    b.validate()?;
    check_length(b)?;
    if !(ball_frac >= 0.0 && ball_frac.is_finite()) {
        return Err(CapError::domain(format!("ball fraction must be ≥ 0, got {ball_frac}")));
    }
    let mut rng = substream(seed, &[label_key("construction-bridges")]);
    let mut targets = vec![b.lattice[0]];
    let mut codes = Vec::with_capacity(b.t_final() as usize);
    let mut sampler = BridgeSampler::new();
    for i in 0..b.edge_count() {
        let from = targets[i];
        let dt = b.times[i + 1] - b.times[i];
        let to = if ball_frac == 0.0 {
            b.lattice[i + 1]
        } else {
            let r = ball_frac * b.edge_scale(i);
            if r.round() < 1.0 {
                return Err(CapError::domain(format!("edge {i}: ball radius {r:.3} rounds below 1")));
            }
            sample_target(b.vertices[i + 1], r, from, dt, &mut rng).ok_or_else(|| {
                CapError::domain(format!("edge {i}: no reachable target of matching parity within radius {r:.3}"))
            })?
        };
        edge_span(b, i, from, to)?;
        sampler.sample_into(to - from, dt as usize, &mut rng, &mut codes)?;
        targets.push(to);
    }
    let path = WalkPath::from_steps(b.lattice[0], &codes)?;
    Ok(BridgeRealization { path, targets, ball_frac })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventThresholds {
    pub delta: f64,
    /// Sphere segments allow a √ζ fraction of bad times.
    pub zeta: f64,
    /// Transverse fluctuation factor; None uses max(2, log⁽⁴⁾n) for cubes and
    /// the blueprint's g(n) for spheres.
    pub transverse_factor: Option<f64>,
    pub opening_angle: f64,
}

impl Default for EventThresholds {
    fn default() -> Self {
        EventThresholds { delta: 0.1, zeta: 0.01, transverse_factor: None, opening_angle: DEFAULT_OPENING_ANGLE }
    }
}

/// Good-time tallies on one planar segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentTimes {
    pub times: usize,
    pub gf_good: usize,
    pub gl_good: usize,
    /// Times where GF or GL fails.
    pub bad: usize,
    pub sg: bool,
}

impl SegmentTimes {
    pub fn gf_fraction(&self) -> f64 {
        self.gf_good as f64 / self.times as f64
    }

    pub fn gl_fraction(&self) -> f64 {
        self.gl_good as f64 / self.times as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEvents {
    pub kind: EdgeKind,
    pub te: bool,
    pub be: bool,
    pub fe: bool,
    /// Endpoint error along the checked coordinate.
    pub endpoint_error: f64,
    /// Largest transverse excursion over the edge.
    pub transverse_max: f64,
    /// Planar edges only.
    pub segment: Option<SegmentTimes>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSummary {
    pub edges: usize,
    pub planar: usize,
    pub te: usize,
    pub be: usize,
    pub fe: usize,
    pub sg: usize,
    pub all_fe: bool,
    pub all_sg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub edges: Vec<EdgeEvents>,
    pub gf_bound: f64,
    pub sg_fraction: f64,
    pub transverse_factor: f64,
    pub thresholds: EventThresholds,
    pub summary: EventSummary,
}

/// Unit vectors spanning the plane orthogonal to e.
fn transverse_basis(e: [f64; 3]) -> [[f64; 3]; 2] {
    let h = (e[0] * e[0] + e[1] * e[1]).sqrt();
    if h < 1e-12 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    }
    // horizontal normal ẑ × e, then e × o
    let o = [-e[1] / h, e[0] / h, 0.0];
    let w = [e[1] * o[2] - e[2] * o[1], e[2] * o[0] - e[0] * o[2], e[0] * o[1] - e[1] * o[0]];
    [o, w]
}

/// Fenwick tree of prefix maxima.
struct MaxFenwick(Vec<f64>);

impl MaxFenwick {
    fn new(n: usize) -> Self {
        MaxFenwick(vec![f64::NEG_INFINITY; n + 1])
    }

    fn update(&mut self, mut i: usize, v: f64) {
        i += 1;
        while i < self.0.len() {
            self.0[i] = self.0[i].max(v);
            i += i & i.wrapping_neg();
        }
    }

    /// max over positions < i.
    fn query(&self, mut i: usize) -> f64 {
        let mut m = f64::NEG_INFINITY;
        while i > 0 {
            m = m.max(self.0[i]);
            i -= i & i.wrapping_neg();
        }
        m
    }
}

/// For each l, whether some t on the given side (t ≥ l + gap or t ≤ l − gap)
/// has C(t) < C(l) and D(t) > D(l).
fn dominance_fail(c: &[f64], d: &[f64], first: impl Fn(usize) -> Option<usize>, forward: bool, tol: f64) -> Vec<bool> {
    let n = c.len();
    let mut sorted: Vec<f64> = c.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = |v: f64| sorted.partition_point(|&s| s < v);
    let mut fen = MaxFenwick::new(n);
    let mut out = vec![false; n];
    let order: Vec<usize> = if forward { (0..n).rev().collect() } else { (0..n).collect() };
    // `first(l)` gives the nearest admissible t; everything beyond it is admissible too
    let mut next = if forward { n } else { 0 };
    for &l in &order {
        if let Some(t0) = first(l) {
            if forward {
                while next > t0 {
                    next -= 1;
                    fen.update(rank(c[next]), d[next]);
                }
            } else {
                while next <= t0 {
                    fen.update(rank(c[next]), d[next]);
                    next += 1;
                }
            }
        }
        let k = rank(c[l] - tol);
        out[l] = fen.query(k) > d[l] + tol;
    }
    out
}

/// Linear-growth test at every time of a segment with projected positions p.
///
/// `absolute` selects the two-sided form |⟨S_t − S_l, e⟩| within
/// (1 ± 10δ)·s·|t − l|; otherwise the signed difference quotient must lie in
/// [(1 − 10δ)s, (1 + 10δ)s].
fn linear_growth(p: &[f64], gap: f64, delta: f64, absolute: bool) -> Vec<bool> {
    let n = p.len();
    let dt = (n - 1) as f64;
    let s = (p[n - 1] - p[0]).abs() / dt;
    let (hi, lo) = ((1.0 + 10.0 * delta) * s, (1.0 - 10.0 * delta) * s);
    let tol = 1e-9 * (1.0 + p.iter().fold(0.0f64, |m, v| m.max(v.abs())) + hi * dt);
    // admissible partners: t > l + gap or t < l − gap
    let after = |l: usize| -> Option<usize> {
        let t = (l as f64 + gap).floor() as usize + 1;
        (t < n).then_some(t)
    };
    let before = |l: usize| -> Option<usize> {
        let t = (l as f64 - gap).ceil() as i64 - 1;
        (t >= 0).then_some(t as usize)
    };
    let mut ok = vec![true; n];
    let series = |k: f64, sign: f64| -> Vec<f64> { (0..n).map(|t| sign * p[t] - k * t as f64).collect() };
    // suffix / prefix extrema of a series
    let suffix = |v: &[f64], take_max: bool| -> Vec<f64> {
        let mut out = vec![0.0; n + 1];
        out[n] = if take_max { f64::NEG_INFINITY } else { f64::INFINITY };
        for t in (0..n).rev() {
            out[t] = if take_max { out[t + 1].max(v[t]) } else { out[t + 1].min(v[t]) };
        }
        out
    };
    let prefix = |v: &[f64], take_max: bool| -> Vec<f64> {
        let mut out = vec![0.0; n];
        let mut acc = if take_max { f64::NEG_INFINITY } else { f64::INFINITY };
        for t in 0..n {
            acc = if take_max { acc.max(v[t]) } else { acc.min(v[t]) };
            out[t] = acc;
        }
        out
    };
    // upper slope bound on ±p: for t after l, A(t) ≤ A(l); for t before l, A(t) ≥ A(l)
    let signs: &[f64] = if absolute { &[1.0, -1.0] } else { &[1.0] };
    for &sg in signs {
        let a = series(hi, sg);
        let (suf, pre) = (suffix(&a, true), prefix(&a, false));
        for l in 0..n {
            if after(l).is_some_and(|t| suf[t] > a[l] + tol) || before(l).is_some_and(|t| pre[t] < a[l] - tol) {
                ok[l] = false;
            }
        }
    }
    if absolute {
        // |p(t) − p(l)| ≥ lo·|t − l| fails iff C(t) < C(l) and D(t) > D(l) (t after l)
        // or D(t) < D(l) and C(t) > C(l) (t before l), with C = p − lo·t, D = p + lo·t
        let c = series(lo, 1.0);
        let d: Vec<f64> = (0..n).map(|t| p[t] + lo * t as f64).collect();
        let fa = dominance_fail(&c, &d, after, true, tol);
        let fb = dominance_fail(&d, &c, before, false, tol);
        for l in 0..n {
            if fa[l] || fb[l] {
                ok[l] = false;
            }
        }
    } else {
        // lower slope bound: for t after l, B(t) ≥ B(l); before, B(t) ≤ B(l)
        let b = series(lo, 1.0);
        let (suf, pre) = (suffix(&b, false), prefix(&b, true));
        for l in 0..n {
            if after(l).is_some_and(|t| suf[t] < b[l] - tol) || before(l).is_some_and(|t| pre[t] > b[l] + tol) {
                ok[l] = false;
            }
        }
    }
    ok
}

/// Evaluates the endpoint (TE), transverse (BE) and good-time (GF, GL, SG)
/// events of a realized path against its blueprint.
pub fn check_construction_events(
    positions: &[LatticePoint],
    b: &PathBlueprint,
    th: &EventThresholds,
) -> Result<EventReport> {
    b.validate()?;
    if positions.len() as u64 != b.t_final() + 1 {
        return Err(CapError::domain(format!(
            "path has {} positions but the blueprint schedules t_f = {}",
            positions.len(),
            b.t_final()
        )));
    }
    if !(th.delta > 0.0 && th.zeta >= 0.0 && th.opening_angle > 0.0) {
        return Err(CapError::domain("event thresholds need δ > 0, ζ ≥ 0 and a positive opening angle"));
    }
    let nz = normalizers(b.n)?;
    let l2 = nz.logs[1];
    let kappa = b.params.kappa;
    let g = th.transverse_factor.unwrap_or(match b.kind {
        BlueprintKind::Cube => slow_default(b.n),
        BlueprintKind::Sphere => b.params.g_fn,
    });
    let gf_bound = (1.0 + 20.0 * th.delta) / (1.0 - kappa) * b.n as f64 / nz.h3;
    let sg_fraction = match b.kind {
        BlueprintKind::Cube => th.delta,
        BlueprintKind::Sphere => th.zeta.sqrt(),
    };
    let rate_len = (2.0 * b.n as f64 / (3.0 * l2)).sqrt();
    let table = default_table();
    let mut edges = Vec::with_capacity(b.edge_count());
    for i in 0..b.edge_count() {
        let (t0, t1) = (b.times[i] as usize, b.times[i + 1] as usize);
        let e = b.direction(i);
        let kind = b.edges[i];
        let scale = b.edge_scale(i);
        let end = positions[t1].as_f64();
        let endpoint_error = match kind {
            EdgeKind::Level => (end[2] - b.vertices[i + 1][2]).abs(),
            EdgeKind::Planar => dot(sub(end, b.vertices[i + 1]), e).abs(),
        };
        let te = endpoint_error <= th.delta * scale;
        let basis = transverse_basis(e);
        let s0 = positions[t0].as_f64();
        let transverse_max = positions[t0..=t1]
            .iter()
            .map(|p| {
                let d = sub(p.as_f64(), s0);
                dot(d, basis[0]).abs().max(dot(d, basis[1]).abs())
            })
            .fold(0.0, f64::max);
        let be = transverse_max <= (scale * rate_len).sqrt() * g;
        let segment = (kind == EdgeKind::Planar).then(|| {
            let seg = &positions[t0..=t1];
            let tree = Octree::new(seg);
            let mut cache: FxHashMap<LatticePoint, f64> = FxHashMap::default();
            for p in seg {
                cache.entry(*p).or_insert(0.0);
            }
            let keys: Vec<LatticePoint> = cache.keys().copied().collect();
            let sums: Vec<f64> = keys.par_iter().map(|y| tree.sum_at(y, table, th.opening_angle)).collect();
            for (k, s) in keys.into_iter().zip(sums) {
                cache.insert(k, s);
            }
            let gf: Vec<bool> = seg.iter().map(|p| cache[p] <= gf_bound).collect();
            let proj: Vec<f64> = seg.iter().map(|p| dot(p.as_f64(), e)).collect();
            let gap = (t1 - t0) as f64 / l2;
            let gl = linear_growth(&proj, gap, th.delta, b.kind == BlueprintKind::Sphere);
            let bad = gf.iter().zip(&gl).filter(|(a, b)| !(**a && **b)).count();
            SegmentTimes {
                times: seg.len(),
                gf_good: gf.iter().filter(|v| **v).count(),
                gl_good: gl.iter().filter(|v| **v).count(),
                bad,
                sg: bad as f64 <= sg_fraction * (t1 - t0) as f64,
            }
        });
        edges.push(EdgeEvents { kind, te, be, fe: te && be, endpoint_error, transverse_max, segment });
    }
    let count = |f: &dyn Fn(&EdgeEvents) -> bool| edges.iter().filter(|e| f(e)).count();
    let planar = count(&|e| e.kind == EdgeKind::Planar);
    let sg = count(&|e| e.segment.is_some_and(|s| s.sg));
    let summary = EventSummary {
        edges: edges.len(),
        planar,
        te: count(&|e| e.te),
        be: count(&|e| e.be),
        fe: count(&|e| e.fe),
        sg,
        all_fe: edges.iter().all(|e| e.fe),
        all_sg: sg == planar,
    };
    Ok(EventReport { edges, gf_bound, sg_fraction, transverse_factor: g, thresholds: *th, summary })
}

/// Smallest vertical distance between the path pieces on consecutive levels.
pub fn level_gaps(positions: &[LatticePoint], b: &PathBlueprint) -> Vec<f64> {
    let blk = b.level_block();
    let zr: Vec<(i32, i32)> = (0..b.level_count())
        .map(|j| {
            let (a, c) = (b.times[blk * j] as usize, b.times[blk * j + blk - 1] as usize);
            positions[a..=c].iter().fold((i32::MAX, i32::MIN), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)))
        })
        .collect();
    zr.windows(2)
        .map(|w| (w[1].0 - w[0].1).max(w[0].0 - w[1].1).max(0) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn cube_closed_form() {
        // independent evaluation of ℓ, spacing and t_f at n = 10⁵, k_n = 0.02
        let b = cube_blueprint(100_000, 0.02, 0.1, 0.05).unwrap();
        let n = 1e5f64;
        let l2 = n.ln().ln();
        let l3 = l2.ln();
        let jt = 2.0 / 3f64.sqrt() * 0.02 * (n * l2).sqrt() / l3;
        let phi = (2.0 / 3.0 * n * l2).sqrt();
        assert!((b.params.ell - phi / (8.0 * jt)).abs() < 1e-12);
        assert_eq!(b.params.levels, 3);
        assert!((b.params.spacing - 4.0 * jt * jt / phi).abs() < 1e-12);
        assert_eq!(b.vertices.len(), 7 * 5);
        assert_eq!(b.edge_count(), 7 * 5 - 1);
        // corners of the cube of side K·j₃ lie on the sphere of radius j₃
        assert!((CUBE_SCALE * b.j3 * 3f64.sqrt() / 2.0 - b.j3).abs() < 1e-12);
        for (i, v) in b.vertices.iter().enumerate() {
            assert!((v[0].abs() - jt / 2.0).abs() < 1e-9 && (v[1].abs() - jt / 2.0).abs() < 1e-9, "{i}");
            assert!(norm(*v) <= b.j3 + 1e-9);
        }
        let df = (2.0 * 3.0 + 1.0) * 4.0 * jt + 6.0 * b.params.spacing;
        assert!((b.d_final() - df).abs() < 1e-9);
        let spu = (3.0 * n / (2.0 * l2)).sqrt() / 0.9;
        assert!((b.t_final() as f64 - df * spu).abs() <= b.edge_count() as f64 + 1.0);
    }

    #[test]
    fn cube_degenerate_and_validation() {
        // ℓ < 1 leaves the single square at height 0
        let b = cube_blueprint(1_000_000, 5.0, 0.1, 0.05).unwrap();
        assert!(b.params.ell < 1.0);
        assert_eq!(b.params.levels, 0);
        assert_eq!(b.level_count(), 1);
        assert_eq!(b.vertices.len(), 5);
        assert!(b.edges.iter().all(|e| *e == EdgeKind::Planar));
        for v in &b.vertices {
            assert!(v[2].abs() < 1e-12);
        }
        assert!(cube_blueprint(10, 0.02, 0.1, 0.05).is_err());
        assert!(cube_blueprint(100_000, 0.02, 1.0, 0.05).is_err());
        assert!(cube_blueprint(100_000, -1.0, 0.1, 0.05).is_err());
    }

    #[test]
    fn sphere_geometry() {
        let b = sphere_blueprint(1_000_000, 1.0, 4, 2.0, 2.0, 0.1, 0.1).unwrap();
        assert_eq!(b.level_block(), 5);
        assert_eq!(b.params.levels, 1);
        assert_eq!(b.vertices.len(), 3 * 5);
        // each level: four polygon hops, then one hop to the next level
        let kinds: Vec<EdgeKind> = b.edges[..5].to_vec();
        assert_eq!(kinds, vec![EdgeKind::Planar; 4].into_iter().chain([EdgeKind::Level]).collect::<Vec<_>>());
        for (v, p) in b.vertices.iter().zip(&b.lattice) {
            assert!((norm(*v) - b.j3).abs() < 1e-9);
            assert!((p.norm() - b.j3).abs() < 1.0);
        }
        assert!(b.params.nominal_points > 0.0);
        assert!(sphere_blueprint(1_000_000, 1.0, 2, 2.0, 2.0, 0.1, 0.1).is_err());
        assert!(sphere_blueprint(1_000_000, 1.0, 4, 1.0, 2.0, 0.1, 0.1).is_err());
        // (1 − ε)·log⁽³⁾n·t(n) < 1 leaves the equator only
        let e = sphere_blueprint(1_000_000, 1.0, 4, 2.0, 2.0, 0.7, 0.1).unwrap();
        assert_eq!(e.level_count(), 1);
        assert_eq!(e.vertices.len(), 5);
    }

    #[test]
    fn straight_edge_staircase() {
        let mut out = vec![LatticePoint::ORIGIN];
        staircase(LatticePoint::ORIGIN, LatticePoint::new(10, 0, 0), 20, &mut out);
        let w = WalkPath::from_positions(out).unwrap();
        let codes = w.step_codes();
        assert_eq!(codes.len(), 20);
        assert_eq!(codes.iter().filter(|&&c| c == 0).count(), 15);
        assert_eq!(codes.iter().filter(|&&c| c == 1).count(), 5);
        assert_eq!(w.end(), LatticePoint::new(10, 0, 0));
        // every back step directly undoes a forward step
        for (k, c) in codes.iter().enumerate() {
            if *c == 1 {
                assert_eq!(codes[k - 1], 0);
            }
        }
    }

    #[test]
    fn deterministic_realization_hits_vertices() {
        let b = cube_blueprint(100_000, 0.02, 0.1, 0.05).unwrap();
        let w = realize_deterministic(&b).unwrap();
        assert_eq!(w.len() as u64, b.t_final());
        for (t, v) in b.times.iter().zip(&b.lattice) {
            assert_eq!(w.positions()[*t as usize], *v);
        }
        let s = sphere_blueprint(100_000, 0.05, 6, 2.0, 2.0, 0.1, 0.1).unwrap();
        let w = realize_deterministic(&s).unwrap();
        for (t, v) in s.times.iter().zip(&s.lattice) {
            assert_eq!(w.positions()[*t as usize], *v);
        }
    }

    #[test]
    fn infeasible_edge_is_named() {
        let mut b = cube_blueprint(100_000, 0.02, 0.1, 0.05).unwrap();
        let dt = b.times[1] - b.times[0];
        for t in b.times.iter_mut().skip(1) {
            *t -= dt - 2;
        }
        let e = realize_deterministic(&b).unwrap_err();
        assert!(e.to_string().contains("edge 0"), "{e}");
    }

    #[test]
    fn budget_rescaling() {
        let b = sphere_blueprint(1_000_000, 0.2, 8, 2.0, 2.0, 0.1, 0.1).unwrap();
        let r = b.with_budget(1_000_000).unwrap();
        assert!(r.t_final() >= 1_000_000 && r.t_final() <= 1_000_000 + r.edge_count() as u64);
        assert_eq!(r.budget, Some(1_000_000));
        r.validate().unwrap();
    }

    #[test]
    fn exact_bridges_match_deterministic_targets() {
        let b = cube_blueprint(100_000, 0.02, 0.1, 0.05).unwrap();
        let r = realize_bridges(&b, 0.0, 3).unwrap();
        assert_eq!(r.targets, b.lattice);
        for (t, v) in b.times.iter().zip(&b.lattice) {
            assert_eq!(r.path.positions()[*t as usize], *v);
        }
    }

    #[test]
    fn bridge_targets_in_balls() {
        let b = cube_blueprint(100_000, 0.05, 0.1, 0.1).unwrap();
        let frac = 0.1;
        let r = realize_bridges(&b, frac, 5).unwrap();
        for i in 0..b.edge_count() {
            let t = r.targets[i + 1];
            assert!(norm(sub(t.as_f64(), b.vertices[i + 1])) <= frac * b.edge_scale(i) + 1e-9);
            assert_eq!(r.path.positions()[b.times[i + 1] as usize], t);
        }
        let rep = check_construction_events(r.path.positions(), &b, &EventThresholds::default()).unwrap();
        assert_eq!(rep.summary.te, rep.summary.edges);
        assert!(realize_bridges(&b, 0.001, 5).is_err());
    }

    #[test]
    fn bridge_transverse_events() {
        let b = cube_blueprint(100_000, 0.05, 0.1, 0.1).unwrap();
        let th = EventThresholds::default();
        let (mut be, mut total) = (0, 0);
        for seed in 0..5 {
            let r = realize_bridges(&b, 0.1, seed).unwrap();
            let rep = check_construction_events(r.path.positions(), &b, &th).unwrap();
            assert_eq!(rep.summary.te, rep.summary.edges);
            be += rep.summary.be;
            total += rep.summary.edges;
        }
        assert!(be as f64 >= 0.9 * total as f64, "{be}/{total}");
    }

    #[test]
    fn deterministic_path_grows_linearly() {
        let b = cube_blueprint(100_000, 0.05, 0.1, 0.1).unwrap();
        let w = realize_deterministic(&b).unwrap();
        let rep = check_construction_events(w.positions(), &b, &EventThresholds::default()).unwrap();
        for e in &rep.edges {
            assert!(e.te && e.be);
            if let Some(s) = e.segment {
                assert_eq!(s.gl_good, s.times);
            }
        }
        assert!(rep.summary.all_fe);
        let s = sphere_blueprint(300_000, 0.05, 6, 2.0, 2.0, 0.1, 0.1).unwrap();
        let w = realize_deterministic(&s).unwrap();
        let rep = check_construction_events(w.positions(), &s, &EventThresholds::default()).unwrap();
        assert!(rep.edges.iter().filter_map(|e| e.segment).all(|s| s.gl_good == s.times));
    }

    #[test]
    fn constant_path_fails_every_endpoint() {
        let b = cube_blueprint(100_000, 0.02, 0.1, 0.05).unwrap();
        let above = LatticePoint::new(0, 0, (CUBE_SCALE * b.j3).round() as i32);
        let pos = vec![above; b.t_final() as usize + 1];
        let rep = check_construction_events(&pos, &b, &EventThresholds::default()).unwrap();
        assert_eq!(rep.summary.fe, 0);
        // parked at the centre, only the hop onto the h = 0 level meets its z target
        let pos = vec![LatticePoint::ORIGIN; b.t_final() as usize + 1];
        let rep = check_construction_events(&pos, &b, &EventThresholds::default()).unwrap();
        let hits: Vec<usize> = (0..b.edge_count()).filter(|&i| rep.edges[i].fe).collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(b.edges[hits[0]], EdgeKind::Level);
        assert_eq!(b.vertices[hits[0] + 1][2], 0.0);
        assert!(check_construction_events(&pos[1..], &b, &EventThresholds::default()).is_err());
    }

    #[test]
    fn sg_counts_bad_times() {
        let th = EventThresholds { delta: 0.1, ..Default::default() };
        let b = cube_blueprint(100_000, 0.02, 0.1, 0.1).unwrap();
        let w = realize_deterministic(&b).unwrap();
        let rep = check_construction_events(w.positions(), &b, &th).unwrap();
        for s in rep.edges.iter().filter_map(|e| e.segment) {
            assert_eq!(s.sg, s.bad as f64 <= th.delta * (s.times - 1) as f64);
            if s.bad == 0 {
                assert!(s.sg);
            }
        }
    }

    #[test]
    fn linear_growth_examples() {
        // exactly linear: all good
        let p: Vec<f64> = (0..200).map(|t| t as f64 * 0.5).collect();
        assert!(linear_growth(&p, 10.0, 0.05, false).iter().all(|v| *v));
        assert!(linear_growth(&p, 10.0, 0.05, true).iter().all(|v| *v));
        // a stall in the middle breaks the slope around it
        let mut q = p.clone();
        for (t, v) in q.iter_mut().enumerate().skip(100) {
            *v = 50.0 + (t as f64 - 100.0) * 0.5 * 0.5;
        }
        let g = linear_growth(&q, 10.0, 0.01, false);
        assert!(g.iter().any(|v| !*v));
        assert_eq!(g, linear_growth(&q, 10.0, 0.01, true));
        // going backwards violates the signed form only
        let back: Vec<f64> = (0..50).map(|t| if t < 25 { t as f64 } else { 50.0 - t as f64 }).collect();
        let s = linear_growth(&back, 2.0, 0.01, false);
        assert!(s.iter().any(|v| !*v));
    }

    #[test]
    fn linear_growth_brute_force() {
        let mut rng = substream(11, &[1]);
        for _ in 0..40 {
            let n = rng.random_range(5..60);
            let mut p = vec![0.0];
            for _ in 1..n {
                let s: f64 = rng.random_range(-0.5..1.5);
                p.push(p.last().unwrap() + s);
            }
            let gap = rng.random_range(0.0..5.0);
            let delta = rng.random_range(0.0..0.05);
            for absolute in [false, true] {
                let fast = linear_growth(&p, gap, delta, absolute);
                let sl = (p[n - 1] - p[0]).abs() / (n - 1) as f64;
                let (hi, lo) = ((1.0 + 10.0 * delta) * sl, (1.0 - 10.0 * delta) * sl);
                for l in 0..n {
                    let ok = (0..n).filter(|&t| (t as f64 - l as f64).abs() > gap).all(|t| {
                        let dl = t as f64 - l as f64;
                        if absolute {
                            let x = (p[t] - p[l]).abs();
                            x <= hi * dl.abs() + 1e-9 && x >= lo * dl.abs() - 1e-9
                        } else {
                            let q = (p[t] - p[l]) / dl;
                            q <= hi + 1e-9 / dl.abs() && q >= lo - 1e-9 / dl.abs()
                        }
                    });
                    assert_eq!(fast[l], ok, "n={n} l={l} gap={gap} abs={absolute}");
                }
            }
        }
    }

    #[test]
    fn level_gaps_on_deterministic_cube() {
        let b = cube_blueprint(1_000_000, 0.02, 0.1, 0.05).unwrap();
        let w = realize_deterministic(&b).unwrap();
        let gaps = level_gaps(w.positions(), &b);
        assert_eq!(gaps.len(), b.level_count() - 1);
        let need = (1.0 - 3.0 * 0.05) * b.params.spacing;
        assert!(gaps.iter().all(|g| *g >= need), "{gaps:?} vs {need}");
    }

    #[test]
    fn blueprint_round_trips_as_json() {
        let b = sphere_blueprint(100_000, 0.05, 5, 2.0, 3.0, 0.2, 0.1).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        let c: PathBlueprint = serde_json::from_str(&s).unwrap();
        assert_eq!(b, c);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn cube_schedule_bounds(n in 100_000u64..5_000_000, k in 0.005f64..0.05, kappa in 0.01f64..0.5) {
            if let Ok(b) = cube_blueprint(n, k, kappa, 0.05) {
                b.validate().unwrap();
                let closed = b.closed_form_t_final().unwrap() / n as f64 * (1.0 - kappa);
                prop_assert!((1.0..=1.2).contains(&closed), "{}", closed);
                let jt = CUBE_SCALE * b.j3;
                let levels = b.params.levels as f64;
                let df = (2.0 * levels + 1.0) * 4.0 * jt + 2.0 * levels * b.params.spacing;
                prop_assert!((b.d_final() - df).abs() < 1e-6 * df);
                prop_assert!((b.t_final() as f64 - df * b.steps_per_unit).abs() <= b.edge_count() as f64 + 1.0);
                for (w, p) in b.times.windows(2).zip(b.lattice.windows(2)) {
                    prop_assert_eq!((w[1] - w[0]) % 2, ((p[1] - p[0]).norm_l1() % 2) as u64);
                }
            }
        }
    }
}
