//! Simple random walk paths, exact bridges, and range bookkeeping.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::capacity::PointSet;
use crate::error::{CapError, Result};
use crate::lattice::{LatticePoint, UNIT_STEPS};
use crate::rng::{label_key, substream, StreamRng};

/// A nearest-neighbour path S_0..S_n with first-visit and range bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPath {
    positions: Vec<LatticePoint>,
    fresh: Vec<bool>,
    diameter: f64,
    range: PointSet,
    first_visit: Vec<usize>,
}

impl WalkPath {
    /// Path from explicit positions; consecutive positions must be neighbours.
    pub fn from_positions(positions: Vec<LatticePoint>) -> Result<WalkPath> {
        if positions.is_empty() {
            return Err(CapError::domain("a path needs at least its starting point"));
        }
        for (i, w) in positions.windows(2).enumerate() {
            if w[0].step_code_to(&w[1]).is_none() {
                return Err(CapError::domain(format!(
                    "positions {i} and {} are not nearest neighbours ({} → {})",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Self::build(positions))
    }

    /// Path from a start point and step codes 0..5.
    pub fn from_steps(start: LatticePoint, codes: &[u8]) -> Result<WalkPath> {
        let mut pos = Vec::with_capacity(codes.len() + 1);
        let mut cur = start;
        pos.push(cur);
        for (i, &c) in codes.iter().enumerate() {
            let e = UNIT_STEPS
                .get(c as usize)
                .ok_or_else(|| CapError::domain(format!("step {i} has invalid code {c}")))?;
            cur = cur.checked_add(e)?;
            pos.push(cur);
        }
        Ok(Self::build(pos))
    }

    fn build(positions: Vec<LatticePoint>) -> WalkPath {
        let mut range = PointSet::new();
        let mut fresh = Vec::with_capacity(positions.len());
        let mut first_visit = Vec::new();
        let mut d2 = 0.0f64;
        for (i, p) in positions.iter().enumerate() {
            let new = range.insert(*p);
            fresh.push(new);
            if new {
                first_visit.push(i);
            }
            let [x, y, z] = p.as_f64();
            d2 = d2.max(x * x + y * y + z * z);
        }
        WalkPath { positions, fresh, diameter: d2.sqrt(), range, first_visit }
    }

    /// Number of steps n.
    pub fn len(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positions(&self) -> &[LatticePoint] {
        &self.positions
    }

    pub fn start(&self) -> LatticePoint {
        self.positions[0]
    }

    pub fn end(&self) -> LatticePoint {
        *self.positions.last().unwrap()
    }

    /// fresh[i] is true iff S_i was not visited before time i.
    pub fn fresh(&self) -> &[bool] {
        &self.fresh
    }

    /// max_i ‖S_i‖.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Distinct visited points in first-visit order; multiplicities are visit counts.
    pub fn range(&self) -> &PointSet {
        &self.range
    }

    /// First-visit time of each point of [`Self::range`], increasing.
    pub fn first_visits(&self) -> &[usize] {
        &self.first_visit
    }

    /// Distinct points of S_0..S_t, as a prefix of the range ordering.
    pub fn range_prefix(&self, t: usize) -> &[LatticePoint] {
        let k = self.first_visit.partition_point(|&i| i <= t);
        &self.range.points()[..k]
    }

    pub fn step_codes(&self) -> Vec<u8> {
        self.positions
            .windows(2)
            .map(|w| w[0].step_code_to(&w[1]).expect("validated path"))
            .collect()
    }

    /// Positions S_a..S_b as a path of its own.
    pub fn slice(&self, a: usize, b: usize) -> Result<WalkPath> {
        if a > b || b > self.len() {
            return Err(CapError::domain(format!("slice [{a}, {b}] outside path of length {}", self.len())));
        }
        Ok(Self::build(self.positions[a..=b].to_vec()))
    }

    /// Text format: the start point, n, then n step codes as digits.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.start())?;
        writeln!(w, "{}", self.len())?;
        let codes: String = self.step_codes().iter().map(|c| char::from(b'0' + c)).collect();
        writeln!(w, "{codes}")?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<WalkPath> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| CapError::config(format!("path file ends before the {what} line")))
        };
        let start_line = next("start")?;
        let c: Vec<i64> = start_line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| CapError::config(format!("start line: {e}")))?;
        if c.len() != 3 {
            return Err(CapError::config("start line must hold three coordinates"));
        }
        let start = LatticePoint::try_new(c[0], c[1], c[2])?;
        let n: usize = next("length")?
            .trim()
            .parse()
            .map_err(|e| CapError::config(format!("length line: {e}")))?;
        let codes_line = if n == 0 { String::new() } else { next("steps")? };
        let codes: Vec<u8> = codes_line.trim().bytes().map(|b| b.wrapping_sub(b'0')).collect();
        if codes.len() != n {
            return Err(CapError::config(format!("expected {n} step codes, found {}", codes.len())));
        }
        WalkPath::from_steps(start, &codes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_text(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<WalkPath> {
        let f = std::fs::File::open(path)?;
        WalkPath::read_text(std::io::BufReader::new(f))
    }
}

/// n-step simple random walk from the origin.
pub fn simulate_srw_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> WalkPath {
    let codes: Vec<u8> = (0..n).map(|_| rng.random_range(0..6u8)).collect();
    WalkPath::from_steps(LatticePoint::ORIGIN, &codes).expect("walk of admissible length")
}

/// n-step simple random walk from the origin, determined by `seed`.
pub fn simulate_srw(n: usize, seed: u64) -> WalkPath {
    simulate_srw_with(n, &mut substream(seed, &[label_key("srw"), n as u64]))
}

/// Fills `v` with a uniformly random sequence of `plus` +1's and `minus` −1's.
fn shuffled_signs<R: Rng + ?Sized>(plus: usize, minus: usize, v: &mut Vec<i8>, rng: &mut R) {
    v.clear();
    v.resize(plus, 1);
    v.resize(plus + minus, -1);
    v.shuffle(rng);
}

/// Bridge sampler that keeps its scratch buffers between calls.
///
/// The number of z-steps m has weight C(T, m) · C(m, (m+d_z)/2) ·
/// C(L, (L+u)/2) · C(L, (L+v)/2) with L = T − m, u = d_x + d_y, v = d_x − d_y,
/// because a planar walk is a pair of independent ±1 walks in the rotated
/// coordinates (u, v). Given m, the z signs, the u and v signs and the
/// positions of the z-steps are independent uniform shuffles.
#[derive(Debug, Default, Clone)]
pub struct BridgeSampler {
    lf: Vec<f64>,
    cand: Vec<usize>,
    w: Vec<f64>,
    zs: Vec<i8>,
    us: Vec<i8>,
    vs: Vec<i8>,
    is_z: Vec<bool>,
}

impl BridgeSampler {
    pub fn new() -> Self {
        Self::default()
    }

    fn ln_factorials(&mut self, t: usize) {
        if self.lf.is_empty() {
            self.lf.push(0.0);
        }
        while self.lf.len() <= t {
            let k = self.lf.len();
            let prev = self.lf[k - 1];
            self.lf.push(prev + (k as f64).ln());
        }
    }

    /// Appends the step codes of a uniform `steps`-step walk with
    /// displacement `d` to `out`.
    pub fn sample_into<R: Rng + ?Sized>(
        &mut self,
        d: LatticePoint,
        steps: usize,
        rng: &mut R,
        out: &mut Vec<u8>,
    ) -> Result<()> {
        let l1 = d.norm_l1() as usize;
        if l1 > steps || (steps - l1) % 2 == 1 {
            return Err(CapError::domain(format!(
                "no {steps}-step walk has displacement {d} (‖·‖₁ = {l1})"
            )));
        }
        let t = steps;
        let (dz, u, v) = (d.z as i64, d.x as i64 + d.y as i64, d.x as i64 - d.y as i64);
        self.ln_factorials(t);
        let lf = &self.lf;
        let ln_choose = |n: usize, k: usize| lf[n] - lf[k] - lf[n - k];
        self.cand.clear();
        self.w.clear();
        let mut m = dz.unsigned_abs() as usize;
        while m <= t {
            let l = t - m;
            if u.unsigned_abs() as usize <= l && v.unsigned_abs() as usize <= l {
                let w = ln_choose(t, m)
                    + ln_choose(m, ((m as i64 + dz) / 2) as usize)
                    + ln_choose(l, ((l as i64 + u) / 2) as usize)
                    + ln_choose(l, ((l as i64 + v) / 2) as usize);
                self.cand.push(m);
                self.w.push(w);
            }
            m += 2;
        }
        let top = self.w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for x in self.w.iter_mut() {
            *x = (*x - top).exp();
        }
        let total: f64 = self.w.iter().sum();
        let mut target = rng.random::<f64>() * total;
        let mut mz = *self.cand.last().expect("parity check guarantees a candidate");
        for (c, wi) in self.cand.iter().zip(&self.w) {
            if target < *wi {
                mz = *c;
                break;
            }
            target -= wi;
        }
        let l = t - mz;
        shuffled_signs(((mz as i64 + dz) / 2) as usize, ((mz as i64 - dz) / 2) as usize, &mut self.zs, rng);
        shuffled_signs(((l as i64 + u) / 2) as usize, ((l as i64 - u) / 2) as usize, &mut self.us, rng);
        shuffled_signs(((l as i64 + v) / 2) as usize, ((l as i64 - v) / 2) as usize, &mut self.vs, rng);
        self.is_z.clear();
        self.is_z.resize(mz, true);
        self.is_z.resize(t, false);
        self.is_z.shuffle(rng);
        let (mut iz, mut ip) = (0, 0);
        out.reserve(t);
        for &z in &self.is_z {
            if z {
                out.push(if self.zs[iz] > 0 { 4 } else { 5 });
                iz += 1;
            } else {
                // (u, v) = (+,+) → +x, (−,−) → −x, (+,−) → +y, (−,+) → −y
                out.push(match (self.us[ip], self.vs[ip]) {
                    (1, 1) => 0,
                    (-1, -1) => 1,
                    (1, -1) => 2,
                    _ => 3,
                });
                ip += 1;
            }
        }
        Ok(())
    }
}

/// Step codes of a walk of `steps` steps with displacement `d`, uniform among
/// all such walks; see [`BridgeSampler`].
pub fn bridge_codes<R: Rng + ?Sized>(d: LatticePoint, steps: usize, rng: &mut R) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(steps);
    BridgeSampler::new().sample_into(d, steps, rng, &mut out)?;
    Ok(out)
}

/// Simple random walk from `a` conditioned to be at `b` after `steps` steps.
pub fn simulate_bridge_with<R: Rng + ?Sized>(
    a: LatticePoint,
    b: LatticePoint,
    steps: usize,
    rng: &mut R,
) -> Result<WalkPath> {
    let codes = bridge_codes(b.checked_sub(&a)?, steps, rng)?;
    WalkPath::from_steps(a, &codes)
}

/// [`simulate_bridge_with`] on the substream determined by `seed`.
pub fn simulate_bridge(a: LatticePoint, b: LatticePoint, steps: usize, seed: u64) -> Result<WalkPath> {
    simulate_bridge_with(a, b, steps, &mut substream(seed, &[label_key("bridge"), steps as u64]))
}

/// Distinct points with the index of their first visit.
pub fn fresh_points(p: &WalkPath) -> Vec<(usize, LatticePoint)> {
    p.first_visits().iter().copied().zip(p.range().points().iter().copied()).collect()
}

/// max_i ‖S_i‖.
pub fn diameter(p: &WalkPath) -> f64 {
    p.diameter()
}

/// Successive exit balls of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct BallCover {
    pub radius: f64,
    pub centers: Vec<LatticePoint>,
    pub stop_times: Vec<usize>,
}

impl BallCover {
    pub fn count(&self) -> usize {
        self.centers.len()
    }
}

/// T̂_0 = 0 and T̂_{i+1} = inf{t > T̂_i : ‖S_t − S_{T̂_i}‖ ≥ r − 1}.
pub fn ball_cover(p: &WalkPath, r: f64) -> Result<BallCover> {
    if !(r >= 2.0) {
        return Err(CapError::domain(format!("ball cover radius must be at least 2, got {r}")));
    }
    let thr2 = (r - 1.0) * (r - 1.0);
    let pos = p.positions();
    let mut centers = vec![pos[0]];
    let mut stop_times = vec![0];
    let mut c = pos[0];
    for (t, s) in pos.iter().enumerate().skip(1) {
        let [x, y, z] = (*s - c).as_f64();
        if x * x + y * y + z * z >= thr2 {
            c = *s;
            centers.push(c);
            stop_times.push(t);
        }
    }
    Ok(BallCover { radius: r, centers, stop_times })
}

/// p followed by q; q must start where p ends.
pub fn concat(p: &WalkPath, q: &WalkPath) -> Result<WalkPath> {
    if p.end() != q.start() {
        return Err(CapError::domain(format!(
            "cannot join a path ending at {} to one starting at {}",
            p.end(),
            q.start()
        )));
    }
    let mut pos = Vec::with_capacity(p.positions.len() + q.len());
    pos.extend_from_slice(&p.positions);
    pos.extend_from_slice(&q.positions[1..]);
    Ok(WalkPath::build(pos))
}

/// Convenience: the substream used for the i-th independent path of a batch.
pub fn batch_rng(master: u64, tag: &str, i: u64) -> StreamRng {
    substream(master, &[label_key(tag), i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use std::collections::HashMap;

    fn p(a: i32, b: i32, c: i32) -> LatticePoint {
        LatticePoint::new(a, b, c)
    }

    #[test]
    fn trivial_paths() {
        let w = simulate_srw(0, 1);
        assert_eq!(w.positions(), &[LatticePoint::ORIGIN]);
        assert_eq!(w.diameter(), 0.0);
        let w = WalkPath::from_positions(vec![p(0, 0, 0), p(1, 0, 0), p(0, 0, 0)]).unwrap();
        assert_eq!(fresh_points(&w), vec![(0, p(0, 0, 0)), (1, p(1, 0, 0))]);
        assert_eq!(w.fresh(), &[true, true, false]);
        assert_eq!(w.diameter(), 1.0);
        assert!(WalkPath::from_positions(vec![p(0, 0, 0), p(1, 1, 0)]).is_err());
    }

    #[test]
    fn srw_is_deterministic_and_valid() {
        let a = simulate_srw(5000, 42);
        let b = simulate_srw(5000, 42);
        assert_eq!(a, b);
        assert_ne!(a, simulate_srw(5000, 43));
        assert!(WalkPath::from_positions(a.positions().to_vec()).is_ok());
        assert_eq!(fresh_points(&a).len(), a.range().len());
    }

    #[test]
    fn srw_step_uniformity() {
        let w = simulate_srw(60_000, 7);
        let mut counts = [0f64; 6];
        for c in w.step_codes() {
            counts[c as usize] += 1.0;
        }
        let e = 10_000.0;
        let chi2: f64 = counts.iter().map(|c| (c - e) * (c - e) / e).sum();
        // 5 degrees of freedom, p = 0.001 critical value 20.5
        assert!(chi2 < 20.5, "chi2 = {chi2}");
    }

    #[test]
    fn srw_second_moment() {
        // ‖S_n‖²/n has mean 1 and variance 2/3; 2000 paths put 5% at 2.7σ
        let n = 10_000;
        let paths = 2000;
        let mut total = 0.0;
        for s in 0..paths {
            let mut rng = batch_rng(5, "moment", s);
            let mut e = LatticePoint::ORIGIN;
            for _ in 0..n {
                e = e + UNIT_STEPS[rng.random_range(0..6usize)];
            }
            total += e.norm2() as f64 / n as f64;
        }
        let mean = total / paths as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn fresh_density_and_diameter_band() {
        let n = 10_000;
        let mut dn = 0.0;
        for s in 0..100 {
            let w = simulate_srw(n, s);
            if s < 50 {
                let f = w.range().len() as f64 / n as f64;
                assert!((0.60..=0.72).contains(&f), "seed {s}: fresh fraction {f}");
            }
            dn += diameter(&w) / (n as f64).sqrt();
        }
        let mean = dn / 100.0;
        assert!((0.8..=1.6).contains(&mean), "{mean}");
    }

    #[test]
    fn four_step_loop_midpoint() {
        // of the 90 four-step loops, 36 pass through 0 at time 2
        let law = enumerate(4, LatticePoint::ORIGIN);
        assert_eq!(law.len(), 90);
        let q = 0.4;
        let samples = 100_000;
        let mut rng = substream(14, &[4]);
        let hits = (0..samples)
            .filter(|_| {
                let c = bridge_codes(LatticePoint::ORIGIN, 4, &mut rng).unwrap();
                UNIT_STEPS[c[0] as usize] + UNIT_STEPS[c[1] as usize] == LatticePoint::ORIGIN
            })
            .count() as f64;
        let sigma = (q * (1.0 - q) * samples as f64).sqrt();
        assert!((hits - q * samples as f64).abs() < 3.0 * sigma, "{hits}");
    }

    #[test]
    fn bridges_forced_and_infeasible() {
        let w = simulate_bridge(p(0, 0, 0), p(2, 0, 0), 2, 3).unwrap();
        assert_eq!(w.step_codes(), vec![0, 0]);
        assert!(simulate_bridge(p(0, 0, 0), p(1, 0, 0), 2, 3).is_err());
        assert!(simulate_bridge(p(0, 0, 0), p(3, 0, 0), 1, 3).is_err());
        let w = simulate_bridge(p(5, -2, 1), p(9, 0, -3), 40, 9).unwrap();
        assert_eq!(w.start(), p(5, -2, 1));
        assert_eq!(w.end(), p(9, 0, -3));
        assert_eq!(w.len(), 40);
    }

    fn enumerate(steps: usize, d: LatticePoint) -> HashMap<Vec<u8>, f64> {
        let mut out = HashMap::new();
        let total = 6usize.pow(steps as u32);
        for k in 0..total {
            let mut codes = Vec::with_capacity(steps);
            let mut x = k;
            let mut pos = LatticePoint::ORIGIN;
            for _ in 0..steps {
                let c = (x % 6) as u8;
                x /= 6;
                pos = pos + UNIT_STEPS[c as usize];
                codes.push(c);
            }
            if pos == d {
                out.insert(codes, 1.0);
            }
        }
        let n = out.len() as f64;
        out.values_mut().for_each(|v| *v /= n);
        out
    }

    #[test]
    fn loop_bridge_is_uniform() {
        let law = enumerate(2, LatticePoint::ORIGIN);
        assert_eq!(law.len(), 6);
        let mut rng = substream(11, &[1]);
        let mut counts: HashMap<Vec<u8>, f64> = HashMap::new();
        let samples = 60_000;
        for _ in 0..samples {
            *counts.entry(bridge_codes(LatticePoint::ORIGIN, 2, &mut rng).unwrap()).or_default() += 1.0;
        }
        let e = samples as f64 / 6.0;
        let chi2: f64 = law.keys().map(|k| (counts.get(k).copied().unwrap_or(0.0) - e).powi(2) / e).sum();
        assert!(chi2 < 15.09, "chi2 = {chi2}");
    }

    fn count_vector(codes: &[u8]) -> [u8; 6] {
        let mut c = [0u8; 6];
        for &k in codes {
            c[k as usize] += 1;
        }
        c
    }

    fn tv<K: std::hash::Hash + Eq>(law: &HashMap<K, f64>, counts: &HashMap<K, f64>, n: f64) -> f64 {
        let missing: f64 = counts.iter().filter(|(k, _)| !law.contains_key(k)).map(|(_, c)| c / n).sum();
        0.5 * (missing + law.iter().map(|(k, q)| (counts.get(k).copied().unwrap_or(0.0) / n - q).abs()).sum::<f64>())
    }

    #[test]
    fn bridge_path_law_short() {
        let mut rng = substream(12, &[2]);
        for (steps, d) in [(1, p(0, 0, 1)), (2, p(1, 1, 0)), (3, p(1, 0, 0)), (3, p(0, -1, 0))] {
            let law = enumerate(steps, d);
            let samples = 200_000;
            let mut counts: HashMap<Vec<u8>, f64> = HashMap::new();
            for _ in 0..samples {
                *counts.entry(bridge_codes(d, steps, &mut rng).unwrap()).or_default() += 1.0;
            }
            let t = tv(&law, &counts, samples as f64);
            assert!(t < 0.01, "steps {steps}, d {d}: tv {t}");
        }
    }

    #[test]
    fn bridge_count_vector_law() {
        let mut rng = substream(13, &[3]);
        let mut ds = Vec::new();
        for a in -2..=2 {
            for b in -2..=2 {
                for c in -2..=2 {
                    let d = p(a, b, c);
                    if d.norm_l1() <= 2 && d.orbit_rep() == [d.x.unsigned_abs(), d.y.unsigned_abs(), d.z.unsigned_abs()] {
                        ds.push(d);
                    }
                }
            }
        }
        for d in ds {
            let l1 = d.norm_l1() as usize;
            for steps in (l1..=6).step_by(2) {
                let mut law: HashMap<[u8; 6], f64> = HashMap::new();
                for (k, q) in enumerate(steps, d) {
                    *law.entry(count_vector(&k)).or_default() += q;
                }
                let samples = 100_000;
                let mut counts: HashMap<[u8; 6], f64> = HashMap::new();
                for _ in 0..samples {
                    *counts.entry(count_vector(&bridge_codes(d, steps, &mut rng).unwrap())).or_default() += 1.0;
                }
                let t = tv(&law, &counts, samples as f64);
                assert!(t < 0.01, "steps {steps}, d {d}: tv {t}");
            }
        }
    }

    #[test]
    fn ball_cover_on_straight_path() {
        let r = 10.0;
        let codes = vec![0u8; 30];
        let w = WalkPath::from_steps(LatticePoint::ORIGIN, &codes).unwrap();
        let bc = ball_cover(&w, r).unwrap();
        assert!((3..=4).contains(&bc.count()));
        for c in bc.centers.windows(2) {
            let d = (c[1] - c[0]).norm();
            assert!(d >= r - 1.0 && d < r + 1.0);
        }
        let small = WalkPath::from_steps(LatticePoint::ORIGIN, &[0, 2, 1, 3]).unwrap();
        assert_eq!(ball_cover(&small, 5.0).unwrap().count(), 1);
        assert!(ball_cover(&small, 1.5).is_err());
    }

    #[test]
    fn concat_and_text_round_trip() {
        let a = simulate_srw(50, 1);
        let b = WalkPath::from_steps(a.end(), &[0, 0, 3]).unwrap();
        let c = concat(&a, &b).unwrap();
        assert_eq!(c.len(), 53);
        assert_eq!(concat(&a, &WalkPath::from_positions(vec![a.end()]).unwrap()).unwrap(), a);
        assert!(concat(&b, &a).is_err());
        let mut buf = Vec::new();
        c.write_text(&mut buf).unwrap();
        assert_eq!(WalkPath::read_text(&buf[..]).unwrap(), c);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn cover_spacing(seed in 0u64..10_000, r in 2.0f64..15.0) {
            let w = simulate_srw(2_000, seed);
            let bc = ball_cover(&w, r).unwrap();
            for c in bc.centers.windows(2) {
                let d = (c[1] - c[0]).norm();
                prop_assert!(d >= r - 1.0 && d < r + 1.0);
            }
            // every position is within r of the most recent center
            let mut k = 0;
            for (t, s) in w.positions().iter().enumerate() {
                while k + 1 < bc.stop_times.len() && bc.stop_times[k + 1] <= t {
                    k += 1;
                }
                prop_assert!((*s - bc.centers[k]).norm() < r);
            }
        }

        #[test]
        fn fresh_flags_match_definition(seed in 0u64..10_000) {
            let w = simulate_srw(300, seed);
            let mut seen = std::collections::HashSet::new();
            for (i, s) in w.positions().iter().enumerate() {
                prop_assert_eq!(w.fresh()[i], seen.insert(*s));
            }
            prop_assert_eq!(w.range_prefix(w.len()).len(), w.range().len());
        }

        #[test]
        fn bridge_endpoints(seed in 0u64..10_000, steps in 0usize..60, dx in -6i32..6, dy in -6i32..6, dz in -6i32..6) {
            let d = LatticePoint::new(dx, dy, dz);
            let l1 = d.norm_l1() as usize;
            let r = simulate_bridge(LatticePoint::ORIGIN, d, steps, seed);
            if l1 <= steps && (steps - l1) % 2 == 0 {
                let w = r.unwrap();
                prop_assert_eq!(w.end(), d);
                prop_assert_eq!(w.len(), steps);
            } else {
                prop_assert!(r.is_err());
            }
        }
    }
}
