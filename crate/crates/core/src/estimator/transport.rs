//! Fast transport of a simple random walk away from a finite set.
//!
//! Near the set the walk moves by exact cube exits: from x, the exit point of
//! the cube ‖y − x‖∞ < L is drawn from its exact harmonic measure, which is
//! valid whenever no point of the set lies inside that cube. The largest
//! admissible L ∈ {1, 2, 4, ..., 64} is read off a multilevel occupancy grid.
//! Wherever the nearest set point is at least `WOS_MIN_GAP` away (beyond the
//! set's bounding sphere, or inside a large empty block of the grid) the walk
//! moves by walk-on-spheres jumps rounded to the lattice; there the hitting
//! function is within O(r⁻²) of a continuum harmonic function.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, UnitSphere};
use rustc_hash::FxHashSet;

use crate::capacity::PointSet;
use crate::lattice::{LatticePoint, UNIT_STEPS};

/// Largest cube level; cubes have half-width 2^level.
pub const MAX_CUBE_LEVEL: usize = 6;

/// Walk-on-spheres is used only at this distance from the set.
pub const WOS_MIN_GAP: f64 = 128.0;

/// Coarsest occupancy level, used to certify large empty regions.
pub const MAX_GRID_LEVEL: usize = 16;

/// Spheres closer than this to the kill sphere fall back to cube moves.
const WOS_MIN_RADIUS: f64 = 4.0;

/// Exit law of the cube ‖y‖∞ < L on one face (by symmetry all six faces carry
/// 1/6 and the same in-face law).
#[derive(Debug, Clone)]
pub struct CubeExit {
    pub half_width: i32,
    face: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
}

impl CubeExit {
    /// Exact exit law from the centre, by a separable sine-series sum.
    ///
    /// With Dirichlet eigenvectors φ_m(i) = L^{-1/2} sin(πm(i+L)/2L) on
    /// {−L+1, ..., L−1}, the killed Green's function is
    /// Σ_m Π_k φ_{m_k}(0) φ_{m_k}(z_k) / (1 − λ_m), λ_m = (1/3) Σ_k cos(πm_k/2L),
    /// and the exit probability at (L, j, k) is (1/6) G_Q(0, (L−1, j, k)).
    pub fn new(half_width: i32) -> CubeExit {
        let l = half_width as usize;
        let n = 2 * l - 1;
        let phi = |m: usize, i: usize| -> f64 {
            // i indexes {−L+1..L−1} as 0..n
            (std::f64::consts::PI * m as f64 * (i + 1) as f64 / (2 * l) as f64).sin() / (l as f64).sqrt()
        };
        let cosm: Vec<f64> = (1..=n).map(|m| (std::f64::consts::PI * m as f64 / (2 * l) as f64).cos()).collect();
        let c0: Vec<f64> = (1..=n).map(|m| phi(m, l - 1)).collect();
        let cedge: Vec<f64> = (1..=n).map(|m| phi(m, n - 1)).collect();
        // S(m2, m3) = Σ_{m1} φ(0)φ(L−1) / (1 − λ)
        let mut s = vec![0.0; n * n];
        for m2 in 0..n {
            for m3 in 0..n {
                if c0[m2] == 0.0 || c0[m3] == 0.0 {
                    continue;
                }
                let mut acc = 0.0;
                for m1 in 0..n {
                    let a = c0[m1] * cedge[m1];
                    if a != 0.0 {
                        acc += a / (1.0 - (cosm[m1] + cosm[m2] + cosm[m3]) / 3.0);
                    }
                }
                s[m2 * n + m3] = acc;
            }
        }
        let basis: Vec<f64> = (0..n).flat_map(|m| (0..n).map(move |j| (m, j))).map(|(m, j)| phi(m + 1, j)).collect();
        // T(j, m3) = Σ_{m2} φ_{m2}(0) φ_{m2}(j) S(m2, m3)
        let mut t = vec![0.0; n * n];
        for j in 0..n {
            for m2 in 0..n {
                let w = c0[m2] * basis[m2 * n + j];
                if w == 0.0 {
                    continue;
                }
                for m3 in 0..n {
                    t[j * n + m3] += w * s[m2 * n + m3];
                }
            }
        }
        let mut face = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for m3 in 0..n {
                    acc += c0[m3] * basis[m3 * n + k] * t[j * n + m3];
                }
                // clamp rounding noise; the true values are positive
                face[j * n + k] = (acc / 6.0).max(0.0);
            }
        }
        let alias = WeightedAliasIndex::new(face.clone()).expect("cube exit weights are positive");
        CubeExit { half_width, face, alias }
    }

    /// Exit probabilities on the face x = +L, indexed by (j + L − 1)·(2L−1) + (k + L − 1).
    pub fn face_law(&self) -> &[f64] {
        &self.face
    }

    /// Displacement of a cube exit from the centre.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LatticePoint {
        let l = self.half_width;
        if l == 1 {
            return UNIT_STEPS[rng.random_range(0..6usize)];
        }
        let n = 2 * l - 1;
        let f = rng.random_range(0..6u32);
        let idx = self.alias.sample(rng) as i32;
        let (j, k) = (idx / n - (l - 1), idx % n - (l - 1));
        let s = if f % 2 == 0 { l } else { -l };
        match f / 2 {
            0 => LatticePoint::new(s, j, k),
            1 => LatticePoint::new(j, s, k),
            _ => LatticePoint::new(j, k, s),
        }
    }
}

/// Exit laws for half-widths 1, 2, 4, ..., 2^MAX_CUBE_LEVEL.
pub fn cube_exits() -> &'static [CubeExit] {
    static EXITS: std::sync::OnceLock<Vec<CubeExit>> = std::sync::OnceLock::new();
    EXITS.get_or_init(|| (0..=MAX_CUBE_LEVEL).map(|k| CubeExit::new(1 << k)).collect())
}

/// Occupied blocks of side 2^k for k = 0..=MAX_GRID_LEVEL.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    levels: Vec<FxHashSet<[i32; 3]>>,
}

impl OccupancyGrid {
    pub fn new(points: &[LatticePoint]) -> OccupancyGrid {
        let levels = (0..=MAX_GRID_LEVEL)
            .map(|k| points.iter().map(|p| p.coords().map(|c| c >> k)).collect())
            .collect();
        OccupancyGrid { levels }
    }

    fn block_free(&self, x: &LatticePoint, k: usize) -> bool {
        let b = x.coords().map(|c| c >> k);
        let occ = &self.levels[k];
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if occ.contains(&[b[0] + dx, b[1] + dy, b[2] + dz]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// A lower bound 2^k on the ℓ∞ distance from x to the set, with k up to
    /// MAX_GRID_LEVEL; 0 when even the level-1 test fails.
    pub fn free_distance(&self, x: &LatticePoint) -> f64 {
        let k = self.free_level(x);
        if k < MAX_CUBE_LEVEL {
            return if k == 0 { 0.0 } else { (1u32 << k) as f64 };
        }
        let mut k = MAX_CUBE_LEVEL;
        while k < MAX_GRID_LEVEL && self.block_free(x, k + 1) {
            k += 1;
        }
        (1u32 << k) as f64
    }

    /// Largest k ≤ MAX_CUBE_LEVEL such that no point lies within ℓ∞ distance
    /// < 2^k of x (k = 0 is always admissible for x outside the set).
    pub fn free_level(&self, x: &LatticePoint) -> usize {
        (1..=MAX_CUBE_LEVEL).rev().find(|&k| self.block_free(x, k)).unwrap_or(0)
    }
}

/// A finite set with everything needed to run walks from it to a kill sphere.
#[derive(Debug, Clone)]
pub struct Transport {
    set: FxHashSet<LatticePoint>,
    grid: OccupancyGrid,
    center: [f64; 3],
    set_radius: f64,
    kill_radius: f64,
}

impl Transport {
    /// `kill_radius` is measured from the centroid of `a`.
    pub fn new(a: &PointSet, kill_radius: f64) -> Transport {
        let center = a.centroid();
        let set_radius = a
            .points()
            .iter()
            .map(|p| dist(p.as_f64(), center))
            .fold(0.0, f64::max);
        Transport {
            set: a.points().iter().copied().collect(),
            grid: OccupancyGrid::new(a.points()),
            center,
            set_radius,
            kill_radius,
        }
    }

    pub fn kill_radius(&self) -> f64 {
        self.kill_radius
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    /// Runs a walk from `start` (not in the set) until it hits the set
    /// (false) or first reaches distance ≥ kill radius from the centre (true).
    pub fn survives_from<R: Rng + ?Sized>(&self, start: LatticePoint, rng: &mut R) -> bool {
        let exits = cube_exits();
        let mut x = start;
        loop {
            let r = dist(x.as_f64(), self.center);
            let to_kill = self.kill_radius - r;
            if to_kill <= 0.0 {
                return true;
            }
            let gap = r - self.set_radius;
            let clear = if gap >= WOS_MIN_GAP { gap } else { self.grid.free_distance(&x) };
            if clear >= WOS_MIN_GAP && to_kill >= WOS_MIN_RADIUS {
                let rho = (clear - 0.5 * WOS_MIN_GAP).min(to_kill);
                let u: [f64; 3] = UnitSphere.sample(rng);
                let p = x.as_f64();
                x = LatticePoint::new(
                    (p[0] + rho * u[0]).round() as i32,
                    (p[1] + rho * u[1]).round() as i32,
                    (p[2] + rho * u[2]).round() as i32,
                );
                continue;
            }
            let mut k = if clear >= (1u32 << MAX_CUBE_LEVEL) as f64 {
                MAX_CUBE_LEVEL
            } else {
                self.grid.free_level(&x)
            };
            // keep the whole cube, exit points included, inside the kill sphere
            while k > 0 && ((1u32 << k) as f64) * 3f64.sqrt() > to_kill {
                k -= 1;
            }
            x = x + exits[k].sample(rng);
            if self.set.contains(&x) {
                return false;
            }
        }
    }

    /// One escape trial from a point of the set: first step, then transport.
    pub fn escapes_from<R: Rng + ?Sized>(&self, a: LatticePoint, rng: &mut R) -> bool {
        let x = a + UNIT_STEPS[rng.random_range(0..6usize)];
        !self.set.contains(&x) && self.survives_from(x, rng)
    }
}

#[inline]
fn dist(p: [f64; 3], c: [f64; 3]) -> f64 {
    ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use nalgebra::{DMatrix, DVector};

    /// Exit law by a direct linear solve of the killed walk on the cube.
    fn exit_law_direct(l: i32) -> Vec<f64> {
        let n = (2 * l - 1) as usize;
        let idx = |p: [i32; 3]| -> usize {
            p.iter().fold(0usize, |acc, &c| acc * n + (c + l - 1) as usize)
        };
        let size = n * n * n;
        let mut m = DMatrix::<f64>::identity(size, size);
        for a in -(l - 1)..l {
            for b in -(l - 1)..l {
                for c in -(l - 1)..l {
                    for e in UNIT_STEPS {
                        let q = [a + e.x, b + e.y, c + e.z];
                        if q.iter().all(|v| v.abs() < l) {
                            m[(idx([a, b, c]), idx(q))] -= 1.0 / 6.0;
                        }
                    }
                }
            }
        }
        let mut rhs = DVector::<f64>::zeros(size);
        rhs[idx([0, 0, 0])] = 1.0;
        // G_Q(·, 0) = G_Q(0, ·) by symmetry of the killed walk
        let g = m.lu().solve(&rhs).unwrap();
        let mut face = Vec::new();
        for j in -(l - 1)..l {
            for k in -(l - 1)..l {
                face.push(g[idx([l - 1, j, k])] / 6.0);
            }
        }
        face
    }

    #[test]
    fn cube_exit_matches_direct_solve() {
        for l in [2, 3, 4] {
            let fast = CubeExit::new(l);
            let direct = exit_law_direct(l);
            for (a, b) in fast.face_law().iter().zip(&direct) {
                assert!((a - b).abs() < 1e-14, "L={l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn cube_exit_laws_are_normalized() {
        for e in cube_exits() {
            let total: f64 = 6.0 * e.face_law().iter().sum::<f64>();
            assert!((total - 1.0).abs() < 1e-12, "L={}: {total}", e.half_width);
        }
        let mut rng = substream(1, &[1]);
        for e in cube_exits() {
            for _ in 0..100 {
                assert_eq!(e.sample(&mut rng).norm_inf(), e.half_width as i64);
            }
        }
    }

    #[test]
    fn free_level_is_conservative() {
        let pts = [LatticePoint::new(0, 0, 0), LatticePoint::new(40, -3, 7)];
        let grid = OccupancyGrid::new(&pts);
        let mut rng = substream(2, &[2]);
        for _ in 0..2000 {
            let x = LatticePoint::new(rng.random_range(-200..200), rng.random_range(-200..200), rng.random_range(-200..200));
            if pts.contains(&x) {
                continue;
            }
            let k = grid.free_level(&x);
            let d = pts.iter().map(|p| (*p - x).norm_inf()).min().unwrap();
            assert!(d >= 1 << k, "{x}: level {k}, distance {d}");
        }
        for _ in 0..2000 {
            let x = LatticePoint::new(rng.random_range(-5000..5000), rng.random_range(-5000..5000), rng.random_range(-5000..5000));
            let d = pts.iter().map(|p| (*p - x).norm_inf()).min().unwrap();
            let f = grid.free_distance(&x);
            assert!(d as f64 >= f, "{x}: free {f}, distance {d}");
            if d > 4 * (1 << MAX_GRID_LEVEL) {
                assert_eq!(f, (1u32 << MAX_GRID_LEVEL) as f64);
            }
        }
    }

    #[test]
    fn singleton_escape_frequency() {
        let a = PointSet::from_points([LatticePoint::ORIGIN]);
        let t = Transport::new(&a, 400.0);
        let mut rng = substream(3, &[3]);
        let trials = 40_000;
        let esc = (0..trials).filter(|_| t.escapes_from(LatticePoint::ORIGIN, &mut rng)).count() as f64 / trials as f64;
        // escape to radius ρ: 1/G(0) / (1 − G(ρ)/G(0)) to first order
        let g0 = crate::green::G0;
        let expect = (1.0 / g0) / (1.0 - 3.0 / (2.0 * std::f64::consts::PI * 400.0) / g0);
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((esc - expect).abs() < 4.0 * sigma, "{esc} vs {expect}");
    }
}
