//! Exact capacity of finite subsets of Z³.
//!
//! Cap(A) = Σ_{x∈A} P^x(T_A = ∞) with T_A the first hitting time of A after
//! time zero. The last-exit decomposition gives Σ_y G(x−y) esc(y) = 1 for
//! x ∈ A, a symmetric positive definite system solved densely.

use std::io::BufRead;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{CapError, Result};
use crate::green::{green, G0};
use crate::lattice::LatticePoint;

/// Largest set accepted by the dense solver.
pub const DENSE_SOLVE_MAX: usize = 4000;

/// Largest number of points [`ball_points`] will enumerate.
pub const BALL_ENUM_MAX: usize = 5_000_000;

/// Largest radius for which [`ball_capacity`] solves exactly.
pub const BALL_EXACT_MAX_R: f64 = 24.0;

/// Required relative residual of every equilibrium solve.
pub const SOLVE_TOL: f64 = 1e-10;

/// A finite multiset of lattice points: distinct points in insertion order,
/// each with a multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<LatticePoint>,
    mult: Vec<u32>,
    index: FxHashMap<LatticePoint, usize>,
}

impl PointSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set of distinct points; repeats are merged into multiplicities.
    pub fn from_points<I: IntoIterator<Item = LatticePoint>>(it: I) -> Self {
        let mut s = PointSet::new();
        for p in it {
            s.insert(p);
        }
        s
    }

    /// Set built from points that must be pairwise distinct.
    pub fn from_distinct<I: IntoIterator<Item = LatticePoint>>(it: I) -> Result<Self> {
        let s = Self::from_points(it);
        if s.has_repeats() {
            return Err(CapError::domain("point list contains repeated points"));
        }
        Ok(s)
    }

    /// Adds one copy of `p`; returns true if `p` was new.
    pub fn insert(&mut self, p: LatticePoint) -> bool {
        match self.index.get(&p) {
            Some(&i) => {
                self.mult[i] += 1;
                false
            }
            None => {
                self.index.insert(p, self.points.len());
                self.points.push(p);
                self.mult.push(1);
                true
            }
        }
    }

    /// Number of distinct points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points counted with multiplicity.
    pub fn total(&self) -> u64 {
        self.mult.iter().map(|&m| m as u64).sum()
    }

    pub fn has_repeats(&self) -> bool {
        self.mult.iter().any(|&m| m > 1)
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.index.contains_key(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &LatticePoint> {
        self.points.iter()
    }

    /// The same points with every multiplicity reset to one.
    pub fn distinct(&self) -> PointSet {
        PointSet::from_points(self.points.iter().copied())
    }

    /// Multiset sum: multiplicities add.
    pub fn multiset_union(&self, other: &PointSet) -> PointSet {
        let mut s = self.clone();
        for (p, &m) in other.points.iter().zip(&other.mult) {
            for _ in 0..m {
                s.insert(*p);
            }
        }
        s
    }

    /// Set union of the distinct points.
    pub fn union(&self, other: &PointSet) -> PointSet {
        PointSet::from_points(self.points.iter().chain(other.points.iter()).copied())
    }

    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.points.iter().all(|p| !big.contains(p))
    }

    pub fn translate(&self, v: &LatticePoint) -> Result<PointSet> {
        let mut s = PointSet::new();
        for (p, &m) in self.points.iter().zip(&self.mult) {
            let q = p.checked_add(v)?;
            for _ in 0..m {
                s.insert(q);
            }
        }
        Ok(s)
    }

    /// Mean of the distinct points.
    pub fn centroid(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for p in &self.points {
            let v = p.as_f64();
            for k in 0..3 {
                c[k] += v[k];
            }
        }
        let n = self.points.len().max(1) as f64;
        c.map(|v| v / n)
    }

    /// Reads one `x y z` triple per line; blank lines and `#` comments are skipped.
    pub fn read_text(path: &Path) -> Result<PointSet> {
        let f = std::fs::File::open(path)?;
        let mut s = PointSet::new();
        for (lineno, line) in std::io::BufReader::new(f).lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let v: Vec<i64> = t
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|w| !w.is_empty())
                .map(|w| w.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| CapError::config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            if v.len() != 3 {
                return Err(CapError::config(format!(
                    "{}:{}: expected three coordinates",
                    path.display(),
                    lineno + 1
                )));
            }
            s.insert(LatticePoint::try_new(v[0], v[1], v[2])?);
        }
        Ok(s)
    }
}

impl FromIterator<LatticePoint> for PointSet {
    fn from_iter<I: IntoIterator<Item = LatticePoint>>(it: I) -> Self {
        PointSet::from_points(it)
    }
}

/// Escape probabilities of a finite set and their sum.
#[derive(Debug, Clone)]
pub struct EquilibriumMeasure {
    pub set: PointSet,
    pub esc: Vec<f64>,
    pub cap: f64,
    /// max_x |Σ_y G(x−y) esc(y) − 1|.
    pub solver_residual: f64,
}

impl EquilibriumMeasure {
    pub fn esc_of(&self, p: &LatticePoint) -> Option<f64> {
        self.set.index_of(p).map(|i| self.esc[i])
    }

    /// P^x(T_A = ∞) for x outside the set, as 1 − Σ_y G(x−y) esc(y).
    pub fn escape_from(&self, x: &LatticePoint) -> Result<f64> {
        if self.set.contains(x) {
            return Err(CapError::domain(format!(
                "{x} lies in the set; use its equilibrium mass instead"
            )));
        }
        let mut s = 0.0;
        for (y, e) in self.set.points().iter().zip(&self.esc) {
            s += green(&x.checked_sub(y)?) * e;
        }
        Ok((1.0 - s).clamp(0.0, 1.0))
    }
}

fn check_differences(a: &PointSet) -> Result<()> {
    // every pairwise difference must stay in range; the bounding box decides it
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for p in a.points() {
        for (k, c) in p.coords().iter().enumerate() {
            lo[k] = lo[k].min(*c as i64);
            hi[k] = hi[k].max(*c as i64);
        }
    }
    for k in 0..3 {
        if hi[k] - lo[k] > crate::lattice::COORD_LIMIT {
            return Err(CapError::domain("set extent exceeds the supported coordinate range"));
        }
    }
    Ok(())
}

fn green_matrix(pts: &[LatticePoint]) -> DMatrix<f64> {
    let n = pts.len();
    let cols: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|x| pts.iter().map(|y| green(&(*x - *y))).collect())
        .collect();
    DMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Solves Σ_y G(x−y) esc(y) = 1 on the distinct points of `a`.
pub fn equilibrium_measure(a: &PointSet) -> Result<EquilibriumMeasure> {
    if a.is_empty() {
        return Err(CapError::domain("equilibrium measure of the empty set"));
    }
    if a.len() > DENSE_SOLVE_MAX {
        return Err(CapError::resource(format!(
            "dense solve limited to {DENSE_SOLVE_MAX} points, got {}",
            a.len()
        )));
    }
    check_differences(a)?;
    let set = a.distinct();
    let n = set.len();
    let g = green_matrix(set.points());
    let ones = DVector::from_element(n, 1.0);
    let chol = g.clone().cholesky().ok_or_else(|| {
        let d = g.diagonal();
        CapError::numeric(
            "Green matrix is not positive definite",
            vec![d.max(), d.min(), n as f64],
        )
    })?;
    let mut esc = chol.solve(&ones);
    let mut resid = &ones - &g * &esc;
    for _ in 0..3 {
        if resid.amax() <= SOLVE_TOL * 0.01 {
            break;
        }
        esc += chol.solve(&resid);
        resid = &ones - &g * &esc;
    }
    let residual = resid.amax();
    if !(residual <= SOLVE_TOL) {
        let diag = g.diagonal();
        return Err(CapError::numeric(
            format!("equilibrium residual {residual:e} exceeds {SOLVE_TOL:e}"),
            vec![residual, diag.max() / diag.min()],
        ));
    }
    let esc: Vec<f64> = esc.iter().copied().collect();
    let cap = esc.iter().sum();
    Ok(EquilibriumMeasure { set, esc, cap, solver_residual: residual })
}

/// Cap(A); zero for the empty set.
pub fn capacity_exact(a: &PointSet) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(equilibrium_measure(a)?.cap)
}

/// P^x(T_A = ∞) for x ∉ A; one for the empty set.
pub fn escape_probability(x: &LatticePoint, a: &PointSet) -> Result<f64> {
    if a.contains(x) {
        return Err(CapError::domain(format!("{x} lies in the set")));
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    equilibrium_measure(a)?.escape_from(x)
}

/// Σ_{y∈X} G(x−y) with multiplicities, for each distinct x ∈ X.
fn green_row_sums(x: &PointSet, over: &PointSet) -> Vec<f64> {
    x.points()
        .par_iter()
        .map(|p| {
            over.points()
                .iter()
                .zip(over.multiplicities())
                .map(|(q, &m)| m as f64 * green(&(*p - *q)))
                .sum()
        })
        .collect()
}

/// |X| / max_x Σ_y G(x−y) ≤ Cap(X) ≤ |X| / min_x Σ_y G(x−y), multiplicities
/// counted in |X| and in the sums.
pub fn capacity_bounds(a: &PointSet) -> Result<(f64, f64)> {
    if a.is_empty() {
        return Err(CapError::domain("capacity bounds of the empty set"));
    }
    check_differences(a)?;
    let sums = green_row_sums(a, a);
    let total = a.total() as f64;
    let max = sums.iter().copied().fold(f64::MIN, f64::max);
    let min = sums.iter().copied().fold(f64::MAX, f64::min);
    Ok((total / max, total / min))
}

/// Cap(X) + |X ⊎ Y| / min_{y∈Y} Σ_{z∈X⊎Y} G(z−y), where ⊎ is the multiset
/// sum; an upper bound on Cap(X ∪ Y).
pub fn union_capacity_upper(x: &PointSet, y: &PointSet) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(CapError::domain("union bound needs two nonempty sets"));
    }
    let both = x.multiset_union(y);
    check_differences(&both)?;
    let sums = green_row_sums(y, &both);
    let min = sums.iter().copied().fold(f64::MAX, f64::min);
    Ok(capacity_exact(x)? + both.total() as f64 / min)
}

/// Σ_{x∈B} P^x(T_A = ∞) · P^x(T_{A∪B} = ∞), which equals Cap(A∪B) − Cap(A)
/// for disjoint sets of distinct points.
pub fn incremental_capacity(a: &PointSet, b: &PointSet) -> Result<f64> {
    if a.has_repeats() || b.has_repeats() {
        return Err(CapError::domain("incremental identity needs sets of distinct points"));
    }
    if !a.is_disjoint(b) {
        return Err(CapError::domain("incremental identity needs disjoint sets"));
    }
    if b.is_empty() {
        return Ok(0.0);
    }
    let ab = a.union(b);
    let mu_ab = equilibrium_measure(&ab)?;
    let mu_a = if a.is_empty() { None } else { Some(equilibrium_measure(a)?) };
    let mut s = 0.0;
    for p in b.points() {
        let far = match &mu_a {
            Some(m) => m.escape_from(p)?,
            None => 1.0,
        };
        s += far * mu_ab.esc_of(p).expect("point of B lies in A∪B");
    }
    Ok(s)
}

/// Lattice points with ‖x‖ ≤ r.
pub fn ball_points(r: f64) -> Result<PointSet> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(CapError::domain(format!("ball radius must be a finite non-negative number, got {r}")));
    }
    let est = 4.19 * (r + 1.0).powi(3);
    if est > BALL_ENUM_MAX as f64 {
        return Err(CapError::resource(format!(
            "ball of radius {r} has about {est:.0} points, budget is {BALL_ENUM_MAX}"
        )));
    }
    let k = r.floor() as i32;
    let r2 = r * r;
    let mut s = PointSet::new();
    for a in -k..=k {
        for b in -k..=k {
            for c in -k..=k {
                let p = LatticePoint::new(a, b, c);
                if p.norm2() as f64 <= r2 {
                    s.insert(p);
                }
            }
        }
    }
    Ok(s)
}

/// Capacity of B_r, solved exactly or taken from the asymptote (2π/3)·r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallCapacity {
    pub radius: f64,
    pub value: f64,
    pub exact: bool,
    /// Residual of the reduced solve (zero in asymptotic mode).
    pub residual: f64,
}

/// Cap(B_r). For r ≤ [`BALL_EXACT_MAX_R`] the equilibrium system is reduced to
/// one unknown per orbit of the symmetry group (the measure is invariant) and
/// solved exactly; beyond that the asymptotic value is returned and flagged.
pub fn ball_capacity(r: f64) -> Result<BallCapacity> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(CapError::domain(format!("ball radius must be a finite non-negative number, got {r}")));
    }
    if r > BALL_EXACT_MAX_R {
        return Ok(BallCapacity {
            radius: r,
            value: 2.0 * std::f64::consts::PI / 3.0 * r,
            exact: false,
            residual: 0.0,
        });
    }
    if r < 1.0 {
        return Ok(BallCapacity { radius: r, value: 1.0 / green(&LatticePoint::ORIGIN), exact: true, residual: 0.0 });
    }
    let pts = ball_points(r)?;
    let mut orbit_of: FxHashMap<[u32; 3], usize> = FxHashMap::default();
    let mut reps: Vec<LatticePoint> = Vec::new();
    let mut members: Vec<Vec<LatticePoint>> = Vec::new();
    for p in pts.points() {
        let key = p.orbit_rep();
        let id = *orbit_of.entry(key).or_insert_with(|| {
            reps.push(LatticePoint::new(key[0] as i32, key[1] as i32, key[2] as i32));
            members.push(Vec::new());
            reps.len() - 1
        });
        members[id].push(*p);
    }
    let m = reps.len();
    let rows: Vec<Vec<f64>> = reps
        .par_iter()
        .map(|x| members.iter().map(|orb| orb.iter().map(|y| green(&(*x - *y))).sum()).collect())
        .collect();
    let k = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    let ones = DVector::from_element(m, 1.0);
    let lu = k.clone().lu();
    let mut e = lu
        .solve(&ones)
        .ok_or_else(|| CapError::numeric("reduced ball system is singular", vec![m as f64]))?;
    let mut resid = &ones - &k * &e;
    for _ in 0..3 {
        if resid.amax() <= SOLVE_TOL * 0.01 {
            break;
        }
        if let Some(d) = lu.solve(&resid) {
            e += d;
        }
        resid = &ones - &k * &e;
    }
    let residual = resid.amax();
    if !(residual <= SOLVE_TOL) {
        return Err(CapError::numeric(format!("reduced ball residual {residual:e}"), vec![residual]));
    }
    let value = members.iter().zip(e.iter()).map(|(orb, v)| orb.len() as f64 * v).sum();
    Ok(BallCapacity { radius: r, value, exact: true, residual })
}

/// Cap({0}) from Watson's constant, for reference.
pub fn singleton_capacity() -> f64 {
    1.0 / G0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CAP0: f64 = 0.659_462_670_449_000_9;
    const CAP_PAIR: f64 = 0.983_878_115_009_123_9;

    fn p(a: i32, b: i32, c: i32) -> LatticePoint {
        LatticePoint::new(a, b, c)
    }

    #[test]
    fn singleton_and_pair() {
        let m = equilibrium_measure(&PointSet::from_points([p(0, 0, 0)])).unwrap();
        assert!((m.cap - CAP0).abs() < 1e-9);
        let m = equilibrium_measure(&PointSet::from_points([p(0, 0, 0), p(1, 0, 0)])).unwrap();
        assert!((m.cap - CAP_PAIR).abs() < 1e-9);
        assert!((m.esc[0] - m.esc[1]).abs() < 1e-14);
        assert!(m.solver_residual <= SOLVE_TOL);
        let far = capacity_exact(&PointSet::from_points([p(-70, 3, 1_000)])).unwrap();
        assert!((far - CAP0).abs() < 1e-12);
    }

    #[test]
    fn escape_probabilities() {
        let a = PointSet::from_points([p(0, 0, 0)]);
        let e = escape_probability(&p(1, 0, 0), &a).unwrap();
        assert!((e - CAP0).abs() < 1e-9);
        let x = p(1000, 0, 0);
        let e = escape_probability(&x, &a).unwrap();
        let want = 1.0 - CAP0 * 3.0 / (2.0 * std::f64::consts::PI * 1000.0);
        assert!((e - want).abs() < 1e-4);
        assert_eq!(escape_probability(&x, &PointSet::new()).unwrap(), 1.0);
        assert!(matches!(escape_probability(&p(0, 0, 0), &a), Err(CapError::Domain(_))));
    }

    #[test]
    fn escape_decay_rate() {
        let a = PointSet::from_points([p(0, 0, 0), p(1, 0, 0), p(1, 1, 0), p(0, 0, 2)]);
        let m = equilibrium_measure(&a).unwrap();
        for x in [p(100, 0, 0), p(70, 70, 20), p(0, 0, 300)] {
            let deficit = 1.0 - m.escape_from(&x).unwrap();
            let pred = m.cap * 3.0 / (2.0 * std::f64::consts::PI * x.norm());
            assert!((deficit / pred - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn bounds_with_multiplicity() {
        let (lo, hi) = capacity_bounds(&PointSet::from_points([p(0, 0, 0)])).unwrap();
        assert!((lo - CAP0).abs() < 1e-9 && (hi - lo).abs() < 1e-15);
        let doubled = PointSet::from_points([p(0, 0, 0), p(0, 0, 0), p(1, 0, 0)]);
        let (lo, hi) = capacity_bounds(&doubled).unwrap();
        let g0 = green(&p(0, 0, 0));
        let g1 = green(&p(1, 0, 0));
        // rows: 0 → 2 G0 + G1, e1 → 2 G1 + G0
        assert!((lo - 3.0 / (2.0 * g0 + g1)).abs() < 1e-12);
        assert!((hi - 3.0 / (2.0 * g1 + g0)).abs() < 1e-12);
        assert!(capacity_bounds(&PointSet::new()).is_err());
    }

    #[test]
    fn union_and_incremental_examples() {
        let x = PointSet::from_points([p(0, 0, 0)]);
        let y = PointSet::from_points([p(1, 0, 0)]);
        assert!(union_capacity_upper(&x, &y).unwrap() >= CAP_PAIR);
        assert!(union_capacity_upper(&x, &x).unwrap() >= CAP0);
        let inc = incremental_capacity(&x, &y).unwrap();
        assert!((inc - (CAP_PAIR - CAP0)).abs() < 1e-9);
        assert!((inc - 0.324_41).abs() < 1e-5);
        assert_eq!(incremental_capacity(&x, &PointSet::new()).unwrap(), 0.0);
        assert!(incremental_capacity(&x, &x).is_err());
        let rep = PointSet::from_points([p(5, 0, 0), p(5, 0, 0)]);
        assert!(incremental_capacity(&x, &rep).is_err());
    }

    #[test]
    fn ball_enumeration() {
        assert_eq!(ball_points(0.0).unwrap().len(), 1);
        assert_eq!(ball_points(1.0).unwrap().len(), 7);
        assert_eq!(ball_points(2.0).unwrap().len(), 33);
        assert!(matches!(ball_points(1000.0), Err(CapError::Resource(_))));
    }

    #[test]
    fn ball_capacity_modes() {
        let b0 = ball_capacity(0.0).unwrap();
        assert!(b0.exact && (b0.value - CAP0).abs() < 1e-9);
        // reduced solve agrees with the full dense solve
        let small = ball_capacity(3.0).unwrap();
        let full = capacity_exact(&ball_points(3.0).unwrap()).unwrap();
        assert!((small.value - full).abs() < 1e-9 * full);
        let b12 = ball_capacity(12.0).unwrap();
        let asym = 2.0 * std::f64::consts::PI / 3.0 * 12.0;
        assert!(b12.exact && (b12.value / asym - 1.0).abs() < 0.1, "{b12:?}");
        let big = ball_capacity(1e4).unwrap();
        assert!(!big.exact && (big.value / 1e4 - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn refuses_oversized_solves() {
        let big = PointSet::from_points((0..(DENSE_SOLVE_MAX as i32 + 1)).map(|i| p(i, 0, 0)));
        assert!(matches!(equilibrium_measure(&big), Err(CapError::Resource(_))));
    }

    fn small_set() -> impl Strategy<Value = PointSet> {
        prop::collection::vec((-10i32..=10, -10i32..=10, -10i32..=10), 1..25)
            .prop_map(|v| PointSet::from_points(v.into_iter().map(|(a, b, c)| p(a, b, c))).distinct())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn measure_invariants(a in small_set()) {
            let m = equilibrium_measure(&a).unwrap();
            prop_assert!(m.solver_residual <= SOLVE_TOL);
            prop_assert!(m.esc.iter().all(|&e| (0.0..=1.0).contains(&e)));
            prop_assert!((m.cap - m.esc.iter().sum::<f64>()).abs() <= 1e-12);
            let (lo, hi) = capacity_bounds(&a).unwrap();
            prop_assert!(lo <= m.cap * (1.0 + 1e-12) && m.cap <= hi * (1.0 + 1e-12));
        }

        #[test]
        fn monotone_subadditive_translation_invariant(a in small_set(), b in small_set(), v in (-50i32..50, -50i32..50, -50i32..50)) {
            let ca = capacity_exact(&a).unwrap();
            let cb = capacity_exact(&b).unwrap();
            let cu = capacity_exact(&a.union(&b)).unwrap();
            prop_assert!(ca <= cu * (1.0 + 1e-12));
            prop_assert!(cu <= (ca + cb) * (1.0 + 1e-12));
            let t = capacity_exact(&a.translate(&p(v.0, v.1, v.2)).unwrap()).unwrap();
            prop_assert!((t - ca).abs() <= 1e-9 * ca);
            prop_assert!(union_capacity_upper(&a, &b).unwrap() >= cu * (1.0 - 1e-12));
        }

        #[test]
        fn incremental_identity(a in small_set(), b in small_set()) {
            let b = PointSet::from_points(b.iter().copied().filter(|q| !a.contains(q)));
            let inc = incremental_capacity(&a, &b).unwrap();
            let diff = capacity_exact(&a.union(&b)).unwrap() - capacity_exact(&a).unwrap();
            let scale = capacity_exact(&a.union(&b)).unwrap();
            prop_assert!((inc - diff).abs() <= 1e-9 * scale);
        }
    }
}
