//! Points of the cubic lattice Z³ and the symmetry group of the walk.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{CapError, Result};

/// Largest admissible absolute coordinate. Keeps squared norms of any
/// in-range point (and of differences that are themselves in range) inside i64.
pub const COORD_LIMIT: i64 = 1 << 30;

/// A site of Z³.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

/// The six unit steps, indexed by step code 0..5: +x, -x, +y, -y, +z, -z.
pub const UNIT_STEPS: [LatticePoint; 6] = [
    LatticePoint::new(1, 0, 0),
    LatticePoint::new(-1, 0, 0),
    LatticePoint::new(0, 1, 0),
    LatticePoint::new(0, -1, 0),
    LatticePoint::new(0, 0, 1),
    LatticePoint::new(0, 0, -1),
];

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint::new(0, 0, 0);

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        LatticePoint { x, y, z }
    }

    /// Builds a point from wide coordinates, rejecting anything beyond [`COORD_LIMIT`].
    pub fn try_new(x: i64, y: i64, z: i64) -> Result<Self> {
        for c in [x, y, z] {
            if c.abs() > COORD_LIMIT {
                return Err(CapError::domain(format!(
                    "lattice coordinate {c} exceeds the supported range ±{COORD_LIMIT}"
                )));
            }
        }
        Ok(LatticePoint::new(x as i32, y as i32, z as i32))
    }

    /// Nearest lattice point to a real vector (ties away from zero).
    pub fn round(v: [f64; 3]) -> Result<Self> {
        let r = |c: f64| -> Result<i64> {
            if !c.is_finite() {
                return Err(CapError::domain("cannot round a non-finite coordinate"));
            }
            Ok(c.round() as i64)
        };
        LatticePoint::try_new(r(v[0])?, r(v[1])?, r(v[2])?)
    }

    pub fn coords(&self) -> [i32; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_coords(c: [i32; 3]) -> Self {
        LatticePoint::new(c[0], c[1], c[2])
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [self.x as f64, self.y as f64, self.z as f64]
    }

    pub fn checked_add(&self, o: &LatticePoint) -> Result<LatticePoint> {
        LatticePoint::try_new(
            self.x as i64 + o.x as i64,
            self.y as i64 + o.y as i64,
            self.z as i64 + o.z as i64,
        )
    }

    pub fn checked_sub(&self, o: &LatticePoint) -> Result<LatticePoint> {
        LatticePoint::try_new(
            self.x as i64 - o.x as i64,
            self.y as i64 - o.y as i64,
            self.z as i64 - o.z as i64,
        )
    }

    /// Squared Euclidean norm.
    #[inline]
    pub fn norm2(&self) -> i64 {
        let (x, y, z) = (self.x as i64, self.y as i64, self.z as i64);
        x * x + y * y + z * z
    }

    /// Euclidean norm, computed in floating point so that it is valid for any i32 coordinates.
    #[inline]
    pub fn norm(&self) -> f64 {
        let [x, y, z] = self.as_f64();
        (x * x + y * y + z * z).sqrt()
    }

    #[inline]
    pub fn norm_l1(&self) -> i64 {
        (self.x as i64).abs() + (self.y as i64).abs() + (self.z as i64).abs()
    }

    #[inline]
    pub fn norm_inf(&self) -> i64 {
        (self.x as i64).abs().max((self.y as i64).abs()).max((self.z as i64).abs())
    }

    /// Canonical orbit representative under the 48 signed permutations:
    /// absolute values sorted in decreasing order.
    #[inline]
    pub fn orbit_rep(&self) -> [u32; 3] {
        let mut a = [self.x.unsigned_abs(), self.y.unsigned_abs(), self.z.unsigned_abs()];
        if a[0] < a[1] {
            a.swap(0, 1);
        }
        if a[1] < a[2] {
            a.swap(1, 2);
        }
        if a[0] < a[1] {
            a.swap(0, 1);
        }
        a
    }

    /// Image under the signed permutation with index `g` in 0..48.
    pub fn apply_symmetry(&self, g: usize) -> LatticePoint {
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let c = self.coords();
        let p = PERMS[g / 8];
        let s = g % 8;
        let sign = |bit: usize, v: i32| if s >> bit & 1 == 1 { -v } else { v };
        LatticePoint::new(sign(0, c[p[0]]), sign(1, c[p[1]]), sign(2, c[p[2]]))
    }

    /// All 48 signed-permutation images (with repetitions when coordinates coincide).
    pub fn symmetry_images(&self) -> [LatticePoint; 48] {
        let mut out = [LatticePoint::ORIGIN; 48];
        for (g, slot) in out.iter_mut().enumerate() {
            *slot = self.apply_symmetry(g);
        }
        out
    }

    /// Distinct images under the symmetry group.
    pub fn orbit(&self) -> Vec<LatticePoint> {
        let mut v: Vec<LatticePoint> = self.symmetry_images().to_vec();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn neighbors(&self) -> [LatticePoint; 6] {
        UNIT_STEPS.map(|e| *self + e)
    }

    /// Step code (0..5) if `other` is a nearest neighbour of `self`.
    pub fn step_code_to(&self, other: &LatticePoint) -> Option<u8> {
        let d = *other - *self;
        UNIT_STEPS.iter().position(|e| *e == d).map(|i| i as u8)
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    #[inline]
    fn add(self, o: LatticePoint) -> LatticePoint {
        LatticePoint::new(
            self.x.checked_add(o.x).expect("lattice coordinate overflow"),
            self.y.checked_add(o.y).expect("lattice coordinate overflow"),
            self.z.checked_add(o.z).expect("lattice coordinate overflow"),
        )
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    #[inline]
    fn sub(self, o: LatticePoint) -> LatticePoint {
        LatticePoint::new(
            self.x.checked_sub(o.x).expect("lattice coordinate overflow"),
            self.y.checked_sub(o.y).expect("lattice coordinate overflow"),
            self.z.checked_sub(o.z).expect("lattice coordinate overflow"),
        )
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.x, self.y, self.z)
    }
}

impl From<[i32; 3]> for LatticePoint {
    fn from(c: [i32; 3]) -> Self {
        LatticePoint::from_coords(c)
    }
}
