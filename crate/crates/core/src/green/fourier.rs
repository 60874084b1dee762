//! Fourier-side evaluation of G, used as an independent check on the
//! Bessel-integral tables.
//!
//! G(x) = π⁻³ ∫_{[0,π]³} Π cos(k_i x_i) · 3 / (3 − Σ cos k_i) dk, evaluated with
//! the midpoint (half-cell offset) rule on M³ cells. The 1/|k|² singularity at
//! the corner k = 0 makes the rule converge like h, h³, h⁵, ... (h = π/M), so
//! successive doublings are combined by Richardson extrapolation. The
//! coefficients grow like |x|^{2k}, so this is only practical for small |x|.

use rayon::prelude::*;

use crate::error::{CapError, Result};
use crate::lattice::LatticePoint;

/// Grid sizes tried in order.
pub const LEVELS: [usize; 5] = [32, 64, 128, 256, 512];

/// Error exponents of the offset rule for this integrand.
const EXPONENTS: [i32; 4] = [1, 3, 5, 7];

/// Richardson tableau over a doubling sequence.
#[derive(Debug, Clone, Default)]
pub struct Richardson {
    rows: Vec<Vec<f64>>,
}

impl Richardson {
    pub fn new() -> Self {
        Richardson { rows: Vec::new() }
    }

    /// Adds the raw value at the next (halved) step size.
    pub fn push(&mut self, raw: f64) {
        let mut row = vec![raw];
        if let Some(prev) = self.rows.last() {
            for (j, &p) in EXPONENTS.iter().enumerate().take(prev.len()) {
                let f = 2f64.powi(p);
                let v = (f * row[j] - prev[j]) / (f - 1.0);
                row.push(v);
            }
        }
        self.rows.push(row);
    }

    /// Most extrapolated value available.
    pub fn best(&self) -> f64 {
        *self.rows.last().and_then(|r| r.last()).unwrap_or(&f64::NAN)
    }

    /// Difference between the two most extrapolated values on the last two rows.
    pub fn error_estimate(&self) -> f64 {
        if self.rows.len() < 2 {
            return f64::INFINITY;
        }
        let last = &self.rows[self.rows.len() - 1];
        let prev = &self.rows[self.rows.len() - 2];
        (last[last.len() - 1] - prev[prev.len() - 1]).abs()
    }

    pub fn last_two(&self) -> Vec<f64> {
        let n = self.rows.len();
        self.rows[n.saturating_sub(2)..]
            .iter()
            .map(|r| *r.last().unwrap())
            .collect()
    }
}

fn nodes(m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| (j as f64 + 0.5) * std::f64::consts::PI / m as f64)
        .collect()
}

/// Raw midpoint-rule value at a single point on an M³ grid.
pub fn midpoint_single(x: &LatticePoint, m: usize) -> f64 {
    let k = nodes(m);
    let c: Vec<f64> = k.iter().map(|v| v.cos()).collect();
    let [a, b, d] = x.orbit_rep();
    let ca: Vec<f64> = k.iter().map(|v| (v * a as f64).cos()).collect();
    let cb: Vec<f64> = k.iter().map(|v| (v * b as f64).cos()).collect();
    let cd: Vec<f64> = k.iter().map(|v| (v * d as f64).cos()).collect();
    let total: f64 = (0..m)
        .into_par_iter()
        .map(|j3| {
            let mut s3 = 0.0;
            for j2 in 0..m {
                let base = 3.0 - c[j2] - c[j3];
                let mut s1 = 0.0;
                for j1 in 0..m {
                    s1 += ca[j1] / (base - c[j1]);
                }
                s3 += s1 * cb[j2];
            }
            s3 * cd[j3]
        })
        .sum();
    3.0 * total / (m * m * m) as f64
}

/// G(x) by extrapolated midpoint quadrature, to estimated absolute error `tol`.
pub fn green_fourier(x: &LatticePoint, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(CapError::domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    let rep = x.orbit_rep();
    let canon = LatticePoint::new(rep[0] as i32, rep[1] as i32, rep[2] as i32);
    let mut rt = Richardson::new();
    for &m in LEVELS.iter() {
        rt.push(midpoint_single(&canon, m));
        if rt.error_estimate() < tol {
            return Ok(rt.best());
        }
    }
    Err(CapError::numeric(
        format!("quadrature for G({x}) did not reach tol {tol:e} by M = {}", LEVELS[LEVELS.len() - 1]),
        rt.last_two(),
    ))
}
