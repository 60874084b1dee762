//! Time-domain evaluation of G as a sum of transition probabilities.
//!
//! A step of the walk moves along the z axis with probability 1/3 and otherwise
//! moves in the xy plane. In the rotated coordinates u = x + y, v = x − y the
//! planar walk is a pair of independent ±1 walks, so
//!
//!   P(S_t = x) = Σ_m C(t, m) (2/3)^m (1/3)^(t−m) p₁(m, x₁+x₂) p₁(m, x₁−x₂) p₁(t−m, x₃)
//!
//! with p₁(n, a) = C(n, (n+a)/2) 2⁻ⁿ. Summing over t ≤ H is exact up to
//! rounding; the tail beyond H decays like H^{-1/2} and is removed by
//! extrapolation over three horizons.

use statrs::function::gamma::ln_gamma;

use crate::error::{CapError, Result};
use crate::lattice::{LatticePoint, UNIT_STEPS};

/// Largest horizon accepted by the time-domain oracle.
pub const DP_MAX_HORIZON: u64 = 4_000_000;

/// Largest number of cells the literal box recursion may allocate.
pub const BOX_MAX_CELLS: usize = 1 << 24;

/// Half-width of the binomial window, in standard deviations.
const WINDOW_SIGMAS: f64 = 14.0;

/// Output of [`green_dp_extrapolated`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpValue {
    /// Tail-extrapolated estimate of G(x).
    pub value: f64,
    /// Exact partial sum Σ_{t ≤ H} P(S_t = x).
    pub truncated: f64,
    /// Leading-order size of the omitted tail, (3/2π)^{3/2} · 2 / √H.
    pub tail_bound: f64,
}

struct LogFactorials(Vec<f64>);

impl LogFactorials {
    fn new(n: u64) -> Self {
        LogFactorials((0..=n).map(|k| ln_gamma(k as f64 + 1.0)).collect())
    }

    #[inline]
    fn choose(&self, n: u64, k: u64) -> f64 {
        self.0[n as usize] - self.0[k as usize] - self.0[(n - k) as usize]
    }

    /// ln p₁(n, a), or None if the 1D walk cannot be at a after n steps.
    #[inline]
    fn ln_p1(&self, n: u64, a: i64) -> Option<f64> {
        let a = a.unsigned_abs();
        if a > n || (n - a) % 2 == 1 {
            return None;
        }
        Some(self.choose(n, (n + a) / 2) - n as f64 * std::f64::consts::LN_2)
    }
}

fn check_horizon(horizon: u64) -> Result<()> {
    if horizon > DP_MAX_HORIZON {
        return Err(CapError::resource(format!(
            "oracle horizon {horizon} exceeds the budget of {DP_MAX_HORIZON}"
        )));
    }
    Ok(())
}

/// Partial sums Σ_{t ≤ h} P(S_t = x) for each h in `horizons` (ascending).
fn partial_sums(x: &LatticePoint, horizons: &[u64]) -> Result<Vec<f64>> {
    let hmax = *horizons.last().unwrap_or(&0);
    check_horizon(hmax)?;
    let lf = LogFactorials::new(hmax);
    let (x1, x2, x3) = (x.x as i64, x.y as i64, x.z as i64);
    let (u, v) = (x1 + x2, x1 - x2);
    let parity = (x.norm_l1() % 2) as u64;
    let ln23 = (2.0f64 / 3.0).ln();
    let ln13 = (1.0f64 / 3.0).ln();

    let mut out = Vec::with_capacity(horizons.len());
    let mut acc = 0.0;
    let mut next = 0;
    for t in 0..=hmax {
        if t % 2 == parity {
            let mean = 2.0 * t as f64 / 3.0;
            let half = WINDOW_SIGMAS * (2.0 * t as f64 / 9.0).sqrt() + 2.0;
            let lo = ((mean - half).floor().max(0.0)) as u64;
            let hi = ((mean + half).ceil() as u64).min(t);
            let mut m = lo;
            if (m as i64 - u).rem_euclid(2) == 1 {
                m += 1;
            }
            let mut s = 0.0;
            while m <= hi {
                if let (Some(pu), Some(pv), Some(pz)) =
                    (lf.ln_p1(m, u), lf.ln_p1(m, v), lf.ln_p1(t - m, x3))
                {
                    let w = lf.choose(t, m) + m as f64 * ln23 + (t - m) as f64 * ln13;
                    s += (w + pu + pv + pz).exp();
                }
                m += 2;
            }
            acc += s;
        }
        while next < horizons.len() && horizons[next] == t {
            out.push(acc);
            next += 1;
        }
    }
    Ok(out)
}

/// Exact truncated Green's function Σ_{t=0}^{H} P(S_t = x).
///
/// The omitted tail is of order (3/2π)^{3/2} · 2/√H; see [`DpValue::tail_bound`].
pub fn green_dp_oracle(x: &LatticePoint, horizon: u64) -> Result<f64> {
    Ok(partial_sums(x, &[horizon])?[0])
}

/// G(x) from truncated sums at horizons H/16, H/4 and H with the tail
/// removed under the model G_h = G − a s^{-1/2} − b s^{-3/2}, where s is one
/// more than the last time ≤ h at which the walk can sit at x.
pub fn green_dp_extrapolated(x: &LatticePoint, horizon: u64) -> Result<DpValue> {
    if horizon < 64 {
        return Err(CapError::domain(format!(
            "oracle horizon must be at least 64 for tail extrapolation, got {horizon}"
        )));
    }
    let hs = [horizon / 16, horizon / 4, horizon];
    let sums = partial_sums(x, &hs)?;
    let parity = (x.norm_l1() % 2) as u64;
    let s: Vec<f64> = hs
        .iter()
        .map(|&h| (if h % 2 == parity { h } else { h - 1 }) as f64 + 1.0)
        .collect();

    // rows [1, -s^{-1/2}, -s^{-3/2}] · (G, a, b) = sums
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i] = [1.0, -s[i].powf(-0.5), -s[i].powf(-1.5), sums[i]];
    }
    for c in 0..3 {
        let p = (c..3)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap();
        m.swap(c, p);
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..4 {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    let value = m[0][3] / m[0][0];
    let c = (3.0 / (2.0 * std::f64::consts::PI)).powf(1.5);
    Ok(DpValue {
        value,
        truncated: sums[2],
        tail_bound: 2.0 * c / (horizon as f64).sqrt(),
    })
}

/// Literal recursion on the box [−H, H]³: the occupation law is pushed forward
/// H times and its value at x accumulated. Only usable for small horizons; it
/// serves as an independent check on [`green_dp_oracle`].
pub fn green_box_dp(x: &LatticePoint, horizon: u64) -> Result<f64> {
    let l = horizon as i64;
    let side = (2 * l + 1) as usize;
    let cells = side.checked_pow(3).unwrap_or(usize::MAX);
    if cells > BOX_MAX_CELLS {
        return Err(CapError::resource(format!(
            "box of side {side} needs {cells} cells, budget is {BOX_MAX_CELLS}"
        )));
    }
    if x.norm_inf() > l {
        return Ok(0.0);
    }
    let idx = |p: [i64; 3]| -> usize {
        (((p[0] + l) as usize * side) + (p[1] + l) as usize) * side + (p[2] + l) as usize
    };
    let mut cur = vec![0.0f64; cells];
    let mut nxt = vec![0.0f64; cells];
    cur[idx([0, 0, 0])] = 1.0;
    let target = idx([x.x as i64, x.y as i64, x.z as i64]);
    let mut acc = cur[target];
    for t in 0..horizon as i64 {
        nxt.iter_mut().for_each(|v| *v = 0.0);
        // after t steps the mass lives in the l1 ball of radius t
        let r = t.min(l - 1);
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    let p = cur[idx([a, b, c])];
                    if p == 0.0 {
                        continue;
                    }
                    let q = p / 6.0;
                    for e in UNIT_STEPS {
                        nxt[idx([a + e.x as i64, b + e.y as i64, c + e.z as i64])] += q;
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut nxt);
        acc += cur[target];
    }
    Ok(acc)
}
