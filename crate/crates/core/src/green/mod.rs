//! Green's function of simple random walk on Z³.
//!
//! G(x) is the expected number of visits to x by a walk started at the origin
//! (time zero included), so G(0) ≈ 1.5164 and G(e₁) = G(0) − 1. Values for
//! ‖x‖∞ ≤ R are tabulated once by quadrature and stored per orbit of the
//! 48-element symmetry group; beyond R a fitted far-field expansion is used.

pub mod bessel;
pub mod fourier;
pub mod oracle;

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{CapError, Result};
use crate::lattice::{LatticePoint, UNIT_STEPS};

pub use oracle::{green_box_dp, green_dp_extrapolated, green_dp_oracle, DpValue};
pub use bessel::green_quadrature;
pub use fourier::green_fourier;

/// Watson's value of G(0).
pub const G0: f64 = 1.516_386_059_151_978;

pub const DEFAULT_TABLE_RADIUS: usize = 24;
pub const DEFAULT_TABLE_TOL: f64 = 1e-7;

/// Bumped whenever the table contents would change for the same (R, tol).
pub const TABLE_FORMAT_VERSION: u32 = 1;

/// Environment variable naming a directory for cached tables.
pub const CACHE_DIR_ENV: &str = "CAPWALK_GREEN_CACHE";

const ORACLE_SPOT_HORIZON: u64 = 4000;
const FOURIER_SPOT_TOL: f64 = 1e-9;

/// Number of orbit representatives a ≥ b ≥ c ≥ 0 with a ≤ r.
pub fn orbit_count(r: usize) -> usize {
    (r + 1) * (r + 2) * (r + 3) / 6
}

#[inline]
fn orbit_index(rep: [u32; 3]) -> usize {
    let [a, b, c] = rep.map(|v| v as usize);
    a * (a + 1) * (a + 2) / 6 + b * (b + 1) / 2 + c
}

/// G(x) ≈ 3/(2π r) + (c_iso + c_cubic · (Σ x_i⁴/r⁴ − 3/5)) / r³.
///
/// The r⁻³ term carries the isotropic and the cubic-harmonic parts of the
/// first lattice correction; both coefficients are fitted on the outer
/// shells of the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    pub c_iso: f64,
    pub c_cubic: f64,
}

impl FarField {
    #[inline]
    pub fn eval(&self, x: &LatticePoint) -> f64 {
        self.eval_at(x.as_f64())
    }

    /// The same expansion at an arbitrary nonzero point of R³.
    #[inline]
    pub fn eval_at(&self, [a, b, c]: [f64; 3]) -> f64 {
        let r2 = a * a + b * b + c * c;
        let r = r2.sqrt();
        let q = (a.powi(4) + b.powi(4) + c.powi(4)) / (r2 * r2) - 0.6;
        3.0 / (2.0 * std::f64::consts::PI * r) + (self.c_iso + self.c_cubic * q) / (r2 * r)
    }

    fn features(x: &LatticePoint) -> (f64, f64, f64) {
        let [a, b, c] = x.as_f64();
        let r2 = a * a + b * b + c * c;
        let r = r2.sqrt();
        let q = (a.powi(4) + b.powi(4) + c.powi(4)) / (r2 * r2) - 0.6;
        (r, q, 3.0 / (2.0 * std::f64::consts::PI * r))
    }
}

/// Diagnostics recorded while building a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub r_table: usize,
    pub tol: f64,
    /// Largest change between the last two quadrature orders over the table.
    pub quadrature_error_estimate: f64,
    /// Points checked against the time-domain oracle.
    pub oracle_points: Vec<LatticePoint>,
    pub oracle_horizon: u64,
    /// Leading-order size of the oracle's truncated tail before extrapolation.
    pub oracle_tail_bound: f64,
    /// max |table − time-domain oracle| over the spot-check points.
    pub oracle_max_discrepancy: f64,
    /// max |table − Fourier cubature| over the same points.
    pub fourier_max_discrepancy: f64,
    /// max |G(x) − (1/6)Σ_e G(x+e)| over 0 < ‖x‖∞ ≤ R.
    pub harmonicity_residual: f64,
    /// |G(0) − 1 − (1/6)Σ_e G(e)|.
    pub origin_residual: f64,
    /// max |table − far field| on the shell ‖x‖∞ = R.
    pub handoff_error: f64,
    pub far_field: FarField,
}

/// Orbit-packed table of G on the cube ‖x‖∞ ≤ R plus far-field coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenTable {
    r_table: usize,
    values: Vec<f64>,
    far: FarField,
    report: BuildReport,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format_version: u32,
    crate_version: String,
    table: GreenTable,
}

impl GreenTable {
    pub fn r_table(&self) -> usize {
        self.r_table
    }

    pub fn report(&self) -> &BuildReport {
        &self.report
    }

    pub fn far_field(&self) -> FarField {
        self.far
    }

    /// G(x) for any x: exact table inside the cube, far field outside.
    #[inline]
    pub fn get(&self, x: &LatticePoint) -> f64 {
        if x.norm_inf() <= self.r_table as i64 {
            self.values[orbit_index(x.orbit_rep())]
        } else {
            self.far.eval(x)
        }
    }

    /// Table value, or None outside the tabulated cube.
    pub fn tabulated(&self, x: &LatticePoint) -> Option<f64> {
        (x.norm_inf() <= self.r_table as i64).then(|| self.values[orbit_index(x.orbit_rep())])
    }

    /// Cache file name for a given (R, tol) pair.
    pub fn cache_file_name(r_table: usize, tol: f64) -> String {
        format!("green-r{r_table}-tol{tol:e}-v{TABLE_FORMAT_VERSION}.json")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = CacheFile {
            format_version: TABLE_FORMAT_VERSION,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            table: self.clone(),
        };
        let s = serde_json::to_string(&file).map_err(|e| CapError::config(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, s)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Loads a cached table, checking that it was built for the same key.
    pub fn load(path: &Path, r_table: usize, tol: f64) -> Result<GreenTable> {
        let s = std::fs::read_to_string(path)?;
        let file: CacheFile =
            serde_json::from_str(&s).map_err(|e| CapError::config(format!("{}: {e}", path.display())))?;
        if file.format_version != TABLE_FORMAT_VERSION
            || file.crate_version != env!("CARGO_PKG_VERSION")
            || file.table.r_table != r_table
            || file.table.report.tol != tol
            || file.table.values.len() != orbit_count(r_table)
        {
            return Err(CapError::config(format!("{} does not match the requested table", path.display())));
        }
        Ok(file.table)
    }

    /// Loads from `dir` if a matching cache exists, otherwise builds and stores it.
    pub fn load_or_build(dir: &Path, r_table: usize, tol: f64) -> Result<GreenTable> {
        let path = dir.join(Self::cache_file_name(r_table, tol));
        if let Ok(t) = Self::load(&path, r_table, tol) {
            return Ok(t);
        }
        let t = build_green_table(r_table, tol)?;
        std::fs::create_dir_all(dir)?;
        t.save(&path)?;
        Ok(t)
    }
}

/// Builds the table for ‖x‖∞ ≤ `r_table` with quadrature tolerance `tol`.
pub fn build_green_table(r_table: usize, tol: f64) -> Result<GreenTable> {
    if r_table < 1 || r_table > 128 {
        return Err(CapError::domain(format!("table radius must lie in 1..=128, got {r_table}")));
    }
    if !(tol > 0.0) {
        return Err(CapError::domain(format!("table tolerance must be positive, got {tol}")));
    }
    // one extra shell so that harmonicity can be checked at ‖x‖∞ = R
    let n = r_table + 2;
    let mut reps = Vec::with_capacity(orbit_count(n - 1));
    for a in 0..n as u32 {
        for b in 0..=a {
            for c in 0..=b {
                reps.push([a, b, c]);
            }
        }
    }
    let (vals, err) = bessel::green_bessel_converged(&reps, tol)?;
    let at = |x: &LatticePoint| vals[orbit_index(x.orbit_rep())];
    let dense = |a: usize, b: usize, c: usize| vals[orbit_index([a as u32, b as u32, c as u32])];

    // orbit packing is prefix-closed in the leading coordinate
    let values = vals[..orbit_count(r_table)].to_vec();

    let mut harm = 0.0f64;
    for a in 1..=r_table as i32 {
        for b in 0..=a {
            for c in 0..=b {
                let x = LatticePoint::new(a, b, c);
                let avg: f64 = UNIT_STEPS.iter().map(|e| at(&(x + *e))).sum::<f64>() / 6.0;
                harm = harm.max((avg - at(&x)).abs());
            }
        }
    }
    let origin_residual = (dense(0, 0, 0) - 1.0 - dense(1, 0, 0)).abs();

    let far = fit_far_field(r_table, &at)?;
    let mut handoff = 0.0f64;
    let r = r_table as i32;
    for b in 0..=r {
        for c in 0..=b {
            let x = LatticePoint::new(r, b, c);
            handoff = handoff.max((at(&x) - far.eval(&x)).abs());
        }
    }

    let oracle_points: Vec<LatticePoint> = [(0, 0, 0), (1, 0, 0), (1, 1, 1), (2, 1, 0)]
        .into_iter()
        .map(|(a, b, c)| LatticePoint::new(a, b, c))
        .filter(|p| p.norm_inf() <= r_table as i64)
        .collect();
    let mut oracle_max = 0.0f64;
    let mut oracle_tail = 0.0f64;
    let mut fourier_max = 0.0f64;
    for p in &oracle_points {
        let dp = green_dp_extrapolated(p, ORACLE_SPOT_HORIZON)?;
        oracle_max = oracle_max.max((dp.value - at(p)).abs());
        oracle_tail = oracle_tail.max(dp.tail_bound);
        let fo = green_fourier(p, FOURIER_SPOT_TOL)?;
        fourier_max = fourier_max.max((fo - at(p)).abs());
    }

    let report = BuildReport {
        r_table,
        tol,
        quadrature_error_estimate: err,
        oracle_points,
        oracle_horizon: ORACLE_SPOT_HORIZON,
        oracle_tail_bound: oracle_tail,
        oracle_max_discrepancy: oracle_max,
        fourier_max_discrepancy: fourier_max,
        harmonicity_residual: harm,
        origin_residual,
        handoff_error: handoff,
        far_field: far,
    };
    Ok(GreenTable { r_table, values, far, report })
}

/// Least-squares fit of the two r⁻³ coefficients on R−2 ≤ ‖x‖∞ ≤ R.
fn fit_far_field(r_table: usize, at: &dyn Fn(&LatticePoint) -> f64) -> Result<FarField> {
    let lo = r_table.saturating_sub(2).max(1) as i32;
    let (mut s00, mut s01, mut s11, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for a in lo..=r_table as i32 {
        for b in 0..=a {
            for c in 0..=b {
                let x = LatticePoint::new(a, b, c);
                let (r, q, lead) = FarField::features(&x);
                let y = (at(&x) - lead) * r * r * r;
                s00 += 1.0;
                s01 += q;
                s11 += q * q;
                t0 += y;
                t1 += q * y;
            }
        }
    }
    let det = s00 * s11 - s01 * s01;
    if det.abs() < 1e-300 {
        return Err(CapError::numeric("far-field fit is singular", vec![s00, s01, s11]));
    }
    Ok(FarField {
        c_iso: (t0 * s11 - t1 * s01) / det,
        c_cubic: (s00 * t1 - s01 * t0) / det,
    })
}

static DEFAULT_TABLE: OnceLock<GreenTable> = OnceLock::new();

/// Process-wide table with the default radius and tolerance. Reads and writes
/// a cache under `$CAPWALK_GREEN_CACHE` when that variable is set.
pub fn default_table() -> &'static GreenTable {
    DEFAULT_TABLE.get_or_init(|| {
        let built = match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) => GreenTable::load_or_build(&PathBuf::from(dir), DEFAULT_TABLE_RADIUS, DEFAULT_TABLE_TOL),
            None => build_green_table(DEFAULT_TABLE_RADIUS, DEFAULT_TABLE_TOL),
        };
        built.expect("default Green's function table must build")
    })
}

/// G(x) from the default table.
#[inline]
pub fn green(x: &LatticePoint) -> f64 {
    default_table().get(x)
}
