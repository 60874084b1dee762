//! C interface to capwalk.
//!
//! Every fallible function returns a [`CwStatus`] and writes results through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`cw_last_error`]. Objects are opaque handles owned by the caller and
//! released with the matching `_free` function; passing NULL to a `_free`
//! function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use capwalk::asymptotics::normalizers;
use capwalk::capacity::{ball_capacity, capacity_bounds, capacity_exact, PointSet};
use capwalk::constructions::{
    cube_blueprint, realize_bridges, realize_deterministic, slow_default, sphere_blueprint, PathBlueprint,
};
use capwalk::estimator::capacity_mc_subsampled_set;
use capwalk::expcli::{load_config, run_suite, write_records};
use capwalk::green::green;
use capwalk::walk::{simulate_bridge, simulate_srw, WalkPath};
use capwalk::{CapError, LatticePoint};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Resource = 3,
    Numeric = 4,
    Config = 5,
    Io = 6,
    InvalidUtf8 = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// A set of lattice points, possibly with repeats.
pub struct CwPointSet(PointSet);

/// A nearest-neighbour lattice path.
pub struct CwWalk(WalkPath);

/// A path construction schedule.
pub struct CwBlueprint(PathBlueprint);

/// Normalizers at n: iterated logs and the scales h₃, ĥ₃, φ, ψ.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CwNormalizers {
    pub log1: f64,
    pub log2: f64,
    pub log3: f64,
    pub h3: f64,
    pub hhat3: f64,
    pub phi: f64,
    pub psi: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &CapError) -> CwStatus {
    match e {
        CapError::Domain(_) => CwStatus::Domain,
        CapError::Resource(_) => CwStatus::Resource,
        CapError::Numeric { .. } => CwStatus::Numeric,
        CapError::Config(_) => CwStatus::Config,
        CapError::Io(_) => CwStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CwStatus, String)>) -> CwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            CwStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            CwStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (CwStatus, String)>;
}

impl<T> IntoFfi<T> for capwalk::Result<T> {
    fn ffi(self) -> Result<T, (CwStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (CwStatus, String) {
    (CwStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CwStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (CwStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, (CwStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| (CwStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn point(x: i64, y: i64, z: i64) -> Result<LatticePoint, (CwStatus, String)> {
    LatticePoint::try_new(x, y, z).ffi()
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cw_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// G(x, y, z) of the simple random walk on Z³. Returns NaN for coordinates
/// outside the supported range.
#[no_mangle]
pub extern "C" fn cw_green(x: i64, y: i64, z: i64) -> f64 {
    match LatticePoint::try_new(x, y, z) {
        Ok(p) => green(&p),
        Err(_) => f64::NAN,
    }
}

/// Normalizers at n ≥ 16.
///
/// # Safety
/// `out_norm` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cw_normalizers(n: u64, out_norm: *mut CwNormalizers) -> CwStatus {
    guard(|| {
        let o = out(out_norm, "out_norm")?;
        let nz = normalizers(n).ffi()?;
        *o = CwNormalizers {
            log1: nz.logs[0],
            log2: nz.logs[1],
            log3: nz.logs[2],
            h3: nz.h3,
            hhat3: nz.hhat3,
            phi: nz.phi,
            psi: nz.psi,
        };
        Ok(())
    })
}

/// Cap(B_r). `out_exact` is set to 0 when the asymptote (2π/3)·r was used.
///
/// # Safety
/// Out-pointers must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cw_ball_capacity(r: f64, out_value: *mut f64, out_exact: *mut i32) -> CwStatus {
    guard(|| {
        let v = out(out_value, "out_value")?;
        let e = out(out_exact, "out_exact")?;
        let b = ball_capacity(r).ffi()?;
        *v = b.value;
        *e = b.exact as i32;
        Ok(())
    })
}

/// A new empty point set.
#[no_mangle]
pub extern "C" fn cw_pointset_new() -> *mut CwPointSet {
    boxed(CwPointSet(PointSet::new()))
}

/// # Safety
/// `set` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cw_pointset_free(set: *mut CwPointSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Adds a point (repeats are kept as multiplicities).
///
/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_pointset_add(set: *mut CwPointSet, x: i64, y: i64, z: i64) -> CwStatus {
    guard(|| {
        let s = out(set, "set")?;
        s.0.insert(point(x, y, z)?);
        Ok(())
    })
}

/// Number of distinct points.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_pointset_len(set: *const CwPointSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Exact capacity of the distinct points of `set`.
///
/// # Safety
/// `set` must be a live handle and `out_cap` writable.
#[no_mangle]
pub unsafe extern "C" fn cw_capacity_exact(set: *const CwPointSet, out_cap: *mut f64) -> CwStatus {
    guard(|| {
        let s = deref(set, "set")?;
        let o = out(out_cap, "out_cap")?;
        *o = capacity_exact(&s.0.distinct()).ffi()?;
        Ok(())
    })
}

/// Lower and upper Green-sum bounds on the capacity, multiplicities counted.
///
/// # Safety
/// `set` must be a live handle and the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn cw_capacity_bounds(set: *const CwPointSet, out_lo: *mut f64, out_hi: *mut f64) -> CwStatus {
    guard(|| {
        let s = deref(set, "set")?;
        let lo = out(out_lo, "out_lo")?;
        let hi = out(out_hi, "out_hi")?;
        (*lo, *hi) = capacity_bounds(&s.0).ffi()?;
        Ok(())
    })
}

/// Monte Carlo capacity estimate with standard error.
///
/// # Safety
/// `set` must be a live handle and the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn cw_capacity_mc(
    set: *const CwPointSet,
    fraction: f64,
    kill_radius_factor: f64,
    samples_per_point: u32,
    seed: u64,
    out_value: *mut f64,
    out_stderr: *mut f64,
) -> CwStatus {
    guard(|| {
        let s = deref(set, "set")?;
        let v = out(out_value, "out_value")?;
        let se = out(out_stderr, "out_stderr")?;
        let e = capacity_mc_subsampled_set(&s.0, fraction, kill_radius_factor, samples_per_point, seed).ffi()?;
        *v = e.value;
        *se = e.stderr;
        Ok(())
    })
}

/// An n-step simple random walk from the origin.
///
/// # Safety
/// `out_walk` must be writable; the handle written there must be freed with [`cw_walk_free`].
#[no_mangle]
pub unsafe extern "C" fn cw_walk_simulate(n: usize, seed: u64, out_walk: *mut *mut CwWalk) -> CwStatus {
    guard(|| {
        let o = out(out_walk, "out_walk")?;
        *o = boxed(CwWalk(simulate_srw(n, seed)));
        Ok(())
    })
}

/// A uniformly random `steps`-step path from the origin to (x, y, z).
///
/// # Safety
/// `out_walk` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_walk_bridge(
    x: i64,
    y: i64,
    z: i64,
    steps: usize,
    seed: u64,
    out_walk: *mut *mut CwWalk,
) -> CwStatus {
    guard(|| {
        let o = out(out_walk, "out_walk")?;
        let p = simulate_bridge(LatticePoint::ORIGIN, point(x, y, z)?, steps, seed).ffi()?;
        *o = boxed(CwWalk(p));
        Ok(())
    })
}

/// Loads a path in the text format.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_walk` writable.
#[no_mangle]
pub unsafe extern "C" fn cw_walk_load(path: *const c_char, out_walk: *mut *mut CwWalk) -> CwStatus {
    guard(|| {
        let p = path_arg(path, "path")?;
        let o = out(out_walk, "out_walk")?;
        *o = boxed(CwWalk(WalkPath::load(&p).ffi()?));
        Ok(())
    })
}

/// # Safety
/// `walk` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_walk_free(walk: *mut CwWalk) {
    if !walk.is_null() {
        drop(Box::from_raw(walk));
    }
}

/// Number of steps.
///
/// # Safety
/// `walk` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_walk_len(walk: *const CwWalk) -> usize {
    walk.as_ref().map_or(0, |w| w.0.len())
}

/// Position at time `t`, 0 ≤ t ≤ len, into `out_xyz[0..3]`.
///
/// # Safety
/// `walk` must be a live handle and `out_xyz` point to three writable integers.
#[no_mangle]
pub unsafe extern "C" fn cw_walk_position(walk: *const CwWalk, t: usize, out_xyz: *mut i64) -> CwStatus {
    guard(|| {
        let w = deref(walk, "walk")?;
        if out_xyz.is_null() {
            return Err(null("out_xyz"));
        }
        let p = w
            .0
            .positions()
            .get(t)
            .ok_or_else(|| (CwStatus::OutOfRange, format!("time {t} beyond path length {}", w.0.len())))?;
        let c = p.coords();
        for (k, v) in c.iter().enumerate() {
            *out_xyz.add(k) = *v as i64;
        }
        Ok(())
    })
}

/// max_t ‖S_t‖.
///
/// # Safety
/// `walk` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_walk_diameter(walk: *const CwWalk) -> f64 {
    walk.as_ref().map_or(f64::NAN, |w| w.0.diameter())
}

/// The visited sites as a new point set.
///
/// # Safety
/// `walk` must be a live handle and `out_set` writable.
#[no_mangle]
pub unsafe extern "C" fn cw_walk_range(walk: *const CwWalk, out_set: *mut *mut CwPointSet) -> CwStatus {
    guard(|| {
        let w = deref(walk, "walk")?;
        let o = out(out_set, "out_set")?;
        *o = boxed(CwPointSet(w.0.range().clone()));
        Ok(())
    })
}

/// Sphere blueprint with slow functions max(2, log⁽⁴⁾n); `budget` > 0 rescales
/// the schedule to that many steps.
///
/// # Safety
/// `out_bp` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_blueprint_sphere(
    n: u64,
    k_n: f64,
    m: u32,
    epsilon: f64,
    kappa: f64,
    budget: u64,
    out_bp: *mut *mut CwBlueprint,
) -> CwStatus {
    guard(|| {
        let o = out(out_bp, "out_bp")?;
        let slow = slow_default(n);
        let mut b = sphere_blueprint(n, k_n, m, slow, slow, epsilon, kappa).ffi()?;
        if budget > 0 {
            b = b.with_budget(budget).ffi()?;
        }
        *o = boxed(CwBlueprint(b));
        Ok(())
    })
}

/// Cube-wrapping blueprint; `budget` > 0 rescales the schedule.
///
/// # Safety
/// `out_bp` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_blueprint_cube(
    n: u64,
    k_n: f64,
    kappa: f64,
    delta: f64,
    budget: u64,
    out_bp: *mut *mut CwBlueprint,
) -> CwStatus {
    guard(|| {
        let o = out(out_bp, "out_bp")?;
        let mut b = cube_blueprint(n, k_n, kappa, delta).ffi()?;
        if budget > 0 {
            b = b.with_budget(budget).ffi()?;
        }
        *o = boxed(CwBlueprint(b));
        Ok(())
    })
}

/// # Safety
/// `bp` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_blueprint_free(bp: *mut CwBlueprint) {
    if !bp.is_null() {
        drop(Box::from_raw(bp));
    }
}

/// Scheduled total number of steps.
///
/// # Safety
/// `bp` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_blueprint_steps(bp: *const CwBlueprint) -> u64 {
    bp.as_ref().map_or(0, |b| b.0.t_final())
}

/// Realizes a blueprint: deterministic staircases when `ball_frac` is 0,
/// otherwise bridges between targets drawn in balls of that relative radius.
///
/// # Safety
/// `bp` must be a live handle and `out_walk` writable.
#[no_mangle]
pub unsafe extern "C" fn cw_blueprint_realize(
    bp: *const CwBlueprint,
    ball_frac: f64,
    seed: u64,
    out_walk: *mut *mut CwWalk,
) -> CwStatus {
    guard(|| {
        let b = deref(bp, "bp")?;
        let o = out(out_walk, "out_walk")?;
        let p = if ball_frac == 0.0 {
            realize_deterministic(&b.0).ffi()?
        } else {
            realize_bridges(&b.0, ball_frac, seed).ffi()?.path
        };
        *o = boxed(CwWalk(p));
        Ok(())
    })
}

/// Runs the experiment described by a TOML config and writes its records to
/// `output` (format from the extension: `.csv` or JSONL).
///
/// # Safety
/// Both paths must be NUL-terminated strings; `out_records` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cw_run_experiment(
    config: *const c_char,
    output: *const c_char,
    out_records: *mut usize,
) -> CwStatus {
    guard(|| {
        let c = path_arg(config, "config")?;
        let o = path_arg(output, "output")?;
        let mut cfg = load_config(&c).ffi()?;
        cfg.output = Some(o.clone());
        let recs = run_suite(&cfg).ffi()?;
        write_records(&recs, &o, cfg.output_format()).ffi()?;
        if let Some(n) = out_records.as_mut() {
            *n = recs.len();
        }
        Ok(())
    })
}
