#ifndef CAPWALK_H
#define CAPWALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum CwStatus {
  CW_STATUS_OK = 0,
  CW_STATUS_NULL_POINTER = 1,
  CW_STATUS_DOMAIN = 2,
  CW_STATUS_RESOURCE = 3,
  CW_STATUS_NUMERIC = 4,
  CW_STATUS_CONFIG = 5,
  CW_STATUS_IO = 6,
  CW_STATUS_INVALID_UTF8 = 7,
  CW_STATUS_OUT_OF_RANGE = 8,
  CW_STATUS_PANIC = 9,
} CwStatus;

/**
 * A path construction schedule.
 */
typedef struct CwBlueprint CwBlueprint;

/**
 * A set of lattice points, possibly with repeats.
 */
typedef struct CwPointSet CwPointSet;

/**
 * A nearest-neighbour lattice path.
 */
typedef struct CwWalk CwWalk;

/**
 * Normalizers at n: iterated logs and the scales h₃, ĥ₃, φ, ψ.
 */
typedef struct CwNormalizers {
  double log1;
  double log2;
  double log3;
  double h3;
  double hhat3;
  double phi;
  double psi;
} CwNormalizers;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cw_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t cw_last_error(char *buf, size_t len);

/**
 * G(x, y, z) of the simple random walk on Z³. Returns NaN for coordinates
 * outside the supported range.
 */
double cw_green(int64_t x, int64_t y, int64_t z);

/**
 * Normalizers at n ≥ 16.
 *
 * # Safety
 * `out_norm` must be NULL or writable.
 */
enum CwStatus cw_normalizers(uint64_t n, struct CwNormalizers *out_norm);

/**
 * Cap(B_r). `out_exact` is set to 0 when the asymptote (2π/3)·r was used.
 *
 * # Safety
 * Out-pointers must be NULL or writable.
 */
enum CwStatus cw_ball_capacity(double r, double *out_value, int32_t *out_exact);

/**
 * A new empty point set.
 */
struct CwPointSet *cw_pointset_new(void);

/**
 * # Safety
 * `set` must be NULL or a handle from this library not yet freed.
 */
void cw_pointset_free(struct CwPointSet *set);

/**
 * Adds a point (repeats are kept as multiplicities).
 *
 * # Safety
 * `set` must be a live handle.
 */
enum CwStatus cw_pointset_add(struct CwPointSet *set, int64_t x, int64_t y, int64_t z);

/**
 * Number of distinct points.
 *
 * # Safety
 * `set` must be NULL or a live handle.
 */
size_t cw_pointset_len(const struct CwPointSet *set);

/**
 * Exact capacity of the distinct points of `set`.
 *
 * # Safety
 * `set` must be a live handle and `out_cap` writable.
 */
enum CwStatus cw_capacity_exact(const struct CwPointSet *set, double *out_cap);

/**
 * Lower and upper Green-sum bounds on the capacity, multiplicities counted.
 *
 * # Safety
 * `set` must be a live handle and the out-pointers writable.
 */
enum CwStatus cw_capacity_bounds(const struct CwPointSet *set, double *out_lo, double *out_hi);

/**
 * Monte Carlo capacity estimate with standard error.
 *
 * # Safety
 * `set` must be a live handle and the out-pointers writable.
 */
enum CwStatus cw_capacity_mc(const struct CwPointSet *set,
                             double fraction,
                             double kill_radius_factor,
                             uint32_t samples_per_point,
                             uint64_t seed,
                             double *out_value,
                             double *out_stderr);

/**
 * An n-step simple random walk from the origin.
 *
 * # Safety
 * `out_walk` must be writable; the handle written there must be freed with [`cw_walk_free`].
 */
enum CwStatus cw_walk_simulate(size_t n, uint64_t seed, struct CwWalk **out_walk);

/**
 * A uniformly random `steps`-step path from the origin to (x, y, z).
 *
 * # Safety
 * `out_walk` must be writable.
 */
enum CwStatus cw_walk_bridge(int64_t x,
                             int64_t y,
                             int64_t z,
                             size_t steps,
                             uint64_t seed,
                             struct CwWalk **out_walk);

/**
 * Loads a path in the text format.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out_walk` writable.
 */
enum CwStatus cw_walk_load(const char *path, struct CwWalk **out_walk);

/**
 * # Safety
 * `walk` must be NULL or a live handle.
 */
void cw_walk_free(struct CwWalk *walk);

/**
 * Number of steps.
 *
 * # Safety
 * `walk` must be NULL or a live handle.
 */
size_t cw_walk_len(const struct CwWalk *walk);

/**
 * Position at time `t`, 0 ≤ t ≤ len, into `out_xyz[0..3]`.
 *
 * # Safety
 * `walk` must be a live handle and `out_xyz` point to three writable integers.
 */
enum CwStatus cw_walk_position(const struct CwWalk *walk, size_t t, int64_t *out_xyz);

/**
 * max_t ‖S_t‖.
 *
 * # Safety
 * `walk` must be NULL or a live handle.
 */
double cw_walk_diameter(const struct CwWalk *walk);

/**
 * The visited sites as a new point set.
 *
 * # Safety
 * `walk` must be a live handle and `out_set` writable.
 */
enum CwStatus cw_walk_range(const struct CwWalk *walk, struct CwPointSet **out_set);

/**
 * Sphere blueprint with slow functions max(2, log⁽⁴⁾n); `budget` > 0 rescales
 * the schedule to that many steps.
 *
 * # Safety
 * `out_bp` must be writable.
 */
enum CwStatus cw_blueprint_sphere(uint64_t n,
                                  double k_n,
                                  uint32_t m,
                                  double epsilon,
                                  double kappa,
                                  uint64_t budget,
                                  struct CwBlueprint **out_bp);

/**
 * Cube-wrapping blueprint; `budget` > 0 rescales the schedule.
 *
 * # Safety
 * `out_bp` must be writable.
 */
enum CwStatus cw_blueprint_cube(uint64_t n,
                                double k_n,
                                double kappa,
                                double delta,
                                uint64_t budget,
                                struct CwBlueprint **out_bp);

/**
 * # Safety
 * `bp` must be NULL or a live handle.
 */
void cw_blueprint_free(struct CwBlueprint *bp);

/**
 * Scheduled total number of steps.
 *
 * # Safety
 * `bp` must be NULL or a live handle.
 */
uint64_t cw_blueprint_steps(const struct CwBlueprint *bp);

/**
 * Realizes a blueprint: deterministic staircases when `ball_frac` is 0,
 * otherwise bridges between targets drawn in balls of that relative radius.
 *
 * # Safety
 * `bp` must be a live handle and `out_walk` writable.
 */
enum CwStatus cw_blueprint_realize(const struct CwBlueprint *bp,
                                   double ball_frac,
                                   uint64_t seed,
                                   struct CwWalk **out_walk);

/**
 * Runs the experiment described by a TOML config and writes its records to
 * `output` (format from the extension: `.csv` or JSONL).
 *
 * # Safety
 * Both paths must be NUL-terminated strings; `out_records` must be NULL or writable.
 */
enum CwStatus cw_run_experiment(const char *config, const char *output, size_t *out_records);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAPWALK_H */
