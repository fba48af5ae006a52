#ifndef BERGMAN_H
#define BERGMAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Values 1 to 4 match the command-line exit codes.
 */
typedef enum BergmanStatus {
  BERGMAN_STATUS_OK = 0,
  BERGMAN_STATUS_IO = 1,
  BERGMAN_STATUS_VALIDATION = 2,
  BERGMAN_STATUS_CONVERGENCE = 3,
  BERGMAN_STATUS_THEOREM_VIOLATION = 4,
  BERGMAN_STATUS_NULL_POINTER = 5,
  BERGMAN_STATUS_PANIC = 6,
} BergmanStatus;

/**
 * Egg domain handle.
 */
typedef struct BergmanEgg BergmanEgg;

/**
 * Real ellipsoid `E(A)` handle.
 */
typedef struct BergmanEllipsoid BergmanEllipsoid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *bergman_last_error(void);

/**
 * Library version as a static string.
 */
const char *bergman_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void bergman_string_free(char *s);

/**
 * Creates the egg `{|z|^2 + |w|^{2s} < 1}`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum BergmanStatus bergman_egg_new(double s, struct BergmanEgg **out);

/**
 * Releases an egg handle. Null is ignored.
 *
 * # Safety
 * `egg` must come from [`bergman_egg_new`] and not have been freed.
 */
void bergman_egg_free(struct BergmanEgg *egg);

/**
 * Closed-form kernel on the diagonal at reduced coordinates
 * `x = |z|^2`, `y = |w|^2`.
 *
 * # Safety
 * `egg` must be a live handle and `out` valid for writes.
 */
enum BergmanStatus bergman_egg_kernel(const struct BergmanEgg *egg,
                                      double x,
                                      double y,
                                      double *out);

/**
 * Monomial-series kernel with its tail bound.
 *
 * # Safety
 * `egg` must be a live handle; `value` and `tail_bound` valid for writes.
 */
enum BergmanStatus bergman_egg_kernel_series(const struct BergmanEgg *egg,
                                             double x,
                                             double y,
                                             double rel_tol,
                                             double *value,
                                             double *tail_bound);

/**
 * Kernel of the unit ball of C^2 on the diagonal.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum BergmanStatus bergman_ball_kernel(double z_re,
                                       double z_im,
                                       double w_re,
                                       double w_im,
                                       double *out);

/**
 * Blow-up exponent `m` and type estimate `r = -2/(m+2)` along the ray
 * `xi + t dir`, `t` geometric in `[t_min, t_max]`.
 *
 * # Safety
 * `egg` must be a live handle, `xi` and `dir` point to 4 doubles, and
 * `slope`, `r_estimate` be valid for writes.
 */
enum BergmanStatus bergman_egg_blowup_exponent(const struct BergmanEgg *egg,
                                               const double *xi,
                                               const double *dir,
                                               double t_min,
                                               double t_max,
                                               size_t n_points,
                                               double *slope,
                                               double *r_estimate);

/**
 * Algebraic degree and total degree of the egg kernel (integer `s`).
 *
 * # Safety
 * `d` and `total_degree` must be valid for writes.
 */
enum BergmanStatus bergman_egg_degree(uint32_t s,
                                      uint64_t seed,
                                      uint32_t *d,
                                      uint32_t *total_degree);

/**
 * Creates `E(A)` from `n` nondecreasing parameters in `[0, 1/2)`.
 *
 * # Safety
 * `a` must point to `n` doubles and `out` be valid for writes.
 */
enum BergmanStatus bergman_ellipsoid_new(const double *a, size_t n, struct BergmanEllipsoid **out);

/**
 * Releases an ellipsoid handle. Null is ignored.
 *
 * # Safety
 * `e` must come from [`bergman_ellipsoid_new`] and not have been freed.
 */
void bergman_ellipsoid_free(struct BergmanEllipsoid *e);

/**
 * Hausdorff distance from `E(A)` to the unit ball.
 *
 * # Safety
 * `e` must be a live handle and `out` valid for writes.
 */
enum BergmanStatus bergman_ellipsoid_hausdorff(const struct BergmanEllipsoid *e,
                                               size_t directions,
                                               double *out);

/**
 * Longest chord of `E(A)` along real axis `axis` (interleaved
 * `Re z_1, Im z_1, ...`).
 *
 * # Safety
 * `e` must be a live handle and `out` valid for writes.
 */
enum BergmanStatus bergman_ellipsoid_chord(const struct BergmanEllipsoid *e,
                                           size_t axis,
                                           double *out);

/**
 * Normal form of a quadric given as JSON `{H, B, r1, r0}`; writes the
 * report JSON to `out` (free with [`bergman_string_free`]).
 *
 * # Safety
 * `quadric_json` must be a nul-terminated string and `out` valid for writes.
 */
enum BergmanStatus bergman_normalize_quadric(const char *quadric_json, char **out);

/**
 * Runs the egg verification suite; the report JSON is written even when a
 * check fails, in which case the status is `Convergence` or
 * `TheoremViolation`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum BergmanStatus bergman_verify_egg(uint32_t s, uint64_t seed, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BERGMAN_H */
