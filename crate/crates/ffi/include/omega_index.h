#ifndef OMEGA_INDEX_H
#define OMEGA_INDEX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OmegaStatus {
  OMEGA_STATUS_OK = 0,
  OMEGA_STATUS_NULL_POINTER = 1,
  OMEGA_STATUS_INVALID_PARAMETER = 2,
  OMEGA_STATUS_DIMENSION_MISMATCH = 3,
  OMEGA_STATUS_NON_HERMITIAN_INPUT = 4,
  OMEGA_STATUS_NOT_POSITIVE_DEFINITE = 5,
  OMEGA_STATUS_CONVERGENCE_FAILURE = 6,
  OMEGA_STATUS_NON_FINITE = 7,
  OMEGA_STATUS_CONFIG_PARSE = 8,
  OMEGA_STATUS_CUT_TOO_LARGE = 9,
  OMEGA_STATUS_CALIBRATION_MISSING = 10,
  OMEGA_STATUS_INADMISSIBLE_COMMUTATOR = 11,
  OMEGA_STATUS_UNSTABLE_COUNT = 12,
  OMEGA_STATUS_GAP_VIOLATION = 13,
  OMEGA_STATUS_IO = 14,
  OMEGA_STATUS_BUFFER_TOO_SMALL = 15,
  OMEGA_STATUS_PANIC = 16,
} OmegaStatus;

typedef enum OmegaOrientation {
  OMEGA_ORIENTATION_LITERAL = 0,
  OMEGA_ORIENTATION_CONJUGATE = 1,
  /**
   * The calibrated default.
   */
  OMEGA_ORIENTATION_DEFAULT = 2,
} OmegaOrientation;

/**
 * Opaque handle to a validated operator pair.
 */
typedef struct OmegaPair OmegaPair;

/**
 * Result of [`omega_compute`].
 */
typedef struct OmegaSummary {
  int64_t omega;
  double epsilon;
  double defect;
  double theorem_bound;
  /**
   * Resolved; never `OMEGA_ORIENTATION_DEFAULT`.
   */
  enum OmegaOrientation orientation;
} OmegaSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *omega_last_error_message(void);

/**
 * Static, NUL-terminated library version.
 */
const char *omega_version(void);

/**
 * Oscillator position and momentum scaled by `sqrt(lambda)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum OmegaStatus omega_pair_harmonic(double lambda, size_t dim, struct OmegaPair **out);

/**
 * Commuting diagonal pair on the lattice disc of the given radius.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum OmegaStatus omega_pair_commuting_grid(size_t radius, double scale, struct OmegaPair **out);

/**
 * Pair from row-major `dim × dim` arrays. Imaginary parts may be null.
 *
 * # Safety
 * `a_re`, `b_re` and any non-null `a_im`, `b_im` must point to `dim * dim`
 * doubles; `out` must be valid for writes.
 */
enum OmegaStatus omega_pair_from_row_major(const double *a_re,
                                           const double *a_im,
                                           const double *b_re,
                                           const double *b_im,
                                           size_t dim,
                                           size_t boundary_window,
                                           struct OmegaPair **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `pair` must come from this library and not be used afterwards.
 */
void omega_pair_free(struct OmegaPair *pair);

/**
 * Dimension of the pair, 0 for null.
 *
 * # Safety
 * `pair` must be null or a live handle.
 */
size_t omega_pair_dim(const struct OmegaPair *pair);

/**
 * Rescales the pair so that its commutator is at most `target`; writes a
 * new handle and the scale factor applied to both operators.
 *
 * # Safety
 * `pair` must be a live handle; `out` and `scale` must be valid for writes.
 */
enum OmegaStatus omega_pair_scale_admissible(const struct OmegaPair *pair,
                                             double target,
                                             struct OmegaPair **out,
                                             double *scale);

/**
 * The index over `n_cuts` cut sizes, which must all agree.
 *
 * # Safety
 * `pair` must be a live handle, `cuts` must point to `n_cuts` values and
 * `out` must be valid for writes.
 */
enum OmegaStatus omega_compute(const struct OmegaPair *pair,
                               const size_t *cuts,
                               size_t n_cuts,
                               enum OmegaOrientation orientation,
                               double gap_floor,
                               struct OmegaSummary *out);

/**
 * Ascending eigenvalues of the corner of size `2 * cut`.
 *
 * Writes the count to `len`. If `capacity` is too small nothing else is
 * written and `OMEGA_STATUS_BUFFER_TOO_SMALL` is returned, so a call with
 * capacity 0 queries the size.
 *
 * # Safety
 * `pair` must be a live handle, `values` must hold `capacity` doubles (may
 * be null when `capacity` is 0) and `len` must be valid for writes.
 */
enum OmegaStatus omega_corner_spectrum(const struct OmegaPair *pair,
                                       size_t cut,
                                       enum OmegaOrientation orientation,
                                       double *values,
                                       size_t capacity,
                                       size_t *len);

/**
 * `(4ε − 2ε²)/(1 − ε)²` for `ε` in `[0, 1)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum OmegaStatus omega_theorem_bound(double epsilon, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OMEGA_INDEX_H */
