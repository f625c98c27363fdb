#ifndef IVOPT_H
#define IVOPT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum IvoStatus {
  /**
   * Success; for checks, the point passed.
   */
  IVO_STATUS_OK = 0,
  /**
   * The check ran and the point was refuted or not certified.
   */
  IVO_STATUS_REFUTED = 1,
  IVO_STATUS_NULL_ARGUMENT = 2,
  IVO_STATUS_INVALID_ARGUMENT = 3,
  IVO_STATUS_PARSE_ERROR = 4,
  IVO_STATUS_INFEASIBLE = 5,
  IVO_STATUS_PRECONDITION_FAILED = 6,
  IVO_STATUS_NOT_CONVEX = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  IVO_STATUS_INTERNAL = 8,
} IvoStatus;

/**
 * Solution concepts, in the order of the CLI's `--kind` values.
 */
typedef enum IvoKind {
  IVO_KIND_LU = 0,
  IVO_KIND_WEAK_LU = 1,
  IVO_KIND_ELU = 2,
  IVO_KIND_WEAK_ELU = 3,
  IVO_KIND_E_QUASI_LU = 4,
  IVO_KIND_WEAK_E_QUASI_LU = 5,
} IvoKind;

/**
 * Opaque problem handle.
 */
typedef struct IvoProblem IvoProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses problem-file text into a new handle stored at `*out`.
 * Relative `file(...)` sample paths resolve against the working directory.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IvoStatus ivo_problem_from_str(const char *text, struct IvoProblem **out);

/**
 * Releases a handle; `NULL` is ignored.
 *
 * # Safety
 * `p` must come from [`ivo_problem_from_str`] and not be used afterwards.
 */
void ivo_problem_free(struct IvoProblem *p);

/**
 * Dimension `n`, or 0 for `NULL`.
 *
 * # Safety
 * `p` must be `NULL` or a live handle.
 */
size_t ivo_problem_dim(const struct IvoProblem *p);

/**
 * Writes `[fL(x), fU(x)]` to `lo` and `hi`.
 *
 * # Safety
 * `x` must hold `n` values; `lo` and `hi` must be valid.
 */
enum IvoStatus ivo_interval_value(const struct IvoProblem *p,
                                  const double *x,
                                  size_t n,
                                  double *lo,
                                  double *hi);

/**
 * Certifies `x*` against `kind` (an [`IvoKind`] value) on the sample set. Returns `Ok` on a pass
 * and `Refuted` otherwise, with the refuter's position in `*refuter`
 * (`-1` on a pass). `refuter` may be `NULL`.
 *
 * # Safety
 * Arrays must hold the stated number of values.
 */
enum IvoStatus ivo_certify(const struct IvoProblem *p,
                           int32_t kind,
                           const double *x_star,
                           size_t n,
                           double eps_lo,
                           double eps_hi,
                           const double *points,
                           size_t count,
                           int64_t *refuter);

/**
 * Descends from `x0` to an E-LU solution of the sample set; the result is
 * written to `out_x` (length `n`) and the move count to `*moves`.
 *
 * # Safety
 * Arrays must hold the stated number of values; `moves` may be `NULL`.
 */
enum IvoStatus ivo_descend(const struct IvoProblem *p,
                           const double *x0,
                           size_t n,
                           double eps_lo,
                           double eps_hi,
                           const double *points,
                           size_t count,
                           double *out_x,
                           size_t *moves);

/**
 * Ekeland-type construction of an E-quasi-LU solution; same layout as
 * [`ivo_descend`].
 *
 * # Safety
 * Arrays must hold the stated number of values; `moves` may be `NULL`.
 */
enum IvoStatus ivo_ekeland(const struct IvoProblem *p,
                           const double *x0,
                           size_t n,
                           double eps_lo,
                           double eps_hi,
                           const double *points,
                           size_t count,
                           double *out_x,
                           size_t *moves);

/**
 * Minimized quasi-KKT margin at `x`; `Ok` when it is within tolerance,
 * `Refuted` otherwise.
 *
 * # Safety
 * `x` must hold `n` values and `margin` must be valid.
 */
enum IvoStatus ivo_quasi_kkt_residual(const struct IvoProblem *p,
                                      const double *x,
                                      size_t n,
                                      double eps_lo,
                                      double eps_hi,
                                      double *margin);

/**
 * Message of the last failure on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ivo_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IVOPT_H */
