#ifndef RATIOKIT_H
#define RATIOKIT_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum RkStatus {
  RK_STATUS_OK = 0,
  RK_STATUS_NULL_POINTER = 1,
  RK_STATUS_DOMAIN_VIOLATION = 2,
  RK_STATUS_SHAPE = 3,
  RK_STATUS_VALUE = 4,
  RK_STATUS_CAPACITY = 5,
  RK_STATUS_SINGULAR_INPUT = 6,
  RK_STATUS_EXTRAPOLATION_UNSTABLE = 7,
  RK_STATUS_NUMERICAL_FAILURE = 8,
  RK_STATUS_SINGULAR_SAMPLE = 9,
  RK_STATUS_TRUNCATION_TOO_COARSE = 10,
  RK_STATUS_OTHER = 11,
  RK_STATUS_PANIC = 99,
} RkStatus;

// Opaque unequal-count parameter set.
typedef struct RkExtendedParams RkExtendedParams;

// Opaque equal-count parameter set.
typedef struct RkParams RkParams;

// Evaluation output.
typedef struct RkValue {
  double re;
  double im;
  // `max|term| / |sum|`, at least 1.
  double condition;
  // 1 when coincident parameters were handled by extrapolation.
  uint8_t confluent;
  // 1 when the sum was redone in double-double.
  uint8_t extended_precision;
} RkValue;

// Monte Carlo output.
typedef struct RkEstimate {
  double mean_re;
  double mean_im;
  double stderr;
  uint64_t samples;
  uint64_t seed;
} RkEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rk_version(void);

// Message for the last failed call on this thread, or null. Valid until
// the next call into the library from the same thread.
const char *rk_last_error(void);

// Static name of a status code.
const char *rk_status_name(enum RkStatus status);

// Validates `(p, q, N, xs, ys)`; `xs` and `ys` hold `p + q` complex values each.
//
// # Safety
// `xs` and `ys` must point to `2 * (p + q)` readable doubles; `out` must be
// writable.
enum RkStatus rk_params_new(size_t p,
                            size_t q,
                            size_t n,
                            const double *xs,
                            const double *ys,
                            struct RkParams **out);

// # Safety
// `params` must be null or a handle from [`rk_params_new`] not yet freed.
void rk_params_free(struct RkParams *params);

// # Safety
// `xs` must point to `2 * (p + q)` readable doubles and `ys` to
// `2 * (pprime + qprime)`; `out` must be writable.
enum RkStatus rk_extended_params_new(size_t p,
                                     size_t q,
                                     size_t pprime,
                                     size_t qprime,
                                     size_t n,
                                     const double *xs,
                                     const double *ys,
                                     struct RkExtendedParams **out);

// # Safety
// `params` must be null or a handle from [`rk_extended_params_new`] not yet freed.
void rk_extended_params_free(struct RkExtendedParams *params);

// Equal-count closed form.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum RkStatus rk_eval_thm1(const struct RkParams *params, struct RkValue *out);

// Unequal-count closed form.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum RkStatus rk_eval_cor12(const struct RkExtendedParams *params, struct RkValue *out);

// Limit with every y removed; `xs` holds `p + q` complex values.
//
// # Safety
// `xs` must point to `2 * (p + q)` readable doubles and `out` be writable.
enum RkStatus rk_eval_compact(size_t p, size_t q, size_t n, const double *xs, struct RkValue *out);

// Pure reciprocal average for `N ≥ max(p, q)`; `ys` holds `p + q` complex values.
//
// # Safety
// `ys` must point to `2 * (p + q)` readable doubles and `out` be writable.
enum RkStatus rk_eval_stable(size_t p, size_t q, size_t n, const double *ys, struct RkValue *out);

// Monte Carlo estimate; bitwise reproducible for a fixed seed.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum RkStatus rk_mc_estimate(const struct RkParams *params,
                             uint64_t samples,
                             uint64_t seed,
                             struct RkEstimate *out);

// # Safety
// `params` must be a live handle and `out` writable.
enum RkStatus rk_mc_estimate_extended(const struct RkExtendedParams *params,
                                      uint64_t samples,
                                      uint64_t seed,
                                      struct RkEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RATIOKIT_H */
