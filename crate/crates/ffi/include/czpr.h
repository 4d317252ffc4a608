#ifndef CZPR_H
#define CZPR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CzprStatus {
  CZPR_STATUS_OK = 0,
  CZPR_STATUS_NULL_POINTER = 1,
  CZPR_STATUS_DOMAIN = 2,
  CZPR_STATUS_SHAPE = 3,
  CZPR_STATUS_UNSUPPORTED = 4,
  CZPR_STATUS_INVALID_INPUT = 5,
  CZPR_STATUS_EMPTY_SET = 6,
  CZPR_STATUS_CONFIG = 7,
  CZPR_STATUS_NOT_INITIALIZED = 8,
  CZPR_STATUS_PANIC = 9,
} CzprStatus;

// Opaque estimator bound to one registered benchmark system.
typedef struct CzprEstimator CzprEstimator;

// Opaque constrained zonotope.
typedef struct CzprSet CzprSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Valid until the next
// failing call on the same thread.
const char *czpr_last_error(void);

// Creates `{G ξ + c : |ξ|∞ ≤ 1, A ξ = b}` with `G` (`n × n_g`) and `A`
// (`n_c × n_g`) row-major.
//
// # Safety
// Array arguments must hold the stated number of elements.
enum CzprStatus czpr_set_new(size_t n,
                             size_t n_g,
                             size_t n_c,
                             const double *g,
                             const double *c,
                             const double *a,
                             const double *b,
                             struct CzprSet **out);

// Creates the box `[lo, hi]`.
//
// # Safety
// `lo` and `hi` must hold `n` elements.
enum CzprStatus czpr_set_from_box(size_t n,
                                  const double *lo,
                                  const double *hi,
                                  struct CzprSet **out);

// # Safety
// `set` must come from this library and not be used afterwards.
void czpr_set_free(struct CzprSet *set);

// Writes dimension, generator count and constraint count. Any output
// pointer may be null.
//
// # Safety
// `set` must be a live handle.
enum CzprStatus czpr_set_size(const struct CzprSet *set, size_t *n, size_t *n_g, size_t *n_c);

// Interval hull into `lo`/`hi` (each of the set's dimension).
//
// # Safety
// `lo` and `hi` must have room for `n` values.
enum CzprStatus czpr_set_hull(const struct CzprSet *set, double *lo, double *hi);

// Point membership; `*inside` is 1 or 0.
//
// # Safety
// `x` must hold `n` values.
enum CzprStatus czpr_set_contains(const struct CzprSet *set, const double *x, int32_t *inside);

// Enclosing set with at most `max_gens` generators and `max_cons`
// constraints, as a new handle.
//
// # Safety
// `set` must be a live handle.
enum CzprStatus czpr_set_reduce(const struct CzprSet *set,
                                size_t max_gens,
                                size_t max_cons,
                                struct CzprSet **out);

// Estimator for a registered system (`example1`, `example2`, `example3`).
// Zero limits select the system defaults.
//
// # Safety
// `system` must be a NUL-terminated string.
enum CzprStatus czpr_estimator_new(const char *system,
                                   size_t gen_limit,
                                   size_t con_limit,
                                   struct CzprEstimator **out);

// # Safety
// `est` must come from this library and not be used afterwards.
void czpr_estimator_free(struct CzprEstimator *est);

// State, disturbance, noise and output dimensions. Null outputs are skipped.
//
// # Safety
// `est` must be a live handle.
enum CzprStatus czpr_estimator_dims(const struct CzprEstimator *est,
                                    size_t *n_x,
                                    size_t *n_w,
                                    size_t *n_v,
                                    size_t *n_y);

// Starts from the system's initial set and the measurement `y0`.
//
// # Safety
// `y0` must hold `n_y` values.
enum CzprStatus czpr_estimator_initialize(struct CzprEstimator *est, const double *y0);

// Advances one step with the measurement `y`.
//
// # Safety
// `y` must hold `n_y` values.
enum CzprStatus czpr_estimator_step(struct CzprEstimator *est, const double *y);

// Current step index and interval hull of the current enclosure.
//
// # Safety
// `lo` and `hi` must have room for `n_x` values; `k` may be null.
enum CzprStatus czpr_estimator_hull(const struct CzprEstimator *est,
                                    size_t *k,
                                    double *lo,
                                    double *hi);

// Copy of the current enclosure as a set handle.
//
// # Safety
// `est` must be a live handle.
enum CzprStatus czpr_estimator_set(const struct CzprEstimator *est, struct CzprSet **out);

// Runs a benchmark described by `key=value` config text and returns the
// CSV in `*csv` (release with [`czpr_string_free`]). `*contained` is 1
// when the true state stayed inside every enclosure.
//
// # Safety
// `config` must be a NUL-terminated string.
enum CzprStatus czpr_run(const char *config, char **csv, int32_t *contained);

// # Safety
// `s` must come from [`czpr_run`] and not be used afterwards.
void czpr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CZPR_H */
