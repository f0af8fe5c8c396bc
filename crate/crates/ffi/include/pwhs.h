#ifndef PWHS_H
#define PWHS_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PwhsStatus {
  PWHS_STATUS_OK = 0,
  PWHS_STATUS_NULL_POINTER = 1,
  // Bad input or parameters outside the admissible range.
  PWHS_STATUS_INVALID_ARGUMENT = 2,
  // The numerics failed (no return, singularity hit, no root, ...).
  PWHS_STATUS_NUMERICAL_FAILURE = 3,
  PWHS_STATUS_INDEX_OUT_OF_RANGE = 4,
  PWHS_STATUS_PANIC = 5,
} PwhsStatus;

typedef enum PwhsOrientation {
  // `Re z = offset`
  PWHS_ORIENTATION_VERTICAL = 0,
  // `Im z = offset`
  PWHS_ORIENTATION_HORIZONTAL = 1,
} PwhsOrientation;

typedef enum PwhsRegionClass {
  PWHS_REGION_CLASS_SEWING = 0,
  PWHS_REGION_CLASS_SLIDING_ATTRACT = 1,
  PWHS_REGION_CLASS_SLIDING_REPEL = 2,
  PWHS_REGION_CLASS_TANGENCY = 3,
} PwhsRegionClass;

typedef enum PwhsMode {
  PWHS_MODE_FREE_PLUS = 0,
  PWHS_MODE_FREE_MINUS = 1,
  PWHS_MODE_SLIDING = 2,
} PwhsMode;

typedef enum PwhsTermination {
  PWHS_TERMINATION_TIME_LIMIT = 0,
  PWHS_TERMINATION_ESCAPE = 1,
  PWHS_TERMINATION_SINGULARITY = 2,
  PWHS_TERMINATION_TANGENCY_HIT = 3,
  PWHS_TERMINATION_REPELLING_SLIDING = 4,
} PwhsTermination;

typedef enum PwhsSide {
  PWHS_SIDE_PLUS = 0,
  PWHS_SIDE_MINUS = 1,
} PwhsSide;

typedef enum PwhsStability {
  PWHS_STABILITY_STABLE = 0,
  PWHS_STABILITY_UNSTABLE = 1,
  PWHS_STABILITY_NONE = 2,
} PwhsStability;

typedef struct PwhsField PwhsField;

typedef struct PwhsRegions PwhsRegions;

typedef struct PwhsSystem PwhsSystem;

typedef struct PwhsTrajectory PwhsTrajectory;

typedef struct PwhsOptions {
  double rel_tol;
  double abs_tol;
  double max_step;
  double event_tol;
  double singularity_standoff;
  double t_max;
} PwhsOptions;

typedef struct PwhsComplex {
  double re;
  double im;
} PwhsComplex;

// Return map of a linear/linear system across `Im z = 0`.
typedef struct PwhsPoincare {
  bool has_fixed_point;
  double fixed_point;
  double derivative;
  enum PwhsStability stability;
} PwhsPoincare;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string.
// The pointer stays valid until the next call into the library on the same thread.
const char *pwhs_last_error(void);

struct PwhsOptions pwhs_options_default(void);

// # Safety
// `out` must be a valid pointer.
enum PwhsStatus pwhs_field_constant(struct PwhsComplex value, struct PwhsField **out);

// `(a + ib)(z - center)`
//
// # Safety
// `out` must be a valid pointer.
enum PwhsStatus pwhs_field_linear(double a,
                                  double b,
                                  struct PwhsComplex center,
                                  struct PwhsField **out);

// `i^m (z - center)^n`
//
// # Safety
// `out` must be a valid pointer.
enum PwhsStatus pwhs_field_power(uint32_t n,
                                 struct PwhsComplex center,
                                 uint32_t m,
                                 struct PwhsField **out);

// `i^m / (z - center)^n`
//
// # Safety
// `out` must be a valid pointer.
enum PwhsStatus pwhs_field_pole(uint32_t n,
                                struct PwhsComplex center,
                                uint32_t m,
                                struct PwhsField **out);

// `gamma (z - center)^n / (1 + (z - center)^(n-1))`
//
// # Safety
// `out` must be a valid pointer.
enum PwhsStatus pwhs_field_rational(double gamma,
                                    uint32_t n,
                                    struct PwhsComplex center,
                                    struct PwhsField **out);

// `sum analytic[k] (z-c)^k + sum principal[k-1] (z-c)^-k`. Either array may
// be null when its length is zero.
//
// # Safety
// Non-null arrays must hold at least the given number of elements.
enum PwhsStatus pwhs_field_laurent(struct PwhsComplex center,
                                   const struct PwhsComplex *principal,
                                   size_t n_principal,
                                   const struct PwhsComplex *analytic,
                                   size_t n_analytic,
                                   struct PwhsField **out);

// `z^m exp(z^-n)`
//
// # Safety
// `out` must be a valid pointer.
enum PwhsStatus pwhs_field_essential_exp(uint32_t m, uint32_t n, struct PwhsField **out);

// # Safety
// `field` must come from a `pwhs_field_*` constructor and `out` must be valid.
enum PwhsStatus pwhs_field_eval(const struct PwhsField *field,
                                struct PwhsComplex z,
                                struct PwhsComplex *out);

// # Safety
// `field` must come from a `pwhs_field_*` constructor and `out` must be valid.
enum PwhsStatus pwhs_field_derivative(const struct PwhsField *field,
                                      struct PwhsComplex z,
                                      struct PwhsComplex *out);

// # Safety
// `field` must be null or a handle not yet freed.
void pwhs_field_free(struct PwhsField *field);

// Glue `plus` (the side the line normal points into) and `minus` along a
// line. The fields are copied; the caller keeps ownership of both handles.
//
// # Safety
// Handles must be live and `out` must be valid.
enum PwhsStatus pwhs_system_new(const struct PwhsField *plus,
                                const struct PwhsField *minus,
                                enum PwhsOrientation orientation,
                                double offset,
                                struct PwhsSystem **out);

// # Safety
// `sys` must be null or a handle not yet freed.
void pwhs_system_free(struct PwhsSystem *sys);

// Class of the line point with parameter `s`.
//
// # Safety
// `sys` must be live and `out` must be valid.
enum PwhsStatus pwhs_classify_point(const struct PwhsSystem *sys,
                                    double s,
                                    enum PwhsRegionClass *out);

// Partition `[lo, hi]` of the line into sewing, sliding and tangency parts.
//
// # Safety
// `sys` must be live and `out` must be valid.
enum PwhsStatus pwhs_classify_regions(const struct PwhsSystem *sys,
                                      double lo,
                                      double hi,
                                      size_t resolution,
                                      struct PwhsRegions **out);

// # Safety
// `regions` must be live.
size_t pwhs_regions_len(const struct PwhsRegions *regions);

// # Safety
// `regions` must be live and the output pointers valid.
enum PwhsStatus pwhs_regions_segment(const struct PwhsRegions *regions,
                                     size_t index,
                                     double *lo,
                                     double *hi,
                                     enum PwhsRegionClass *class_);

// # Safety
// `regions` must be null or a handle not yet freed.
void pwhs_regions_free(struct PwhsRegions *regions);

// Filippov orbit from `z0`. `opts` may be null for the defaults.
//
// # Safety
// `sys` must be live, `opts` null or valid, `out` valid.
enum PwhsStatus pwhs_integrate(const struct PwhsSystem *sys,
                               struct PwhsComplex z0,
                               const struct PwhsOptions *opts,
                               struct PwhsTrajectory **out);

// # Safety
// `traj` must be live.
size_t pwhs_trajectory_len(const struct PwhsTrajectory *traj);

// # Safety
// `traj` must be live and the output pointers valid.
enum PwhsStatus pwhs_trajectory_sample(const struct PwhsTrajectory *traj,
                                       size_t index,
                                       double *t,
                                       struct PwhsComplex *z,
                                       enum PwhsMode *mode);

// # Safety
// `traj` must be live and `out` valid.
enum PwhsStatus pwhs_trajectory_termination(const struct PwhsTrajectory *traj,
                                            enum PwhsTermination *out);

// # Safety
// `traj` must be null or a handle not yet freed.
void pwhs_trajectory_free(struct PwhsTrajectory *traj);

// Follow one field from the line point `s` into its side until it returns.
// Writes the landing parameter and the transit time.
//
// # Safety
// `sys` must be live, `opts` null or valid, outputs valid.
enum PwhsStatus pwhs_half_return(const struct PwhsSystem *sys,
                                 enum PwhsSide side,
                                 double s,
                                 const struct PwhsOptions *opts,
                                 double *landing,
                                 double *time);

// Closed-form return map of `(a + ib)(z - x0)` above and `(c + id) z` below
// `Im z = 0`.
//
// # Safety
// `out` must be valid.
enum PwhsStatus pwhs_linear_poincare(double a,
                                     double b,
                                     double c,
                                     double d,
                                     double x0,
                                     struct PwhsPoincare *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PWHS_H */
