/* C interface to the umbilic library. */

#ifndef UMBILIC_H
#define UMBILIC_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum UmbStatus {
  UMB_STATUS_OK = 0,
  UMB_STATUS_NULL_ARGUMENT,
  UMB_STATUS_INVALID_ARGUMENT,
  UMB_STATUS_PARSE_ERROR,
  UMB_STATUS_AXIS_POINT,
  UMB_STATUS_OFF_SURFACE,
  UMB_STATUS_LEVI_DEGENERATE,
  UMB_STATUS_NO_CONVERGENCE,
  UMB_STATUS_NO_ZERO_FOUND,
  UMB_STATUS_RANK_DEFICIENT,
  UMB_STATUS_NOT_UMBILICAL,
  UMB_STATUS_CURVE_MEETS_LOCUS,
  UMB_STATUS_SAMPLING_UNSTABLE,
  UMB_STATUS_UNSTABLE_INDEX,
  UMB_STATUS_BOUNDARY_ROOT,
  UMB_STATUS_DEGENERATE_WINDING,
  UMB_STATUS_INTERNAL,
} UmbStatus;

/**
 * Opaque surface handle.
 */
typedef struct UmbSurface UmbSurface;

/**
 * One evaluated point: chart parameters, position, `det A3`, `J`, `Q`.
 */
typedef struct UmbSample {
  double theta[3];
  double z_re;
  double z_im;
  double w_re;
  double w_im;
  double det_re;
  double det_im;
  double j_on_m;
  double q_re;
  double q_im;
  double abs_q;
  double row_scale;
} UmbSample;

/**
 * Extremes of a grid scan.
 */
typedef struct UmbScanSummary {
  double min_abs_q;
  double median_abs_q;
  double min_abs_det;
  double min_theta[3];
} UmbScanSummary;

/**
 * A refined umbilical zero.
 */
typedef struct UmbRefined {
  double theta[3];
  double z_re;
  double z_im;
  double w_re;
  double w_im;
  double abs_q;
  double scale;
  uintptr_t iterations;
} UmbRefined;

/**
 * Winding number and exact rational index of a closed curve.
 */
typedef struct UmbIndex {
  int64_t winding;
  int64_t index_num;
  int64_t index_den;
  uintptr_t n_samples;
  double max_phase_step;
} UmbIndex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent error on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *umb_last_error_message(void);

/**
 * The unit sphere. Never fails; free with `umb_surface_free`.
 */
struct UmbSurface *umb_surface_sphere(void);

/**
 * Log-torus surface `(log|z|)^2 + (log|w|)^2 = eps^2`.
 * # Safety
 * `out` must be a valid pointer to writable surface-handle storage.
 */
enum UmbStatus umb_surface_log_torus(double eps, struct UmbSurface **out);

/**
 * Real ellipsoid with parameters `A, B >= 0`, `AB != 0`, and `eps > 0`.
 * # Safety
 * `out` must be a valid pointer to writable surface-handle storage.
 */
enum UmbStatus umb_surface_ellipsoid(double a, double b, double eps, struct UmbSurface **out);

/**
 * Parse a TOML or JSON surface description (same format as the CLI).
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer
 * to writable surface-handle storage.
 */
enum UmbStatus umb_surface_parse(const char *text, struct UmbSurface **out);

/**
 * Release a surface handle. Null is accepted and ignored.
 * # Safety
 * `surface` must be null or a handle produced by a constructor of this
 * library that has not been freed.
 */
void umb_surface_free(struct UmbSurface *surface);

/**
 * Name of the surface kind ("sphere", "perturbed_sphere", "ellipsoid",
 * "log_torus"); a static string.
 * # Safety
 * `surface` must be null or a live handle from this library.
 */
const char *umb_surface_kind(const struct UmbSurface *surface);

/**
 * Value of the defining function at a point of C^2.
 * # Safety
 * `surface` must be a live handle and `out` a valid pointer to one f64.
 */
enum UmbStatus umb_rho(const struct UmbSurface *surface,
                       double z_re,
                       double z_im,
                       double w_re,
                       double w_im,
                       double *out);

/**
 * Chart map onto the surface; writes `z_re, z_im, w_re, w_im`.
 * # Safety
 * `surface` must be a live handle and `out` must point to at least four
 * writable f64 values.
 */
enum UmbStatus umb_chart_point(const struct UmbSurface *surface,
                               double t1,
                               double t2,
                               double t3,
                               double *out);

/**
 * Evaluate `det A3`, `J` and `Q` at a chart parameter triple.
 * # Safety
 * `surface` must be a live handle and `out` a valid pointer to an
 * `UmbSample`.
 */
enum UmbStatus umb_sample(const struct UmbSurface *surface,
                          double t1,
                          double t2,
                          double t3,
                          struct UmbSample *out);

/**
 * Scan `|Q|` over an `n1 x n2 x n3` chart grid and report the extremes.
 * # Safety
 * `surface` must be a live handle and `out` a valid pointer to an
 * `UmbScanSummary`.
 */
enum UmbStatus umb_scan_summary(const struct UmbSurface *surface,
                                uintptr_t n1,
                                uintptr_t n2,
                                uintptr_t n3,
                                struct UmbScanSummary *out);

/**
 * Gauss-Newton refinement of an umbilical zero from a chart-parameter seed.
 * # Safety
 * `surface` must be a live handle and `out` a valid pointer to an
 * `UmbRefined`.
 */
enum UmbStatus umb_refine_zero(const struct UmbSurface *surface,
                               double t1,
                               double t2,
                               double t3,
                               struct UmbRefined *out);

/**
 * Winding index of `Q` along the circle of the given radius around `center`,
 * in the chart plane orthogonal to `normal`.
 * # Safety
 * `surface` must be a live handle; `center` and `normal` must point to at
 * least three f64 values each; `out` must be a valid `UmbIndex` pointer.
 */
enum UmbStatus umb_circle_index(const struct UmbSurface *surface,
                                const double *center,
                                const double *normal,
                                double radius,
                                uintptr_t n0,
                                struct UmbIndex *out);

/**
 * Local index of a smooth umbilical-curve point (radius auto-shrinks).
 * # Safety
 * `surface` must be a live handle and `out` a valid pointer to an
 * `UmbIndex`.
 */
enum UmbStatus umb_local_index(const struct UmbSurface *surface,
                               double t1,
                               double t2,
                               double t3,
                               struct UmbIndex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UMBILIC_H */
