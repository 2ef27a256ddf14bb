#ifndef OPTOSTEER_H
#define OPTOSTEER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Error codes returned by every fallible function.
 */
typedef enum OsStatus {
  OS_STATUS_OK = 0,
  OS_STATUS_NULL_POINTER = 1,
  OS_STATUS_INVALID_PARAMETER = 2,
  OS_STATUS_CONFIG = 3,
  OS_STATUS_UNSTABLE = 4,
  OS_STATUS_NOT_POSITIVE_SEMIDEFINITE = 5,
  OS_STATUS_NUMERICAL = 6,
  OS_STATUS_IO = 7,
  OS_STATUS_PANIC = 8,
} OsStatus;

typedef enum OsPointStatus {
  OS_POINT_STATUS_OK = 0,
  OS_POINT_STATUS_UNSTABLE = 1,
  OS_POINT_STATUS_MARGINAL = 2,
  OS_POINT_STATUS_R_NOT_PSD = 3,
  OS_POINT_STATUS_ERROR = 4,
} OsPointStatus;

typedef enum OsRegime {
  /*
   No steering value (point not `OK`).
   */
  OS_REGIME_NONE = -1,
  OS_REGIME_NO_WAY = 0,
  OS_REGIME_ONE_WAY_ONE_TO_TWO = 1,
  OS_REGIME_ONE_WAY_TWO_TO_ONE = 2,
  OS_REGIME_TWO_WAY = 3,
} OsRegime;

/*
 Opaque parameter set.
 */
typedef struct OsParams OsParams;

/*
 Gain-medium rates in rad/s.
 */
typedef struct OsXi {
  double xi11;
  double xi22;
  double xi12;
  double xi21;
} OsXi;

/*
 One evaluated parameter point. Absent values are NaN.
 */
typedef struct OsPointResult {
  enum OsPointStatus status;
  bool stable;
  double steering_1to2;
  double steering_2to1;
  enum OsRegime regime;
  double energy_diff;
  /*
   True when `energy_diff` is in joules (unequal mirror frequencies).
   */
  bool energy_in_joules;
  double max_real_eig;
  double hurwitz_min;
  double lyapunov_residual;
} OsPointResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or NULL. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *os_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *os_version(void);

/*
 Reference parameter set. Release with [`os_params_free`].
 */
struct OsParams *os_params_default(void);

/*
 Parses a JSON configuration document into a new handle.

 # Safety
 `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum OsStatus os_params_from_json(const char *json, struct OsParams **out);

/*
 Releases a handle. NULL is ignored.

 # Safety
 `params` must come from this library and not have been freed.
 */
void os_params_free(struct OsParams *params);

/*
 Copies a handle.

 # Safety
 `params` must be a live handle or NULL.
 */
struct OsParams *os_params_clone(const struct OsParams *params);

/*
 Sets Ω/γ.

 # Safety
 `params` must be a live handle.
 */
enum OsStatus os_params_set_omega_over_gamma(struct OsParams *params, double ratio);

/*
 Sets the thermal occupation of mirror `index` (1 or 2; 0 sets both).

 # Safety
 `params` must be a live handle.
 */
enum OsStatus os_params_set_n_th(struct OsParams *params, uint8_t index, double n_th);

/*
 Sets G/ω_m of cavity `index` (1 or 2; 0 sets both).

 # Safety
 `params` must be a live handle.
 */
enum OsStatus os_params_set_g_over_wm(struct OsParams *params, uint8_t index, double ratio);

/*
 Gain-medium rates for the handle's laser parameters.

 # Safety
 `params` must be a live handle and `out` a valid pointer.
 */
enum OsStatus os_compute_xi(const struct OsParams *params, struct OsXi *out);

/*
 Evaluates stability, covariance, steering and energy at the handle's point.

 # Safety
 `params` must be a live handle and `out` a valid pointer.
 */
enum OsStatus os_run_point(const struct OsParams *params, struct OsPointResult *out);

/*
 Steady-state 8×8 covariance, written row-major into `out[64]`.
 Fails with `UNSTABLE` when no steady state exists.

 # Safety
 `params` must be a live handle and `out` must point to 64 writable doubles.
 */
enum OsStatus os_solve_covariance(const struct OsParams *params, double *out);

/*
 Steering in both directions for a two-mode covariance given row-major in
 `v[16]` (vacuum variance ½).

 # Safety
 `v` must point to 16 readable doubles; `g_1to2` and `g_2to1` must be valid.
 */
enum OsStatus os_steering(const double *v, double *g_1to2, double *g_2to1);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPTOSTEER_H */
