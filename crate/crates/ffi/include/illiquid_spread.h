#ifndef ILLIQUID_SPREAD_H
#define ILLIQUID_SPREAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

enum IspStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  ISP_STATUS_OK = 0,
  ISP_STATUS_NULL_POINTER = 1,
  ISP_STATUS_DOMAIN = 2,
  ISP_STATUS_DIMENSION_MISMATCH = 3,
  ISP_STATUS_SINGULAR_PIVOT = 4,
  ISP_STATUS_NON_FINITE = 5,
  ISP_STATUS_CONFIG = 6,
  ISP_STATUS_IO = 7,
  ISP_STATUS_BUFFER_TOO_SMALL = 8,
  ISP_STATUS_PANIC = 9,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum IspStatus IspStatus;
#else
typedef int32_t IspStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Which `t₀` surface to copy out of a solution. Passed as a plain `int32_t`.
 */
enum IspSurfaceKind
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  ISP_SURFACE_KIND_V0 = 0,
  ISP_SURFACE_KIND_V1 = 1,
  ISP_SURFACE_KIND_EXCESS = 2,
  ISP_SURFACE_KIND_COMBINED = 3,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum IspSurfaceKind IspSurfaceKind;
#else
typedef int32_t IspSurfaceKind;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque result of a full solve.
 */
typedef struct IspSolution IspSolution;

typedef struct IspMarket {
  double sigma1;
  double sigma2;
  double rho;
  double r;
} IspMarket;

typedef struct IspMcEstimate {
  double price;
  double std_error;
  uint64_t samples;
} IspMcEstimate;

typedef struct IspGridSpec {
  double x_max;
  uint32_t m;
  uint32_t l;
  double maturity;
} IspGridSpec;

typedef struct IspStability {
  double a1;
  double c;
  double c_hat;
  double a_bound;
  double dt;
  double dt_max;
  bool satisfied;
} IspStability;

typedef struct IspImpact {
  double epsilon;
  double beta;
  double s_low;
  double s_high;
} IspImpact;

typedef struct IspSpotPrices {
  double v0;
  double excess;
  double combined;
} IspSpotPrices;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one, or 0 when
 * no error has been recorded.
 *
 * # Safety
 * `buf` is null or valid for `len` bytes.
 */
size_t isp_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *isp_version(void);

/**
 * # Safety
 * Pointers are null or valid.
 */
IspStatus isp_margrabe(double s1,
                       double s2,
                       const struct IspMarket *params,
                       double maturity,
                       double *out);

/**
 * # Safety
 * Pointers are null or valid.
 */
IspStatus isp_kirk(double s1,
                   double s2,
                   double strike,
                   const struct IspMarket *params,
                   double maturity,
                   double *out);

/**
 * # Safety
 * Pointers are null or valid.
 */
IspStatus isp_mc_price(double s1,
                       double s2,
                       double strike,
                       const struct IspMarket *params,
                       double maturity,
                       uint64_t n_paths,
                       uint64_t seed,
                       bool antithetic,
                       struct IspMcEstimate *out);

/**
 * # Safety
 * Pointers are null or valid.
 */
IspStatus isp_stability(const struct IspGridSpec *spec,
                        const struct IspMarket *params,
                        struct IspStability *out);

/**
 * Runs a full `V⁰ + εV¹` solve. On success `*out` owns a new handle.
 *
 * # Safety
 * Pointers are null or valid.
 */
IspStatus isp_solution_new(const struct IspMarket *params,
                           const struct IspImpact *impact,
                           const struct IspGridSpec *spec,
                           double strike,
                           struct IspSolution **out);

/**
 * Releases a handle from [`isp_solution_new`]. Null is a no-op.
 *
 * # Safety
 * `solution` is null or an unreleased handle.
 */
void isp_solution_free(struct IspSolution *solution);

/**
 * Bilinear prices at `(s1, s2)` on the `t₀` surfaces.
 *
 * # Safety
 * Pointers are null or valid.
 */
IspStatus isp_solution_price_at(const struct IspSolution *solution,
                                double s1,
                                double s2,
                                struct IspSpotPrices *out);

/**
 * Surface shape: `rows = m + 1` (x nodes), `cols = n + 1` (y nodes).
 *
 * # Safety
 * Pointers are null or valid.
 */
IspStatus isp_solution_dims(const struct IspSolution *solution, size_t *rows, size_t *cols);

/**
 * Copies a `t₀` surface in row-major order (`[m * cols + n]`) into `buf`,
 * which must hold `rows * cols` values.
 *
 * # Safety
 * `buf` is null or valid for `len` writes; `solution` is null or valid.
 */
IspStatus isp_solution_copy_surface(const struct IspSolution *solution,
                                    int32_t kind,
                                    double *buf,
                                    size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ILLIQUID_SPREAD_H */
