#ifndef LDPROJ_H
#define LDPROJ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result codes.
typedef enum LdprojStatus {
  LDPROJ_STATUS_OK = 0,
  LDPROJ_STATUS_DOMAIN = 1,
  LDPROJ_STATUS_PRECONDITION = 2,
  LDPROJ_STATUS_UNSUPPORTED_REGIME = 3,
  LDPROJ_STATUS_NON_CONVERGENCE = 4,
  LDPROJ_STATUS_IO = 5,
  LDPROJ_STATUS_FORMAT = 6,
  LDPROJ_STATUS_NULL_POINTER = 7,
  LDPROJ_STATUS_INVALID_STRING = 8,
  LDPROJ_STATUS_PANIC = 9,
} LdprojStatus;

// A rate function tabulated on a grid.
typedef struct LdprojRateCurve LdprojRateCurve;

// A configured sampler of one quantity.
typedef struct LdprojSampler LdprojSampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next `ldproj_*` call on the thread.
const char *ldproj_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ldproj_version(void);

// Creates a sampler. `quantity` is one of `scaled_norm`, `factor_U`,
// `factor_V`, `factor_V1`, `factor_W`, `mean_Z2`, `mean_Zp`, `mean_G2`;
// `method` is `direct` or `product` (NULL means `product`).
//
// # Safety
// String arguments must be NULL or NUL-terminated; `out` must be writable.
enum LdprojStatus ldproj_sampler_new(const char *quantity,
                                     size_t n,
                                     size_t k,
                                     double p,
                                     const char *method,
                                     uint64_t seed,
                                     struct LdprojSampler **out);

// Replaces the seed; the next fill starts a fresh sequence.
//
// # Safety
// `sampler` must come from [`ldproj_sampler_new`] and not be freed.
enum LdprojStatus ldproj_sampler_set_seed(struct LdprojSampler *sampler, uint64_t seed);

// Writes `count` draws to `out`. Equal seeds give equal values for any
// `workers`.
//
// # Safety
// `sampler` must be live and `out` must hold `count` doubles.
enum LdprojStatus ldproj_sampler_fill(const struct LdprojSampler *sampler,
                                      size_t count,
                                      size_t workers,
                                      double *out);

// Counts the draws among `trials` that fall in `[lo, hi]` (`hi` may be
// `INFINITY`), without storing them.
//
// # Safety
// `sampler` must be live and `hits` writable.
enum LdprojStatus ldproj_sampler_count_hits(const struct LdprojSampler *sampler,
                                            size_t trials,
                                            double lo,
                                            double hi,
                                            size_t workers,
                                            uint64_t *hits);

// Frees a sampler; NULL is ignored.
//
// # Safety
// `sampler` must be NULL or come from [`ldproj_sampler_new`], freed once.
void ldproj_sampler_free(struct LdprojSampler *sampler);

// Evaluates the named rate (`rate_U`, `rate_V`, `rate_V1`, `rate_W`,
// `rate_projection`, `rate_Z2_sum`, `rate_G_mean`, `rate_Zp_mean`) at `y`.
//
// # Safety
// `name` must be NUL-terminated and `out` writable.
enum LdprojStatus ldproj_rate(const char *name, double p, double lambda, double y, double *out);

// Tabulates a rate on the strictly increasing points `ys[0..count]`.
//
// # Safety
// `name` must be NUL-terminated, `ys` must hold `count` doubles and `out`
// must be writable.
enum LdprojStatus ldproj_rate_curve_new(const char *name,
                                        double p,
                                        double lambda,
                                        const double *ys,
                                        size_t count,
                                        struct LdprojRateCurve **out);

// Number of grid points; 0 for NULL.
//
// # Safety
// `curve` must be NULL or live.
size_t ldproj_rate_curve_len(const struct LdprojRateCurve *curve);

// The `index`-th point and its rate value.
//
// # Safety
// `curve` must be live; `y` and `value` writable.
enum LdprojStatus ldproj_rate_curve_get(const struct LdprojRateCurve *curve,
                                        size_t index,
                                        double *y,
                                        double *value);

// Frees a rate curve; NULL is ignored.
//
// # Safety
// `curve` must be NULL or come from [`ldproj_rate_curve_new`], freed once.
void ldproj_rate_curve_free(struct LdprojRateCurve *curve);

// `m_p = E Z²` for the p-generalized Gaussian, by quadrature.
//
// # Safety
// `out` must be writable.
enum LdprojStatus ldproj_moment_m(double p, double *out);

// `P(a1 ≤ V ≤ a2)` with `V²` ~ Beta(k/2, (n−k)/2).
//
// # Safety
// `out` must be writable.
enum LdprojStatus ldproj_exact_v_interval_probability(size_t n,
                                                      size_t k,
                                                      double a1,
                                                      double a2,
                                                      double *out);

// `P(a1 ≤ U^{1/n} V ≤ a2)` by quadrature.
//
// # Safety
// `out` must be writable.
enum LdprojStatus ldproj_exact_v1_interval_probability(size_t n,
                                                       size_t k,
                                                       double a1,
                                                       double a2,
                                                       double *out);

// Clopper–Pearson bounds for `hits` out of `trials` at confidence `level`.
//
// # Safety
// `lo` and `hi` must be writable.
enum LdprojStatus ldproj_clopper_pearson(uint64_t hits,
                                         uint64_t trials,
                                         double level,
                                         double *lo,
                                         double *hi);

// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
//
// # Safety
// `a` and `b` must hold `na` and `nb` doubles; outputs must be writable.
enum LdprojStatus ldproj_ks_two_sample(const double *a,
                                       size_t na,
                                       const double *b,
                                       size_t nb,
                                       double *statistic,
                                       double *p_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LDPROJ_H */
