#ifndef QCW_H
#define QCW_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum QcwStatus {
  QCW_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QCW_STATUS_NULL_POINTER = 1,
  /**
   * Invalid parameters or inputs.
   */
  QCW_STATUS_VALIDATION = 2,
  /**
   * Numeric abort, e.g. the price-positivity guard.
   */
  QCW_STATUS_NUMERIC = 3,
  QCW_STATUS_IO = 4,
  QCW_STATUS_PARSE = 5,
  /**
   * Index past the end of a path.
   */
  QCW_STATUS_OUT_OF_RANGE = 6,
  /**
   * Internal panic caught at the boundary.
   */
  QCW_STATUS_INTERNAL = 7,
} QcwStatus;

typedef enum QcwSimMode {
  QCW_SIM_MODE_BALANCED = 0,
  QCW_SIM_MODE_IMBALANCE_COUPLED = 1,
} QcwSimMode;

typedef enum QcwPostTrade {
  QCW_POST_TRADE_PHASE_SCRAMBLE = 0,
  QCW_POST_TRADE_COLLAPSE = 1,
} QcwPostTrade;

typedef enum QcwSide {
  QCW_SIDE_BID = 0,
  QCW_SIDE_ASK = 1,
} QcwSide;

/**
 * Simulated path (opaque).
 */
typedef struct QcwPath QcwPath;

/**
 * Spread density and its tabulated CDF (opaque).
 */
typedef struct QcwSpreadLaw QcwSpreadLaw;

typedef struct QcwPriceLevels {
  double s_ask;
  double s_bid;
  double s_mid;
  double delta;
} QcwPriceLevels;

typedef struct QcwModelParams {
  double sigma;
  double xi0;
  double xi1;
  double kappa0;
  double kappa1;
  double tau;
  double s0;
  double dt;
  /**
   * True draws a uniform phase for the coupling element.
   */
  bool complex_kappa;
} QcwModelParams;

typedef struct QcwSimConfig {
  uint64_t n_steps;
  double initial_price;
  /**
   * Initial imbalance in [-1, 1]; the state has real amplitudes.
   */
  double initial_imbalance;
  enum QcwSimMode mode;
  double c_i;
  enum QcwPostTrade post_trade;
  uint64_t seed;
} QcwSimConfig;

typedef struct QcwPathPoint {
  uint64_t t;
  double s_bid;
  double s_ask;
  double s_trade;
  enum QcwSide side;
  double imbalance;
} QcwPathPoint;

typedef struct QcwFitResult {
  double xi1_hat;
  double kappa1_hat;
  double loglik;
  uint64_t n;
  bool converged;
  uint64_t iterations;
} QcwFitResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next `qcw_*` call on the same thread.
 */
const char *qcw_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qcw_version(void);

/**
 * Eigenprices of `[[s11, s12], [conj(s12), s22]]` with `s12 = s12_re + i·s12_im`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `QcwPriceLevels`.
 */
enum QcwStatus qcw_eigenprices(double s11,
                               double s22,
                               double s12_re,
                               double s12_im,
                               struct QcwPriceLevels *out);

/**
 * Modified Bessel function `I0(x)`.
 */
double qcw_bessel_i0(double x);

/**
 * Exponentially scaled `e^{-|x|} I0(x)`.
 */
double qcw_bessel_i0e(double x);

struct QcwModelParams qcw_model_params_default(void);

struct QcwSimConfig qcw_sim_config_default(void);

/**
 * Simulates one path and stores a new handle in `*out`.
 *
 * # Safety
 * `config` and `params` must be null or valid for reads; `out` must be null
 * or valid for one pointer write. Free the handle with `qcw_path_free`.
 */
enum QcwStatus qcw_simulate_path(const struct QcwSimConfig *config,
                                 const struct QcwModelParams *params,
                                 struct QcwPath **out);

/**
 * Number of points in `path`; 0 for null.
 *
 * # Safety
 * `path` must be null or a live handle.
 */
size_t qcw_path_len(const struct QcwPath *path);

/**
 * Copies point `index` of `path` into `*out`.
 *
 * # Safety
 * `path` must be null or a live handle; `out` null or writable.
 */
enum QcwStatus qcw_path_get(const struct QcwPath *path, size_t index, struct QcwPathPoint *out);

/**
 * # Safety
 * `path` must be null or a handle not yet freed.
 */
void qcw_path_free(struct QcwPath *path);

/**
 * Builds the spread law for scales `xi1, kappa1 > 0`.
 *
 * # Safety
 * `out` must be null or valid for one pointer write. Free with
 * `qcw_spread_law_free`.
 */
enum QcwStatus qcw_spread_law_new(double xi1, double kappa1, struct QcwSpreadLaw **out);

/**
 * Density at `delta`; NaN for a null handle.
 *
 * # Safety
 * `law` must be null or a live handle.
 */
double qcw_spread_law_pdf(const struct QcwSpreadLaw *law, double delta);

/**
 * CDF at `delta`; NaN for a null handle.
 *
 * # Safety
 * `law` must be null or a live handle.
 */
double qcw_spread_law_cdf(const struct QcwSpreadLaw *law, double delta);

/**
 * # Safety
 * `law` must be null or a handle not yet freed.
 */
void qcw_spread_law_free(struct QcwSpreadLaw *law);

/**
 * Maximum-likelihood fit of the spread law to `n` positive samples with
 * default options (at most 500 iterations, tolerance 1e-8).
 *
 * # Safety
 * `samples` must be valid for `n` reads; `out` null or writable.
 */
enum QcwStatus qcw_fit_spreads(const double *samples, size_t n, struct QcwFitResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCW_H */
