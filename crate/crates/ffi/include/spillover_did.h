#ifndef SPILLOVER_DID_H
#define SPILLOVER_DID_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum SdStatus {
  SD_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  SD_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  SD_STATUS_INVALID_UTF8 = 2,
  /**
   * Invalid option, flag value or feature map.
   */
  SD_STATUS_CONFIG = 3,
  /**
   * Input data does not follow the panel schema.
   */
  SD_STATUS_DATA = 4,
  /**
   * An exposure group is empty or a propensity is zero.
   */
  SD_STATUS_POSITIVITY = 5,
  /**
   * A design or information matrix is rank deficient.
   */
  SD_STATUS_SINGULAR = 6,
  /**
   * An argument lies outside its admissible range.
   */
  SD_STATUS_DOMAIN = 7,
  SD_STATUS_IO = 8,
  /**
   * Index past the end of a result set.
   */
  SD_STATUS_OUT_OF_RANGE = 9,
  /**
   * A Rust panic was caught at the boundary.
   */
  SD_STATUS_INTERNAL = 10,
} SdStatus;

/**
 * Opaque panel dataset.
 */
typedef struct SdDataset SdDataset;

/**
 * Opaque set of estimates from one call to [`sd_estimate`].
 */
typedef struct SdEstimates SdEstimates;

/**
 * One estimate row. `time_index` is -1 for two-period data and for
 * time-averaged rows.
 */
typedef struct SdEffect {
  double point;
  double se;
  double ci_low;
  double ci_high;
  size_t n;
  int64_t time_index;
} SdEffect;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *sd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sd_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library that has not been
 * freed yet.
 */
void sd_string_free(char *s);

/**
 * Loads a wide panel CSV.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SdStatus sd_dataset_read_csv(const char *path, struct SdDataset **out);

/**
 * Draws one panel of `n` units from a built-in design. `dgp` is
 * "two-period" or "multi-period"; NULL selects two-period. Stream 0 of
 * `seed` is used, matching `simulate --dump-data`.
 *
 * # Safety
 * `dgp` must be NULL or NUL-terminated; `out` must be a valid pointer.
 */
enum SdStatus sd_dataset_simulate(const char *dgp, size_t n, uint64_t seed, struct SdDataset **out);

/**
 * # Safety
 * `d` must be NULL or a live dataset handle.
 */
size_t sd_dataset_n_units(const struct SdDataset *d);

/**
 * Number of post-treatment periods T.
 *
 * # Safety
 * `d` must be NULL or a live dataset handle.
 */
size_t sd_dataset_periods(const struct SdDataset *d);

/**
 * # Safety
 * `d` must be NULL or a dataset handle that has not been freed yet.
 */
void sd_dataset_free(struct SdDataset *d);

/**
 * Fits the nuisance models and computes the requested estimates.
 *
 * `ps_map` and `om_map` use the feature-map syntax (`"1 + x1 + x2^2"`);
 * NULL means linear in every covariate. `estimands` and `estimators` are
 * comma lists (`"ATT,AOTT"`, `"IPW,DR"`); NULL means AOTT and DR.
 *
 * # Safety
 * `d` must be a live dataset handle; string arguments must be NULL or
 * NUL-terminated; `out` must be a valid pointer.
 */
enum SdStatus sd_estimate(const struct SdDataset *d,
                          const char *ps_map,
                          const char *om_map,
                          const char *estimands,
                          const char *estimators,
                          struct SdEstimates **out);

/**
 * # Safety
 * `e` must be NULL or a live estimates handle.
 */
size_t sd_estimates_len(const struct SdEstimates *e);

/**
 * Copies row `i` into `out`.
 *
 * # Safety
 * `e` must be a live estimates handle and `out` a valid pointer.
 */
enum SdStatus sd_estimates_get(const struct SdEstimates *e, size_t i, struct SdEffect *out);

/**
 * Estimand label of row `i` (`"AOTT"`, `"TimeAvgATT"`, ...), or NULL when
 * out of range. Owned by the handle.
 *
 * # Safety
 * `e` must be NULL or a live estimates handle.
 */
const char *sd_estimates_estimand(const struct SdEstimates *e, size_t i);

/**
 * Estimator label of row `i` (`"IPW"`, `"Reg"` or `"DR"`), or NULL.
 *
 * # Safety
 * `e` must be NULL or a live estimates handle.
 */
const char *sd_estimates_estimator(const struct SdEstimates *e, size_t i);

/**
 * Full report document, including nuisance diagnostics, as JSON. Free the
 * result with [`sd_string_free`].
 *
 * # Safety
 * `e` must be NULL or a live estimates handle.
 */
char *sd_estimates_json(const struct SdEstimates *e);

/**
 * # Safety
 * `e` must be NULL or an estimates handle that has not been freed yet.
 */
void sd_estimates_free(struct SdEstimates *e);

/**
 * Runs a Monte Carlo study described by a TOML document with the keys
 * `scenario`, `n`, `reps`, `seed`, `dgp`, `theta01`, `theta10` and `T`
 * (all optional), and writes the JSON report to `*out`.
 *
 * # Safety
 * `config` must be NULL or NUL-terminated; `out` must be a valid pointer.
 * Free the result with [`sd_string_free`].
 */
enum SdStatus sd_simulate_json(const char *config, size_t threads, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPILLOVER_DID_H */
