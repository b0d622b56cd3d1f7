#ifndef IAA_ENSEMBLE_H
#define IAA_ENSEMBLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IaaStatus {
  IAA_STATUS_OK = 0,
  IAA_STATUS_NULL_POINTER = 1,
  IAA_STATUS_INVALID_ARGUMENT = 2,
  IAA_STATUS_DATA_ERROR = 3,
  IAA_STATUS_IO_ERROR = 4,
  IAA_STATUS_PANIC = 5,
} IaaStatus;

typedef enum IaaMethod {
  IAA_METHOD_IAA = 0,
  IAA_METHOD_MAJORITY_VOTE = 1,
} IaaMethod;

typedef enum IaaMetric {
  IAA_METRIC_ACCURACY = 0,
  IAA_METRIC_F_SCORE = 1,
} IaaMetric;

/**
 * Opaque loaded train/test pair.
 */
typedef struct IaaDatasetPair IaaDatasetPair;

/**
 * Opaque experiment result.
 */
typedef struct IaaExperiment IaaExperiment;

/**
 * Opaque aggregated fuzzy set.
 */
typedef struct IaaFuzzySet IaaFuzzySet;

/**
 * One piecewise-constant region of a fuzzy set.
 */
typedef struct IaaRegion {
  double left;
  double right;
  double height;
} IaaRegion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *iaa_last_error_message(void);

/**
 * Fraction of the `n` intervals `[lo[i], hi[i]]` that contain `x`.
 *
 * # Safety
 * `lo` and `hi` must point to `n` readable doubles; `out` must be writable.
 */
enum IaaStatus iaa_membership(const double *lo, const double *hi, size_t n, double x, double *out);

/**
 * Aggregate `n` intervals into a new fuzzy set written to `*out`.
 *
 * # Safety
 * `lo` and `hi` must point to `n` readable doubles; `out` must be writable.
 */
enum IaaStatus iaa_aggregate(const double *lo,
                             const double *hi,
                             size_t n,
                             struct IaaFuzzySet **out);

/**
 * Number of regions, or 0 for a null handle.
 *
 * # Safety
 * `fs` must be null or a live handle from [`iaa_aggregate`].
 */
size_t iaa_fuzzy_set_len(const struct IaaFuzzySet *fs);

/**
 * # Safety
 * `fs` must be a live handle; `out` must be writable.
 */
enum IaaStatus iaa_fuzzy_set_region(const struct IaaFuzzySet *fs,
                                    size_t index,
                                    struct IaaRegion *out);

/**
 * # Safety
 * `fs` must be a live handle; `out` must be writable.
 */
enum IaaStatus iaa_fuzzy_set_centroid(const struct IaaFuzzySet *fs, double *out);

/**
 * # Safety
 * `fs` must be null or a handle not yet freed.
 */
void iaa_fuzzy_set_free(struct IaaFuzzySet *fs);

/**
 * Aggregate, defuzzify and threshold. `*is_main` is 1 when the centroid is
 * at least `threshold`, else 0. `centroid` may be null.
 *
 * # Safety
 * `lo` and `hi` must point to `n` readable doubles; `is_main` must be
 * writable; `centroid` must be null or writable.
 */
enum IaaStatus iaa_classify_intervals(const double *lo,
                                      const double *hi,
                                      size_t n,
                                      double threshold,
                                      int *is_main,
                                      double *centroid);

/**
 * Load a train/test pair. `missing_token` may be null for the default `?`.
 *
 * # Safety
 * String arguments must be null-terminated; `out` must be writable.
 */
enum IaaStatus iaa_dataset_load(const char *train_path,
                                const char *test_path,
                                const char *main_class,
                                const char *missing_token,
                                struct IaaDatasetPair **out);

/**
 * Feature count, or 0 for a null handle.
 *
 * # Safety
 * `pair` must be null or a live handle.
 */
size_t iaa_dataset_n_features(const struct IaaDatasetPair *pair);

/**
 * # Safety
 * `pair` must be null or a live handle.
 */
size_t iaa_dataset_n_train(const struct IaaDatasetPair *pair);

/**
 * # Safety
 * `pair` must be null or a live handle.
 */
size_t iaa_dataset_n_test(const struct IaaDatasetPair *pair);

/**
 * # Safety
 * `pair` must be null or a handle not yet freed.
 */
void iaa_dataset_free(struct IaaDatasetPair *pair);

/**
 * Run both methods for `repeats` repeats with default tree settings.
 *
 * # Safety
 * `pair` must be a live handle; `name` null-terminated; `out` writable.
 */
enum IaaStatus iaa_experiment_run(const struct IaaDatasetPair *pair,
                                  const char *name,
                                  size_t n_bootstraps,
                                  size_t repeats,
                                  uint64_t seed,
                                  struct IaaExperiment **out);

/**
 * Mean of `metric` over all repeats of `method`.
 *
 * # Safety
 * `exp` must be a live handle; `out` writable.
 */
enum IaaStatus iaa_experiment_mean(const struct IaaExperiment *exp,
                                   enum IaaMethod method,
                                   enum IaaMetric metric,
                                   double *out);

/**
 * Write the results file to `path`.
 *
 * # Safety
 * `exp` must be a live handle; `path` null-terminated.
 */
enum IaaStatus iaa_experiment_write(const struct IaaExperiment *exp, const char *path);

/**
 * # Safety
 * `exp` must be null or a handle not yet freed.
 */
void iaa_experiment_free(struct IaaExperiment *exp);

/**
 * Bayesian signed-rank comparison of `q` paired differences. Any of the
 * three output pointers may be null.
 *
 * # Safety
 * `differences` must point to `q` readable doubles; non-null outputs must be
 * writable.
 */
enum IaaStatus iaa_signed_rank(const double *differences,
                               size_t q,
                               double rope,
                               double prior_weight,
                               double prior_pseudo,
                               size_t mc_samples,
                               uint64_t seed,
                               double *p_left,
                               double *p_rope,
                               double *p_right);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IAA_ENSEMBLE_H */
