#ifndef BEAMSPACE_H
#define BEAMSPACE_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BsStatus {
  BS_STATUS_OK = 0,
  BS_STATUS_NULL_POINTER = 1,
  BS_STATUS_INVALID_ARGUMENT = 2,
  BS_STATUS_DIMENSION_MISMATCH = 3,
  BS_STATUS_SINGULAR_SYSTEM = 4,
  BS_STATUS_CONFIG = 5,
  BS_STATUS_IO = 6,
  BS_STATUS_PANIC = 7,
} BsStatus;

typedef enum BsFormat {
  BS_FORMAT_CSV = 0,
  BS_FORMAT_JSON = 1,
} BsFormat;

/**
 * Opaque measurement combiner.
 */
typedef struct BsCombiner BsCombiner;

/**
 * Opaque experiment configuration.
 */
typedef struct BsExperimentConfig BsExperimentConfig;

/**
 * Opaque result table.
 */
typedef struct BsResultTable BsResultTable;

/**
 * Complex double, layout-compatible with C99 `double _Complex`.
 */
typedef struct BsComplex {
  double re;
  double im;
} BsComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t bs_last_error(char *buf, size_t len);

/**
 * Draws a `q × n` Bernoulli combiner from `seed`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum BsStatus bs_combiner_new(size_t q, size_t n, uint64_t seed, struct BsCombiner **out);

/**
 * # Safety
 * `c` must be null or a handle from [`bs_combiner_new`] not yet freed.
 */
void bs_combiner_free(struct BsCombiner *c);

/**
 * # Safety
 * `c` must be a live handle; `q` and `n` valid pointers.
 */
enum BsStatus bs_combiner_dims(const struct BsCombiner *c, size_t *q, size_t *n);

/**
 * Combiner entry at row `i`, column `j` (0-based).
 *
 * # Safety
 * `c` must be a live handle; `out` a valid pointer.
 */
enum BsStatus bs_combiner_entry(const struct BsCombiner *c, size_t i, size_t j, double *out);

/**
 * # Safety
 * `c` must be a live handle; `out` a valid pointer.
 */
enum BsStatus bs_combiner_mutual_coherence(const struct BsCombiner *c, double *out);

/**
 * Noiseless measurement `z = W h`. `h` has `n` entries, `z` has `q`.
 *
 * # Safety
 * `c` must be a live handle; `h` and `z` must hold `n` and `q` elements.
 */
enum BsStatus bs_combiner_measure(const struct BsCombiner *c,
                                  const struct BsComplex *h,
                                  size_t n,
                                  struct BsComplex *z,
                                  size_t q);

/**
 * Support-detection estimate of one user. `z` has `q` entries and the
 * estimate written to `out` has `n`.
 *
 * # Safety
 * `c` must be a live handle; `z` and `out` must hold `q` and `n` elements.
 */
enum BsStatus bs_sd_estimate(const struct BsCombiner *c,
                             const struct BsComplex *z,
                             size_t q,
                             size_t num_nlos,
                             size_t v,
                             struct BsComplex *out,
                             size_t n);

/**
 * OMP estimate with a fixed iteration count.
 *
 * # Safety
 * Same contract as [`bs_sd_estimate`].
 */
enum BsStatus bs_omp_estimate(const struct BsCombiner *c,
                              const struct BsComplex *z,
                              size_t q,
                              size_t sparsity,
                              struct BsComplex *out,
                              size_t n);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum BsStatus bs_power_ratio_lower_bound(size_t n, size_t v, double *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum BsStatus bs_detection_probability_lower_bound(size_t n, double alpha, double *out);

/**
 * Peak-amplitude threshold. When the bound is vacuous `*vacuous` is set to 1
 * and `*out` to NaN.
 *
 * # Safety
 * `out` and `vacuous` must be valid pointers.
 */
enum BsStatus bs_amplitude_threshold(double sigma2_ul,
                                     double alpha,
                                     double mu,
                                     size_t n,
                                     double *out,
                                     int32_t *vacuous);

/**
 * Parses and validates a JSON experiment configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum BsStatus bs_config_from_json(const char *json, struct BsExperimentConfig **out);

/**
 * # Safety
 * `cfg` must be null or a handle from [`bs_config_from_json`] not yet freed.
 */
void bs_config_free(struct BsExperimentConfig *cfg);

/**
 * Runs the configured sweep. `threads == 0` uses every core.
 *
 * # Safety
 * `cfg` must be a live handle; `out` a valid pointer.
 */
enum BsStatus bs_run_experiment(const struct BsExperimentConfig *cfg,
                                size_t threads,
                                struct BsResultTable **out);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t bs_result_table_len(const struct BsResultTable *t);

/**
 * Mean, standard error and successful-trial count of row `row`.
 *
 * # Safety
 * `t` must be a live handle; output pointers valid.
 */
enum BsStatus bs_result_table_row(const struct BsResultTable *t,
                                  size_t row,
                                  double *mean,
                                  double *stderr,
                                  size_t *trials);

/**
 * Writes the table as CSV or JSON.
 *
 * # Safety
 * `t` must be a live handle; `path` a NUL-terminated string.
 */
enum BsStatus bs_result_table_write(const struct BsResultTable *t,
                                    const char *path,
                                    enum BsFormat format);

/**
 * # Safety
 * `t` must be null or a handle from [`bs_run_experiment`] not yet freed.
 */
void bs_result_table_free(struct BsResultTable *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEAMSPACE_H */
