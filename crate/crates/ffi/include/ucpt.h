#ifndef UCPT_H
#define UCPT_H

/* Generated by cbindgen from crates/ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  UCPT_STATUS_OK = 0,
  UCPT_STATUS_NULL_POINTER = 1,
  UCPT_STATUS_DIMENSION_MISMATCH = 2,
  UCPT_STATUS_INSUFFICIENT_DATA = 3,
  UCPT_STATUS_INVALID_PARAMETER = 4,
  UCPT_STATUS_NON_FINITE = 5,
  UCPT_STATUS_PARSE = 6,
  UCPT_STATUS_IO = 7,
  UCPT_STATUS_INTERNAL = 8,
} UcptStatus;

typedef enum {
  UCPT_KERNEL_LINEAR = 0,
  UCPT_KERNEL_SIGN = 1,
} UcptKernel;

/**
 * Opaque result of [`ucpt_run_cusum_test`].
 */
typedef struct UcptCusumResult UcptCusumResult;

/**
 * Opaque `n x p` observation matrix.
 */
typedef struct UcptData UcptData;

/**
 * Opaque result of [`ucpt_run_test`].
 */
typedef struct UcptTestResult UcptTestResult;

/**
 * Plain-value view of a test result.
 */
typedef struct {
  double statistic;
  double quantile;
  double p_value;
  double alpha;
  bool reject;
  size_t bootstrap;
  uint64_t seed;
  size_t n;
  size_t p;
  /**
   * CUSUM boundary; 0 for the U-statistic test.
   */
  size_t boundary;
} UcptSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread, or NULL. The
 * pointer stays valid until the next call into this library on the thread.
 */
const char *ucpt_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ucpt_version(void);

/**
 * Copies `n * p` row-major values into a new data handle.
 *
 * # Safety
 * `values` must point to `n * p` readable doubles and `out` must be a valid
 * pointer to write the handle to.
 */
UcptStatus ucpt_data_new(const double *values, size_t n, size_t p, UcptData **out);

/**
 * Loads a comma-separated file with one observation per row.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
 */
UcptStatus ucpt_data_from_csv(const char *path, bool has_header, UcptData **out);

/**
 * Number of observations, or 0 for NULL.
 *
 * # Safety
 * `data` must be NULL or a live handle.
 */
size_t ucpt_data_nrows(const UcptData *data);

/**
 * Dimension of each observation, or 0 for NULL.
 *
 * # Safety
 * `data` must be NULL or a live handle.
 */
size_t ucpt_data_ncols(const UcptData *data);

/**
 * # Safety
 * `data` must be NULL or a handle not yet freed.
 */
void ucpt_data_free(UcptData *data);

/**
 * Computes `T_n`. Writes the sup-norm to `t_max`; when `t_vector` is non-NULL
 * and `t_vector_len >= p`, also writes the `p` components.
 *
 * # Safety
 * `data` must be a live handle, `t_max` writable, and `t_vector` NULL or
 * valid for `t_vector_len` doubles.
 */
UcptStatus ucpt_statistic(const UcptData *data,
                          UcptKernel kernel,
                          double *t_max,
                          double *t_vector,
                          size_t t_vector_len);

/**
 * Runs the bootstrap change point test.
 *
 * # Safety
 * `data` must be a live handle and `out` writable.
 */
UcptStatus ucpt_run_test(const UcptData *data,
                         UcptKernel kernel,
                         double alpha,
                         size_t bootstrap,
                         uint64_t seed,
                         UcptTestResult **out);

/**
 * Copies the result's fields into `out`.
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
UcptStatus ucpt_test_result_summary(const UcptTestResult *result, UcptSummary *out);

/**
 * JSON rendering of the result (timing omitted). Free with
 * [`ucpt_string_free`]. Returns NULL on failure.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
char *ucpt_test_result_to_json(const UcptTestResult *result);

/**
 * # Safety
 * `result` must be NULL or a handle not yet freed.
 */
void ucpt_test_result_free(UcptTestResult *result);

/**
 * Runs the boundary-removed CUSUM test.
 *
 * # Safety
 * `data` must be a live handle and `out` writable.
 */
UcptStatus ucpt_run_cusum_test(const UcptData *data,
                               size_t boundary,
                               double alpha,
                               size_t bootstrap,
                               uint64_t seed,
                               UcptCusumResult **out);

/**
 * Copies the CUSUM result's fields into `out`.
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
UcptStatus ucpt_cusum_result_summary(const UcptCusumResult *result, UcptSummary *out);

/**
 * JSON rendering of the CUSUM result (timing omitted). Free with
 * [`ucpt_string_free`].
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
char *ucpt_cusum_result_to_json(const UcptCusumResult *result);

/**
 * # Safety
 * `result` must be NULL or a handle not yet freed.
 */
void ucpt_cusum_result_free(UcptCusumResult *result);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a string from a `*_to_json` call, not yet freed.
 */
void ucpt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UCPT_H */
