#ifndef CORRSENSE_H
#define CORRSENSE_H

/* Generated by cbindgen from corrsense-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum CorrsenseStatus {
  CORRSENSE_STATUS_OK = 0,
  CORRSENSE_STATUS_NULL_POINTER = 1,
  CORRSENSE_STATUS_INVALID_ARGUMENT = 2,
  CORRSENSE_STATUS_NOT_PRIME = 3,
  CORRSENSE_STATUS_NOT_PERFECT_SQUARE = 4,
  CORRSENSE_STATUS_INFEASIBLE = 5,
  CORRSENSE_STATUS_NUMERICAL_FAILURE = 6,
  CORRSENSE_STATUS_SIZE_TOO_LARGE = 7,
  CORRSENSE_STATUS_IO_FAILURE = 8,
  CORRSENSE_STATUS_BUFFER_TOO_SMALL = 9,
  CORRSENSE_STATUS_INTERNAL_PANIC = 10,
} CorrsenseStatus;

// Opaque problem-instance handle.
typedef struct CorrsenseInstance CorrsenseInstance;

// Opaque solver-result handle.
typedef struct CorrsenseResult CorrsenseResult;

// Scalar facts about a solver result, readable in one call.
typedef struct CorrsenseSolveStats {
  double objective;
  double constraint_residual;
  double rel_err_x;
  double rel_err_f;
  size_t iterations;
  bool converged;
  bool exact;
} CorrsenseSolveStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string (do not free).
const char *corrsense_version(void);

// Detail message for the most recent failure on this thread, or NULL.
// Free with [`corrsense_string_free`].
char *corrsense_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be a pointer previously returned by a corrsense function that
// allocates a string, not yet freed; NULL is accepted.
void corrsense_string_free(char *s);

// Builds a seeded random instance: length `n`, `m` measurement rows,
// `k` signal spikes, a `gamma_c` fraction of corrupted measurements.
// On success stores a new handle in `out`.
//
// # Safety
// `out` must point to writable storage for one pointer.
enum CorrsenseStatus corrsense_instance_new(size_t n,
                                            size_t m,
                                            size_t k,
                                            double gamma_c,
                                            uint64_t seed,
                                            bool theory_mode,
                                            struct CorrsenseInstance **out);

// Parses an instance from its JSON replay form.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` must be writable.
enum CorrsenseStatus corrsense_instance_from_json(const char *json, struct CorrsenseInstance **out);

// Serializes the instance to its JSON replay form.
// Free the string with [`corrsense_string_free`].
//
// # Safety
// `instance` must be a live handle; `out` must be writable.
enum CorrsenseStatus corrsense_instance_to_json(const struct CorrsenseInstance *instance,
                                                char **out);

// Number of measurement rows of the instance (0 on NULL).
//
// # Safety
// `instance` must be NULL or a live handle.
size_t corrsense_instance_m(const struct CorrsenseInstance *instance);

// Signal length of the instance (0 on NULL).
//
// # Safety
// `instance` must be NULL or a live handle.
size_t corrsense_instance_n(const struct CorrsenseInstance *instance);

// Releases an instance handle (NULL accepted).
//
// # Safety
// `instance` must be a handle from this library, not yet freed.
void corrsense_instance_free(struct CorrsenseInstance *instance);

// Runs the weighted l1 solver (`min ||x||_1 + lambda ||f||_1` subject to
// data consistency) on the instance's measurements and judges the output
// against the instance's ground truth. `max_iter = 0` means the default.
//
// # Safety
// `instance` must be a live handle; `out` must be writable.
enum CorrsenseStatus corrsense_solve(const struct CorrsenseInstance *instance,
                                     double lambda,
                                     size_t max_iter,
                                     struct CorrsenseResult **out);

// Copies the result's scalar diagnostics into `stats`.
//
// # Safety
// `result` must be a live handle; `stats` must be writable.
enum CorrsenseStatus corrsense_result_stats(const struct CorrsenseResult *result,
                                            struct CorrsenseSolveStats *stats);

// Copies the recovered signal as interleaved (re, im) pairs into `buffer`.
// `buffer_len` is the number of f64 slots and must be at least `2 * n`.
//
// # Safety
// `result` must be a live handle; `buffer` must hold `buffer_len` f64 values.
enum CorrsenseStatus corrsense_result_signal(const struct CorrsenseResult *result,
                                             double *buffer,
                                             size_t buffer_len);

// Copies the recovered corruption as interleaved (re, im) pairs.
// `buffer_len` must be at least `2 * m`.
//
// # Safety
// `result` must be a live handle; `buffer` must hold `buffer_len` f64 values.
enum CorrsenseStatus corrsense_result_corruption(const struct CorrsenseResult *result,
                                                 double *buffer,
                                                 size_t buffer_len);

// Releases a result handle (NULL accepted).
//
// # Safety
// `result` must be a handle from this library, not yet freed.
void corrsense_result_free(struct CorrsenseResult *result);

// Builds and verifies a dual certificate for the instance at the given
// weight. Writes the overall verdict into `pass` and, when `report_json`
// is non-NULL, the full per-condition report (free the string with
// [`corrsense_string_free`]).
//
// # Safety
// `instance` must be a live handle; `pass` must be writable; `report_json`
// may be NULL or writable.
enum CorrsenseStatus corrsense_certify(const struct CorrsenseInstance *instance,
                                       double lambda,
                                       uint64_t seed,
                                       bool *pass,
                                       char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORRSENSE_H */
