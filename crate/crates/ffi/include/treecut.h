#ifndef TREECUT_H
#define TREECUT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the non-zero input/budget/internal values match the CLI exit codes.
 */
typedef enum TreecutStatus {
  TREECUT_STATUS_OK = 0,
  TREECUT_STATUS_NULL_ARGUMENT = 1,
  TREECUT_STATUS_INPUT_ERROR = 2,
  TREECUT_STATUS_BUDGET_EXCEEDED = 3,
  TREECUT_STATUS_INTERNAL_ERROR = 4,
  TREECUT_STATUS_PANIC = 5,
} TreecutStatus;

/**
 * A parsed instance with an optional tree decomposition.
 */
typedef struct TreecutInstance TreecutInstance;

/**
 * A cut with its sparsity, plus a JSON report.
 */
typedef struct TreecutResult TreecutResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until
 * the next failing call on the same thread.
 */
const char *treecut_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *treecut_version(void);

/**
 * Parses an instance in `p ssc` text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum TreecutStatus treecut_instance_parse(const char *text, struct TreecutInstance **out);

/**
 * Attaches a tree decomposition in `s td` text format; it must cover the instance.
 *
 * # Safety
 * `instance` must come from [`treecut_instance_parse`]; `text` must be NUL-terminated.
 */
enum TreecutStatus treecut_instance_set_decomposition(struct TreecutInstance *instance,
                                                      const char *text);

/**
 * Number of vertices, or 0 for NULL.
 *
 * # Safety
 * `instance` must be NULL or a live handle.
 */
uintptr_t treecut_instance_num_vertices(const struct TreecutInstance *instance);

/**
 * # Safety
 * `instance` must be NULL or a live handle; it is invalid afterwards.
 */
void treecut_instance_free(struct TreecutInstance *instance);

/**
 * Full pipeline: LP, ratio search, derandomized rounding. Uses the
 * attached decomposition or computes one exactly.
 *
 * # Safety
 * `instance` must be a live handle; `out` must be writable.
 */
enum TreecutStatus treecut_solve(const struct TreecutInstance *instance,
                                 struct TreecutResult **out);

/**
 * Exact sparsest cut by enumeration (small instances only).
 *
 * # Safety
 * `instance` must be a live handle; `out` must be writable.
 */
enum TreecutStatus treecut_oracle(const struct TreecutInstance *instance,
                                  struct TreecutResult **out);

/**
 * Number of vertices on the reported side of the cut.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
uintptr_t treecut_result_cut_size(const struct TreecutResult *result);

/**
 * Copies up to `capacity` vertex ids of the cut side into `buffer`;
 * returns how many were written.
 *
 * # Safety
 * `buffer` must have room for `capacity` values.
 */
uintptr_t treecut_result_cut(const struct TreecutResult *result,
                             uint32_t *buffer,
                             uintptr_t capacity);

/**
 * Exact sparsity as `p/q` text (`inf` when no demand is separated).
 *
 * # Safety
 * `result` must be a live handle.
 */
const char *treecut_result_sparsity_text(const struct TreecutResult *result);

/**
 * Sparsity as a double (infinity when no demand is separated).
 *
 * # Safety
 * `result` must be a live handle.
 */
double treecut_result_sparsity(const struct TreecutResult *result);

/**
 * LP ratio as a double; NaN for oracle results.
 *
 * # Safety
 * `result` must be a live handle.
 */
double treecut_result_lp_ratio(const struct TreecutResult *result);

/**
 * Full report as JSON.
 *
 * # Safety
 * `result` must be a live handle.
 */
const char *treecut_result_json(const struct TreecutResult *result);

/**
 * # Safety
 * `result` must be NULL or a live handle; it is invalid afterwards.
 */
void treecut_result_free(struct TreecutResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TREECUT_H */
