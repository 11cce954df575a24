#ifndef STRATAL_H
#define STRATAL_H

/* Generated by cbindgen from stratal-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Synthetic pool family for `stratal_pool_generate`.
 */
typedef enum StratalCase {
  STRATAL_CASE_LINEAR = 0,
  STRATAL_CASE_CIRCULAR = 1,
  STRATAL_CASE_HYPERBOLIC = 2,
  STRATAL_CASE_BAT = 3,
} StratalCase;

/*
 Result codes of every fallible call.
 */
typedef enum StratalStatus {
  STRATAL_STATUS_OK = 0,
  STRATAL_STATUS_NULL_POINTER = 1,
  STRATAL_STATUS_INVALID_ARGUMENT = 2,
  STRATAL_STATUS_INSUFFICIENT_DATA = 3,
  STRATAL_STATUS_DEGENERATE_SCOPE = 4,
  STRATAL_STATUS_CAPACITY_EXCEEDED = 5,
  STRATAL_STATUS_POOL_EXHAUSTED = 6,
  STRATAL_STATUS_SCHEMA_ERROR = 7,
  STRATAL_STATUS_PARSE_ERROR = 8,
  STRATAL_STATUS_EMPTY_POOL = 9,
  STRATAL_STATUS_CONFIG_ERROR = 10,
  STRATAL_STATUS_IO_ERROR = 11,
  STRATAL_STATUS_RUN_FAILURE = 12,
  STRATAL_STATUS_UTF8_ERROR = 13,
} StratalStatus;

/*
 Opaque candidate pool.
 */
typedef struct StratalPool StratalPool;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Generate a synthetic pool. On success `*out` owns the new handle.

 # Safety
 `out` must be a valid pointer to writable storage for one pointer.
 */
enum StratalStatus stratal_pool_generate(enum StratalCase case_,
                                         size_t n,
                                         uint64_t seed,
                                         struct StratalPool **out);

/*
 Load a pool previously written by the CLI's `generate` (a directory with
 features.csv, outputs.csv, and pool.json).

 # Safety
 `dir` must be a NUL-terminated string; `out` must be writable.
 */
enum StratalStatus stratal_pool_load(const char *dir, struct StratalPool **out);

/*
 Release a pool handle. A null pointer is a no-op.

 # Safety
 `pool` must have been returned by this library and not freed before.
 */
void stratal_pool_free(struct StratalPool *pool);

/*
 Number of candidates, or 0 for a null handle.

 # Safety
 `pool` must be a live handle or null.
 */
size_t stratal_pool_len(const struct StratalPool *pool);

/*
 Number of feature columns, or 0 for a null handle.

 # Safety
 `pool` must be a live handle or null.
 */
size_t stratal_pool_feature_dim(const struct StratalPool *pool);

/*
 Number of output axes, or 0 for a null handle.

 # Safety
 `pool` must be a live handle or null.
 */
size_t stratal_pool_output_dim(const struct StratalPool *pool);

/*
 Size of the ground-truth Pareto frontier, or 0 for a null handle.

 # Safety
 `pool` must be a live handle or null.
 */
size_t stratal_pool_frontier_size(const struct StratalPool *pool);

/*
 Number of strata, or 0 for a null handle.

 # Safety
 `pool` must be a live handle or null.
 */
size_t stratal_pool_stratum_count(const struct StratalPool *pool);

/*
 Ground-truth stratum number (1 = frontier) of one candidate.

 # Safety
 `pool` must be a live handle or null; `out` must be writable.
 */
enum StratalStatus stratal_pool_stratum_of(const struct StratalPool *pool,
                                           size_t index,
                                           size_t *out);

/*
 Execute every strategy of an experiment config file, writing trajectory
 CSVs and the manifest exactly like the CLI's `run` subcommand.

 # Safety
 `config_path` must be a NUL-terminated string.
 */
enum StratalStatus stratal_run_experiment(const char *config_path);

/*
 Copy the calling thread's most recent error message (NUL-terminated)
 into `buf`. Returns the full message length in bytes, excluding the NUL;
 if it is `>= cap` the message was truncated. With a null or empty buffer
 the call just reports the required length.

 # Safety
 `buf` must point to at least `cap` writable bytes, or be null.
 */
size_t stratal_last_error_message(char *buf, size_t cap);

/*
 Library version as a static NUL-terminated string.
 */
const char *stratal_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRATAL_H */
