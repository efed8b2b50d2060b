/* C interface to the thought-search library.
 *
 * Every function returns a ts_status. On failure a message for the calling
 * thread is available from ts_last_error() until the next call on that
 * thread. Handles are opaque and owned by the caller once created; pass them
 * back to the matching *_destroy function. Strings returned by accessors stay
 * valid until their handle is destroyed.
 */
#ifndef TSEARCH_TSEARCH_H
#define TSEARCH_TSEARCH_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(TSEARCH_BUILDING)
#    define TS_API __declspec(dllexport)
#  else
#    define TS_API __declspec(dllimport)
#  endif
#else
#  define TS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ts_status {
  TS_OK = 0,
  TS_ERR_INVALID_ARGUMENT = 1,
  TS_ERR_NOT_FOUND = 2,
  TS_ERR_EMPTY = 3,        /* empty pool or index */
  TS_ERR_CONFIG = 4,
  TS_ERR_BACKEND = 5,
  TS_ERR_IO = 6,
  TS_ERR_PARSE = 7,
  TS_ERR_ABORTED = 8,      /* some runs or bench cells failed; outputs were still written */
  TS_ERR_BUFFER_TOO_SMALL = 9,
  TS_ERR_INTERNAL = 10
} ts_status;

TS_API const char* ts_status_string(ts_status status);
TS_API const char* ts_last_error(void);
TS_API const char* ts_version(void);

/* Receives progress and diagnostics, one line at a time without the newline. */
typedef void (*ts_log_fn)(const char* line, void* user);

/* ---- thought pool ---------------------------------------------------- */

typedef struct ts_pool ts_pool;

TS_API ts_status ts_pool_create(ts_pool** out);
TS_API void ts_pool_destroy(ts_pool* pool);

/* Adds a thought. generation 0 means an initial thought (parents must be
 * empty); later generations need at least one existing parent. *added is set
 * to 0 when an identical mindset/strategy pair is already present. */
TS_API ts_status ts_pool_add(ts_pool* pool, const char* id, const char* mindset, const char* strategy, int generation,
                             const char* const* parent_ids, size_t n_parents, int* added);
TS_API ts_status ts_pool_record(ts_pool* pool, const char* id, double reward);
TS_API ts_status ts_pool_size(const ts_pool* pool, size_t* out);
TS_API ts_status ts_pool_stats(const ts_pool* pool, const char* id, long long* pulls, double* reward_sum);
TS_API ts_status ts_pool_ucb(const ts_pool* pool, const char* id, long long t, double beta, double* score);

/* Copies the selected id into buf (NUL-terminated). *needed receives the
 * required size including the terminator; TS_ERR_BUFFER_TOO_SMALL when
 * buf_len is short. */
TS_API ts_status ts_pool_select(const ts_pool* pool, long long t, double beta, char* buf, size_t buf_len,
                                size_t* needed);
/* Writes up to `p` ids in UCB order as a newline-separated list. */
TS_API ts_status ts_pool_top(const ts_pool* pool, long long t, double beta, size_t p, char* buf, size_t buf_len,
                             size_t* needed);

/* ---- commands -------------------------------------------------------- */

typedef struct ts_run_options {
  const char* config_path;
  const char* query;        /* exactly one of query / dataset_path */
  const char* dataset_path;
  const char* trace_path;
  int redact;
  int fixed_clock;
  int concurrency;          /* 0: use the config file's value */
  ts_log_fn log;
  void* log_user;
} ts_run_options;

typedef struct ts_run_result ts_run_result;

/* *out is filled whenever the trace file was written, including when some
 * runs aborted (TS_ERR_ABORTED). */
TS_API ts_status ts_run(const ts_run_options* options, ts_run_result** out);
TS_API size_t ts_run_result_runs(const ts_run_result* result);
TS_API size_t ts_run_result_aborted(const ts_run_result* result);
TS_API const char* ts_run_result_run_id(const ts_run_result* result, size_t i);
TS_API const char* ts_run_result_best_response(const ts_run_result* result);
TS_API int ts_run_result_best_reward(const ts_run_result* result, double* reward);
TS_API void ts_run_result_destroy(ts_run_result* result);

typedef struct ts_index_options {
  const char* corpus_path;
  const char* config_path;
  const char* out_path;
  int lenient;              /* skip malformed lines instead of aborting */
  ts_log_fn log;
  void* log_user;
} ts_index_options;

TS_API ts_status ts_index(const ts_index_options* options, size_t* records);

TS_API ts_status ts_report(const char* const* trace_paths, size_t n_traces, const char* out_dir, ts_log_fn log,
                           void* log_user);

typedef struct ts_bench_options {
  const char* config_path;
  const char* dataset_path;
  const char* const* modes;
  size_t n_modes;
  const int* budgets;
  size_t n_budgets;
  const char* outcomes_path;
  const char* table_path;
  ts_log_fn log;
  void* log_user;
} ts_bench_options;

/* TS_ERR_ABORTED when at least one cell failed; all outputs are written. */
TS_API ts_status ts_bench(const ts_bench_options* options, size_t* failed_cells);

#ifdef __cplusplus
}
#endif

#endif /* TSEARCH_TSEARCH_H */
