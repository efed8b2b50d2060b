#include "tsearch/tsearch.h"

#include <cstring>
#include <json.hpp>
#include <new>
#include <ostream>
#include <streambuf>
#include <string>

#include "tsearch/commands.hpp"
#include "tsearch/errors.hpp"
#include "tsearch/thought_pool.hpp"

struct ts_pool {
  tsearch::ThoughtPool pool;
};

struct ts_run_result {
  tsearch::RunSummary summary;
};

namespace {

thread_local std::string g_last_error;

ts_status status_for(tsearch::ErrorCode code) {
  using tsearch::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return TS_ERR_INVALID_ARGUMENT;
    case ErrorCode::not_found: return TS_ERR_NOT_FOUND;
    case ErrorCode::empty_pool:
    case ErrorCode::empty_index: return TS_ERR_EMPTY;
    case ErrorCode::shape: return TS_ERR_INVALID_ARGUMENT;
    case ErrorCode::backend:
    case ErrorCode::missing_script:
    case ErrorCode::initialization: return TS_ERR_BACKEND;
    case ErrorCode::config: return TS_ERR_CONFIG;
    case ErrorCode::io: return TS_ERR_IO;
    case ErrorCode::parse: return TS_ERR_PARSE;
    case ErrorCode::aborted: return TS_ERR_ABORTED;
  }
  return TS_ERR_INTERNAL;
}

ts_status fail(ts_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class Fn>
ts_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const tsearch::Error& e) {
    return fail(status_for(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(TS_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TS_ERR_INTERNAL, "unknown error");
  }
}

ts_status copy_out(const std::string& value, char* buf, size_t buf_len, size_t* needed) {
  if (needed) *needed = value.size() + 1;
  if (buf == nullptr || buf_len < value.size() + 1)
    return fail(TS_ERR_BUFFER_TOO_SMALL, "buffer needs " + std::to_string(value.size() + 1) + " bytes");
  std::memcpy(buf, value.c_str(), value.size() + 1);
  return TS_OK;
}

std::string require(const char* s, const char* name) {
  if (s == nullptr) throw tsearch::Error(tsearch::ErrorCode::invalid_argument, std::string(name) + " is null");
  return s;
}

// Forwards complete lines to a C callback; discards output when none is set.
class LineBuf : public std::streambuf {
 public:
  LineBuf(ts_log_fn fn, void* user) : fn_(fn), user_(user) {}
  ~LineBuf() override {
    if (!line_.empty()) emit();
  }

 protected:
  int overflow(int ch) override {
    if (ch == traits_type::eof()) return 0;
    if (ch == '\n') emit();
    else line_ += static_cast<char>(ch);
    return ch;
  }

 private:
  void emit() {
    if (fn_) fn_(line_.c_str(), user_);
    line_.clear();
  }
  ts_log_fn fn_;
  void* user_;
  std::string line_;
};

}  // namespace

extern "C" {

const char* ts_status_string(ts_status status) {
  switch (status) {
    case TS_OK: return "ok";
    case TS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TS_ERR_NOT_FOUND: return "not found";
    case TS_ERR_EMPTY: return "empty";
    case TS_ERR_CONFIG: return "configuration error";
    case TS_ERR_BACKEND: return "backend error";
    case TS_ERR_IO: return "i/o error";
    case TS_ERR_PARSE: return "parse error";
    case TS_ERR_ABORTED: return "aborted";
    case TS_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case TS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ts_last_error(void) { return g_last_error.c_str(); }

const char* ts_version(void) { return "0.1.0"; }

ts_status ts_pool_create(ts_pool** out) {
  return guarded([&] {
    if (out == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "out is null");
    *out = new ts_pool();
    return TS_OK;
  });
}

void ts_pool_destroy(ts_pool* pool) { delete pool; }

ts_status ts_pool_add(ts_pool* pool, const char* id, const char* mindset, const char* strategy, int generation,
                      const char* const* parent_ids, size_t n_parents, int* added) {
  return guarded([&] {
    if (pool == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "pool is null");
    tsearch::MetaThought t;
    t.id = require(id, "id");
    t.mindset = require(mindset, "mindset");
    t.strategy = require(strategy, "strategy");
    t.generation = generation;
    t.origin = generation == 0 ? tsearch::OriginKind::self_composed : tsearch::OriginKind::evolved;
    if (n_parents > 0 && parent_ids == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "parent_ids is null");
    for (size_t i = 0; i < n_parents; ++i) t.parent_ids.push_back(require(parent_ids[i], "parent id"));
    const bool ok = pool->pool.add(std::move(t));
    if (added) *added = ok ? 1 : 0;
    return TS_OK;
  });
}

ts_status ts_pool_record(ts_pool* pool, const char* id, double reward) {
  return guarded([&] {
    if (pool == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "pool is null");
    pool->pool.record_reward(require(id, "id"), reward);
    return TS_OK;
  });
}

ts_status ts_pool_size(const ts_pool* pool, size_t* out) {
  return guarded([&] {
    if (pool == nullptr || out == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "null argument");
    *out = pool->pool.size();
    return TS_OK;
  });
}

ts_status ts_pool_stats(const ts_pool* pool, const char* id, long long* pulls, double* reward_sum) {
  return guarded([&] {
    if (pool == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "pool is null");
    const auto& arm = pool->pool.at(require(id, "id")).arm;
    if (pulls) *pulls = arm.pull_count();
    if (reward_sum) *reward_sum = arm.reward_sum();
    return TS_OK;
  });
}

ts_status ts_pool_ucb(const ts_pool* pool, const char* id, long long t, double beta, double* score) {
  return guarded([&] {
    if (pool == nullptr || score == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "null argument");
    *score = tsearch::ucb_score(pool->pool.at(require(id, "id")).arm, t, beta);
    return TS_OK;
  });
}

ts_status ts_pool_select(const ts_pool* pool, long long t, double beta, char* buf, size_t buf_len, size_t* needed) {
  return guarded([&] {
    if (pool == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "pool is null");
    return copy_out(pool->pool.select(t, beta), buf, buf_len, needed);
  });
}

ts_status ts_pool_top(const ts_pool* pool, long long t, double beta, size_t p, char* buf, size_t buf_len,
                      size_t* needed) {
  return guarded([&] {
    if (pool == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "pool is null");
    std::string joined;
    for (const auto& id : pool->pool.top_by_ucb(t, beta, p)) {
      if (!joined.empty()) joined += '\n';
      joined += id;
    }
    return copy_out(joined, buf, buf_len, needed);
  });
}

ts_status ts_run(const ts_run_options* options, ts_run_result** out) {
  return guarded([&] {
    if (options == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "options is null");
    if (out) *out = nullptr;
    tsearch::RunOptions o;
    o.config_path = require(options->config_path, "config_path");
    if (options->query) o.query = options->query;
    if (options->dataset_path) o.dataset_path = options->dataset_path;
    o.trace_path = require(options->trace_path, "trace_path");
    o.redact = options->redact != 0;
    o.fixed_clock = options->fixed_clock != 0;
    if (options->concurrency > 0) o.concurrency = options->concurrency;
    else if (options->concurrency < 0) return fail(TS_ERR_INVALID_ARGUMENT, "concurrency must be >= 0");

    LineBuf buf(options->log, options->log_user);
    std::ostream log(&buf);
    auto summary = tsearch::run_command(o, log);
    const bool partial = summary.aborted > 0;
    const std::string message =
        partial ? std::to_string(summary.aborted) + " of " + std::to_string(summary.run_ids.size()) + " runs aborted"
                : "";
    if (out) *out = new ts_run_result{std::move(summary)};
    return partial ? fail(TS_ERR_ABORTED, message) : TS_OK;
  });
}

size_t ts_run_result_runs(const ts_run_result* result) { return result ? result->summary.run_ids.size() : 0; }

size_t ts_run_result_aborted(const ts_run_result* result) { return result ? result->summary.aborted : 0; }

const char* ts_run_result_run_id(const ts_run_result* result, size_t i) {
  if (result == nullptr || i >= result->summary.run_ids.size()) return nullptr;
  return result->summary.run_ids[i].c_str();
}

const char* ts_run_result_best_response(const ts_run_result* result) {
  return result ? result->summary.best_response.c_str() : nullptr;
}

int ts_run_result_best_reward(const ts_run_result* result, double* reward) {
  if (result == nullptr || !result->summary.best_reward) return 0;
  if (reward) *reward = *result->summary.best_reward;
  return 1;
}

void ts_run_result_destroy(ts_run_result* result) { delete result; }

ts_status ts_index(const ts_index_options* options, size_t* records) {
  return guarded([&] {
    if (options == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "options is null");
    tsearch::IndexOptions o;
    o.corpus_path = require(options->corpus_path, "corpus_path");
    o.config_path = require(options->config_path, "config_path");
    o.out_path = require(options->out_path, "out_path");
    o.strict = options->lenient == 0;
    LineBuf buf(options->log, options->log_user);
    std::ostream log(&buf);
    const auto n = tsearch::index_command(o, log);
    if (records) *records = n;
    return TS_OK;
  });
}

ts_status ts_report(const char* const* trace_paths, size_t n_traces, const char* out_dir, ts_log_fn log_fn,
                    void* log_user) {
  return guarded([&] {
    if (n_traces > 0 && trace_paths == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "trace_paths is null");
    tsearch::ReportOptions o;
    for (size_t i = 0; i < n_traces; ++i) o.trace_paths.push_back(require(trace_paths[i], "trace path"));
    o.out_dir = require(out_dir, "out_dir");
    LineBuf buf(log_fn, log_user);
    std::ostream log(&buf);
    tsearch::report_command(o, log);
    return TS_OK;
  });
}

ts_status ts_bench(const ts_bench_options* options, size_t* failed_cells) {
  return guarded([&] {
    if (options == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "options is null");
    tsearch::BenchOptions o;
    o.config_path = require(options->config_path, "config_path");
    o.dataset_path = require(options->dataset_path, "dataset_path");
    o.outcomes_path = require(options->outcomes_path, "outcomes_path");
    o.table_path = require(options->table_path, "table_path");
    if (options->n_modes > 0 && options->modes == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "modes is null");
    if (options->n_budgets > 0 && options->budgets == nullptr) return fail(TS_ERR_INVALID_ARGUMENT, "budgets is null");
    for (size_t i = 0; i < options->n_modes; ++i) o.modes.push_back(require(options->modes[i], "mode"));
    o.budgets.assign(options->budgets, options->budgets + options->n_budgets);
    LineBuf buf(options->log, options->log_user);
    std::ostream log(&buf);
    const auto cells = tsearch::bench_command(o, log);
    size_t failed = 0;
    for (const auto& c : cells) failed += c.status == "ok" ? 0 : 1;
    if (failed_cells) *failed_cells = failed;
    return failed > 0 ? fail(TS_ERR_ABORTED, std::to_string(failed) + " benchmark cells failed") : TS_OK;
  });
}

}  // extern "C"
