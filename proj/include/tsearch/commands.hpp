#pragma once

// The four user-facing operations. Each throws tsearch::Error on failure;
// the caller maps error codes to exit statuses.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tsearch/eval_harness.hpp"

namespace tsearch {

struct RunOptions {
  std::string config_path;
  std::optional<std::string> query;
  std::optional<std::string> dataset_path;
  std::string trace_path;
  bool redact = false;
  bool fixed_clock = false;          // ts_ms = 0 everywhere, for byte-stable traces
  std::optional<int> concurrency;    // overrides the config file
};

struct RunSummary {
  std::vector<std::string> run_ids;
  std::size_t completed = 0;
  std::size_t aborted = 0;
  std::string best_response;  // of the first run, when it completed
  std::optional<double> best_reward;
};

// Everything that can be rejected up front (config, credentials, dataset,
// corpus index) is checked before the trace file is created. Aborted runs
// are recorded and counted; the remaining queries still run.
RunSummary run_command(const RunOptions& options, std::ostream& log);

struct IndexOptions {
  std::string corpus_path;
  std::string config_path;  // its backends.embed is used
  std::string out_path;
  bool strict = true;
};

std::size_t index_command(const IndexOptions& options, std::ostream& log);

struct ReportOptions {
  std::vector<std::string> trace_paths;
  std::string out_dir;
};

// Writes selection_by_generation.csv, selection_by_bucket.csv and
// best_so_far.csv into out_dir.
void report_command(const ReportOptions& options, std::ostream& log);

struct BenchOptions {
  std::string config_path;
  std::string dataset_path;
  std::vector<std::string> modes;
  std::vector<int> budgets;
  std::string outcomes_path;  // JSONL, one record per item and cell plus a summary
  std::string table_path;     // CSV accuracy table
};

struct BenchCell {
  EvalMode mode = EvalMode::one_pass;
  int budget = 1;
  std::size_t items = 0;
  std::size_t completed = 0;
  std::size_t correct = 0;
  std::optional<double> mean_best_reward;
  std::string status;  // ok | failed
  std::string error;

  std::optional<double> accuracy() const {
    if (completed == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(completed);
  }
};

// Cells are mode x budget; 1-pass modes form a single budget-1 cell. Bad
// modes or budgets are rejected before anything runs. A cell whose item
// fails is marked failed and the remaining cells still run.
std::vector<BenchCell> bench_command(const BenchOptions& options, std::ostream& log);

}  // namespace tsearch
