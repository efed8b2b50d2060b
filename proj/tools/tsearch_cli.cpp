// tsearch: command-line front end over the C API.
//
// Exit statuses: 0 success, 1 usage or invalid argument, 2 configuration,
// 3 backend failure or aborted runs, 4 file I/O, 5 malformed input,
// 10 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "tsearch/tsearch.h"

namespace {

void log_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

int exit_code(ts_status s) {
  switch (s) {
    case TS_OK: return 0;
    case TS_ERR_INVALID_ARGUMENT:
    case TS_ERR_BUFFER_TOO_SMALL: return 1;
    case TS_ERR_CONFIG: return 2;
    case TS_ERR_BACKEND:
    case TS_ERR_ABORTED: return 3;
    case TS_ERR_IO:
    case TS_ERR_NOT_FOUND: return 4;
    case TS_ERR_PARSE:
    case TS_ERR_EMPTY: return 5;
    case TS_ERR_INTERNAL: return 10;
  }
  return 10;
}

int report_status(ts_status s) {
  if (s != TS_OK) std::fprintf(stderr, "error (%s): %s\n", ts_status_string(s), ts_last_error());
  return exit_code(s);
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-thought search over LLM backends"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ts_version());

  std::string config, query, dataset, trace, corpus, out, out_dir, outcomes, table;
  bool redact = false, fixed_clock = false, lenient = false;
  int concurrency = 0;
  std::vector<std::string> traces, modes;
  std::vector<int> budgets;

  auto* run = app.add_subcommand("run", "search one query or every record of a dataset, writing a trace");
  run->add_option("-c,--config", config, "run configuration (JSON)")->required();
  auto* q = run->add_option("-q,--query", query, "single query text");
  auto* d = run->add_option("-d,--dataset", dataset, "dataset file (JSONL)");
  q->excludes(d);
  run->add_option("-t,--trace", trace, "trace output path (JSONL)")->required();
  run->add_flag("--redact", redact, "store response digests only");
  run->add_flag("--fixed-clock", fixed_clock, "write ts_ms = 0 so reruns are byte-identical");
  run->add_option("-j,--concurrency", concurrency, "parallel queries (overrides the config)")->check(CLI::PositiveNumber);

  auto* index = app.add_subcommand("index", "embed a corpus and write a retrieval index");
  index->add_option("-c,--config", config, "configuration providing backends.embed")->required();
  index->add_option("--corpus", corpus, "corpus file (JSONL of {task, response})")->required();
  index->add_option("-o,--out", out, "index output path")->required();
  index->add_flag("--lenient", lenient, "skip malformed lines instead of aborting");

  auto* report = app.add_subcommand("report", "summarize traces as CSV");
  report->add_option("traces", traces, "trace files")->required();
  report->add_option("-o,--out-dir", out_dir, "output directory")->required();

  auto* bench = app.add_subcommand("bench", "evaluate modes and budgets over a labelled dataset");
  bench->add_option("-c,--config", config, "run configuration (JSON)")->required();
  bench->add_option("-d,--dataset", dataset, "evaluation dataset (JSONL)")->required();
  bench->add_option("-m,--modes", modes, "one_pass, cot, best_of_n, best_of_n_cot, metascale")
      ->required()
      ->delimiter(',');
  bench->add_option("-b,--budgets", budgets, "sampling budgets in 1..128")->delimiter(',');
  bench->add_option("--outcomes", outcomes, "per-item outcomes (JSONL)")->required();
  bench->add_option("--table", table, "accuracy table (CSV)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*run) {
    if (query.empty() == dataset.empty()) {
      std::fprintf(stderr, "run: give exactly one of --query or --dataset\n");
      return 1;
    }
    ts_run_options o{};
    o.config_path = config.c_str();
    o.query = query.empty() ? nullptr : query.c_str();
    o.dataset_path = dataset.empty() ? nullptr : dataset.c_str();
    o.trace_path = trace.c_str();
    o.redact = redact;
    o.fixed_clock = fixed_clock;
    o.concurrency = concurrency;
    o.log = &log_line;
    ts_run_result* result = nullptr;
    const ts_status s = ts_run(&o, &result);
    if (result) {
      for (size_t i = 0; i < ts_run_result_runs(result); ++i) std::printf("%s\n", ts_run_result_run_id(result, i));
      double reward = 0.0;
      if (!query.empty() && ts_run_result_best_reward(result, &reward)) {
        std::printf("best reward: %.6g\n%s\n", reward, ts_run_result_best_response(result));
      }
      ts_run_result_destroy(result);
    }
    return report_status(s);
  }
  if (*index) {
    ts_index_options o{};
    o.corpus_path = corpus.c_str();
    o.config_path = config.c_str();
    o.out_path = out.c_str();
    o.lenient = lenient;
    o.log = &log_line;
    size_t records = 0;
    return report_status(ts_index(&o, &records));
  }
  if (*report) {
    const auto paths = c_strings(traces);
    return report_status(ts_report(paths.data(), paths.size(), out_dir.c_str(), &log_line, nullptr));
  }
  if (*bench) {
    const auto mode_ptrs = c_strings(modes);
    ts_bench_options o{};
    o.config_path = config.c_str();
    o.dataset_path = dataset.c_str();
    o.modes = mode_ptrs.data();
    o.n_modes = mode_ptrs.size();
    o.budgets = budgets.data();
    o.n_budgets = budgets.size();
    o.outcomes_path = outcomes.c_str();
    o.table_path = table.c_str();
    o.log = &log_line;
    size_t failed = 0;
    return report_status(ts_bench(&o, &failed));
  }
  return 1;
}
