#include "tsearch/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "text_util.hpp"
#include "tsearch/corpus_io.hpp"
#include "tsearch/dataset.hpp"
#include "tsearch/errors.hpp"
#include "tsearch/report.hpp"
#include "tsearch/run_config.hpp"
#include "tsearch/trace.hpp"

namespace tsearch {

using nlohmann::json;

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  return out;
}

void check_written(std::ostream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::io, "write failed on '" + path + "'");
}

struct QueryOutcome {
  std::string run_id;
  bool completed = false;
  std::string error;
  std::string best_response;
  double best_reward = 0.0;
};

QueryOutcome run_one(const RunConfig& config, const CorpusIndex* corpus, const std::string& query, std::size_t index,
                     std::ostream& out, const TraceOptions& trace_options) {
  SearchConfig search = config.search;
  search.seed += index;
  QueryOutcome outcome;
  outcome.run_id = make_run_id(query, search, index);
  TraceWriter writer(out, outcome.run_id, trace_options);
  try {
    BackendSet backends(config, search.seed);
    Backends b{backends.chat(), backends.reward(), backends.embed(), corpus, backends.chat_model()};
    auto result = run_search(query, search, b, &writer);
    outcome.completed = true;
    outcome.best_response = result.best.response;
    outcome.best_reward = result.best.reward;
  } catch (const SearchAborted& e) {
    outcome.error = e.what();
  } catch (const Error& e) {
    outcome.error = e.what();
    writer.write_failed_summary(e.what());
  }
  return outcome;
}

}  // namespace

RunSummary run_command(const RunOptions& options, std::ostream& log) {
  if (options.query.has_value() == options.dataset_path.has_value())
    throw Error(ErrorCode::invalid_argument, "give exactly one of a query or a dataset");
  if (options.trace_path.empty()) throw Error(ErrorCode::invalid_argument, "a trace output path is required");

  const RunConfig config = load_run_config(options.config_path);
  check_credentials(config);
  const int concurrency = options.concurrency.value_or(config.concurrency);
  if (concurrency < 1) throw Error(ErrorCode::invalid_argument, "concurrency must be >= 1");

  std::vector<std::string> queries;
  if (options.query) {
    if (text::trim(*options.query).empty()) throw Error(ErrorCode::invalid_argument, "query is empty");
    queries.push_back(*options.query);
  } else {
    for (auto& entry : load_dataset(*options.dataset_path)) queries.push_back(std::move(entry.query));
  }

  std::optional<CorpusIndex> corpus;
  if (config.corpus_index) corpus = load_corpus_index(*config.corpus_index);
  const CorpusIndex* corpus_ptr = corpus ? &*corpus : nullptr;

  TraceOptions trace_options;
  trace_options.redact = options.redact;
  trace_options.clock = options.fixed_clock ? fixed_clock(0) : system_clock_ms();

  std::ofstream out = open_output(options.trace_path);
  std::vector<QueryOutcome> outcomes(queries.size());

  if (concurrency == 1 || queries.size() == 1) {
    for (std::size_t i = 0; i < queries.size(); ++i)
      outcomes[i] = run_one(config, corpus_ptr, queries[i], i, out, trace_options);
  } else {
    // Each run buffers its records; buffers are appended in dataset order as
    // soon as every earlier run has been written.
    std::vector<std::string> buffers(queries.size());
    std::vector<bool> done(queries.size(), false);
    std::size_t next_to_write = 0;
    std::atomic<std::size_t> next_job{0};
    std::mutex mutex;
    auto flush_ready = [&] {
      while (next_to_write < queries.size() && done[next_to_write]) {
        out << buffers[next_to_write];
        out.flush();
        std::string().swap(buffers[next_to_write]);
        ++next_to_write;
      }
    };
    auto worker = [&] {
      for (std::size_t i = next_job++; i < queries.size(); i = next_job++) {
        std::ostringstream buf;
        auto result = run_one(config, corpus_ptr, queries[i], i, buf, trace_options);
        std::lock_guard lock(mutex);
        outcomes[i] = std::move(result);
        buffers[i] = buf.str();
        done[i] = true;
        flush_ready();
      }
    };
    std::vector<std::thread> threads;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(concurrency), queries.size());
    for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  check_written(out, options.trace_path);

  RunSummary summary;
  for (const auto& o : outcomes) {
    summary.run_ids.push_back(o.run_id);
    if (o.completed) {
      ++summary.completed;
    } else {
      ++summary.aborted;
      log << "run " << o.run_id << " aborted: " << o.error << '\n';
    }
  }
  if (!outcomes.empty() && outcomes.front().completed) {
    summary.best_response = outcomes.front().best_response;
    summary.best_reward = outcomes.front().best_reward;
  }
  log << summary.completed << " of " << outcomes.size() << " runs completed; trace written to " << options.trace_path
      << '\n';
  return summary;
}

std::size_t index_command(const IndexOptions& options, std::ostream& log) {
  const RunConfig config = load_run_config(options.config_path);
  if (!config.embed) throw Error(ErrorCode::config, options.config_path + ": backends.embed is required for indexing");
  check_credentials(config);
  auto embedder = make_embed_backend(*config.embed, 0);
  IndexBuildOptions build;
  build.strict = options.strict;
  const auto report = build_index(options.corpus_path, *embedder, options.out_path, build);
  for (const auto& s : report.skipped) log << "skipped " << s << '\n';
  log << "indexed " << report.records << " examples (dimension " << report.dimension << ") into " << options.out_path
      << '\n';
  return report.records;
}

void report_command(const ReportOptions& options, std::ostream& log) {
  if (options.trace_paths.empty()) throw Error(ErrorCode::invalid_argument, "at least one trace file is required");
  std::vector<RunTrace> runs;
  for (const auto& path : options.trace_paths) {
    auto part = read_trace_file(path);
    for (auto& r : part) runs.push_back(std::move(r));
  }
  const Report report = build_report(runs);

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create '" + options.out_dir + "': " + ec.message());
  const auto dir = std::filesystem::path(options.out_dir);
  const std::pair<const char*, void (*)(std::ostream&, const Report&)> files[] = {
      {"selection_by_generation.csv", &write_generation_csv},
      {"selection_by_bucket.csv", &write_bucket_csv},
      {"best_so_far.csv", &write_curve_csv},
  };
  for (const auto& [name, writer] : files) {
    const auto path = (dir / name).string();
    auto out = open_output(path);
    writer(out, report);
    check_written(out, path);
  }
  log << "reported " << report.runs << " runs, " << report.attempts << " attempts into " << options.out_dir << '\n';
}

namespace {

struct CellSpec {
  EvalMode mode;
  int budget;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<BenchCell> bench_command(const BenchOptions& options, std::ostream& log) {
  if (options.modes.empty()) throw Error(ErrorCode::invalid_argument, "at least one mode is required");
  std::vector<EvalMode> modes;
  for (const auto& m : options.modes) modes.push_back(eval_mode_from_string(m));
  const bool needs_budgets = std::any_of(modes.begin(), modes.end(), [](EvalMode m) {
    return m != EvalMode::one_pass && m != EvalMode::cot;
  });
  if (needs_budgets && options.budgets.empty()) throw Error(ErrorCode::invalid_argument, "at least one budget is required");
  for (int b : options.budgets) {
    if (b < 1 || b > 128) throw Error(ErrorCode::invalid_argument, "budget " + std::to_string(b) + " is outside 1..128");
  }

  std::vector<CellSpec> cells;
  for (auto m : modes) {
    const bool one_pass = m == EvalMode::one_pass || m == EvalMode::cot;
    if (one_pass) {
      cells.push_back({m, 1});
      continue;
    }
    for (int b : options.budgets) cells.push_back({m, b});
  }
  std::sort(cells.begin(), cells.end(), [](const CellSpec& a, const CellSpec& b) {
    return std::pair(static_cast<int>(a.mode), a.budget) < std::pair(static_cast<int>(b.mode), b.budget);
  });
  cells.erase(std::unique(cells.begin(), cells.end(),
                          [](const CellSpec& a, const CellSpec& b) { return a.mode == b.mode && a.budget == b.budget; }),
              cells.end());

  const RunConfig config = load_run_config(options.config_path);
  check_credentials(config);
  const auto dataset = load_dataset(options.dataset_path);
  std::vector<EvalItem> items;
  for (const auto& e : dataset) {
    if (!e.item) throw Error(ErrorCode::parse, options.dataset_path + ": item '" + e.id + "' has no reference answer");
    items.push_back(*e.item);
  }
  std::optional<CorpusIndex> corpus;
  if (config.corpus_index) corpus = load_corpus_index(*config.corpus_index);

  auto outcomes_out = open_output(options.outcomes_path);
  std::vector<BenchCell> results;
  for (const auto& spec : cells) {
    BenchCell cell;
    cell.mode = spec.mode;
    cell.budget = spec.budget;
    cell.items = items.size();
    cell.status = "ok";
    double reward_sum = 0.0;
    std::size_t reward_count = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::uint64_t seed = config.search.seed + i;
      json record = {{"record_kind", "outcome"}, {"mode", to_string(spec.mode)}, {"budget", spec.budget},
                     {"item_id", items[i].id}};
      try {
        BackendSet backends(config, seed);
        EvalBackends eb{backends.chat(), backends.reward(), backends.embed(),
                        corpus ? &*corpus : nullptr, backends.chat_model(), config.search.max_tokens};
        EvalOutcome o;
        if (spec.mode == EvalMode::metascale) {
          SearchConfig sc = config.search;
          sc.seed = seed;
          sc.budget = spec.budget;
          o = run_metascale(items[i], eb, sc);
        } else {
          o = run_baseline(spec.mode, items[i], eb, spec.budget, seed);
        }
        ++cell.completed;
        if (o.correct) ++cell.correct;
        if (o.best_reward) {
          reward_sum += *o.best_reward;
          ++reward_count;
        }
        record["status"] = "ok";
        record["predicted"] = o.predicted;
        record["reference"] = items[i].reference;
        record["correct"] = o.correct;
        record["n_samples_used"] = o.n_samples_used;
        record["best_reward"] = o.best_reward ? json(*o.best_reward) : json(nullptr);
        record["response_digest"] = text::sha256_hex(o.response);
      } catch (const Error& e) {
        cell.status = "failed";
        if (cell.error.empty()) cell.error = e.what();
        record["status"] = "failed";
        record["error"] = e.what();
      }
      outcomes_out << record.dump() << '\n';
    }
    if (reward_count > 0) cell.mean_best_reward = reward_sum / static_cast<double>(reward_count);
    if (cell.status == "failed")
      log << "cell " << to_string(cell.mode) << "@" << cell.budget << " failed: " << cell.error << '\n';
    results.push_back(std::move(cell));
  }

  json summary = {{"record_kind", "summary"}, {"cells", json::array()}};
  for (const auto& c : results) {
    summary["cells"].push_back({{"mode", to_string(c.mode)},
                                {"budget", c.budget},
                                {"items", c.items},
                                {"completed", c.completed},
                                {"correct", c.correct},
                                {"accuracy", c.accuracy() ? json(*c.accuracy()) : json(nullptr)},
                                {"mean_best_reward", c.mean_best_reward ? json(*c.mean_best_reward) : json(nullptr)},
                                {"status", c.status}});
  }
  outcomes_out << summary.dump() << '\n';
  check_written(outcomes_out, options.outcomes_path);

  auto table = open_output(options.table_path);
  table << "mode,budget,items,completed,correct,accuracy,mean_best_reward,status\n";
  for (const auto& c : results) {
    table << to_string(c.mode) << ',' << c.budget << ',' << c.items << ',' << c.completed << ',' << c.correct << ','
          << (c.accuracy() ? num(*c.accuracy()) : "") << ','
          << (c.mean_best_reward ? num(*c.mean_best_reward) : "") << ',' << c.status << '\n';
  }
  check_written(table, options.table_path);
  log << "benchmarked " << results.size() << " cells over " << items.size() << " items\n";
  return results;
}

}  // namespace tsearch
