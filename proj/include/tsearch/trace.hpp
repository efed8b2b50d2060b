#pragma once

// Line-delimited JSON trace records.
//
// Each run emits, in order: one pool_init record, one attempt record per
// scored attempt, an evolution record after each evolution event, and a
// closing run_summary. All records of a run share its run_id. Infinite UCB
// scores are written as the string "inf". With redaction on, attempt records
// keep only the response digest.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsearch/engine.hpp"

namespace tsearch {

using Clock = std::function<std::int64_t()>;  // milliseconds

Clock system_clock_ms();
Clock fixed_clock(std::int64_t value = 0);

// Deterministic id for the run of `query` at dataset position `index`.
std::string make_run_id(const std::string& query, const SearchConfig& config, std::size_t index);

nlohmann::json to_json(const SearchConfig& config);
// Rejects unknown keys; absent keys keep their defaults.
SearchConfig search_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MetaThought& thought);
MetaThought thought_from_json(const nlohmann::json& j);

struct TraceOptions {
  bool redact = false;
  Clock clock = system_clock_ms();
};

// Streams records for one run; every record is flushed as soon as it is
// written so an aborted run leaves a readable partial trace.
class TraceWriter : public SearchObserver {
 public:
  TraceWriter(std::ostream& out, std::string run_id, TraceOptions options = {});

  void on_pool_init(const SearchTrace& trace) override;
  void on_attempt(const SearchTrace& trace, const Attempt& attempt) override;
  void on_evolution(const SearchTrace& trace, const EvolutionEvent& event) override;
  void on_complete(const SearchTrace& trace, const Attempt& best) override;
  void on_abort(const SearchTrace& trace, const std::string& reason) override;

  // Summary for a run that failed before the pool was built.
  void write_failed_summary(const std::string& reason);

 private:
  void emit(nlohmann::json record);

  std::ostream& out_;
  std::string run_id_;
  TraceOptions options_;
  bool init_written_ = false;
};

struct RunTrace {
  std::string run_id;
  SearchTrace trace;
  std::string status;  // completed | aborted | "" when no summary was found
  std::optional<int> best_step;
  std::string error;
  bool redacted = false;
};

// Groups records by run_id in order of first appearance. Throws Error(parse)
// naming the source and line on malformed or inconsistent records.
std::vector<RunTrace> read_traces(std::istream& in, const std::string& source_name);
std::vector<RunTrace> read_trace_file(const std::string& path);

}  // namespace tsearch
