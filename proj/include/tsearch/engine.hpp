#pragma once

// The budgeted search loop: select by UCB, generate under the selected
// meta-thought, score, update, and evolve every `interval` attempts.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsearch/backends.hpp"
#include "tsearch/errors.hpp"
#include "tsearch/evolver.hpp"
#include "tsearch/initializer.hpp"
#include "tsearch/search_config.hpp"
#include "tsearch/thought_pool.hpp"

namespace tsearch {

struct Attempt {
  int step = 0;  // 1-based attempt index t
  std::string thought_id;
  int thought_generation = 0;
  Messages prompt;
  std::string response;
  double reward = 0.0;         // raw backend score
  double bandit_reward = 0.0;  // value fed to the arm (squashed or raw)
  std::vector<UcbEntry> ucb_snapshot;  // every arm's score just before selection

  friend bool operator==(const Attempt&, const Attempt&) = default;
};

struct PoolInitRecord {
  std::vector<MetaThought> thoughts;    // in insertion order
  std::vector<MetaThought> duplicates;  // dropped by dedup
  std::vector<std::string> retrieved_ids;
  bool corpus_used = false;
  std::vector<std::string> notes;

  friend bool operator==(const PoolInitRecord&, const PoolInitRecord&) = default;
};

struct SearchTrace {
  std::string query;
  SearchConfig config;
  std::string config_fingerprint;
  std::string prompt_version;
  PoolInitRecord init;
  std::vector<Attempt> attempts;
  std::vector<EvolutionEvent> evolution_events;

  friend bool operator==(const SearchTrace&, const SearchTrace&) = default;
};

struct SearchResult {
  Attempt best;
  SearchTrace trace;
};

// Receives trace pieces as they happen so callers can stream them out.
class SearchObserver {
 public:
  virtual ~SearchObserver() = default;
  virtual void on_pool_init(const SearchTrace&) {}
  virtual void on_attempt(const SearchTrace&, const Attempt&) {}
  virtual void on_evolution(const SearchTrace&, const EvolutionEvent&) {}
  virtual void on_complete(const SearchTrace&, const Attempt& /*best*/) {}
  virtual void on_abort(const SearchTrace&, const std::string& /*reason*/) {}
};

struct Backends {
  ChatBackend* chat = nullptr;
  RewardBackend* reward = nullptr;
  EmbedBackend* embed = nullptr;        // required only with a corpus
  const CorpusIndex* corpus = nullptr;  // optional
  std::string chat_model;               // forwarded in chat requests
};

// Thrown when a backend gives up mid-run. Carries everything recorded so far;
// only fully scored attempts are in it.
class SearchAborted : public Error {
 public:
  SearchAborted(const std::string& reason, SearchTrace partial)
      : Error(ErrorCode::aborted, reason), partial_(std::move(partial)) {}
  const SearchTrace& partial_trace() const noexcept { return partial_; }

 private:
  SearchTrace partial_;
};

Messages compose_prompt(const MetaThought& thought, std::string_view query);

// Earliest attempt with the maximal raw reward.
const Attempt& best_attempt(const SearchTrace& trace);

// Logistic squash used for bandit statistics when squash_rewards is on.
double squash_reward(double raw);

SearchResult run_search(std::string_view query, const SearchConfig& config, const Backends& backends,
                        SearchObserver* observer = nullptr);

// Re-runs selection from the recorded trace and checks every attempt picked
// the arm select_thought would pick. Returns the first mismatching step, or
// nullopt when the trace is consistent.
std::optional<int> first_inconsistent_selection(const SearchTrace& trace);

}  // namespace tsearch
