#pragma once

// Meta-thought population with per-arm UCB bookkeeping.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tsearch {

enum class OriginKind { self_composed, corpus_derived, evolved };

const char* to_string(OriginKind kind);
OriginKind origin_from_string(std::string_view text);

struct MetaThought {
  std::string id;
  std::string mindset;   // persona / expertise adopted for the task
  std::string strategy;  // solution pattern followed under that mindset
  int generation = 0;
  OriginKind origin = OriginKind::self_composed;
  std::vector<std::string> parent_ids;  // non-empty iff origin == evolved

  friend bool operator==(const MetaThought&, const MetaThought&) = default;
};

// Throws Error(invalid_argument) when the thought breaks its invariants.
// Parent presence is checked by ThoughtPool::add, not here.
void validate(const MetaThought& thought);

// Lowercased, whitespace-collapsed mindset || strategy. Used for dedup.
std::string normalized_text(const MetaThought& thought);

class ArmState {
 public:
  std::int64_t pull_count() const noexcept { return pulls_; }
  double reward_sum() const noexcept { return sum_; }
  // Empty until the arm has been pulled at least once.
  std::optional<double> mean_reward() const;

  void record(double reward);  // throws Error(invalid_argument) on a non-finite reward

 private:
  std::int64_t pulls_ = 0;
  double sum_ = 0.0;
};

// mu + beta * sqrt(ln t / N); +inf for an unplayed arm. t must be >= 1.
double ucb_score(const ArmState& state, std::int64_t t, double beta);

struct UcbEntry {
  std::string thought_id;
  double score;  // may be +inf

  friend bool operator==(const UcbEntry&, const UcbEntry&) = default;
};

class ThoughtPool {
 public:
  struct Entry {
    MetaThought thought;
    ArmState arm;
  };

  // Appends the thought with a fresh arm. Returns false (pool unchanged) when
  // its normalized text is already present. Throws on invalid thoughts,
  // duplicate ids, or evolved thoughts naming parents not in the pool.
  bool add(MetaThought thought);

  const ArmState& record_reward(std::string_view thought_id, double reward);

  // Argmax UCB; ties go to the earliest inserted arm.
  const std::string& select(std::int64_t t, double beta) const;

  // Up to p ids by descending UCB. Unplayed arms are only eligible when fewer
  // than p arms have been played.
  std::vector<std::string> top_by_ucb(std::int64_t t, double beta, std::size_t p) const;

  // Scores of every arm in insertion order.
  std::vector<UcbEntry> snapshot(std::int64_t t, double beta) const;

  bool contains(std::string_view thought_id) const;
  bool contains_text(const MetaThought& thought) const;
  const Entry& at(std::string_view thought_id) const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::size_t index_of(std::string_view thought_id) const;

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_set<std::string> dedup_index_;
};

}  // namespace tsearch
