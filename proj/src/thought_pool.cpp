#include "tsearch/thought_pool.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "tsearch/errors.hpp"
#include "text_util.hpp"

namespace tsearch {

const char* to_string(OriginKind kind) {
  switch (kind) {
    case OriginKind::self_composed: return "self_composed";
    case OriginKind::corpus_derived: return "corpus_derived";
    case OriginKind::evolved: return "evolved";
  }
  return "unknown";
}

OriginKind origin_from_string(std::string_view text) {
  if (text == "self_composed") return OriginKind::self_composed;
  if (text == "corpus_derived") return OriginKind::corpus_derived;
  if (text == "evolved") return OriginKind::evolved;
  throw Error(ErrorCode::parse, "unknown thought origin '" + std::string(text) + "'");
}

void validate(const MetaThought& thought) {
  if (thought.id.empty()) throw Error(ErrorCode::invalid_argument, "meta-thought id is empty");
  if (text::trim(thought.mindset).empty())
    throw Error(ErrorCode::invalid_argument, "meta-thought '" + thought.id + "' has an empty mindset");
  if (text::trim(thought.strategy).empty())
    throw Error(ErrorCode::invalid_argument, "meta-thought '" + thought.id + "' has an empty strategy");
  if (thought.generation < 0)
    throw Error(ErrorCode::invalid_argument, "meta-thought '" + thought.id + "' has a negative generation");
  const bool evolved = thought.origin == OriginKind::evolved;
  if (evolved != (thought.generation > 0))
    throw Error(ErrorCode::invalid_argument,
                "meta-thought '" + thought.id + "': generation 0 is reserved for initial thoughts");
  if (evolved && thought.parent_ids.empty())
    throw Error(ErrorCode::invalid_argument, "evolved meta-thought '" + thought.id + "' lists no parents");
  if (!evolved && !thought.parent_ids.empty())
    throw Error(ErrorCode::invalid_argument, "initial meta-thought '" + thought.id + "' lists parents");
}

std::string normalized_text(const MetaThought& thought) {
  std::string joined = thought.mindset;
  joined += '\n';
  joined += thought.strategy;
  std::string out = text::collapse_whitespace(joined);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> ArmState::mean_reward() const {
  if (pulls_ == 0) return std::nullopt;
  return sum_ / static_cast<double>(pulls_);
}

void ArmState::record(double reward) {
  if (!std::isfinite(reward)) throw Error(ErrorCode::invalid_argument, "reward must be finite");
  ++pulls_;
  sum_ += reward;
}

double ucb_score(const ArmState& state, std::int64_t t, double beta) {
  if (state.pull_count() == 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(state.pull_count());
  const double mean = state.reward_sum() / n;
  return mean + beta * std::sqrt(std::log(static_cast<double>(t)) / n);
}

namespace {

void check_step(std::int64_t t) {
  if (t < 1) throw Error(ErrorCode::invalid_argument, "UCB step t must be >= 1");
}

}  // namespace

bool ThoughtPool::add(MetaThought thought) {
  validate(thought);
  if (by_id_.count(thought.id))
    throw Error(ErrorCode::invalid_argument, "duplicate meta-thought id '" + thought.id + "'");
  for (const auto& parent : thought.parent_ids) {
    if (!by_id_.count(parent))
      throw Error(ErrorCode::invalid_argument,
                  "meta-thought '" + thought.id + "' names unknown parent '" + parent + "'");
  }
  std::string key = normalized_text(thought);
  if (!dedup_index_.insert(std::move(key)).second) return false;
  by_id_.emplace(thought.id, entries_.size());
  entries_.push_back(Entry{std::move(thought), ArmState{}});
  return true;
}

std::size_t ThoughtPool::index_of(std::string_view thought_id) const {
  auto it = by_id_.find(std::string(thought_id));
  if (it == by_id_.end())
    throw Error(ErrorCode::not_found, "no meta-thought with id '" + std::string(thought_id) + "'");
  return it->second;
}

const ArmState& ThoughtPool::record_reward(std::string_view thought_id, double reward) {
  auto& arm = entries_[index_of(thought_id)].arm;
  arm.record(reward);
  return arm;
}

const std::string& ThoughtPool::select(std::int64_t t, double beta) const {
  if (entries_.empty()) throw Error(ErrorCode::empty_pool, "cannot select from an empty pool");
  check_step(t);
  std::size_t best = 0;
  double best_score = ucb_score(entries_[0].arm, t, beta);
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    const double s = ucb_score(entries_[i].arm, t, beta);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return entries_[best].thought.id;
}

std::vector<std::string> ThoughtPool::top_by_ucb(std::int64_t t, double beta, std::size_t p) const {
  if (entries_.empty()) throw Error(ErrorCode::empty_pool, "cannot rank an empty pool");
  if (p == 0) throw Error(ErrorCode::invalid_argument, "top_by_ucb needs p >= 1");
  check_step(t);

  const auto played = static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [](const Entry& e) { return e.arm.pull_count() > 0; }));
  const bool played_only = played >= p;

  std::vector<std::size_t> order;
  std::vector<double> scores(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    scores[i] = ucb_score(entries_[i].arm, t, beta);
    if (!played_only || entries_[i].arm.pull_count() > 0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(order.size(), p));

  std::vector<std::string> ids;
  ids.reserve(order.size());
  for (auto i : order) ids.push_back(entries_[i].thought.id);
  return ids;
}

std::vector<UcbEntry> ThoughtPool::snapshot(std::int64_t t, double beta) const {
  check_step(t);
  std::vector<UcbEntry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back({e.thought.id, ucb_score(e.arm, t, beta)});
  return out;
}

bool ThoughtPool::contains(std::string_view thought_id) const {
  return by_id_.count(std::string(thought_id)) != 0;
}

bool ThoughtPool::contains_text(const MetaThought& thought) const {
  return dedup_index_.count(normalized_text(thought)) != 0;
}

const ThoughtPool::Entry& ThoughtPool::at(std::string_view thought_id) const {
  return entries_[index_of(thought_id)];
}

}  // namespace tsearch
