#include "tsearch/synthetic_world.hpp"

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <sstream>

#include "tsearch/errors.hpp"
#include "tsearch/rng.hpp"

namespace tsearch {

void validate(const WorldSpec& spec) {
  if (spec.arms.empty()) throw Error(ErrorCode::config, "synthetic world needs at least one arm");
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma))
    throw Error(ErrorCode::config, "synthetic world sigma must be >= 0");
  for (const auto& arm : spec.arms) {
    if (arm.key.empty() || arm.key.find_first_of("[]: \t\n") != std::string::npos)
      throw Error(ErrorCode::config, "synthetic arm key '" + arm.key + "' is empty or has reserved characters");
    if (arm.key == "base") throw Error(ErrorCode::config, "synthetic arm key 'base' is reserved for baselines");
    if (!std::isfinite(arm.mean)) throw Error(ErrorCode::config, "synthetic arm '" + arm.key + "' has a non-finite mean");
  }
  for (std::size_t i = 0; i < spec.arms.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.arms.size(); ++j) {
      if (spec.arms[i].key == spec.arms[j].key)
        throw Error(ErrorCode::config, "duplicate synthetic arm key '" + spec.arms[i].key + "'");
    }
  }
}

class SyntheticWorld::Chat : public ChatBackend {
 public:
  explicit Chat(SyntheticWorld& w) : world_(w) {}
  std::string complete(const ChatRequest& r) override { return world_.handle_chat(r); }

 private:
  SyntheticWorld& world_;
};

class SyntheticWorld::Reward : public RewardBackend {
 public:
  explicit Reward(SyntheticWorld& w) : world_(w) {}
  double score(const RewardRequest& r) override { return world_.handle_reward(r); }

 private:
  SyntheticWorld& world_;
};

SyntheticWorld::SyntheticWorld(WorldSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  for (const auto& arm : spec_.arms) means_[arm.key] = arm.mean;
  chat_ = std::make_unique<Chat>(*this);
  reward_ = std::make_unique<Reward>(*this);
}

std::string SyntheticWorld::marker(const std::string& key) { return "[arm:" + key + "]"; }

std::vector<std::string> SyntheticWorld::markers_in(std::string_view text) {
  std::vector<std::string> keys;
  std::size_t pos = 0;
  while ((pos = text.find("[arm:", pos)) != std::string_view::npos) {
    const auto end = text.find(']', pos);
    if (end == std::string_view::npos) break;
    keys.emplace_back(text.substr(pos + 5, end - pos - 5));
    pos = end + 1;
  }
  return keys;
}

double SyntheticWorld::mean_of(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = means_.find(key);
  if (it == means_.end()) throw Error(ErrorCode::not_found, "synthetic world has no arm '" + key + "'");
  return it->second;
}

std::size_t SyntheticWorld::arm_count() const {
  std::lock_guard lock(mutex_);
  return means_.size();
}

std::string SyntheticWorld::handle_chat(const ChatRequest& request) {
  validate(request);
  const ChatMessage* system = nullptr;
  const ChatMessage* first_user = nullptr;
  for (const auto& m : request.messages) {
    if (m.role == "system" && system == nullptr) system = &m;
    if (m.role == "user" && first_user == nullptr) first_user = &m;
  }
  if (first_user == nullptr) throw BackendError("synthetic world needs a user message", false);

  std::lock_guard lock(mutex_);

  // Attempt under a meta-thought.
  if (system != nullptr) {
    const auto keys = markers_in(system->content);
    const std::string key = keys.empty() ? std::string("base") : keys.front();
    const auto n = ++responses_[first_user->content];
    return "Simulated response #" + std::to_string(n) + " under " + marker(key) + ".";
  }

  const auto& prompt = first_user->content;
  const auto parent_keys = markers_in(prompt);

  // Evolution: the prompt lists parent thoughts, each carrying a marker.
  if (!parent_keys.empty()) {
    double sum = 0.0;
    for (const auto& k : parent_keys) {
      auto it = means_.find(k);
      if (it == means_.end()) throw BackendError("evolution prompt names unknown arm '" + k + "'", false);
      sum += it->second;
    }
    const double child_mean = sum / static_cast<double>(parent_keys.size()) + spec_.child_uplift;
    std::uint64_t tag = fnv1a64(prompt) ^ request.seed.value_or(0);
    std::ostringstream out;
    int n = 2;
    constexpr std::string_view kCount = "Number the new strategies 1 to ";
    if (const auto at = prompt.rfind(kCount); at != std::string::npos)
      n = std::max(1, std::atoi(prompt.c_str() + at + kCount.size()));
    for (int i = 1; i <= n; ++i) {
      std::ostringstream key;
      key << "c" << std::hex << (mix64(tag + static_cast<std::uint64_t>(i)) & 0xFFFFFFFFFFULL);
      means_[key.str()] = child_mean;
      out << i << ". Persona: evolved specialist " << marker(key.str()) << "\n"
          << "High-level abstract: combine and refine the approaches of";
      for (const auto& k : parent_keys) out << " " << k;
      out << "\n\n";
    }
    return out.str();
  }

  // Initial pool: every configured arm, in spec order.
  if (prompt.find("who is likely to give appropriate answer") != std::string::npos) {
    std::ostringstream out;
    for (std::size_t i = 0; i < spec_.arms.size(); ++i) {
      out << i + 1 << ". Persona: specialist " << marker(spec_.arms[i].key) << "\n"
          << "High-level abstract: follow plan " << spec_.arms[i].key << " step by step\n\n";
    }
    return out.str();
  }

  // Corpus derivation is not simulated; the caller degrades to the self-composed pool.
  if (prompt.find("Reference task 1:") != std::string::npos) return "No transferable patterns found.";

  // Baseline prompt without any meta-thought.
  const auto n = ++responses_[prompt];
  return "Simulated baseline response #" + std::to_string(n) + ".";
}

double SyntheticWorld::handle_reward(const RewardRequest& request) {
  validate(request);
  const auto keys = markers_in(request.response);
  double mean = spec_.baseline_mean;
  {
    std::lock_guard lock(mutex_);
    if (!keys.empty() && keys.front() != "base") {
      auto it = means_.find(keys.front());
      if (it == means_.end()) throw BackendError("response names unknown arm '" + keys.front() + "'", false);
      mean = it->second;
    }
  }
  Rng rng(mix64(spec_.seed ^ fnv1a64(request.query) ^ mix64(fnv1a64(request.response))));
  if (spec_.noise == NoiseKind::bernoulli) return rng.bernoulli(std::clamp(mean, 0.0, 1.0)) ? 1.0 : 0.0;
  return spec_.sigma == 0.0 ? mean : rng.normal(mean, spec_.sigma);
}

}  // namespace tsearch
