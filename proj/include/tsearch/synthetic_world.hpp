#pragma once

// A coupled chat + reward simulator for exercising the bandit and evolution
// dynamics without a model.
//
// Every arm is a meta-thought whose mindset carries a marker "[arm:<key>]".
// Responses generated under an arm repeat the marker, and the reward backend
// scores a marked response as a draw around the arm's mean. Evolution prompts
// mint children whose mean is the average of their parents' means plus
// `child_uplift`. Responses without a marker (baselines) score around
// `baseline_mean`.
//
// Noise for a (query, call index) pair is a pure function of the seed, so
// runs are reproducible and concurrent queries do not perturb each other.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tsearch/backends.hpp"

namespace tsearch {

enum class NoiseKind { normal, bernoulli };

struct ArmSpec {
  std::string key;
  double mean = 0.0;
};

struct WorldSpec {
  std::vector<ArmSpec> arms;
  double sigma = 0.1;  // stddev for normal noise; ignored for bernoulli
  NoiseKind noise = NoiseKind::normal;
  double child_uplift = 0.0;
  double baseline_mean = 0.0;
  std::uint64_t seed = 0;
};

void validate(const WorldSpec& spec);

class SyntheticWorld {
 public:
  explicit SyntheticWorld(WorldSpec spec);

  ChatBackend& chat() { return *chat_; }
  RewardBackend& reward() { return *reward_; }

  // Mean of an arm or minted child, by key.
  double mean_of(const std::string& key) const;
  std::size_t arm_count() const;

  // Text helpers shared with tests.
  static std::string marker(const std::string& key);
  static std::vector<std::string> markers_in(std::string_view text);

 private:
  class Chat;
  class Reward;

  std::string handle_chat(const ChatRequest& request);
  double handle_reward(const RewardRequest& request);

  WorldSpec spec_;
  mutable std::mutex mutex_;
  std::map<std::string, double> means_;
  std::map<std::string, std::uint64_t> reward_calls_;  // per query
  std::map<std::string, std::uint64_t> children_;      // per query
  std::map<std::string, std::uint64_t> responses_;     // per query
  std::unique_ptr<ChatBackend> chat_;
  std::unique_ptr<RewardBackend> reward_;
};

}  // namespace tsearch
