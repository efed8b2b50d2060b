#pragma once

#include <cstdint>
#include <string>

namespace tsearch {

// Knobs for one query's search. Budgets used in experiments come from
// {8, 16, 32, 64, 128}; an interval larger than the budget disables evolution.
struct SearchConfig {
  int budget = 32;           // scored attempts per query
  int interval = 8;          // evolve after every `interval` attempts
  double beta = 1.0;         // exploration weight
  int n_self = 4;            // self-composed initial thoughts
  int n_derived = 4;         // corpus-derived initial thoughts
  int retrieval_k = 8;       // similar corpus tasks retrieved
  int n_parents = 2;
  int n_children = 2;
  double temperature = 0.6;  // attempt generation
  double init_temperature = 0.6;  // self-compose, derivation and evolution calls
  int max_tokens = 1024;
  std::uint64_t seed = 0;
  bool squash_rewards = false;  // logistic squash for bandit statistics only

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

// Throws Error(config) describing the first violated constraint.
void validate(const SearchConfig& config);

// Short hex digest of every field; identifies the configuration in traces.
std::string fingerprint(const SearchConfig& config);

}  // namespace tsearch
