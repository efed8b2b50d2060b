#pragma once

// LLM-driven recombination of high-UCB meta-thoughts. There are no
// text-level crossover or mutation operators; the model does the merging.

#include <string>
#include <string_view>
#include <vector>

#include "tsearch/backends.hpp"
#include "tsearch/initializer.hpp"
#include "tsearch/search_config.hpp"
#include "tsearch/thought_pool.hpp"

namespace tsearch {

struct EvolvedChild {
  MetaThought thought;
  bool added = false;  // false when dedup dropped it

  friend bool operator==(const EvolvedChild&, const EvolvedChild&) = default;
};

struct EvolutionEvent {
  int step = 0;        // attempt index at which the event fired
  int generation = 0;  // step / interval
  std::vector<std::string> parent_ids;
  std::vector<EvolvedChild> children;
  std::vector<std::string> raw_outputs;  // model replies, re-prompt included

  friend bool operator==(const EvolutionEvent&, const EvolutionEvent&) = default;
};

// Children get ids "e<generation>.<i>", origin evolved, and every parent id.
// Empty after an unparseable reply and one re-prompt.
std::vector<MetaThought> evolve(ChatBackend& chat, std::string_view query, std::span<const MetaThought> parents,
                                int n_children, int generation, const CallSettings& settings,
                                std::vector<std::string>* raw_outputs = nullptr);

// Picks parents by UCB at t = step, evolves them and merges the children
// into the pool. Requires step % config.interval == 0.
EvolutionEvent run_evolution_event(ThoughtPool& pool, ChatBackend& chat, std::string_view query,
                                   const SearchConfig& config, int step, const std::string& model_name = {});

}  // namespace tsearch
