#include "tsearch/evolver.hpp"

#include "tsearch/errors.hpp"
#include "tsearch/prompts.hpp"
#include "tsearch/rng.hpp"

namespace tsearch {

std::vector<MetaThought> evolve(ChatBackend& chat, std::string_view query, std::span<const MetaThought> parents,
                                int n_children, int generation, const CallSettings& settings,
                                std::vector<std::string>* raw_outputs) {
  if (parents.empty()) throw Error(ErrorCode::invalid_argument, "evolution needs at least one parent");
  if (n_children < 1) throw Error(ErrorCode::invalid_argument, "n_children must be >= 1");
  if (generation < 1) throw Error(ErrorCode::invalid_argument, "evolved generation must be >= 1");

  ChatRequest request;
  request.messages = {{"user", prompts::evolve(query, parents, n_children)}};
  request.temperature = settings.temperature;
  request.max_tokens = settings.max_tokens;
  request.model_name = settings.model_name;
  request.seed = settings.seed;

  std::vector<MetaThought> children;
  for (int round = 0; round < 2 && children.empty(); ++round) {
    const std::string reply = chat.complete(request);
    if (raw_outputs) raw_outputs->push_back(reply);
    children = parse_thought_list(reply);
    if (children.empty()) {
      request.messages = prompts::with_reminder(request.messages, reply, n_children);
      request.seed = mix64(*request.seed);
    }
  }
  if (children.size() > static_cast<std::size_t>(n_children)) children.resize(static_cast<std::size_t>(n_children));

  std::vector<std::string> parent_ids;
  for (const auto& p : parents) parent_ids.push_back(p.id);
  for (std::size_t i = 0; i < children.size(); ++i) {
    children[i].id = "e" + std::to_string(generation) + "." + std::to_string(i + 1);
    children[i].origin = OriginKind::evolved;
    children[i].generation = generation;
    children[i].parent_ids = parent_ids;
  }
  return children;
}

EvolutionEvent run_evolution_event(ThoughtPool& pool, ChatBackend& chat, std::string_view query,
                                   const SearchConfig& config, int step, const std::string& model_name) {
  if (step < 1 || step % config.interval != 0)
    throw Error(ErrorCode::invalid_argument,
                "evolution step " + std::to_string(step) + " is not a multiple of the interval");

  EvolutionEvent event;
  event.step = step;
  event.generation = step / config.interval;
  event.parent_ids = pool.top_by_ucb(step, config.beta, static_cast<std::size_t>(config.n_parents));

  std::vector<MetaThought> parents;
  for (const auto& id : event.parent_ids) parents.push_back(pool.at(id).thought);

  CallSettings settings;
  settings.temperature = config.init_temperature;
  settings.max_tokens = config.max_tokens;
  settings.model_name = model_name;
  settings.seed = substream(substream(config.seed, "evolution"), static_cast<std::uint64_t>(step));

  auto children = evolve(chat, query, parents, config.n_children, event.generation, settings, &event.raw_outputs);
  for (auto& child : children) {
    MetaThought copy = child;
    const bool added = pool.add(std::move(child));
    event.children.push_back({std::move(copy), added});
  }
  return event;
}

}  // namespace tsearch
