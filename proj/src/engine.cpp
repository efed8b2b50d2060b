#include "tsearch/engine.hpp"

#include <cmath>

#include "tsearch/prompts.hpp"
#include "tsearch/rng.hpp"

namespace tsearch {

Messages compose_prompt(const MetaThought& thought, std::string_view query) {
  return prompts::compose(thought, query);
}

const Attempt& best_attempt(const SearchTrace& trace) {
  if (trace.attempts.empty()) throw Error(ErrorCode::invalid_argument, "trace has no attempts");
  const Attempt* best = &trace.attempts.front();
  for (const auto& a : trace.attempts) {
    if (a.reward > best->reward) best = &a;
  }
  return *best;
}

double squash_reward(double raw) { return 1.0 / (1.0 + std::exp(-raw)); }

namespace {

void check_backends(const Backends& b) {
  if (b.chat == nullptr) throw Error(ErrorCode::config, "search needs a chat backend");
  if (b.reward == nullptr) throw Error(ErrorCode::config, "search needs a reward backend");
  if (b.corpus != nullptr && b.embed == nullptr)
    throw Error(ErrorCode::config, "a corpus index requires an embedding backend");
}

}  // namespace

SearchResult run_search(std::string_view query, const SearchConfig& config, const Backends& backends,
                        SearchObserver* observer) {
  validate(config);
  check_backends(backends);
  if (query.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw Error(ErrorCode::invalid_argument, "query is empty");

  SearchTrace trace;
  trace.query = std::string(query);
  trace.config = config;
  trace.config_fingerprint = fingerprint(config);
  trace.prompt_version = std::string(prompts::kTemplateVersion);

  auto abort = [&](const std::string& reason) -> SearchAborted {
    if (observer) observer->on_abort(trace, reason);
    return SearchAborted(reason, trace);
  };

  ThoughtPool pool;
  try {
    auto init = initialize_pool(*backends.chat, backends.embed, backends.corpus, query, config, backends.chat_model);
    for (const auto& e : init.pool.entries()) trace.init.thoughts.push_back(e.thought);
    trace.init.duplicates = std::move(init.duplicates);
    trace.init.retrieved_ids = std::move(init.retrieved_ids);
    trace.init.corpus_used = init.corpus_used;
    trace.init.notes = std::move(init.notes);
    pool = std::move(init.pool);
  } catch (const BackendError& e) {
    throw abort(std::string("initialization: ") + e.what());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::initialization) throw;
    throw abort(e.what());
  }
  if (observer) observer->on_pool_init(trace);

  const std::uint64_t sampling_seed = substream(config.seed, "sampling");
  for (int t = 1; t <= config.budget; ++t) {
    Attempt attempt;
    attempt.step = t;
    attempt.ucb_snapshot = pool.snapshot(t, config.beta);
    attempt.thought_id = pool.select(t, config.beta);
    const auto& thought = pool.at(attempt.thought_id).thought;
    attempt.thought_generation = thought.generation;
    attempt.prompt = compose_prompt(thought, query);

    ChatRequest request;
    request.messages = attempt.prompt;
    request.temperature = config.temperature;
    request.max_tokens = config.max_tokens;
    request.model_name = backends.chat_model;
    request.seed = substream(sampling_seed, static_cast<std::uint64_t>(t));

    try {
      attempt.response = backends.chat->complete(request);
      if (attempt.response.empty()) throw BackendError("chat backend returned an empty response", false);
      attempt.reward = backends.reward->score({std::string(query), attempt.response});
      if (!std::isfinite(attempt.reward)) throw BackendError("reward backend returned a non-finite score", false);
    } catch (const BackendError& e) {
      throw abort("attempt " + std::to_string(t) + ": " + e.what());
    }

    attempt.bandit_reward = config.squash_rewards ? squash_reward(attempt.reward) : attempt.reward;
    pool.record_reward(attempt.thought_id, attempt.bandit_reward);
    trace.attempts.push_back(std::move(attempt));
    if (observer) observer->on_attempt(trace, trace.attempts.back());

    if (t % config.interval == 0) {
      try {
        trace.evolution_events.push_back(
            run_evolution_event(pool, *backends.chat, query, config, t, backends.chat_model));
      } catch (const BackendError& e) {
        throw abort("evolution at step " + std::to_string(t) + ": " + e.what());
      }
      if (observer) observer->on_evolution(trace, trace.evolution_events.back());
    }
  }

  SearchResult result{best_attempt(trace), std::move(trace)};
  if (observer) observer->on_complete(result.trace, result.best);
  return result;
}

std::optional<int> first_inconsistent_selection(const SearchTrace& trace) {
  ThoughtPool pool;
  for (const auto& t : trace.init.thoughts) pool.add(t);
  std::size_t next_event = 0;
  for (const auto& a : trace.attempts) {
    if (pool.snapshot(a.step, trace.config.beta) != a.ucb_snapshot) return a.step;
    if (pool.select(a.step, trace.config.beta) != a.thought_id) return a.step;
    pool.record_reward(a.thought_id, a.bandit_reward);
    while (next_event < trace.evolution_events.size() && trace.evolution_events[next_event].step <= a.step) {
      const auto& ev = trace.evolution_events[next_event++];
      for (const auto& c : ev.children) {
        if (pool.add(c.thought) != c.added) return a.step;
      }
    }
  }
  return std::nullopt;
}

}  // namespace tsearch
