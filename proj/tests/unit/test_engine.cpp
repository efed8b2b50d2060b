#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tsearch/backends.hpp"
#include "tsearch/engine.hpp"
#include "tsearch/errors.hpp"
#include "tsearch/synthetic_world.hpp"

using namespace tsearch;

namespace {

const std::string kSelfNeedle = "who is likely to give appropriate answer";
const std::string kEvolveNeedle = "Number the new strategies";

std::string thought_block(const std::string& m, const std::string& s) {
  return "1. Persona: " + m + "\nHigh-level abstract: " + s + "\n";
}

Attempt with_reward(int step, double r) {
  Attempt a;
  a.step = step;
  a.reward = r;
  return a;
}

}  // namespace

TEST_CASE("best_attempt: earliest maximum") {
  SearchTrace t;
  t.attempts = {with_reward(1, 0.3)};
  CHECK(best_attempt(t).step == 1);
  t.attempts = {with_reward(1, 1.0), with_reward(2, 3.5), with_reward(3, -2.0)};
  CHECK(best_attempt(t).step == 2);
  t.attempts = {with_reward(1, 0.2), with_reward(2, 0.9), with_reward(3, 0.9), with_reward(4, 0.4)};
  CHECK(best_attempt(t).step == 2);
  t.attempts = {with_reward(1, 0.5), with_reward(2, 0.5), with_reward(3, 0.5)};
  CHECK(best_attempt(t).step == 1);
  t.attempts.clear();
  CHECK_THROWS_AS(best_attempt(t), Error);
}

TEST_CASE("compose_prompt: rejects invalid thoughts") {
  MetaThought bad{"x", "a tutor", "  ", 0, OriginKind::self_composed, {}};
  CHECK_THROWS_AS(compose_prompt(bad, "q"), Error);
}

// Hand-simulated schedule, beta = 1, n_parents = 2, one child per event.
//   t=1  A,B unplayed            -> A (first inserted), r=0.5
//   t=2  B unplayed              -> B, r=0.8
//   t=3  A 0.5+sqrt(ln3)=1.5486, B 0.8+sqrt(ln3)=1.8481 -> B, r=0.8
//   evolve@3: A 1.5486, B 0.8+sqrt(ln3/2)=1.5411 -> parents [A, B], child C
//   t=4  C unplayed              -> C, r=0.9
//   t=5  A 1.7686, B 1.6970, C 0.9+sqrt(ln5)=2.1686 -> C
//   t=6  A 0.5+sqrt(ln6)=1.8386, B 1.7465, C 0.9+sqrt(ln6/2)=1.8465 -> C
//   evolve@6: A 1.8386, B 1.7465, C 0.9+sqrt(ln6/3)=1.6728 -> parents [A, B], child D
//   best: first 0.9, step 4
TEST_CASE("run_search: hand-simulated T=6, k=3 trace") {
  ScriptedChat chat;
  chat.on_substring(kEvolveNeedle, {thought_block("mind C", "plan C"), thought_block("mind D", "plan D")});
  chat.on_substring(kSelfNeedle, {thought_block("mind A", "plan A") + "2. Persona: mind B\nHigh-level abstract: plan B\n"});
  chat.on_substring("You are mind A", {"resp A"});
  chat.on_substring("You are mind B", {"resp B"});
  chat.on_substring("You are mind C", {"resp C"});
  chat.on_substring("You are mind D", {"resp D"});
  ScriptedReward reward;
  reward.set("resp A", 0.5);
  reward.set("resp B", 0.8);
  reward.set("resp C", 0.9);
  reward.set("resp D", 0.1);

  SearchConfig cfg;
  cfg.budget = 6;
  cfg.interval = 3;
  cfg.n_self = 2;
  cfg.n_parents = 2;
  cfg.n_children = 1;
  auto result = run_search("the query", cfg, Backends{&chat, &reward});
  const auto& tr = result.trace;

  REQUIRE(tr.attempts.size() == 6);
  std::vector<std::string> picked;
  for (const auto& a : tr.attempts) picked.push_back(a.thought_id);
  CHECK(picked == std::vector<std::string>{"s1", "s2", "s2", "e1.1", "e1.1", "e1.1"});
  REQUIRE(tr.evolution_events.size() == 2);
  CHECK(tr.evolution_events[0].step == 3);
  CHECK(tr.evolution_events[1].step == 6);
  CHECK(tr.evolution_events[0].parent_ids == std::vector<std::string>{"s1", "s2"});
  CHECK(tr.evolution_events[1].parent_ids == std::vector<std::string>{"s1", "s2"});
  CHECK(tr.evolution_events[1].children.at(0).thought.id == "e2.1");
  CHECK(tr.attempts[3].thought_generation == 1);
  CHECK(result.best.step == 4);
  CHECK(result.best.response == "resp C");
  CHECK(std::isinf(tr.attempts[3].ucb_snapshot.at(2).score));
  CHECK(tr.attempts[5].ucb_snapshot.at(0).score == doctest::Approx(0.5 + std::sqrt(std::log(6.0))));
  CHECK_FALSE(first_inconsistent_selection(tr).has_value());
}

TEST_CASE("run_search: T=1 gives one attempt and no evolution") {
  SyntheticWorld world({{{"a", 0.3}, {"b", 0.6}}, 0.0});
  SearchConfig cfg;
  cfg.budget = 1;
  cfg.interval = 8;
  auto r = run_search("q", cfg, Backends{&world.chat(), &world.reward()});
  CHECK(r.trace.attempts.size() == 1);
  CHECK(r.trace.evolution_events.empty());
  CHECK(r.best == r.trace.attempts[0]);
}

TEST_CASE("run_search: synthetic world invariants") {
  SyntheticWorld world({{{"a", 0.2}, {"b", 0.5}, {"c", 0.8}}, 0.1, NoiseKind::normal, 0.05, 0.0, 11});
  SearchConfig cfg;
  cfg.budget = 32;
  cfg.interval = 8;
  cfg.seed = 3;
  auto r = run_search("q", cfg, Backends{&world.chat(), &world.reward()});
  const auto& tr = r.trace;
  REQUIRE(tr.attempts.size() == 32);
  for (std::size_t i = 0; i < tr.attempts.size(); ++i) CHECK(tr.attempts[i].step == static_cast<int>(i + 1));
  CHECK(tr.evolution_events.size() == 4);
  for (const auto& ev : tr.evolution_events) {
    CHECK(ev.step % 8 == 0);
    for (const auto& c : ev.children) CHECK(c.thought.generation == ev.step / 8);
  }
  double best = -1e9;
  for (const auto& a : tr.attempts) best = std::max(best, a.reward);
  CHECK(r.best.reward == best);
  CHECK_FALSE(first_inconsistent_selection(tr).has_value());

  SyntheticWorld again({{{"a", 0.2}, {"b", 0.5}, {"c", 0.8}}, 0.1, NoiseKind::normal, 0.05, 0.0, 11});
  CHECK(run_search("q", cfg, Backends{&again.chat(), &again.reward()}).trace == tr);
}

TEST_CASE("run_search: backend failure aborts with a partial trace") {
  ScriptedChat chat;
  chat.on_substring(kSelfNeedle, {thought_block("mind A", "plan A")});
  chat.on_substring("You are mind A", {"resp A"});
  ScriptedReward reward;
  reward.set_sequence({0.1, 0.2, std::nan("")});

  struct Recorder : SearchObserver {
    int attempts = 0;
    std::string reason;
    void on_attempt(const SearchTrace&, const Attempt&) override { ++attempts; }
    void on_abort(const SearchTrace&, const std::string& r) override { reason = r; }
  } rec;

  SearchConfig cfg;
  cfg.budget = 5;
  cfg.interval = 8;
  cfg.n_self = 1;
  try {
    run_search("q", cfg, Backends{&chat, &reward}, &rec);
    FAIL("expected abort");
  } catch (const SearchAborted& e) {
    CHECK(e.partial_trace().attempts.size() == 2);
    CHECK(rec.attempts == 2);
    CHECK(rec.reason.find("non-finite") != std::string::npos);
  }
}

TEST_CASE("run_search: failed self-compose aborts before any attempt") {
  ScriptedChat chat;
  chat.on_substring(kSelfNeedle, {"?"});
  ScriptedReward reward;
  SearchConfig cfg;
  cfg.budget = 4;
  cfg.interval = 2;
  CHECK_THROWS_AS(run_search("q", cfg, Backends{&chat, &reward}), SearchAborted);
}

TEST_CASE("run_search: squashed rewards feed the bandit only") {
  SyntheticWorld world({{{"a", 2.0}, {"b", -1.0}}, 0.0});
  SearchConfig cfg;
  cfg.budget = 4;
  cfg.interval = 8;
  cfg.squash_rewards = true;
  auto r = run_search("q", cfg, Backends{&world.chat(), &world.reward()});
  for (const auto& a : r.trace.attempts) {
    CHECK(a.bandit_reward == doctest::Approx(1.0 / (1.0 + std::exp(-a.reward))));
  }
}

TEST_CASE("search config validation") {
  SearchConfig c;
  CHECK_NOTHROW(validate(c));
  c.budget = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.interval = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.interval = 1000;  // larger than the budget: evolution never fires
  CHECK_NOTHROW(validate(c));
  c = {};
  c.beta = -1;
  CHECK_THROWS_AS(validate(c), Error);
  CHECK(fingerprint(SearchConfig{}) == fingerprint(SearchConfig{}));
  SearchConfig d;
  d.seed = 1;
  CHECK(fingerprint(d) != fingerprint(SearchConfig{}));
}
