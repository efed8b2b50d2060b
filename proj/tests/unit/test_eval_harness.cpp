#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tsearch/backends.hpp"
#include "tsearch/errors.hpp"
#include "tsearch/eval_harness.hpp"
#include "tsearch/prompts.hpp"
#include "tsearch/synthetic_world.hpp"

using namespace tsearch;

namespace {

std::vector<Choice> abcd() { return {{'A', "one"}, {'B', "two"}, {'C', "three"}, {'D', "four"}}; }

EvalItem mc_item() { return {"m1", "Which is the second option?", abcd(), "B"}; }

}  // namespace

TEST_CASE("extract_mmlu_answer: regex cascade") {
  Rng rng(1);
  const auto ch = abcd();
  CHECK(extract_mmlu_answer("Weighing it all, so the answer is (C).", ch, rng) == 'C');
  CHECK(extract_mmlu_answer("the answer is D", ch, rng) == 'D');
  CHECK(extract_mmlu_answer("Answer: (B)", ch, rng) == 'B');
  CHECK(extract_mmlu_answer("answer:A", ch, rng) == 'A');
  CHECK(extract_mmlu_answer("Answer: C but the answer is (A)", ch, rng) == 'A');  // primary wins
  CHECK(extract_mmlu_answer("the answer is (J)", ch, rng) == 'J');
}

TEST_CASE("extract_mmlu_answer: seeded fallback") {
  const auto ch = abcd();
  Rng a(77), b(77);
  const char x = extract_mmlu_answer("I am unsure.", ch, a);
  CHECK(x == extract_mmlu_answer("I am unsure.", ch, b));
  CHECK(x >= 'A');
  CHECK(x <= 'D');
  CHECK_THROWS_AS(extract_mmlu_answer("x", std::vector<Choice>{}, a), Error);
}

TEST_CASE("extract_gsm8k_number") {
  CHECK(extract_gsm8k_number("The answer is 42.") == "42");
  CHECK(extract_gsm8k_number("so that totals 1,234 apples") == "1234");
  CHECK(extract_gsm8k_number("no numbers here") == std::nullopt);
  CHECK(extract_gsm8k_number("from 3 to -2.5") == "-2.5");
  CHECK(extract_gsm8k_number("+7 degrees") == "7");
}

TEST_CASE("score_exact_match") {
  CHECK(score_exact_match("42", "42", AnswerKind::numeric));
  CHECK(score_exact_match("42.0", "42", AnswerKind::numeric));
  CHECK(score_exact_match("c", "C", AnswerKind::letter));
  CHECK_FALSE(score_exact_match("41", "42", AnswerKind::numeric));
  CHECK_FALSE(score_exact_match("", "A", AnswerKind::letter));
}

TEST_CASE("run_baseline: one_pass makes a single greedy call") {
  ScriptedChat chat;
  chat.on_substring("second option", {"the answer is (B)"});
  EvalBackends b{&chat};
  auto o = run_baseline(EvalMode::one_pass, mc_item(), b, 1, 0);
  CHECK(chat.calls().size() == 1);
  CHECK(chat.calls()[0].temperature == 0.0);
  CHECK(o.n_samples_used == 1);
  CHECK(o.predicted == "B");
  CHECK(o.correct);
  CHECK_FALSE(o.best_reward.has_value());
  CHECK_THROWS_AS(run_baseline(EvalMode::one_pass, mc_item(), b, 2, 0), Error);
}

TEST_CASE("run_baseline: best_of_n keeps the highest reward") {
  ScriptedChat chat;
  chat.on_substring("second option", {"s1 the answer is A", "s2 the answer is B", "s3 the answer is C", "s4 the answer is D"});
  ScriptedReward reward;
  reward.set_sequence({0.1, 0.9, 0.3, 0.2});
  EvalBackends b{&chat, &reward};
  auto o = run_baseline(EvalMode::best_of_n, mc_item(), b, 4, 0);
  CHECK(o.response == "s2 the answer is B");
  CHECK(o.best_reward == 0.9);
  CHECK(o.n_samples_used == 4);
  CHECK(o.correct);
  for (const auto& c : chat.calls()) CHECK(c.temperature == doctest::Approx(0.6));
  CHECK_THROWS_AS(run_baseline(EvalMode::best_of_n, mc_item(), b, 129, 0), Error);
}

TEST_CASE("run_baseline: CoT prompts carry the instruction") {
  ScriptedChat chat;
  chat.on_substring("second option", {"the answer is (B)"});
  ScriptedReward reward;
  reward.set_default(0.5);
  EvalBackends b{&chat, &reward};
  run_baseline(EvalMode::best_of_n_cot, mc_item(), b, 4, 0);
  REQUIRE(chat.calls().size() == 4);
  for (const auto& c : chat.calls())
    CHECK(c.messages.back().content.find(std::string(prompts::cot_instruction())) != std::string::npos);

  ScriptedChat plain;
  plain.on_substring("second option", {"the answer is (B)"});
  EvalBackends pb{&plain, &reward};
  run_baseline(EvalMode::best_of_n, mc_item(), pb, 2, 0);
  for (const auto& c : plain.calls())
    CHECK(c.messages.back().content.find(std::string(prompts::cot_instruction())) == std::string::npos);
}

TEST_CASE("run_baseline: failed samples are skipped") {
  ScriptedChat chat;
  chat.on_substring("second option", {"the answer is (B)"});
  ScriptedReward reward;  // no default: unknown responses fail
  EvalBackends b{&chat, &reward};
  CHECK_THROWS_AS(run_baseline(EvalMode::best_of_n, mc_item(), b, 3, 0), BackendError);
  reward.set("the answer is (B)", 0.4);
  CHECK(run_baseline(EvalMode::best_of_n, mc_item(), b, 3, 0).n_samples_used == 3);
}

TEST_CASE("run_metascale over the synthetic world") {
  SyntheticWorld w({{{"a", 0.3}, {"b", 0.7}}, 0.05});
  EvalBackends b{&w.chat(), &w.reward()};
  SearchConfig cfg;
  cfg.budget = 8;
  cfg.interval = 4;
  EvalItem numeric{"g1", "What is 6*7?", {}, "42"};
  auto o = run_metascale(numeric, b, cfg);
  CHECK(o.mode == EvalMode::metascale);
  CHECK(o.n_samples_used == 8);
  CHECK(o.best_reward.has_value());
}

TEST_CASE("item validation") {
  CHECK_NOTHROW(validate(mc_item()));
  CHECK_THROWS_AS(validate(EvalItem{"x", "q", abcd(), "E"}), Error);
  CHECK_THROWS_AS(validate(EvalItem{"x", "q", {}, "forty"}), Error);
  CHECK_THROWS_AS(validate(EvalItem{"", "q", {}, "4"}), Error);
  CHECK(format_question(mc_item()).find("\nB. two") != std::string::npos);
}

TEST_CASE("accuracy") {
  auto outcome = [](bool c) {
    EvalOutcome o;
    o.correct = c;
    return o;
  };
  std::vector<EvalOutcome> half{outcome(true), outcome(true), outcome(false), outcome(false)};
  CHECK(accuracy(half) == 0.5);
  std::vector<EvalOutcome> all{outcome(true), outcome(true)};
  CHECK(accuracy(all) == 1.0);
  std::vector<EvalOutcome> none{outcome(false)};
  CHECK(accuracy(none) == 0.0);
  CHECK_THROWS_AS(accuracy(std::vector<EvalOutcome>{}), Error);
  auto mixed = half;
  mixed[1].mode = EvalMode::cot;
  CHECK_THROWS_AS(accuracy(mixed), Error);
}

TEST_CASE("mode names round trip") {
  for (auto m : {EvalMode::one_pass, EvalMode::cot, EvalMode::best_of_n, EvalMode::best_of_n_cot, EvalMode::metascale})
    CHECK(eval_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(eval_mode_from_string("best_of_three"), Error);
}
