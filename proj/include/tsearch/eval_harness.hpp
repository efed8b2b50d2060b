#pragma once

// Benchmark scoring and the baseline inference modes (1-pass, CoT,
// best-of-N, best-of-N with CoT) next to the meta-thought search.

#include <cstdint>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsearch/backends.hpp"
#include "tsearch/engine.hpp"
#include "tsearch/rng.hpp"

namespace tsearch {

struct Choice {
  char letter = 'A';
  std::string text;

  friend bool operator==(const Choice&, const Choice&) = default;
};

enum class AnswerKind { numeric, letter };

struct EvalItem {
  std::string id;
  std::string question;
  std::vector<Choice> choices;  // empty for numeric items
  std::string reference;

  AnswerKind kind() const { return choices.empty() ? AnswerKind::numeric : AnswerKind::letter; }
  friend bool operator==(const EvalItem&, const EvalItem&) = default;
};

void validate(const EvalItem& item);

enum class EvalMode { one_pass, cot, best_of_n, best_of_n_cot, metascale };

const char* to_string(EvalMode mode);
EvalMode eval_mode_from_string(std::string_view text);  // throws invalid_argument

struct EvalOutcome {
  std::string item_id;
  EvalMode mode = EvalMode::one_pass;
  int budget = 1;
  std::string predicted;
  bool correct = false;
  int n_samples_used = 0;
  std::optional<double> best_reward;
  std::string response;

  friend bool operator==(const EvalOutcome&, const EvalOutcome&) = default;
};

// MMLU-Pro style cascade. `primary` is tried first, then `secondary`; when
// neither matches, a uniformly random letter from the item's choices.
struct AnswerPatterns {
  // Reported forms: 'answer is \(?\([A-J]\)?\)' then '\.*\[aA\]nswer:\s*\([A-J]\)'.
  // The backslashes there are typesetting escapes; these are the working forms.
  static const std::regex& primary();    // answer is \(?([A-J])\)?
  static const std::regex& secondary();  // [aA]nswer:\s*\(?([A-J])\)?
};

char extract_mmlu_answer(std::string_view text, std::span<const Choice> choices, Rng& rng);

// Last number in the text; commas and trailing punctuation removed, sign and
// decimals kept. Returned as the normalized decimal string.
std::optional<std::string> extract_gsm8k_number(std::string_view text);

bool score_exact_match(std::string_view predicted, std::string_view reference, AnswerKind kind);

// User-facing prompt text for an item; multiple-choice options are listed
// one per line as "A. text".
std::string format_question(const EvalItem& item);

struct EvalBackends {
  ChatBackend* chat = nullptr;
  RewardBackend* reward = nullptr;
  EmbedBackend* embed = nullptr;
  const CorpusIndex* corpus = nullptr;
  std::string chat_model;
  int max_tokens = 1024;
};

// one_pass / cot: a single temperature-0 call (n must be 1). best_of_n(_cot):
// n samples (1..128) at temperature 0.6, the highest reward is kept; failed
// samples are skipped as long as one succeeds.
EvalOutcome run_baseline(EvalMode mode, const EvalItem& item, const EvalBackends& backends, int n,
                         std::uint64_t seed);

// Meta-thought search with the given budget, then extraction on the best response.
EvalOutcome run_metascale(const EvalItem& item, const EvalBackends& backends, SearchConfig config);

double accuracy(std::span<const EvalOutcome> outcomes);

}  // namespace tsearch
