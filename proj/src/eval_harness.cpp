#include "tsearch/eval_harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "text_util.hpp"
#include "tsearch/errors.hpp"
#include "tsearch/prompts.hpp"

namespace tsearch {

void validate(const EvalItem& item) {
  if (item.id.empty()) throw Error(ErrorCode::invalid_argument, "eval item has an empty id");
  if (text::trim(item.question).empty())
    throw Error(ErrorCode::invalid_argument, "eval item '" + item.id + "' has an empty question");
  if (item.choices.empty()) {
    if (!extract_gsm8k_number(item.reference))
      throw Error(ErrorCode::invalid_argument, "numeric item '" + item.id + "' has a non-numeric reference");
    return;
  }
  if (item.choices.size() < 2)
    throw Error(ErrorCode::invalid_argument, "multiple-choice item '" + item.id + "' needs at least two options");
  std::string seen;
  for (const auto& c : item.choices) {
    if (c.letter < 'A' || c.letter > 'J')
      throw Error(ErrorCode::invalid_argument, "item '" + item.id + "' has an option letter outside A..J");
    if (seen.find(c.letter) != std::string::npos)
      throw Error(ErrorCode::invalid_argument, "item '" + item.id + "' repeats option " + std::string(1, c.letter));
    seen += c.letter;
  }
  if (item.reference.size() != 1 ||
      seen.find(static_cast<char>(std::toupper(static_cast<unsigned char>(item.reference[0])))) == std::string::npos)
    throw Error(ErrorCode::invalid_argument, "item '" + item.id + "' reference is not one of its option letters");
}

const char* to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::one_pass: return "one_pass";
    case EvalMode::cot: return "cot";
    case EvalMode::best_of_n: return "best_of_n";
    case EvalMode::best_of_n_cot: return "best_of_n_cot";
    case EvalMode::metascale: return "metascale";
  }
  return "unknown";
}

EvalMode eval_mode_from_string(std::string_view text) {
  for (auto m : {EvalMode::one_pass, EvalMode::cot, EvalMode::best_of_n, EvalMode::best_of_n_cot, EvalMode::metascale}) {
    if (text == to_string(m)) return m;
  }
  throw Error(ErrorCode::invalid_argument, "unknown evaluation mode '" + std::string(text) + "'");
}

const std::regex& AnswerPatterns::primary() {
  static const std::regex re(R"(answer is \(?([A-J])\)?)");
  return re;
}

const std::regex& AnswerPatterns::secondary() {
  static const std::regex re(R"([aA]nswer:\s*\(?([A-J])\)?)");
  return re;
}

char extract_mmlu_answer(std::string_view text, std::span<const Choice> choices, Rng& rng) {
  if (choices.empty()) throw Error(ErrorCode::invalid_argument, "extraction needs the item's choices");
  std::match_results<std::string_view::const_iterator> m;
  for (const auto* re : {&AnswerPatterns::primary(), &AnswerPatterns::secondary()}) {
    if (std::regex_search(text.begin(), text.end(), m, *re)) return m.str(1)[0];
  }
  return choices[rng.uniform_index(choices.size())].letter;
}

std::optional<std::string> extract_gsm8k_number(std::string_view text) {
  static const std::regex number(R"([-+]?\d[\d,]*(?:\.\d+)?)");
  std::optional<std::string> last;
  for (auto it = std::cregex_iterator(text.data(), text.data() + text.size(), number); it != std::cregex_iterator();
       ++it) {
    last = it->str();
  }
  if (!last) return std::nullopt;
  std::string out;
  for (char c : *last) {
    if (c != ',') out += c;
  }
  if (!out.empty() && out.front() == '+') out.erase(0, 1);
  return out;
}

bool score_exact_match(std::string_view predicted, std::string_view reference, AnswerKind kind) {
  if (kind == AnswerKind::letter) {
    const auto p = text::trim(predicted);
    const auto r = text::trim(reference);
    return !p.empty() && text::to_lower(p) == text::to_lower(r);
  }
  const auto p = extract_gsm8k_number(predicted);
  const auto r = extract_gsm8k_number(reference);
  if (!p || !r) return false;
  return std::strtod(p->c_str(), nullptr) == std::strtod(r->c_str(), nullptr);
}

std::string format_question(const EvalItem& item) {
  std::string out = item.question;
  if (!item.choices.empty()) {
    out += "\n\nOptions:";
    for (const auto& c : item.choices) {
      out += '\n';
      out += c.letter;
      out += ". ";
      out += c.text;
    }
  }
  return out;
}

namespace {

void finish(EvalOutcome& outcome, const EvalItem& item, std::uint64_t seed) {
  if (item.kind() == AnswerKind::letter) {
    Rng rng(substream(substream(seed, "selection-fallback"), fnv1a64(item.id)));
    outcome.predicted = std::string(1, extract_mmlu_answer(outcome.response, item.choices, rng));
  } else {
    outcome.predicted = extract_gsm8k_number(outcome.response).value_or("");
  }
  outcome.correct = score_exact_match(outcome.predicted, item.reference, item.kind());
}

bool uses_cot(EvalMode mode) { return mode == EvalMode::cot || mode == EvalMode::best_of_n_cot; }

}  // namespace

EvalOutcome run_baseline(EvalMode mode, const EvalItem& item, const EvalBackends& backends, int n,
                         std::uint64_t seed) {
  validate(item);
  if (mode == EvalMode::metascale) throw Error(ErrorCode::invalid_argument, "metascale is not a baseline mode");
  if (backends.chat == nullptr) throw Error(ErrorCode::config, "baseline needs a chat backend");
  const bool sampling = mode == EvalMode::best_of_n || mode == EvalMode::best_of_n_cot;
  if (!sampling && n != 1) throw Error(ErrorCode::invalid_argument, "1-pass modes take exactly one sample");
  if (sampling && (n < 1 || n > 128)) throw Error(ErrorCode::invalid_argument, "best-of-n takes 1..128 samples");
  if (sampling && backends.reward == nullptr) throw Error(ErrorCode::config, "best-of-n needs a reward backend");

  std::string user = format_question(item);
  if (uses_cot(mode)) {
    user += "\n\n";
    user += prompts::cot_instruction();
  }

  EvalOutcome outcome;
  outcome.item_id = item.id;
  outcome.mode = mode;
  outcome.budget = n;

  ChatRequest request;
  request.messages = {{"user", user}};
  request.max_tokens = backends.max_tokens;
  request.model_name = backends.chat_model;

  if (!sampling) {
    request.temperature = 0.0;
    request.seed = substream(seed, "sampling");
    outcome.response = backends.chat->complete(request);
    outcome.n_samples_used = 1;
    finish(outcome, item, seed);
    return outcome;
  }

  request.temperature = 0.6;
  const std::string query = format_question(item);
  std::optional<BackendError> last_error;
  for (int i = 0; i < n; ++i) {
    request.seed = substream(substream(seed, "sampling"), static_cast<std::uint64_t>(i + 1));
    try {
      std::string response = backends.chat->complete(request);
      const double reward = backends.reward->score({query, response});
      if (!std::isfinite(reward)) throw BackendError("reward backend returned a non-finite score", false);
      ++outcome.n_samples_used;
      if (!outcome.best_reward || reward > *outcome.best_reward) {
        outcome.best_reward = reward;
        outcome.response = std::move(response);
      }
    } catch (const BackendError& e) {
      last_error = e;
    }
  }
  if (outcome.n_samples_used == 0) throw *last_error;
  finish(outcome, item, seed);
  return outcome;
}

EvalOutcome run_metascale(const EvalItem& item, const EvalBackends& backends, SearchConfig config) {
  validate(item);
  config.max_tokens = backends.max_tokens;
  Backends b{backends.chat, backends.reward, backends.embed, backends.corpus, backends.chat_model};
  auto result = run_search(format_question(item), config, b);

  EvalOutcome outcome;
  outcome.item_id = item.id;
  outcome.mode = EvalMode::metascale;
  outcome.budget = config.budget;
  outcome.response = result.best.response;
  outcome.best_reward = result.best.reward;
  outcome.n_samples_used = static_cast<int>(result.trace.attempts.size());
  finish(outcome, item, config.seed);
  return outcome;
}

double accuracy(std::span<const EvalOutcome> outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::invalid_argument, "accuracy of an empty outcome set");
  const auto mode = outcomes.front().mode;
  std::size_t correct = 0;
  for (const auto& o : outcomes) {
    if (o.mode != mode) throw Error(ErrorCode::invalid_argument, "accuracy mixes evaluation modes");
    if (o.correct) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(outcomes.size());
}

}  // namespace tsearch
