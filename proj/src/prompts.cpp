#include "tsearch/prompts.hpp"

#include "prompt_assets.inc"
#include "text_util.hpp"
#include "tsearch/errors.hpp"
#include "tsearch/initializer.hpp"

namespace tsearch::prompts {

namespace {

std::string strip_trailing_newlines(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  return strip_trailing_newlines(text::render(tmpl, vars));
}

// Cuts at a byte budget without splitting a UTF-8 sequence.
std::string clip_utf8(std::string_view s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return std::string(s);
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return std::string(s.substr(0, cut)) + " [...]";
}

void check_count(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "requested thought count must be >= 1");
}

}  // namespace

std::string self_compose(std::string_view query, int n) {
  check_count(n);
  return render(assets::self_compose, {{"n", std::to_string(n)}, {"query", std::string(query)}});
}

std::string derive(std::string_view query, std::span<const CorpusExample> examples, int n) {
  check_count(n);
  std::string block;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    block += text::render(assets::derive_example,
                          {{"index", std::to_string(i + 1)},
                           {"task", examples[i].task},
                           {"response", clip_utf8(examples[i].response, kMaxExampleResponseBytes)}});
  }
  return render(assets::derive,
                {{"n", std::to_string(n)}, {"query", std::string(query)}, {"examples", block}});
}

std::string evolve(std::string_view query, std::span<const MetaThought> parents, int n) {
  check_count(n);
  std::string block;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    block += text::render(assets::evolve_parent, {{"index", std::to_string(i + 1)},
                                                  {"mindset", parents[i].mindset},
                                                  {"strategy", parents[i].strategy}});
  }
  return render(assets::evolve,
                {{"n", std::to_string(n)}, {"query", std::string(query)}, {"parents", block}});
}

std::string format_reminder(int n) {
  check_count(n);
  return render(assets::format_reminder, {{"n", std::to_string(n)}});
}

std::string generation_system(const MetaThought& thought) {
  return render(assets::generation_system,
                {{"mindset", std::string(text::trim(thought.mindset))},
                 {"strategy", std::string(text::trim(thought.strategy))}});
}

std::string_view cot_instruction() { return assets::cot_instruction; }

Messages compose(const MetaThought& thought, std::string_view query) {
  validate(thought);
  if (text::trim(query).empty()) throw Error(ErrorCode::invalid_argument, "query is empty");
  return {{"system", generation_system(thought)}, {"user", std::string(query)}};
}

Messages with_reminder(Messages original, std::string_view bad_reply, int n) {
  original.push_back({"assistant", std::string(bad_reply)});
  original.push_back({"user", format_reminder(n)});
  return original;
}

}  // namespace tsearch::prompts
