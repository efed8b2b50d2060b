#pragma once

// Prompt assembly from the versioned templates under assets/prompts/.

#include <span>
#include <string>
#include <string_view>

#include "tsearch/backends.hpp"
#include "tsearch/thought_pool.hpp"

namespace tsearch {

struct CorpusExample;

namespace prompts {

// Bumped whenever any template text changes; recorded in every trace.
inline constexpr std::string_view kTemplateVersion = "v1";

// Retrieved responses are cut to this many bytes inside derivation prompts.
inline constexpr std::size_t kMaxExampleResponseBytes = 2000;

std::string self_compose(std::string_view query, int n);
std::string derive(std::string_view query, std::span<const CorpusExample> examples, int n);
std::string evolve(std::string_view query, std::span<const MetaThought> parents, int n);
std::string format_reminder(int n);
std::string generation_system(const MetaThought& thought);
std::string_view cot_instruction();

// Prompt for one attempt: system message carrying the mindset and strategy,
// user message carrying the query.
Messages compose(const MetaThought& thought, std::string_view query);

// Follow-up sent once when a thought-list reply could not be parsed.
Messages with_reminder(Messages original, std::string_view bad_reply, int n);

}  // namespace prompts
}  // namespace tsearch
