#include "tsearch/backends.hpp"

#include <cctype>
#include <cmath>

#include "text_util.hpp"
#include "tsearch/errors.hpp"
#include "tsearch/rng.hpp"

namespace tsearch {

void validate(const ChatRequest& request) {
  if (request.messages.empty()) throw Error(ErrorCode::invalid_argument, "chat request has no messages");
  for (const auto& m : request.messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant")
      throw Error(ErrorCode::invalid_argument, "chat message has unsupported role '" + m.role + "'");
  }
  if (request.max_tokens <= 0) throw Error(ErrorCode::invalid_argument, "max_tokens must be positive");
  if (!(request.temperature >= 0.0 && request.temperature <= 2.0))
    throw Error(ErrorCode::invalid_argument, "temperature must lie in [0, 2]");
}

void validate(const RewardRequest& request) {
  if (request.query.empty()) throw Error(ErrorCode::invalid_argument, "reward request has an empty query");
  if (request.response.empty())
    throw Error(ErrorCode::invalid_argument, "reward request has an empty response");
}

void validate(const BackendProfile& profile) {
  if (profile.endpoint_url.empty()) throw Error(ErrorCode::config, "backend profile has no endpoint_url");
  if (profile.retry_limit < 0) throw Error(ErrorCode::config, "retry_limit must be >= 0");
  if (profile.timeout.count() <= 0) throw Error(ErrorCode::config, "timeout must be positive");
}

std::string prompt_hash(const Messages& messages) {
  // Length-prefixed so that role/content boundaries cannot alias.
  std::string canonical;
  for (const auto& m : messages) {
    canonical += std::to_string(m.role.size()) + ':' + m.role;
    canonical += std::to_string(m.content.size()) + ':' + m.content;
  }
  return text::sha256_hex(canonical);
}

std::string ScriptedChat::Replies::take() {
  const auto& reply = texts[std::min(next, texts.size() - 1)];
  if (next < texts.size()) ++next;
  return reply;
}

void ScriptedChat::on_prompt(const Messages& messages, std::vector<std::string> replies) {
  on_hash(prompt_hash(messages), std::move(replies));
}

void ScriptedChat::on_hash(std::string hash, std::vector<std::string> replies) {
  if (replies.empty()) throw Error(ErrorCode::invalid_argument, "script entry needs at least one reply");
  std::lock_guard lock(mutex_);
  by_hash_[std::move(hash)] = Replies{std::move(replies)};
}

void ScriptedChat::on_substring(std::string needle, std::vector<std::string> replies) {
  if (replies.empty()) throw Error(ErrorCode::invalid_argument, "script rule needs at least one reply");
  std::lock_guard lock(mutex_);
  rules_.emplace_back(std::move(needle), Replies{std::move(replies)});
}

std::string ScriptedChat::complete(const ChatRequest& request) {
  validate(request);
  std::lock_guard lock(mutex_);
  calls_.push_back(request);
  if (auto it = by_hash_.find(prompt_hash(request.messages)); it != by_hash_.end())
    return it->second.take();
  for (auto& [needle, replies] : rules_) {
    for (const auto& m : request.messages) {
      if (m.content.find(needle) != std::string::npos) return replies.take();
    }
  }
  if (fallback_ && !strict_) return *fallback_;
  if (strict_)
    throw BackendError("no scripted reply for prompt " + prompt_hash(request.messages), false, 1,
                       ErrorCode::missing_script);
  return {};
}

double ScriptedReward::score(const RewardRequest& request) {
  validate(request);
  std::lock_guard lock(mutex_);
  const std::size_t index = calls_++;
  if (!sequence_.empty()) return sequence_[std::min(index, sequence_.size() - 1)];
  if (auto it = table_.find(request.response); it != table_.end()) return it->second;
  if (default_) return *default_;
  throw BackendError("no scripted reward for response", false, 1, ErrorCode::missing_script);
}

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension == 0) throw Error(ErrorCode::config, "embedding dimension must be positive");
}

std::vector<double> HashEmbedder::embed_one(std::string_view text) const {
  std::vector<double> v(dimension_, 0.0);
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    Rng rng(seed_ ^ fnv1a64(word));
    for (auto& x : v) x += rng.uniform01() * 2.0 - 1.0;
    word.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else
      flush();
  }
  flush();

  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) {
    // Text without word characters still needs a defined direction.
    Rng rng(seed_ ^ fnv1a64(text) ^ 0xA5A5A5A5ULL);
    for (auto& x : v) x = rng.uniform01() * 2.0 - 1.0;
    for (double x : v) norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

std::vector<std::vector<double>> HashEmbedder::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorCode::invalid_argument, "embed needs at least one text");
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

}  // namespace tsearch
