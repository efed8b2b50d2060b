#pragma once

// Chat, embedding and reward interfaces plus the deterministic in-process
// implementations used by tests and offline runs.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsearch {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using Messages = std::vector<ChatMessage>;

struct ChatRequest {
  Messages messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string model_name;
  std::optional<std::uint64_t> seed;
};

struct RewardRequest {
  std::string query;
  std::string response;
};

void validate(const ChatRequest& request);
void validate(const RewardRequest& request);

// Stable digest of a message list; keys scripted responses.
std::string prompt_hash(const Messages& messages);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

class EmbedBackend {
 public:
  virtual ~EmbedBackend() = default;
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) = 0;
};

class RewardBackend {
 public:
  virtual ~RewardBackend() = default;
  virtual double score(const RewardRequest& request) = 0;
};

// Settings shared by the live HTTP clients.
struct BackendProfile {
  std::string endpoint_url;
  std::string api_key_env;  // name of the environment variable, never the key
  std::string model_name;
  std::chrono::milliseconds timeout{60'000};
  int retry_limit = 3;
  std::chrono::milliseconds backoff_base{500};
};

void validate(const BackendProfile& profile);

// Calls `fn` until it succeeds, a non-retryable BackendError escapes, or
// retry_limit retries are spent. Backoff doubles from backoff_base.
template <typename Fn>
auto call_with_retries(const BackendProfile& profile, Fn&& fn) -> decltype(fn());

// Answers from a fixed script. Exact prompt-hash entries win; otherwise the
// first substring rule whose needle occurs in any message applies. Each key
// walks through its replies in order and then repeats the last one. A strict
// backend throws missing_script on a miss.
class ScriptedChat : public ChatBackend {
 public:
  explicit ScriptedChat(bool strict = true) : strict_(strict) {}

  void on_prompt(const Messages& messages, std::vector<std::string> replies);
  void on_hash(std::string hash, std::vector<std::string> replies);
  void on_substring(std::string needle, std::vector<std::string> replies);
  void set_fallback(std::string reply) { fallback_ = std::move(reply); }

  std::string complete(const ChatRequest& request) override;

  const std::vector<ChatRequest>& calls() const { return calls_; }

 private:
  struct Replies {
    std::vector<std::string> texts;
    std::size_t next = 0;
    std::string take();
  };

  bool strict_;
  std::map<std::string, Replies> by_hash_;
  std::vector<std::pair<std::string, Replies>> rules_;
  std::optional<std::string> fallback_;
  std::vector<ChatRequest> calls_;
  std::mutex mutex_;
};

// Scores from a table keyed by response text (or a default).
class ScriptedReward : public RewardBackend {
 public:
  void set(std::string response, double score) { table_[std::move(response)] = score; }
  void set_default(double score) { default_ = score; }
  // Replies in call order, ignoring the response text. Takes precedence.
  void set_sequence(std::vector<double> scores) { sequence_ = std::move(scores); }

  double score(const RewardRequest& request) override;
  std::size_t call_count() const { return calls_; }

 private:
  std::map<std::string, double> table_;
  std::optional<double> default_;
  std::vector<double> sequence_;
  std::size_t calls_ = 0;
  std::mutex mutex_;
};

// Feature-hashing embedder: each lowercased word contributes a seeded
// pseudo-random direction; the sum is L2-normalized. Identical texts map to
// identical vectors and texts sharing words land close together.
class HashEmbedder : public EmbedBackend {
 public:
  HashEmbedder(std::size_t dimension, std::uint64_t seed);

  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;
  std::vector<double> embed_one(std::string_view text) const;
  std::size_t dimension() const { return dimension_; }

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

}  // namespace tsearch

#include "tsearch/detail/retry.inl"
