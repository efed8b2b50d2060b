#pragma once

// Run configuration file (JSON) and the backends it describes.
//
// {
//   "search":   { SearchConfig fields },
//   "backends": {
//     "chat":   {"kind": "simulated"} | {"kind": "live", "endpoint_url": ..., "api_key_env": ...,
//                "model_name": ..., "timeout_ms": ..., "retry_limit": ..., "backoff_ms": ...},
//     "reward": same shape as chat,
//     "embed":  {"kind": "simulated", "dimension": 16} | live profile,
//     "world":  {"arms": [{"key": "a0", "mean": 0.5}, ...], "sigma": 0.1,
//                "noise": "normal" | "bernoulli", "child_uplift": 0.05, "baseline_mean": 0.0}
//   },
//   "corpus_index": "path/to/index.jsonl",
//   "concurrency": 1
// }
//
// Unknown keys anywhere are rejected. Secrets are referenced only through
// api_key_env. load_run_config resolves a relative corpus_index against the
// config file's directory.

#include <memory>
#include <optional>
#include <string>

#include "tsearch/backends.hpp"
#include "tsearch/initializer.hpp"
#include "tsearch/search_config.hpp"
#include "tsearch/synthetic_world.hpp"

namespace tsearch {

enum class BackendKind { simulated, live };

struct BackendSpec {
  BackendKind kind = BackendKind::simulated;
  BackendProfile profile;      // live only
  std::size_t dimension = 16;  // simulated embedder only
};

struct RunConfig {
  SearchConfig search;
  std::optional<BackendSpec> chat;
  std::optional<BackendSpec> reward;
  std::optional<BackendSpec> embed;
  std::optional<WorldSpec> world;  // seed is filled per query
  std::optional<std::string> corpus_index;
  int concurrency = 1;
};

RunConfig parse_run_config(const std::string& json_text, const std::string& source_name = "<config>");
RunConfig load_run_config(const std::string& path);

// Concrete backends for one query. Simulated backends get their own world
// seeded from `seed`, so queries never share simulator state.
class BackendSet {
 public:
  BackendSet(const RunConfig& config, std::uint64_t seed);

  ChatBackend* chat() const { return chat_; }
  RewardBackend* reward() const { return reward_; }
  EmbedBackend* embed() const { return embed_.get(); }
  std::string chat_model() const { return chat_model_; }

 private:
  std::unique_ptr<SyntheticWorld> world_;
  std::unique_ptr<ChatBackend> live_chat_;
  std::unique_ptr<RewardBackend> live_reward_;
  std::unique_ptr<EmbedBackend> embed_;
  ChatBackend* chat_ = nullptr;
  RewardBackend* reward_ = nullptr;
  std::string chat_model_;
};

// Fails with Error(config) when a live backend names an unset key variable.
void check_credentials(const RunConfig& config);

// Embedding backend alone, for corpus indexing.
std::unique_ptr<EmbedBackend> make_embed_backend(const BackendSpec& spec, std::uint64_t seed);

}  // namespace tsearch
