#pragma once

// Live clients speaking JSON over HTTP(S).
//
//   chat:   OpenAI-compatible chat completions. POST {model, messages,
//           temperature, max_tokens[, seed]}; text read from
//           choices[0].message.content.
//   embed:  POST {model, input: [text...]} -> {data: [{embedding: [...]}]}
//   reward: POST {query, response} -> {score: number}
//
// endpoint_url is the full URL including the path. When api_key_env is set
// the named variable is sent as a bearer token. Temperature 0 does not make
// providers deterministic; identical live requests may differ.

#include <memory>

#include "tsearch/backends.hpp"

namespace tsearch {

struct Endpoint {
  std::string scheme_host_port;  // e.g. https://api.example.com:443
  std::string path;              // e.g. /v1/chat/completions
};

Endpoint parse_endpoint(std::string_view url);

class HttpChatClient : public ChatBackend {
 public:
  explicit HttpChatClient(BackendProfile profile);
  std::string complete(const ChatRequest& request) override;

 private:
  BackendProfile profile_;
  Endpoint endpoint_;
};

class HttpEmbedClient : public EmbedBackend {
 public:
  explicit HttpEmbedClient(BackendProfile profile);
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;

 private:
  BackendProfile profile_;
  Endpoint endpoint_;
};

class HttpRewardClient : public RewardBackend {
 public:
  explicit HttpRewardClient(BackendProfile profile);
  double score(const RewardRequest& request) override;

 private:
  BackendProfile profile_;
  Endpoint endpoint_;
};

}  // namespace tsearch
