#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "tsearch/http_backends.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <json.hpp>

#include "tsearch/errors.hpp"

namespace tsearch {

using nlohmann::json;

Endpoint parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos)
    throw Error(ErrorCode::config, "endpoint url '" + std::string(url) + "' has no scheme");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw Error(ErrorCode::config, "endpoint url must use http or https");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_start == std::string_view::npos) {
    ep.scheme_host_port = std::string(url);
    ep.path = "/";
  } else {
    ep.scheme_host_port = std::string(url.substr(0, path_start));
    ep.path = std::string(url.substr(path_start));
  }
  if (ep.scheme_host_port.size() <= scheme_end + 3)
    throw Error(ErrorCode::config, "endpoint url '" + std::string(url) + "' has no host");
  return ep;
}

namespace {

httplib::Headers auth_headers(const BackendProfile& profile) {
  httplib::Headers headers;
  if (profile.api_key_env.empty()) return headers;
  const char* key = std::getenv(profile.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw Error(ErrorCode::config, "environment variable " + profile.api_key_env + " is not set");
  headers.emplace("Authorization", std::string("Bearer ") + key);
  return headers;
}

json post_json(const BackendProfile& profile, const Endpoint& ep, const json& body) {
  httplib::Client client(ep.scheme_host_port);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(profile.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(profile.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  auto result = client.Post(ep.path, auth_headers(profile), body.dump(), "application/json");
  if (!result)
    throw BackendError("transport failure calling " + ep.scheme_host_port + ep.path + ": " +
                           httplib::to_string(result.error()),
                       true);
  const int status = result->status;
  if (status < 200 || status >= 300) {
    // 4xx other than rate limiting will not get better on retry.
    const bool retryable = status == 408 || status == 429 || status >= 500;
    throw BackendError("HTTP " + std::to_string(status) + " from " + ep.path, retryable);
  }
  try {
    return json::parse(result->body);
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed JSON body: ") + e.what(), false);
  }
}

template <typename Fn>
auto decode(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected response shape: ") + e.what(), false);
  }
}

}  // namespace

HttpChatClient::HttpChatClient(BackendProfile profile)
    : profile_(std::move(profile)), endpoint_(parse_endpoint(profile_.endpoint_url)) {
  validate(profile_);
}

std::string HttpChatClient::complete(const ChatRequest& request) {
  validate(request);
  json body;
  body["model"] = request.model_name.empty() ? profile_.model_name : request.model_name;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  if (request.seed) body["seed"] = *request.seed;
  body["messages"] = json::array();
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  return call_with_retries(profile_, [&] {
    const json reply = post_json(profile_, endpoint_, body);
    return decode([&] {
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw BackendError("assistant content is not a string", false);
      return content.get<std::string>();
    });
  });
}

HttpEmbedClient::HttpEmbedClient(BackendProfile profile)
    : profile_(std::move(profile)), endpoint_(parse_endpoint(profile_.endpoint_url)) {
  validate(profile_);
}

std::vector<std::vector<double>> HttpEmbedClient::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorCode::invalid_argument, "embed needs at least one text");
  json body;
  if (!profile_.model_name.empty()) body["model"] = profile_.model_name;
  body["input"] = json::array();
  for (const auto& t : texts) body["input"].push_back(t);

  return call_with_retries(profile_, [&] {
    const json reply = post_json(profile_, endpoint_, body);
    auto vectors = decode([&] {
      std::vector<std::vector<double>> out;
      for (const auto& item : reply.at("data")) out.push_back(item.at("embedding").get<std::vector<double>>());
      return out;
    });
    if (vectors.size() != texts.size())
      throw BackendError("embedding endpoint returned " + std::to_string(vectors.size()) + " vectors for " +
                             std::to_string(texts.size()) + " inputs",
                         false);
    for (const auto& v : vectors) {
      if (v.empty() || v.size() != vectors.front().size())
        throw BackendError("embedding dimensions disagree within a batch", false);
    }
    return vectors;
  });
}

HttpRewardClient::HttpRewardClient(BackendProfile profile)
    : profile_(std::move(profile)), endpoint_(parse_endpoint(profile_.endpoint_url)) {
  validate(profile_);
}

double HttpRewardClient::score(const RewardRequest& request) {
  validate(request);
  const json body = {{"query", request.query}, {"response", request.response}};
  return call_with_retries(profile_, [&] {
    const json reply = post_json(profile_, endpoint_, body);
    return decode([&] {
      const auto& value = reply.at("score");
      if (!value.is_number()) throw BackendError("reward score is not a number", false);
      const double s = value.get<double>();
      if (!std::isfinite(s)) throw BackendError("reward score is not finite", false);
      return s;
    });
  });
}

}  // namespace tsearch
