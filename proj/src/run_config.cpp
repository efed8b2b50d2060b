#include "tsearch/run_config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tsearch/errors.hpp"
#include "tsearch/http_backends.hpp"
#include "tsearch/rng.hpp"
#include "tsearch/trace.hpp"

namespace tsearch {

using nlohmann::json;

namespace {

[[noreturn]] void unknown(const std::string& where, const std::string& key) {
  throw Error(ErrorCode::config, "unknown key '" + key + "' in " + where);
}

BackendSpec parse_backend(const json& j, const std::string& where, bool is_embed) {
  if (!j.is_object()) throw Error(ErrorCode::config, where + " must be an object");
  BackendSpec spec;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "simulated") spec.kind = BackendKind::simulated;
  else if (kind == "live") spec.kind = BackendKind::live;
  else throw Error(ErrorCode::config, where + ".kind must be 'simulated' or 'live'");

  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    if (spec.kind == BackendKind::simulated) {
      if (is_embed && key == "dimension") spec.dimension = value.get<std::size_t>();
      else unknown(where, key);
      continue;
    }
    if (key == "endpoint_url") spec.profile.endpoint_url = value.get<std::string>();
    else if (key == "api_key_env") spec.profile.api_key_env = value.get<std::string>();
    else if (key == "model_name") spec.profile.model_name = value.get<std::string>();
    else if (key == "timeout_ms") spec.profile.timeout = std::chrono::milliseconds(value.get<std::int64_t>());
    else if (key == "retry_limit") spec.profile.retry_limit = value.get<int>();
    else if (key == "backoff_ms") spec.profile.backoff_base = std::chrono::milliseconds(value.get<std::int64_t>());
    else unknown(where, key);
  }
  if (spec.kind == BackendKind::live) {
    validate(spec.profile);
    parse_endpoint(spec.profile.endpoint_url);
  }
  if (spec.kind == BackendKind::simulated && spec.dimension == 0)
    throw Error(ErrorCode::config, where + ".dimension must be positive");
  return spec;
}

WorldSpec parse_world(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::config, "backends.world must be an object");
  WorldSpec w;
  for (const auto& [key, value] : j.items()) {
    if (key == "arms") {
      for (const auto& a : value) {
        ArmSpec arm;
        for (const auto& [ak, av] : a.items()) {
          if (ak == "key") arm.key = av.get<std::string>();
          else if (ak == "mean") arm.mean = av.get<double>();
          else unknown("backends.world.arms[]", ak);
        }
        w.arms.push_back(arm);
      }
    } else if (key == "sigma") {
      w.sigma = value.get<double>();
    } else if (key == "noise") {
      const auto n = value.get<std::string>();
      if (n == "normal") w.noise = NoiseKind::normal;
      else if (n == "bernoulli") w.noise = NoiseKind::bernoulli;
      else throw Error(ErrorCode::config, "backends.world.noise must be 'normal' or 'bernoulli'");
    } else if (key == "child_uplift") {
      w.child_uplift = value.get<double>();
    } else if (key == "baseline_mean") {
      w.baseline_mean = value.get<double>();
    } else {
      unknown("backends.world", key);
    }
  }
  validate(w);
  return w;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& source_name) {
  RunConfig cfg;
  try {
    const json root = json::parse(json_text);
    if (!root.is_object()) throw Error(ErrorCode::config, "configuration root must be an object");
    for (const auto& [key, value] : root.items()) {
      if (key == "search") {
        cfg.search = search_config_from_json(value);
      } else if (key == "backends") {
        if (!value.is_object()) throw Error(ErrorCode::config, "backends must be an object");
        for (const auto& [bk, bv] : value.items()) {
          if (bk == "chat") cfg.chat = parse_backend(bv, "backends.chat", false);
          else if (bk == "reward") cfg.reward = parse_backend(bv, "backends.reward", false);
          else if (bk == "embed") cfg.embed = parse_backend(bv, "backends.embed", true);
          else if (bk == "world") cfg.world = parse_world(bv);
          else unknown("backends", bk);
        }
      } else if (key == "corpus_index") {
        cfg.corpus_index = value.get<std::string>();
      } else if (key == "concurrency") {
        cfg.concurrency = value.get<int>();
      } else {
        unknown("configuration", key);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, source_name + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::config, source_name + ": " + e.what());
  }

  auto fail = [&](const std::string& what) { throw Error(ErrorCode::config, source_name + ": " + what); };
  if (!cfg.chat) fail("backends.chat is required");
  if (!cfg.reward) fail("backends.reward is required");
  const bool needs_world = cfg.chat->kind == BackendKind::simulated || cfg.reward->kind == BackendKind::simulated;
  if (needs_world && !cfg.world) fail("simulated chat or reward backends need backends.world");
  if (cfg.corpus_index && !cfg.embed) fail("corpus_index requires backends.embed");
  if (cfg.concurrency < 1) fail("concurrency must be >= 1");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open configuration file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_run_config(ss.str(), path);
  if (cfg.corpus_index && std::filesystem::path(*cfg.corpus_index).is_relative())
    cfg.corpus_index = (std::filesystem::path(path).parent_path() / *cfg.corpus_index).string();
  return cfg;
}

void check_credentials(const RunConfig& config) {
  for (const auto* spec : {&config.chat, &config.reward, &config.embed}) {
    if (!*spec || (*spec)->kind != BackendKind::live || (*spec)->profile.api_key_env.empty()) continue;
    const char* value = std::getenv((*spec)->profile.api_key_env.c_str());
    if (value == nullptr || *value == '\0')
      throw Error(ErrorCode::config, "environment variable " + (*spec)->profile.api_key_env + " is not set");
  }
}

std::unique_ptr<EmbedBackend> make_embed_backend(const BackendSpec& spec, std::uint64_t seed) {
  if (spec.kind == BackendKind::simulated) return std::make_unique<HashEmbedder>(spec.dimension, seed);
  return std::make_unique<HttpEmbedClient>(spec.profile);
}

BackendSet::BackendSet(const RunConfig& config, std::uint64_t seed) {
  if (config.world) {
    WorldSpec w = *config.world;
    w.seed = substream(seed, "simulator-noise");
    world_ = std::make_unique<SyntheticWorld>(std::move(w));
  }
  if (config.chat->kind == BackendKind::live) {
    live_chat_ = std::make_unique<HttpChatClient>(config.chat->profile);
    chat_ = live_chat_.get();
    chat_model_ = config.chat->profile.model_name;
  } else {
    chat_ = &world_->chat();
  }
  if (config.reward->kind == BackendKind::live) {
    live_reward_ = std::make_unique<HttpRewardClient>(config.reward->profile);
    reward_ = live_reward_.get();
  } else {
    reward_ = &world_->reward();
  }
  // The hash embedder's seed is fixed so query and corpus embeddings agree.
  if (config.embed) embed_ = make_embed_backend(*config.embed, 0);
}

}  // namespace tsearch
