#include "tsearch/search_config.hpp"

#include <cmath>
#include <json.hpp>

#include "text_util.hpp"
#include "tsearch/errors.hpp"

namespace tsearch {

void validate(const SearchConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::config, what);
  };
  require(c.budget >= 1, "budget must be >= 1");
  require(c.interval >= 1, "interval must be >= 1");
  require(std::isfinite(c.beta) && c.beta >= 0.0, "beta must be a non-negative number");
  require(c.n_self >= 1, "n_self must be >= 1");
  require(c.n_derived >= 1, "n_derived must be >= 1");
  require(c.retrieval_k >= 1, "retrieval_k must be >= 1");
  require(c.n_parents >= 1, "n_parents must be >= 1");
  require(c.n_children >= 1, "n_children must be >= 1");
  require(c.temperature >= 0.0 && c.temperature <= 2.0, "temperature must lie in [0, 2]");
  require(c.init_temperature >= 0.0 && c.init_temperature <= 2.0, "init_temperature must lie in [0, 2]");
  require(c.max_tokens >= 1, "max_tokens must be >= 1");
}

std::string fingerprint(const SearchConfig& c) {
  const nlohmann::json j = {
      {"budget", c.budget},         {"interval", c.interval},       {"beta", c.beta},
      {"n_self", c.n_self},         {"n_derived", c.n_derived},     {"retrieval_k", c.retrieval_k},
      {"n_parents", c.n_parents},   {"n_children", c.n_children},   {"temperature", c.temperature},
      {"init_temperature", c.init_temperature}, {"max_tokens", c.max_tokens}, {"seed", c.seed},
      {"squash_rewards", c.squash_rewards},
  };
  return text::sha256_hex(j.dump()).substr(0, 16);
}

}  // namespace tsearch
