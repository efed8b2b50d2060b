#pragma once

#include <thread>

#include "tsearch/errors.hpp"

namespace tsearch {

template <typename Fn>
auto call_with_retries(const BackendProfile& profile, Fn&& fn) -> decltype(fn()) {
  auto delay = profile.backoff_base;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt > profile.retry_limit)
        throw BackendError(e.what(), e.retryable(), attempt, e.code());
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

}  // namespace tsearch
