// Copyright 2026 The objexplore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Thin wrappers over cpp-httplib's client shared by the HTTP-speaking
// modules. Internal.

#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "objexplore/error.hpp"

namespace objexplore::detail {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/', may carry a query
};

Url split_url(const std::string& url);

struct HttpResult {
  int status = 0;
  std::string body;
  std::string content_type;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// Throws Error(kTimeout) or Error(kNetwork) on transport failure. Any HTTP
/// status is returned to the caller.
HttpResult http_get(const std::string& url, const Headers& headers,
                    std::chrono::milliseconds timeout);
HttpResult http_post(const std::string& url, const std::string& body,
                     const std::string& content_type,
                     std::chrono::milliseconds timeout, const Headers& headers = {});

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{200};
};

/// Runs `fn` until it succeeds or the attempts are exhausted. Only network
/// and timeout errors are retried; the delay doubles after each failure.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  auto delay = policy.base_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const Error& e) {
      bool retryable = e.code() == ErrorCode::kNetwork || e.code() == ErrorCode::kTimeout;
      if (!retryable || attempt >= policy.max_attempts) throw;
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

}  // namespace objexplore::detail
