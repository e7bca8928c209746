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

#include "http_util.hpp"

#include "httplib.h"

namespace objexplore::detail {
namespace {

httplib::Client make_client(const std::string& origin,
                            std::chrono::milliseconds timeout) {
  httplib::Client cli(origin);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  cli.set_follow_location(true);
  return cli;
}

HttpResult finish(const httplib::Result& res, const std::string& url) {
  if (!res) {
    auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::kTimeout, "timed out: " + url);
    }
    throw Error(ErrorCode::kNetwork, "request failed (" + httplib::to_string(err) + "): " + url);
  }
  return HttpResult{res->status, res->body, res->get_header_value("Content-Type")};
}

}  // namespace

Url split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "not an absolute URL: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

HttpResult http_get(const std::string& url, const Headers& headers,
                    std::chrono::milliseconds timeout) {
  Url u = split_url(url);
  auto cli = make_client(u.origin, timeout);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  return finish(cli.Get(u.path, h), url);
}

HttpResult http_post(const std::string& url, const std::string& body,
                     const std::string& content_type,
                     std::chrono::milliseconds timeout, const Headers& headers) {
  Url u = split_url(url);
  auto cli = make_client(u.origin, timeout);
  httplib::Headers h(headers.begin(), headers.end());
  return finish(cli.Post(u.path, h, body, content_type), url);
}

}  // namespace objexplore::detail
