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

// Stand-alone outpainting service backed by the mock provider. Speaks the
// protocol in protocol/outpaint/README.md; useful for local runs of `serve`
// with an HTTP provider.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "objexplore/canvas.hpp"
#include "objexplore/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mock outpainting service", "objexplore-mock-outpaint"};
  std::string host = "127.0.0.1";
  int port = 8090;
  std::string api_key;
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "port");
  app.add_option("--api-key", api_key, "required Authorization header value");
  CLI11_PARSE(app, argc, argv);

  objexplore::MockOutpaintProvider provider;
  httplib::Server server;
  server.Post("/outpaint", [&](const httplib::Request& req, httplib::Response& res) {
    if (!api_key.empty() && req.get_header_value("Authorization") != api_key) {
      res.status = 401;
      res.set_content(R"({"error":"unauthorized"})", "application/json");
      return;
    }
    try {
      auto request = objexplore::parse_outpaint_request(nlohmann::json::parse(req.body));
      auto out = provider.outpaint(request.base, request.mask, request.prompt);
      res.set_content(objexplore::make_outpaint_response(out).dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    }
  });
  std::cerr << "mock outpaint listening on " << host << ":" << port << "\n";
  return server.listen(host, port) ? EXIT_SUCCESS : EXIT_FAILURE;
}
