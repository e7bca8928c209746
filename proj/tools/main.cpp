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

#include <pthread.h>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "cli/cli.hpp"
#include "httplib.h"

namespace {

std::atomic<httplib::Server*> g_server{nullptr};

// Routes SIGINT/SIGTERM to a thread that stops the server gracefully.
void install_stop_handler() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread([set] {
    int sig = 0;
    sigwait(&set, &sig);
    if (auto* server = g_server.load()) {
      server->stop();
    } else {
      std::_Exit(128 + sig);
    }
  }).detach();
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  bool serving = false;
  for (const auto& a : args) serving = serving || a == "serve";
  if (serving) install_stop_handler();

  objexplore::cli::CliContext ctx{
      [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) return std::string(v);
        return std::nullopt;
      },
      std::cout, std::cerr, [](httplib::Server& server, int) { g_server = &server; }};
  return objexplore::cli::run_cli(args, ctx);
}
