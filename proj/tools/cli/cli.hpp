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

#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "objexplore/error.hpp"

namespace httplib {
class Server;
}

namespace objexplore::cli {

/// Process exit codes. Stable across releases.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,      // unexpected failure
  kExitUsage = 2,         // bad flags or configuration
  kExitInput = 3,         // malformed or invalid input documents
  kExitExternal = 4,      // collection, detector or provider unreachable or misbehaving
  kExitIntegrity = 5,     // audit violations or conflicting catalog writes
  kExitLocked = 6,        // another writer holds the catalog lock
  kExitPrerequisite = 7,  // an earlier stage has not run (or a record is missing)
};

int exit_code_for(ErrorCode code);

struct CliContext {
  EnvLookup env;
  std::ostream& out;
  std::ostream& err;
  /// Called by `serve` once the socket is bound; the server runs until
  /// someone calls stop() on it.
  std::function<void(httplib::Server&, int port)> on_listening;
};

/// Runs one command line (without the program name) and returns the exit
/// code.
int run_cli(const std::vector<std::string>& args, CliContext& ctx);

}  // namespace objexplore::cli
