// Copyright 2026 The anonpoll Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ANONPOLL_CLI_H_
#define ANONPOLL_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace anonpoll {

// Runs the command line `anonpoll <args...>` (args exclude the program
// name). Returns the exit code: 0 on success, 2 on usage or validation
// errors (a JSON error object is written to err), 1 on internal failures.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace anonpoll

#endif  // ANONPOLL_CLI_H_
