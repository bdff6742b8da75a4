// Copyright 2026 The EHM Authors
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

// Command-line front end. run_command is the whole program; main() only
// forwards to it so the commands are testable in-process.

#ifndef EHM_CLI_HPP_
#define EHM_CLI_HPP_

#include <iosfwd>

namespace ehm {

// Returns the process exit code (0 ok, 2 usage, 3 I/O, 4 validation,
// 5 divergence). Diagnostics go to `err` as a single line.
int run_command(int argc, const char* const* argv, std::ostream& out,
                std::ostream& err);

}  // namespace ehm

#endif  // EHM_CLI_HPP_
