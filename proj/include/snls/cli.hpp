/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace snls {

/// Process exit codes of the `snls` tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1, ///< unexpected runtime error
    kExitConfig = 2,  ///< invalid flags or configuration
    kExitBlowUp = 3,  ///< non-finite solver state
};

/// Entry point of the command-line tool; `args` excludes the program name.
/// Progress and errors go to `out` / `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace snls
