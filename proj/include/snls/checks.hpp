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

#include "snls/config.hpp"
#include "snls/norms.hpp"

#include <string>
#include <vector>

namespace snls {

/// One thresholded number of a diagnostic; passes when lo <= value <= hi.
struct CheckMetric {
    std::string name;
    double value = 0.0;
    double lo = -kInfinity;
    double hi = kInfinity;
    bool pass = false;
};

/// Outcome of one named diagnostic: thresholded metrics plus a numeric table.
struct CheckResult {
    std::string name;
    bool pass = false;
    std::vector<CheckMetric> metrics;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> table;
    std::string note;
    double wall_seconds = 0.0;
};

/// Names accepted by `run_check`, in canonical order.
const std::vector<std::string>& check_names();

/// Runs one diagnostic against the thresholds of `cfg.diagnose`. Throws
/// ConfigError for an unknown name.
///
/// Checks that need a special model derive it from the config:
/// `conservation` drops G and damping and uses the unitary scheme, `ito_gap`
/// drops G.
CheckResult run_check(const std::string& name, const RunConfig& cfg);

/// Deterministic perturbation control used by the weak-convergence and
/// continuity checks: rho1 = a cos(1.3 s + m), rho2 = a sin(0.9 s + m).
Control perturbation_control(std::size_t m1, std::size_t m2, std::size_t segments,
                             double horizon, double amplitude);

} // namespace snls
