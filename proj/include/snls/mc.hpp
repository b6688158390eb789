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

#include "snls/control.hpp"
#include "snls/ldp.hpp"
#include "snls/model.hpp"
#include "snls/stochastic.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace snls {

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Wilson score interval for `hits` successes out of `n` trials.
WilsonInterval wilson_interval(std::size_t hits, std::size_t n, double z = kWilsonZ95);

/// Hit counts over a contiguous range of path indices.
struct Tally {
    std::size_t n_paths = 0;
    std::size_t hits = 0;
    std::size_t failed = 0;

    Tally& operator+=(const Tally& other) noexcept;
    bool operator==(const Tally&) const = default;
};

struct SweepRow {
    double epsilon = 0.0;
    std::size_t n_paths = 0;
    std::size_t hits = 0;
    std::size_t failed = 0;
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 1.0;
    std::optional<double> eps_log_p; ///< empty when censored (no hits)
    double wall_seconds = 0.0;

    bool censored() const noexcept { return !eps_log_p.has_value(); }
    /// Blow-up failures above 0.1 % of the paths.
    bool failure_warning() const noexcept;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

/// Problem shared by all paths of an estimate.
struct McProblem {
    const Model* model = nullptr;
    ComplexField u0;
    Control control;       ///< usually zero
    EventSpec event;
    SdeSettings settings;  ///< epsilon is overridden per row
};

/// Evaluates paths [begin, end) with per-path seeds (seed_base, i). Paths that
/// blow up are tallied as failed and excluded from the hit count.
Tally tally_paths(const McProblem& problem, double epsilon, std::uint64_t seed_base,
                  std::uint64_t begin, std::uint64_t end, unsigned threads = 1);

/// Row from a tally: p_hat = hits / (n_paths - failed).
SweepRow make_row(double epsilon, const Tally& tally);

SweepRow estimate_probability(const McProblem& problem, double epsilon, std::size_t n_paths,
                              std::uint64_t seed_base, unsigned threads = 1);

/// One row per epsilon (positive, non-increasing); every row reuses seed_base.
SweepResult epsilon_sweep(const McProblem& problem, const std::vector<double>& epsilons,
                          std::size_t n_paths, std::uint64_t seed_base, unsigned threads = 1);

} // namespace snls
