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
#include "snls/mc.hpp"

#include "snls/error.hpp"
#include "snls/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace snls {

WilsonInterval wilson_interval(std::size_t hits, std::size_t n, double z) {
    if (n == 0) {
        return {0.0, 1.0};
    }
    if (hits > n) {
        throw std::invalid_argument("hit count exceeds trial count");
    }
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    WilsonInterval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
    // Keep the point estimate inside the interval despite rounding.
    ci.lo = std::min(ci.lo, p);
    ci.hi = std::max(ci.hi, p);
    return ci;
}

Tally& Tally::operator+=(const Tally& other) noexcept {
    n_paths += other.n_paths;
    hits += other.hits;
    failed += other.failed;
    return *this;
}

bool SweepRow::failure_warning() const noexcept {
    return static_cast<double>(failed) > 1e-3 * static_cast<double>(n_paths);
}

Tally tally_paths(const McProblem& problem, double epsilon, std::uint64_t seed_base,
                  std::uint64_t begin, std::uint64_t end, unsigned threads) {
    if (problem.model == nullptr) {
        throw std::invalid_argument("Monte Carlo problem has no model");
    }
    if (end < begin) {
        throw std::invalid_argument("path range end precedes begin");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    problem.event.validate(problem.model->grid());
    SdeSettings settings = problem.settings;
    settings.epsilon = epsilon;
    settings.field_stride = 0;

    enum : std::uint8_t { miss = 0, hit = 1, fail = 2 };
    const std::size_t count = static_cast<std::size_t>(end - begin);
    std::vector<std::uint8_t> outcome(count, miss);
    parallel_for(count, threads, [&](std::size_t lo, std::size_t hi, unsigned) {
        for (std::size_t k = lo; k < hi; ++k) {
            try {
                const Trajectory traj = solve_sde(*problem.model, problem.u0, problem.control,
                                                  SeedSpec{seed_base, begin + k}, settings);
                outcome[k] = problem.event.occurred(traj) ? hit : miss;
            } catch (const BlowUpError&) {
                outcome[k] = fail;
            }
        }
    });

    Tally tally;
    tally.n_paths = count;
    for (const std::uint8_t o : outcome) {
        tally.hits += o == hit ? 1 : 0;
        tally.failed += o == fail ? 1 : 0;
    }
    return tally;
}

SweepRow make_row(double epsilon, const Tally& tally) {
    SweepRow row;
    row.epsilon = epsilon;
    row.n_paths = tally.n_paths;
    row.hits = tally.hits;
    row.failed = tally.failed;
    const std::size_t valid = tally.n_paths - tally.failed;
    row.p_hat = valid > 0 ? static_cast<double>(tally.hits) / static_cast<double>(valid) : 0.0;
    const WilsonInterval ci = wilson_interval(tally.hits, valid);
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    if (tally.hits > 0) {
        row.eps_log_p = row.p_hat >= 1.0 ? 0.0 : -epsilon * std::log(row.p_hat);
    }
    return row;
}

SweepRow estimate_probability(const McProblem& problem, double epsilon, std::size_t n_paths,
                              std::uint64_t seed_base, unsigned threads) {
    if (n_paths == 0) {
        throw std::invalid_argument("n_paths must be >= 1");
    }
    const auto start = std::chrono::steady_clock::now();
    SweepRow row = make_row(epsilon, tally_paths(problem, epsilon, seed_base, 0, n_paths, threads));
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

SweepResult epsilon_sweep(const McProblem& problem, const std::vector<double>& epsilons,
                          std::size_t n_paths, std::uint64_t seed_base, unsigned threads) {
    if (epsilons.empty()) {
        throw std::invalid_argument("epsilon list is empty");
    }
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) {
            throw std::invalid_argument("epsilon values must be positive");
        }
        if (i > 0 && epsilons[i] > epsilons[i - 1]) {
            throw std::invalid_argument("epsilon list must be non-increasing");
        }
    }
    SweepResult result;
    for (double eps : epsilons) {
        result.rows.push_back(estimate_probability(problem, eps, n_paths, seed_base, threads));
    }
    return result;
}

} // namespace snls
