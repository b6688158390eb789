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
#include "snls/model.hpp"
#include "snls/noise.hpp"
#include "snls/stepper.hpp"
#include "snls/trajectory.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace snls {

struct SdeSettings {
    double dt = 1e-3;
    double epsilon = 0.1;
    NoiseScheme scheme = NoiseScheme::unitary;
    bool stratonovich_correction = true; ///< ito_literal ablation switch
    std::size_t field_stride = 1;        ///< 0 keeps only the final state
};

/// Called after every step with (step index n+1, state u(t_{n+1})); also once
/// with (0, u0) before stepping.
using StepObserver = std::function<void(std::size_t, std::span<const Complex>)>;

/// One step of the stochastic controlled equation from `u`.
ComplexField step_sde(const Model& model, const ComplexField& u, std::span<const double> rho1,
                      std::span<const double> rho2, const NoiseIncrement& increment,
                      const SdeSettings& settings);

/// Full path driven by counter-based increments for `seed`.
Trajectory solve_sde(const Model& model, const ComplexField& u0, const Control& ctrl,
                     const SeedSpec& seed, const SdeSettings& settings,
                     const StepObserver& observer = {});

/// Full path driven by a stored Brownian path (its dt overrides settings.dt).
Trajectory solve_sde(const Model& model, const ComplexField& u0, const Control& ctrl,
                     const BrownianPath& path, const SdeSettings& settings,
                     const StepObserver& observer = {});

/// Smooth cutoff theta_R(x) = theta(x / R) with theta = 1 on [-1, 1],
/// supp theta in [-2, 2] and a C-infinity monotone transition.
struct TruncationSpec {
    double R = 1.0;

    static double cutoff(double x) noexcept;
    double operator()(double x) const noexcept { return cutoff(x / R); }
};

struct StopReport {
    double tau = 0.0; ///< first t with running mixed norm > level, else T
    bool hit = false;
    double level = 0.0;
};

/// tau for a given level from a trajectory's cached norms.
StopReport stopping_time(const Trajectory& traj, double level, double p);

/// Truncated equation: the nonlinear phase is weighted by theta_R of the
/// running mixed norm at the start of each step. StopReport records tau_R.
std::pair<Trajectory, StopReport> solve_truncated(const Model& model, const ComplexField& u0,
                                                  const Control& ctrl, const SeedSpec& seed,
                                                  const SdeSettings& settings,
                                                  const TruncationSpec& trunc);
std::pair<Trajectory, StopReport> solve_truncated(const Model& model, const ComplexField& u0,
                                                  const Control& ctrl, const BrownianPath& path,
                                                  const SdeSettings& settings,
                                                  const TruncationSpec& trunc);

struct BalanceRow {
    double t_start = 0.0;
    double t_end = 0.0;
    double mean_mass_start = 0.0;
    double mean_mass_end = 0.0;
    double fd_derivative = 0.0;  ///< (E M(t_end) - E M(t_start)) / (t_end - t_start)
    double derivative_se = 0.0;  ///< standard error of fd_derivative
    double oracle = 0.0;         ///< window mean of -2 beta E M + eps E sum ||G_m u||^2
    double relative_residual = 0.0;
};

struct BalanceReport {
    std::size_t n_paths = 0;
    std::size_t failed = 0;
    double epsilon = 0.0;
    std::vector<BalanceRow> rows;
    double max_relative_residual = 0.0;
};

/// Uncontrolled Monte Carlo check of d/dt E||u||^2 = -2 beta E||u||^2 + eps E sum_m ||G_m(u)||^2.
/// Throws std::invalid_argument for n_paths < 100.
BalanceReport mass_moment_balance(const Model& model, const ComplexField& u0,
                                  const SdeSettings& settings, std::uint64_t seed_base,
                                  std::size_t n_paths, double T, std::size_t checkpoints = 10,
                                  unsigned threads = 0);

} // namespace snls
