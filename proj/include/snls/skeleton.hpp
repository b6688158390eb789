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
#include "snls/stepper.hpp"
#include "snls/trajectory.hpp"

#include <cstdint>
#include <vector>

namespace snls {

struct SolverSettings {
    double dt = 1e-3;
    /// Keep every n-th field (0 keeps only the final state).
    std::size_t field_stride = 1;
};

/// Number of steps covering `horizon`; throws when horizon is not a
/// multiple of dt (relative tolerance 1e-9).
std::size_t step_count(double horizon, double dt);

/// Deterministic controlled equation on [0, ctrl.horizon].
/// Throws BlowUpError on a non-finite state.
Trajectory solve_skeleton(const Model& model, const ComplexField& u0, const Control& ctrl,
                          const SolverSettings& settings = {});

/// Yosida-regularized skeleton: N -> J N(J .), G -> J G(J .), u0 -> J u0.
/// `passes` > 1 uses J^passes in place of J.
Trajectory solve_skeleton_yosida(const Model& model, const ComplexField& u0, const Control& ctrl,
                                 double mu, const SolverSettings& settings = {}, int passes = 1);

/// Mild-form map: S(t)u0 - int_0^t S(t-s)[i N(u) + beta u] ds
///                - i int_0^t S(t-s)[B(u) rho1 + G(u) rho2] ds
/// with the free group S(t) = exp(-iAt) and left-endpoint quadrature on the
/// trajectory's time grid. `u` must store all fields.
Trajectory picard_map(const Model& model, const Trajectory& u, const ComplexField& u0,
                      const Control& ctrl);

struct PicardResult {
    Trajectory solution;
    std::size_t iterations = 0;
    std::vector<double> residuals; ///< mixed-norm distance of successive iterates
    double max_ratio = 0.0;        ///< max residual_{k+1} / residual_k
    bool converged = false;
};

/// Banach iteration of `picard_map` on [0, T0] starting from the free flow.
/// Throws NonContractionError when a residual ratio reaches 1.
PicardResult picard_iterate(const Model& model, const ComplexField& u0, const Control& ctrl,
                            double T0, double dt, double tol = 1e-12, std::size_t max_iter = 100);

struct ContractionProbe {
    double T0 = 0.0;
    double radius = 0.0;            ///< M of the ball V_{M,T0}
    std::vector<double> ratios;     ///< one per sampled pair
    /// Ratios on consecutive Picard iterates (u^k, u^{k-1}) from the free
    /// flow that stay inside the ball. Random pairs alone miss this direction.
    std::vector<double> iterate_ratios;
    double max_ratio = 0.0;         ///< over both lists
};

/// Contraction ratios ||T u1 - T u2|| / ||u1 - u2|| for random smooth pairs in
/// the ball of mixed-norm radius M on [0, T0], plus the first few Picard
/// iterate pairs.
ContractionProbe probe_contraction(const Model& model, const ComplexField& u0, const Control& ctrl,
                                   double T0, double dt, double radius, std::size_t n_pairs,
                                   std::uint64_t seed);

/// Halves T0 from `T_max` until the probed ratio is <= target * safety.
ContractionProbe select_T0(const Model& model, const ComplexField& u0, const Control& ctrl,
                           double T_max, double dt, double radius, std::size_t n_pairs,
                           std::uint64_t seed, double target = 0.5, double safety = 0.8);

/// Default ball radius 2 (||u0||_2 + ||u0||_{L^r}).
double default_ball_radius(const Model& model, const ComplexField& u0);

/// Grönwall bound on sup_t ||u(t)||_2^2 for the (Yosida or plain) skeleton:
/// ||u0||^2 exp(2 int sum_m ||g_m||_inf |rho2_m| dt). Damping only lowers it.
double skeleton_energy_bound(const Model& model, const ComplexField& u0, const Control& ctrl);

/// max_t | ||u(t)||^2 - ||u0||^2 | / ||u0||^2 for beta = 0 and no G.
/// Throws std::invalid_argument if beta != 0, G modes present, or rho2 != 0.
double conservation_special_case(const Model& model, const ComplexField& u0, const Control& ctrl,
                                 const SolverSettings& settings = {});

} // namespace snls
