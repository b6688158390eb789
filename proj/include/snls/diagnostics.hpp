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
#include "snls/mc.hpp"
#include "snls/model.hpp"
#include "snls/skeleton.hpp"
#include "snls/stochastic.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace snls {

/// Random band-limited test fields with decaying spectra.
///   smooth:    |j| <= 4,  weight 1 / (1 + j^2)
///   broadband: |j| <= 16, weight 1 / (1 + |j|)
///   localized: |j| <= 8,  weight exp(-j^2 / 16)
/// Coefficients are keyed by the integer wave index, so the same sample
/// resolves to the same function on refined grids with the same L.
enum class FieldPreset { smooth, broadband, localized };

std::string to_string(FieldPreset p);
FieldPreset parse_field_preset(const std::string& s);

/// Unit-L2 random field number `sample` of a preset.
ComplexField random_field(const GridPtr& grid, FieldPreset preset, std::uint64_t seed,
                          std::uint64_t sample);

struct StrichartzSurvey {
    double p = 0.0;
    double r = 0.0;
    double T = 0.0;
    std::size_t n_per_dim = 0;
    std::vector<double> ratios;
    double max_ratio = 0.0;
    bool finite = true;
};

/// ||S(.) phi||_{L^p(0,T; L^r)} / ||phi||_2 for the free group, sampled at
/// t_n = n dt with left-endpoint quadrature (p = inf takes the max).
double strichartz_ratio(const ComplexField& phi, double p, double r, double T, double dt);

/// Max Strichartz ratio over `n_samples` random unit fields. Throws
/// std::invalid_argument when (p, r) is not admissible.
StrichartzSurvey strichartz_ratio_survey(const GridPtr& grid, std::size_t n_samples, double p,
                                         double r, double T, double dt, FieldPreset preset,
                                         std::uint64_t seed);

struct GapRow {
    double dt = 0.0;
    double gap = 0.0;         ///< RMS terminal L2 distance, unitary vs ito-literal
    double ablated_gap = 0.0; ///< same with the -eps b(u) dt drift removed
};

struct GapTable {
    std::vector<GapRow> rows;
    double slope = 0.0;           ///< log-log fit of gap against dt
    double ablated_slope = 0.0;
    double plateau_ratio = 0.0;   ///< min ablated gap / min corrected gap
};

/// Terminal gap between the Stratonovich unitary scheme and the explicit Ito
/// scheme on bridge-coupled Brownian paths. Requires B-only noise and a dt
/// list that halves at every rung.
GapTable ito_stratonovich_gap(const Model& model, const ComplexField& u0, double T,
                              const std::vector<double>& dts, double epsilon,
                              std::size_t n_paths, std::uint64_t seed);

struct WeakConvergenceRow {
    double epsilon = 0.0;
    double delta = 0.0;
    std::size_t n_paths = 0;
    std::size_t hits = 0;
    std::size_t failed = 0;
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 1.0;
    double mean_distance = 0.0;
};

struct WeakConvergenceTable {
    std::vector<WeakConvergenceRow> rows; ///< epsilon-major, then delta
    bool decreasing_in_epsilon = false;   ///< for every delta, p_hat strictly decreases
    bool monotone_in_delta = false;
};

/// Estimates P(||u^{rho_eps, eps} - u^{rho}||_mixed >= delta) with
/// rho_eps = rho + sqrt(eps) * perturbation; eps = 0 is allowed.
WeakConvergenceTable weak_convergence_probe(const Model& model, const ComplexField& u0,
                                            const Control& rho, const Control& perturbation,
                                            const std::vector<double>& epsilons,
                                            const std::vector<double>& deltas,
                                            std::size_t n_paths, std::uint64_t seed,
                                            const SdeSettings& settings, unsigned threads = 1);

struct OrderFit {
    std::vector<double> dts;
    std::vector<double> errors;
    double order = 0.0;
    bool reliable = false; ///< errors strictly decrease along the ladder
    bool skipped = false;  ///< errors at round-off level; no fit attempted
};

/// Least-squares slope of log(error) against log(dt).
OrderFit fit_order(const std::vector<double>& dts, const std::vector<double>& errors);

/// Skeleton self-convergence against a dt_min / 4 reference solve.
OrderFit skeleton_order(const Model& model, const ComplexField& u0, const Control& ctrl,
                        const std::vector<double>& dts);

/// Strong self-convergence with Brownian-bridge refinement: RMS terminal
/// error over `n_paths` against a reference `extra_levels` bridge levels below
/// the finest rung. The ladder must halve at every rung.
OrderFit stochastic_order(const Model& model, const ComplexField& u0, const Control& ctrl,
                          const SdeSettings& settings, const std::vector<double>& dts,
                          std::size_t n_paths, std::uint64_t seed, std::size_t extra_levels = 3,
                          unsigned threads = 1);

struct YosidaRow {
    double mu = 0.0;
    double distance = 0.0;      ///< ||u_mu - u||_mixed(T)
    double sup_mass = 0.0;      ///< sup_t ||u_mu(t)||^2
    double twice_distance = 0.0; ///< ||u_{mu, J^2} - u_mu||_mixed(T)
};

struct YosidaCurve {
    std::vector<YosidaRow> rows;
    double energy_bound = 0.0;
    bool strictly_decreasing = false;
};

YosidaCurve yosida_curve(const Model& model, const ComplexField& u0, const Control& ctrl,
                         const std::vector<double>& mus, const SolverSettings& settings);

struct MassDriftReport {
    std::vector<double> drifts; ///< per path: sup_t | ||u(t)||^2 - ||u0||^2 | / ||u0||^2
    double max_drift = 0.0;
    std::size_t failed = 0;
};

/// Pathwise relative mass drift over `n_paths` seeded paths. Meaningful as a
/// conservation check only for beta = 0 and B-only Stratonovich noise.
MassDriftReport mass_drift_probe(const Model& model, const ComplexField& u0, const Control& ctrl,
                                 const SdeSettings& settings, std::size_t n_paths,
                                 std::uint64_t seed, unsigned threads = 1);

struct ContinuityRow {
    std::size_t n = 0;
    double energy = 0.0;   ///< int ||rho_n||^2
    double distance = 0.0; ///< ||u^{rho_n} - u^{rho}||_mixed(T)
};

/// Controls rho_n = rho + perturbation / n for n = 1, 2, 4, ...: distances of
/// the skeleton solutions to u^rho (strongly convergent sequence).
std::vector<ContinuityRow> control_continuity_probe(const Model& model, const ComplexField& u0,
                                                    const Control& rho,
                                                    const Control& perturbation,
                                                    std::size_t terms,
                                                    const SolverSettings& settings);

} // namespace snls
