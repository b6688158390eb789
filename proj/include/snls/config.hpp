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
#include "snls/diagnostics.hpp"
#include "snls/ldp.hpp"
#include "snls/model.hpp"
#include "snls/stepper.hpp"

#include <json.hpp>

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace snls {

struct GridConfig {
    int dim = 1;
    std::size_t n = 256;
    double half_width = 10.0 * std::numbers::pi;
    bool operator==(const GridConfig&) const = default;
};

struct SolverConfig {
    double dt = 1e-3;
    double horizon = 1.0;
    NoiseScheme scheme = NoiseScheme::unitary;
    bool stratonovich_correction = true;
    std::size_t field_stride = 0; ///< 0 dumps only the final field
    bool operator==(const SolverConfig&) const = default;
};

/// gaussian:     amplitude exp(-|x - center|^2 / width^2) exp(i wavenumber x_1)
/// fourier_mode: amplitude exp(i pi mode x_1 / L) / sqrt((2L)^d)
struct InitialConfig {
    std::string kind = "gaussian";
    double amplitude = 1.0;
    double width = 2.0;
    double center = 0.0;
    double wavenumber = 0.5;
    int mode = 1;
    bool operator==(const InitialConfig&) const = default;
};

/// rho1 / rho2 are (mode, segment) tables; when empty, `pattern` fills them:
///   zero: all coefficients 0
///   sine: rho1 = A sin(0.7 s + m), rho2 = A cos(0.5 s + 2 m)
/// `file` (JSON with rho1 / rho2 tables, e.g. a rate.json control) wins when set.
struct ControlConfig {
    std::size_t segments = 16;
    std::string pattern = "zero";
    double amplitude = 0.0;
    std::vector<std::vector<double>> rho1;
    std::vector<std::vector<double>> rho2;
    std::string file;
    bool operator==(const ControlConfig&) const = default;
};

/// Event field sources: zero, initial, uncontrolled_terminal (terminal state
/// of the zero-control skeleton); multiplied by field_scale.
struct EventConfig {
    std::string kind = "terminal_ball_exit";
    std::string field = "uncontrolled_terminal";
    double field_scale = 1.0;
    double radius = 0.5;
    double tolerance = 0.1;
    std::string observable = "terminal_l2_norm";
    double level = 1.0;
    bool operator==(const EventConfig&) const = default;
};

struct SweepConfig {
    std::vector<double> epsilons{0.1, 0.05, 0.02};
    std::size_t n_paths = 1000;
    std::optional<double> rate; ///< I* for the LDP bounds probe
    bool operator==(const SweepConfig&) const = default;
};

struct TruncationConfig {
    double R = 10.0;
    std::vector<double> levels{1.0, 2.0, 4.0, 8.0};
    bool operator==(const TruncationConfig&) const = default;
};

struct RateConfig {
    std::size_t segments = 16;
    std::size_t rounds = 5;
    double kappa0 = 10.0;
    double kappa_factor = 10.0;
    std::size_t max_iterations = 200;
    double fd_step = 1e-4;
    double feasibility_tol = 1e-6;
    std::optional<double> budget;
    double initial_scale = 1e-2;
    bool operator==(const RateConfig&) const = default;
};

struct DiagnoseConfig {
    std::vector<std::string> checks{"strichartz", "ito_gap", "picard",       "yosida",
                                    "order",      "weak",    "mass_balance", "conservation",
                                    "continuity"};
    // strichartz
    std::size_t strichartz_samples = 100;
    std::string strichartz_preset = "smooth";
    double strichartz_max_ratio = 10.0;
    // ito_gap
    std::vector<double> gap_dts{4e-3, 2e-3, 1e-3, 5e-4};
    std::size_t gap_paths = 8;
    double gap_slope_min = 0.75;
    double gap_slope_max = 1.25;
    double gap_plateau_factor = 10.0;
    // picard
    double picard_T_max = 1.0;
    std::size_t picard_pairs = 20;
    double picard_max_ratio = 0.5;
    double picard_max_decay = 0.6;
    // yosida
    std::vector<double> yosida_mus{10.0, 100.0, 1000.0, 10000.0};
    double yosida_max_distance = 1e-3;
    // order
    std::vector<double> skeleton_dts{1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512};
    std::vector<double> stochastic_dts{4e-3, 2e-3, 1e-3};
    std::size_t order_paths = 32;
    double order_epsilon = 1.0;
    std::vector<double> skeleton_order_range{1.7, 2.3};
    std::vector<double> stochastic_order_range{0.4, 0.7};
    // weak
    std::vector<double> weak_epsilons{0.2, 0.1, 0.05};
    std::vector<double> weak_deltas{0.1};
    std::size_t weak_paths = 1000;
    double weak_perturbation = 0.2;
    // mass_balance
    std::size_t balance_paths = 1000;
    std::size_t balance_checkpoints = 10;
    double balance_max_residual = 0.05;
    // conservation
    std::size_t conservation_paths = 100;
    double conservation_max_drift = 1e-10;
    // continuity
    std::size_t continuity_terms = 6;
    double continuity_perturbation = 0.2;

    bool operator==(const DiagnoseConfig&) const = default;
};

/// The single self-describing run configuration.
struct RunConfig {
    GridConfig grid;
    ModelParams model;
    NoiseConfig noise;
    SolverConfig solver;
    InitialConfig initial;
    ControlConfig control;
    EventConfig event;
    SweepConfig sweep;
    TruncationConfig truncation;
    RateConfig rate;
    DiagnoseConfig diagnose;
    std::uint64_t seed = 1;
    unsigned threads = 0;

    bool operator==(const RunConfig&) const = default;
};

std::string to_string(NoiseScheme s);
NoiseScheme parse_noise_scheme(const std::string& s);

nlohmann::json to_json(const RunConfig& cfg);
/// Strict parse: unknown keys and type mismatches raise ConfigError naming
/// the dotted key. Missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);

/// Cross-field validation; throws ConfigError(key, message).
void validate(const RunConfig& cfg);

RunConfig load_config(const std::string& path);

/// Applies `key=value` with a dotted key; the value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// FNV-1a 64 of the canonical (sorted-key, compact) JSON serialization.
std::uint64_t config_hash(const RunConfig& cfg);

// Builders from a validated config.
GridPtr make_grid(const RunConfig& cfg);
Model make_model(const RunConfig& cfg, const GridPtr& grid);
ComplexField make_initial(const RunConfig& cfg, const GridPtr& grid);
Control make_control(const RunConfig& cfg, const Model& model);
EventSpec make_event(const RunConfig& cfg, const Model& model, const ComplexField& u0);
RateOptions make_rate_options(const RunConfig& cfg);
SolverSettings make_solver_settings(const RunConfig& cfg);
SdeSettings make_sde_settings(const RunConfig& cfg);

} // namespace snls
