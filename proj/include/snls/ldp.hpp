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
#include "snls/skeleton.hpp"
#include "snls/trajectory.hpp"

#include <limits>
#include <string>
#include <vector>

namespace snls {

/// 1/2 int_0^T (||rho1||^2 + ||rho2||^2) dt
double control_cost(const Control& ctrl) noexcept;

/// int (||rho1||^2 + ||rho2||^2) dt <= N (closed).
bool in_D_N(const Control& ctrl, double N) noexcept;

enum class EventKind { terminal_ball_exit, terminal_target, functional_threshold };
enum class Observable { terminal_l2_norm, terminal_peak_modulus };

std::string to_string(EventKind k);
std::string to_string(Observable o);
EventKind parse_event_kind(const std::string& s);
Observable parse_observable(const std::string& s);

/// Terminal-time event on the solution path.
///
///   terminal_ball_exit:   ||u(T) - field||_2 >= radius
///   terminal_target:      ||u(T) - field||_2 <= tolerance
///   functional_threshold: observable(u(T)) >= level
struct EventSpec {
    EventKind kind = EventKind::terminal_ball_exit;
    ComplexField field;
    double radius = 0.0;
    double tolerance = 0.0;
    Observable observable = Observable::terminal_l2_norm;
    double level = 0.0;
    double horizon = 1.0;

    /// Distance to the event set, 0 exactly when the event holds.
    double residual(const ComplexField& terminal) const;
    bool occurred(const ComplexField& terminal) const { return residual(terminal) == 0.0; }
    bool occurred(const Trajectory& traj) const { return occurred(traj.final_field()); }

    /// Throws std::invalid_argument on missing fields or bad sizes.
    void validate(const Grid& grid) const;
};

double observable_value(Observable o, const ComplexField& u);

struct RateOptions {
    std::size_t segments = 16;
    double dt = 1e-3;
    std::size_t rounds = 5;          ///< outer penalty rounds
    double kappa0 = 10.0;
    double kappa_factor = 10.0;
    std::size_t max_iterations = 200; ///< BFGS iterations per round
    double gradient_tol = 1e-8;
    double fd_step = 1e-4;            ///< relative central-difference step
    double feasibility_tol = 1e-6;
    double budget = std::numeric_limits<double>::infinity(); ///< D_N level
    double initial_scale = 1e-2;      ///< size of the deterministic starting control
    unsigned threads = 1;             ///< concurrent gradient evaluations
};

struct RateTraceEntry {
    std::size_t round = 0;
    double kappa = 0.0;
    std::size_t iterations = 0;
    double objective = 0.0;
    double gradient_norm = 0.0;
    double residual = 0.0;
    double cost = 0.0;
};

/// Result of the minimum-action search. `cost` is an upper bound on the
/// rate: it is the action of a control whose skeleton realizes the event
/// (when `feasible`).
struct RateResult {
    Control control;
    double cost = 0.0;
    double residual = 0.0; ///< event residual of the returned control
    bool feasible = false;
    bool within_budget = true;
    std::size_t evaluations = 0;
    std::vector<RateTraceEntry> trace;
};

/// Minimizes 1/2 int ||rho||^2 + kappa residual^2 over piecewise-constant
/// controls with quasi-Newton (BFGS) steps and central-difference gradients;
/// kappa grows geometrically across rounds. A final radial projection
/// scales the control onto the event set when possible.
RateResult minimize_action(const Model& model, const ComplexField& u0, const EventSpec& event,
                           const RateOptions& options = {});

/// Terminal skeleton state for a control, as used by the optimizer.
ComplexField skeleton_terminal(const Model& model, const ComplexField& u0, const Control& ctrl,
                               double dt);

struct SweepRow;

struct LdpBoundsRow {
    double epsilon = 0.0;
    bool censored = false;
    double eps_log_p = 0.0;  ///< -eps log p_hat
    double gap = 0.0;        ///< eps_log_p - I*
    double relative_gap = 0.0;
    double gap_lo = 0.0;     ///< gap range from the Wilson interval
    double gap_hi = 0.0;
};

struct LdpBoundsReport {
    double rate = 0.0;
    std::vector<LdpBoundsRow> rows;
    bool gap_decreasing = false; ///< |gap| strictly shrinks as eps decreases
    bool consistent = false;     ///< shrinking, or every increase is within CI noise
};

/// Compares -eps log p_hat against I* along a sweep ordered by decreasing eps.
/// Throws std::invalid_argument for an empty table.
LdpBoundsReport ldp_bounds_probe(double rate, const std::vector<SweepRow>& rows);

} // namespace snls
