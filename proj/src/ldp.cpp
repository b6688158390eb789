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
#include "snls/ldp.hpp"

#include "snls/error.hpp"
#include "snls/mc.hpp"
#include "snls/norms.hpp"
#include "snls/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace snls {

double control_cost(const Control& ctrl) noexcept { return 0.5 * ctrl.energy(); }

bool in_D_N(const Control& ctrl, double N) noexcept { return ctrl.energy() <= N; }

std::string to_string(EventKind k) {
    switch (k) {
    case EventKind::terminal_ball_exit:
        return "terminal_ball_exit";
    case EventKind::terminal_target:
        return "terminal_target";
    case EventKind::functional_threshold:
        return "functional_threshold";
    }
    return "unknown";
}

std::string to_string(Observable o) {
    return o == Observable::terminal_l2_norm ? "terminal_l2_norm" : "terminal_peak_modulus";
}

EventKind parse_event_kind(const std::string& s) {
    for (auto k : {EventKind::terminal_ball_exit, EventKind::terminal_target,
                   EventKind::functional_threshold}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    throw std::invalid_argument("unknown event kind '" + s +
                                "' (terminal_ball_exit, terminal_target, functional_threshold)");
}

Observable parse_observable(const std::string& s) {
    for (auto o : {Observable::terminal_l2_norm, Observable::terminal_peak_modulus}) {
        if (s == to_string(o)) {
            return o;
        }
    }
    throw std::invalid_argument("unknown observable '" + s +
                                "' (terminal_l2_norm, terminal_peak_modulus)");
}

double observable_value(Observable o, const ComplexField& u) {
    return o == Observable::terminal_l2_norm ? norm_l2(u) : norm_lr(u, kInfinity);
}

double EventSpec::residual(const ComplexField& terminal) const {
    switch (kind) {
    case EventKind::terminal_ball_exit:
        return std::max(0.0, radius - distance_l2(terminal.values(), field.values(),
                                                  terminal.grid().dx()));
    case EventKind::terminal_target:
        return std::max(0.0, distance_l2(terminal.values(), field.values(),
                                         terminal.grid().dx()) - tolerance);
    case EventKind::functional_threshold:
        return std::max(0.0, level - observable_value(observable, terminal));
    }
    return 0.0;
}

void EventSpec::validate(const Grid& grid) const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("event horizon must be positive");
    }
    if (kind == EventKind::functional_threshold) {
        if (std::isnan(level)) {
            throw std::invalid_argument("event level must not be NaN");
        }
        return;
    }
    if (field.size() != grid.size()) {
        throw std::invalid_argument("event field does not live on the model grid");
    }
    if (kind == EventKind::terminal_ball_exit && !(radius >= 0.0)) {
        throw std::invalid_argument("event radius must be >= 0");
    }
    if (kind == EventKind::terminal_target && !(tolerance >= 0.0)) {
        throw std::invalid_argument("event tolerance must be >= 0");
    }
}

ComplexField skeleton_terminal(const Model& model, const ComplexField& u0, const Control& ctrl,
                               double dt) {
    SolverSettings settings;
    settings.dt = dt;
    settings.field_stride = 0;
    return solve_skeleton(model, u0, ctrl, settings).final_field();
}

namespace {

class ActionProblem {
public:
    ActionProblem(const Model& model, const ComplexField& u0, const EventSpec& event,
                  const RateOptions& opts)
        : model_(model), u0_(u0), event_(event), opts_(opts),
          shape_(Control::zero(model.noise().m1(), model.noise().m2(), opts.segments,
                               event.horizon)) {}

    std::size_t dimension() const noexcept { return shape_.dimension(); }

    Control control(std::span<const double> x) const {
        Control c = shape_;
        c.assign(x);
        return c;
    }

    double residual(std::span<const double> x) {
        ++evaluations_;
        return event_residual(x);
    }

    double cost(std::span<const double> x) const noexcept {
        const double s = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
        return 0.5 * s * shape_.segment_length();
    }

    double objective(std::span<const double> x, double kappa) {
        const double r = residual(x);
        return cost(x) + kappa * r * r;
    }

    /// Central differences; coordinates evaluated concurrently into fixed slots.
    std::vector<double> gradient(const std::vector<double>& x, double kappa) {
        const std::size_t n = x.size();
        std::vector<double> g(n);
        std::vector<double> res_plus(n);
        std::vector<double> res_minus(n);
        std::vector<double> steps(n);
        for (std::size_t i = 0; i < n; ++i) {
            steps[i] = opts_.fd_step * std::max(std::abs(x[i]), 1.0);
        }
        parallel_for(n, opts_.threads, [&](std::size_t begin, std::size_t end, unsigned) {
            std::vector<double> y = x;
            for (std::size_t i = begin; i < end; ++i) {
                y[i] = x[i] + steps[i];
                res_plus[i] = event_residual(y);
                y[i] = x[i] - steps[i];
                res_minus[i] = event_residual(y);
                y[i] = x[i];
            }
        });
        evaluations_ += 2 * n;
        const double seg = shape_.segment_length();
        for (std::size_t i = 0; i < n; ++i) {
            // The quadratic cost term is differentiated exactly.
            const double pen = (res_plus[i] * res_plus[i] - res_minus[i] * res_minus[i]) /
                               (2.0 * steps[i]);
            g[i] = x[i] * seg + kappa * pen;
        }
        return g;
    }

    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    double event_residual(std::span<const double> x) const {
        try {
            return event_.residual(skeleton_terminal(model_, u0_, control(x), opts_.dt));
        } catch (const BlowUpError&) {
            return std::numeric_limits<double>::infinity();
        }
    }

    const Model& model_;
    const ComplexField& u0_;
    const EventSpec& event_;
    const RateOptions& opts_;
    Control shape_;
    std::size_t evaluations_ = 0;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct RoundOutcome {
    std::size_t iterations = 0;
    double objective = 0.0;
    double gradient_norm = 0.0;
};

/// BFGS on the inverse Hessian with Armijo backtracking.
RoundOutcome bfgs(ActionProblem& problem, std::vector<double>& x, double kappa,
                  const RateOptions& opts) {
    const std::size_t n = x.size();
    std::vector<double> H(n * n, 0.0);
    const auto reset = [&] {
        std::fill(H.begin(), H.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            H[i * n + i] = 1.0;
        }
    };
    reset();
    RoundOutcome out;
    double f = problem.objective(x, kappa);
    std::vector<double> g = problem.gradient(x, kappa);
    std::vector<double> d(n);
    std::vector<double> x_new(n);
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        out.gradient_norm = std::sqrt(dot(g, g));
        if (out.gradient_norm <= opts.gradient_tol * std::max(1.0, std::abs(f))) {
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s -= H[i * n + j] * g[j];
            }
            d[i] = s;
        }
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            reset();
            for (std::size_t i = 0; i < n; ++i) {
                d[i] = -g[i];
            }
            slope = -dot(g, g);
        }
        double step = 1.0;
        double f_new = 0.0;
        bool accepted = false;
        while (step > 1e-12) {
            for (std::size_t i = 0; i < n; ++i) {
                x_new[i] = x[i] + step * d[i];
            }
            f_new = problem.objective(x_new, kappa);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        std::vector<double> g_new = problem.gradient(x_new, kappa);
        std::vector<double> s(n);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
        }
        const double sy = dot(s, y);
        if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
            // H <- (I - r s y^T) H (I - r y s^T) + r s s^T
            const double r = 1.0 / sy;
            std::vector<double> Hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    Hy[i] += H[i * n + j] * y[j];
                }
            }
            const double yHy = dot(y, Hy);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    H[i * n + j] += (1.0 + r * yHy) * r * s[i] * s[j] -
                                    r * (Hy[i] * s[j] + s[i] * Hy[j]);
                }
            }
        }
        const double change = std::abs(f - f_new);
        x = x_new;
        f = f_new;
        g = std::move(g_new);
        out.iterations = it + 1;
        if (change <= 1e-15 * std::max(1.0, std::abs(f))) {
            break;
        }
    }
    out.objective = f;
    out.gradient_norm = std::sqrt(dot(g, g));
    return out;
}

std::vector<double> scaled_vec(const std::vector<double>& x, double a) {
    std::vector<double> y = x;
    for (auto& v : y) {
        v *= a;
    }
    return y;
}

} // namespace

RateResult minimize_action(const Model& model, const ComplexField& u0, const EventSpec& event,
                           const RateOptions& options) {
    event.validate(model.grid());
    if (options.segments == 0 || options.rounds == 0) {
        throw std::invalid_argument("rate options need segments >= 1 and rounds >= 1");
    }
    ActionProblem problem(model, u0, event, options);
    const std::size_t n = problem.dimension();
    RateResult result;

    std::vector<double> x(n, 0.0);
    if (problem.residual(x) == 0.0) {
        // The uncontrolled skeleton already realizes the event.
        result.control = problem.control(x);
        result.feasible = true;
        result.evaluations = problem.evaluations();
        return result;
    }
    if (n == 0) {
        result.control = problem.control(x);
        result.residual = problem.residual(x);
        result.evaluations = problem.evaluations();
        return result;
    }

    // Zero is a stationary point of the penalty for symmetric events.
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = options.initial_scale * (1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0));
    }

    double kappa = options.kappa0;
    for (std::size_t round = 0; round < options.rounds; ++round) {
        const RoundOutcome out = bfgs(problem, x, kappa, options);
        RateTraceEntry entry;
        entry.round = round;
        entry.kappa = kappa;
        entry.iterations = out.iterations;
        entry.objective = out.objective;
        entry.gradient_norm = out.gradient_norm;
        entry.residual = problem.residual(x);
        entry.cost = problem.cost(x);
        result.trace.push_back(entry);
        if (entry.residual <= options.feasibility_tol) {
            break;
        }
        kappa *= options.kappa_factor;
    }

    // Radial projection onto the event: the smallest scaling a in [1, 8]
    // that makes the control feasible, so the reported cost is attained.
    double best_res = problem.residual(x);
    if (best_res > 0.0) {
        const double probes[] = {1.0 + 1e-6, 1.0 + 1e-5, 1.0 + 1e-4, 1.0 + 1e-3, 1.01, 1.03,
                                 1.1, 1.3, 1.6, 2.0, 3.0, 4.0, 6.0, 8.0};
        double lo = 1.0;
        double hi = 0.0;
        for (double a : probes) {
            const double r = problem.residual(scaled_vec(x, a));
            if (r == 0.0) {
                hi = a;
                break;
            }
            lo = a;
        }
        if (hi > 0.0) {
            for (int it = 0; it < 60 && hi - lo > 1e-13 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (problem.residual(scaled_vec(x, mid)) == 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            x = scaled_vec(x, hi);
            best_res = 0.0;
        }
    }

    result.control = problem.control(x);
    result.cost = control_cost(result.control);
    result.residual = best_res;
    result.feasible = best_res == 0.0;
    result.within_budget = in_D_N(result.control, options.budget);
    result.evaluations = problem.evaluations();
    return result;
}

LdpBoundsReport ldp_bounds_probe(double rate, const std::vector<SweepRow>& rows) {
    if (rows.empty()) {
        throw std::invalid_argument("LDP bounds probe needs a non-empty sweep table");
    }
    LdpBoundsReport report;
    report.rate = rate;
    const auto neg_eps_log = [](double eps, double p) {
        if (p >= 1.0) {
            return 0.0;
        }
        return p > 0.0 ? -eps * std::log(p) : std::numeric_limits<double>::infinity();
    };
    for (const auto& r : rows) {
        LdpBoundsRow row;
        row.epsilon = r.epsilon;
        row.censored = r.censored();
        if (!row.censored) {
            row.eps_log_p = neg_eps_log(r.epsilon, r.p_hat);
            row.gap = row.eps_log_p - rate;
            row.relative_gap = rate > 0.0 ? std::abs(row.gap) / rate : std::abs(row.gap);
            row.gap_lo = neg_eps_log(r.epsilon, r.ci_hi) - rate;
            row.gap_hi = neg_eps_log(r.epsilon, r.ci_lo) - rate;
        }
        report.rows.push_back(row);
    }
    bool decreasing = true;
    bool consistent = true;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& cur = report.rows[i];
        if (cur.censored) {
            decreasing = consistent = false;
            break;
        }
        if (i == 0) {
            continue;
        }
        const auto& prev = report.rows[i - 1];
        if (std::abs(cur.gap) < std::abs(prev.gap)) {
            continue;
        }
        decreasing = false;
        const bool overlap = cur.gap_lo <= prev.gap_hi && prev.gap_lo <= cur.gap_hi;
        consistent = consistent && overlap;
    }
    report.gap_decreasing = decreasing;
    report.consistent = consistent;
    return report;
}

} // namespace snls
