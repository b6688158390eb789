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
#include "snls/checks.hpp"

#include "snls/diagnostics.hpp"
#include "snls/error.hpp"
#include "snls/parallel.hpp"
#include "snls/skeleton.hpp"
#include "snls/stochastic.hpp"

#include <chrono>
#include <cmath>

namespace snls {

namespace {

struct Context {
    const RunConfig& cfg;
    GridPtr grid;
    Model model;
    ComplexField u0;
    Control control;
    unsigned threads;
};

CheckMetric metric(std::string name, double value, double lo, double hi) {
    CheckMetric m{std::move(name), value, lo, hi, false};
    m.pass = std::isfinite(value) && value >= lo && value <= hi;
    return m;
}

CheckMetric at_most(std::string name, double value, double hi) {
    return metric(std::move(name), value, -kInfinity, hi);
}

CheckMetric at_least(std::string name, double value, double lo) {
    return metric(std::move(name), value, lo, kInfinity);
}

CheckMetric flag(std::string name, bool value) {
    return metric(std::move(name), value ? 1.0 : 0.0, 1.0, 1.0);
}

Model variant(const Context& ctx, bool drop_g, bool drop_damping) {
    ModelParams params = ctx.cfg.model;
    NoiseConfig noise = ctx.cfg.noise;
    if (drop_g) {
        noise.g_amplitudes.clear();
        noise.g_widths.clear();
    }
    if (drop_damping) {
        params.beta = 0.0;
    }
    return Model(ctx.grid, params, NoiseModel::build(*ctx.grid, noise));
}

Control without_g(const Control& c) {
    Control out = Control::zero(c.m1, 0, c.segments, c.horizon);
    out.rho1 = c.rho1;
    return out;
}

void strichartz(const Context& ctx, CheckResult& r) {
    const auto& d = ctx.cfg.diagnose;
    const auto pair = ctx.model.pair();
    const auto survey =
        strichartz_ratio_survey(ctx.grid, d.strichartz_samples, pair.p, pair.r,
                                ctx.cfg.solver.horizon, ctx.cfg.solver.dt,
                                parse_field_preset(d.strichartz_preset), ctx.cfg.seed);
    r.columns = {"sample", "ratio"};
    for (std::size_t i = 0; i < survey.ratios.size(); ++i) {
        r.table.push_back({static_cast<double>(i), survey.ratios[i]});
    }
    r.metrics.push_back(flag("finite", survey.finite));
    r.metrics.push_back(at_most("max_ratio", survey.max_ratio, d.strichartz_max_ratio));
    r.note = "empirical monitor on the discrete torus";
}

void ito_gap(const Context& ctx, CheckResult& r) {
    const auto& d = ctx.cfg.diagnose;
    const Model model = variant(ctx, true, false);
    const GapTable t = ito_stratonovich_gap(model, ctx.u0, ctx.cfg.solver.horizon, d.gap_dts,
                                            ctx.cfg.model.epsilon, d.gap_paths, ctx.cfg.seed);
    r.columns = {"dt", "gap", "ablated_gap"};
    for (const auto& row : t.rows) {
        r.table.push_back({row.dt, row.gap, row.ablated_gap});
    }
    r.metrics.push_back(metric("slope", t.slope, d.gap_slope_min, d.gap_slope_max));
    r.metrics.push_back(at_least("plateau_ratio", t.plateau_ratio, d.gap_plateau_factor));
    r.metrics.push_back(metric("ablated_slope", t.ablated_slope, -kInfinity, kInfinity));
    r.note = "G noise removed";
}

void picard(const Context& ctx, CheckResult& r) {
    const auto& d = ctx.cfg.diagnose;
    const double dt = ctx.cfg.solver.dt;
    const double radius = default_ball_radius(ctx.model, ctx.u0);
    const ContractionProbe probe =
        select_T0(ctx.model, ctx.u0, ctx.control, d.picard_T_max, dt, radius, d.picard_pairs,
                  ctx.cfg.seed, d.picard_max_ratio);
    // kind 0: random ball pair, kind 1: consecutive Picard iterates.
    r.columns = {"pair", "kind", "ratio"};
    for (std::size_t i = 0; i < probe.ratios.size(); ++i) {
        r.table.push_back({static_cast<double>(i), 0.0, probe.ratios[i]});
    }
    for (std::size_t i = 0; i < probe.iterate_ratios.size(); ++i) {
        r.table.push_back({static_cast<double>(i), 1.0, probe.iterate_ratios[i]});
    }
    r.metrics.push_back(metric("T0", probe.T0, 0.0, kInfinity));
    r.metrics.push_back(metric("radius", probe.radius, -kInfinity, kInfinity));
    r.metrics.push_back(at_most("max_contraction_ratio", probe.max_ratio, d.picard_max_ratio));
    try {
        const PicardResult pr = picard_iterate(ctx.model, ctx.u0, ctx.control, probe.T0, dt);
        r.metrics.push_back(flag("converged", pr.converged));
        r.metrics.push_back(at_most("max_residual_ratio", pr.max_ratio, d.picard_max_decay));
        r.metrics.push_back(
            metric("iterations", static_cast<double>(pr.iterations), -kInfinity, kInfinity));
    } catch (const NonContractionError& e) {
        r.metrics.push_back(flag("converged", false));
        r.note = e.what();
    }
}

void yosida(const Context& ctx, CheckResult& r) {
    const auto& d = ctx.cfg.diagnose;
    const YosidaCurve c =
        yosida_curve(ctx.model, ctx.u0, ctx.control, d.yosida_mus, make_solver_settings(ctx.cfg));
    r.columns = {"mu", "distance", "sup_mass", "twice_distance"};
    for (const auto& row : c.rows) {
        r.table.push_back({row.mu, row.distance, row.sup_mass, row.twice_distance});
    }
    r.metrics.push_back(flag("strictly_decreasing", c.strictly_decreasing));
    r.metrics.push_back(at_most("final_distance", c.rows.back().distance, d.yosida_max_distance));
    double sup_mass = 0.0;
    for (const auto& row : c.rows) {
        sup_mass = std::max(sup_mass, row.sup_mass);
    }
    r.metrics.push_back(at_most("sup_mass", sup_mass, c.energy_bound));
    const auto& last = c.rows.back();
    r.metrics.push_back(at_most("twice_over_single", last.twice_distance / last.distance, 2.0));
}

void order(const Context& ctx, CheckResult& r) {
    const auto& d = ctx.cfg.diagnose;
    const OrderFit sk = skeleton_order(ctx.model, ctx.u0, ctx.control, d.skeleton_dts);
    SdeSettings s = make_sde_settings(ctx.cfg);
    s.epsilon = d.order_epsilon;
    const Control zero =
        Control::zero(ctx.model.noise().m1(), ctx.model.noise().m2(), 1, ctx.cfg.solver.horizon);
    const OrderFit st = stochastic_order(ctx.model, ctx.u0, zero, s, d.stochastic_dts,
                                         d.order_paths, ctx.cfg.seed, 3, ctx.threads);
    r.columns = {"kind", "dt", "error"};
    for (std::size_t i = 0; i < sk.dts.size(); ++i) {
        r.table.push_back({0.0, sk.dts[i], sk.errors[i]});
    }
    for (std::size_t i = 0; i < st.dts.size(); ++i) {
        r.table.push_back({1.0, st.dts[i], st.errors[i]});
    }
    r.metrics.push_back(metric("skeleton_order", sk.order, d.skeleton_order_range[0],
                               d.skeleton_order_range[1]));
    r.metrics.push_back(flag("skeleton_reliable", sk.reliable));
    r.metrics.push_back(metric("stochastic_order", st.order, d.stochastic_order_range[0],
                               d.stochastic_order_range[1]));
    r.metrics.push_back(flag("stochastic_reliable", st.reliable));
    r.note = "kind 0 = skeleton, 1 = stochastic (bridge-refined)";
}

void weak(const Context& ctx, CheckResult& r) {
    const auto& d = ctx.cfg.diagnose;
    const Control pert =
        perturbation_control(ctx.control.m1, ctx.control.m2, ctx.control.segments,
                             ctx.control.horizon, d.weak_perturbation);
    const WeakConvergenceTable t =
        weak_convergence_probe(ctx.model, ctx.u0, ctx.control, pert, d.weak_epsilons,
                               d.weak_deltas, d.weak_paths, ctx.cfg.seed,
                               make_sde_settings(ctx.cfg), ctx.threads);
    r.columns = {"epsilon", "delta", "n_paths", "hits", "failed",
                 "p_hat",   "ci_lo", "ci_hi",   "mean_distance"};
    std::size_t failed = 0;
    for (const auto& row : t.rows) {
        r.table.push_back({row.epsilon, row.delta, static_cast<double>(row.n_paths),
                           static_cast<double>(row.hits), static_cast<double>(row.failed),
                           row.p_hat, row.ci_lo, row.ci_hi, row.mean_distance});
        failed += row.failed;
    }
    r.metrics.push_back(flag("decreasing_in_epsilon", t.decreasing_in_epsilon));
    r.metrics.push_back(flag("monotone_in_delta", t.monotone_in_delta));
    r.metrics.push_back(at_most("failed_paths", static_cast<double>(failed), kInfinity));
    r.note = "strongly convergent controls rho + sqrt(eps) h; weaker than weak convergence";
}

void mass_balance(const Context& ctx, CheckResult& r) {
    const auto& d = ctx.cfg.diagnose;
    const BalanceReport b =
        mass_moment_balance(ctx.model, ctx.u0, make_sde_settings(ctx.cfg), ctx.cfg.seed,
                            d.balance_paths, ctx.cfg.solver.horizon, d.balance_checkpoints,
                            ctx.threads);
    r.columns = {"t_start",       "t_end",         "mean_mass_start", "mean_mass_end",
                 "fd_derivative", "derivative_se", "oracle",          "relative_residual"};
    for (const auto& row : b.rows) {
        r.table.push_back({row.t_start, row.t_end, row.mean_mass_start, row.mean_mass_end,
                           row.fd_derivative, row.derivative_se, row.oracle,
                           row.relative_residual});
    }
    r.metrics.push_back(
        at_most("max_relative_residual", b.max_relative_residual, d.balance_max_residual));
    r.metrics.push_back(at_most("failed_paths", static_cast<double>(b.failed), kInfinity));
}

void conservation(const Context& ctx, CheckResult& r) {
    const auto& d = ctx.cfg.diagnose;
    const Model model = variant(ctx, true, true);
    SdeSettings s = make_sde_settings(ctx.cfg);
    s.scheme = NoiseScheme::unitary;
    const MassDriftReport rep =
        mass_drift_probe(model, ctx.u0, without_g(ctx.control), s, d.conservation_paths,
                         ctx.cfg.seed, ctx.threads);
    r.columns = {"path", "relative_drift"};
    for (std::size_t i = 0; i < rep.drifts.size(); ++i) {
        r.table.push_back({static_cast<double>(i), rep.drifts[i]});
    }
    r.metrics.push_back(at_most("max_relative_drift", rep.max_drift, d.conservation_max_drift));
    r.metrics.push_back(at_most("failed_paths", static_cast<double>(rep.failed), 0.0));
    r.note = "beta = 0, G noise and rho2 removed, unitary Stratonovich scheme";
}

void continuity(const Context& ctx, CheckResult& r) {
    const auto& d = ctx.cfg.diagnose;
    const Control pert =
        perturbation_control(ctx.control.m1, ctx.control.m2, ctx.control.segments,
                             ctx.control.horizon, d.continuity_perturbation);
    const auto rows = control_continuity_probe(ctx.model, ctx.u0, ctx.control, pert,
                                               d.continuity_terms, make_solver_settings(ctx.cfg));
    r.columns = {"n", "energy", "distance"};
    bool dec = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        r.table.push_back({static_cast<double>(rows[i].n), rows[i].energy, rows[i].distance});
        if (i > 0) {
            dec = dec && rows[i].distance < rows[i - 1].distance;
        }
    }
    r.metrics.push_back(flag("distance_decreasing", dec));
    r.note = "strongly convergent control sequence rho + h / n";
}

} // namespace

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{
        "strichartz", "ito_gap",      "picard",       "yosida",    "order",
        "weak",       "mass_balance", "conservation", "continuity"};
    return names;
}

Control perturbation_control(std::size_t m1, std::size_t m2, std::size_t segments,
                             double horizon, double amplitude) {
    Control c = Control::zero(m1, m2, segments, horizon);
    for (std::size_t s = 0; s < segments; ++s) {
        const auto sd = static_cast<double>(s);
        for (std::size_t m = 0; m < m1; ++m) {
            c.rho1_ref(s, m) = amplitude * std::cos(1.3 * sd + static_cast<double>(m));
        }
        for (std::size_t m = 0; m < m2; ++m) {
            c.rho2_ref(s, m) = amplitude * std::sin(0.9 * sd + static_cast<double>(m));
        }
    }
    return c;
}

CheckResult run_check(const std::string& name, const RunConfig& cfg) {
    using Fn = void (*)(const Context&, CheckResult&);
    static const std::vector<std::pair<std::string, Fn>> table{
        {"strichartz", strichartz}, {"ito_gap", ito_gap},
        {"picard", picard},         {"yosida", yosida},
        {"order", order},           {"weak", weak},
        {"mass_balance", mass_balance}, {"conservation", conservation},
        {"continuity", continuity}};
    Fn fn = nullptr;
    for (const auto& [n, f] : table) {
        if (n == name) {
            fn = f;
        }
    }
    if (fn == nullptr) {
        throw ConfigError("diagnose.checks", "unknown check '" + name + "'");
    }
    const auto start = std::chrono::steady_clock::now();
    const GridPtr grid = make_grid(cfg);
    Model model = make_model(cfg, grid);
    ComplexField u0 = make_initial(cfg, grid);
    Control control = make_control(cfg, model);
    const Context ctx{cfg, grid, std::move(model), std::move(u0), std::move(control),
                      resolve_threads(cfg.threads)};
    CheckResult r;
    r.name = name;
    fn(ctx, r);
    r.pass = !r.metrics.empty();
    for (const auto& m : r.metrics) {
        r.pass = r.pass && m.pass;
    }
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace snls
