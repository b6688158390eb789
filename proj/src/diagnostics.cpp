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
#include "snls/diagnostics.hpp"

#include "snls/error.hpp"
#include "snls/noise.hpp"
#include "snls/norms.hpp"
#include "snls/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snls {

std::string to_string(FieldPreset p) {
    switch (p) {
    case FieldPreset::smooth:
        return "smooth";
    case FieldPreset::broadband:
        return "broadband";
    case FieldPreset::localized:
        return "localized";
    }
    return "unknown";
}

FieldPreset parse_field_preset(const std::string& s) {
    for (auto p : {FieldPreset::smooth, FieldPreset::broadband, FieldPreset::localized}) {
        if (s == to_string(p)) {
            return p;
        }
    }
    throw std::invalid_argument("unknown field preset '" + s + "' (smooth, broadband, localized)");
}

ComplexField random_field(const GridPtr& grid, FieldPreset preset, std::uint64_t seed,
                          std::uint64_t sample) {
    const long band = preset == FieldPreset::smooth ? 4 : preset == FieldPreset::broadband ? 16 : 8;
    const auto n = static_cast<long>(grid->n_per_dim());
    const CounterNormal gen(SeedSpec{seed, sample});
    std::vector<Complex> spec(grid->size(), Complex{});
    double z[2];
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto idx = grid->unflatten(i);
        bool inside = true;
        double j2 = 0.0;
        std::uint64_t key = 0;
        for (int d = 0; d < 3; ++d) {
            long j = 0;
            if (d < grid->dim()) {
                j = static_cast<long>(idx[static_cast<std::size_t>(d)]);
                j = j < n / 2 ? j : j - n;
                // The Nyquist index has no refinement-stable counterpart.
                inside = inside && std::abs(j) <= band && j != -n / 2;
            }
            j2 += static_cast<double>(j * j);
            key = key * 1024 + static_cast<std::uint64_t>(j + 512);
        }
        if (!inside) {
            continue;
        }
        double w = 0.0;
        switch (preset) {
        case FieldPreset::smooth:
            w = 1.0 / (1.0 + j2);
            break;
        case FieldPreset::broadband:
            w = 1.0 / (1.0 + std::sqrt(j2));
            break;
        case FieldPreset::localized:
            w = std::exp(-j2 / 16.0);
            break;
        }
        gen.fill(Stream::aux, key, 7, std::span<double>(z, 2));
        spec[i] = w * Complex{z[0], z[1]};
    }
    grid->fft().backward(spec);
    ComplexField f(grid, std::move(spec));
    const double nrm = norm_l2(f);
    if (nrm == 0.0) {
        throw std::runtime_error("random field vanished");
    }
    f *= Complex{1.0 / nrm, 0.0};
    return f;
}

double strichartz_ratio(const ComplexField& phi, double p, double r, double T, double dt) {
    const std::size_t steps = step_count(T, dt);
    const Grid& grid = phi.grid();
    const auto k2 = grid.k_squared();
    const double inv_n = 1.0 / static_cast<double>(grid.size());
    std::vector<Complex> spec = phi.vector();
    grid.fft().forward(spec);
    std::vector<Complex> work(spec.size());
    const bool sup = std::isinf(p);
    double acc = 0.0;
    const std::size_t last = sup ? steps : steps - 1;
    for (std::size_t n = 0; n <= last; ++n) {
        const double t = static_cast<double>(n) * dt;
        for (std::size_t i = 0; i < spec.size(); ++i) {
            work[i] = spec[i] * std::polar(inv_n, -k2[i] * t);
        }
        grid.fft().backward(work);
        const double lr = norm_lr(work, grid.dx(), r);
        acc = sup ? std::max(acc, lr) : acc + std::pow(lr, p) * dt;
    }
    const double num = sup ? acc : std::pow(acc, 1.0 / p);
    return num / norm_l2(phi);
}

StrichartzSurvey strichartz_ratio_survey(const GridPtr& grid, std::size_t n_samples, double p,
                                         double r, double T, double dt, FieldPreset preset,
                                         std::uint64_t seed) {
    if (!admissible_r(grid->dim(), r)) {
        throw std::invalid_argument("r = " + std::to_string(r) + " is not admissible in dimension " +
                                    std::to_string(grid->dim()));
    }
    const double p_expected = admissible_p(grid->dim(), r);
    const bool same = std::isinf(p) ? std::isinf(p_expected)
                                    : std::abs(p - p_expected) <= 1e-12 * std::max(1.0, p);
    if (!same) {
        throw std::invalid_argument("(p, r) is not an admissible pair: expected p = " +
                                    std::to_string(p_expected));
    }
    StrichartzSurvey s;
    s.p = p;
    s.r = r;
    s.T = T;
    s.n_per_dim = grid->n_per_dim();
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double ratio = strichartz_ratio(random_field(grid, preset, seed, k), p, r, T, dt);
        s.ratios.push_back(ratio);
        s.finite = s.finite && std::isfinite(ratio);
        s.max_ratio = std::max(s.max_ratio, ratio);
    }
    return s;
}

OrderFit fit_order(const std::vector<double>& dts, const std::vector<double>& errors) {
    if (dts.size() != errors.size() || dts.size() < 2) {
        throw std::invalid_argument("order fit needs matching dt and error lists (>= 2 rungs)");
    }
    OrderFit fit;
    fit.dts = dts;
    fit.errors = errors;
    const double worst = *std::max_element(errors.begin(), errors.end());
    if (worst <= 1e-12) {
        fit.skipped = true;
        fit.reliable = false;
        fit.order = 0.0;
        return fit;
    }
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    const double m = static_cast<double>(dts.size());
    bool positive = true;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        positive = positive && errors[i] > 0.0;
        const double x = std::log(dts[i]);
        const double y = std::log(std::max(errors[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    bool decreasing = positive;
    for (std::size_t i = 1; i < dts.size(); ++i) {
        decreasing = decreasing && dts[i] < dts[i - 1] && errors[i] < errors[i - 1];
    }
    fit.reliable = decreasing;
    return fit;
}

namespace {

void check_halving(const std::vector<double>& dts) {
    if (dts.size() < 2) {
        throw std::invalid_argument("dt ladder needs at least two rungs");
    }
    for (std::size_t i = 1; i < dts.size(); ++i) {
        if (std::abs(dts[i] - 0.5 * dts[i - 1]) > 1e-12 * dts[i - 1]) {
            throw std::invalid_argument("dt ladder must halve at every rung");
        }
    }
}

ComplexField terminal(const Model& model, const ComplexField& u0, const Control& ctrl,
                      const BrownianPath& path, SdeSettings settings) {
    settings.field_stride = 0;
    settings.dt = path.dt;
    return solve_sde(model, u0, ctrl, path, settings).final_field();
}

} // namespace

GapTable ito_stratonovich_gap(const Model& model, const ComplexField& u0, double T,
                              const std::vector<double>& dts, double epsilon,
                              std::size_t n_paths, std::uint64_t seed) {
    if (model.noise().m2() != 0) {
        throw std::invalid_argument("the Ito-Stratonovich gap needs B-only noise (M2 = 0)");
    }
    if (n_paths == 0) {
        throw std::invalid_argument("n_paths must be >= 1");
    }
    check_halving(dts);
    const std::size_t m1 = model.noise().m1();
    const Control ctrl = Control::zero(m1, 0, 1, T);
    const std::size_t coarse_steps = step_count(T, dts.front());
    const double dx = model.grid().dx();

    std::vector<double> sq(dts.size(), 0.0);
    std::vector<double> sq_ablated(dts.size(), 0.0);
    SdeSettings s;
    s.epsilon = epsilon;
    for (std::size_t k = 0; k < n_paths; ++k) {
        BrownianPath path = generate_path(SeedSpec{seed, k}, coarse_steps, dts.front(), m1, 0);
        for (std::size_t level = 0; level < dts.size(); ++level) {
            if (level > 0) {
                path = brownian_bridge_refine(path);
            }
            s.scheme = NoiseScheme::unitary;
            const ComplexField a = terminal(model, u0, ctrl, path, s);
            s.scheme = NoiseScheme::ito_literal;
            s.stratonovich_correction = true;
            const ComplexField b = terminal(model, u0, ctrl, path, s);
            s.stratonovich_correction = false;
            const ComplexField c = terminal(model, u0, ctrl, path, s);
            const double d1 = distance_l2(a.values(), b.values(), dx);
            const double d2 = distance_l2(a.values(), c.values(), dx);
            sq[level] += d1 * d1;
            sq_ablated[level] += d2 * d2;
        }
    }
    GapTable table;
    std::vector<double> gaps;
    std::vector<double> ablated;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        GapRow row;
        row.dt = dts[i];
        row.gap = std::sqrt(sq[i] / static_cast<double>(n_paths));
        row.ablated_gap = std::sqrt(sq_ablated[i] / static_cast<double>(n_paths));
        gaps.push_back(row.gap);
        ablated.push_back(row.ablated_gap);
        table.rows.push_back(row);
    }
    table.slope = fit_order(dts, gaps).order;
    table.ablated_slope = fit_order(dts, ablated).order;
    const double min_gap = *std::min_element(gaps.begin(), gaps.end());
    const double min_ablated = *std::min_element(ablated.begin(), ablated.end());
    table.plateau_ratio = min_gap > 0.0 ? min_ablated / min_gap : 0.0;
    return table;
}

WeakConvergenceTable weak_convergence_probe(const Model& model, const ComplexField& u0,
                                            const Control& rho, const Control& perturbation,
                                            const std::vector<double>& epsilons,
                                            const std::vector<double>& deltas,
                                            std::size_t n_paths, std::uint64_t seed,
                                            const SdeSettings& settings, unsigned threads) {
    if (epsilons.empty() || deltas.empty() || n_paths == 0) {
        throw std::invalid_argument("weak convergence probe needs epsilons, deltas and paths");
    }
    if (rho.m1 != perturbation.m1 || rho.m2 != perturbation.m2 ||
        rho.segments != perturbation.segments || rho.horizon != perturbation.horizon) {
        throw std::invalid_argument("control and perturbation shapes differ");
    }
    SolverSettings sk;
    sk.dt = settings.dt;
    sk.field_stride = 1;
    const Trajectory reference = solve_skeleton(model, u0, rho, sk);
    const auto pair = model.pair();
    const double dx = model.grid().dx();

    WeakConvergenceTable table;
    for (double eps : epsilons) {
        if (!(eps >= 0.0)) {
            throw std::invalid_argument("epsilon must be >= 0");
        }
        Control ctrl = rho;
        const double se = std::sqrt(eps);
        for (std::size_t i = 0; i < ctrl.rho1.size(); ++i) {
            ctrl.rho1[i] += se * perturbation.rho1[i];
        }
        for (std::size_t i = 0; i < ctrl.rho2.size(); ++i) {
            ctrl.rho2[i] += se * perturbation.rho2[i];
        }
        SdeSettings s = settings;
        s.epsilon = eps;
        s.field_stride = 0;
        std::vector<double> distance(n_paths, 0.0);
        std::vector<std::uint8_t> failed(n_paths, 0);
        parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end, unsigned) {
            std::vector<Complex> diff(model.grid().size());
            for (std::size_t k = begin; k < end; ++k) {
                MixedNormAccumulator acc(pair.p, s.dt);
                const StepObserver obs = [&](std::size_t n, std::span<const Complex> u) {
                    const auto ref = reference.fields[n].values();
                    for (std::size_t i = 0; i < diff.size(); ++i) {
                        diff[i] = u[i] - ref[i];
                    }
                    acc.push(norm_l2(diff, dx), norm_lr(diff, dx, pair.r));
                };
                try {
                    (void)solve_sde(model, u0, ctrl, SeedSpec{seed, k}, s, obs);
                    distance[k] = acc.value();
                } catch (const BlowUpError&) {
                    failed[k] = 1;
                }
            }
        });
        for (double delta : deltas) {
            WeakConvergenceRow row;
            row.epsilon = eps;
            row.delta = delta;
            row.n_paths = n_paths;
            double sum = 0.0;
            for (std::size_t k = 0; k < n_paths; ++k) {
                if (failed[k]) {
                    ++row.failed;
                    continue;
                }
                sum += distance[k];
                row.hits += distance[k] >= delta ? 1 : 0;
            }
            const std::size_t valid = n_paths - row.failed;
            row.p_hat = valid > 0 ? static_cast<double>(row.hits) / static_cast<double>(valid) : 0.0;
            row.mean_distance = valid > 0 ? sum / static_cast<double>(valid) : 0.0;
            const WilsonInterval ci = wilson_interval(row.hits, valid);
            row.ci_lo = ci.lo;
            row.ci_hi = ci.hi;
            table.rows.push_back(row);
        }
    }
    const std::size_t nd = deltas.size();
    bool dec_eps = true;
    bool mono_delta = true;
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        for (std::size_t d = 0; d < nd; ++d) {
            const auto& row = table.rows[e * nd + d];
            if (e > 0 && !(row.p_hat < table.rows[(e - 1) * nd + d].p_hat)) {
                dec_eps = false;
            }
            if (d > 0 && deltas[d] >= deltas[d - 1] &&
                row.p_hat > table.rows[e * nd + d - 1].p_hat) {
                mono_delta = false;
            }
        }
    }
    table.decreasing_in_epsilon = dec_eps && epsilons.size() > 1;
    table.monotone_in_delta = mono_delta;
    return table;
}

OrderFit skeleton_order(const Model& model, const ComplexField& u0, const Control& ctrl,
                        const std::vector<double>& dts) {
    if (dts.size() < 3) {
        throw std::invalid_argument("order fit needs at least three rungs");
    }
    SolverSettings s;
    s.field_stride = 0;
    s.dt = dts.back() / 4.0;
    const ComplexField ref = solve_skeleton(model, u0, ctrl, s).final_field();
    std::vector<double> errors;
    for (double dt : dts) {
        s.dt = dt;
        const ComplexField f = solve_skeleton(model, u0, ctrl, s).final_field();
        errors.push_back(distance_l2(f.values(), ref.values(), model.grid().dx()));
    }
    return fit_order(dts, errors);
}

OrderFit stochastic_order(const Model& model, const ComplexField& u0, const Control& ctrl,
                          const SdeSettings& settings, const std::vector<double>& dts,
                          std::size_t n_paths, std::uint64_t seed, std::size_t extra_levels,
                          unsigned threads) {
    if (dts.size() < 3) {
        throw std::invalid_argument("order fit needs at least three rungs");
    }
    if (n_paths == 0 || extra_levels == 0) {
        throw std::invalid_argument("stochastic order needs paths and at least one extra level");
    }
    check_halving(dts);
    const std::size_t coarse_steps = step_count(ctrl.horizon, dts.front());
    const std::size_t m1 = model.noise().m1();
    const std::size_t m2 = model.noise().m2();
    const double dx = model.grid().dx();
    std::vector<std::vector<double>> sq(n_paths, std::vector<double>(dts.size(), 0.0));
    parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t k = begin; k < end; ++k) {
            std::vector<BrownianPath> paths;
            paths.push_back(generate_path(SeedSpec{seed, k}, coarse_steps, dts.front(), m1, m2));
            for (std::size_t l = 1; l < dts.size() + extra_levels; ++l) {
                paths.push_back(brownian_bridge_refine(paths.back()));
            }
            const ComplexField ref = terminal(model, u0, ctrl, paths.back(), settings);
            for (std::size_t l = 0; l < dts.size(); ++l) {
                const ComplexField f = terminal(model, u0, ctrl, paths[l], settings);
                const double d = distance_l2(f.values(), ref.values(), dx);
                sq[k][l] = d * d;
            }
        }
    });
    std::vector<double> errors(dts.size(), 0.0);
    for (std::size_t l = 0; l < dts.size(); ++l) {
        for (std::size_t k = 0; k < n_paths; ++k) {
            errors[l] += sq[k][l];
        }
        errors[l] = std::sqrt(errors[l] / static_cast<double>(n_paths));
    }
    return fit_order(dts, errors);
}

YosidaCurve yosida_curve(const Model& model, const ComplexField& u0, const Control& ctrl,
                         const std::vector<double>& mus, const SolverSettings& settings) {
    SolverSettings s = settings;
    s.field_stride = 1;
    const auto pair = model.pair();
    const Trajectory u = solve_skeleton(model, u0, ctrl, s);
    YosidaCurve curve;
    curve.energy_bound = skeleton_energy_bound(model, u0, ctrl);
    for (double mu : mus) {
        const Trajectory um = solve_skeleton_yosida(model, u0, ctrl, mu, s, 1);
        const Trajectory um2 = solve_skeleton_yosida(model, u0, ctrl, mu, s, 2);
        YosidaRow row;
        row.mu = mu;
        row.distance = mixed_distance(um, u, pair.p, pair.r);
        row.twice_distance = mixed_distance(um2, um, pair.p, pair.r);
        for (double h : um.norm_h) {
            row.sup_mass = std::max(row.sup_mass, h * h);
        }
        curve.rows.push_back(row);
    }
    bool dec = curve.rows.size() > 1;
    for (std::size_t i = 1; i < curve.rows.size(); ++i) {
        dec = dec && curve.rows[i].distance < curve.rows[i - 1].distance;
    }
    curve.strictly_decreasing = dec;
    return curve;
}

std::vector<ContinuityRow> control_continuity_probe(const Model& model, const ComplexField& u0,
                                                    const Control& rho,
                                                    const Control& perturbation,
                                                    std::size_t terms,
                                                    const SolverSettings& settings) {
    if (rho.rho1.size() != perturbation.rho1.size() || rho.rho2.size() != perturbation.rho2.size()) {
        throw std::invalid_argument("control and perturbation shapes differ");
    }
    SolverSettings s = settings;
    s.field_stride = 1;
    const auto pair = model.pair();
    const Trajectory base = solve_skeleton(model, u0, rho, s);
    std::vector<ContinuityRow> rows;
    std::size_t n = 1;
    for (std::size_t t = 0; t < terms; ++t, n *= 2) {
        Control c = rho;
        const double w = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < c.rho1.size(); ++i) {
            c.rho1[i] += w * perturbation.rho1[i];
        }
        for (std::size_t i = 0; i < c.rho2.size(); ++i) {
            c.rho2[i] += w * perturbation.rho2[i];
        }
        ContinuityRow row;
        row.n = n;
        row.energy = c.energy();
        row.distance = mixed_distance(solve_skeleton(model, u0, c, s), base, pair.p, pair.r);
        rows.push_back(row);
    }
    return rows;
}

MassDriftReport mass_drift_probe(const Model& model, const ComplexField& u0, const Control& ctrl,
                                 const SdeSettings& settings, std::size_t n_paths,
                                 std::uint64_t seed, unsigned threads) {
    SdeSettings s = settings;
    s.field_stride = 0;
    const double m0 = std::pow(norm_l2(u0), 2);
    if (!(m0 > 0.0)) {
        throw std::invalid_argument("initial state has zero mass");
    }
    std::vector<double> drifts(n_paths, 0.0);
    std::vector<char> failed(n_paths, 0);
    parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const Trajectory traj = solve_sde(model, u0, ctrl, SeedSpec{seed, i}, s);
                double worst = 0.0;
                for (double h : traj.norm_h) {
                    worst = std::max(worst, std::abs(h * h - m0) / m0);
                }
                drifts[i] = worst;
            } catch (const BlowUpError&) {
                failed[i] = 1;
            }
        }
    });
    MassDriftReport report;
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (failed[i]) {
            ++report.failed;
            continue;
        }
        report.drifts.push_back(drifts[i]);
        report.max_drift = std::max(report.max_drift, drifts[i]);
    }
    return report;
}

} // namespace snls
