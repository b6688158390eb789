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
#include "snls/stochastic.hpp"

#include "recorder.hpp"
#include "snls/error.hpp"
#include "snls/norms.hpp"
#include "snls/parallel.hpp"
#include "snls/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace snls {

namespace {

StepperOptions options_for(const SdeSettings& settings) {
    StepperOptions o;
    o.scheme = settings.scheme;
    o.stratonovich_correction = settings.stratonovich_correction;
    return o;
}

double sqrt_epsilon(const SdeSettings& settings) {
    if (!(settings.epsilon >= 0.0) || !std::isfinite(settings.epsilon)) {
        throw std::invalid_argument("noise intensity epsilon must be >= 0");
    }
    return std::sqrt(settings.epsilon);
}

void check_inputs(const Model& model, const ComplexField& u0, const Control& ctrl) {
    if (u0.size() != model.grid().size()) {
        throw std::invalid_argument("initial state does not live on the model grid");
    }
    ctrl.validate();
    if (ctrl.m1 != model.noise().m1() || ctrl.m2 != model.noise().m2()) {
        throw std::invalid_argument("control mode counts do not match the noise model");
    }
}

/// Shared stepping loop. `fill(n, dW1, dW2)` supplies the increments of step
/// n; a truncation spec weights the nonlinear phase by theta_R of the running
/// mixed norm at the start of each step.
template <class Fill>
std::pair<Trajectory, StopReport> run_sde(const Model& model, const ComplexField& u0,
                                          const Control& ctrl, const SdeSettings& settings,
                                          double dt, std::size_t steps, Fill&& fill,
                                          const std::optional<TruncationSpec>& trunc,
                                          const StepObserver& observer) {
    check_inputs(model, u0, ctrl);
    if (std::abs(static_cast<double>(steps) * dt - ctrl.horizon) > 1e-9 * ctrl.horizon) {
        throw std::invalid_argument("noise path horizon does not match the control horizon");
    }
    const double se = sqrt_epsilon(settings);
    const auto& noise = model.noise();
    SplitStepper stepper(model, dt, options_for(settings));
    detail::TrajectoryRecorder rec(model.grid_ptr(), dt, model.params().r(), steps,
                                   settings.field_stride);
    std::vector<double> dW1(noise.m1());
    std::vector<double> dW2(noise.m2());
    std::vector<Complex> u = u0.vector();

    std::optional<MixedNormAccumulator> acc;
    StopReport report;
    report.tau = static_cast<double>(steps) * dt;
    if (trunc) {
        acc.emplace(model.pair().p, dt);
        report.level = trunc->R;
    }

    rec.record(0, u);
    if (observer) {
        observer(0, u);
    }
    for (std::size_t n = 0; n < steps; ++n) {
        StepDrive drive;
        if (acc) {
            acc->push(rec.last_norm_h(), rec.last_norm_r());
            const double running = acc->value();
            if (!report.hit && running > trunc->R) {
                report.hit = true;
                report.tau = static_cast<double>(n) * dt;
            }
            drive.nonlinear_weight = (*trunc)(running);
        }
        fill(n, std::span<double>(dW1), std::span<double>(dW2));
        const std::size_t seg = ctrl.segment_of_step(n, dt);
        drive.rho1 = ctrl.rho1_at(seg);
        drive.rho2 = ctrl.rho2_at(seg);
        drive.dW1 = dW1;
        drive.dW2 = dW2;
        drive.sqrt_eps = se;
        stepper.step(u, drive);
        rec.record(n + 1, u);
        if (observer) {
            observer(n + 1, u);
        }
    }
    if (acc && !report.hit) {
        acc->push(rec.last_norm_h(), rec.last_norm_r());
        if (acc->value() > trunc->R) {
            report.hit = true;
        }
    }
    return {rec.take(), report};
}

std::pair<Trajectory, StopReport> run_seeded(const Model& model, const ComplexField& u0,
                                             const Control& ctrl, const SeedSpec& seed,
                                             const SdeSettings& settings,
                                             const std::optional<TruncationSpec>& trunc,
                                             const StepObserver& observer) {
    const std::size_t steps = step_count(ctrl.horizon, settings.dt);
    const CounterNormal gen(seed);
    const double dt = settings.dt;
    auto result = run_sde(
        model, u0, ctrl, settings, dt, steps,
        [&](std::size_t n, std::span<double> a, std::span<double> b) {
            fill_increments(gen, n, dt, a, b);
        },
        trunc, observer);
    result.first.seed = seed.master_seed;
    result.first.path_index = seed.path_index;
    return result;
}

std::pair<Trajectory, StopReport> run_path(const Model& model, const ComplexField& u0,
                                           const Control& ctrl, const BrownianPath& path,
                                           const SdeSettings& settings,
                                           const std::optional<TruncationSpec>& trunc,
                                           const StepObserver& observer) {
    if (path.m1 != model.noise().m1() || path.m2 != model.noise().m2()) {
        throw std::invalid_argument("Brownian path mode counts do not match the noise model");
    }
    auto result = run_sde(
        model, u0, ctrl, settings, path.dt, path.steps,
        [&](std::size_t n, std::span<double> a, std::span<double> b) {
            const auto w1 = path.w1_at(n);
            const auto w2 = path.w2_at(n);
            std::copy(w1.begin(), w1.end(), a.begin());
            std::copy(w2.begin(), w2.end(), b.begin());
        },
        trunc, observer);
    result.first.seed = path.seed.master_seed;
    result.first.path_index = path.seed.path_index;
    return result;
}

} // namespace

ComplexField step_sde(const Model& model, const ComplexField& u, std::span<const double> rho1,
                      std::span<const double> rho2, const NoiseIncrement& increment,
                      const SdeSettings& settings) {
    if (std::abs(increment.dt - settings.dt) > 1e-12 * settings.dt) {
        throw std::invalid_argument("increment dt does not match the solver dt");
    }
    SplitStepper stepper(model, settings.dt, options_for(settings));
    std::vector<Complex> v = u.vector();
    StepDrive drive;
    drive.rho1 = rho1;
    drive.rho2 = rho2;
    drive.dW1 = increment.dW1;
    drive.dW2 = increment.dW2;
    drive.sqrt_eps = sqrt_epsilon(settings);
    stepper.step(v, drive);
    double h = norm_l2(v, model.grid().dx());
    if (!std::isfinite(h)) {
        throw BlowUpError(1, h);
    }
    return ComplexField(u.grid_ptr(), std::move(v));
}

Trajectory solve_sde(const Model& model, const ComplexField& u0, const Control& ctrl,
                     const SeedSpec& seed, const SdeSettings& settings,
                     const StepObserver& observer) {
    return run_seeded(model, u0, ctrl, seed, settings, std::nullopt, observer).first;
}

Trajectory solve_sde(const Model& model, const ComplexField& u0, const Control& ctrl,
                     const BrownianPath& path, const SdeSettings& settings,
                     const StepObserver& observer) {
    return run_path(model, u0, ctrl, path, settings, std::nullopt, observer).first;
}

double TruncationSpec::cutoff(double x) noexcept {
    const double a = std::abs(x);
    if (a <= 1.0) {
        return 1.0;
    }
    if (a >= 2.0) {
        return 0.0;
    }
    const auto psi = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    const double up = psi(2.0 - a);
    return up / (up + psi(a - 1.0));
}

StopReport stopping_time(const Trajectory& traj, double level, double p) {
    StopReport report;
    report.level = level;
    report.tau = traj.horizon();
    MixedNormAccumulator acc(p, traj.dt);
    for (std::size_t n = 0; n < traj.times.size(); ++n) {
        acc.push(traj.norm_h[n], traj.norm_r[n]);
        if (acc.value() > level) {
            report.hit = true;
            report.tau = traj.times[n];
            break;
        }
    }
    return report;
}

std::pair<Trajectory, StopReport> solve_truncated(const Model& model, const ComplexField& u0,
                                                  const Control& ctrl, const SeedSpec& seed,
                                                  const SdeSettings& settings,
                                                  const TruncationSpec& trunc) {
    if (!(trunc.R > 0.0)) {
        throw std::invalid_argument("truncation radius R must be positive");
    }
    return run_seeded(model, u0, ctrl, seed, settings, trunc, {});
}

std::pair<Trajectory, StopReport> solve_truncated(const Model& model, const ComplexField& u0,
                                                  const Control& ctrl, const BrownianPath& path,
                                                  const SdeSettings& settings,
                                                  const TruncationSpec& trunc) {
    if (!(trunc.R > 0.0)) {
        throw std::invalid_argument("truncation radius R must be positive");
    }
    return run_path(model, u0, ctrl, path, settings, trunc, {});
}

BalanceReport mass_moment_balance(const Model& model, const ComplexField& u0,
                                  const SdeSettings& settings, std::uint64_t seed_base,
                                  std::size_t n_paths, double T, std::size_t checkpoints,
                                  unsigned threads) {
    if (n_paths < 100) {
        throw std::invalid_argument("mass balance needs at least 100 paths");
    }
    if (checkpoints < 1) {
        throw std::invalid_argument("mass balance needs at least one checkpoint window");
    }
    const std::size_t steps = step_count(T, settings.dt);
    if (steps % checkpoints != 0) {
        throw std::invalid_argument("step count must be divisible by the checkpoint count");
    }
    const std::size_t window = steps / checkpoints;
    const auto& noise = model.noise();
    const Control ctrl = Control::zero(noise.m1(), noise.m2(), 1, T);
    const double beta = model.params().beta;
    const double eps = settings.epsilon;
    const double dx = model.grid().dx();
    SdeSettings s = settings;
    s.field_stride = 0;

    // Per path: mass at each checkpoint and the window sum of the drift integrand.
    struct PathRecord {
        bool ok = false;
        std::vector<double> mass;
        std::vector<double> drift;
    };
    std::vector<PathRecord> records(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t i = begin; i < end; ++i) {
            PathRecord rec;
            rec.mass.assign(checkpoints + 1, 0.0);
            rec.drift.assign(checkpoints, 0.0);
            const StepObserver obs = [&](std::size_t n, std::span<const Complex> u) {
                double mass = 0.0;
                double g2 = 0.0;
                for (std::size_t j = 0; j < u.size(); ++j) {
                    const double a = std::norm(u[j]);
                    mass += a;
                    if (n < steps) {
                        const double sig = std::norm(g_sigma(noise.g_shape, u[j]));
                        for (std::size_t m = 0; m < noise.m2(); ++m) {
                            g2 += noise.g[m][j] * noise.g[m][j] * sig;
                        }
                    }
                }
                mass *= dx;
                g2 *= dx;
                if (n % window == 0) {
                    rec.mass[n / window] = mass;
                }
                if (n < steps) {
                    rec.drift[n / window] += -2.0 * beta * mass + eps * g2;
                }
            };
            try {
                (void)solve_sde(model, u0, ctrl, SeedSpec{seed_base, i}, s, obs);
                rec.ok = true;
            } catch (const BlowUpError&) {
                rec.ok = false;
            }
            records[i] = std::move(rec);
        }
    });

    BalanceReport report;
    report.n_paths = n_paths;
    report.epsilon = eps;
    std::vector<const PathRecord*> good;
    for (const auto& r : records) {
        if (r.ok) {
            good.push_back(&r);
        } else {
            ++report.failed;
        }
    }
    if (good.size() < 2) {
        throw std::runtime_error("mass balance: too few successful paths");
    }
    const double count = static_cast<double>(good.size());
    const double width = static_cast<double>(window) * settings.dt;
    for (std::size_t k = 0; k < checkpoints; ++k) {
        BalanceRow row;
        row.t_start = static_cast<double>(k * window) * settings.dt;
        row.t_end = static_cast<double>((k + 1) * window) * settings.dt;
        double sum_diff = 0.0;
        double sum_diff2 = 0.0;
        double sum_start = 0.0;
        double sum_end = 0.0;
        double sum_drift = 0.0;
        for (const PathRecord* r : good) {
            const double d = r->mass[k + 1] - r->mass[k];
            sum_diff += d;
            sum_diff2 += d * d;
            sum_start += r->mass[k];
            sum_end += r->mass[k + 1];
            sum_drift += r->drift[k];
        }
        const double mean_diff = sum_diff / count;
        const double var = std::max(0.0, (sum_diff2 - count * mean_diff * mean_diff) / (count - 1.0));
        row.mean_mass_start = sum_start / count;
        row.mean_mass_end = sum_end / count;
        row.fd_derivative = mean_diff / width;
        row.derivative_se = std::sqrt(var / count) / width;
        row.oracle = sum_drift / (count * static_cast<double>(window));
        // Relative to the oracle, or to the mass scale when the oracle vanishes.
        const double scale = std::abs(row.oracle) > 1e-12 * row.mean_mass_start
                                 ? std::abs(row.oracle)
                                 : std::max(row.mean_mass_start, 1e-300);
        row.relative_residual = std::abs(row.fd_derivative - row.oracle) / scale;
        report.max_relative_residual = std::max(report.max_relative_residual, row.relative_residual);
        report.rows.push_back(row);
    }
    return report;
}

} // namespace snls
