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
#include "snls/skeleton.hpp"

#include "recorder.hpp"
#include "snls/error.hpp"
#include "snls/noise.hpp"
#include "snls/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snls {

std::size_t step_count(double horizon, double dt) {
    if (!(dt > 0.0) || !(horizon > 0.0) || !std::isfinite(horizon) || !std::isfinite(dt)) {
        throw std::invalid_argument("horizon and dt must be positive");
    }
    const double steps = std::round(horizon / dt);
    if (steps < 1.0 || std::abs(steps * dt - horizon) > 1e-9 * horizon) {
        throw std::invalid_argument("horizon " + std::to_string(horizon) +
                                    " is not a multiple of dt " + std::to_string(dt));
    }
    return static_cast<std::size_t>(steps);
}

namespace {

void check_control(const Model& model, const Control& ctrl) {
    ctrl.validate();
    if (ctrl.m1 != model.noise().m1() || ctrl.m2 != model.noise().m2()) {
        throw std::invalid_argument("control mode counts do not match the noise model");
    }
}

void check_initial(const Model& model, const ComplexField& u0) {
    if (u0.grid_ptr() == nullptr || u0.size() != model.grid().size()) {
        throw std::invalid_argument("initial state does not live on the model grid");
    }
}

Trajectory run_deterministic(const Model& model, std::vector<Complex> u, const Control& ctrl,
                             const SolverSettings& settings, const StepperOptions& options) {
    check_control(model, ctrl);
    const std::size_t steps = step_count(ctrl.horizon, settings.dt);
    SplitStepper stepper(model, settings.dt, options);
    detail::TrajectoryRecorder rec(model.grid_ptr(), settings.dt, model.params().r(), steps,
                                   settings.field_stride);
    rec.record(0, u);
    for (std::size_t n = 0; n < steps; ++n) {
        const std::size_t seg = ctrl.segment_of_step(n, settings.dt);
        StepDrive drive;
        drive.rho1 = ctrl.rho1_at(seg);
        drive.rho2 = ctrl.rho2_at(seg);
        stepper.step(u, drive);
        rec.record(n + 1, u);
    }
    return rec.take();
}

} // namespace

Trajectory solve_skeleton(const Model& model, const ComplexField& u0, const Control& ctrl,
                          const SolverSettings& settings) {
    check_initial(model, u0);
    return run_deterministic(model, u0.vector(), ctrl, settings, {});
}

Trajectory solve_skeleton_yosida(const Model& model, const ComplexField& u0, const Control& ctrl,
                                 double mu, const SolverSettings& settings, int passes) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("Yosida parameter mu must be positive");
    }
    if (passes < 1) {
        throw std::invalid_argument("Yosida passes must be >= 1");
    }
    check_initial(model, u0);
    auto symbol = yosida_symbol(model.grid(), mu);
    for (auto& s : symbol) {
        s = std::pow(s, passes);
    }
    const ComplexField ju0 = apply_spectral_symbol(u0, symbol);
    StepperOptions options;
    options.yosida_mu = mu;
    options.yosida_passes = passes;
    return run_deterministic(model, ju0.vector(), ctrl, settings, options);
}

Trajectory picard_map(const Model& model, const Trajectory& u, const ComplexField& u0,
                      const Control& ctrl) {
    if (!u.has_all_fields()) {
        throw std::invalid_argument("Picard map needs a trajectory with all fields stored");
    }
    check_initial(model, u0);
    check_control(model, ctrl);
    const double dt = u.dt;
    const std::size_t steps = u.steps();
    if (static_cast<double>(steps) * dt > ctrl.horizon * (1.0 + 1e-9)) {
        throw std::invalid_argument("Picard map: trajectory extends beyond the control horizon");
    }

    const Grid& grid = model.grid();
    const std::size_t size = grid.size();
    const auto k2 = grid.k_squared();
    const double inv_n = 1.0 / static_cast<double>(size);
    std::vector<Complex> free_step(size); // exp(-i|k|^2 dt) / N
    for (std::size_t i = 0; i < size; ++i) {
        free_step[i] = std::polar(inv_n, -k2[i] * dt);
    }
    const auto& fft = grid.fft();
    const auto& noise = model.noise();
    const double beta = model.params().beta;
    const bool nonlinear = model.params().nonlinear;

    // w_{n+1} = S(dt) [w_n - dt F(u_n)], the left-endpoint mild form.
    detail::TrajectoryRecorder rec(model.grid_ptr(), dt, model.params().r(), steps, 1);
    std::vector<Complex> w = u0.vector();
    rec.record(0, w);
    for (std::size_t n = 0; n < steps; ++n) {
        const auto un = u.fields[n].values();
        const std::size_t seg = ctrl.segment_of_step(n, dt);
        const auto r1 = ctrl.rho1_at(seg);
        const auto r2 = ctrl.rho2_at(seg);
        for (std::size_t i = 0; i < size; ++i) {
            const Complex v = un[i];
            double bc = 0.0;
            for (std::size_t m = 0; m < noise.m1(); ++m) {
                bc += noise.b[m][i] * r1[m];
            }
            double gc = 0.0;
            for (std::size_t m = 0; m < noise.m2(); ++m) {
                gc += noise.g[m][i] * r2[m];
            }
            Complex f = beta * v + Complex{0.0, bc} * v +
                        Complex{0.0, gc} * g_sigma(noise.g_shape, v);
            if (nonlinear) {
                f += Complex{0.0, model.nonlinear_rate(v)} * v;
            }
            w[i] -= dt * f;
        }
        fft.forward(w);
        for (std::size_t i = 0; i < size; ++i) {
            w[i] *= free_step[i];
        }
        fft.backward(w);
        rec.record(n + 1, w);
    }
    return rec.take();
}

namespace {

Trajectory free_flow(const Model& model, const ComplexField& u0, double dt, std::size_t steps) {
    const Grid& grid = model.grid();
    const auto k2 = grid.k_squared();
    const double inv_n = 1.0 / static_cast<double>(grid.size());
    std::vector<Complex> propagator(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        propagator[i] = std::polar(inv_n, -k2[i] * dt);
    }
    detail::TrajectoryRecorder rec(model.grid_ptr(), dt, model.params().r(), steps, 1);
    std::vector<Complex> w = u0.vector();
    rec.record(0, w);
    for (std::size_t n = 0; n < steps; ++n) {
        grid.fft().forward(w);
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] *= propagator[i];
        }
        grid.fft().backward(w);
        rec.record(n + 1, w);
    }
    return rec.take();
}

} // namespace

PicardResult picard_iterate(const Model& model, const ComplexField& u0, const Control& ctrl,
                            double T0, double dt, double tol, std::size_t max_iter) {
    check_initial(model, u0);
    check_control(model, ctrl);
    if (T0 > ctrl.horizon * (1.0 + 1e-9)) {
        throw std::invalid_argument("Picard interval exceeds the control horizon");
    }
    const std::size_t steps = step_count(T0, dt);
    const auto pair = model.pair();

    PicardResult result;
    Trajectory current = free_flow(model, u0, dt, steps);
    const double scale = std::max(1.0, mixed_norm_from_norms(current.norm_h, current.norm_r, dt,
                                                             steps, pair.p));
    // Residuals near round-off carry no contraction information.
    const double floor = 1e-13 * scale;
    for (std::size_t k = 1; k <= max_iter; ++k) {
        Trajectory next = picard_map(model, current, u0, ctrl);
        const double res = mixed_distance(next, current, pair.p, pair.r);
        result.residuals.push_back(res);
        result.iterations = k;
        current = std::move(next);
        if (result.residuals.size() >= 2) {
            const double prev = result.residuals[result.residuals.size() - 2];
            if (prev > floor) {
                const double ratio = res / prev;
                result.max_ratio = std::max(result.max_ratio, ratio);
                if (ratio >= 1.0) {
                    throw NonContractionError(k, ratio);
                }
            }
        }
        if (res <= tol * scale) {
            result.converged = true;
            break;
        }
    }
    result.solution = std::move(current);
    return result;
}

namespace {

/// Smooth random trajectory t -> f1 + cos(omega t + phi) f2 with low-mode
/// Gaussian spectra, drawn from the auxiliary stream at `slot`.
std::vector<std::vector<Complex>> random_smooth_path(const Grid& grid, std::size_t steps,
                                                     double dt, const CounterNormal& gen,
                                                     std::uint64_t slot) {
    const std::size_t size = grid.size();
    const std::size_t n = grid.n_per_dim();
    const int modes = 4;
    auto draw_field = [&](std::uint64_t sub) {
        std::vector<Complex> spec(size, Complex{});
        std::vector<double> z(2 * size);
        gen.fill(Stream::aux, slot * 4 + sub, 0, z);
        for (std::size_t i = 0; i < size; ++i) {
            const auto idx = grid.unflatten(i);
            bool low = true;
            double k2 = 0.0;
            for (int d = 0; d < grid.dim(); ++d) {
                const auto j = static_cast<long>(idx[static_cast<std::size_t>(d)]);
                const long s = j < static_cast<long>(n / 2) ? j : j - static_cast<long>(n);
                low = low && std::abs(s) <= modes;
                k2 += static_cast<double>(s * s);
            }
            if (low) {
                spec[i] = Complex{z[2 * i], z[2 * i + 1]} / (1.0 + k2);
            }
        }
        grid.fft().backward(spec);
        return spec;
    };
    const auto f1 = draw_field(0);
    const auto f2 = draw_field(1);
    std::vector<double> tz(2);
    gen.fill(Stream::aux, slot * 4 + 2, 0, tz);
    const double omega = 2.0 + 3.0 * std::abs(tz[0]);
    const double phi = tz[1];
    std::vector<std::vector<Complex>> path(steps + 1, std::vector<Complex>(size));
    for (std::size_t s = 0; s <= steps; ++s) {
        const double c = std::cos(omega * static_cast<double>(s) * dt + phi);
        for (std::size_t i = 0; i < size; ++i) {
            path[s][i] = f1[i] + c * f2[i];
        }
    }
    return path;
}

Trajectory to_trajectory(const Model& model, const std::vector<std::vector<Complex>>& path,
                         double dt, double scale) {
    const std::size_t steps = path.size() - 1;
    detail::TrajectoryRecorder rec(model.grid_ptr(), dt, model.params().r(), steps, 1);
    std::vector<Complex> buf(model.grid().size());
    for (std::size_t s = 0; s <= steps; ++s) {
        for (std::size_t i = 0; i < buf.size(); ++i) {
            buf[i] = scale * path[s][i];
        }
        rec.record(s, buf);
    }
    return rec.take();
}

double path_mixed_norm(const Model& model, const std::vector<std::vector<Complex>>& path,
                       double dt) {
    const auto pair = model.pair();
    MixedNormAccumulator acc(pair.p, dt);
    const double dx = model.grid().dx();
    for (const auto& f : path) {
        acc.push(norm_l2(f, dx), norm_lr(f, dx, pair.r));
    }
    return acc.value();
}

} // namespace

ContractionProbe probe_contraction(const Model& model, const ComplexField& u0, const Control& ctrl,
                                   double T0, double dt, double radius, std::size_t n_pairs,
                                   std::uint64_t seed) {
    check_initial(model, u0);
    check_control(model, ctrl);
    if (!(radius > 0.0)) {
        throw std::invalid_argument("ball radius must be positive");
    }
    const std::size_t steps = step_count(T0, dt);
    const auto pair = model.pair();
    const CounterNormal gen(SeedSpec{seed, 0});

    ContractionProbe probe;
    probe.T0 = static_cast<double>(steps) * dt;
    probe.radius = radius;
    for (std::size_t k = 0; k < n_pairs; ++k) {
        std::vector<double> a(2);
        gen.fill(Stream::aux, 1'000'000 + k, 1, a);
        // Target norms spread over (0.2 M, 0.95 M).
        const double frac1 = 0.2 + 0.75 * (0.5 + 0.5 * std::tanh(a[0]));
        const double frac2 = 0.2 + 0.75 * (0.5 + 0.5 * std::tanh(a[1]));

        const auto p1 = random_smooth_path(model.grid(), steps, dt, gen, 2 * k);
        auto p2 = random_smooth_path(model.grid(), steps, dt, gen, 2 * k + 1);
        const double n1 = path_mixed_norm(model, p1, dt);
        Trajectory u1 = to_trajectory(model, p1, dt, frac1 * radius / n1);
        Trajectory u2;
        if (k % 2 == 0) {
            u2 = to_trajectory(model, p2, dt, frac2 * radius / path_mixed_norm(model, p2, dt));
        } else {
            // Nearby pair: small perturbation of u1, kept inside the ball.
            const double s1 = frac1 * radius / n1;
            const double s2 = 0.01 * s1 * n1 / path_mixed_norm(model, p2, dt);
            for (std::size_t s = 0; s < p2.size(); ++s) {
                for (std::size_t i = 0; i < p2[s].size(); ++i) {
                    p2[s][i] = s1 * p1[s][i] + s2 * p2[s][i];
                }
            }
            const double n2 = path_mixed_norm(model, p2, dt);
            u2 = to_trajectory(model, p2, dt, n2 > 0.95 * radius ? 0.95 * radius / n2 : 1.0);
        }
        const double denom = mixed_distance(u1, u2, pair.p, pair.r);
        const Trajectory t1 = picard_map(model, u1, u0, ctrl);
        const Trajectory t2 = picard_map(model, u2, u0, ctrl);
        const double ratio = mixed_distance(t1, t2, pair.p, pair.r) / denom;
        probe.ratios.push_back(ratio);
        probe.max_ratio = std::max(probe.max_ratio, ratio);
    }

    // Each residual ratio of the iteration is the ratio of the pair
    // (u^k, u^{k-1}); both lie in the ball while their norms are <= M.
    constexpr std::size_t kIteratePairs = 4;
    Trajectory prev = free_flow(model, u0, dt, steps);
    Trajectory cur = picard_map(model, prev, u0, ctrl);
    const double floor = 1e-13 * std::max(1.0, radius);
    for (std::size_t k = 0; k < kIteratePairs; ++k) {
        const double denom = mixed_distance(cur, prev, pair.p, pair.r);
        if (denom <= floor || mixed_norm(prev, probe.T0, pair.p, pair.r) > radius ||
            mixed_norm(cur, probe.T0, pair.p, pair.r) > radius) {
            break;
        }
        Trajectory next = picard_map(model, cur, u0, ctrl);
        const double ratio = mixed_distance(next, cur, pair.p, pair.r) / denom;
        probe.iterate_ratios.push_back(ratio);
        probe.max_ratio = std::max(probe.max_ratio, ratio);
        prev = std::move(cur);
        cur = std::move(next);
    }
    return probe;
}

ContractionProbe select_T0(const Model& model, const ComplexField& u0, const Control& ctrl,
                           double T_max, double dt, double radius, std::size_t n_pairs,
                           std::uint64_t seed, double target, double safety) {
    double T0 = T_max;
    while (true) {
        const double steps = std::round(T0 / dt);
        if (steps < 2.0) {
            throw std::runtime_error("no T0 >= 2 dt reaches the contraction target");
        }
        ContractionProbe probe =
            probe_contraction(model, u0, ctrl, steps * dt, dt, radius, n_pairs, seed);
        if (probe.max_ratio <= target * safety) {
            return probe;
        }
        T0 = 0.5 * steps * dt;
    }
}

double default_ball_radius(const Model& model, const ComplexField& u0) {
    return 2.0 * (norm_l2(u0) + norm_lr(u0, model.params().r()));
}

double skeleton_energy_bound(const Model& model, const ComplexField& u0, const Control& ctrl) {
    check_control(model, ctrl);
    const auto sup = model.noise().g_sup();
    double integral = 0.0;
    for (std::size_t s = 0; s < ctrl.segments; ++s) {
        const auto r2 = ctrl.rho2_at(s);
        for (std::size_t m = 0; m < ctrl.m2; ++m) {
            integral += sup[m] * std::abs(r2[m]);
        }
    }
    integral *= ctrl.segment_length();
    const double n0 = norm_l2(u0);
    return n0 * n0 * std::exp(2.0 * integral);
}

double conservation_special_case(const Model& model, const ComplexField& u0, const Control& ctrl,
                                 const SolverSettings& settings) {
    if (model.params().beta != 0.0) {
        throw std::invalid_argument("conservation law requires beta = 0");
    }
    if (model.noise().m2() != 0) {
        throw std::invalid_argument("conservation law requires G to be disabled");
    }
    SolverSettings s = settings;
    s.field_stride = 0;
    const Trajectory traj = solve_skeleton(model, u0, ctrl, s);
    const double m0 = traj.norm_h.front() * traj.norm_h.front();
    if (m0 == 0.0) {
        return 0.0;
    }
    double drift = 0.0;
    for (double h : traj.norm_h) {
        drift = std::max(drift, std::abs(h * h - m0) / m0);
    }
    return drift;
}

} // namespace snls
