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
#include "snls/trajectory.hpp"

#include "snls/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snls {

const ComplexField& Trajectory::field_at(std::size_t step) const {
    const auto it = std::lower_bound(field_steps.begin(), field_steps.end(), step);
    if (it == field_steps.end() || *it != step) {
        throw std::out_of_range("field at step " + std::to_string(step) + " was not stored");
    }
    return fields[static_cast<std::size_t>(it - field_steps.begin())];
}

const ComplexField& Trajectory::final_field() const {
    if (fields.empty()) {
        throw std::out_of_range("trajectory stores no fields");
    }
    return fields.back();
}

MixedNormAccumulator::MixedNormAccumulator(double p, double dt) : p_(p), dt_(dt) {
    if (!(p >= 1.0)) {
        throw std::invalid_argument("time exponent p must be >= 1");
    }
}

void MixedNormAccumulator::push(double norm_h, double norm_r) noexcept {
    if (started_) {
        if (std::isinf(p_)) {
            accumulated_ = std::max(accumulated_, pending_r_);
        } else {
            accumulated_ += std::pow(pending_r_, p_) * dt_;
        }
    }
    started_ = true;
    pending_r_ = norm_r;
    sup_ = std::max(sup_, norm_h);
}

double MixedNormAccumulator::integral_part() const noexcept {
    return std::isinf(p_) ? accumulated_ : std::pow(accumulated_, 1.0 / p_);
}

double MixedNormAccumulator::value() const noexcept { return sup_ + integral_part(); }

double mixed_norm_from_norms(std::span<const double> norm_h, std::span<const double> norm_r,
                             double dt, std::size_t steps, double p) {
    if (steps >= norm_h.size() || norm_h.size() != norm_r.size()) {
        throw std::out_of_range("mixed norm step outside stored range");
    }
    MixedNormAccumulator acc(p, dt);
    for (std::size_t n = 0; n <= steps; ++n) {
        acc.push(norm_h[n], norm_r[n]);
    }
    return acc.value();
}

double mixed_norm(const Trajectory& traj, double t, double p, double r) {
    if (traj.times.empty()) {
        throw std::invalid_argument("empty trajectory");
    }
    const double horizon = traj.horizon();
    const double slack = 1e-12 * std::max(1.0, horizon);
    if (!(t >= -slack) || t > horizon + slack) {
        throw std::out_of_range("mixed norm time outside stored range [0, " +
                                std::to_string(horizon) + "]");
    }
    if (!(p >= 1.0) || !(r >= 2.0)) {
        throw std::invalid_argument("mixed norm needs p >= 1 and r >= 2");
    }

    std::vector<double> lr;
    std::span<const double> norm_r = traj.norm_r;
    if (r != traj.r) {
        if (!traj.has_all_fields()) {
            throw std::invalid_argument("mixed norm with a different r needs stored fields");
        }
        lr.reserve(traj.fields.size());
        for (const auto& f : traj.fields) {
            lr.push_back(norm_lr(f, r));
        }
        norm_r = lr;
    }

    double sup = 0.0;
    double integral = 0.0;
    for (std::size_t n = 0; n < traj.times.size(); ++n) {
        const double tn = traj.times[n];
        if (tn > t + slack) {
            break;
        }
        sup = std::max(sup, traj.norm_h[n]);
        if (n + 1 < traj.times.size()) {
            const double width = std::min(traj.times[n + 1], t) - tn;
            if (width > slack) {
                if (std::isinf(p)) {
                    integral = std::max(integral, norm_r[n]);
                } else {
                    integral += std::pow(norm_r[n], p) * width;
                }
            }
        }
    }
    return sup + (std::isinf(p) ? integral : std::pow(integral, 1.0 / p));
}

double mixed_distance(const Trajectory& a, const Trajectory& b, double p, double r) {
    if (!a.has_all_fields() || !b.has_all_fields()) {
        throw std::invalid_argument("mixed distance needs all fields stored");
    }
    if (a.times.size() != b.times.size()) {
        throw std::invalid_argument("mixed distance: trajectories have different lengths");
    }
    MixedNormAccumulator acc(p, a.dt);
    const double dx = a.grid->dx();
    std::vector<Complex> diff(a.grid->size());
    for (std::size_t n = 0; n < a.fields.size(); ++n) {
        const auto fa = a.fields[n].values();
        const auto fb = b.fields[n].values();
        for (std::size_t i = 0; i < diff.size(); ++i) {
            diff[i] = fa[i] - fb[i];
        }
        acc.push(norm_l2(diff, dx), norm_lr(diff, dx, r));
    }
    return acc.value();
}

} // namespace snls
