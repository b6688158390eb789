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

#include "snls/error.hpp"
#include "snls/norms.hpp"
#include "snls/trajectory.hpp"

#include <cmath>

namespace snls::detail {

/// Fills a Trajectory step by step: cached norms for every state, fields at
/// the stride and always at the final step.
class TrajectoryRecorder {
public:
    TrajectoryRecorder(const GridPtr& grid, double dt, double r, std::size_t steps,
                       std::size_t field_stride)
        : steps_(steps) {
        traj_.grid = grid;
        traj_.dt = dt;
        traj_.r = r;
        traj_.field_stride = field_stride;
        traj_.times.reserve(steps + 1);
        traj_.norm_h.reserve(steps + 1);
        traj_.norm_r.reserve(steps + 1);
    }

    /// Records state n; throws BlowUpError when it is not finite.
    void record(std::size_t n, std::span<const Complex> u) {
        const double dx = traj_.grid->dx();
        const double h = norm_l2(u, dx);
        if (!std::isfinite(h)) {
            throw BlowUpError(n, h);
        }
        traj_.times.push_back(static_cast<double>(n) * traj_.dt);
        traj_.norm_h.push_back(h);
        traj_.norm_r.push_back(traj_.r == 2.0 ? h : norm_lr(u, dx, traj_.r));
        const std::size_t stride = traj_.field_stride;
        if ((stride > 0 && n % stride == 0) || n == steps_) {
            traj_.field_steps.push_back(n);
            traj_.fields.emplace_back(traj_.grid, std::vector<Complex>(u.begin(), u.end()));
        }
    }

    double last_norm_h() const noexcept { return traj_.norm_h.back(); }
    double last_norm_r() const noexcept { return traj_.norm_r.back(); }

    Trajectory take() { return std::move(traj_); }

private:
    std::size_t steps_;
    Trajectory traj_;
};

} // namespace snls::detail
