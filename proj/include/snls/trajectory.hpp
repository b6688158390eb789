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

#include "snls/field.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace snls {

/// Time-indexed solution path on a uniform time grid t_n = n * dt.
///
/// Norms are cached for every step; fields are kept every `field_stride`
/// steps (and always at the final step) when requested by the solver.
struct Trajectory {
    GridPtr grid;
    double dt = 0.0;
    double r = 2.0;                 ///< exponent of the cached L^r norms
    std::vector<double> times;      ///< t_0 .. t_N
    std::vector<double> norm_h;     ///< ||u(t_n)||_2
    std::vector<double> norm_r;     ///< ||u(t_n)||_{L^r}
    std::size_t field_stride = 0;   ///< 0: no fields stored
    std::vector<std::size_t> field_steps;
    std::vector<ComplexField> fields;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> path_index;

    std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
    double horizon() const noexcept { return times.empty() ? 0.0 : times.back(); }
    bool has_all_fields() const noexcept { return field_stride == 1 && fields.size() == times.size(); }

    /// Stored field at step n; throws if that step was not kept.
    const ComplexField& field_at(std::size_t step) const;
    const ComplexField& final_field() const;
};

/// Running value of ||u||_{L^inf(0,t;H)} + ||u||_{L^p(0,t;L^r)} with
/// left-endpoint rectangles: the value after pushing states 0..n uses
/// sum_{j<n} ||u_j||_{L^r}^p dt for the integral part.
class MixedNormAccumulator {
public:
    MixedNormAccumulator(double p, double dt);

    void push(double norm_h, double norm_r) noexcept;
    double value() const noexcept;
    double sup_part() const noexcept { return sup_; }
    double integral_part() const noexcept;

private:
    double p_;
    double dt_;
    double sup_ = 0.0;
    double accumulated_ = 0.0; // sum lr^p dt, or running max for p = inf
    double pending_r_ = 0.0;
    bool started_ = false;
};

/// Mixed norm of a stored trajectory on [0, t]. Uses the cached norms when
/// r matches the trajectory, otherwise recomputes from stored fields.
double mixed_norm(const Trajectory& traj, double t, double p, double r);

/// Mixed norm over [0, t_steps] from per-step norm sequences.
double mixed_norm_from_norms(std::span<const double> norm_h, std::span<const double> norm_r,
                             double dt, std::size_t steps, double p);

/// ||a - b||_{mixed}(T) between two trajectories with all fields stored.
double mixed_distance(const Trajectory& a, const Trajectory& b, double p, double r);

} // namespace snls
