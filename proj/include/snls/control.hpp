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

#include <cstddef>
#include <span>
#include <vector>

namespace snls {

/// Piecewise-constant control rho = (rho1, rho2) on `segments` equal pieces of
/// [0, horizon], injected into the solvers by zero-order hold.
///
/// Storage is (segment, mode) row-major so one segment's coefficients are
/// contiguous.
struct Control {
    std::size_t m1 = 0;
    std::size_t m2 = 0;
    std::size_t segments = 1;
    double horizon = 1.0;
    std::vector<double> rho1;
    std::vector<double> rho2;

    static Control zero(std::size_t m1, std::size_t m2, std::size_t segments, double horizon);

    double segment_length() const noexcept { return horizon / static_cast<double>(segments); }
    /// Segment active during solver step n, i.e. on [n dt, (n+1) dt).
    std::size_t segment_of_step(std::size_t step, double dt) const noexcept;

    std::span<const double> rho1_at(std::size_t segment) const noexcept {
        return {rho1.data() + segment * m1, m1};
    }
    std::span<const double> rho2_at(std::size_t segment) const noexcept {
        return {rho2.data() + segment * m2, m2};
    }
    double& rho1_ref(std::size_t segment, std::size_t mode) { return rho1[segment * m1 + mode]; }
    double& rho2_ref(std::size_t segment, std::size_t mode) { return rho2[segment * m2 + mode]; }

    /// Flattened coefficient vector [rho1..., rho2...] and its inverse.
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);
    std::size_t dimension() const noexcept { return rho1.size() + rho2.size(); }

    /// int_0^T (||rho1||^2 + ||rho2||^2) dt
    double energy() const noexcept;

    Control scaled(double a) const;
    /// Throws std::invalid_argument on shape mismatch or non-finite entries.
    void validate() const;

    bool operator==(const Control&) const = default;
};

} // namespace snls
