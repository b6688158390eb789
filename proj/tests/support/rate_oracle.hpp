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

// Exhaustive-search oracle for the minimum action over three-segment
// piecewise-constant controls of a single G mode.

#include "snls/ldp.hpp"

#include <cmath>
#include <limits>

namespace snls::testing {

struct BruteForceRate {
    double cost = std::numeric_limits<double>::infinity();
    double c[3] = {0.0, 0.0, 0.0};
    std::size_t solves = 0;
};

/// Scans a (points)^3 grid on [-half, half]^3 and keeps the cheapest control
/// whose skeleton realizes `event`; then `rounds` local rescans on a 5^3
/// stencil with the step halved each time.
inline BruteForceRate brute_force_rate(const Model& model, const ComplexField& u0,
                                       const EventSpec& event, double dt, double half,
                                       int points, int rounds) {
    BruteForceRate best;
    Control ctrl = Control::zero(0, 1, 3, event.horizon);
    const double seg = ctrl.segment_length();
    auto consider = [&](double a, double b, double c) {
        const double cost = 0.5 * (a * a + b * b + c * c) * seg;
        if (cost >= best.cost) {
            return; // cannot improve, skip the solve
        }
        ctrl.rho2 = {a, b, c};
        ++best.solves;
        if (event.occurred(skeleton_terminal(model, u0, ctrl, dt))) {
            best.cost = cost;
            best.c[0] = a;
            best.c[1] = b;
            best.c[2] = c;
        }
    };
    double step = 2.0 * half / (points - 1);
    for (int i = 0; i < points; ++i) {
        for (int j = 0; j < points; ++j) {
            for (int k = 0; k < points; ++k) {
                consider(-half + i * step, -half + j * step, -half + k * step);
            }
        }
    }
    for (int r = 0; r < rounds && std::isfinite(best.cost); ++r) {
        const double c0[3] = {best.c[0], best.c[1], best.c[2]};
        step *= 0.5;
        for (int i = -2; i <= 2; ++i) {
            for (int j = -2; j <= 2; ++j) {
                for (int k = -2; k <= 2; ++k) {
                    consider(c0[0] + i * step, c0[1] + j * step, c0[2] + k * step);
                }
            }
        }
    }
    return best;
}

} // namespace snls::testing
