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
#include "snls/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snls {

Control Control::zero(std::size_t m1, std::size_t m2, std::size_t segments, double horizon) {
    Control c;
    c.m1 = m1;
    c.m2 = m2;
    c.segments = segments;
    c.horizon = horizon;
    c.rho1.assign(m1 * segments, 0.0);
    c.rho2.assign(m2 * segments, 0.0);
    c.validate();
    return c;
}

std::size_t Control::segment_of_step(std::size_t step, double dt) const noexcept {
    // Midpoint of the step avoids rounding ties at segment boundaries.
    const double t_mid = (static_cast<double>(step) + 0.5) * dt;
    const double s = std::floor(t_mid * static_cast<double>(segments) / horizon);
    if (s < 0.0) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(s), segments - 1);
}

std::vector<double> Control::flatten() const {
    std::vector<double> out;
    out.reserve(dimension());
    out.insert(out.end(), rho1.begin(), rho1.end());
    out.insert(out.end(), rho2.begin(), rho2.end());
    return out;
}

void Control::assign(std::span<const double> flat) {
    if (flat.size() != dimension()) {
        throw std::invalid_argument("control vector has wrong dimension");
    }
    std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(rho1.size()), rho1.begin());
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(rho1.size()), flat.end(), rho2.begin());
}

double Control::energy() const noexcept {
    double s = 0.0;
    for (double v : rho1) {
        s += v * v;
    }
    for (double v : rho2) {
        s += v * v;
    }
    return s * segment_length();
}

Control Control::scaled(double a) const {
    Control c = *this;
    for (auto& v : c.rho1) {
        v *= a;
    }
    for (auto& v : c.rho2) {
        v *= a;
    }
    return c;
}

void Control::validate() const {
    if (segments == 0) {
        throw std::invalid_argument("control needs at least one segment");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("control horizon must be positive");
    }
    if (rho1.size() != m1 * segments || rho2.size() != m2 * segments) {
        throw std::invalid_argument("control coefficient arrays do not match (modes x segments)");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(rho1.begin(), rho1.end(), finite) ||
        !std::all_of(rho2.begin(), rho2.end(), finite)) {
        throw std::invalid_argument("control coefficients must be finite");
    }
}

} // namespace snls
