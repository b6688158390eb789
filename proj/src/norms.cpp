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
#include "snls/norms.hpp"

#include <cmath>
#include <stdexcept>

namespace snls {

double norm_l2(std::span<const Complex> values, double dx) {
    double sum = 0.0;
    for (const auto& v : values) {
        sum += std::norm(v);
    }
    return std::sqrt(sum * dx);
}

double norm_l2(const ComplexField& f) { return norm_l2(f.values(), f.grid().dx()); }

double norm_lr(std::span<const Complex> values, double dx, double r) {
    if (std::isnan(r) || r < 2.0) {
        throw std::invalid_argument("L^r norm requires r >= 2");
    }
    if (std::isinf(r)) {
        double m = 0.0;
        for (const auto& v : values) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }
    if (r == 2.0) {
        return norm_l2(values, dx);
    }
    double sum = 0.0;
    if (r == 4.0) {
        for (const auto& v : values) {
            const double a2 = std::norm(v);
            sum += a2 * a2;
        }
    } else {
        const double half_r = 0.5 * r;
        for (const auto& v : values) {
            sum += std::pow(std::norm(v), half_r);
        }
    }
    return std::pow(sum * dx, 1.0 / r);
}

double norm_lr(const ComplexField& f, double r) { return norm_lr(f.values(), f.grid().dx(), r); }

Complex inner(std::span<const Complex> u, std::span<const Complex> v, double dx) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("inner product size mismatch");
    }
    Complex sum{0.0, 0.0};
    for (std::size_t i = 0; i < u.size(); ++i) {
        sum += std::conj(u[i]) * v[i];
    }
    return sum * dx;
}

Complex inner(const ComplexField& u, const ComplexField& v) {
    return inner(u.values(), v.values(), u.grid().dx());
}

double distance_l2(std::span<const Complex> u, std::span<const Complex> v, double dx) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("distance size mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        sum += std::norm(u[i] - v[i]);
    }
    return std::sqrt(sum * dx);
}

} // namespace snls
