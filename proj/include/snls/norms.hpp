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

#include <limits>
#include <span>

namespace snls {

/// (sum |f_j|^2 dx)^{1/2}
double norm_l2(const ComplexField& f);
double norm_l2(std::span<const Complex> values, double dx);

/// (sum |f_j|^r dx)^{1/r} for 2 <= r < inf; r = inf gives max |f_j|.
/// Throws std::invalid_argument for r < 2 or NaN.
double norm_lr(const ComplexField& f, double r);
double norm_lr(std::span<const Complex> values, double dx, double r);

/// Discrete L2 inner product sum conj(u_j) v_j dx.
Complex inner(const ComplexField& u, const ComplexField& v);
Complex inner(std::span<const Complex> u, std::span<const Complex> v, double dx);

/// ||u - v||_2 without materializing the difference.
double distance_l2(std::span<const Complex> u, std::span<const Complex> v, double dx);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

} // namespace snls
