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

#include "snls/grid.hpp"

#include <functional>
#include <span>
#include <vector>

namespace snls {

namespace detail {

/// Shared storage for fields living on a grid (physical or spectral).
template <class Tag>
class GridValues {
public:
    GridValues() = default;
    explicit GridValues(GridPtr grid);
    GridValues(GridPtr grid, std::vector<Complex> values);

    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const Grid& grid() const noexcept { return *grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const Complex> values() const noexcept { return values_; }
    std::span<Complex> values() noexcept { return values_; }
    const std::vector<Complex>& vector() const noexcept { return values_; }

    Complex operator[](std::size_t i) const noexcept { return values_[i]; }
    Complex& operator[](std::size_t i) noexcept { return values_[i]; }

    bool all_finite() const noexcept;

    GridValues& operator+=(const GridValues& other);
    GridValues& operator-=(const GridValues& other);
    GridValues& operator*=(Complex c) noexcept;

    friend GridValues operator+(GridValues a, const GridValues& b) { return a += b; }
    friend GridValues operator-(GridValues a, const GridValues& b) { return a -= b; }
    friend GridValues operator*(Complex c, GridValues a) { return a *= c; }
    friend GridValues operator*(GridValues a, Complex c) { return a *= c; }

private:
    void check_compatible(const GridValues& other) const;

    GridPtr grid_;
    std::vector<Complex> values_;
};

struct PhysicalTag {};
struct SpectralTag {};

} // namespace detail

/// Complex values at grid points.
using ComplexField = detail::GridValues<detail::PhysicalTag>;
/// Unitary-normalized discrete Fourier coefficients of a ComplexField.
using SpectralField = detail::GridValues<detail::SpectralTag>;

/// Builds a field by evaluating `f` at each grid position.
ComplexField sample_field(const GridPtr& grid,
                          const std::function<Complex(const std::array<double, 3>&)>& f);

SpectralField to_spectrum(const ComplexField& f);
ComplexField from_spectrum(const SpectralField& s);

/// Multiplies the spectrum of `f` by a real symbol given per flat spectral index.
ComplexField apply_spectral_symbol(const ComplexField& f, std::span<const double> symbol);

} // namespace snls
