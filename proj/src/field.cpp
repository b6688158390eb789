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
#include "snls/field.hpp"

#include <cmath>
#include <stdexcept>

namespace snls {
namespace detail {

template <class Tag>
GridValues<Tag>::GridValues(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) {
        throw std::invalid_argument("field requires a grid");
    }
    values_.assign(grid_->size(), Complex{0.0, 0.0});
}

template <class Tag>
GridValues<Tag>::GridValues(GridPtr grid, std::vector<Complex> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) {
        throw std::invalid_argument("field requires a grid");
    }
    if (values_.size() != grid_->size()) {
        throw std::invalid_argument("field size " + std::to_string(values_.size()) +
                                    " does not match grid size " +
                                    std::to_string(grid_->size()));
    }
    if (!all_finite()) {
        throw std::invalid_argument("field contains non-finite values");
    }
}

template <class Tag>
bool GridValues<Tag>::all_finite() const noexcept {
    for (const auto& v : values_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            return false;
        }
    }
    return true;
}

template <class Tag>
void GridValues<Tag>::check_compatible(const GridValues& other) const {
    if (values_.size() != other.values_.size()) {
        throw std::invalid_argument("field size mismatch");
    }
}

template <class Tag>
GridValues<Tag>& GridValues<Tag>::operator+=(const GridValues& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] += other.values_[i];
    }
    return *this;
}

template <class Tag>
GridValues<Tag>& GridValues<Tag>::operator-=(const GridValues& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] -= other.values_[i];
    }
    return *this;
}

template <class Tag>
GridValues<Tag>& GridValues<Tag>::operator*=(Complex c) noexcept {
    for (auto& v : values_) {
        v *= c;
    }
    return *this;
}

template class GridValues<PhysicalTag>;
template class GridValues<SpectralTag>;

} // namespace detail

ComplexField sample_field(const GridPtr& grid,
                          const std::function<Complex(const std::array<double, 3>&)>& f) {
    std::vector<Complex> values(grid->size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = f(grid->position(i));
    }
    return ComplexField(grid, std::move(values));
}

SpectralField to_spectrum(const ComplexField& f) {
    std::vector<Complex> values(f.values().begin(), f.values().end());
    f.grid().fft().forward(values);
    const double scale = 1.0 / std::sqrt(static_cast<double>(values.size()));
    for (auto& v : values) {
        v *= scale;
    }
    return SpectralField(f.grid_ptr(), std::move(values));
}

ComplexField from_spectrum(const SpectralField& s) {
    std::vector<Complex> values(s.values().begin(), s.values().end());
    s.grid().fft().backward(values);
    const double scale = 1.0 / std::sqrt(static_cast<double>(values.size()));
    for (auto& v : values) {
        v *= scale;
    }
    return ComplexField(s.grid_ptr(), std::move(values));
}

ComplexField apply_spectral_symbol(const ComplexField& f, std::span<const double> symbol) {
    if (symbol.size() != f.size()) {
        throw std::invalid_argument("spectral symbol size mismatch");
    }
    std::vector<Complex> values(f.values().begin(), f.values().end());
    f.grid().fft().forward(values);
    const double inv_n = 1.0 / static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] *= symbol[i] * inv_n;
    }
    f.grid().fft().backward(values);
    return ComplexField(f.grid_ptr(), std::move(values));
}

} // namespace snls
