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

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace snls {

using Complex = std::complex<double>;

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Unnormalized in-place FFTW transforms for one grid shape. Plans are built
/// once at construction; execution is safe from several threads on distinct
/// buffers.
class FftPlans {
public:
    FftPlans(int dim, std::size_t n_per_dim);
    ~FftPlans();
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

    void forward(std::span<Complex> data) const;
    void backward(std::span<Complex> data) const;

private:
    void* forward_ = nullptr;
    void* backward_ = nullptr;
    std::size_t size_ = 0;
};

/// Periodic grid on the torus [-L, L)^d, row-major flattening.
///
/// Wavenumbers follow the standard discrete spectrum for period 2L:
/// k_j = (pi / L) * j for j = 0, ..., n/2 - 1, -n/2, ..., -1 in each dimension.
class Grid {
public:
    Grid(int dim, std::size_t n_per_dim, double half_width);

    static GridPtr make(int dim, std::size_t n_per_dim, double half_width) {
        return std::make_shared<const Grid>(dim, n_per_dim, half_width);
    }

    int dim() const noexcept { return dim_; }
    std::size_t n_per_dim() const noexcept { return n_; }
    std::size_t size() const noexcept { return size_; }
    double half_width() const noexcept { return half_width_; }
    /// Spacing along one axis.
    double spacing() const noexcept { return spacing_; }
    /// Cell volume spacing^d.
    double dx() const noexcept { return dx_; }

    /// 1-D wavenumber of spectral index j in [0, n).
    double wavenumber(std::size_t j) const noexcept;
    /// 1-D coordinate of index i in [0, n): -L + i * spacing.
    double coordinate(std::size_t i) const noexcept;

    std::array<std::size_t, 3> unflatten(std::size_t flat) const noexcept;
    std::array<double, 3> position(std::size_t flat) const noexcept;
    std::array<double, 3> wavevector(std::size_t flat) const noexcept;

    /// |k|^2 per flattened spectral index.
    std::span<const double> k_squared() const noexcept { return k_squared_; }

    const FftPlans& fft() const noexcept { return *plans_; }

private:
    int dim_;
    std::size_t n_;
    std::size_t size_;
    double half_width_;
    double spacing_;
    double dx_;
    std::vector<double> k_squared_;
    std::unique_ptr<FftPlans> plans_;
};

} // namespace snls
