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
#include "snls/grid.hpp"
#include "snls/version.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace snls {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace

FftPlans::FftPlans(int dim, std::size_t n_per_dim) {
    int dims[3] = {static_cast<int>(n_per_dim), static_cast<int>(n_per_dim),
                   static_cast<int>(n_per_dim)};
    size_ = 1;
    for (int i = 0; i < dim; ++i) {
        size_ *= n_per_dim;
    }
    auto* scratch = fftw_alloc_complex(size_);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    {
        std::lock_guard lock(planner_mutex());
        forward_ = fftw_plan_dft(dim, dims, scratch, scratch, FFTW_FORWARD, flags);
        backward_ = fftw_plan_dft(dim, dims, scratch, scratch, FFTW_BACKWARD, flags);
    }
    fftw_free(scratch);
    if (forward_ == nullptr || backward_ == nullptr) {
        throw std::runtime_error("FFTW planning failed");
    }
}

FftPlans::~FftPlans() {
    std::lock_guard lock(planner_mutex());
    if (forward_ != nullptr) {
        fftw_destroy_plan(static_cast<fftw_plan>(forward_));
    }
    if (backward_ != nullptr) {
        fftw_destroy_plan(static_cast<fftw_plan>(backward_));
    }
}

void FftPlans::forward(std::span<Complex> data) const {
    if (data.size() != size_) {
        throw std::invalid_argument("FFT buffer size mismatch");
    }
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(forward_), p, p);
}

void FftPlans::backward(std::span<Complex> data) const {
    if (data.size() != size_) {
        throw std::invalid_argument("FFT buffer size mismatch");
    }
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(backward_), p, p);
}

Grid::Grid(int dim, std::size_t n_per_dim, double half_width)
    : dim_(dim), n_(n_per_dim), half_width_(half_width) {
    if (dim < 1 || dim > 3) {
        throw std::invalid_argument("grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
    }
    if (n_per_dim < 8 || !is_power_of_two(n_per_dim)) {
        throw std::invalid_argument("points per dimension must be a power of two >= 8, got " +
                                    std::to_string(n_per_dim));
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw std::invalid_argument("half width L must be positive and finite");
    }
    size_ = 1;
    for (int i = 0; i < dim; ++i) {
        size_ *= n_;
    }
    spacing_ = 2.0 * half_width_ / static_cast<double>(n_);
    dx_ = std::pow(spacing_, dim_);

    k_squared_.resize(size_);
    for (std::size_t flat = 0; flat < size_; ++flat) {
        const auto k = wavevector(flat);
        k_squared_[flat] = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    }
    plans_ = std::make_unique<FftPlans>(dim_, n_);
}

double Grid::wavenumber(std::size_t j) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(n_);
    auto idx = static_cast<std::ptrdiff_t>(j);
    if (idx >= n / 2) {
        idx -= n;
    }
    return std::numbers::pi / half_width_ * static_cast<double>(idx);
}

double Grid::coordinate(std::size_t i) const noexcept {
    return -half_width_ + static_cast<double>(i) * spacing_;
}

std::array<std::size_t, 3> Grid::unflatten(std::size_t flat) const noexcept {
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int axis = dim_ - 1; axis >= 0; --axis) {
        idx[static_cast<std::size_t>(axis)] = flat % n_;
        flat /= n_;
    }
    return idx;
}

std::array<double, 3> Grid::position(std::size_t flat) const noexcept {
    const auto idx = unflatten(flat);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int axis = 0; axis < dim_; ++axis) {
        x[static_cast<std::size_t>(axis)] = coordinate(idx[static_cast<std::size_t>(axis)]);
    }
    return x;
}

std::array<double, 3> Grid::wavevector(std::size_t flat) const noexcept {
    const auto idx = unflatten(flat);
    std::array<double, 3> k{0.0, 0.0, 0.0};
    for (int axis = 0; axis < dim_; ++axis) {
        k[static_cast<std::size_t>(axis)] = wavenumber(idx[static_cast<std::size_t>(axis)]);
    }
    return k;
}

const char* fft_backend_version() noexcept { return fftw_version; }

} // namespace snls
