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

// Shared helpers for the test programs: a tiny hand-rolled generator for
// property tests and naive reference implementations used as oracles.

#include "snls/control.hpp"
#include "snls/field.hpp"
#include "snls/trajectory.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace snls::testing {

/// SplitMix64 stream. Deliberately independent of the library's Philox.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

/// Random smooth-ish field: a few low Fourier modes with random coefficients.
inline ComplexField random_field(const GridPtr& grid, Gen& gen, int modes = 5,
                                 double scale = 1.0) {
    std::vector<Complex> coeff;
    std::vector<int> waves;
    for (int j = -modes; j <= modes; ++j) {
        coeff.emplace_back(gen.normal() * scale / (1.0 + j * j), gen.normal() * scale / (1.0 + j * j));
        waves.push_back(j);
    }
    const double k0 = std::numbers::pi / grid->half_width();
    return sample_field(grid, [&](const std::array<double, 3>& x) {
        Complex v{0.0, 0.0};
        for (std::size_t i = 0; i < waves.size(); ++i) {
            double phase = 0.0;
            for (int d = 0; d < grid->dim(); ++d) {
                phase += k0 * waves[i] * x[static_cast<std::size_t>(d)] * (d + 1);
            }
            v += coeff[i] * std::polar(1.0, phase);
        }
        return v;
    });
}

/// Random piecewise-constant control with entries in [-a, a].
inline Control random_control(Gen& gen, std::size_t m1, std::size_t m2, std::size_t segments,
                              double horizon, double a) {
    Control c = Control::zero(m1, m2, segments, horizon);
    for (auto& v : c.rho1) {
        v = gen.uniform(-a, a);
    }
    for (auto& v : c.rho2) {
        v = gen.uniform(-a, a);
    }
    return c;
}

/// Direct Riemann sum (sum |f|^2 dx)^{1/2}.
inline double naive_l2(const ComplexField& f) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < f.size(); ++i) {
        s += static_cast<long double>(std::norm(f[i]));
    }
    return static_cast<double>(std::sqrt(s * static_cast<long double>(f.grid().dx())));
}

inline double naive_lr(const ComplexField& f, double r) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < f.size(); ++i) {
        s += std::pow(static_cast<long double>(std::abs(f[i])), static_cast<long double>(r));
    }
    return static_cast<double>(
        std::pow(s * static_cast<long double>(f.grid().dx()), 1.0L / static_cast<long double>(r)));
}

/// O(N^2) unitary DFT of a 1-d field, same sign convention as FFTW forward.
inline std::vector<Complex> naive_dft(const ComplexField& f) {
    const std::size_t n = f.size();
    std::vector<Complex> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        Complex s{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            s += f[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j * k % n) /
                                            static_cast<double>(n));
        }
        out[k] = s / std::sqrt(static_cast<double>(n));
    }
    return out;
}

/// Periodic second-order central difference of -d^2/dx^2 in 1-d.
inline ComplexField fd_negative_laplacian(const ComplexField& f) {
    const std::size_t n = f.size();
    const double h = f.grid().spacing();
    ComplexField out(f.grid_ptr());
    for (std::size_t i = 0; i < n; ++i) {
        const Complex left = f[(i + n - 1) % n];
        const Complex right = f[(i + 1) % n];
        out[i] = -(left - 2.0 * f[i] + right) / (h * h);
    }
    return out;
}

/// P(Z >= x) for a standard normal Z.
inline double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Relative L2 distance ||a - b|| / ||b||.
inline double rel_l2(const ComplexField& a, const ComplexField& b) {
    return naive_l2(a - b) / naive_l2(b);
}

} // namespace snls::testing
