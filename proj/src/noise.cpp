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
#include "snls/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace snls {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

// 53-bit uniform in (0, 1).
inline double to_unit_open(std::uint32_t a, std::uint32_t b) noexcept {
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(a) << 21) ^ (static_cast<std::uint64_t>(b) >> 11);
    return (static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) + 0.5) * 0x1.0p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

CounterNormal::CounterNormal(SeedSpec seed) noexcept
    : key_{static_cast<std::uint32_t>(seed.master_seed),
           static_cast<std::uint32_t>(seed.master_seed >> 32)},
      path_lo_(static_cast<std::uint32_t>(seed.path_index)),
      path_hi_(static_cast<std::uint32_t>(seed.path_index >> 32)) {}

void CounterNormal::fill(Stream stream, std::uint64_t step, std::uint32_t level,
                         std::span<double> out) const noexcept {
    // Counter layout: (step lo, step hi ^ path hi << 16, path lo, stream | level | block).
    const auto step_lo = static_cast<std::uint32_t>(step);
    const auto step_hi = static_cast<std::uint32_t>(step >> 32);
    for (std::size_t block = 0; 2 * block < out.size(); ++block) {
        const std::uint32_t tag = (static_cast<std::uint32_t>(stream) << 28) |
                                  ((level & 0xFFu) << 20) |
                                  static_cast<std::uint32_t>(block & 0xFFFFFu);
        const auto bits = philox4x32({step_lo, step_hi ^ (path_hi_ << 16), path_lo_, tag}, key_);
        const double u1 = to_unit_open(bits[0], bits[1]);
        const double u2 = to_unit_open(bits[2], bits[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[2 * block] = radius * std::cos(angle);
        if (2 * block + 1 < out.size()) {
            out[2 * block + 1] = radius * std::sin(angle);
        }
    }
}

void fill_increments(const CounterNormal& gen, std::uint64_t step, double dt,
                     std::span<double> dW1, std::span<double> dW2) noexcept {
    const double scale = std::sqrt(dt);
    gen.fill(Stream::w1, step, 0, dW1);
    gen.fill(Stream::w2, step, 0, dW2);
    for (auto& v : dW1) {
        v *= scale;
    }
    for (auto& v : dW2) {
        v *= scale;
    }
}

NoiseIncrement increments(const SeedSpec& seed, std::uint64_t step, double dt, std::size_t m1,
                          std::size_t m2) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("increment dt must be positive");
    }
    NoiseIncrement inc;
    inc.dt = dt;
    inc.dW1.resize(m1);
    inc.dW2.resize(m2);
    fill_increments(CounterNormal(seed), step, dt, inc.dW1, inc.dW2);
    return inc;
}

BrownianPath generate_path(const SeedSpec& seed, std::size_t steps, double dt, std::size_t m1,
                           std::size_t m2) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("path dt must be positive");
    }
    BrownianPath path;
    path.seed = seed;
    path.dt = dt;
    path.steps = steps;
    path.m1 = m1;
    path.m2 = m2;
    path.dW1.resize(steps * m1);
    path.dW2.resize(steps * m2);
    const CounterNormal gen(seed);
    for (std::size_t n = 0; n < steps; ++n) {
        fill_increments(gen, n, dt, {path.dW1.data() + n * m1, m1},
                        {path.dW2.data() + n * m2, m2});
    }
    return path;
}

BrownianPath brownian_bridge_refine(const BrownianPath& coarse) {
    BrownianPath fine;
    fine.seed = coarse.seed;
    fine.dt = 0.5 * coarse.dt;
    fine.steps = 2 * coarse.steps;
    fine.m1 = coarse.m1;
    fine.m2 = coarse.m2;
    fine.level = coarse.level + 1;
    fine.dW1.resize(fine.steps * fine.m1);
    fine.dW2.resize(fine.steps * fine.m2);

    const CounterNormal gen(coarse.seed);
    const double spread = std::sqrt(0.25 * coarse.dt);
    std::vector<double> z(coarse.m1 + coarse.m2);
    auto split = [&](const std::vector<double>& src, std::vector<double>& dst, std::size_t m,
                     std::size_t n, const double* zs) {
        for (std::size_t k = 0; k < m; ++k) {
            const double total = src[n * m + k];
            const double first = 0.5 * total + spread * zs[k];
            dst[(2 * n) * m + k] = first;
            dst[(2 * n + 1) * m + k] = total - first;
        }
    };
    for (std::size_t n = 0; n < coarse.steps; ++n) {
        gen.fill(Stream::bridge, n, fine.level, z);
        split(coarse.dW1, fine.dW1, coarse.m1, n, z.data());
        split(coarse.dW2, fine.dW2, coarse.m2, n, z.data() + coarse.m1);
    }
    return fine;
}

BrownianPath coarsen(const BrownianPath& fine) {
    if (fine.steps % 2 != 0) {
        throw std::invalid_argument("coarsening needs an even number of steps");
    }
    BrownianPath coarse;
    coarse.seed = fine.seed;
    coarse.dt = 2.0 * fine.dt;
    coarse.steps = fine.steps / 2;
    coarse.m1 = fine.m1;
    coarse.m2 = fine.m2;
    coarse.level = fine.level > 0 ? fine.level - 1 : 0;
    coarse.dW1.resize(coarse.steps * coarse.m1);
    coarse.dW2.resize(coarse.steps * coarse.m2);
    for (std::size_t n = 0; n < coarse.steps; ++n) {
        for (std::size_t k = 0; k < coarse.m1; ++k) {
            coarse.dW1[n * coarse.m1 + k] =
                fine.dW1[(2 * n) * fine.m1 + k] + fine.dW1[(2 * n + 1) * fine.m1 + k];
        }
        for (std::size_t k = 0; k < coarse.m2; ++k) {
            coarse.dW2[n * coarse.m2 + k] =
                fine.dW2[(2 * n) * fine.m2 + k] + fine.dW2[(2 * n + 1) * fine.m2 + k];
        }
    }
    return coarse;
}

} // namespace snls
