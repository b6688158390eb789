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
#include <cstdint>
#include <span>
#include <vector>

namespace snls {

/// Philox4x32 with 10 rounds: a keyed bijection on 128-bit counters.
/// Output is a pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

enum class Stream : std::uint32_t { w1 = 1, w2 = 2, bridge = 3, aux = 4 };

/// Identifies one independent noise realization.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

/// Standard normals addressed by (seed, path, stream, step, level, slot). Two
/// normals are produced per Philox block through Box-Muller.
class CounterNormal {
public:
    explicit CounterNormal(SeedSpec seed) noexcept;

    /// Fills `out` with i.i.d. N(0,1) draws for (stream, step, level).
    void fill(Stream stream, std::uint64_t step, std::uint32_t level,
              std::span<double> out) const noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
};

/// Truncated cylindrical Wiener increments for one time step.
struct NoiseIncrement {
    std::vector<double> dW1;
    std::vector<double> dW2;
    double dt = 0.0;
};

/// Increments for (seed, step); each entry ~ N(0, dt), W1 and W2 drawn from
/// distinct streams. Throws std::invalid_argument for dt <= 0.
NoiseIncrement increments(const SeedSpec& seed, std::uint64_t step, double dt,
                          std::size_t m1, std::size_t m2);

/// In-place variant used by the solvers (no allocation).
void fill_increments(const CounterNormal& gen, std::uint64_t step, double dt,
                     std::span<double> dW1, std::span<double> dW2) noexcept;

/// A stored Brownian path: per-step increments for both Wiener processes,
/// row-major (step, mode).
struct BrownianPath {
    SeedSpec seed;
    double dt = 0.0;
    std::size_t steps = 0;
    std::size_t m1 = 0;
    std::size_t m2 = 0;
    std::uint32_t level = 0; ///< number of bridge refinements applied
    std::vector<double> dW1;
    std::vector<double> dW2;

    std::span<const double> w1_at(std::size_t step) const noexcept {
        return {dW1.data() + step * m1, m1};
    }
    std::span<const double> w2_at(std::size_t step) const noexcept {
        return {dW2.data() + step * m2, m2};
    }
};

BrownianPath generate_path(const SeedSpec& seed, std::size_t steps, double dt,
                           std::size_t m1, std::size_t m2);

/// Halves dt with a Brownian bridge: each coarse increment dW splits into
/// (dW/2 + sqrt(dt/4) Z, dW/2 - sqrt(dt/4) Z), so fine pairs sum to the coarse
/// increment. Z is keyed by (seed, path, level, coarse step).
BrownianPath brownian_bridge_refine(const BrownianPath& coarse);

/// Sums adjacent increment pairs (inverse of refinement). Requires an even
/// step count.
BrownianPath coarsen(const BrownianPath& fine);

} // namespace snls
