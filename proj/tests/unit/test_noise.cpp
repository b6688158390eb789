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

#include "../support/test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace snls {
namespace {

TEST(Philox, KnownAnswerVectors) {
    using A4 = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
              (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Increments, DeterministicAndStreamSeparated) {
    const SeedSpec s{42, 7};
    const auto a = increments(s, 13, 1e-3, 4, 4);
    const auto b = increments(s, 13, 1e-3, 4, 4);
    EXPECT_EQ(a.dW1, b.dW1);
    EXPECT_EQ(a.dW2, b.dW2);
    EXPECT_NE(a.dW1, a.dW2);
    const auto c = increments(SeedSpec{42, 8}, 13, 1e-3, 4, 4);
    EXPECT_NE(a.dW1, c.dW1);
    const auto d = increments(s, 14, 1e-3, 4, 4);
    EXPECT_NE(a.dW1, d.dW1);
    EXPECT_THROW(increments(s, 0, 0.0, 1, 1), std::invalid_argument);
}

TEST(Increments, MeanAndVarianceOverPaths) {
    const double dt = 1e-3;
    const std::size_t n = 100000;
    double sum1 = 0.0;
    double sum2 = 0.0;
    double sq2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto inc = increments(SeedSpec{5, i}, 0, dt, 1, 1);
        sum1 += inc.dW1[0];
        sum2 += inc.dW2[0];
        sq2 += inc.dW2[0] * inc.dW2[0];
    }
    const double nd = static_cast<double>(n);
    EXPECT_LE(std::abs(sum1 / nd), 4.0 * std::sqrt(dt / nd));
    const double mean2 = sum2 / nd;
    const double var2 = (sq2 - nd * mean2 * mean2) / (nd - 1.0);
    EXPECT_NEAR(var2, dt, 0.05 * dt);
}

TEST(BrownianBridge, PairsSumToCoarseIncrement) {
    const BrownianPath coarse = generate_path(SeedSpec{3, 1}, 50, 0.02, 3, 2);
    const BrownianPath fine = brownian_bridge_refine(coarse);
    ASSERT_EQ(fine.steps, 100u);
    EXPECT_DOUBLE_EQ(fine.dt, 0.01);
    for (std::size_t n = 0; n < coarse.steps; ++n) {
        for (std::size_t m = 0; m < 3; ++m) {
            EXPECT_NEAR(fine.w1_at(2 * n)[m] + fine.w1_at(2 * n + 1)[m], coarse.w1_at(n)[m], 1e-15);
        }
        for (std::size_t m = 0; m < 2; ++m) {
            EXPECT_NEAR(fine.w2_at(2 * n)[m] + fine.w2_at(2 * n + 1)[m], coarse.w2_at(n)[m], 1e-15);
        }
    }
}

TEST(BrownianBridge, RefineTwiceThenCoarsenTwice) {
    const BrownianPath p = generate_path(SeedSpec{9, 4}, 32, 0.03125, 2, 2);
    const BrownianPath back = coarsen(coarsen(brownian_bridge_refine(brownian_bridge_refine(p))));
    ASSERT_EQ(back.steps, p.steps);
    for (std::size_t i = 0; i < p.dW1.size(); ++i) {
        EXPECT_NEAR(back.dW1[i], p.dW1[i], 1e-15);
    }
    for (std::size_t i = 0; i < p.dW2.size(); ++i) {
        EXPECT_NEAR(back.dW2[i], p.dW2[i], 1e-15);
    }
    EXPECT_THROW(coarsen(generate_path(SeedSpec{1, 1}, 3, 0.1, 1, 1)), std::invalid_argument);
}

TEST(BrownianBridge, FineVarianceIsHalfStep) {
    const double dt = 0.01;
    double sq = 0.0;
    std::size_t count = 0;
    for (std::uint64_t path = 0; path < 200; ++path) {
        const BrownianPath fine = brownian_bridge_refine(generate_path(SeedSpec{77, path}, 100, dt, 1, 0));
        for (double w : fine.dW1) {
            sq += w * w;
            ++count;
        }
    }
    // 40000 draws: the chi-square relative standard error is about 0.7 %.
    EXPECT_NEAR(sq / static_cast<double>(count), dt / 2.0, 0.04 * dt / 2.0);
}

} // namespace
} // namespace snls
