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
#include "snls/model.hpp"
#include "snls/norms.hpp"

#include "../support/test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace snls {
namespace {

using testing::Gen;

GridPtr line(std::size_t n = 256) { return Grid::make(1, n, 10.0 * std::numbers::pi); }

Model plain(const GridPtr& g, ModelParams p = {}) { return Model(g, p, NoiseModel::none(*g)); }

NoiseConfig constant_noise(std::vector<double> b, std::vector<double> gamp, GShape shape) {
    NoiseConfig nc;
    nc.b_amplitudes = std::move(b);
    nc.b_widths.assign(nc.b_amplitudes.size(), 1.0);
    nc.b_profile = ProfileKind::constant;
    nc.g_amplitudes = std::move(gamp);
    nc.g_widths.assign(nc.g_amplitudes.size(), 1.0);
    nc.g_profile = ProfileKind::constant;
    nc.g_shape = shape;
    return nc;
}

TEST(Admissible, ClosedFormPairs) {
    EXPECT_DOUBLE_EQ(admissible_p(1, 3.0), 12.0);
    EXPECT_DOUBLE_EQ(admissible_p(1, 4.0), 8.0);
    for (int d = 1; d <= 3; ++d) {
        EXPECT_TRUE(std::isinf(admissible_p(d, 2.0)));
    }
    EXPECT_THROW(admissible_p(3, 7.0), std::invalid_argument);
    EXPECT_THROW(admissible_p(1, 1.5), std::invalid_argument);
}

TEST(Admissible, PairsSatisfyScalingRelation) {
    Gen gen(1);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + static_cast<int>(gen.index(3));
        const double rmax = d == 3 ? 6.0 : 12.0;
        const double r = gen.uniform(2.01, rmax);
        const double p = admissible_p(d, r);
        EXPECT_NEAR(2.0 / p, d / 2.0 - d / r, 1e-12);
    }
}

TEST(ModelParams, RejectsOutOfRangeValues) {
    ModelParams p;
    p.alpha = 6.0;
    EXPECT_THROW(p.validate(1), std::invalid_argument);
    p.alpha = 3.0;
    EXPECT_THROW(p.validate(2), std::invalid_argument); // critical in 2d
    p.alpha = 2.5;
    EXPECT_NO_THROW(p.validate(2));
    EXPECT_THROW(p.validate(3), std::invalid_argument); // 1 + 4/3 < 2.5
    p.lambda = 0.5;
    EXPECT_THROW(p.validate(1), std::invalid_argument);
    p.lambda = -1.0;
    p.beta = -0.1;
    EXPECT_THROW(p.validate(1), std::invalid_argument);
}

TEST(ApplyA, ConstantsAreHarmonic) {
    const auto g = line();
    const ComplexField c = sample_field(g, [](const auto&) { return Complex{2.0, -1.0}; });
    EXPECT_LT(norm_l2(plain(g).apply_A(c)), 1e-12);
}

TEST(ApplyA, FourierModeIsEigenfunction) {
    const auto g = line();
    for (int j : {1, 3, -7, 40}) {
        const double k = j * std::numbers::pi / g->half_width();
        const ComplexField f = sample_field(g, [&](const auto& x) { return std::polar(1.0, k * x[0]); });
        const ComplexField af = plain(g).apply_A(f);
        EXPECT_LT(norm_l2(af - (k * k) * f), 1e-10 * std::max(1.0, k * k) * norm_l2(f));
    }
}

TEST(ApplyA, GaussianAgainstClosedForm) {
    const auto g = line();
    const ComplexField f =
        sample_field(g, [](const auto& x) { return Complex{std::exp(-x[0] * x[0] / 4.0), 0.0}; });
    // -f'' = (1/2 - x^2/4) f
    const ComplexField exact = sample_field(g, [](const auto& x) {
        return Complex{(0.5 - x[0] * x[0] / 4.0) * std::exp(-x[0] * x[0] / 4.0), 0.0};
    });
    EXPECT_LE(testing::rel_l2(exact, plain(g).apply_A(f)), 1e-10);
}

TEST(ApplyA, GaussianAgainstFiniteDifferences) {
    // Second-order stencil, so the grid has to be fine for 1e-4.
    const auto g = line(4096);
    const ComplexField f =
        sample_field(g, [](const auto& x) { return Complex{std::exp(-x[0] * x[0] / 4.0), 0.0}; });
    const ComplexField spectral = plain(g).apply_A(f);
    const ComplexField fd = testing::fd_negative_laplacian(f);
    EXPECT_LE(testing::rel_l2(fd, spectral), 1e-4);
}

TEST(Nonlinearity, ZeroAndUnitModulus) {
    const auto g = line(64);
    for (double lambda : {1.0, -1.0}) {
        ModelParams p;
        p.lambda = lambda;
        p.alpha = 2.5;
        const Model m = plain(g, p);
        EXPECT_EQ(norm_l2(m.nonlinearity(ComplexField(g))), 0.0);
        const ComplexField u = sample_field(g, [](const auto& x) { return std::polar(1.0, x[0]); });
        EXPECT_LT(norm_l2(m.nonlinearity(u) - lambda * u), 1e-13);
    }
}

TEST(Nonlinearity, LocalLipschitzBound) {
    Gen gen(17);
    const auto g = line(128);
    for (double alpha : {2.0, 3.0, 4.5}) {
        ModelParams p;
        p.alpha = alpha;
        const Model m = plain(g, p);
        const double r = alpha + 1.0;
        const double rp = r / (r - 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const ComplexField u = testing::random_field(g, gen, 6, gen.uniform(0.1, 3.0));
            const ComplexField v = testing::random_field(g, gen, 6, gen.uniform(0.1, 3.0));
            const double lhs = testing::naive_lr(m.nonlinearity(u) - m.nonlinearity(v), rp);
            const double rhs = alpha *
                               std::pow(testing::naive_lr(u, r) + testing::naive_lr(v, r), alpha - 1.0) *
                               testing::naive_lr(u - v, r);
            EXPECT_LE(lhs, rhs * (1.0 + 1e-12));
        }
    }
}

TEST(Yosida, SymbolAtZeroAndAtMu) {
    const auto g = line();
    const Model m = plain(g);
    const ComplexField c = sample_field(g, [](const auto&) { return Complex{1.5, 0.5}; });
    EXPECT_LT(norm_l2(m.yosida(c, 3.0) - c), 1e-13);
    const double k = 4.0 * std::numbers::pi / g->half_width();
    const ComplexField f = sample_field(g, [&](const auto& x) { return std::polar(1.0, k * x[0]); });
    EXPECT_LT(norm_l2(m.yosida(f, k * k) - 0.5 * f), 1e-12);
    EXPECT_THROW(m.yosida(f, 0.0), std::invalid_argument);
}

TEST(Yosida, ConvergesMonotonicallyOnSmoothField) {
    const auto g = line();
    const Model m = plain(g);
    const ComplexField f = sample_field(g, [](const auto& x) {
        return Complex{std::exp(-x[0] * x[0] / 4.0), 0.0} * std::polar(1.0, 0.5 * x[0]);
    });
    double prev = kInfinity;
    for (double mu : {10.0, 100.0, 1000.0, 10000.0}) {
        const double d = norm_l2(m.yosida(f, mu) - f);
        EXPECT_LT(d, prev);
        prev = d;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(NoiseOperators, ZeroCoefficientsAndIdentityProfile) {
    const auto g = line(64);
    const Model m(g, {}, NoiseModel::build(*g, constant_noise({1.0, 0.5}, {0.7}, GShape::linear)));
    Gen gen(2);
    const ComplexField u = testing::random_field(g, gen);
    const std::vector<double> zero{0.0, 0.0};
    EXPECT_EQ(norm_l2(m.apply_B_full(u, zero)), 0.0);
    const std::vector<double> y{1.7, 0.0};
    EXPECT_LT(norm_l2(m.apply_B_full(u, y) - 1.7 * u), 1e-13);
    EXPECT_LT(norm_l2(m.apply_G(u, 0) - 0.7 * u), 1e-13);
    EXPECT_EQ(norm_l2(m.apply_G(ComplexField(g), 0)), 0.0);
}

TEST(NoiseOperators, BIsSelfAdjoint) {
    const auto g = line(128);
    const Model m(g, {}, NoiseModel::build(*g, NoiseConfig{}));
    Gen gen(31);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexField u = testing::random_field(g, gen);
        const ComplexField v = testing::random_field(g, gen);
        for (std::size_t k = 0; k < m.noise().m1(); ++k) {
            const Complex a = inner(u, m.apply_B(v, k));
            const Complex b = inner(m.apply_B(u, k), v);
            EXPECT_LT(std::abs(a - b), 1e-12);
        }
    }
}

TEST(NoiseOperators, GIsLipschitz) {
    const auto g = line(128);
    Gen gen(12);
    for (GShape shape : {GShape::linear, GShape::saturated}) {
        NoiseConfig nc;
        nc.g_shape = shape;
        const Model m(g, {}, NoiseModel::build(*g, nc));
        for (int trial = 0; trial < 20; ++trial) {
            const ComplexField u = testing::random_field(g, gen, 5, gen.uniform(0.1, 4.0));
            const ComplexField v = testing::random_field(g, gen, 5, gen.uniform(0.1, 4.0));
            double hs = 0.0;
            for (std::size_t k = 0; k < m.noise().m2(); ++k) {
                hs += std::pow(norm_l2(m.apply_G(u, k) - m.apply_G(v, k)), 2);
            }
            EXPECT_LE(std::sqrt(hs), m.noise().g_lipschitz * norm_l2(u - v) * (1.0 + 1e-12));
        }
    }
}

TEST(StratonovichCorrection, SingleConstantMode) {
    const auto g = line(64);
    const Model m(g, {}, NoiseModel::build(*g, constant_noise({0.6}, {}, GShape::linear)));
    Gen gen(6);
    const ComplexField u = testing::random_field(g, gen);
    EXPECT_LT(norm_l2(m.stratonovich_correction(u) - 0.18 * u), 1e-14);
    EXPECT_EQ(norm_l2(m.stratonovich_correction(ComplexField(g))), 0.0);
}

TEST(StratonovichCorrection, MatchesComposedB) {
    const auto g = line(128);
    NoiseConfig nc;
    nc.b_amplitudes = {0.3, 0.2};
    nc.b_widths = {2.0, 5.0};
    const Model m(g, {}, NoiseModel::build(*g, nc));
    Gen gen(7);
    const ComplexField u = testing::random_field(g, gen);
    const ComplexField composed =
        Complex{0.5, 0.0} * (m.apply_B(m.apply_B(u, 0), 0) + m.apply_B(m.apply_B(u, 1), 1));
    EXPECT_LT(norm_l2(m.stratonovich_correction(u) - composed), 1e-12);
}

TEST(NoiseConfig, ValidatesShapes) {
    NoiseConfig nc;
    nc.b_widths.pop_back();
    EXPECT_THROW(nc.validate(), std::invalid_argument);
    NoiseConfig ladder = NoiseConfig::with_modes(2, 3);
    EXPECT_EQ(ladder.m1(), 2u);
    EXPECT_EQ(ladder.m2(), 3u);
    EXPECT_DOUBLE_EQ(ladder.b_amplitudes[1], 0.05);
}

} // namespace
} // namespace snls
