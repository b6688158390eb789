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
#include "snls/ldp.hpp"
#include "snls/mc.hpp"
#include "snls/norms.hpp"

#include "../support/rate_oracle.hpp"
#include "../support/test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace snls {
namespace {

using testing::Gen;

constexpr double kL = 10.0 * std::numbers::pi;

/// Unit-mass single Fourier mode on an 8-point grid.
struct SingleMode {
    GridPtr grid = Grid::make(1, 8, kL);
    ComplexField u0 = sample_field(grid, [](const auto& x) {
        return std::polar(1.0 / std::sqrt(2.0 * kL), std::numbers::pi * x[0] / kL);
    });

    Model model(std::vector<double> b, std::vector<double> g) const {
        ModelParams p;
        p.nonlinear = false;
        NoiseConfig nc;
        nc.b_amplitudes = std::move(b);
        nc.b_widths.assign(nc.b_amplitudes.size(), 1.0);
        nc.b_profile = ProfileKind::constant;
        nc.g_amplitudes = std::move(g);
        nc.g_widths.assign(nc.g_amplitudes.size(), 1.0);
        nc.g_profile = ProfileKind::constant;
        nc.g_shape = GShape::linear;
        return Model(grid, p, NoiseModel::build(*grid, nc));
    }
};

TEST(ControlCost, ClosedForms) {
    EXPECT_EQ(control_cost(Control::zero(3, 2, 5, 2.0)), 0.0);
    Control c = Control::zero(1, 0, 1, 2.5);
    c.rho1[0] = 0.8;
    EXPECT_DOUBLE_EQ(control_cost(c), 0.5 * 0.64 * 2.5);
}

TEST(ControlCost, MatchesNaiveSumAndStepIntegral) {
    Gen gen(19);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t segments = 1 + gen.index(20);
        const Control c = testing::random_control(gen, gen.index(4), gen.index(4), segments,
                                                  gen.uniform(0.1, 3.0), 2.0);
        long double s = 0.0L;
        for (double v : c.rho1) {
            s += static_cast<long double>(v) * v;
        }
        for (double v : c.rho2) {
            s += static_cast<long double>(v) * v;
        }
        const double naive = 0.5 * static_cast<double>(s) * c.segment_length();
        EXPECT_NEAR(control_cost(c), naive, 1e-12 * std::max(1.0, naive));

        // Step-wise integral at a dt that resolves every segment exactly.
        const std::size_t sub = 4;
        const double dt = c.segment_length() / sub;
        double integral = 0.0;
        for (std::size_t n = 0; n < segments * sub; ++n) {
            const std::size_t seg = c.segment_of_step(n, dt);
            for (double v : c.rho1_at(seg)) {
                integral += v * v * dt;
            }
            for (double v : c.rho2_at(seg)) {
                integral += v * v * dt;
            }
        }
        EXPECT_EQ(in_D_N(c, integral * (1.0 + 1e-9)), true);
        EXPECT_EQ(in_D_N(c, integral * (1.0 - 1e-9)), integral == 0.0);
    }
}

TEST(InDN, ZeroControlAndClosedBoundary) {
    EXPECT_TRUE(in_D_N(Control::zero(2, 2, 3, 1.0), 0.0));
    Control c = Control::zero(1, 1, 2, 1.0);
    c.rho1 = {0.5, -0.25};
    c.rho2 = {1.0, 0.125};
    EXPECT_TRUE(in_D_N(c, 2.0 * control_cost(c)));
    EXPECT_FALSE(in_D_N(c, 2.0 * control_cost(c) * (1.0 - 1e-12)));
}

TEST(Events, ResidualsAndValidation) {
    SingleMode s;
    EventSpec e;
    e.field = s.u0;
    e.radius = 0.5;
    EXPECT_DOUBLE_EQ(e.residual(s.u0), 0.5);
    EXPECT_EQ(e.residual(Complex{-1.0, 0.0} * s.u0), 0.0); // distance 2
    e.kind = EventKind::terminal_target;
    e.tolerance = 0.1;
    EXPECT_EQ(e.residual(s.u0), 0.0);
    e.kind = EventKind::functional_threshold;
    e.level = 2.0;
    EXPECT_NEAR(e.residual(s.u0), 1.0, 1e-14);
    EventSpec bad;
    bad.field = s.u0;
    bad.radius = -1.0;
    EXPECT_THROW(bad.validate(*s.grid), std::invalid_argument);
    EXPECT_EQ(parse_event_kind(to_string(EventKind::functional_threshold)),
              EventKind::functional_threshold);
    EXPECT_THROW(parse_observable("phase"), std::invalid_argument);
}

TEST(MinimizeAction, SatisfiedEventHasZeroRate) {
    SingleMode s;
    const Model m = s.model({}, {1.0});
    EventSpec e;
    e.field = s.u0;
    e.radius = 0.0;
    RateOptions o;
    o.dt = 0.01;
    const RateResult r = minimize_action(m, s.u0, e, o);
    EXPECT_EQ(r.cost, 0.0);
    EXPECT_TRUE(r.feasible);
    for (double v : r.control.rho2) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(MinimizeAction, BOnlyControlCannotMovePhaseInvariantObservable) {
    SingleMode s;
    const Model m = s.model({1.0}, {});
    EventSpec e;
    e.kind = EventKind::functional_threshold;
    e.observable = Observable::terminal_l2_norm;
    e.level = 1.5; // the mass is 1 and B controls only rotate phases
    RateOptions o;
    o.dt = 0.02;
    o.segments = 4;
    o.rounds = 2;
    o.max_iterations = 30;
    const RateResult r = minimize_action(m, s.u0, e, o);
    EXPECT_FALSE(r.feasible);
    EXPECT_GT(r.residual, 0.4);
}

TEST(MinimizeAction, LinearReductionMatchesBruteForceOracle) {
    SingleMode s;
    const double gamma = 2.25;
    const double rate = 0.12;
    const Model m = s.model({}, {gamma});
    const double dt = 0.01;
    EventSpec e;
    e.field = skeleton_terminal(m, s.u0, Control::zero(0, 1, 1, 1.0), dt);
    e.radius = 2.0 * std::sin(0.5 * gamma * std::sqrt(2.0 * rate));
    RateOptions o;
    o.dt = dt;
    o.segments = 6;
    const RateResult r = minimize_action(m, s.u0, e, o);
    ASSERT_TRUE(r.feasible);
    EXPECT_NEAR(r.cost, rate, 0.02 * rate);
    const auto oracle = testing::brute_force_rate(m, s.u0, e, dt, 0.8, 9, 4);
    ASSERT_TRUE(std::isfinite(oracle.cost));
    EXPECT_NEAR(r.cost, oracle.cost, 0.05 * oracle.cost);
    // Realized by the returned control, not just claimed.
    EXPECT_TRUE(e.occurred(skeleton_terminal(m, s.u0, r.control, dt)));
}

TEST(MinimizeAction, RelabelingIdenticalModesKeepsCostAndEvent) {
    SingleMode s;
    const Model m = s.model({}, {1.5, 1.5});
    const double dt = 0.02;
    EventSpec e;
    e.field = skeleton_terminal(m, s.u0, Control::zero(0, 2, 1, 1.0), dt);
    e.radius = 0.6;
    RateOptions o;
    o.dt = dt;
    o.segments = 4;
    const RateResult r = minimize_action(m, s.u0, e, o);
    ASSERT_TRUE(r.feasible);
    Control swapped = r.control;
    for (std::size_t seg = 0; seg < swapped.segments; ++seg) {
        std::swap(swapped.rho2_ref(seg, 0), swapped.rho2_ref(seg, 1));
    }
    EXPECT_DOUBLE_EQ(control_cost(swapped), r.cost);
    const auto a = skeleton_terminal(m, s.u0, r.control, dt);
    const auto b = skeleton_terminal(m, s.u0, swapped, dt);
    EXPECT_LT(testing::naive_l2(a - b), 1e-12);
    // Re-solving from the relabeled problem lands on the same rate.
    const Model m2 = s.model({}, {1.5, 1.5});
    EXPECT_NEAR(minimize_action(m2, s.u0, e, o).cost, r.cost, 1e-9);
}

TEST(Wilson, MatchesClosedForm) {
    const double z = kWilsonZ95;
    for (auto [hits, n] : {std::pair<std::size_t, std::size_t>{0, 10}, {3, 10}, {50, 100}, {99, 100},
                           {100, 100}, {17, 100000}}) {
        const double p = static_cast<double>(hits) / static_cast<double>(n);
        const double nn = static_cast<double>(n);
        const double centre = (p + z * z / (2 * nn)) / (1 + z * z / nn);
        const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / (1 + z * z / nn);
        const WilsonInterval w = wilson_interval(hits, n);
        EXPECT_NEAR(w.lo, std::max(0.0, std::min(p, centre - half)), 1e-12);
        EXPECT_NEAR(w.hi, std::min(1.0, std::max(p, centre + half)), 1e-12);
        EXPECT_LE(w.lo, p);
        EXPECT_GE(w.hi, p);
    }
}

struct McFixture : ::testing::Test {
    SingleMode s;
    Model m = s.model({1.0}, {});
    McProblem problem() const {
        McProblem p;
        p.model = &m;
        p.u0 = s.u0;
        p.control = Control::zero(1, 0, 1, 1.0);
        p.event.field = s.u0;
        p.settings.dt = 0.01;
        p.settings.field_stride = 0;
        return p;
    }
};

TEST_F(McFixture, WholeSpaceAndEmptyEvents) {
    McProblem p = problem();
    p.event.radius = 0.0;
    const SweepRow all = estimate_probability(p, 0.1, 200, 1);
    EXPECT_EQ(all.p_hat, 1.0);
    EXPECT_EQ(all.ci_hi, 1.0);
    EXPECT_GT(all.ci_lo, 0.97);
    ASSERT_TRUE(all.eps_log_p.has_value());
    EXPECT_EQ(*all.eps_log_p, 0.0);

    p.event.kind = EventKind::functional_threshold;
    p.event.level = 1e9;
    const SweepRow none = estimate_probability(p, 0.1, 200, 1);
    EXPECT_EQ(none.p_hat, 0.0);
    EXPECT_TRUE(none.censored());
    EXPECT_EQ(none.ci_lo, 0.0);
}

TEST_F(McFixture, PhaseNoiseMatchesGaussianTail) {
    // Constant B noise turns u(T) into exp(-i sqrt(eps) W_T) ubar(T) exactly,
    // so the ball exit is a union of intervals for a Gaussian W_T.
    McProblem p = problem();
    const double eps = 0.1;
    const double theta = 0.5;
    const Control zero = Control::zero(1, 0, 1, 1.0);
    p.event.field = skeleton_terminal(m, s.u0, zero, 0.01);
    p.event.radius = 2.0 * std::sin(theta / 2.0);
    const std::size_t n = 4000;
    const SweepRow row = estimate_probability(p, eps, n, 12);
    const double sd = std::sqrt(eps);
    double expect = 0.0;
    for (int k = -5; k <= 4; ++k) {
        const double a = (theta + 2.0 * std::numbers::pi * k) / sd;
        const double b = (2.0 * std::numbers::pi * (k + 1) - theta) / sd;
        expect += testing::normal_tail(a) - testing::normal_tail(b);
    }
    const double se = std::sqrt(expect * (1.0 - expect) / static_cast<double>(n));
    EXPECT_NEAR(row.p_hat, expect, 3.0 * se);
}

TEST_F(McFixture, DuplicateEpsilonsGiveIdenticalRows) {
    McProblem p = problem();
    p.event.field = skeleton_terminal(m, s.u0, Control::zero(1, 0, 1, 1.0), 0.01);
    p.event.radius = 0.3;
    const SweepResult r = epsilon_sweep(p, {0.1, 0.1, 0.05}, 300, 4);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_EQ(r.rows[0].hits, r.rows[1].hits);
    EXPECT_EQ(r.rows[0].p_hat, r.rows[1].p_hat);
    EXPECT_THROW(epsilon_sweep(p, {0.05, 0.1}, 10, 4), std::invalid_argument);
}

TEST_F(McFixture, TallyIsIndependentOfThreadCount) {
    McProblem p = problem();
    p.event.field = skeleton_terminal(m, s.u0, Control::zero(1, 0, 1, 1.0), 0.01);
    p.event.radius = 0.3;
    const Tally one = tally_paths(p, 0.1, 9, 0, 500, 1);
    const Tally four = tally_paths(p, 0.1, 9, 0, 500, 4);
    EXPECT_EQ(one, four);
    Tally split = tally_paths(p, 0.1, 9, 0, 123, 1);
    split += tally_paths(p, 0.1, 9, 123, 500, 3);
    EXPECT_EQ(split, one);
}

TEST(LdpBounds, DeterministicEventHasZeroGap) {
    SweepRow row;
    row.epsilon = 0.1;
    row.n_paths = 100;
    row.hits = 100;
    row.p_hat = 1.0;
    row.ci_lo = 0.96;
    row.ci_hi = 1.0;
    row.eps_log_p = 0.0;
    const LdpBoundsReport r = ldp_bounds_probe(0.0, {row});
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.rows[0].eps_log_p, 0.0);
    EXPECT_EQ(r.rows[0].gap, 0.0);
    EXPECT_THROW(ldp_bounds_probe(0.0, {}), std::invalid_argument);
}

TEST(LdpBounds, CensoredRowsAreFlagged) {
    const SweepRow a = make_row(0.1, Tally{100, 10, 0});
    const SweepRow b = make_row(0.05, Tally{100, 0, 0});
    EXPECT_FALSE(a.censored());
    EXPECT_TRUE(std::isfinite(*a.eps_log_p));
    EXPECT_TRUE(b.censored());
    const LdpBoundsReport r = ldp_bounds_probe(0.2, {a, b});
    EXPECT_TRUE(r.rows[1].censored);
    EXPECT_FALSE(r.gap_decreasing);
}

} // namespace
} // namespace snls
