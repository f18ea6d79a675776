#include <gtest/gtest.h>

#include <cmath>
#include <hybcs/dynamics.hpp>
#include <hybcs/equilibrium.hpp>

using namespace hybcs;

// Δ̄/W = 1/(2 sinh(W/|U|)) evaluated independently of the library helper
static double closed(double u_over_w) { return 1.0 / (2.0 * std::sinh(1.0 / u_over_w)); }

TEST(Gap, ClosedFormValues) {
    EXPECT_NEAR(closed(1.0), 0.425459, 5e-7);
    EXPECT_NEAR(closed(0.5), 0.137860, 5e-7);
    EXPECT_NEAR(gap_closed_form(1.0, 1.0), closed(1.0), 1e-15);
}

TEST(Gap, BisectionMatchesContinuumAt4096) {
    auto g = build_flat_band(1.0, 4096);
    for (double u : {0.5, 1.0}) {
        auto s = solve_gap(g, u);
        EXPECT_NEAR(s.gap, closed(u), 1e-6) << u;
        EXPECT_LE(std::abs(s.residual), 1e-12);
        EXPECT_NEAR(s.order_parameter * u, s.gap, 1e-15);
    }
}

TEST(Gap, ScalesWithBandwidth) {
    auto g = build_flat_band(3.0, 4096);
    auto s = solve_gap(g, 3.0);
    EXPECT_NEAR(s.gap, 3.0 * closed(1.0), 3e-6);
}

TEST(Gap, WeakCouplingVanishes) {
    auto g = build_flat_band(1.0, 4096);
    double prev = 1;
    for (double u : {0.5, 0.3, 0.2, 0.15}) {
        const double gap = solve_gap(g, u).gap;
        EXPECT_LT(gap, prev);
        prev = gap;
    }
    EXPECT_LT(prev, 1e-2);
}

TEST(Gap, BelowThresholdHasNoSolution) {
    // two modes at ±W/4: threshold |U| = W/2
    auto g = build_flat_band(1.0, 2);
    EXPECT_THROW(solve_gap(g, 0.4), NoSolutionError);
    EXPECT_NO_THROW(solve_gap(g, 0.6));
    EXPECT_THROW(solve_gap(g, 0.0), ConfigError);
}

TEST(GroundState, PureAndHalfFilled) {
    for (std::size_t n : {2u, 64u, 4096u}) {
        auto g = build_flat_band(1.0, n);
        auto s = build_ground_state(g, solve_gap(g, 1.0));
        EXPECT_NEAR(density(s, g), 1.0, 1e-14);
        for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(zeta(s.n[j], s.d[j]), 1.0, 1e-14);
        EXPECT_GT(order_parameter(s, g).real(), 0.0);
        EXPECT_EQ(order_parameter(s, g).imag(), 0.0);
    }
}

TEST(GroundState, ModeAtGapEnergy) {
    // a grid whose single positive mode sits at ε = Δ̄
    GapSolution gs{0.2, 0.2, 0};
    auto g = make_grid(1.0, {-0.2, 0.2}, {0.5, 0.5});
    auto s = build_ground_state(g, gs);
    EXPECT_NEAR(s.n[1], (1 - 1 / std::sqrt(2.0)) / 2, 1e-15);
    EXPECT_NEAR(s.d[1].real(), 1 / (2 * std::sqrt(2.0)), 1e-15);
}

TEST(GroundState, OrderParameterMatchesGap) {
    auto g = build_flat_band(1.0, 4096);
    auto sol = solve_gap(g, 1.0);
    auto s = build_ground_state(g, sol);
    EXPECT_NEAR(order_parameter(s, g).real() * 1.0, 0.425459, 1e-6);
}

TEST(GroundState, Stationary) {
    for (double u : {0.5, 1.0}) {
        auto g = build_flat_band(1.0, 4096);
        auto s = build_ground_state(g, solve_gap(g, u));
        for (double a : {0.0, 0.3, 1.0}) {
            SystemParams p{u, 0, 0, a, a, &g};
            auto r = rhs_total(s, p);
            for (std::size_t j = 0; j < g.n_modes(); ++j) {
                EXPECT_LE(std::abs(r.dn[j]), 1e-10);
                EXPECT_LE(std::abs(r.dd[j]), 1e-10);
            }
        }
    }
}
