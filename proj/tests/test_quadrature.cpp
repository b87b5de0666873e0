#include "conebvp/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace conebvp;

TEST(Integrate, Examples) {
    EXPECT_NEAR(integrate([](double) { return 1.0; }, 0.0, 1.0, 8), 1.0, 1e-15);
    EXPECT_NEAR(integrate([](double t) { return t; }, 0.0, 1.0, 8), 0.5, 1e-15);
    EXPECT_NEAR(integrate([](double t) { return 1.0 / (1.0 + t); }, 0.0, 1.0, 8), std::log(2.0), 1e-12);
}

TEST(Integrate, EmptyAndInvalidRanges) {
    EXPECT_EQ(integrate([](double) { return 1.0; }, 0.3, 0.3, 4), 0.0);
    EXPECT_THROW(integrate([](double) { return 1.0; }, 0.5, 0.3, 4), NumericalError);
    EXPECT_THROW(integrate([](double) { return 1.0; }, 0.0, 1.0, 0), NumericalError);
}

TEST(Integrate, ExactForDegreeNine) {
    const double v = integrate([](double t) { return std::pow(t, 9); }, 0.0, 1.0, 1);
    EXPECT_NEAR(v, 0.1, 1e-15);
}

TEST(Integrate, TenthOrderConvergence) {
    auto f = [](double t) { return std::exp(3.0 * t); };
    const double exact = (std::exp(3.0) - 1.0) / 3.0;
    const double e1 = std::abs(integrate(f, 0.0, 1.0, 1) - exact);
    const double e2 = std::abs(integrate(f, 0.0, 1.0, 2) - exact);
    EXPECT_GT(e1 / e2, 500.0);  // 2^10 = 1024 asymptotically
}

TEST(IntegrateOnGrid, ClippedEndPanels) {
    auto f = [](double t) { return std::cos(t); };
    EXPECT_NEAR(integrate_on_grid(f, 0.123, 0.877, 64), std::sin(0.877) - std::sin(0.123), 1e-14);
}

TEST(GridFunction, Invariants) {
    EXPECT_THROW(GridFunction(std::vector<double>(10, 0.0)), NumericalError);
    EXPECT_THROW(GridFunction(std::vector<double>(18, 0.0)), NumericalError);  // N = 17 odd
    std::vector<double> v(17, 0.0);
    v[3] = std::nan("");
    EXPECT_THROW(GridFunction{v}, NumericalError);
    EXPECT_NO_THROW(GridFunction(std::vector<double>(17, 0.0)));
}

TEST(Cumulative, Examples) {
    const auto F = cumulative([](double) { return 1.0; }, 16);
    for (int j = 0; j <= 16; ++j) EXPECT_NEAR(F[static_cast<std::size_t>(j)], F.node(j), 1e-15);
    const auto G = cumulative([](double t) { return 2.0 * t; }, 64);
    for (int j = 0; j <= 64; ++j) EXPECT_NEAR(G[static_cast<std::size_t>(j)], G.node(j) * G.node(j), 1e-12);
    const auto Z = cumulative([](double) { return 0.0; }, 16);
    for (double z : Z.values()) EXPECT_EQ(z, 0.0);
}

TEST(SampleBetween, Examples) {
    const auto G = cumulative([](double t) { return 2.0 * t; }, 64);
    EXPECT_EQ(sample_between(G, G.node(10)), G[10]);
    EXPECT_NEAR(sample_between(G, 0.3), 0.09, 1e-9);
    const auto L = GridFunction::sample([](double t) { return 3.0 * t + 1.0; }, 16);
    const double mid = 0.5 * (L.node(5) + L.node(6));
    EXPECT_NEAR(sample_between(L, mid), 0.5 * (L[5] + L[6]), 1e-15);
}

TEST(PiecewiseCubicIntegral, ExactForCubicSamples) {
    const auto s = GridFunction::sample([](double t) { return 1.0 + t - 2.0 * t * t + t * t * t; }, 32);
    const PiecewiseCubicIntegral P(s.values());
    auto F = [](double t) { return t + t * t / 2 - 2.0 * t * t * t / 3 + t * t * t * t / 4; };
    for (double x : {0.0, 0.013, 0.25, 0.5, 0.777, 1.0}) EXPECT_NEAR(P(x), F(x), 1e-14);
    EXPECT_NEAR(P.total(), F(1.0), 1e-14);
}
