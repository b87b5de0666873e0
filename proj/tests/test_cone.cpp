#include "conebvp/cone.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace conebvp;

namespace {

ProblemSpec with_p(const char* p) {
    ProblemSpec s;
    s.weight_p = parse(p);
    s.weight_q = parse("1");
    s.nonlinearity = GeneralNonlinearity{{parse("1")}};
    return s;
}

}  // namespace

TEST(Rho, ConstantWeight) {
    EXPECT_NEAR(compute_rho(with_p("3.7")).rho, 0.25, 1e-12);
    EXPECT_NEAR(compute_rho(with_p("1")).rho, 0.25, 1e-12);
}

TEST(Rho, LinearWeight) {
    EXPECT_NEAR(compute_rho(with_p("1+t")).rho, std::log(8.0 / 7.0) / std::log(2.0), 1e-10);
}

TEST(Rho, SymmetricUnderReflection) {
    EXPECT_NEAR(compute_rho(with_p("1+t^2")).rho, compute_rho(with_p("1+(1-t)^2")).rho, 1e-13);
}

TEST(Rho, NonpositiveWeightRejected) {
    EXPECT_THROW(compute_rho(with_p("t-0.5")), NumericalError);
}

TEST(HarnackFloor, UnitPIsTent) {
    const auto cone = compute_rho(with_p("1"), 64);
    const auto u = GridFunction::sample([](double t) { return std::sin(M_PI * t); }, 64);
    const auto f = harnack_floor(u, cone);
    for (int j = 0; j <= 64; ++j) {
        const double t = f.node(j);
        EXPECT_NEAR(f[static_cast<std::size_t>(j)], std::min(t, 1.0 - t) * u.sup_norm(), 1e-13);
    }
    EXPECT_NEAR(f[16], 0.25 * u.sup_norm(), 1e-13);
}

TEST(HarnackFloor, ZeroInput) {
    const auto cone = compute_rho(with_p("1"), 32);
    const auto f = harnack_floor(GridFunction::zeros(32), cone);
    for (double v : f.values()) EXPECT_EQ(v, 0.0);
}

TEST(InCone, Parabola) {
    const auto cone = compute_rho(with_p("1"), 64);
    const std::vector<GridFunction> u{GridFunction::sample([](double t) { return t * (1 - t); }, 64)};
    const auto rep = in_cone(u, cone, 0.0);
    EXPECT_TRUE(rep.member());
    EXPECT_NEAR(rep.components[0].min_middle, 3.0 / 16.0, 1e-15);
}

TEST(InCone, ZeroIsMember) {
    const auto cone = compute_rho(with_p("1"), 32);
    const std::vector<GridFunction> u{GridFunction::zeros(32)};
    EXPECT_TRUE(in_cone(u, cone, 0.0).member());
}

TEST(InCone, SupportOutsideWindow) {
    const auto cone = compute_rho(with_p("1"), 64);
    const std::vector<GridFunction> u{GridFunction::sample([](double t) { return 5.0 * std::max(0.0, t - 0.9); }, 64)};
    const auto rep = in_cone(u, cone, 1e-12);
    EXPECT_FALSE(rep.member());
    EXPECT_LT(rep.components[0].harnack_margin, 0.0);
}

TEST(InCone, NegativeValuesRejected) {
    const auto cone = compute_rho(with_p("1"), 32);
    const std::vector<GridFunction> u{GridFunction::sample([](double t) { return t * (1 - t) - 0.01; }, 32)};
    EXPECT_FALSE(in_cone(u, cone, 1e-12).member());
    EXPECT_TRUE(in_cone(u, cone, 0.02).components[0].positivity_margin >= 0.0);
}
