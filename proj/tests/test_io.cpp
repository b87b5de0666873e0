#include "conebvp/io.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <string>
#include <vector>

using namespace conebvp;

namespace {
const std::string kDir = CONEBVP_FIXTURES;
const double kInf = std::numeric_limits<double>::infinity();
}

TEST(Load, SeparableFixture) {
    const auto spec = io::load_problem(kDir + "/superlinear.json");
    EXPECT_EQ(spec.n, 1);
    EXPECT_TRUE(spec.separable());
    const std::vector<double> u{3.0};
    EXPECT_DOUBLE_EQ(spec.f(0, 0.2, u), 9.0);
}

TEST(Load, GeneralFixture) {
    const auto spec = io::load_problem(kDir + "/plaplace3.json");
    EXPECT_FALSE(spec.separable());
    EXPECT_EQ(spec.phi_exponent, 3.0);
}

TEST(Load, RadialFixtureIsTransformed) {
    const auto spec = io::load_problem(kDir + "/annulus.json");
    ASSERT_TRUE(spec.radial.has_value());
    EXPECT_NEAR(spec.q(0.5), 1.5, 1e-15);
    EXPECT_NEAR(spec.h(0, 0.5), 1.5, 1e-15);
    EXPECT_NEAR(spec.radial->radius(0.5), 1.5, 1e-15);
}

TEST(Load, Errors) {
    EXPECT_THROW(io::load_problem(kDir + "/malformed.json"), SpecError);
    EXPECT_THROW(io::load_problem(kDir + "/annulus_bad.json"), SpecError);
    EXPECT_THROW(io::load_problem(kDir + "/does_not_exist.json"), Error);
    EXPECT_THROW(io::problem_from_json(io::parse_json_text(R"({"n":1,"phi_exponent":2,"weight_p":"1","weight_q":"1"})")),
                 SpecError);
    EXPECT_THROW(io::problem_from_json(io::parse_json_text(
                     R"({"n":1,"phi_exponent":2,"weight_p":"1","weight_q":"1","f":["1"],"h":["1"],"g":["1"]})")),
                 SpecError);
    EXPECT_THROW(io::problem_from_json(io::parse_json_text(
                     R"({"n":1,"phi_exponent":2,"weight_p":"1","weight_q":"1","f":["1 +"]})")),
                 SpecError);
}

TEST(Save, RoundTrip) {
    for (const char* name : {"superlinear.json", "coupled.json", "plaplace3.json", "annulus.json"}) {
        const auto a = io::load_problem(kDir + "/" + name);
        const auto b = io::problem_from_json(io::problem_to_json(a));
        EXPECT_EQ(a.n, b.n);
        EXPECT_EQ(a.phi_exponent, b.phi_exponent);
        EXPECT_EQ(a.lambda, b.lambda);
        EXPECT_EQ(a.radial.has_value(), b.radial.has_value());
        const std::vector<double> u(static_cast<std::size_t>(a.n), 0.7);
        for (int i = 0; i < a.n; ++i) {
            for (double t : {0.0, 0.3, 1.0}) EXPECT_DOUBLE_EQ(a.f(i, t, u), b.f(i, t, u)) << name;
        }
        EXPECT_DOUBLE_EQ(a.q(0.4), b.q(0.4));
        EXPECT_DOUBLE_EQ(a.p(0.4), b.p(0.4));
    }
}

TEST(Numbers, NonFiniteAsStrings) {
    EXPECT_EQ(io::number(kInf), "inf");
    EXPECT_EQ(io::to_double(io::number(kInf), "x"), kInf);
    EXPECT_EQ(io::to_double(io::number(2.5), "x"), 2.5);
    EXPECT_THROW(io::to_double(io::json("abc"), "x"), SpecError);
}
