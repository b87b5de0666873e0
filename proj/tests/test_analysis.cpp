#include "conebvp/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace conebvp;

namespace {

ProblemSpec separable(const char* h, const char* g, double phi_exp = 2.0, double lambda = 1.0) {
    ProblemSpec s;
    s.phi_exponent = phi_exp;
    s.weight_p = parse("1");
    s.weight_q = parse("1");
    s.nonlinearity = SeparableNonlinearity{{parse(h)}, {parse(g)}};
    s.lambda = lambda;
    return s;
}

// γ for p = 2, unit weights, a = polynomial c0 + c1 t + c2 t², by antiderivatives.
struct PolyGamma {
    double c0, c1, c2;
    double H(double t) const { return c0 * t + c1 * t * t / 2 + c2 * t * t * t / 3; }
    double G(double t) const { return c0 * t * t / 2 + c1 * t * t * t / 6 + c2 * t * t * t * t / 12; }
    double operator()(double t) const {
        const double left = (t - 0.25) * H(t) - (G(t) - G(0.25));
        const double right = (G(0.75) - G(t)) - (0.75 - t) * H(t);
        return 0.125 * (left + right);  // ρ/2 with ρ = 1/4
    }
};

}  // namespace

TEST(Gamma, ZeroWeight) {
    EXPECT_EQ(gamma(separable("1", "1"), [](double) { return 0.0; }, 0.4), 0.0);
}

TEST(Gamma, UnitWeightClosedForm) {
    const auto spec = separable("1", "1");
    auto one = [](double) { return 1.0; };
    EXPECT_NEAR(gamma(spec, one, 0.5), 1.0 / 128.0, 1e-14);
    EXPECT_NEAR(gamma(spec, one, 0.25), 1.0 / 64.0, 1e-14);
    EXPECT_NEAR(gamma(spec, one, 0.75), 1.0 / 64.0, 1e-14);
    for (double t : {0.3, 0.45, 0.61}) {
        EXPECT_NEAR(gamma(spec, one, t), ((t - 0.25) * (t - 0.25) + (0.75 - t) * (0.75 - t)) / 16.0, 1e-14);
    }
}

TEST(Gamma, OutsideWindowRejected) {
    EXPECT_THROW(gamma(separable("1", "1"), [](double) { return 1.0; }, 0.1), NumericalError);
}

TEST(A, Examples) {
    EXPECT_NEAR(compute_A_i(separable("1", "1"), 0), 1.0, 1e-14);
    EXPECT_NEAR(compute_A_i(separable("1", "1", 3.0), 0), 1.0, 1e-14);
    EXPECT_EQ(compute_A_i(separable("0", "1"), 0), 0.0);
    // p = 2, unit weights: A = ∫h
    EXPECT_NEAR(compute_A_i(separable("1+t", "1"), 0), 1.5, 1e-14);
}

TEST(B, UnitWeight) {
    const auto b = compute_B_i(separable("1", "1"), 0);
    EXPECT_NEAR(b.value, 1.0 / 128.0, 1e-12);
    EXPECT_NEAR(b.argmin, 0.5, 1e-6);
}

TEST(B, SymmetricDataMinimumAtCentre) {
    const auto b = compute_B_i(separable("1+sin(pi*t)", "1", 2.5), 0);
    EXPECT_NEAR(b.argmin, 0.5, 1e-6);
}

TEST(B, RandomPolynomialsMatchClosedForm) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> d(0.0, 5.0);
    for (int k = 0; k < 5; ++k) {
        const PolyGamma g{0.1 + d(rng), d(rng) - 2.5, d(rng)};
        const auto h = format_number(g.c0) + "+" + format_number(g.c1) + "*t+" + format_number(g.c2) + "*t^2";
        const auto b = compute_B_i(separable(h.c_str(), "1"), 0);
        double brute = 1e300;
        for (int j = 0; j <= 10000; ++j) brute = std::min(brute, g(0.25 + 0.5 * j / 10000.0));
        EXPECT_NEAR(b.value, brute, 1e-8) << h;
        EXPECT_LE(b.value, brute + 1e-12);
    }
}

TEST(B, MassOnlyOnTheLeftQuarter) {
    // h vanishes on the window, so γ_h is 0 throughout [1/4, 3/4].
    const auto b = compute_B_i(separable("max(0, 0.25-t)", "1"), 0);
    const auto spec = separable("1", "1");
    auto a = [](double t) { return std::max(0.0, 0.25 - t); };
    double brute = 1e300;
    for (int j = 0; j <= 10000; j += 50) brute = std::min(brute, gamma(spec, a, 0.25 + 0.5 * j / 10000.0));
    EXPECT_NEAR(b.value, brute, 1e-12);
    EXPECT_NEAR(b.value, 0.0, 1e-12);
}

TEST(GLimits, Superlinear) {
    const auto l = estimate_g_limits(separable("1", "u1^2"), 0);
    EXPECT_EQ(l.zero.trend, LimitTrend::Vanishing);
    EXPECT_EQ(l.zero.value, 0.0);
    EXPECT_EQ(l.infinity.trend, LimitTrend::Diverging);
    EXPECT_EQ(l.infinity.value, kInf);
}

TEST(GLimits, Linear) {
    const auto l = estimate_g_limits(separable("1", "3*u1"), 0);
    EXPECT_NEAR(l.zero.value, 3.0, 1e-12);
    EXPECT_NEAR(l.infinity.value, 3.0, 1e-12);
}

TEST(GLimits, QuadraticAtPThree) {
    const auto l = estimate_g_limits(separable("1", "u1^2", 3.0), 0);
    EXPECT_NEAR(l.zero.value, 1.0, 1e-12);
    EXPECT_NEAR(l.infinity.value, 1.0, 1e-12);
}

TEST(GLimits, AffineDivergesAtZero) {
    const auto l = estimate_g_limits(separable("1", "1+u1"), 0);
    EXPECT_EQ(l.zero.value, kInf);
    EXPECT_NEAR(l.infinity.value, 1.0, 1e-5);
}

TEST(GLimits, OverflowTruncatesLargeMagnitudes) {
    const auto l = estimate_g_limits(separable("1", "exp(u1)"), 0);
    EXPECT_TRUE(l.infinity.truncated);
    EXPECT_EQ(l.infinity.value, kInf);
}

TEST(GLimits, NeedsSixDecades) {
    LimitOptions opt;
    opt.magnitudes = {1.0, 10.0, 100.0};
    EXPECT_THROW(estimate_g_limits(separable("1", "u1"), 0, opt), SpecError);
}

TEST(GLimits, SeededDirectionsAreReproducible) {
    ProblemSpec s = separable("1", "1");
    s.n = 2;
    s.nonlinearity = SeparableNonlinearity{{parse("1"), parse("1")}, {parse("u1*u2+u1"), parse("u2")}};
    LimitOptions opt;
    opt.directions = 8;
    const auto a = estimate_g_limits(s, 0, opt), b = estimate_g_limits(s, 0, opt);
    EXPECT_EQ(a.infinity.range_lo, b.infinity.range_lo);
    EXPECT_EQ(a.infinity.range_hi, b.infinity.range_hi);
}

TEST(Intervals, Superlinear) {
    const auto r = eigenvalue_intervals(separable("1", "u1^2"));
    EXPECT_EQ(r.interval_s.lower, 0.0);
    EXPECT_EQ(r.interval_s.upper, kInf);
    EXPECT_TRUE(r.interval_s.nonempty);
    EXPECT_TRUE(r.corollary_i_all);
    EXPECT_TRUE(r.all_lambda());
}

TEST(Intervals, DeclaredLimits) {
    LimitOverrides ov{{0.5}, {kInf}};
    const auto r = eigenvalue_intervals(separable("1", "u1"), ov);
    EXPECT_EQ(r.interval_s.lower, 0.0);
    EXPECT_NEAR(r.interval_s.upper, 2.0, 1e-12);
    EXPECT_TRUE(r.limits[0].zero.declared);
}

TEST(Intervals, EmptyWhenLimitsEqual) {
    LimitOverrides ov{{1.0}, {1.0}};
    const auto r = eigenvalue_intervals(separable("1", "u1"), ov);
    EXPECT_FALSE(r.interval_s.nonempty);
    EXPECT_FALSE(r.interval_t.nonempty);
}

TEST(Intervals, SublinearUsesSecondInterval) {
    // g = 1 + u: g0 = ∞, g∞ = 1, interval_t = (0, 1/(A g∞)) = (0, 1)
    const auto r = eigenvalue_intervals(separable("1", "1+u1"));
    EXPECT_FALSE(r.interval_s.nonempty);
    EXPECT_TRUE(r.interval_t.nonempty);
    EXPECT_EQ(r.interval_t.lower, 0.0);
    EXPECT_NEAR(r.interval_t.upper, 1.0, 1e-5);
}

TEST(H1H2, Examples) {
    auto spec = separable("1", "u1^2");
    auto h = check_h1_h2(spec, eigenvalue_intervals(spec));
    EXPECT_TRUE(h.holds("h1"));
    EXPECT_FALSE(h.holds("h2"));

    spec = separable("1", "3*u1");
    h = check_h1_h2(spec, eigenvalue_intervals(spec));
    EXPECT_FALSE(h.holds("h1"));
    EXPECT_FALSE(h.holds("h2"));

    spec = separable("1", "u1");
    h = check_h1_h2(spec, eigenvalue_intervals(spec, LimitOverrides{{kInf}, {0.0}}));
    EXPECT_TRUE(h.holds("h2"));
}

TEST(D1D2, ProofScalingPassesAtEquality) {
    // f = λ h with constant h: ψ = h/B and φ = h/A. With c = 1: (ρα)ψ ≤ 1 needs α ≤ 4B = 1/32,
    // β φ ≥ 1 needs β ≥ A = 1.
    const auto spec = separable("1", "1");
    const auto rep = check_D1_D2(spec, 1.0 / 32.0, 1.0, {parse("128")}, {parse("1")});
    EXPECT_TRUE(rep.holds("D1"));
    EXPECT_TRUE(rep.holds("D2"));
}

TEST(D1D2, SmallVarphiFailsWithWitness) {
    const auto spec = separable("1", "1+u1");
    const auto rep = check_D1_D2(spec, 1.0 / 64.0, 1.0, {parse("128")}, {parse("0.5")});
    EXPECT_FALSE(rep.holds("D2"));
    bool witness = false;
    for (const auto& c : rep.checks) {
        if (c.name == "D2" && !c.passed && c.t && !c.u.empty()) witness = true;
    }
    EXPECT_TRUE(witness);
}

TEST(D1D2, AlphaEqualsBetaRejected) {
    EXPECT_THROW(check_D1_D2(separable("1", "1"), 1.0, 1.0, {parse("1")}, {parse("1")}), SpecError);
}

TEST(Sweep, SuperlinearThreePoints) {
    SolverConfig cfg;
    cfg.grid = 128;
    const auto rep = lambda_sweep(separable("1", "u1^2"), 0.1, 10.0, 3, cfg);
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_DOUBLE_EQ(rep.rows[0].lambda, 0.1);
    EXPECT_DOUBLE_EQ(rep.rows[1].lambda, 1.0);
    EXPECT_DOUBLE_EQ(rep.rows[2].lambda, 10.0);
    for (const auto& r : rep.rows) {
        EXPECT_TRUE(r.converged);
        EXPECT_GT(r.norm, 0.0);
    }
    // λ u² scales like 1/λ
    EXPECT_NEAR(rep.rows[0].norm, 100.0 * rep.rows[2].norm, 1e-6 * rep.rows[0].norm);
}

TEST(Sweep, EmptyIntervalGivesEmptyReport) {
    EXPECT_TRUE(lambda_sweep(separable("1", "u1^2"), 2.0, 1.0, 3, SolverConfig{}).rows.empty());
}

TEST(Sweep, PointsAndTruncation) {
    SweepReport info;
    const auto pts = sweep_points(0.0, kInf, 3, 1e6, &info);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_TRUE(info.truncated_low);
    EXPECT_TRUE(info.truncated_high);
    EXPECT_DOUBLE_EQ(pts[0], 1e-6);
    EXPECT_DOUBLE_EQ(pts[1], 1.0);
    EXPECT_DOUBLE_EQ(pts[2], 1e6);
    const auto lin = sweep_points(2.0, 4.0, 3, 1e6, &info);
    EXPECT_FALSE(info.logarithmic);
    EXPECT_DOUBLE_EQ(lin[1], 3.0);
    EXPECT_EQ(sweep_points(1.0, 1.0, 1, 1e6).size(), 1u);
}
