#include "conebvp/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
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

double parabola_error(const GridFunction& u) {
    double e = 0.0;
    for (int j = 0; j <= u.panels(); ++j) {
        const double t = u.node(j);
        e = std::max(e, std::abs(u[static_cast<std::size_t>(j)] - 4 * t * (1 - t)));
    }
    return e;
}

}  // namespace

TEST(InitialGuess, FlatBump) {
    const auto spec = separable("1", "1");
    const auto cone = compute_rho(spec, 64);
    const auto g = initial_guess(spec, cone, 1.0, InitialGuessMode::FlatBump, 64);
    EXPECT_DOUBLE_EQ(g[0][32], 1.0);
    EXPECT_DOUBLE_EQ(g[0].sup_norm(), 1.0);
    EXPECT_THROW(initial_guess(spec, cone, 0.0, InitialGuessMode::FlatBump, 64), SpecError);
}

TEST(InitialGuess, ScaledFloorIsInCone) {
    const auto spec = separable("1", "1");
    const auto cone = compute_rho(spec, 64);
    const auto g = initial_guess(spec, cone, 2.0, InitialGuessMode::ScaledFloor, 64);
    EXPECT_TRUE(in_cone(g, cone, 1e-12).member());
}

TEST(Picard, ConstantForcingOneFullStep) {
    SolverConfig cfg;
    cfg.damping = 1.0;
    cfg.method = SolveMethod::Picard;
    const auto b = picard_solve(separable("8", "1"), cfg);
    EXPECT_TRUE(b.converged);
    EXPECT_LE(b.iterations, 2);
    EXPECT_LE(parabola_error(b.u[0]), 1e-10);
}

TEST(Picard, GenuinePLaplacian) {
    SolverConfig cfg;
    const auto b = picard_solve(separable("1", "1", 3.0), cfg);
    EXPECT_TRUE(b.converged);
    EXPECT_NEAR(b.norm, (2.0 / 3.0) * std::pow(0.5, 1.5), 1e-6);
}

TEST(Picard, DecoupledCopies) {
    ProblemSpec two = separable("8", "1");
    two.n = 2;
    two.nonlinearity = SeparableNonlinearity{{parse("8"), parse("8")}, {parse("1"), parse("1")}};
    SolverConfig cfg;
    const auto b2 = picard_solve(two, cfg);
    const auto b1 = picard_solve(separable("8", "1"), cfg);
    ASSERT_TRUE(b2.converged);
    for (std::size_t j = 0; j < b1.u[0].size(); ++j) {
        EXPECT_NEAR(b2.u[0][j], b1.u[0][j], 1e-13);
        EXPECT_NEAR(b2.u[1][j], b1.u[0][j], 1e-13);
    }
}

TEST(Newton, WarmStartAtFixedPoint) {
    SolverConfig cfg;
    const auto spec = separable("8", "1");
    const auto p = picard_solve(spec, cfg);
    const auto n = newton_solve(spec, cfg, p);
    EXPECT_TRUE(n.converged);
    EXPECT_EQ(n.iterations, 0);
}

TEST(Newton, ColdStartAgreesWithPicard) {
    SolverConfig cfg;
    cfg.grid = 128;
    const auto spec = separable("1+t", "1+u1/(1+u1)");
    const auto p = picard_solve(spec, cfg);
    const auto n = newton_solve(spec, cfg);
    ASSERT_TRUE(p.converged);
    ASSERT_TRUE(n.converged);
    EXPECT_LE(sup_distance(p.u, n.u), 1e-8);
}

TEST(Newton, SuperlinearFromPicardIterate) {
    // Picard is repelled by the positive fixed point of λ u²; Newton from
    // Picard's last iterate, after level balancing, converges.
    SolverConfig cfg;
    cfg.grid = 128;
    cfg.method = SolveMethod::Auto;
    const auto spec = separable("1", "u1^2");
    cfg.max_iterations = 50;
    const auto picard = picard_solve(spec, cfg);
    EXPECT_FALSE(picard.positive());
    const auto b = solve(spec, cfg);
    EXPECT_TRUE(b.positive());
    EXPECT_NEAR(b.norm, 11.7967, 0.05);
}

TEST(Solve, ConstantForcingMatchesParabola) {
    SolverConfig cfg;
    const auto b = solve(separable("8", "1"), cfg);
    ASSERT_TRUE(b.converged);
    EXPECT_LE(parabola_error(b.u[0]), 1e-6);
    EXPECT_NEAR(b.sigma[0], 0.5, 1e-8);
    EXPECT_LE(b.r_ode, 1e-6);
}

TEST(Solve, ImpossibleToleranceIsFlaggedNotThrown) {
    SolverConfig cfg;
    cfg.grid = 64;
    cfg.tolerance = 1e-30;
    cfg.max_iterations = 50;
    cfg.newton_max_iterations = 3;
    const auto b = solve(separable("1", "1+u1"), cfg);
    EXPECT_FALSE(b.converged);
    EXPECT_FALSE(b.message.empty());
}

TEST(Solve, HomogeneityOfSolutions) {
    // u solves the problem with f = 1 iff c u solves it with f = c^{p-1}.
    SolverConfig cfg;
    const double c = 3.0, p = 3.0;
    const auto a = solve(separable("1", "1", p), cfg);
    const auto b = solve(separable(format_number(std::pow(c, p - 1)).c_str(), "1", p), cfg);
    EXPECT_NEAR(b.norm, c * a.norm, 1e-9 * b.norm);
}

TEST(OdeResidual, ExactParabolaIsSmall) {
    const std::vector<GridFunction> u{GridFunction::sample([](double t) { return 4 * t * (1 - t); }, 128)};
    EXPECT_LE(ode_residual(separable("8", "1"), u), 1e-12);
    const std::vector<GridFunction> wrong{GridFunction::sample([](double t) { return 2 * t * (1 - t); }, 128)};
    EXPECT_GT(ode_residual(separable("8", "1"), wrong), 0.1);
}

TEST(Verify, ZeroFunctionFails) {
    SolutionBundle b;
    b.u = {GridFunction::zeros(64)};
    b.sigma = {0.5};
    const auto rep = verify_solution(separable("8", "1"), b);
    EXPECT_FALSE(rep.fixed_point_ok);
    EXPECT_FALSE(rep.passed());
}

TEST(Verify, SandwichPasses) {
    SolverConfig cfg;
    const auto spec = separable("8", "1");
    const auto b = solve(spec, cfg);
    const auto rep = verify_solution(spec, b, 0.5, 2.0);
    ASSERT_TRUE(rep.sandwich.has_value());
    EXPECT_TRUE(*rep.sandwich);
    EXPECT_TRUE(rep.passed());
    const auto outside = verify_solution(spec, b, 2.0, 3.0);
    EXPECT_FALSE(*outside.sandwich);
}

TEST(Harnack, SolutionsSitAboveFloor) {
    SolverConfig cfg;
    for (const auto& spec : {separable("8", "1"), separable("1", "1", 3.0), separable("1+t", "1+u1", 1.6)}) {
        const auto b = solve(spec, cfg);
        ASSERT_TRUE(b.converged);
        const auto floor = harnack_floor(b.u[0], compute_rho(spec, cfg.grid));
        for (std::size_t j = 0; j < floor.size(); ++j) EXPECT_GE(b.u[0][j], floor[j] - 1e-8);
    }
}

TEST(MultiStart, FindsThePositiveSolution) {
    SolverConfig cfg;
    cfg.grid = 64;
    const auto spec = separable("1", "u1^2");
    const DiscreteOperator op(spec, cfg.grid);
    const auto found = multi_start(op, compute_rho(spec, cfg.grid), cfg, 1.0, 512.0);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_NEAR(found[0].norm, 11.8, 0.1);
}
