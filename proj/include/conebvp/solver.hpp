#pragma once

#include "conebvp/cone.hpp"
#include "conebvp/error.hpp"
#include "conebvp/operator.hpp"
#include "conebvp/problem.hpp"
#include "conebvp/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace conebvp {

enum class InitialGuessMode { FlatBump, ScaledFloor, UserSupplied };

enum class SolveMethod { Picard, Newton, Auto };

inline const char* to_string(SolveMethod m) {
    switch (m) {
        case SolveMethod::Picard:
            return "picard";
        case SolveMethod::Newton:
            return "newton";
        case SolveMethod::Auto:
            return "auto";
    }
    return "?";
}

struct SolverConfig {
    int grid = kDefaultGrid;
    double damping = 0.5;            // θ in u ← (1-θ) u + θ T u
    int max_iterations = 500;        // Picard cap
    int newton_max_iterations = 40;
    double tolerance = 1e-10;        // converged when r_fp ≤ tolerance (1 + ‖u‖)
    InitialGuessMode guess = InitialGuessMode::FlatBump;
    double level = 1.0;              // sup norm of the initial guess
    std::vector<GridFunction> user_guess;
    /// Auto mode leaves Picard for Newton once the residual contraction
    /// factor over a 10-step window exceeds this value.
    double newton_switch = 0.95;
    SolveMethod method = SolveMethod::Auto;

    void check() const {
        if (!(damping > 0.0 && damping <= 1.0)) throw SpecError("damping must lie in (0, 1]");
        if (!(tolerance > 0.0)) throw SpecError("tolerance must be positive");
        if (grid < 16 || grid % 2 != 0) throw SpecError("grid must be even and >= 16");
        if (max_iterations < 0 || newton_max_iterations < 0) throw SpecError("iteration caps must be >= 0");
    }
};

/// Solutions below this sup norm are the trivial fixed point, not positive solutions.
inline constexpr double kTrivialNorm = 1e-8;

struct SolutionBundle {
    std::vector<GridFunction> u;
    std::vector<double> sigma;
    double r_fp = std::numeric_limits<double>::infinity();
    double r_ode = std::numeric_limits<double>::infinity();
    MembershipReport cone;
    double norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string method;
    std::string message;

    bool positive() const noexcept { return converged && norm > kTrivialNorm; }
};

inline double sup_norm(std::span<const GridFunction> u) {
    double m = 0.0;
    for (const auto& ui : u) m = std::max(m, ui.sup_norm());
    return m;
}

inline double sup_distance(std::span<const GridFunction> a, std::span<const GridFunction> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
    }
    return m;
}

// ---------------------------------------------------------------------------

/// Flat bump: level · 4t(1-t). Scaled floor: level times the Harnack profile
/// of a unit function. Both lie in the cone whenever ρ ≤ 1/4.
inline std::vector<GridFunction> initial_guess(const ProblemSpec& spec, const ConeData& cone, double level,
                                               InitialGuessMode mode, int grid = kDefaultGrid) {
    if (!(level > 0.0) || !std::isfinite(level)) throw SpecError("initial guess level must be positive");
    if (mode == InitialGuessMode::UserSupplied) throw SpecError("user-supplied guesses are passed in SolverConfig");
    std::vector<GridFunction> out;
    for (int i = 0; i < spec.n; ++i) {
        if (mode == InitialGuessMode::FlatBump) {
            out.push_back(GridFunction::sample([level](double t) { return level * 4.0 * t * (1.0 - t); }, grid, i));
        } else {
            const auto unit = GridFunction::sample([](double) { return 1.0; }, grid);
            auto floor = harnack_floor(unit, cone);
            for (auto& v : floor.mutable_values()) v *= level;
            floor.set_tag(i);
            out.push_back(std::move(floor));
        }
    }
    return out;
}

namespace detail {

// Flux w = q φ(p u') at the midpoint of panel [a, a+h], recovered from the
// increment du = u(a+h) - u(a). Along the panel w is modelled as
// w_mid - f_mid (s - mid) - f_slope (s - mid)^2 / 2, and w_mid solves
//   ∫_panel φ^{-1}(w(s)/q(s)) / p(s) ds = du.
// With p = 2, constant weights and constant forcing this is the plain
// quotient q p du/h; for p ≠ 2 it stays accurate next to points where
// u' = 0, where φ(p du/h) does not.
inline double panel_flux(const ProblemSpec& spec, const PhiInverse& phi_inv, double a, double h, double du,
                         double f_mid, double f_slope) {
    const double mid = a + 0.5 * h;
    std::array<double, 5> inv_p{}, inv_q{}, offset{}, weight{};
    for (std::size_t m = 0; m < 5; ++m) {
        const auto [s, w] = GaussLegendre5::node(a, a + h, m);
        inv_p[m] = 1.0 / spec.p(s);
        inv_q[m] = 1.0 / spec.q(s);
        offset[m] = s - mid;
        weight[m] = w;
    }
    auto increment = [&](double w_mid) {
        double sum = 0.0;
        for (std::size_t m = 0; m < 5; ++m) {
            const double d = offset[m];
            sum += weight[m] * inv_p[m] * phi_inv((w_mid - f_mid * d - 0.5 * f_slope * d * d) * inv_q[m]);
        }
        return sum - du;
    };
    const double guess = spec.q(mid) * phi(spec.p(mid) * du / h, phi_inv.p());
    double span = std::max({std::abs(guess), std::abs(f_mid) * h, std::abs(f_slope) * h * h, 1e-300});
    double lo = guess - span, hi = guess + span;
    double flo = increment(lo), fhi = increment(hi);
    for (int k = 0; k < 200 && flo > 0.0; ++k) {
        span *= 2.0;
        lo = guess - span;
        flo = increment(lo);
    }
    for (int k = 0; k < 200 && fhi < 0.0; ++k) {
        span *= 2.0;
        hi = guess + span;
        fhi = increment(hi);
    }
    const double xtol = 1e-15 * std::max(std::abs(lo), std::abs(hi));
    return roots::brent(increment, lo, hi, flo, fhi, xtol, 200).x;
}

}  // namespace detail

/// max over interior nodes of |Δ[q φ(p u')]/Δt + f^i(t, u)|, divided by
/// max |f^i|. Uses the conservative form, so q is never differentiated;
/// panel fluxes come from detail::panel_flux.
inline double ode_residual(const ProblemSpec& spec, std::span<const GridFunction> u) {
    const int n = u.front().panels();
    const double h = 1.0 / n;
    const PhiInverse phi_inv(spec.phi_exponent);
    std::vector<double> flux(static_cast<std::size_t>(n));
    std::vector<double> forcing(static_cast<std::size_t>(n) + 1);
    std::array<double, kMaxComponents> point{};
    double worst = 0.0;
    for (int i = 0; i < spec.n; ++i) {
        const auto& ui = u[static_cast<std::size_t>(i)];
        double fmax = 0.0;
        for (int j = 0; j <= n; ++j) {
            for (int c = 0; c < spec.n; ++c) point[static_cast<std::size_t>(c)] = u[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
            forcing[static_cast<std::size_t>(j)] = spec.f(i, j * h, std::span<const double>(point.data(), static_cast<std::size_t>(spec.n)));
            fmax = std::max(fmax, std::abs(forcing[static_cast<std::size_t>(j)]));
        }
        for (int k = 0; k < n; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            const double du = ui[kk + 1] - ui[kk];
            const double f_mid = 0.5 * (forcing[kk] + forcing[kk + 1]);
            const double f_slope = (forcing[kk + 1] - forcing[kk]) / h;
            flux[kk] = detail::panel_flux(spec, phi_inv, k * h, h, du, f_mid, f_slope);
        }
        const double scale = fmax > 0.0 ? fmax : 1.0;
        for (int j = 1; j < n; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            worst = std::max(worst, std::abs((flux[jj] - flux[jj - 1]) / h + forcing[jj]) / scale);
        }
    }
    return worst;
}

namespace detail {

inline void clamp_nonnegative(std::vector<GridFunction>& u) {
    for (auto& ui : u) {
        for (auto& v : ui.mutable_values()) v = std::max(v, 0.0);
    }
}

inline std::vector<double> sigmas(const OperatorOutput& out) {
    std::vector<double> s;
    for (const auto& c : out.components) s.push_back(c.sigma);
    return s;
}

/// Fills the derived fields of a bundle from a fresh application of T.
inline SolutionBundle finish_bundle(const DiscreteOperator& op, std::vector<GridFunction> u, const ConeData& cone,
                                    double tolerance, int iterations, const std::string& method) {
    SolutionBundle b;
    const auto out = op.apply(u);
    const auto images = out.images();
    b.norm = sup_norm(u);
    b.r_fp = sup_distance(images, u);
    b.sigma = sigmas(out);
    b.converged = b.r_fp <= tolerance * (1.0 + b.norm);
    b.cone = in_cone(u, cone, 1e-8 * (1.0 + b.norm));
    b.r_ode = ode_residual(op.spec(), u);
    b.iterations = iterations;
    b.method = method;
    b.u = std::move(u);
    if (b.converged && b.norm <= kTrivialNorm) b.message = "converged to the trivial solution u = 0";
    return b;
}

inline std::vector<GridFunction> starting_point(const ProblemSpec& spec, const ConeData& cone, const SolverConfig& cfg) {
    if (cfg.guess == InitialGuessMode::UserSupplied) {
        if (static_cast<int>(cfg.user_guess.size()) != spec.n) throw SpecError("user guess has the wrong component count");
        for (const auto& g : cfg.user_guess) {
            if (g.panels() != cfg.grid) throw SpecError("user guess is on a different grid");
        }
        return cfg.user_guess;
    }
    return initial_guess(spec, cone, cfg.level, cfg.guess, cfg.grid);
}

}  // namespace detail

struct PicardTrace {
    std::vector<double> residuals;
    std::vector<GridFunction> last_iterate;
    std::vector<GridFunction> best_iterate;
    double best_residual = std::numeric_limits<double>::infinity();
    bool stalled = false;
};

/// Damped Picard iteration u ← (1-θ) u + θ T u from the configured guess.
/// Iterates are clamped at 0 before T is applied. Non-convergence is a
/// flagged result.
inline SolutionBundle picard_solve(const DiscreteOperator& op, const ConeData& cone, const SolverConfig& cfg,
                                   PicardTrace* trace = nullptr, bool stop_on_stall = false) {
    cfg.check();
    auto u = detail::starting_point(op.spec(), cone, cfg);
    std::vector<double> hints;
    PicardTrace local;
    PicardTrace& tr = trace ? *trace : local;
    for (int it = 0; it <= cfg.max_iterations; ++it) {
        detail::clamp_nonnegative(u);
        const auto out = op.apply(u, hints);
        hints = detail::sigmas(out);
        const auto images = out.images();
        const double norm = sup_norm(u);
        const double r = sup_distance(images, u);
        tr.residuals.push_back(r);
        if (r < tr.best_residual) {
            tr.best_residual = r;
            tr.best_iterate = u;
        }
        if (r <= cfg.tolerance * (1.0 + norm)) {
            tr.last_iterate = u;
            return detail::finish_bundle(op, std::move(u), cone, cfg.tolerance, it, "picard");
        }
        if (!std::isfinite(r) || norm > 1e12) {
            tr.last_iterate = u;
            auto b = detail::finish_bundle(op, std::move(u), cone, cfg.tolerance, it, "picard");
            b.message = "picard iterates diverged";
            return b;
        }
        const std::size_t w = 10;
        if (tr.residuals.size() > w) {
            const double ratio = std::pow(r / tr.residuals[tr.residuals.size() - 1 - w], 1.0 / w);
            if (ratio > cfg.newton_switch) {
                tr.stalled = true;
                if (stop_on_stall) {
                    tr.last_iterate = u;
                    auto b = detail::finish_bundle(op, std::move(u), cone, cfg.tolerance, it, "picard");
                    b.message = "picard contraction too slow";
                    return b;
                }
            }
        }
        if (it == cfg.max_iterations) break;
        for (std::size_t i = 0; i < u.size(); ++i) {
            auto& v = u[i].mutable_values();
            for (std::size_t j = 0; j < v.size(); ++j) v[j] = (1.0 - cfg.damping) * v[j] + cfg.damping * images[i][j];
        }
    }
    tr.last_iterate = u;
    auto b = detail::finish_bundle(op, std::move(u), cone, cfg.tolerance, cfg.max_iterations, "picard");
    b.message = "picard iteration cap reached";
    return b;
}

inline SolutionBundle picard_solve(const ProblemSpec& spec, const SolverConfig& cfg) {
    const DiscreteOperator op(spec, cfg.grid);
    return picard_solve(op, compute_rho(spec, cfg.grid), cfg);
}

/// Damped Newton on R(U) = U - T(U) over the stacked node values of all
/// components, with a forward-difference Jacobian (step 1e-6 (1 + |U_k|)) and
/// step halving until ‖R‖ decreases.
inline SolutionBundle newton_solve(const DiscreteOperator& op, const ConeData& cone, const SolverConfig& cfg,
                                   const std::optional<SolutionBundle>& warm_start = std::nullopt) {
    cfg.check();
    const int n = op.components();
    const int nodes = op.panels() + 1;
    const Eigen::Index size = static_cast<Eigen::Index>(n) * nodes;

    std::vector<GridFunction> u = warm_start ? warm_start->u : detail::starting_point(op.spec(), cone, cfg);
    detail::clamp_nonnegative(u);

    auto stack = [&](const std::vector<GridFunction>& fs) {
        Eigen::VectorXd v(size);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < nodes; ++j) v(static_cast<Eigen::Index>(i) * nodes + j) = fs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        return v;
    };
    auto unstack = [&](const Eigen::VectorXd& v) {
        std::vector<GridFunction> fs;
        for (int i = 0; i < n; ++i) {
            std::vector<double> vals(static_cast<std::size_t>(nodes));
            for (int j = 0; j < nodes; ++j) vals[static_cast<std::size_t>(j)] = std::max(0.0, v(static_cast<Eigen::Index>(i) * nodes + j));
            fs.emplace_back(std::move(vals), i);
        }
        return fs;
    };
    std::vector<double> hints;
    auto residual = [&](const Eigen::VectorXd& U, std::vector<double>* sig) {
        const auto out = op.apply(unstack(U), hints);
        if (sig) *sig = detail::sigmas(out);
        return Eigen::VectorXd(U - stack(out.images()));
    };

    Eigen::VectorXd U = stack(u);
    std::string message;
    int iterations = 0;
    try {
        Eigen::VectorXd R = residual(U, &hints);
        for (; iterations <= cfg.newton_max_iterations; ++iterations) {
            const double rnorm = R.lpNorm<Eigen::Infinity>();
            if (rnorm <= cfg.tolerance * (1.0 + U.lpNorm<Eigen::Infinity>())) break;
            if (iterations == cfg.newton_max_iterations) {
                message = "newton iteration cap reached";
                break;
            }
            Eigen::MatrixXd J(size, size);
            for (Eigen::Index c = 0; c < size; ++c) {
                Eigen::VectorXd Up = U;
                const double step = 1e-6 * (1.0 + std::abs(U(c)));
                Up(c) += step;
                J.col(c) = (residual(Up, nullptr) - R) / step;
            }
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
            if (!(lu.rcond() > 1e-14)) {
                message = "singular Jacobian";
                break;
            }
            const Eigen::VectorXd delta = lu.solve(-R);
            if (!delta.allFinite()) {
                message = "singular Jacobian";
                break;
            }
            double lambda = 1.0;
            bool accepted = false;
            for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
                Eigen::VectorXd trial = (U + lambda * delta).cwiseMax(0.0);
                std::vector<double> trial_sigma;
                Eigen::VectorXd trial_r = residual(trial, &trial_sigma);
                if (trial_r.lpNorm<Eigen::Infinity>() < rnorm) {
                    U = std::move(trial);
                    R = std::move(trial_r);
                    hints = std::move(trial_sigma);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                message = "line search failed to reduce the residual";
                break;
            }
        }
    } catch (const NumericalError& e) {
        message = e.what();
    }
    auto b = detail::finish_bundle(op, unstack(U), cone, cfg.tolerance, iterations, "newton");
    if (!b.converged && message.empty()) message = "newton did not converge";
    if (!message.empty() && !b.converged) b.message = message;
    return b;
}

inline SolutionBundle newton_solve(const ProblemSpec& spec, const SolverConfig& cfg,
                                   const std::optional<SolutionBundle>& warm_start = std::nullopt) {
    const DiscreteOperator op(spec, cfg.grid);
    return newton_solve(op, compute_rho(spec, cfg.grid), cfg, warm_start);
}

namespace detail {

/// Scales the shape `w` so that ‖T(c w)‖ = c, scanning c over 10^-8..10^8
/// and bisecting in log c. Returns every crossing, ordered by distance to
/// `preferred` in log scale.
inline std::vector<double> balanced_levels(const DiscreteOperator& op, const std::vector<GridFunction>& w,
                                           double preferred) {
    auto gap = [&](double c) {
        std::vector<GridFunction> scaled = w;
        for (auto& f : scaled) {
            for (auto& v : f.mutable_values()) v *= c;
        }
        const double tn = op.apply(scaled).norm();
        return std::log(std::max(tn, 1e-300) / c);
    };
    std::vector<double> levels;
    double prev_c = 1e-8;
    double prev_g = gap(prev_c);
    for (int e = -7; e <= 8; ++e) {
        const double c = std::pow(10.0, e);
        const double g = gap(c);
        if ((prev_g > 0.0) != (g > 0.0) && std::isfinite(prev_g) && std::isfinite(g)) {
            double lo = std::log(prev_c), hi = std::log(c);
            double glo = prev_g;
            for (int k = 0; k < 40; ++k) {
                const double mid = 0.5 * (lo + hi);
                const double gm = gap(std::exp(mid));
                if ((gm > 0.0) == (glo > 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            levels.push_back(std::exp(0.5 * (lo + hi)));
        }
        prev_c = c;
        prev_g = g;
    }
    const double target = std::log(preferred);
    std::sort(levels.begin(), levels.end(), [&](double a, double b) {
        return std::abs(std::log(a) - target) < std::abs(std::log(b) - target);
    });
    return levels;
}

}  // namespace detail

/// Picard first; if it stalls, collapses to u = 0 or diverges, Newton from
/// Picard's best iterate; then Newton from levels where ‖T(c w)‖ = c.
inline SolutionBundle auto_solve(const DiscreteOperator& op, const ConeData& cone, const SolverConfig& cfg) {
    PicardTrace trace;
    auto picard = picard_solve(op, cone, cfg, &trace, true);
    if (picard.positive()) return picard;

    SolutionBundle best = picard;
    auto consider = [&](SolutionBundle b) {
        if (b.positive()) return true;
        if (!best.positive() && b.r_fp / (1.0 + b.norm) < best.r_fp / (1.0 + best.norm) && b.norm > kTrivialNorm) {
            best = std::move(b);
        }
        return false;
    };

    const auto& start = trace.best_iterate.empty() ? trace.last_iterate : trace.best_iterate;
    if (!start.empty() && sup_norm(start) > 1e-6 && sup_norm(start) < 1e10) {
        SolutionBundle warm;
        warm.u = start;
        auto nb = newton_solve(op, cone, cfg, warm);
        nb.iterations += static_cast<int>(trace.residuals.size());
        if (consider(nb)) {
            nb.method = "picard+newton";
            return nb;
        }
    }

    auto shape = detail::starting_point(op.spec(), cone, cfg);
    for (auto& f : shape) {
        const double m = f.sup_norm();
        if (m > 0.0) {
            for (auto& v : f.mutable_values()) v /= m;
        }
    }
    for (double c : detail::balanced_levels(op, shape, cfg.level)) {
        // a few normalised sweeps refine the shape at the balanced level
        std::vector<GridFunction> w = shape;
        double level = c;
        for (int sweep = 0; sweep < 4; ++sweep) {
            std::vector<GridFunction> scaled = w;
            for (auto& f : scaled) {
                for (auto& v : f.mutable_values()) v *= level;
            }
            const auto images = op.apply(scaled).images();
            const double tn = sup_norm(images);
            if (!(tn > 0.0) || !std::isfinite(tn)) break;
            w = images;
            for (auto& f : w) {
                for (auto& v : f.mutable_values()) v /= tn;
            }
            level = std::sqrt(level * tn);
        }
        SolutionBundle warm;
        warm.u = w;
        for (auto& f : warm.u) {
            for (auto& v : f.mutable_values()) v *= level;
        }
        auto nb = newton_solve(op, cone, cfg, warm);
        if (consider(nb)) {
            nb.method = "level+newton";
            return nb;
        }
    }
    if (best.message.empty()) best.message = "no positive fixed point found";
    return best;
}

inline SolutionBundle solve(const DiscreteOperator& op, const ConeData& cone, const SolverConfig& cfg) {
    switch (cfg.method) {
        case SolveMethod::Picard:
            return picard_solve(op, cone, cfg);
        case SolveMethod::Newton:
            return newton_solve(op, cone, cfg);
        case SolveMethod::Auto:
            return auto_solve(op, cone, cfg);
    }
    return auto_solve(op, cone, cfg);
}

inline SolutionBundle solve(const ProblemSpec& spec, const SolverConfig& cfg) {
    const DiscreteOperator op(spec, cfg.grid);
    return solve(op, compute_rho(spec, cfg.grid), cfg);
}

/// Starts from the levels α, β and √(αβ) and keeps every distinct positive
/// fixed point (distinct: sup distance > 1e-4 (1 + ‖u‖)). No completeness claim.
inline std::vector<SolutionBundle> multi_start(const DiscreteOperator& op, const ConeData& cone, SolverConfig cfg,
                                               double alpha, double beta) {
    if (!(alpha > 0.0 && beta > 0.0)) throw SpecError("alpha and beta must be positive");
    std::vector<SolutionBundle> found;
    for (double level : {alpha, beta, std::sqrt(alpha * beta)}) {
        cfg.level = level;
        auto b = solve(op, cone, cfg);
        if (!b.positive()) continue;
        const bool duplicate = std::any_of(found.begin(), found.end(), [&](const SolutionBundle& other) {
            return sup_distance(other.u, b.u) <= 1e-4 * (1.0 + std::max(b.norm, other.norm));
        });
        if (!duplicate) found.push_back(std::move(b));
    }
    return found;
}

// ---------------------------------------------------------------------------

struct VerifyOptions {
    double fp_tolerance = 1e-8;    // relative to 1 + ‖u‖
    double ode_tolerance = 1e-4;   // relative to max |f|
    double cone_tolerance = 1e-8;  // relative to 1 + ‖u‖
    double boundary_tolerance = 1e-12;
    double sandwich_slack = 1e-6;
};

struct VerificationReport {
    double r_fp = 0.0;
    double r_ode = 0.0;
    double norm = 0.0;
    std::vector<double> sigma;
    double sigma_drift = 0.0;  // |fresh σ - stored σ|
    bool fixed_point_ok = false;
    bool ode_ok = false;
    bool boundary_ok = false;
    bool positive = false;
    MembershipReport cone;
    std::optional<bool> sandwich;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::vector<std::string> failures;

    bool passed() const { return failures.empty(); }
};

/// Re-checks a candidate: fixed-point residual from a fresh T, ODE residual,
/// boundary values, cone membership and, when α and β are given,
/// min{α,β} ≤ ‖u‖ ≤ max{α,β}.
inline VerificationReport verify_solution(const ProblemSpec& spec, const SolutionBundle& bundle,
                                          std::optional<double> alpha = std::nullopt,
                                          std::optional<double> beta = std::nullopt, const VerifyOptions& opt = {}) {
    VerificationReport rep;
    const int grid = bundle.u.front().panels();
    const DiscreteOperator op(spec, grid);
    const auto cone = compute_rho(spec, grid);
    rep.norm = sup_norm(bundle.u);
    const auto out = op.apply(bundle.u);
    rep.r_fp = sup_distance(out.images(), bundle.u);
    rep.sigma = detail::sigmas(out);
    for (std::size_t i = 0; i < rep.sigma.size() && i < bundle.sigma.size(); ++i) {
        rep.sigma_drift = std::max(rep.sigma_drift, std::abs(rep.sigma[i] - bundle.sigma[i]));
    }
    rep.r_ode = ode_residual(spec, bundle.u);
    rep.fixed_point_ok = rep.r_fp <= opt.fp_tolerance * (1.0 + rep.norm);
    rep.ode_ok = rep.r_ode <= opt.ode_tolerance;
    double boundary = 0.0;
    for (const auto& ui : bundle.u) boundary = std::max({boundary, std::abs(ui[0]), std::abs(ui[ui.size() - 1])});
    rep.boundary_ok = boundary <= opt.boundary_tolerance * (1.0 + rep.norm);
    rep.cone = in_cone(bundle.u, cone, opt.cone_tolerance * (1.0 + rep.norm));
    rep.positive = rep.norm > kTrivialNorm;

    if (!rep.fixed_point_ok) rep.failures.push_back("fixed-point residual " + format_number(rep.r_fp));
    if (!rep.ode_ok) rep.failures.push_back("ODE residual " + format_number(rep.r_ode));
    if (!rep.boundary_ok) rep.failures.push_back("boundary values not zero");
    if (!rep.cone.member()) rep.failures.push_back("not in the cone");
    if (!rep.positive) rep.failures.push_back("trivial solution");
    if (alpha && beta) {
        rep.alpha = alpha;
        rep.beta = beta;
        const double lo = std::min(*alpha, *beta);
        const double hi = std::max(*alpha, *beta);
        rep.sandwich = rep.norm >= lo - opt.sandwich_slack && rep.norm <= hi + opt.sandwich_slack;
        if (!*rep.sandwich) rep.failures.push_back("norm outside [min(alpha,beta), max(alpha,beta)]");
    }
    return rep;
}

}  // namespace conebvp
