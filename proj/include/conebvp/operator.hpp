#pragma once

#include "conebvp/error.hpp"
#include "conebvp/problem.hpp"
#include "conebvp/quadrature.hpp"
#include "conebvp/roots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace conebvp {

/// φ(x) = |x|^{p-2} x, with φ(0) = 0 for every p > 1.
inline double phi(double x, double p) {
    if (x == 0.0) return 0.0;
    if (p == 2.0) return x;
    return std::copysign(std::pow(std::abs(x), p - 1.0), x);
}

/// φ^{-1}(y) = sign(y) |y|^{1/(p-1)}.
inline double phi_inv(double y, double p) {
    if (y == 0.0) return 0.0;
    if (p == 2.0) return y;
    if (p == 3.0) return std::copysign(std::sqrt(std::abs(y)), y);
    return std::copysign(std::pow(std::abs(y), 1.0 / (p - 1.0)), y);
}

/// φ^{-1} with the exponent fixed up front.
class PhiInverse {
public:
    explicit PhiInverse(double p) : p_(p), exponent_(1.0 / (p - 1.0)) {
        if (!(p > 1.0)) throw SpecError("phi exponent must be > 1");
    }

    double operator()(double y) const {
        if (y == 0.0) return 0.0;
        if (p_ == 2.0) return y;
        if (p_ == 3.0) return std::copysign(std::sqrt(std::abs(y)), y);
        return std::copysign(std::pow(std::abs(y), exponent_), y);
    }

    double p() const noexcept { return p_; }

private:
    double p_;
    double exponent_;
};

/// One component of T u.
struct ComponentImage {
    GridFunction image;
    double sigma = 0.5;
    double branch_mismatch = 0.0;  // |left branch(σ) - right branch(σ)|
    double peak = 0.0;             // T^i u(σ)
    bool degenerate = false;       // forcing vanished identically: image is 0
    int theta_evaluations = 0;
};

struct OperatorOutput {
    std::vector<ComponentImage> components;

    std::vector<GridFunction> images() const {
        std::vector<GridFunction> out;
        out.reserve(components.size());
        for (const auto& c : components) out.push_back(c.image);
        return out;
    }

    double norm() const {
        double m = 0.0;
        for (const auto& c : components) m = std::max(m, c.image.sup_norm());
        return m;
    }
};

/// Running integral of the forcing τ ↦ f^i(τ, u(τ)) for one component,
/// together with its values at every quadrature node of the master grid.
struct ForcingTable {
    PiecewiseCubicIntegral integral;
    std::vector<double> at_quadrature;  // ∫_0^s at the 5 Gauss nodes of each panel
    double total = 0.0;
};

struct SigmaOptions {
    double tol = 1e-12;
    int max_iter = 80;
    std::optional<double> hint;  // previous σ; tried first with a narrow bracket
};

/// Discretisation of the fixed-point operator T on a uniform master grid.
///
/// For u ≥ 0 and each component i, T^i u is the two-branch integral built
/// around σ_i, the root of
///   Θ^i u(t) = ∫_0^1 (1/p(s)) φ^{-1}((F(t) - F(s)) / q(s)) ds,
/// where F(t) = ∫_0^t f^i(τ, u(τ)) dτ. (The two integrals of the defining
/// formula combine into one because φ^{-1} is odd.) Forcing is sampled at the
/// grid nodes and integrated through its piecewise cubic interpolant, so one
/// application costs O(N) per Θ evaluation.
class DiscreteOperator {
public:
    DiscreteOperator(ProblemSpec spec, int panels = kDefaultGrid)
        : spec_(std::move(spec)), panels_(panels), phi_inv_(spec_.phi_exponent) {
        check_structure(spec_);
        if (panels < 16 || panels % 2 != 0) throw NumericalError("grid must have an even panel count >= 16");
        const double h = 1.0 / panels;
        const auto count = static_cast<std::size_t>(panels) * 5;
        nodes_.resize(count);
        weights_.resize(count);
        inv_p_.resize(count);
        inv_q_.resize(count);
        for (int k = 0; k < panels; ++k) {
            for (std::size_t m = 0; m < 5; ++m) {
                const auto [s, w] = GaussLegendre5::node(k * h, (k + 1) * h, m);
                const std::size_t idx = static_cast<std::size_t>(k) * 5 + m;
                nodes_[idx] = s;
                weights_[idx] = w;
                inv_p_[idx] = 1.0 / checked_weight(spec_.weight_p, s, "p");
                inv_q_[idx] = 1.0 / checked_weight(spec_.weight_q, s, "q");
            }
        }
        if (const auto* sep = std::get_if<SeparableNonlinearity>(&spec_.nonlinearity)) {
            h_nodes_.resize(static_cast<std::size_t>(spec_.n));
            for (int i = 0; i < spec_.n; ++i) {
                auto& row = h_nodes_[static_cast<std::size_t>(i)];
                row.resize(static_cast<std::size_t>(panels) + 1);
                for (int j = 0; j <= panels; ++j) {
                    row[static_cast<std::size_t>(j)] =
                        spec_.lambda * evaluate(sep->h[static_cast<std::size_t>(i)], static_cast<double>(j) / panels);
                }
            }
        }
    }

    const ProblemSpec& spec() const noexcept { return spec_; }
    int panels() const noexcept { return panels_; }
    int components() const noexcept { return spec_.n; }

    /// f^i(t_j, u(t_j)) at every node, one row per component.
    std::vector<std::vector<double>> forcing(std::span<const GridFunction> u) const {
        check_input(u);
        const auto n = static_cast<std::size_t>(spec_.n);
        std::vector<std::vector<double>> out(n, std::vector<double>(static_cast<std::size_t>(panels_) + 1));
        std::array<double, kMaxComponents> point{};
        const std::span<const double> args(point.data(), n);
        for (int j = 0; j <= panels_; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            const double t = static_cast<double>(j) / panels_;
            for (std::size_t k = 0; k < n; ++k) point[k] = u[k][jj];
            for (std::size_t i = 0; i < n; ++i) {
                if (!h_nodes_.empty()) {
                    const double hv = h_nodes_[i][jj];
                    out[i][jj] = hv == 0.0 ? 0.0 : hv * evaluate(std::get<SeparableNonlinearity>(spec_.nonlinearity).g[i], t, args);
                } else {
                    out[i][jj] = spec_.f(static_cast<int>(i), t, args);
                }
            }
        }
        return out;
    }

    ForcingTable forcing_table(std::span<const double> samples) const {
        if (static_cast<int>(samples.size()) != panels_ + 1) throw NumericalError("forcing samples do not match the grid");
        ForcingTable table;
        table.integral.rebuild(samples);
        table.at_quadrature.resize(nodes_.size());
        for (std::size_t idx = 0; idx < nodes_.size(); ++idx) table.at_quadrature[idx] = table.integral(nodes_[idx]);
        table.total = table.integral.total();
        return table;
    }

    /// ∫_lo^hi (1/p(s)) φ^{-1}((level - F(s)) / q(s)) ds for the running
    /// forcing integral F in `table`. Panels of the master grid are used
    /// as they are, except those cut by lo or hi, which get freshly evaluated
    /// weights. `singular` is the point where level = F(s); within one panel
    /// width of it the graded rule takes over.
    double flux_integral(const ForcingTable& table, double level, double lo, double hi,
                         std::optional<double> singular = std::nullopt) const {
        if (!(lo < hi)) return 0.0;
        if (!singular || !(*singular >= lo && *singular <= hi)) return plain_flux(table, level, lo, hi);
        const double t = *singular;
        const double h = 1.0 / panels_;
        const double a = std::max(lo, t - h);
        const double b = std::min(hi, t + h);
        auto integrand = [&](double s) {
            return phi_inv_((level - table.integral(s)) / spec_.q(s)) / spec_.p(s);
        };
        double sum = plain_flux(table, level, lo, a) + plain_flux(table, level, b, hi);
        if (t > a) sum += GaussLegendre5::apply_graded(integrand, a, t, true);
        if (b > t) sum += GaussLegendre5::apply_graded(integrand, t, b, false);
        return sum;
    }

    /// Θ^i u(t) for the forcing summarised by `table`.
    double theta(const ForcingTable& table, double t) const {
        return flux_integral(table, table.integral(t), 0.0, 1.0, t);
    }

    /// Root of Θ^i u. When Θ vanishes on a whole interval (the forcing is zero
    /// there) the midpoint of that interval is returned.
    double find_sigma(const ForcingTable& table, const SigmaOptions& opt = {}, int* evaluations = nullptr) const {
        if (!(table.total > 0.0)) throw NumericalError("theta has no sign change: forcing vanishes identically");
        int evals = 0;
        auto th = [&](double t) {
            ++evals;
            return theta(table, t);
        };
        double a = 0.0, b = 1.0, fa = 0.0, fb = 0.0;
        bool bracketed = false;
        if (opt.hint && *opt.hint > 0.0 && *opt.hint < 1.0) {
            const double delta = 4.0 / panels_;
            a = std::max(0.0, *opt.hint - delta);
            b = std::min(1.0, *opt.hint + delta);
            fa = th(a);
            fb = th(b);
            bracketed = fa <= 0.0 && fb >= 0.0;
        }
        if (!bracketed) {
            a = 0.0;
            b = 1.0;
            fa = th(a);
            fb = th(b);
            if (!(fa < 0.0 && fb > 0.0)) throw NumericalError("theta has no sign change on [0, 1]");
        }
        const auto root = roots::brent(th, a, b, fa, fb, opt.tol, opt.max_iter);
        double sigma = root.x;

        // A flat stretch of F is a flat stretch of Θ.
        const double level = table.integral(sigma);
        const double eps = 1e-13 * std::max(1.0, table.total);
        if (level <= eps || level >= table.total - eps) {
            if (evaluations) *evaluations = evals;
            return sigma;
        }
        const auto left = roots::bisect_predicate(
            [&](double s) { return table.integral(s) >= level - eps; }, 0.0, sigma, 60);
        const auto right = roots::bisect_predicate(
            [&](double s) { return table.integral(s) > level + eps; }, sigma, 1.0, 60);
        if (right.first - left.second > 1e-9) sigma = 0.5 * (left.second + right.first);

        if (evaluations) *evaluations = evals;
        return sigma;
    }

    /// T^i u on the grid for a given σ.
    ComponentImage image(const ForcingTable& table, double sigma) const {
        ComponentImage out;
        out.sigma = sigma;
        const double fs = table.integral(sigma);
        const double h = 1.0 / panels_;
        auto w_at = [&](std::size_t idx) {
            return weights_[idx] * inv_p_[idx] * phi_inv_((fs - table.at_quadrature[idx]) * inv_q_[idx]);
        };
        auto integrand = [&](double s) { return phi_inv_((fs - table.integral(s)) / spec_.q(s)) / spec_.p(s); };
        auto panel_sum = [&](int k) {
            double sum = 0.0;
            for (std::size_t m = 0; m < 5; ++m) sum += w_at(static_cast<std::size_t>(k) * 5 + m);
            return sum;
        };

        const int split = panel_of(sigma);
        std::vector<double> v(static_cast<std::size_t>(panels_) + 1, 0.0);
        // Nodes within one panel of σ (and the peak itself) are reached by the
        // graded rule from σ, the rest by whole panels from the ends.
        const int lj = std::max(0, split - 1);
        const int rj = std::min(panels_, split + 2);
        // left branch: ∫_0^t
        for (int k = 0; k < lj; ++k) v[static_cast<std::size_t>(k) + 1] = v[static_cast<std::size_t>(k)] + panel_sum(k);
        const double left_peak =
            v[static_cast<std::size_t>(lj)] + GaussLegendre5::apply_graded(integrand, lj * h, sigma, true);
        for (int k = lj + 1; k <= split; ++k) {
            const double t = k * h;
            if (t < sigma) v[static_cast<std::size_t>(k)] = left_peak - GaussLegendre5::apply_graded(integrand, t, sigma, true);
        }
        // right branch: -∫_t^1
        v[static_cast<std::size_t>(panels_)] = 0.0;
        for (int k = panels_ - 1; k >= rj; --k) {
            v[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k) + 1] - panel_sum(k);
        }
        const double right_peak =
            v[static_cast<std::size_t>(rj)] - GaussLegendre5::apply_graded(integrand, sigma, rj * h, false);
        for (int k = split; k < rj; ++k) {
            const double t = k * h;
            if (t >= sigma) v[static_cast<std::size_t>(k)] = right_peak + GaussLegendre5::apply_graded(integrand, sigma, t, false);
        }
        v.front() = 0.0;
        v.back() = 0.0;

        out.branch_mismatch = std::abs(left_peak - right_peak);
        out.peak = 0.5 * (left_peak + right_peak);
        out.image = GridFunction(std::move(v));
        return out;
    }

    /// T u for every component.
    OperatorOutput apply(std::span<const GridFunction> u, std::span<const double> sigma_hints = {}) const {
        const auto rows = forcing(u);
        OperatorOutput out;
        for (int i = 0; i < spec_.n; ++i) {
            const auto& row = rows[static_cast<std::size_t>(i)];
            const auto table = forcing_table(row);
            if (!(table.total > 0.0)) {
                ComponentImage zero;
                zero.image = GridFunction::zeros(panels_, i);
                zero.degenerate = true;
                out.components.push_back(std::move(zero));
                continue;
            }
            SigmaOptions opt;
            if (static_cast<std::size_t>(i) < sigma_hints.size()) opt.hint = sigma_hints[static_cast<std::size_t>(i)];
            int evals = 0;
            const double sigma = find_sigma(table, opt, &evals);
            auto img = image(table, sigma);
            img.image.set_tag(i);
            img.theta_evaluations = evals;
            out.components.push_back(std::move(img));
        }
        return out;
    }

private:
    double plain_flux(const ForcingTable& table, double level, double lo, double hi) const {
        if (!(lo < hi)) return 0.0;
        const double h = 1.0 / panels_;
        auto integrand = [&](double s) {
            return phi_inv_((level - table.integral(s)) / spec_.q(s)) / spec_.p(s);
        };
        double sum = 0.0;
        for (int k = panel_of(lo); k < panels_; ++k) {
            const double a = k * h;
            const double b = (k + 1) * h;
            if (a >= hi) break;
            const double from = std::max(a, lo);
            const double to = std::min(b, hi);
            if (!(to > from)) continue;
            if (from == a && to == b) {
                const std::size_t base = static_cast<std::size_t>(k) * 5;
                for (std::size_t m = 0; m < 5; ++m) {
                    const std::size_t idx = base + m;
                    sum += weights_[idx] * inv_p_[idx] * phi_inv_((level - table.at_quadrature[idx]) * inv_q_[idx]);
                }
            } else {
                sum += GaussLegendre5::apply(integrand, from, to);
            }
        }
        return sum;
    }

    static double checked_weight(const ExprAst& w, double s, const char* name) {
        const double v = evaluate(w, s);
        if (!(v > 0.0)) {
            throw NumericalError(std::string("nonpositive weight ") + name + "(" + format_number(s) + ") = " + format_number(v));
        }
        return v;
    }

    int panel_of(double t) const {
        return std::clamp(static_cast<int>(std::floor(t * panels_)), 0, panels_ - 1);
    }

    void check_input(std::span<const GridFunction> u) const {
        if (static_cast<int>(u.size()) != spec_.n) throw NumericalError("operator input has the wrong component count");
        for (const auto& ui : u) {
            if (ui.panels() != panels_) throw NumericalError("operator input is on a different grid");
            for (double v : ui.values()) {
                if (v < 0.0) throw NumericalError("operator input must be nonnegative");
            }
        }
    }

    ProblemSpec spec_;
    int panels_;
    PhiInverse phi_inv_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> inv_p_;
    std::vector<double> inv_q_;
    std::vector<std::vector<double>> h_nodes_;  // λ h_i(t_j), separable problems only
};

// Free-function forms. Each builds a DiscreteOperator on the grid of `u`;
// hot loops should hold on to one operator instead.

inline double theta(const ProblemSpec& spec, int i, std::span<const GridFunction> u, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw NumericalError("theta: t outside [0, 1]");
    const DiscreteOperator op(spec, u.front().panels());
    const auto rows = op.forcing(u);
    return op.theta(op.forcing_table(rows.at(static_cast<std::size_t>(i))), t);
}

inline double find_sigma(const ProblemSpec& spec, int i, std::span<const GridFunction> u, double tol = 1e-12) {
    const DiscreteOperator op(spec, u.front().panels());
    const auto rows = op.forcing(u);
    SigmaOptions opt;
    opt.tol = tol;
    return op.find_sigma(op.forcing_table(rows.at(static_cast<std::size_t>(i))), opt);
}

inline OperatorOutput apply_T(const ProblemSpec& spec, std::span<const GridFunction> u) {
    const DiscreteOperator op(spec, u.front().panels());
    return op.apply(u);
}

}  // namespace conebvp
