#pragma once

#include "conebvp/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace conebvp {

inline constexpr int kDefaultGrid = 512;

/// 5-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre5 {
    static constexpr std::array<double, 5> nodes{
        -0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
        0.5384693101056830910363144, 0.9061798459386639927976269};
    static constexpr std::array<double, 5> weights{
        0.2369268850561890875142640, 0.4786286704993664680412915, 0.5688888888888888888888889,
        0.4786286704993664680412915, 0.2369268850561890875142640};

    /// Apply the rule on [a, b].
    template <class F>
    static double apply(F&& f, double a, double b) {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        double sum = 0.0;
        for (std::size_t k = 0; k < 5; ++k) sum += weights[k] * f(mid + half * nodes[k]);
        return half * sum;
    }

    /// ∫_a^b f for an integrand with a power-type endpoint singularity, such as
    /// (b - s)^{1/(p-1)}. The map s = end ∓ (b - a) w^3 flattens it, and the
    /// rule runs on two halves of w ∈ [0, 1].
    template <class F>
    static double apply_graded(F&& f, double a, double b, bool singular_at_b) {
        const double len = b - a;
        auto g = [&](double w) {
            const double w3 = w * w * w;
            const double s = singular_at_b ? b - len * w3 : a + len * w3;
            return 3.0 * len * w * w * f(s);
        };
        return apply(g, 0.0, 0.5) + apply(g, 0.5, 1.0);
    }

    /// Node k mapped onto [a, b] and its scaled weight.
    static std::pair<double, double> node(double a, double b, std::size_t k) {
        const double half = 0.5 * (b - a);
        return {0.5 * (a + b) + half * nodes[k], half * weights[k]};
    }
};

/// Composite 5-point Gauss-Legendre over `panels` equal panels of [a, b].
template <class F>
double integrate(F&& f, double a, double b, int panels) {
    if (!(a <= b)) throw NumericalError("integrate: lower limit exceeds upper limit");
    if (panels < 1) throw NumericalError("integrate: panel count must be positive");
    if (a == b) return 0.0;
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + h * k;
        const double hi = (k + 1 == panels) ? b : a + h * (k + 1);
        sum += GaussLegendre5::apply(f, lo, hi);
    }
    return sum;
}

/// Integral over [a, b] ⊂ [0, 1] whose panel boundaries are the nodes of the
/// uniform grid with `grid` panels; the end panels are clipped at a and b.
template <class F>
double integrate_on_grid(F&& f, double a, double b, int grid) {
    if (!(a <= b)) throw NumericalError("integrate_on_grid: lower limit exceeds upper limit");
    if (a == b) return 0.0;
    const double h = 1.0 / grid;
    int k = std::clamp(static_cast<int>(std::floor(a * grid)), 0, grid - 1);
    double sum = 0.0;
    for (; k < grid; ++k) {
        const double lo = std::max(a, k * h);
        const double hi = std::min(b, (k + 1) * h);
        if (lo >= b) break;
        if (hi > lo) sum += GaussLegendre5::apply(f, lo, hi);
    }
    return sum;
}

/// Real function sampled at the nodes t_j = j/N of a uniform grid on [0, 1].
class GridFunction {
public:
    GridFunction() = default;

    explicit GridFunction(std::vector<double> values, int tag = -1)
        : values_(std::move(values)), tag_(tag) {
        const auto panels = static_cast<int>(values_.size()) - 1;
        if (panels < 16 || panels % 2 != 0) {
            throw NumericalError("grid function needs an even panel count >= 16, got " +
                                 std::to_string(panels));
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw NumericalError("grid function value is not finite");
        }
    }

    static GridFunction zeros(int panels, int tag = -1) {
        return GridFunction(std::vector<double>(static_cast<std::size_t>(panels) + 1, 0.0), tag);
    }

    template <class F>
    static GridFunction sample(F&& f, int panels, int tag = -1) {
        std::vector<double> v(static_cast<std::size_t>(panels) + 1);
        for (int j = 0; j <= panels; ++j) v[static_cast<std::size_t>(j)] = f(static_cast<double>(j) / panels);
        return GridFunction(std::move(v), tag);
    }

    int panels() const noexcept { return static_cast<int>(values_.size()) - 1; }
    std::size_t size() const noexcept { return values_.size(); }
    double node(int j) const noexcept { return static_cast<double>(j) / panels(); }
    double step() const noexcept { return 1.0 / panels(); }

    double operator[](std::size_t j) const { return values_[j]; }
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& mutable_values() noexcept { return values_; }

    int tag() const noexcept { return tag_; }
    void set_tag(int tag) noexcept { tag_ = tag; }

    /// Sup norm |u|_0 over the nodes.
    double sup_norm() const noexcept {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::vector<double> values_;
    int tag_ = -1;
};

namespace detail {

// Node offsets (relative to the left node of the panel) of the 4-point stencil
// used for panel k: centered in the interior, one-sided at the ends.
inline int stencil_start(int panel, int panels) { return std::clamp(panel - 1, 0, panels - 3); }

// Lagrange weights at local coordinate x of the cubic through offsets o..o+3.
inline std::array<double, 4> lagrange_weights(double x, int first_offset) {
    std::array<double, 4> w{};
    for (int m = 0; m < 4; ++m) {
        const double xm = first_offset + m;
        double l = 1.0;
        for (int k = 0; k < 4; ++k) {
            if (k == m) continue;
            const double xk = first_offset + k;
            l *= (x - xk) / (xm - xk);
        }
        w[static_cast<std::size_t>(m)] = l;
    }
    return w;
}

// Monomial coefficients (in x) of the Lagrange basis polynomials through
// offsets o..o+3.
inline std::array<std::array<double, 4>, 4> lagrange_monomials(int first_offset) {
    std::array<std::array<double, 4>, 4> out{};
    for (int m = 0; m < 4; ++m) {
        std::array<double, 4> poly{1.0, 0.0, 0.0, 0.0};
        double denom = 1.0;
        const double xm = first_offset + m;
        int degree = 0;
        for (int k = 0; k < 4; ++k) {
            if (k == m) continue;
            const double xk = first_offset + k;
            // poly *= (x - xk)
            for (int d = degree + 1; d >= 1; --d) {
                poly[static_cast<std::size_t>(d)] =
                    poly[static_cast<std::size_t>(d - 1)] - xk * poly[static_cast<std::size_t>(d)];
            }
            poly[0] = -xk * poly[0];
            ++degree;
            denom *= (xm - xk);
        }
        for (auto& c : poly) c /= denom;
        out[static_cast<std::size_t>(m)] = poly;
    }
    return out;
}

}  // namespace detail

/// F(t_j) = ∫_0^{t_j} f, panel by panel with the Gauss-Legendre rule.
template <class F>
GridFunction cumulative(F&& f, int panels) {
    if (panels < 16 || panels % 2 != 0) {
        throw NumericalError("cumulative: panel count must be even and >= 16");
    }
    std::vector<double> v(static_cast<std::size_t>(panels) + 1, 0.0);
    const double h = 1.0 / panels;
    for (int k = 0; k < panels; ++k) {
        const double lo = k * h;
        const double hi = (k + 1 == panels) ? 1.0 : (k + 1) * h;
        v[static_cast<std::size_t>(k) + 1] = v[static_cast<std::size_t>(k)] + GaussLegendre5::apply(f, lo, hi);
    }
    return GridFunction(std::move(v));
}

/// Cubic interpolation of a grid function at s ∈ [0, 1]; exact at nodes.
inline double sample_between(const GridFunction& g, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw NumericalError("sample_between: point outside [0, 1]");
    const int n = g.panels();
    const double scaled = s * n;
    const int k = std::min(static_cast<int>(std::floor(scaled)), n - 1);
    const double x = scaled - k;
    if (x == 0.0) return g[static_cast<std::size_t>(k)];
    const int start = detail::stencil_start(k, n);
    const auto w = detail::lagrange_weights(x, start - k);
    double sum = 0.0;
    for (std::size_t m = 0; m < 4; ++m) sum += w[m] * g[static_cast<std::size_t>(start) + m];
    return sum;
}

/// Exact antiderivative of the piecewise cubic interpolant of node samples.
/// Each panel carries its own cubic, so F(s) costs O(1) at any s and F(t_j) is
/// the running panel sum. Panels use the stencils of sample_between unless a
/// shifted 4-point stencil has a much smaller third difference; that keeps a
/// kink in the data (say max(0, c - t)) from leaking a spurious lobe into the
/// neighbouring panel, while smooth data keep the centred stencil.
class PiecewiseCubicIntegral {
public:
    PiecewiseCubicIntegral() = default;

    explicit PiecewiseCubicIntegral(std::span<const double> samples) { rebuild(samples); }

    void rebuild(std::span<const double> samples) {
        panels_ = static_cast<int>(samples.size()) - 1;
        if (panels_ < 3) throw NumericalError("piecewise cubic integral needs at least 4 samples");
        h_ = 1.0 / panels_;
        coeffs_.assign(static_cast<std::size_t>(panels_), {});
        at_nodes_.assign(static_cast<std::size_t>(panels_) + 1, 0.0);
        const auto left = detail::lagrange_monomials(0);
        const auto mid = detail::lagrange_monomials(-1);
        const auto right = detail::lagrange_monomials(-2);
        for (int k = 0; k < panels_; ++k) {
            const int start = stencil_for(samples, k);
            const auto& basis = (start == k) ? left : (start == k - 1 ? mid : right);
            std::array<double, 4> c{};
            for (std::size_t m = 0; m < 4; ++m) {
                const double fm = samples[static_cast<std::size_t>(start) + m];
                for (std::size_t d = 0; d < 4; ++d) c[d] += fm * basis[m][d];
            }
            // store coefficients of the antiderivative: x, x^2/2, x^3/3, x^4/4
            coeffs_[static_cast<std::size_t>(k)] = {c[0], c[1] / 2.0, c[2] / 3.0, c[3] / 4.0};
            const auto& a = coeffs_[static_cast<std::size_t>(k)];
            at_nodes_[static_cast<std::size_t>(k) + 1] =
                at_nodes_[static_cast<std::size_t>(k)] + h_ * (a[0] + a[1] + a[2] + a[3]);
        }
    }

    int panels() const noexcept { return panels_; }

    /// ∫_0^s of the interpolant.
    double operator()(double s) const {
        const double scaled = std::clamp(s, 0.0, 1.0) * panels_;
        const int k = std::min(static_cast<int>(scaled), panels_ - 1);
        const double x = scaled - k;
        const auto& a = coeffs_[static_cast<std::size_t>(k)];
        return at_nodes_[static_cast<std::size_t>(k)] + h_ * x * (a[0] + x * (a[1] + x * (a[2] + x * a[3])));
    }

    double at_node(int j) const { return at_nodes_[static_cast<std::size_t>(j)]; }
    double total() const { return at_nodes_.back(); }

private:
    int stencil_for(std::span<const double> f, int k) const {
        auto third = [&](int s) {
            const auto j = static_cast<std::size_t>(s);
            return std::abs(f[j + 3] - 3.0 * f[j + 2] + 3.0 * f[j + 1] - f[j]);
        };
        const int centred = detail::stencil_start(k, panels_);
        const double base = third(centred);
        int best = centred;
        double best_d = base;
        for (int s = std::max(k - 2, 0); s <= std::min(k, panels_ - 3); ++s) {
            const double d = third(s);
            if (d < best_d) {
                best = s;
                best_d = d;
            }
        }
        return best_d < 0.125 * base ? best : centred;
    }

    int panels_ = 0;
    double h_ = 0.0;
    std::vector<std::array<double, 4>> coeffs_;
    std::vector<double> at_nodes_;
};

}  // namespace conebvp
