#pragma once

#include "conebvp/error.hpp"
#include "conebvp/problem.hpp"
#include "conebvp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace conebvp {

/// Cone constant and the cumulative table of 1/p it was computed from.
struct ConeData {
    double rho = 0.25;
    GridFunction inv_p_cumulative;  // ∫_0^{t_j} ds / p(s)
    double total = 1.0;             // ∫_0^1 ds / p(s)

    int panels() const noexcept { return inv_p_cumulative.panels(); }

    /// ∫_0^t ds / p(s), cubic interpolation between nodes.
    double inv_p_integral(double t) const { return sample_between(inv_p_cumulative, t); }
};

/// ρ = [∫_0^1 ds/p]^{-1} · min{∫_0^{1/4} ds/p, ∫_{3/4}^1 ds/p}.
inline ConeData compute_rho(const ProblemSpec& spec, int panels = kDefaultGrid) {
    auto inv_p = [&spec](double s) {
        const double pv = spec.p(s);
        if (!(pv > 0.0)) throw NumericalError("nonpositive weight p(" + format_number(s) + ") = " + format_number(pv));
        return 1.0 / pv;
    };
    ConeData cone;
    cone.inv_p_cumulative = cumulative(inv_p, panels);
    cone.total = integrate_on_grid(inv_p, 0.0, 1.0, panels);
    const double head = integrate_on_grid(inv_p, 0.0, 0.25, panels);
    const double tail = integrate_on_grid(inv_p, 0.75, 1.0, panels);
    cone.rho = std::min(head, tail) / cone.total;
    return cone;
}

/// Lower profile t ↦ P^{-1} min{∫_0^t ds/p, ∫_t^1 ds/p} |u|_0, which bounds
/// u from below whenever q φ(p u') is nonincreasing and u ≥ 0.
inline GridFunction harnack_floor(const GridFunction& u, const ConeData& cone) {
    const double norm = u.sup_norm();
    std::vector<double> v(u.size());
    const bool same_grid = u.panels() == cone.panels();
    for (int j = 0; j <= u.panels(); ++j) {
        const double left = same_grid ? cone.inv_p_cumulative[static_cast<std::size_t>(j)]
                                      : cone.inv_p_integral(u.node(j));
        const double right = cone.total - left;
        v[static_cast<std::size_t>(j)] = std::max(0.0, std::min(left, right)) / cone.total * norm;
    }
    return GridFunction(std::move(v), u.tag());
}

struct ComponentMembership {
    double sup_norm = 0.0;
    double min_value = 0.0;         // min over all nodes
    double min_middle = 0.0;        // min over nodes in [1/4, 3/4]
    double positivity_margin = 0.0; // min_value + tol
    double harnack_margin = 0.0;    // min_middle - ρ |u|_0 + tol
    bool member = true;

    double worst_margin() const noexcept { return std::min(positivity_margin, harnack_margin); }
};

struct MembershipReport {
    std::vector<ComponentMembership> components;
    double tolerance = 0.0;

    bool member() const {
        return std::all_of(components.begin(), components.end(), [](const auto& c) { return c.member; });
    }

    double worst_margin() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& c : components) m = std::min(m, c.worst_margin());
        return m;
    }
};

/// Membership in K = {u : u_i ≥ 0, min_{[1/4,3/4]} u_i ≥ ρ |u_i|_0}, tested at
/// grid nodes with an absolute tolerance.
inline MembershipReport in_cone(std::span<const GridFunction> u, const ConeData& cone, double tol) {
    MembershipReport report;
    report.tolerance = tol;
    for (const auto& ui : u) {
        ComponentMembership c;
        c.sup_norm = ui.sup_norm();
        c.min_value = std::numeric_limits<double>::infinity();
        c.min_middle = std::numeric_limits<double>::infinity();
        const int n = ui.panels();
        for (int j = 0; j <= n; ++j) {
            const double v = ui[static_cast<std::size_t>(j)];
            c.min_value = std::min(c.min_value, v);
            if (4 * j >= n && 4 * j <= 3 * n) c.min_middle = std::min(c.min_middle, v);
        }
        c.positivity_margin = c.min_value + tol;
        c.harnack_margin = c.min_middle - cone.rho * c.sup_norm + tol;
        c.member = c.positivity_margin >= 0.0 && c.harnack_margin >= 0.0;
        report.components.push_back(c);
    }
    return report;
}

}  // namespace conebvp
