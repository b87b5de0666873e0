#pragma once

#include "conebvp/cone.hpp"
#include "conebvp/error.hpp"
#include "conebvp/operator.hpp"
#include "conebvp/problem.hpp"
#include "conebvp/quadrature.hpp"
#include "conebvp/roots.hpp"
#include "conebvp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace conebvp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// γ_a

/// γ_a(t) = (ρ/2) [∫_{1/4}^t (1/p) φ^{-1}((1/q) ∫_s^t a) ds
///                + ∫_t^{3/4} (1/p) φ^{-1}((1/q) ∫_t^s a) ds],  t ∈ [1/4, 3/4].
/// `a` is sampled at the master-grid nodes and integrated through its
/// piecewise cubic interpolant, like the operator's forcing.
class GammaFunction {
public:
    GammaFunction(const DiscreteOperator& op, double rho, std::span<const double> samples)
        : op_(&op), rho_(rho), table_(op.forcing_table(samples)) {}

    double operator()(double t) const {
        if (!(t >= 0.25 && t <= 0.75)) throw NumericalError("gamma: t outside [1/4, 3/4]");
        const double at = table_.integral(t);
        const double left = op_->flux_integral(table_, at, 0.25, t, t);
        const double right = -op_->flux_integral(table_, at, t, 0.75, t);
        return 0.5 * rho_ * (left + right);
    }

private:
    const DiscreteOperator* op_;
    double rho_;
    ForcingTable table_;
};

namespace detail {

inline std::vector<double> sample_nodes(const std::function<double(double)>& a, int panels) {
    std::vector<double> v(static_cast<std::size_t>(panels) + 1);
    for (int j = 0; j <= panels; ++j) v[static_cast<std::size_t>(j)] = a(static_cast<double>(j) / panels);
    return v;
}

}  // namespace detail

inline double gamma(const ProblemSpec& spec, const std::function<double(double)>& a, double t,
                    int panels = kDefaultGrid) {
    const DiscreteOperator op(spec, panels);
    const auto cone = compute_rho(spec, panels);
    return GammaFunction(op, cone.rho, detail::sample_nodes(a, panels))(t);
}

struct WindowMinimum {
    double value = 0.0;
    double argmin = 0.5;
};

/// min of γ over [1/4, 3/4]: 65-point scan, then golden-section refinement
/// (to 1e-10 in t) around every discrete local minimum of the scan.
inline WindowMinimum minimize_on_window(const std::function<double(double)>& gamma_fn) {
    constexpr int kScan = 65;
    std::vector<double> ts(kScan), vs(kScan);
    for (int k = 0; k < kScan; ++k) {
        ts[static_cast<std::size_t>(k)] = 0.25 + 0.5 * k / (kScan - 1);
        vs[static_cast<std::size_t>(k)] = gamma_fn(ts[static_cast<std::size_t>(k)]);
    }
    WindowMinimum best{kInf, 0.5};
    for (int k = 0; k < kScan; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const bool left_ok = k == 0 || vs[kk] <= vs[kk - 1];
        const bool right_ok = k == kScan - 1 || vs[kk] <= vs[kk + 1];
        if (!(left_ok && right_ok)) continue;
        const double a = ts[static_cast<std::size_t>(std::max(k - 1, 0))];
        const double b = ts[static_cast<std::size_t>(std::min(k + 1, kScan - 1))];
        if (vs[kk] < best.value) best = {vs[kk], ts[kk]};
        const auto m = roots::golden_section(gamma_fn, a, b, 1e-10);
        if (m.fx < best.value) best = {m.fx, m.x};
    }
    return best;
}

// ---------------------------------------------------------------------------
// A_i, B_i

/// A_i = ∫_0^1 (1/p(s)) φ^{-1}((1/q(s)) ∫_0^1 h_i) ds.
inline double compute_A_i(const ProblemSpec& spec, int i, int panels = kDefaultGrid) {
    const auto& sep = spec.separable_parts();
    const auto& h = sep.h.at(static_cast<std::size_t>(i));
    const double mass = integrate_on_grid([&](double t) { return evaluate(h, t); }, 0.0, 1.0, panels);
    const PhiInverse phi_inv(spec.phi_exponent);
    return integrate_on_grid([&](double s) { return phi_inv(mass / spec.q(s)) / spec.p(s); }, 0.0, 1.0, panels);
}

/// B_i = min over [1/4, 3/4] of γ_{h_i}.
inline WindowMinimum compute_B_i(const ProblemSpec& spec, int i, int panels = kDefaultGrid) {
    const auto& sep = spec.separable_parts();
    const auto& h = sep.h.at(static_cast<std::size_t>(i));
    const DiscreteOperator op(spec, panels);
    const auto cone = compute_rho(spec, panels);
    const GammaFunction g(op, cone.rho, detail::sample_nodes([&](double t) { return evaluate(h, t); }, panels));
    return minimize_on_window([&](double t) { return g(t); });
}

// ---------------------------------------------------------------------------
// g_0 and g_∞

enum class LimitTrend { Settled, Diverging, Vanishing };

inline const char* to_string(LimitTrend t) {
    switch (t) {
        case LimitTrend::Settled:
            return "settled";
        case LimitTrend::Diverging:
            return "diverging";
        case LimitTrend::Vanishing:
            return "vanishing";
    }
    return "?";
}

struct LimitEstimate {
    double value = 0.0;            // 0 and ∞ for vanishing / diverging trends
    double range_lo = 0.0;         // spread over directions at the extreme magnitude
    double range_hi = 0.0;
    LimitTrend trend = LimitTrend::Settled;
    std::vector<double> last_decades;  // ratio at the three extreme magnitudes (outermost last)
    bool declared = false;         // user-supplied value, not an estimate
    bool truncated = false;        // large magnitudes dropped after overflow

    static LimitEstimate declared_value(double v) {
        LimitEstimate e;
        e.value = v;
        e.range_lo = e.range_hi = v;
        e.declared = true;
        e.trend = v == kInf ? LimitTrend::Diverging : (v == 0.0 ? LimitTrend::Vanishing : LimitTrend::Settled);
        return e;
    }
};

struct GLimits {
    LimitEstimate zero;
    LimitEstimate infinity;
};

struct LimitOptions {
    std::vector<double> magnitudes;  // empty: 10^-6 .. 10^6, one per decade
    int directions = 0;              // 0: n + 1 (axes and the all-ones direction)
    std::uint64_t seed = 42;

    std::vector<double> resolved_magnitudes() const {
        if (!magnitudes.empty()) return magnitudes;
        std::vector<double> m;
        for (int e = -6; e <= 6; ++e) m.push_back(std::pow(10.0, e));
        return m;
    }
};

namespace detail {

// The ratio changes by roughly 10x per decade (log-slope ≥ 0.95) in the
// direction of travel, so 1/s + c still counts.
inline bool steep(double from, double to, double s_from, double s_to) {
    const double decades = std::abs(std::log10(s_to / s_from));
    return from > 0.0 && to >= from * std::pow(10.0, 0.95 * decades);
}

// lo/hi: range over directions at the three outermost magnitudes (outermost
// last); s: the magnitudes.
inline LimitEstimate classify(const std::vector<double>& lo, const std::vector<double>& hi,
                              const std::vector<double>& s) {
    LimitEstimate e;
    e.range_lo = lo[2];
    e.range_hi = hi[2];
    for (std::size_t k = 0; k < 3; ++k) e.last_decades.push_back(0.5 * (lo[k] + hi[k]));
    if (steep(lo[0], lo[1], s[0], s[1]) && steep(lo[1], lo[2], s[1], s[2])) {
        e.trend = LimitTrend::Diverging;
        e.value = kInf;
    } else if (hi[2] == 0.0 || (steep(hi[2], hi[1], s[2], s[1]) && steep(hi[1], hi[0], s[1], s[0]))) {
        e.trend = LimitTrend::Vanishing;
        e.value = 0.0;
    } else {
        e.value = 0.5 * (lo[2] + hi[2]);
    }
    return e;
}

}  // namespace detail

/// Heuristic estimate of g_0^i = lim_{‖u‖→0} g^i(u)/φ(‖u‖) and the matching
/// limit at ∞ from samples g^i(s d)/φ(s) over the magnitudes s and sup-norm
/// unit directions d (axes, all-ones, then random nonnegative ones). A trend
/// is "diverging"/"vanishing" when the ratio moves by about 10x per decade over
/// the three outermost magnitudes. Magnitudes whose evaluation overflows are
/// dropped from the large end.
inline GLimits estimate_g_limits(const ProblemSpec& spec, int i, const LimitOptions& opt = {}) {
    const auto& g = spec.separable_parts().g.at(static_cast<std::size_t>(i));
    auto mags = opt.resolved_magnitudes();
    std::sort(mags.begin(), mags.end());
    if (mags.size() < 3 || !(mags.front() > 0.0) || std::log10(mags.back() / mags.front()) < 6.0 - 1e-9) {
        throw SpecError("g-limit magnitudes must be positive and span at least 6 decades");
    }

    const int n = spec.n;
    std::vector<std::vector<double>> dirs;
    for (int k = 0; k < n; ++k) {
        std::vector<double> d(static_cast<std::size_t>(n), 0.0);
        d[static_cast<std::size_t>(k)] = 1.0;
        dirs.push_back(std::move(d));
    }
    if (n > 1) dirs.emplace_back(static_cast<std::size_t>(n), 1.0);
    std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int extra = opt.directions > 0 ? opt.directions - n - 1 : 0;
    for (int k = 0; k < extra; ++k) {
        std::vector<double> d(static_cast<std::size_t>(n));
        for (auto& x : d) x = unit(rng);
        const double m = *std::max_element(d.begin(), d.end());
        for (auto& x : d) x = m > 0.0 ? x / m : 1.0;
        dirs.push_back(std::move(d));
    }

    std::vector<double> lo, hi, used;
    bool truncated = false;
    for (double s : mags) {
        double rlo = kInf, rhi = -kInf;
        try {
            for (const auto& d : dirs) {
                std::vector<double> u(d);
                for (auto& x : u) x *= s;
                const double r = evaluate(g, 0.0, u) / phi(s, spec.phi_exponent);
                if (!std::isfinite(r)) throw EvalError("ratio overflow");
                rlo = std::min(rlo, r);
                rhi = std::max(rhi, r);
            }
        } catch (const EvalError&) {
            if (used.size() >= 3) {
                truncated = true;
                break;
            }
            throw;
        }
        lo.push_back(rlo);
        hi.push_back(rhi);
        used.push_back(s);
    }
    if (used.size() < 3) throw EvalError("too few magnitudes could be evaluated");

    GLimits out;
    out.zero = detail::classify({lo[2], lo[1], lo[0]}, {hi[2], hi[1], hi[0]}, {used[2], used[1], used[0]});
    const std::size_t m = used.size();
    out.infinity = detail::classify({lo[m - 3], lo[m - 2], lo[m - 1]}, {hi[m - 3], hi[m - 2], hi[m - 1]},
                                    {used[m - 3], used[m - 2], used[m - 1]});
    out.infinity.truncated = truncated;
    return out;
}

// ---------------------------------------------------------------------------
// Eigenvalue intervals

struct LambdaInterval {
    double lower = 0.0;
    double upper = 0.0;
    bool nonempty = false;
};

/// User-declared limits; a declared value replaces the estimate.
struct LimitOverrides {
    std::vector<std::optional<double>> g0;
    std::vector<std::optional<double>> ginf;
};

struct IntervalReport {
    double rho = 0.0;
    double phi_exponent = 2.0;
    std::vector<double> A_i;
    std::vector<double> B_i;
    std::vector<double> B_argmin;
    std::vector<GLimits> limits;
    double A = 0.0;
    double B = 0.0;
    LambdaInterval interval_s;  // (1/(B^{p-1} min g_∞), 1/(A^{p-1} max g_0))
    LambdaInterval interval_t;  // (1/(B^{p-1} min g_0), 1/(A^{p-1} max g_∞))
    std::vector<bool> corollary_i;   // g_∞ = ∞ and g_0 = 0
    std::vector<bool> corollary_ii;  // g_0 = ∞ and g_∞ = 0
    bool corollary_i_all = false;
    bool corollary_ii_all = false;

    /// Every λ > 0 is covered when one corollary condition holds for all components.
    bool all_lambda() const { return corollary_i_all || corollary_ii_all; }
};

/// 1/x with 1/∞ = 0 and 1/0 = ∞.
inline double reciprocal(double x) {
    if (x == kInf) return 0.0;
    if (x == 0.0) return kInf;
    return 1.0 / x;
}

namespace detail {

inline LambdaInterval make_interval(double B_pow, double min_low, double A_pow, double max_up) {
    LambdaInterval iv;
    iv.lower = reciprocal(min_low == kInf ? kInf : B_pow * min_low);
    iv.upper = reciprocal(max_up == kInf ? kInf : A_pow * max_up);
    iv.nonempty = iv.lower < iv.upper;
    if (!iv.nonempty) {
        iv.lower = iv.upper = 0.0;
    }
    return iv;
}

}  // namespace detail

struct IntervalOptions {
    int panels = kDefaultGrid;
    LimitOptions limits;
};

/// λ-intervals of positive solvability for (q φ(p u'))' + λ h_i g^i(u) = 0.
/// A_i, B_i and the g-limits refer to h and g themselves; the problem's own
/// λ does not enter.
inline IntervalReport eigenvalue_intervals(const ProblemSpec& spec, const LimitOverrides& overrides = {},
                                           const IntervalOptions& opt = {}) {
    check_structure(spec);
    spec.separable_parts();
    IntervalReport rep;
    rep.phi_exponent = spec.phi_exponent;
    rep.rho = compute_rho(spec, opt.panels).rho;
    const double pm1 = spec.phi_exponent - 1.0;
    for (int i = 0; i < spec.n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        rep.A_i.push_back(compute_A_i(spec, i, opt.panels));
        const auto b = compute_B_i(spec, i, opt.panels);
        rep.B_i.push_back(b.value);
        rep.B_argmin.push_back(b.argmin);
        const bool have_g0 = ii < overrides.g0.size() && overrides.g0[ii].has_value();
        const bool have_ginf = ii < overrides.ginf.size() && overrides.ginf[ii].has_value();
        GLimits lim;
        if (!have_g0 || !have_ginf) lim = estimate_g_limits(spec, i, opt.limits);
        if (have_g0) lim.zero = LimitEstimate::declared_value(*overrides.g0[ii]);
        if (have_ginf) lim.infinity = LimitEstimate::declared_value(*overrides.ginf[ii]);
        rep.limits.push_back(lim);
    }
    rep.A = *std::max_element(rep.A_i.begin(), rep.A_i.end());
    rep.B = *std::min_element(rep.B_i.begin(), rep.B_i.end());

    double min_g0 = kInf, max_g0 = 0.0, min_ginf = kInf, max_ginf = 0.0;
    for (const auto& l : rep.limits) {
        min_g0 = std::min(min_g0, l.zero.value);
        max_g0 = std::max(max_g0, l.zero.value);
        min_ginf = std::min(min_ginf, l.infinity.value);
        max_ginf = std::max(max_ginf, l.infinity.value);
    }
    const double B_pow = std::pow(rep.B, pm1);
    const double A_pow = std::pow(rep.A, pm1);
    rep.interval_s = detail::make_interval(B_pow, min_ginf, A_pow, max_g0);
    rep.interval_t = detail::make_interval(B_pow, min_g0, A_pow, max_ginf);

    rep.corollary_i_all = rep.corollary_ii_all = true;
    for (const auto& l : rep.limits) {
        const bool c1 = l.infinity.value == kInf && l.zero.value == 0.0;
        const bool c2 = l.zero.value == kInf && l.infinity.value == 0.0;
        rep.corollary_i.push_back(c1);
        rep.corollary_ii.push_back(c2);
        rep.corollary_i_all = rep.corollary_i_all && c1;
        rep.corollary_ii_all = rep.corollary_ii_all && c2;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Hypothesis checks

struct HypothesisCheck {
    std::string name;
    int component = -1;
    bool passed = true;
    std::string detail;
    std::optional<double> t;
    std::vector<double> u;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;

    /// True when every check with this name passed (and at least one exists).
    bool holds(const std::string& name) const {
        bool any = false;
        for (const auto& c : checks) {
            if (c.name != name) continue;
            any = true;
            if (!c.passed) return false;
        }
        return any;
    }
};

/// (h1): 0 ≤ g_0 < (1/A_i)^{p-1} and (1/B_i)^{p-1} < g_∞ ≤ ∞ for every i;
/// (h2): the same with g_0 and g_∞ swapped. g is the effective λ g.
inline HypothesisReport check_h1_h2(const ProblemSpec& spec, const IntervalReport& rep) {
    HypothesisReport out;
    const double pm1 = spec.phi_exponent - 1.0;
    for (int i = 0; i < spec.n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double g0 = spec.lambda * rep.limits[ii].zero.value;
        const double ginf = spec.lambda * rep.limits[ii].infinity.value;
        const double small = std::pow(reciprocal(rep.A_i[ii]), pm1);
        const double large = std::pow(reciprocal(rep.B_i[ii]), pm1);
        HypothesisCheck h1{.name = "h1", .component = i};
        h1.passed = g0 >= 0.0 && g0 < small && large < ginf;
        h1.lhs = g0;
        h1.rhs = small;
        h1.detail = "g0=" + format_number(g0) + " < " + format_number(small) + ", " + format_number(large) +
                    " < ginf=" + format_number(ginf);
        HypothesisCheck h2{.name = "h2", .component = i};
        h2.passed = ginf >= 0.0 && ginf < small && large < g0;
        h2.lhs = ginf;
        h2.rhs = small;
        h2.detail = "ginf=" + format_number(ginf) + " < " + format_number(small) + ", " + format_number(large) +
                    " < g0=" + format_number(g0);
        out.checks.push_back(std::move(h1));
        out.checks.push_back(std::move(h2));
    }
    return out;
}

struct D1D2Options {
    int samples = 256;          // random interior points per u-box
    std::uint64_t seed = 42;
    int t_points = 33;          // t-grid on the window (D1) and 2*t_points-1 on [0, 1] (D2)
    double u_floor = 1e-9;      // stands in for the open end 0 < u_j in (D2)
    double tolerance = 1e-8;    // relative slack on every inequality
    int panels = kDefaultGrid;
};

/// Sampled check of (D1) with (α, ψ) and (D2) with (β, φ_i):
///   (D1) f^i(t,u) ≥ (ρα)^{p-1} ψ_i(t) on [1/4,3/4] for u_j ∈ [0,α], u_i ∈ [ρα,α],
///        and inf_{[1/4,3/4]} γ_{ψ_i} ≥ 1;
///   (D2) f^i(t,u) ≤ β^{p-1} φ_i(t) on [0,1] for u_j ∈ (0,β],
///        and ∫_0^1 (1/p) φ^{-1}((1/q) ∫_0^1 φ_i) ds ≤ 1.
/// u-boxes are probed at their corners plus random interior points.
inline HypothesisReport check_D1_D2(const ProblemSpec& spec, double alpha, double beta,
                                    const std::vector<ExprAst>& psi, const std::vector<ExprAst>& varphi,
                                    const D1D2Options& opt = {}) {
    check_structure(spec);
    if (!(alpha > 0.0) || !(beta > 0.0)) throw SpecError("alpha and beta must be positive");
    if (alpha == beta) throw SpecError("beta must differ from alpha");
    if (psi.size() != static_cast<std::size_t>(spec.n) || varphi.size() != static_cast<std::size_t>(spec.n)) {
        throw SpecError("need one psi and one varphi per component");
    }
    const double pm1 = spec.phi_exponent - 1.0;
    const auto cone = compute_rho(spec, opt.panels);
    const double rho = cone.rho;
    const DiscreteOperator op(spec, opt.panels);
    const PhiInverse phi_inv(spec.phi_exponent);
    std::mt19937_64 rng(opt.seed);
    const int n = spec.n;
    HypothesisReport out;

    // corners of the box ∏[lo_j, hi_j] followed by random interior points
    auto box_points = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
        std::vector<std::vector<double>> pts;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            std::vector<double> u(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) u[static_cast<std::size_t>(j)] = (mask >> j) & 1u ? hi[static_cast<std::size_t>(j)] : lo[static_cast<std::size_t>(j)];
            pts.push_back(std::move(u));
        }
        for (int s = 0; s < opt.samples; ++s) {
            std::vector<double> u(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                std::uniform_real_distribution<double> d(lo[static_cast<std::size_t>(j)], hi[static_cast<std::size_t>(j)]);
                u[static_cast<std::size_t>(j)] = d(rng);
            }
            pts.push_back(std::move(u));
        }
        return pts;
    };

    for (int i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);

        // (D1) pointwise bound
        HypothesisCheck d1{.name = "D1", .component = i};
        std::vector<double> lo(static_cast<std::size_t>(n), 0.0), hi(static_cast<std::size_t>(n), alpha);
        lo[ii] = rho * alpha;
        const auto pts1 = box_points(lo, hi);
        const double scale1 = std::pow(rho * alpha, pm1);
        for (int k = 0; k < opt.t_points && d1.passed; ++k) {
            const double t = 0.25 + 0.5 * k / (opt.t_points - 1);
            const double psi_t = evaluate(psi[ii], t);
            if (!(psi_t > 0.0)) {
                d1.passed = false;
                d1.t = t;
                d1.lhs = psi_t;
                d1.detail = "psi" + std::to_string(i + 1) + " is not positive at t=" + format_number(t);
                break;
            }
            const double bound = scale1 * psi_t;
            for (const auto& u : pts1) {
                const double fv = spec.f(i, t, u);
                if (fv < bound * (1.0 - opt.tolerance)) {
                    d1.passed = false;
                    d1.t = t;
                    d1.u = u;
                    d1.lhs = fv;
                    d1.rhs = bound;
                    d1.detail = "f" + std::to_string(i + 1) + "=" + format_number(fv) + " < (rho*alpha)^(p-1)*psi=" +
                                format_number(bound) + " at t=" + format_number(t) + ", u=" + detail::format_u(u);
                    break;
                }
            }
        }
        if (d1.passed) d1.detail = "pointwise lower bound holds at all samples";
        out.checks.push_back(std::move(d1));

        // (D1) inf γ_ψ ≥ 1
        HypothesisCheck g1{.name = "D1", .component = i};
        auto psi_fn = [&](double t) {
            try {
                return evaluate(psi[ii], t);
            } catch (const EvalError&) {
                return evaluate(psi[ii], std::clamp(t, 0.25, 0.75));
            }
        };
        const GammaFunction gpsi(op, rho, detail::sample_nodes(psi_fn, opt.panels));
        const auto m = minimize_on_window([&](double t) { return gpsi(t); });
        g1.lhs = m.value;
        g1.rhs = 1.0;
        g1.t = m.argmin;
        g1.passed = m.value >= 1.0 - opt.tolerance;
        g1.detail = "inf gamma_psi" + std::to_string(i + 1) + " = " + format_number(m.value) + " at t=" + format_number(m.argmin);
        out.checks.push_back(std::move(g1));

        // (D2) pointwise bound
        HypothesisCheck d2{.name = "D2", .component = i};
        const auto pts2 = box_points(std::vector<double>(static_cast<std::size_t>(n), std::min(opt.u_floor, beta)),
                                     std::vector<double>(static_cast<std::size_t>(n), beta));
        const double scale2 = std::pow(beta, pm1);
        const int t2 = 2 * opt.t_points - 1;
        for (int k = 0; k < t2 && d2.passed; ++k) {
            const double t = static_cast<double>(k) / (t2 - 1);
            const double vp = evaluate(varphi[ii], t);
            if (!(vp > 0.0)) {
                d2.passed = false;
                d2.t = t;
                d2.lhs = vp;
                d2.detail = "varphi" + std::to_string(i + 1) + " is not positive at t=" + format_number(t);
                break;
            }
            const double bound = scale2 * vp;
            for (const auto& u : pts2) {
                const double fv = spec.f(i, t, u);
                if (fv > bound * (1.0 + opt.tolerance)) {
                    d2.passed = false;
                    d2.t = t;
                    d2.u = u;
                    d2.lhs = fv;
                    d2.rhs = bound;
                    d2.detail = "f" + std::to_string(i + 1) + "=" + format_number(fv) + " > beta^(p-1)*varphi=" +
                                format_number(bound) + " at t=" + format_number(t) + ", u=" + detail::format_u(u);
                    break;
                }
            }
        }
        if (d2.passed) d2.detail = "pointwise upper bound holds at all samples";
        out.checks.push_back(std::move(d2));

        // (D2) unit bound on the integral
        HypothesisCheck i2{.name = "D2", .component = i};
        const double mass = integrate_on_grid([&](double t) { return evaluate(varphi[ii], t); }, 0.0, 1.0, opt.panels);
        const double integral = integrate_on_grid([&](double s) { return phi_inv(mass / spec.q(s)) / spec.p(s); }, 0.0,
                                                  1.0, opt.panels);
        i2.lhs = integral;
        i2.rhs = 1.0;
        i2.passed = integral <= 1.0 + opt.tolerance;
        i2.detail = "integral bound for varphi" + std::to_string(i + 1) + " = " + format_number(integral);
        out.checks.push_back(std::move(i2));
    }
    return out;
}

// ---------------------------------------------------------------------------
// λ sweep

struct SweepRow {
    double lambda = 0.0;
    bool converged = false;
    double norm = 0.0;
    double r_fp = 0.0;
    double r_ode = 0.0;
    std::vector<double> sigma;
    std::string method;
    std::string message;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    bool truncated_low = false;   // 0 replaced by 1/cap
    bool truncated_high = false;  // ∞ replaced by cap
    bool logarithmic = true;
    double cap = 1e6;
};

/// Sample points of a λ-range: ∞ becomes `cap` and 0 becomes 1/cap; spacing
/// is logarithmic when the range spans more than a decade, uniform otherwise;
/// both ends are included. A single point sits at the geometric midpoint.
inline std::vector<double> sweep_points(double lower, double upper, int points, double cap, SweepReport* info = nullptr) {
    std::vector<double> out;
    if (points < 1 || std::isnan(lower) || std::isnan(upper) || lower > upper || upper <= 0.0) return out;
    double lo = lower, hi = upper;
    if (hi == kInf || hi > cap) {
        hi = cap;
        if (info) info->truncated_high = true;
    }
    if (lo <= 0.0) {
        lo = 1.0 / cap;
        if (info) info->truncated_low = true;
    }
    if (lo > hi) return out;
    const bool logarithmic = hi / lo > 10.0;
    if (info) info->logarithmic = logarithmic;
    if (points == 1 || lo == hi) {
        out.push_back(lo == hi ? lo : std::sqrt(lo * hi));
        return out;
    }
    for (int k = 0; k < points; ++k) {
        const double x = static_cast<double>(k) / (points - 1);
        double v = logarithmic ? std::exp(std::log(lo) + x * (std::log(hi) - std::log(lo))) : lo + x * (hi - lo);
        if (k == 0) v = lo;
        if (k == points - 1) v = hi;
        if (logarithmic) {
            // snap to the decade when the rounding error is all that separates them
            const double decade = std::round(std::log10(v));
            if (std::abs(std::log10(v) - decade) < 1e-12) v = std::pow(10.0, decade);
        }
        out.push_back(v);
    }
    return out;
}

/// Solves λ h g problems across a λ-range; per-λ failures are recorded rows.
inline SweepReport lambda_sweep(const ProblemSpec& spec, double lower, double upper, int points,
                                const SolverConfig& cfg, double cap = 1e6) {
    spec.separable_parts();
    SweepReport rep;
    rep.cap = cap;
    const auto lambdas = sweep_points(lower, upper, points, cap, &rep);
    ProblemSpec base = spec;
    base.lambda = 1.0;
    for (double lambda : lambdas) {
        SweepRow row;
        row.lambda = lambda;
        try {
            const auto scaled = scale_by_lambda(base, lambda);
            const auto b = solve(scaled, cfg);
            row.converged = b.positive();
            row.norm = b.norm;
            row.r_fp = b.r_fp;
            row.r_ode = b.r_ode;
            row.sigma = b.sigma;
            row.method = b.method;
            row.message = b.message;
        } catch (const Error& e) {
            row.converged = false;
            row.message = e.what();
            row.sigma.assign(static_cast<std::size_t>(spec.n), std::nan(""));
            row.norm = row.r_fp = row.r_ode = std::nan("");
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace conebvp
