#pragma once

#include "conebvp/error.hpp"
#include "conebvp/expr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace conebvp {

/// f^i(t, u) given directly, one expression per component.
struct GeneralNonlinearity {
    std::vector<ExprAst> f;
};

/// f^i(t, u) = h_i(t) g^i(u).
struct SeparableNonlinearity {
    std::vector<ExprAst> h;
    std::vector<ExprAst> g;
};

using Nonlinearity = std::variant<GeneralNonlinearity, SeparableNonlinearity>;

/// Annulus data a problem was derived from, kept so solutions can be mapped
/// back to the radius r = (R2 - R1) t + R1.
struct RadialOrigin {
    int dimension = 2;
    double r_inner = 1.0;
    double r_outer = 2.0;
    std::vector<ExprAst> k;

    double radius(double t) const { return (r_outer - r_inner) * t + r_inner; }
};

/// The boundary-value system
///   (q(t) φ(p(t) u_i'(t)))' + f^i(t, u) = 0,  0 < t < 1,   u(0) = u(1) = 0,
/// with φ(x) = |x|^{p-2} x. `lambda` multiplies the separable nonlinearity.
struct ProblemSpec {
    int n = 1;
    double phi_exponent = 2.0;
    ExprAst weight_p;
    ExprAst weight_q;
    Nonlinearity nonlinearity;
    double lambda = 1.0;
    std::optional<RadialOrigin> radial;

    bool separable() const noexcept { return std::holds_alternative<SeparableNonlinearity>(nonlinearity); }

    const SeparableNonlinearity& separable_parts() const {
        if (!separable()) throw SpecError("problem is not separable");
        return std::get<SeparableNonlinearity>(nonlinearity);
    }

    double p(double t) const { return evaluate(weight_p, t); }
    double q(double t) const { return evaluate(weight_q, t); }

    double h(int i, double t) const { return evaluate(separable_parts().h.at(static_cast<std::size_t>(i)), t); }

    double g(int i, std::span<const double> u) const {
        return evaluate(separable_parts().g.at(static_cast<std::size_t>(i)), 0.0, u);
    }

    /// Effective nonlinearity f^i(t, u), including λ for separable problems.
    double f(int i, double t, std::span<const double> u) const {
        const auto idx = static_cast<std::size_t>(i);
        if (const auto* sep = std::get_if<SeparableNonlinearity>(&nonlinearity)) {
            return lambda * evaluate(sep->h.at(idx), t) * evaluate(sep->g.at(idx), t, u);
        }
        return lambda * evaluate(std::get<GeneralNonlinearity>(nonlinearity).f.at(idx), t, u);
    }
};

/// Checks the structural invariants (counts, exponent, variable usage).
/// Throws SpecError on the first violation.
inline void check_structure(const ProblemSpec& spec) {
    if (spec.n < 1 || spec.n > kMaxComponents) {
        throw SpecError("component count must be in 1.." + std::to_string(kMaxComponents));
    }
    if (!(spec.phi_exponent > 1.0) || !std::isfinite(spec.phi_exponent)) {
        throw SpecError("phi_exponent must be a finite number > 1");
    }
    if (!(spec.lambda >= 0.0) || !std::isfinite(spec.lambda)) throw SpecError("lambda must be finite and >= 0");
    if (spec.weight_p.empty() || spec.weight_q.empty()) throw SpecError("weights p and q are required");
    for (const auto* w : {&spec.weight_p, &spec.weight_q}) {
        if (w->max_component() > 0) throw SpecError("weights may only depend on t");
    }
    const auto n = static_cast<std::size_t>(spec.n);
    auto check_u = [&](const ExprAst& e, const char* what) {
        if (e.empty()) throw SpecError(std::string(what) + " expression is empty");
        if (e.max_component() > spec.n) {
            throw SpecError(std::string(what) + " references u" + std::to_string(e.max_component()) +
                            " but the system has " + std::to_string(spec.n) + " component(s)");
        }
    };
    if (const auto* sep = std::get_if<SeparableNonlinearity>(&spec.nonlinearity)) {
        if (sep->h.size() != n || sep->g.size() != n) throw SpecError("need exactly n entries in h and g");
        for (const auto& e : sep->h) {
            check_u(e, "h");
            if (e.max_component() > 0) throw SpecError("h_i may only depend on t");
        }
        for (const auto& e : sep->g) {
            check_u(e, "g");
            if (e.uses_variable(expr::Variable::Kind::T)) throw SpecError("g^i may only depend on u");
        }
    } else {
        const auto& gen = std::get<GeneralNonlinearity>(spec.nonlinearity);
        if (gen.f.size() != n) throw SpecError("need exactly n entries in f");
        for (const auto& e : gen.f) check_u(e, "f");
        if (spec.lambda != 1.0) throw SpecError("lambda applies only to separable nonlinearities");
    }
}

/// Returns a copy whose effective nonlinearity is λ h_i(t) g^i(u) relative to
/// `spec` (λ multiplies any λ already present).
inline ProblemSpec scale_by_lambda(const ProblemSpec& spec, double lambda) {
    if (!spec.separable()) throw SpecError("lambda scaling is defined only for separable nonlinearities");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw SpecError("lambda must be positive and finite");
    ProblemSpec out = spec;
    out.lambda = spec.lambda * lambda;
    return out;
}

// ---------------------------------------------------------------------------
// Sampled hypothesis validation

struct SamplingOptions {
    int samples = 64;          // uniform t-grid size
    double u_min = 1e-3;       // smallest sampled magnitude
    double u_max = 1e3;        // largest sampled magnitude
    int magnitudes = 13;       // log-spaced magnitudes in [u_min, u_max]
};

struct HypothesisResult {
    std::string name;     // "H1" .. "H4"
    bool passed = true;
    std::string detail;   // human-readable witness on failure
    int component = -1;   // 0-based component of the witness
    std::optional<double> t;
    std::optional<double> t2;
    std::vector<double> u;
    std::optional<double> value;
};

struct ValidationReport {
    std::vector<HypothesisResult> results;
    int samples = 0;

    bool all_passed() const {
        return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
    }

    const HypothesisResult* find(const std::string& name) const {
        for (const auto& r : results) {
            if (r.name == name) return &r;
        }
        return nullptr;
    }
};

namespace detail {

inline std::vector<std::vector<double>> u_samples(int n, const SamplingOptions& opt, bool include_zero) {
    std::vector<std::vector<double>> dirs;
    for (int k = 0; k < n; ++k) {
        std::vector<double> d(static_cast<std::size_t>(n), 0.0);
        d[static_cast<std::size_t>(k)] = 1.0;
        dirs.push_back(std::move(d));
    }
    if (n > 1) dirs.emplace_back(static_cast<std::size_t>(n), 1.0);

    std::vector<std::vector<double>> out;
    if (include_zero) out.emplace_back(static_cast<std::size_t>(n), 0.0);
    const int m = std::max(opt.magnitudes, 2);
    const double lo = std::log10(opt.u_min);
    const double hi = std::log10(opt.u_max);
    for (int j = 0; j < m; ++j) {
        const double s = std::pow(10.0, lo + (hi - lo) * j / (m - 1));
        for (const auto& d : dirs) {
            std::vector<double> u(d);
            for (auto& x : u) x *= s;
            out.push_back(std::move(u));
        }
    }
    return out;
}

inline std::string format_u(const std::vector<double>& u) {
    std::ostringstream os;
    os << "(";
    for (std::size_t k = 0; k < u.size(); ++k) os << (k ? ", " : "") << u[k];
    os << ")";
    return os.str();
}

template <class F>
double eval_at(F&& f, const std::string& where) {
    try {
        return f();
    } catch (const EvalError& e) {
        throw EvalError(std::string(e.what()) + " (sample " + where + ")");
    }
}

}  // namespace detail

/// Sampled check of (H1)-(H4). Continuous hypotheses are only probed at a
/// finite set of points; a pass is evidence, not a proof.
inline ValidationReport validate(const ProblemSpec& spec, const SamplingOptions& opt = {}) {
    check_structure(spec);
    if (opt.samples < 64) throw SpecError("validation needs at least 64 samples");

    ValidationReport report;
    report.samples = opt.samples;
    std::vector<double> ts(static_cast<std::size_t>(opt.samples));
    for (int j = 0; j < opt.samples; ++j) ts[static_cast<std::size_t>(j)] = static_cast<double>(j) / (opt.samples - 1);

    // H2: positive weights, nondecreasing q.
    {
        HypothesisResult r{.name = "H2"};
        std::vector<double> qs;
        for (double t : ts) {
            const std::string where = "t=" + format_number(t);
            const double pv = detail::eval_at([&] { return spec.p(t); }, where);
            const double qv = detail::eval_at([&] { return spec.q(t); }, where);
            qs.push_back(qv);
            if (r.passed && !(pv > 0.0)) {
                r.passed = false;
                r.t = t;
                r.value = pv;
                r.detail = "p(t) is not positive at t=" + format_number(t);
            }
            if (r.passed && !(qv > 0.0)) {
                r.passed = false;
                r.t = t;
                r.value = qv;
                r.detail = "q(t) is not positive at t=" + format_number(t);
            }
        }
        for (std::size_t j = 0; r.passed && j + 1 < qs.size(); ++j) {
            const double slack = 1e-14 * std::max(std::abs(qs[j]), std::abs(qs[j + 1]));
            if (qs[j + 1] < qs[j] - slack) {
                r.passed = false;
                r.t = ts[j];
                r.t2 = ts[j + 1];
                r.detail = "q decreases between t=" + format_number(ts[j]) + " and t=" + format_number(ts[j + 1]);
            }
        }
        report.results.push_back(std::move(r));
    }

    if (const auto* sep = std::get_if<SeparableNonlinearity>(&spec.nonlinearity)) {
        // H3: g >= 0, and g > 0 away from the origin.
        HypothesisResult h3{.name = "H3"};
        const auto us = detail::u_samples(spec.n, opt, true);
        for (int i = 0; i < spec.n && h3.passed; ++i) {
            for (const auto& u : us) {
                const double gv = detail::eval_at([&] { return evaluate(sep->g[static_cast<std::size_t>(i)], 0.0, u); },
                                                  "u=" + detail::format_u(u));
                const bool zero_u = std::all_of(u.begin(), u.end(), [](double x) { return x == 0.0; });
                if (gv < 0.0 || (!zero_u && !(gv > 0.0))) {
                    h3.passed = false;
                    h3.component = i;
                    h3.u = u;
                    h3.value = gv;
                    h3.detail = "g" + std::to_string(i + 1) + detail::format_u(u) + " = " + format_number(gv) +
                                (gv < 0.0 ? " is negative" : " is not positive");
                    break;
                }
            }
        }
        report.results.push_back(std::move(h3));

        // H4: h >= 0 and not identically zero on any sampled subinterval.
        HypothesisResult h4{.name = "H4"};
        for (int i = 0; i < spec.n && h4.passed; ++i) {
            std::vector<double> hs;
            for (double t : ts) {
                hs.push_back(detail::eval_at([&] { return evaluate(sep->h[static_cast<std::size_t>(i)], t); },
                                             "t=" + format_number(t)));
            }
            for (std::size_t j = 0; j < hs.size(); ++j) {
                if (hs[j] < 0.0) {
                    h4.passed = false;
                    h4.component = i;
                    h4.t = ts[j];
                    h4.value = hs[j];
                    h4.detail = "h" + std::to_string(i + 1) + " is negative at t=" + format_number(ts[j]);
                    break;
                }
                if (j + 1 < hs.size() && hs[j] == 0.0 && hs[j + 1] == 0.0) {
                    h4.passed = false;
                    h4.component = i;
                    h4.t = ts[j];
                    h4.t2 = ts[j + 1];
                    h4.detail = "h" + std::to_string(i + 1) + " vanishes on [" + format_number(ts[j]) + ", " +
                                format_number(ts[j + 1]) + "]";
                    break;
                }
            }
        }
        report.results.push_back(std::move(h4));
    } else {
        // H1: f > 0 on [0,1] x R^n_+.
        const auto& gen = std::get<GeneralNonlinearity>(spec.nonlinearity);
        HypothesisResult h1{.name = "H1"};
        const auto us = detail::u_samples(spec.n, opt, true);
        for (int i = 0; i < spec.n && h1.passed; ++i) {
            for (double t : ts) {
                for (const auto& u : us) {
                    const double fv = detail::eval_at(
                        [&] { return evaluate(gen.f[static_cast<std::size_t>(i)], t, u); },
                        "t=" + format_number(t) + ", u=" + detail::format_u(u));
                    if (!(fv > 0.0)) {
                        h1.passed = false;
                        h1.component = i;
                        h1.t = t;
                        h1.u = u;
                        h1.value = fv;
                        h1.detail = "f" + std::to_string(i + 1) + " = " + format_number(fv) + " at t=" +
                                    format_number(t) + ", u=" + detail::format_u(u);
                        break;
                    }
                }
                if (!h1.passed) break;
            }
        }
        report.results.insert(report.results.begin(), std::move(h1));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Radial annulus reduction

/// div(|∇u_i|^{p-2} ∇u_i) + k_i(|x|) g^i(u) = 0 on R1 < |x| < R2 in R^N,
/// u = 0 on both spheres.
struct RadialSpec {
    int n = 1;
    double phi_exponent = 2.0;
    int dimension = 2;
    double r_inner = 1.0;
    double r_outer = 2.0;
    std::vector<ExprAst> k;  // functions of r
    std::vector<ExprAst> g;  // functions of u
};

inline void check_radial(const RadialSpec& rs) {
    if (rs.n < 1 || rs.n > kMaxComponents) throw SpecError("component count must be in 1..8");
    if (!(rs.phi_exponent > 1.0)) throw SpecError("phi_exponent must be > 1");
    if (rs.dimension < 2) throw SpecError("dimension N must be >= 2");
    if (!(rs.r_inner > 0.0) || !(rs.r_outer > rs.r_inner) || !std::isfinite(rs.r_outer)) {
        throw SpecError("radii must satisfy 0 < R1 < R2 < inf");
    }
    const auto n = static_cast<std::size_t>(rs.n);
    if (rs.k.size() != n || rs.g.size() != n) throw SpecError("need exactly n entries in k and g");
    for (const auto& k : rs.k) {
        if (k.empty() || k.max_component() > 0 || k.uses_variable(expr::Variable::Kind::T)) {
            throw SpecError("k_i may only depend on r");
        }
        for (int j = 0; j <= 64; ++j) {
            const double r = rs.r_inner + (rs.r_outer - rs.r_inner) * j / 64.0;
            const double kv = evaluate(k, Bindings{0.0, {}, r});
            if (kv < 0.0) throw SpecError("k_i is negative at r=" + format_number(r));
        }
    }
    for (const auto& g : rs.g) {
        if (g.empty() || g.max_component() > rs.n || g.uses_variable(expr::Variable::Kind::T) ||
            g.uses_variable(expr::Variable::Kind::R)) {
            throw SpecError("g^i may only depend on u1..un");
        }
    }
}

/// Text of the transformed coefficients; kept separately so that the emitted
/// problem file carries readable expressions.
struct RadialTransformText {
    std::string weight_p;
    std::string weight_q;
    std::vector<std::string> h;
};

inline RadialTransformText radial_transform_text(const RadialSpec& rs) {
    check_radial(rs);
    const double width = rs.r_outer - rs.r_inner;
    const double power = rs.dimension - 1;
    const std::string radius =
        "(" + (width == 1.0 ? std::string("t") : format_number(width) + "*t") + "+" + format_number(rs.r_inner) + ")";
    RadialTransformText out;
    out.weight_q = radius + "^" + format_number(power);
    out.weight_p = format_number(1.0 / width);
    const ExprAst radius_ast = parse(radius);
    for (const auto& k : rs.k) {
        std::vector<std::string> factors;
        if (width != 1.0) factors.push_back(format_number(width));
        factors.push_back(power == 1.0 ? radius : radius + "^" + format_number(power));
        const bool unit_k = !k.uses_variable(expr::Variable::Kind::R) && evaluate(k, 0.0) == 1.0;
        if (!unit_k) {
            const std::string body = k.uses_variable(expr::Variable::Kind::R)
                                         ? to_string(k.substitute({expr::Variable::Kind::R, 0}, radius_ast))
                                         : to_string(k);
            factors.push_back("(" + body + ")");
        }
        std::string h;
        for (std::size_t j = 0; j < factors.size(); ++j) h += (j ? "*" : "") + factors[j];
        out.h.push_back(std::move(h));
    }
    return out;
}

/// Change of variables r = (R2 - R1) t + R1: the radial system becomes the
/// separable problem with q(t) = r^{N-1}, constant p = 1/(R2 - R1) and
/// h_i(t) = (R2 - R1) r^{N-1} k_i(r).
inline ProblemSpec radial_to_bvp(const RadialSpec& rs) {
    const auto text = radial_transform_text(rs);
    ProblemSpec spec;
    spec.n = rs.n;
    spec.phi_exponent = rs.phi_exponent;
    spec.weight_p = parse(text.weight_p);
    spec.weight_q = parse(text.weight_q);
    SeparableNonlinearity sep;
    for (const auto& h : text.h) sep.h.push_back(parse(h));
    sep.g = rs.g;
    spec.nonlinearity = std::move(sep);
    spec.radial = RadialOrigin{rs.dimension, rs.r_inner, rs.r_outer, rs.k};
    check_structure(spec);
    return spec;
}

}  // namespace conebvp
