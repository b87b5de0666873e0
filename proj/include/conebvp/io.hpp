#pragma once

#include "conebvp/error.hpp"
#include "conebvp/expr.hpp"
#include "conebvp/problem.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace conebvp::io {

using nlohmann::json;

/// Non-finite numbers have no JSON literal; they are written as the strings
/// "inf", "-inf" and "nan" and read back the same way.
inline json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline double to_double(const json& j, const std::string& what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "Infinity" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::nan("");
    }
    throw SpecError(what + " must be a number");
}

namespace detail {

inline const json& require(const json& j, const char* key) {
    if (!j.contains(key)) throw SpecError(std::string("missing key \"") + key + "\"");
    return j.at(key);
}

inline ExprAst expression(const json& j, const std::string& what, ParseOptions opt = {}) {
    if (j.is_number()) return parse(format_number(j.get<double>()), opt);
    if (!j.is_string()) throw SpecError(what + " must be an expression string");
    try {
        return parse(j.get<std::string>(), opt);
    } catch (const ParseError& e) {
        throw SpecError(what + ": " + e.what());
    }
}

inline std::vector<ExprAst> expressions(const json& j, const std::string& what, ParseOptions opt = {}) {
    if (!j.is_array()) throw SpecError(what + " must be an array of expression strings");
    std::vector<ExprAst> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(expression(j[k], what + "[" + std::to_string(k) + "]", opt));
    return out;
}

inline std::string text(const ExprAst& e) { return e.source().empty() ? to_string(e) : e.source(); }

inline json texts(const std::vector<ExprAst>& v) {
    json a = json::array();
    for (const auto& e : v) a.push_back(text(e));
    return a;
}

inline int integer(const json& j, const std::string& what) {
    if (!j.is_number_integer()) throw SpecError(what + " must be an integer");
    return j.get<int>();
}

}  // namespace detail

inline json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError(std::string("malformed JSON: ") + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
    if (!out) throw Error("write failed for " + path);
}

/// The `radial` object: {N, R1, R2, k, g}; n and phi_exponent come from the
/// enclosing document.
inline RadialSpec radial_from_json(const json& doc) {
    const auto& r = detail::require(doc, "radial");
    if (!r.is_object()) throw SpecError("radial must be an object");
    RadialSpec rs;
    rs.n = detail::integer(detail::require(doc, "n"), "n");
    rs.phi_exponent = to_double(detail::require(doc, "phi_exponent"), "phi_exponent");
    rs.dimension = detail::integer(detail::require(r, "N"), "radial.N");
    rs.r_inner = to_double(detail::require(r, "R1"), "radial.R1");
    rs.r_outer = to_double(detail::require(r, "R2"), "radial.R2");
    rs.k = detail::expressions(detail::require(r, "k"), "radial.k", ParseOptions{.allow_r = true});
    rs.g = detail::expressions(detail::require(r, "g"), "radial.g");
    check_radial(rs);
    return rs;
}

/// Problem document: n, phi_exponent, weight_p, weight_q, either f or h+g,
/// optional lambda, optional radial. A document with a radial object and no
/// weights is transformed on load; with weights, the radial object only
/// records where the problem came from.
inline ProblemSpec problem_from_json(const json& doc) {
    if (!doc.is_object()) throw SpecError("problem file must hold a JSON object");
    const bool has_weights = doc.contains("weight_p") || doc.contains("weight_q");
    if (doc.contains("radial") && !has_weights) {
        auto spec = radial_to_bvp(radial_from_json(doc));
        if (doc.contains("lambda")) spec.lambda = to_double(doc.at("lambda"), "lambda");
        check_structure(spec);
        return spec;
    }
    ProblemSpec spec;
    spec.n = detail::integer(detail::require(doc, "n"), "n");
    spec.phi_exponent = to_double(detail::require(doc, "phi_exponent"), "phi_exponent");
    spec.weight_p = detail::expression(detail::require(doc, "weight_p"), "weight_p");
    spec.weight_q = detail::expression(detail::require(doc, "weight_q"), "weight_q");
    const bool has_f = doc.contains("f");
    const bool has_hg = doc.contains("h") || doc.contains("g");
    if (has_f == has_hg) throw SpecError("give either f or both h and g");
    if (has_f) {
        spec.nonlinearity = GeneralNonlinearity{detail::expressions(doc.at("f"), "f")};
    } else {
        spec.nonlinearity = SeparableNonlinearity{detail::expressions(detail::require(doc, "h"), "h"),
                                                  detail::expressions(detail::require(doc, "g"), "g")};
    }
    if (doc.contains("lambda")) spec.lambda = to_double(doc.at("lambda"), "lambda");
    if (doc.contains("radial")) {
        const auto rs = radial_from_json(doc);
        spec.radial = RadialOrigin{rs.dimension, rs.r_inner, rs.r_outer, rs.k};
    }
    check_structure(spec);
    return spec;
}

inline ProblemSpec load_problem(const std::string& path) { return problem_from_json(parse_json_text(read_file(path))); }

inline json problem_to_json(const ProblemSpec& spec) {
    json doc;
    doc["n"] = spec.n;
    doc["phi_exponent"] = spec.phi_exponent;
    doc["weight_p"] = detail::text(spec.weight_p);
    doc["weight_q"] = detail::text(spec.weight_q);
    if (const auto* sep = std::get_if<SeparableNonlinearity>(&spec.nonlinearity)) {
        doc["h"] = detail::texts(sep->h);
        doc["g"] = detail::texts(sep->g);
    } else {
        doc["f"] = detail::texts(std::get<GeneralNonlinearity>(spec.nonlinearity).f);
    }
    if (spec.lambda != 1.0) doc["lambda"] = spec.lambda;
    if (spec.radial) {
        doc["radial"] = {{"N", spec.radial->dimension},
                         {"R1", spec.radial->r_inner},
                         {"R2", spec.radial->r_outer},
                         {"k", detail::texts(spec.radial->k)},
                         {"g", detail::texts(spec.separable_parts().g)}};
    }
    return doc;
}

}  // namespace conebvp::io
