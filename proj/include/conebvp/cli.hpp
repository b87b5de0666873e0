#pragma once

#include "conebvp/analysis.hpp"
#include "conebvp/io.hpp"
#include "conebvp/problem.hpp"
#include "conebvp/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace conebvp::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

using nlohmann::json;
using io::number;

/// Exit codes: 0 success, 1 informational failure, 2 bad input.
enum Exit : int { kOk = 0, kFail = 1, kBadInput = 2 };

inline std::string csv_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Seed: --seed wins, then CONE_BVP_SEED, then 42.
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("CONE_BVP_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw SpecError(std::string("CONE_BVP_SEED is not an integer: ") + env);
        }
    }
    return 42;
}

/// Comma separated list of numbers; "inf" allowed, "-" or an empty entry
/// leaves that component to be estimated. A single value applies to all.
inline std::vector<std::optional<double>> parse_limit_list(const std::string& text, int n) {
    std::vector<std::optional<double>> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item == "-") {
            out.emplace_back();
            continue;
        }
        double v;
        try {
            v = io::to_double(item == "inf" || item == "nan" ? json(item) : json(std::stod(item)), "limit");
        } catch (const std::exception&) {
            throw SpecError("bad limit value \"" + item + "\"");
        }
        if (!(v >= 0.0)) throw SpecError("limit values must be >= 0");
        out.emplace_back(v);
    }
    if (out.size() == 1 && n > 1) out.assign(static_cast<std::size_t>(n), out.front());
    if (out.size() != static_cast<std::size_t>(n)) throw SpecError("need one limit value per component");
    return out;
}

inline double parse_lambda_bound(const std::string& s) {
    if (s == "inf") return kInf;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw SpecError("");
        return v;
    } catch (const std::exception&) {
        throw SpecError("bad lambda bound \"" + s + "\"");
    }
}

class Manifest {
public:
    Manifest(std::string command, std::string input) : start_(std::chrono::steady_clock::now()) {
        doc_["command"] = std::move(command);
        doc_["input"] = std::move(input);
        doc_["version"] = kVersion;
        doc_["config"] = json::object();
        doc_["outputs"] = json::array();
    }

    json& config() { return doc_["config"]; }
    void output(const std::string& path) { doc_["outputs"].push_back(path); }

    void write(const std::filesystem::path& dir) {
        const auto path = (dir / "manifest.json").string();
        output(path);
        doc_["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        io::write_file(path, doc_.dump(2) + "\n");
    }

private:
    json doc_;
    std::chrono::steady_clock::time_point start_;
};

inline std::filesystem::path prepare_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw Error("cannot create " + dir + ": " + ec.message());
    return p;
}

inline json membership_json(const MembershipReport& m, double rho) {
    json comps = json::array();
    for (const auto& c : m.components) {
        comps.push_back({{"sup_norm", number(c.sup_norm)},
                         {"min_value", number(c.min_value)},
                         {"min_middle", number(c.min_middle)},
                         {"positivity_margin", number(c.positivity_margin)},
                         {"harnack_margin", number(c.harnack_margin)},
                         {"member", c.member}});
    }
    return {{"rho", rho}, {"tolerance", m.tolerance}, {"member", m.member()}, {"components", comps}};
}

inline json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

// ---------------------------------------------------------------------------

inline json validation_json(const ValidationReport& rep) {
    json results = json::array();
    for (const auto& r : rep.results) {
        json j = {{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}};
        if (r.component >= 0) j["component"] = r.component + 1;
        if (r.t) j["t"] = *r.t;
        if (r.t2) j["t2"] = *r.t2;
        if (!r.u.empty()) j["u"] = numbers(r.u);
        if (r.value) j["value"] = number(*r.value);
        results.push_back(j);
    }
    return {{"schema_version", kSchemaVersion},
            {"sampled", true},
            {"samples", rep.samples},
            {"passed", rep.all_passed()},
            {"hypotheses", results}};
}

inline int cmd_validate(const std::string& file, const std::string& out, int samples, std::ostream& os) {
    const auto spec = io::load_problem(file);
    SamplingOptions opt;
    opt.samples = samples;
    const auto rep = validate(spec, opt);
    const auto doc = validation_json(rep).dump(2) + "\n";
    if (out.empty()) {
        os << doc;
    } else {
        io::write_file(out, doc);
        for (const auto& r : rep.results) {
            os << r.name << (r.component >= 0 ? " (component " + std::to_string(r.component + 1) + ")" : "") << ": "
               << (r.passed ? "pass" : "FAIL") << (r.detail.empty() ? "" : "  " + r.detail) << "\n";
        }
    }
    return rep.all_passed() ? kOk : kFail;
}

struct SolveFlags {
    int grid = kDefaultGrid;
    double tol = 1e-10;
    std::string method = "auto";
    std::optional<double> alpha;
    std::optional<double> beta;
    std::string out = ".";
};

inline SolverConfig solver_config(int grid, double tol, const std::string& method) {
    SolverConfig cfg;
    cfg.grid = grid;
    cfg.tolerance = tol;
    if (method == "picard") {
        cfg.method = SolveMethod::Picard;
    } else if (method == "newton") {
        cfg.method = SolveMethod::Newton;
    } else if (method == "auto") {
        cfg.method = SolveMethod::Auto;
    } else {
        throw SpecError("method must be picard, newton or auto");
    }
    cfg.check();
    return cfg;
}

inline std::string solution_csv(const ProblemSpec& spec, const SolutionBundle& b) {
    std::string s = "t";
    for (int i = 1; i <= spec.n; ++i) s += ",u" + std::to_string(i);
    if (spec.radial) s += ",r";
    s += "\n";
    const int panels = b.u.front().panels();
    for (int j = 0; j <= panels; ++j) {
        const double t = static_cast<double>(j) / panels;
        s += csv_number(t);
        for (const auto& ui : b.u) s += "," + csv_number(ui[static_cast<std::size_t>(j)]);
        if (spec.radial) s += "," + csv_number(spec.radial->radius(t));
        s += "\n";
    }
    return s;
}

inline int cmd_solve(const std::string& file, const SolveFlags& f, std::uint64_t seed, std::ostream& os) {
    const auto spec = io::load_problem(file);
    const auto cfg = solver_config(f.grid, f.tol, f.method);
    if (f.alpha.has_value() != f.beta.has_value()) throw SpecError("--alpha and --beta go together");
    const auto dir = prepare_dir(f.out);
    Manifest manifest("solve", file);
    manifest.config() = {{"grid", cfg.grid},     {"tolerance", cfg.tolerance}, {"method", f.method},
                         {"damping", cfg.damping}, {"seed", seed},              {"max_iterations", cfg.max_iterations}};

    const auto b = solve(spec, cfg);
    const auto cone = compute_rho(spec, cfg.grid);
    const auto ver = verify_solution(spec, b, f.alpha, f.beta);

    const auto csv_path = (dir / "solution.csv").string();
    io::write_file(csv_path, solution_csv(spec, b));
    manifest.output(csv_path);

    json report = {{"schema_version", kSchemaVersion},
                   {"converged", b.converged},
                   {"positive", b.positive()},
                   {"method", b.method},
                   {"iterations", b.iterations},
                   {"message", b.message},
                   {"norm", number(b.norm)},
                   {"sigma", numbers(b.sigma)},
                   {"r_fp", number(b.r_fp)},
                   {"r_ode", number(b.r_ode)},
                   {"cone", membership_json(ver.cone, cone.rho)},
                   {"verification",
                    {{"fixed_point_ok", ver.fixed_point_ok},
                     {"ode_ok", ver.ode_ok},
                     {"boundary_ok", ver.boundary_ok},
                     {"positive", ver.positive},
                     {"sigma_drift", number(ver.sigma_drift)},
                     {"failures", ver.failures}}}};
    if (ver.sandwich) {
        report["sandwich"] = {{"alpha", *ver.alpha}, {"beta", *ver.beta}, {"passed", *ver.sandwich}};
    }
    const auto report_path = (dir / "report.json").string();
    io::write_file(report_path, report.dump(2) + "\n");
    manifest.output(report_path);
    manifest.write(dir);

    os << (b.converged ? "converged" : "NOT converged") << " (" << b.method << ", " << b.iterations
       << " iterations)\n";
    os << "  norm  = " << format_number(b.norm) << "\n";
    for (std::size_t i = 0; i < b.sigma.size(); ++i) os << "  sigma" << i + 1 << " = " << format_number(b.sigma[i]) << "\n";
    os << "  r_fp  = " << format_number(b.r_fp) << "\n  r_ode = " << format_number(b.r_ode) << "\n";
    os << "  cone  = " << (ver.cone.member() ? "member" : "outside") << "\n";
    if (ver.sandwich) os << "  sandwich [" << *ver.alpha << ", " << *ver.beta << "]: " << (*ver.sandwich ? "pass" : "FAIL") << "\n";
    if (!b.converged) os << "  " << b.message << "\n";
    return b.converged ? kOk : kFail;
}

// ---------------------------------------------------------------------------

inline json limit_json(const LimitEstimate& e) {
    return {{"value", number(e.value)},
            {"source", e.declared ? "declared" : "estimated"},
            {"trend", to_string(e.trend)},
            {"range", {number(e.range_lo), number(e.range_hi)}},
            {"last_decades", numbers(e.last_decades)},
            {"truncated", e.truncated}};
}

inline json interval_json(const LambdaInterval& iv) {
    return {{"lower", number(iv.lower)}, {"upper", number(iv.upper)}, {"nonempty", iv.nonempty}};
}

inline std::string interval_text(const LambdaInterval& iv) {
    if (!iv.nonempty) return "empty";
    return "(" + format_number(iv.lower) + ", " + format_number(iv.upper) + ")";
}

struct IntervalFlags {
    std::string g0;
    std::string ginf;
    std::string out = ".";
    int grid = kDefaultGrid;
    int directions = 0;
};

inline int cmd_intervals(const std::string& file, const IntervalFlags& f, std::uint64_t seed, std::ostream& os) {
    const auto spec = io::load_problem(file);
    spec.separable_parts();
    LimitOverrides ov{parse_limit_list(f.g0, spec.n), parse_limit_list(f.ginf, spec.n)};
    IntervalOptions opt;
    opt.panels = f.grid;
    opt.limits.seed = seed;
    opt.limits.directions = f.directions;
    const auto dir = prepare_dir(f.out);
    Manifest manifest("intervals", file);
    manifest.config() = {{"grid", f.grid}, {"seed", seed}, {"directions", f.directions}, {"g0", f.g0}, {"ginf", f.ginf}};

    const auto rep = eigenvalue_intervals(spec, ov, opt);
    const auto hyp = check_h1_h2(spec, rep);

    json comps = json::array();
    for (int i = 0; i < spec.n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        comps.push_back({{"A", rep.A_i[ii]},
                         {"B", rep.B_i[ii]},
                         {"B_argmin", rep.B_argmin[ii]},
                         {"g0", limit_json(rep.limits[ii].zero)},
                         {"ginf", limit_json(rep.limits[ii].infinity)},
                         {"corollary_i", bool(rep.corollary_i[ii])},
                         {"corollary_ii", bool(rep.corollary_ii[ii])}});
    }
    json checks = json::array();
    for (const auto& c : hyp.checks) {
        checks.push_back({{"name", c.name}, {"component", c.component + 1}, {"passed", c.passed}, {"detail", c.detail}});
    }
    const bool h1 = hyp.holds("h1");
    const bool h2 = hyp.holds("h2");
    json doc = {{"schema_version", kSchemaVersion},
                {"rho", rep.rho},
                {"A", rep.A},
                {"B", rep.B},
                {"lambda", spec.lambda},
                {"components", comps},
                {"interval_s", interval_json(rep.interval_s)},
                {"interval_t", interval_json(rep.interval_t)},
                {"h1", h1},
                {"h2", h2},
                {"hypothesis_checks", checks},
                {"corollary_i", rep.corollary_i_all},
                {"corollary_ii", rep.corollary_ii_all},
                {"all_lambda", rep.all_lambda()}};
    const auto path = (dir / "intervals.json").string();
    io::write_file(path, doc.dump(2) + "\n");
    manifest.output(path);
    manifest.write(dir);

    os << "rho = " << format_number(rep.rho) << ", A = " << format_number(rep.A) << ", B = " << format_number(rep.B) << "\n";
    for (int i = 0; i < spec.n; ++i) {
        const auto& l = rep.limits[static_cast<std::size_t>(i)];
        os << "  g" << i + 1 << ": g0 = " << format_number(l.zero.value) << " (" << (l.zero.declared ? "declared" : to_string(l.zero.trend))
           << "), ginf = " << format_number(l.infinity.value) << " (" << (l.infinity.declared ? "declared" : to_string(l.infinity.trend))
           << ")\n";
    }
    os << "interval_s: " << interval_text(rep.interval_s) << "\ninterval_t: " << interval_text(rep.interval_t) << "\n";
    os << "h1: " << (h1 ? "holds" : "fails") << ", h2: " << (h2 ? "holds" : "fails") << "\n";
    if (rep.corollary_i_all) os << "every lambda > 0 is covered (g0 = 0, ginf = inf)\n";
    if (rep.corollary_ii_all) os << "every lambda > 0 is covered (g0 = inf, ginf = 0)\n";
    const bool nothing = !rep.interval_s.nonempty && !rep.interval_t.nonempty && !h1 && !h2;
    return nothing ? kFail : kOk;
}

// ---------------------------------------------------------------------------

struct SweepFlags {
    std::string lambda_min = "0.01";
    std::string lambda_max = "100";
    int points = 5;
    int grid = kDefaultGrid;
    double tol = 1e-10;
    std::string method = "auto";
    double cap = 1e6;
    std::string out = ".";
};

inline std::string sweep_csv(const SweepReport& rep, int n) {
    std::string s = "lambda,converged,norm,r_fp,r_ode";
    for (int i = 1; i <= n; ++i) s += ",sigma" + std::to_string(i);
    s += "\n";
    for (const auto& r : rep.rows) {
        s += csv_number(r.lambda) + "," + (r.converged ? "1" : "0") + "," + csv_number(r.norm) + "," +
             csv_number(r.r_fp) + "," + csv_number(r.r_ode);
        for (int i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            s += "," + csv_number(ii < r.sigma.size() ? r.sigma[ii] : std::nan(""));
        }
        s += "\n";
    }
    return s;
}

inline int cmd_sweep(const std::string& file, const SweepFlags& f, std::uint64_t seed, std::ostream& os) {
    const auto spec = io::load_problem(file);
    spec.separable_parts();
    if (f.points < 1) throw SpecError("--points must be >= 1");
    if (!(f.cap > 1.0)) throw SpecError("--cap must exceed 1");
    const double lo = parse_lambda_bound(f.lambda_min);
    const double hi = parse_lambda_bound(f.lambda_max);
    const auto cfg = solver_config(f.grid, f.tol, f.method);
    const auto dir = prepare_dir(f.out);
    Manifest manifest("sweep", file);

    const auto rep = lambda_sweep(spec, lo, hi, f.points, cfg, f.cap);
    manifest.config() = {{"grid", cfg.grid},
                         {"tolerance", cfg.tolerance},
                         {"method", f.method},
                         {"seed", seed},
                         {"lambda_min", number(lo)},
                         {"lambda_max", number(hi)},
                         {"points", f.points},
                         {"spacing", rep.logarithmic ? "log" : "uniform"},
                         {"cap", f.cap},
                         {"truncated_high", rep.truncated_high},
                         {"truncated_low", rep.truncated_low}};
    const auto path = (dir / "sweep.csv").string();
    io::write_file(path, sweep_csv(rep, spec.n));
    manifest.output(path);
    manifest.write(dir);

    if (rep.rows.empty()) os << "empty lambda range, nothing to solve\n";
    if (rep.truncated_high) os << "upper end truncated to cap " << format_number(f.cap) << "\n";
    if (rep.truncated_low) os << "lower end raised to 1/cap = " << format_number(1.0 / f.cap) << "\n";
    for (const auto& r : rep.rows) {
        os << "lambda = " << format_number(r.lambda) << ": " << (r.converged ? "converged" : "failed")
           << ", norm = " << format_number(r.norm) << (r.converged ? "" : "  " + r.message) << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------

inline int cmd_radial(const std::string& file, const std::string& out, std::ostream& os) {
    const auto doc = io::parse_json_text(io::read_file(file));
    const auto rs = io::radial_from_json(doc);
    auto spec = radial_to_bvp(rs);
    if (doc.contains("lambda")) spec.lambda = io::to_double(doc.at("lambda"), "lambda");
    check_structure(spec);
    const auto dir = prepare_dir(out);
    Manifest manifest("radial", file);
    manifest.config() = {{"N", rs.dimension}, {"R1", rs.r_inner}, {"R2", rs.r_outer}};
    const auto path = (dir / "problem.json").string();
    io::write_file(path, io::problem_to_json(spec).dump(2) + "\n");
    manifest.output(path);
    manifest.write(dir);
    os << "q(t) = " << io::detail::text(spec.weight_q) << "\np(t) = " << io::detail::text(spec.weight_p) << "\n";
    for (int i = 0; i < spec.n; ++i) {
        os << "h" << i + 1 << "(t) = " << io::detail::text(spec.separable_parts().h[static_cast<std::size_t>(i)]) << "\n";
    }
    os << "wrote " << path << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& os = std::cout, std::ostream& es = std::cerr) {
    CLI::App app{"Positive solutions of p-Laplacian boundary value systems"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::optional<std::uint64_t> seed_flag;
    app.add_option("--seed", seed_flag, "random seed (default 42, or CONE_BVP_SEED)");

    std::string file;
    std::string out;
    int samples = 64;
    auto* v = app.add_subcommand("validate", "sampled check of the standing hypotheses");
    v->add_option("problem", file, "problem JSON")->required();
    v->add_option("--out", out, "write the JSON report here instead of stdout");
    v->add_option("--samples", samples, "t-grid size")->check(CLI::Range(64, 1 << 20));

    SolveFlags sf;
    auto* s = app.add_subcommand("solve", "solve the boundary value problem");
    s->add_option("problem", file, "problem JSON")->required();
    s->add_option("--grid", sf.grid, "grid panels N");
    s->add_option("--tol", sf.tol, "fixed-point tolerance");
    s->add_option("--method", sf.method, "picard | newton | auto");
    s->add_option("--alpha", sf.alpha, "norm sandwich bound");
    s->add_option("--beta", sf.beta, "norm sandwich bound");
    s->add_option("--out", sf.out, "output directory");

    IntervalFlags inf;
    auto* iv = app.add_subcommand("intervals", "eigenvalue intervals of lambda h g");
    iv->add_option("problem", file, "problem JSON")->required();
    iv->add_option("--g0", inf.g0, "declared g0 per component (comma list, inf allowed, - to estimate)");
    iv->add_option("--ginf", inf.ginf, "declared ginf per component");
    iv->add_option("--grid", inf.grid, "grid panels N");
    iv->add_option("--directions", inf.directions, "sampling directions for the g-limit estimate");
    iv->add_option("--out", inf.out, "output directory");

    SweepFlags wf;
    auto* w = app.add_subcommand("sweep", "solve across a lambda range");
    w->add_option("problem", file, "problem JSON")->required();
    w->add_option("--lambda-min", wf.lambda_min, "lower end");
    w->add_option("--lambda-max", wf.lambda_max, "upper end (inf allowed)");
    w->add_option("--points", wf.points, "number of lambda values");
    w->add_option("--grid", wf.grid, "grid panels N");
    w->add_option("--tol", wf.tol, "fixed-point tolerance");
    w->add_option("--method", wf.method, "picard | newton | auto");
    w->add_option("--cap", wf.cap, "replacement for an infinite end");
    w->add_option("--out", wf.out, "output directory");

    std::string radial_out = ".";
    auto* r = app.add_subcommand("radial", "turn an annulus problem into a boundary value problem on [0,1]");
    r->add_option("problem", file, "radial JSON")->required();
    r->add_option("--out", radial_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, os, es);
            return kOk;
        }
        app.exit(e, os, es);
        return kBadInput;
    }

    try {
        const auto seed = resolve_seed(seed_flag);
        if (v->parsed()) return cmd_validate(file, out, samples, os);
        if (s->parsed()) return cmd_solve(file, sf, seed, os);
        if (iv->parsed()) return cmd_intervals(file, inf, seed, os);
        if (w->parsed()) return cmd_sweep(file, wf, seed, os);
        if (r->parsed()) return cmd_radial(file, radial_out, os);
    } catch (const SpecError& e) {
        es << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const ParseError& e) {
        es << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const NumericalError& e) {
        es << "error: " << e.what() << "\n";
        return kFail;
    } catch (const Error& e) {
        es << "error: " << e.what() << "\n";
        return kBadInput;
    }
    return kBadInput;
}

}  // namespace conebvp::cli
