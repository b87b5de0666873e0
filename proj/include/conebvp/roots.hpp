#pragma once

#include "conebvp/error.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace conebvp::roots {

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Brent–Dekker zero finder on a sign-changing bracket [a, b] with known
/// endpoint values. Every step keeps a bracket, so the result is never worse
/// than bisection; stops when the bracket is narrower than `xtol`.
template <class F>
RootResult brent(F&& f, double a, double b, double fa, double fb, double xtol, int max_iter) {
    RootResult res;
    if (fa == 0.0) return {a, fa, 0, true};
    if (fb == 0.0) return {b, fb, 0, true};
    if ((fa > 0.0) == (fb > 0.0)) throw NumericalError("brent: endpoints do not bracket a root");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) {
            res.x = b;
            res.fx = fb;
            res.converged = true;
            return res;
        }
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) {
                q = -q;
            } else {
                p = -p;
            }
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
        ++res.evaluations;
    }
    res.x = b;
    res.fx = fb;
    res.converged = false;
    return res;
}

/// Plain bisection for a predicate that is false at `lo` and true at `hi`;
/// returns the final bracket.
template <class Pred>
std::pair<double, double> bisect_predicate(Pred&& pred, double lo, double hi, int iterations) {
    for (int k = 0; k < iterations; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {lo, hi};
}

struct MinResult {
    double x = 0.0;
    double fx = 0.0;
};

/// Golden-section minimisation of f on [a, b] down to an interval of width xtol.
/// Both endpoints are also compared so boundary minima are returned exactly.
template <class F>
MinResult golden_section(F&& f, double a, double b, double xtol) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    const double fa = f(a);
    const double fb = f(b);
    const double a0 = a, b0 = b;
    while (b - a > xtol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    MinResult best = f1 <= f2 ? MinResult{x1, f1} : MinResult{x2, f2};
    if (fa < best.fx) best = {a0, fa};
    if (fb < best.fx) best = {b0, fb};
    return best;
}

}  // namespace conebvp::roots
