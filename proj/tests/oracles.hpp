// Test-side oracles, independent of the library's implementation paths:
// a plain adaptive Simpson rule (used to check the incomplete-gamma CDF and
// the normal CDF against quadrature of their densities) and a central
// finite-difference helper.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracles {

inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol,
                          int depth) {
    if (depth <= 0) throw std::runtime_error("oracle quadrature: depth exhausted");
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double quad(const std::function<double(double)>& f, double a, double b,
                   double tol = 1e-12) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

// Central difference d/dt f at t with step h.
inline double central_diff(const std::function<double(double)>& f, double t,
                           double h = 1e-5) {
    return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace oracles
