#pragma once

#include <cmath>

#include "sphrad/errors.hpp"

namespace sphrad {

// First-order dual number: value + one derivative channel. Seeding deriv = 1
// on a single input variable and propagating through an expression yields the
// partial derivative with respect to that variable.
struct Dual {
    double val = 0.0;
    double dot = 0.0;

    Dual() = default;
    Dual(double v) : val(v), dot(0.0) {}  // constants carry no derivative
    Dual(double v, double d) : val(v), dot(d) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.val + b.val, a.dot + b.dot}; }
inline Dual operator-(Dual a, Dual b) { return {a.val - b.val, a.dot - b.dot}; }
inline Dual operator-(Dual a) { return {-a.val, -a.dot}; }
inline Dual operator*(Dual a, Dual b) {
    return {a.val * b.val, a.dot * b.val + a.val * b.dot};
}
inline Dual operator/(Dual a, Dual b) {
    if (b.val == 0.0) throw DomainError("division by zero");
    const double inv = 1.0 / b.val;
    return {a.val * inv, (a.dot - a.val * b.dot * inv) * inv};
}

inline Dual exp(Dual a) {
    const double e = std::exp(a.val);
    return {e, e * a.dot};
}

inline Dual log(Dual a) {
    if (a.val <= 0.0) throw DomainError("log of nonpositive value");
    return {std::log(a.val), a.dot / a.val};
}

inline Dual sqrt(Dual a) {
    if (a.val < 0.0) throw DomainError("sqrt of negative value");
    const double s = std::sqrt(a.val);
    if (a.val == 0.0 && a.dot != 0.0) {
        throw DomainError("sqrt not differentiable at 0");
    }
    return {s, (a.dot == 0.0) ? 0.0 : 0.5 * a.dot / s};
}

// |a|; differentiable away from 0.
inline Dual abs(Dual a) {
    if (a.val > 0.0) return a;
    if (a.val < 0.0) return -a;
    if (a.dot != 0.0) throw DomainError("abs not differentiable at 0");
    return {0.0, 0.0};
}

// a^p with constant exponent p.
inline Dual pow(Dual a, double p) {
    if (p == 0.0) return {1.0, 0.0};
    if (p == 1.0) return a;
    if (a.val == 0.0) {
        if (p < 0.0) throw DomainError("pow: zero base with negative exponent");
        if (p >= 1.0) return {0.0, (p == 1.0) ? a.dot : 0.0};
        if (a.dot != 0.0) throw DomainError("pow not differentiable at 0 for exponent < 1");
        return {0.0, 0.0};
    }
    if (a.val < 0.0 && p != std::floor(p)) {
        throw DomainError("pow: negative base with non-integer exponent");
    }
    const double v = std::pow(a.val, p);
    return {v, p * std::pow(a.val, p - 1.0) * a.dot};
}

}  // namespace sphrad
