#pragma once

#include <vector>

#include "sphrad/gaussian_model.hpp"
#include "sphrad/problem.hpp"

namespace sphrad {

// Built-in demonstration problem over a bivariate standard normal vector:
//
//   g(x, z1, z2) = alpha(x) e^{h(z1)} + z2 - 1,
//   alpha(x) = x^2 for x >= 0 and 0 otherwise,
//   h(t) = -1 - 4 log(1 - Phi(t)).
//
// g is C^1 and convex in z, 0 is a Slater point at x = 0, yet the resulting
// probability function phi fails to be locally Lipschitz at 0: the one-sided
// gap satisfies phi(0) - phi(t) >= eps sqrt(t) with
// eps = Phi(1) - Phi(1 - e^{-1}).

double example_alpha(double x);
double example_alpha_prime(double x);

// h and h'; tail-accurate via log(1 - Phi) = log(erfc(t/sqrt2)/2). For
// t > 8 the value is clamped at h(8) (overflow guard; the radial solver and
// the closed-form quadrature never leave [-8, 8]).
double example_h(double t);
double example_h_prime(double t);

// The constraint above as a reusable component (n = 1, m = 2).
ComponentPtr example_component();

// Single-component system (n = 1, m = 2) with analytic gradients.
InequalitySystem example_system();

// The matching standard bivariate normal model (R = I2).
GaussianModel example_model();

// phi(t): Phi(1) for t <= 0; for t > 0 the one-dimensional integral
//   (1/sqrt(2 pi)) \int e^{-s^2/2} Phi(1 - t^2 e^{h(s)}) ds
// by adaptive quadrature over [-8, 8] (truncated tail mass < 1e-15).
double example_phi_closed_form(double t, double quad_tol = 1e-10);

// eps = Phi(1) - Phi(1 - e^{-1}), the constant of the sqrt(t) lower bound.
double example_epsilon();

struct WitnessRow {
    double t;
    double phi_gap;     // phi(0) - phi(t)
    double eps_sqrt_t;  // eps * sqrt(t)
    double ratio;       // (phi(0) - phi(t)) / t, divergent as t -> 0+
};

// Evaluates the non-Lipschitz witness on a grid of positive t values.
// Validates phi_gap >= eps_sqrt_t on every row and that the difference
// quotient strictly increases as t decreases. Throws OutOfRange for t <= 0.
std::vector<WitnessRow> nonsmoothness_witness(const std::vector<double>& t_grid,
                                              double quad_tol = 1e-10);

}  // namespace sphrad
