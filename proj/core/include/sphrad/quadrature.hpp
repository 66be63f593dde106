#pragma once

#include <functional>

namespace sphrad {

// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
// Throws QuadratureFailure when the recursion depth limit is reached before
// the tolerance is met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth = 60);

}  // namespace sphrad
