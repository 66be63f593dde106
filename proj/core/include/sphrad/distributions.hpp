#pragma once

#include "sphrad/errors.hpp"

namespace sphrad {

// Standard normal distribution function Phi and friends.
double normal_pdf(double t);
double normal_cdf(double t);

// Inverse of normal_cdf on (0,1). Throws OutOfRange outside.
double normal_quantile(double p);

// log(1 - Phi(t)), computed through the complementary error function so it
// stays finite and relatively accurate deep into the right tail.
double log_normal_sf(double t);

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x),
// a > 0, x >= 0. Series/continued-fraction split at x = a + 1.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Chi distribution with m degrees of freedom: the law of the Euclidean norm
// of an m-dimensional standard Gaussian vector.
//
// Density:  chi(t) = K t^{m-1} exp(-t^2/2),  K = 1 / (2^{m/2-1} Gamma(m/2)).
// CDF:      F(t)   = P(m/2, t^2/2).
class ChiDistribution {
public:
    explicit ChiDistribution(int degrees);

    int degrees() const { return m_; }

    // Normalization constant K of the density.
    double normalizer() const { return k_; }

    // Density at t >= 0. Throws NegativeArgument for t < 0.
    double pdf(double t) const;

    // Distribution function at t >= 0; accepts +infinity (returns 1).
    // Inputs t > 40 return exactly 1 (the complement underflows double).
    double cdf(double t) const;

    // Survival function 1 - cdf(t), accurate in the far right tail.
    double sf(double t) const;

    // Inverse of cdf on [0,1): returns t with |cdf(t) - p| <= 1e-12.
    double quantile(double p) const;

private:
    double gamma_p_inverse_guess(double p) const;

    int m_;
    double k_;
};

}  // namespace sphrad
