#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphrad {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes of vectors/matrices disagree with the declared dimensions.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Covariance/correlation matrix failed the Cholesky positive-definiteness check.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class NegativeArgument : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

// Evaluation outside a function's domain (log of a nonpositive value, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Expression text could not be parsed. Carries the byte offset of the first
// offending character and the set of tokens that would have been accepted.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset,
               std::vector<std::string> expected)
        : Error(what), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

// Identifier is syntactically valid but refers to no declared variable
// (e.g. "x3" in a system with n = 2).
class UnknownIdentifier : public Error {
public:
    using Error::Error;
};

// g(x,0) >= 0: the origin is not a Slater point at this decision x.
class SlaterViolation : public Error {
public:
    SlaterViolation(const std::string& what, double g_at_origin)
        : Error(what), g_at_origin_(g_at_origin) {}

    double g_at_origin() const { return g_at_origin_; }

private:
    double g_at_origin_;
};

// The radial section r -> g(x, rLv) changed sign more than once; the
// component is not convex in z as declared.
class NonConvexityDetected : public Error {
public:
    using Error::Error;
};

// <grad_z g_i, Lv> fell below the positivity threshold at a root, which
// contradicts the convexity lower bound; usually a modeling bug.
class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

// The gradient path requires every component to be C^1.
class NonSmoothComponent : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

// Bad command-line flags or option combinations.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Problem file violates the schema.
class ProblemError : public Error {
public:
    using Error::Error;
};

}  // namespace sphrad
