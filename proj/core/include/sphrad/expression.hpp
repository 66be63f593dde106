#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "sphrad/dual.hpp"
#include "sphrad/errors.hpp"

namespace sphrad {

// Domain-checked scalar kernels shared by the double and Dual evaluation
// paths. The Dual overloads live in dual.hpp; these mirror their guards.
inline double exp(double a) { return std::exp(a); }
inline double log(double a) {
    if (a <= 0.0) throw DomainError("log of nonpositive value");
    return std::log(a);
}
inline double sqrt(double a) {
    if (a < 0.0) throw DomainError("sqrt of negative value");
    return std::sqrt(a);
}
inline double abs(double a) { return std::abs(a); }
inline double pow(double a, double p) {
    if (a == 0.0 && p < 0.0) throw DomainError("pow: zero base with negative exponent");
    if (a < 0.0 && p != std::floor(p)) {
        throw DomainError("pow: negative base with non-integer exponent");
    }
    return std::pow(a, p);
}
inline double checked_div(double a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    return a / b;
}
inline Dual checked_div(Dual a, Dual b) { return a / b; }

// Expression AST over decision variables x1..xn and random variables z1..zm.
//
// Grammar (recursive descent):
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ['^' ['-'] number]
//   atom   := number | ident | func '(' expr ')' | '(' expr ')'
//   func   := exp | log | sqrt | norm
//   ident  := ('x'|'z') positive-integer
//
// norm(e) is the absolute value |e| (the one-dimensional Euclidean norm);
// multi-dimensional norm constraints are available as the built-in ball
// component family.
enum class ExprKind {
    Number,
    VarX,
    VarZ,
    Add,
    Sub,
    Neg,
    Mul,
    Div,
    Pow,   // constant exponent, stored in `number`
    Exp,
    Log,
    Sqrt,
    Norm,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind;
    double number = 0.0;  // Number value, or Pow exponent
    int index = 0;        // 0-based variable index for VarX / VarZ
    ExprPtr lhs;
    ExprPtr rhs;
};

// Parses src against the grammar above. Identifier indices are validated
// against the declared dimensions: x1..x<n_x> and z1..z<n_z>.
// Throws ParseError (with byte offset and expected-token set) on syntax
// errors and UnknownIdentifier on undeclared variables or functions.
ExprPtr parse_expression(std::string_view src, int n_x, int n_z);

// Canonical text form; parse_expression(print_expression(e)) reproduces e
// structurally.
std::string print_expression(const ExprPtr& e);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

// True when any norm() node's subtree mentions a z variable; such an
// expression is not C^1 in z everywhere.
bool norm_touches_z(const ExprPtr& e);

bool mentions_z(const ExprPtr& e);

template <typename T>
T eval_expr(const Expr& e, std::span<const T> x, std::span<const T> z) {
    switch (e.kind) {
        case ExprKind::Number: return T(e.number);
        case ExprKind::VarX: return x[static_cast<std::size_t>(e.index)];
        case ExprKind::VarZ: return z[static_cast<std::size_t>(e.index)];
        case ExprKind::Add: return eval_expr(*e.lhs, x, z) + eval_expr(*e.rhs, x, z);
        case ExprKind::Sub: return eval_expr(*e.lhs, x, z) - eval_expr(*e.rhs, x, z);
        case ExprKind::Neg: return -eval_expr(*e.lhs, x, z);
        case ExprKind::Mul: return eval_expr(*e.lhs, x, z) * eval_expr(*e.rhs, x, z);
        case ExprKind::Div:
            return checked_div(eval_expr(*e.lhs, x, z), eval_expr(*e.rhs, x, z));
        case ExprKind::Pow: return pow(eval_expr(*e.lhs, x, z), e.number);
        case ExprKind::Exp: return exp(eval_expr(*e.lhs, x, z));
        case ExprKind::Log: return log(eval_expr(*e.lhs, x, z));
        case ExprKind::Sqrt: return sqrt(eval_expr(*e.lhs, x, z));
        case ExprKind::Norm: return abs(eval_expr(*e.lhs, x, z));
    }
    throw Error("eval_expr: corrupt node kind");
}

}  // namespace sphrad
