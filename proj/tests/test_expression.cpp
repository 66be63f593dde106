#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "sphrad/expression.hpp"

using namespace sphrad;

TEST_CASE("basic parses") {
    const ExprPtr e = parse_expression("z1 - x1", 2, 2);
    REQUIRE(e);
    CHECK(e->kind == ExprKind::Sub);
    CHECK(e->lhs->kind == ExprKind::VarZ);
    CHECK(e->lhs->index == 0);
    CHECK(e->rhs->kind == ExprKind::VarX);

    const ExprPtr f = parse_expression("x1*exp(z1) + z2 - 1", 2, 2);
    REQUIRE(f);
    CHECK(f->kind == ExprKind::Sub);  // ((x1*exp(z1) + z2) - 1)
    CHECK(f->lhs->kind == ExprKind::Add);
    CHECK(f->lhs->lhs->kind == ExprKind::Mul);
    CHECK(f->lhs->lhs->rhs->kind == ExprKind::Exp);
}

TEST_CASE("truncated input reports offset and expectations") {
    try {
        parse_expression("z1 + ", 2, 2);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 5);
        CHECK(!e.expected().empty());
    }
}

TEST_CASE("parse errors and unknown identifiers") {
    CHECK_THROWS_AS(parse_expression("", 1, 1), ParseError);
    CHECK_THROWS_AS(parse_expression("(z1", 1, 1), ParseError);
    CHECK_THROWS_AS(parse_expression("z1 z2", 2, 2), ParseError);
    CHECK_THROWS_AS(parse_expression("x1 + $", 1, 1), ParseError);
    CHECK_THROWS_AS(parse_expression("y1", 1, 1), UnknownIdentifier);
    CHECK_THROWS_AS(parse_expression("x0", 1, 1), UnknownIdentifier);
    CHECK_THROWS_AS(parse_expression("x3 + z1", 2, 2), UnknownIdentifier);
    CHECK_THROWS_AS(parse_expression("z2", 1, 1), UnknownIdentifier);
    CHECK_THROWS_AS(parse_expression("sin(z1)", 1, 1), UnknownIdentifier);
}

TEST_CASE("evaluation and precedence") {
    std::vector<double> x{2.0};
    std::vector<double> z{3.0};
    auto val = [&](const char* src) {
        return eval_expr<double>(*parse_expression(src, 1, 1), x, z);
    };
    CHECK(val("x1 + z1*2") == 8.0);
    CHECK(val("(x1 + z1)*2") == 10.0);
    CHECK(val("z1^2 - x1") == 7.0);
    CHECK(val("-z1 + x1") == -1.0);
    CHECK(val("2^-1") == 0.5);
    CHECK(val("z1/x1/2") == 0.75);
    CHECK(val("x1 - z1 - 1") == -2.0);
    CHECK(val("norm(x1 - z1)") == 1.0);
    CHECK(val("sqrt(z1*3)") == 3.0);
    CHECK(val("log(exp(x1))") == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("domain errors") {
    std::vector<double> x{-1.0};
    std::vector<double> z{0.0};
    auto val = [&](const char* src) {
        return eval_expr<double>(*parse_expression(src, 1, 1), x, z);
    };
    CHECK_THROWS_AS(val("log(x1)"), DomainError);
    CHECK_THROWS_AS(val("sqrt(x1)"), DomainError);
    CHECK_THROWS_AS(val("x1/z1"), DomainError);
    CHECK_THROWS_AS(val("z1^-2"), DomainError);
}

namespace {

// Random AST generator for the round-trip and AD property tests.
ExprPtr random_expr(std::mt19937_64& rng, int depth, int n, int m) {
    auto node = [&](ExprKind kind, ExprPtr lhs, ExprPtr rhs = nullptr) {
        auto e = std::make_shared<Expr>();
        e->kind = kind;
        e->lhs = std::move(lhs);
        e->rhs = std::move(rhs);
        return ExprPtr(e);
    };
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    if (depth == 0) {
        switch (rng() % 3) {
            case 0: {
                auto e = std::make_shared<Expr>();
                e->kind = ExprKind::Number;
                e->number = std::round(uni(rng) * 8.0) / 8.0;
                return ExprPtr(e);
            }
            case 1: {
                auto e = std::make_shared<Expr>();
                e->kind = ExprKind::VarX;
                e->index = static_cast<int>(rng() % n);
                return ExprPtr(e);
            }
            default: {
                auto e = std::make_shared<Expr>();
                e->kind = ExprKind::VarZ;
                e->index = static_cast<int>(rng() % m);
                return ExprPtr(e);
            }
        }
    }
    switch (rng() % 7) {
        case 0: return node(ExprKind::Add, random_expr(rng, depth - 1, n, m),
                            random_expr(rng, depth - 1, n, m));
        case 1: return node(ExprKind::Sub, random_expr(rng, depth - 1, n, m),
                            random_expr(rng, depth - 1, n, m));
        case 2: return node(ExprKind::Mul, random_expr(rng, depth - 1, n, m),
                            random_expr(rng, depth - 1, n, m));
        case 3: return node(ExprKind::Neg, random_expr(rng, depth - 1, n, m));
        case 4: {
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Pow;
            e->lhs = random_expr(rng, depth - 1, n, m);
            e->number = static_cast<double>(2 + rng() % 2);
            return ExprPtr(e);
        }
        case 5: return node(ExprKind::Exp, random_expr(rng, depth - 1, n, m));
        default: return node(ExprKind::Add, random_expr(rng, depth - 1, n, m),
                             random_expr(rng, depth - 1, n, m));
    }
}

}  // namespace

TEST_CASE("print/parse round trip on random ASTs") {
    // parse(print(ast)) = ast for every ast in the parser's image: one
    // parse canonicalizes (negated literals fold into negative numbers),
    // after which print/parse is the identity.
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const ExprPtr canon = parse_expression(print_expression(random_expr(rng, 3, 2, 2)), 2, 2);
        const ExprPtr back = parse_expression(print_expression(canon), 2, 2);
        CHECK_MESSAGE(structurally_equal(canon, back),
                      "round trip failed for: ", print_expression(canon));
    }
}

TEST_CASE("round trip on handwritten sources") {
    for (const char* src :
         {"z1 - x1", "x1*exp(z1) + z2 - 1", "-(x1 + z1)*z2", "x1 - (z1 - z2)",
          "z1^2*x1 + sqrt(norm(z2))", "x1/(z1 + 3)/2", "1.5e-3 + z1^-2"}) {
        const ExprPtr once = parse_expression(src, 2, 2);
        const ExprPtr twice = parse_expression(print_expression(once), 2, 2);
        CHECK_MESSAGE(structurally_equal(once, twice), "src: ", src);
    }
}

TEST_CASE("dual AD matches central differences on random ASTs") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(0.25, 1.75);
    int checked = 0;
    for (int trial = 0; trial < 300 && checked < 100; ++trial) {
        const ExprPtr e = random_expr(rng, 3, 2, 2);
        std::vector<double> x{uni(rng), uni(rng)}, z{uni(rng), uni(rng)};
        try {
            // d/dx1 via AD.
            std::vector<Dual> xd{{x[0], 1.0}, {x[1], 0.0}};
            std::vector<Dual> zd{{z[0], 0.0}, {z[1], 0.0}};
            const double ad = eval_expr<Dual>(*e, xd, zd).dot;
            auto f = [&](double t) {
                std::vector<double> xt{t, x[1]};
                return eval_expr<double>(*e, xt, z);
            };
            const double fd = (f(x[0] + 1e-6) - f(x[0] - 1e-6)) / 2e-6;
            if (!std::isfinite(ad) || !std::isfinite(fd) || std::abs(ad) > 1e6) continue;
            CHECK(std::abs(ad - fd) <= 1e-6 * (1.0 + std::abs(ad)) + 1e-5);
            ++checked;
        } catch (const DomainError&) {
            continue;  // random AST wandered outside its domain
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("parser survives hostile input") {
    // Deep nesting is rejected instead of exhausting the stack.
    std::string deep(1000, '(');
    deep += "x1";
    deep += std::string(1000, ')');
    CHECK_THROWS_AS(parse_expression(deep, 1, 1), ParseError);
    const std::string shallow = "((((x1))))";
    CHECK(parse_expression(shallow, 1, 1)->kind == ExprKind::VarX);

    // Random byte soup must always throw a typed error, never crash.
    std::mt19937_64 rng(4242);
    const std::string alphabet = "xz120.5+-*/^()eqlogsqrtnorm ,$#";
    for (int trial = 0; trial < 2000; ++trial) {
        std::string src;
        const std::size_t len = 1 + rng() % 24;
        for (std::size_t i = 0; i < len; ++i) {
            src += alphabet[rng() % alphabet.size()];
        }
        try {
            const ExprPtr e = parse_expression(src, 2, 2);
            CHECK(e != nullptr);
        } catch (const ParseError&) {
        } catch (const UnknownIdentifier&) {
        }
    }
}

TEST_CASE("norm marks z-dependence as non-smooth") {
    CHECK(norm_touches_z(parse_expression("norm(z1) - x1", 1, 1)));
    CHECK(!norm_touches_z(parse_expression("norm(x1) - z1", 1, 1)));
    CHECK(!norm_touches_z(parse_expression("z1 - x1", 1, 1)));
    CHECK(mentions_z(parse_expression("z2*0 + 1", 1, 2)));
    CHECK(!mentions_z(parse_expression("x1 + 1", 1, 2)));
}
