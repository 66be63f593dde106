#include "sphrad/expression.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <vector>

namespace sphrad {

namespace {

ExprPtr make(ExprKind kind, ExprPtr lhs = nullptr, ExprPtr rhs = nullptr) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

ExprPtr make_number(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Number;
    e->number = v;
    return e;
}

ExprPtr make_var(ExprKind kind, int index) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->index = index;
    return e;
}

class Parser {
public:
    Parser(std::string_view src, int n_x, int n_z)
        : src_(src), n_x_(n_x), n_z_(n_z) {}

    ExprPtr parse() {
        if (src_.empty()) {
            throw ParseError("empty expression", 0, {"expression"});
        }
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != src_.size()) {
            fail({"'+'", "'-'", "'*'", "'/'", "'^'", "')'", "end of input"});
        }
        return e;
    }

private:
    ExprPtr expr() {
        if (++depth_ > 256) {
            throw ParseError("parse error at offset " + std::to_string(pos_) +
                                 ": nesting too deep",
                             pos_, {"shallower expression"});
        }
        skip_ws();
        bool negate = false;
        if (peek() == '+') {
            ++pos_;
        } else if (peek() == '-') {
            ++pos_;
            negate = true;
        }
        ExprPtr e = term();
        if (negate) {
            // Fold a negated literal into a negative Number so that printed
            // negative constants round-trip structurally.
            if (e->kind == ExprKind::Number) {
                e = make_number(-e->number);
            } else {
                e = make(ExprKind::Neg, e);
            }
        }
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c == '+') {
                ++pos_;
                e = make(ExprKind::Add, e, term());
            } else if (c == '-') {
                ++pos_;
                e = make(ExprKind::Sub, e, term());
            } else {
                --depth_;
                return e;
            }
        }
    }

    ExprPtr term() {
        ExprPtr e = factor();
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c == '*') {
                ++pos_;
                e = make(ExprKind::Mul, e, factor());
            } else if (c == '/') {
                ++pos_;
                e = make(ExprKind::Div, e, factor());
            } else {
                return e;
            }
        }
    }

    ExprPtr factor() {
        ExprPtr base = atom();
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            skip_ws();
            double sign = 1.0;
            if (peek() == '-') {
                ++pos_;
                sign = -1.0;
            }
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Pow;
            e->lhs = base;
            e->number = sign * number_literal();
            return e;
        }
        return base;
    }

    ExprPtr atom() {
        skip_ws();
        const char c = peek();
        if (c == '\0') fail(atom_expected());
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return make_number(number_literal());
        }
        if (c == '(') {
            ++pos_;
            ExprPtr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            return identifier_or_call();
        }
        fail(atom_expected());
    }

    ExprPtr identifier_or_call() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name(src_.substr(start, pos_ - start));

        skip_ws();
        if (peek() == '(') {
            ExprKind kind;
            if (name == "exp") kind = ExprKind::Exp;
            else if (name == "log") kind = ExprKind::Log;
            else if (name == "sqrt") kind = ExprKind::Sqrt;
            else if (name == "norm") kind = ExprKind::Norm;
            else {
                throw UnknownIdentifier("unknown function '" + name +
                                        "' at offset " + std::to_string(start));
            }
            ++pos_;
            ExprPtr arg = expr();
            expect(')');
            return make(kind, arg);
        }

        if ((name[0] == 'x' || name[0] == 'z') && name.size() > 1) {
            int index = 0;
            const char* first = name.data() + 1;
            const char* last = name.data() + name.size();
            auto [ptr, ec] = std::from_chars(first, last, index);
            if (ec == std::errc() && ptr == last && index >= 1) {
                const int limit = (name[0] == 'x') ? n_x_ : n_z_;
                if (index > limit) {
                    throw UnknownIdentifier(
                        "variable '" + name + "' out of range at offset " +
                        std::to_string(start) + " (declared " +
                        std::string(1, name[0]) + "1.." + std::string(1, name[0]) +
                        std::to_string(limit) + ")");
                }
                return make_var(name[0] == 'x' ? ExprKind::VarX : ExprKind::VarZ,
                                index - 1);
            }
        }
        throw UnknownIdentifier("unknown identifier '" + name + "' at offset " +
                                std::to_string(start));
    }

    double number_literal() {
        skip_ws();
        const std::size_t start = pos_;
        double value = 0.0;
        const char* first = src_.data() + pos_;
        const char* last = src_.data() + src_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr == first) {
            fail({"number"});
        }
        pos_ = start + static_cast<std::size_t>(ptr - first);
        return value;
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail({std::string("'") + c + "'"});
        ++pos_;
    }

    static std::vector<std::string> atom_expected() {
        return {"number", "identifier", "function", "'('"};
    }

    [[noreturn]] void fail(std::vector<std::string> expected) {
        std::string msg = "parse error at offset " + std::to_string(pos_) + ": expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) msg += " | ";
            msg += expected[i];
        }
        throw ParseError(msg, pos_, std::move(expected));
    }

    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < src_.size() &&
               std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    int n_x_;
    int n_z_;
};

// Precedence levels for printing: additive 1, multiplicative 2, power 3,
// atoms 4. Neg and negative literals print like additive-level nodes so they
// get parenthesized wherever a bare leading '-' would not re-parse.
int level_of(const Expr& e) {
    switch (e.kind) {
        case ExprKind::Number:
            return std::signbit(e.number) ? 1 : 4;
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Neg:
            return 1;
        case ExprKind::Mul:
        case ExprKind::Div:
            return 2;
        case ExprKind::Pow:
            return 3;
        default:
            return 4;
    }
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_node(const Expr& e, int min_level, std::string& out) {
    const int lvl = level_of(e);
    const bool parens = lvl < min_level;
    if (parens) out += '(';
    switch (e.kind) {
        case ExprKind::Number:
            out += format_number(e.number);
            break;
        case ExprKind::VarX:
            out += 'x';
            out += std::to_string(e.index + 1);
            break;
        case ExprKind::VarZ:
            out += 'z';
            out += std::to_string(e.index + 1);
            break;
        case ExprKind::Add:
            print_node(*e.lhs, 1, out);
            out += " + ";
            print_node(*e.rhs, 2, out);
            break;
        case ExprKind::Sub:
            print_node(*e.lhs, 1, out);
            out += " - ";
            print_node(*e.rhs, 2, out);
            break;
        case ExprKind::Neg:
            out += '-';
            print_node(*e.lhs, 2, out);
            break;
        case ExprKind::Mul:
            print_node(*e.lhs, 2, out);
            out += "*";
            print_node(*e.rhs, 3, out);
            break;
        case ExprKind::Div:
            print_node(*e.lhs, 2, out);
            out += "/";
            print_node(*e.rhs, 3, out);
            break;
        case ExprKind::Pow:
            print_node(*e.lhs, 4, out);
            out += '^';
            out += format_number(e.number);
            break;
        case ExprKind::Exp:
        case ExprKind::Log:
        case ExprKind::Sqrt:
        case ExprKind::Norm: {
            const char* name = e.kind == ExprKind::Exp    ? "exp"
                               : e.kind == ExprKind::Log  ? "log"
                               : e.kind == ExprKind::Sqrt ? "sqrt"
                                                          : "norm";
            out += name;
            out += '(';
            print_node(*e.lhs, 1, out);
            out += ')';
            break;
        }
    }
    if (parens) out += ')';
}

}  // namespace

ExprPtr parse_expression(std::string_view src, int n_x, int n_z) {
    return Parser(src, n_x, n_z).parse();
}

std::string print_expression(const ExprPtr& e) {
    if (!e) throw Error("print_expression: null expression");
    std::string out;
    print_node(*e, 1, out);
    return out;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprKind::Number:
            return a->number == b->number;
        case ExprKind::VarX:
        case ExprKind::VarZ:
            return a->index == b->index;
        case ExprKind::Pow:
            return a->number == b->number && structurally_equal(a->lhs, b->lhs);
        case ExprKind::Neg:
        case ExprKind::Exp:
        case ExprKind::Log:
        case ExprKind::Sqrt:
        case ExprKind::Norm:
            return structurally_equal(a->lhs, b->lhs);
        default:
            return structurally_equal(a->lhs, b->lhs) &&
                   structurally_equal(a->rhs, b->rhs);
    }
}

bool mentions_z(const ExprPtr& e) {
    if (!e) return false;
    if (e->kind == ExprKind::VarZ) return true;
    return mentions_z(e->lhs) || mentions_z(e->rhs);
}

bool norm_touches_z(const ExprPtr& e) {
    if (!e) return false;
    if (e->kind == ExprKind::Norm && mentions_z(e->lhs)) return true;
    return norm_touches_z(e->lhs) || norm_touches_z(e->rhs);
}

}  // namespace sphrad
