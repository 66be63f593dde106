#include "sphrad/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sphrad {

InequalitySystem::InequalitySystem(int n, int m, std::vector<ComponentPtr> components)
    : n_(n), m_(m), components_(std::move(components)) {
    if (n_ < 1 || m_ < 1) {
        throw DimensionMismatch("InequalitySystem: dimensions must be >= 1");
    }
    if (components_.empty()) {
        throw ProblemError("InequalitySystem: at least one component required");
    }
    for (const auto& c : components_) {
        if (!c) throw ProblemError("InequalitySystem: null component");
    }
}

const Component& InequalitySystem::component(int i) const {
    check_index(i);
    return *components_[static_cast<std::size_t>(i)];
}

double InequalitySystem::value(int i, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& z) const {
    check_index(i);
    check_dims(x, z);
    return components_[static_cast<std::size_t>(i)]->value(x, z);
}

Eigen::VectorXd InequalitySystem::grad_x(int i, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& z) const {
    check_index(i);
    check_dims(x, z);
    return components_[static_cast<std::size_t>(i)]->grad_x(x, z);
}

Eigen::VectorXd InequalitySystem::grad_z(int i, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& z) const {
    check_index(i);
    check_dims(x, z);
    return components_[static_cast<std::size_t>(i)]->grad_z(x, z);
}

double InequalitySystem::max_value(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& z) const {
    check_dims(x, z);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : components_) {
        best = std::max(best, c->value(x, z));
    }
    return best;
}

bool InequalitySystem::all_smooth() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const ComponentPtr& c) { return c->smooth(); });
}

void InequalitySystem::check_dims(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& z) const {
    if (x.size() != n_ || z.size() != m_) {
        throw DimensionMismatch("InequalitySystem: expected x in R^" +
                                std::to_string(n_) + ", z in R^" + std::to_string(m_) +
                                "; got " + std::to_string(x.size()) + ", " +
                                std::to_string(z.size()));
    }
}

void InequalitySystem::check_index(int i) const {
    if (i < 0 || i >= p()) {
        throw OutOfRange("component index " + std::to_string(i) + " out of range [0," +
                         std::to_string(p()) + ")");
    }
}

namespace {

class AffineComponent final : public Component {
public:
    AffineComponent(Eigen::VectorXd w, Eigen::VectorXd c, double d)
        : w_(std::move(w)), c_(std::move(c)), d_(d) {}

    double value(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        return w_.dot(x) + c_.dot(z) + d_;
    }
    Eigen::VectorXd grad_x(const Eigen::VectorXd&, const Eigen::VectorXd&) const override {
        return w_;
    }
    Eigen::VectorXd grad_z(const Eigen::VectorXd&, const Eigen::VectorXd&) const override {
        return c_;
    }
    bool convex_in_z() const override { return true; }
    bool smooth() const override { return true; }
    std::string describe() const override { return "affine"; }

private:
    Eigen::VectorXd w_, c_;
    double d_;
};

class SeparableQuadraticComponent final : public Component {
public:
    SeparableQuadraticComponent(ExprPtr a, int n, Eigen::VectorXd q)
        : a_(std::move(a)), n_(n), q_(std::move(q)) {}

    double value(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        return eval_a(x) + q_.dot(z.cwiseProduct(z));
    }
    Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd&) const override {
        return grad_a(x);
    }
    Eigen::VectorXd grad_z(const Eigen::VectorXd&, const Eigen::VectorXd& z) const override {
        return 2.0 * q_.cwiseProduct(z);
    }
    bool convex_in_z() const override { return true; }
    bool smooth() const override { return true; }
    std::string describe() const override { return "separable-quadratic"; }

private:
    double eval_a(const Eigen::VectorXd& x) const {
        std::vector<double> xs(x.data(), x.data() + x.size());
        std::vector<double> zs;
        return eval_expr<double>(*a_, xs, zs);
    }
    Eigen::VectorXd grad_a(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g(n_);
        std::vector<Dual> xs(static_cast<std::size_t>(n_));
        std::vector<Dual> zs;
        for (int j = 0; j < n_; ++j) xs[static_cast<std::size_t>(j)] = Dual(x[j]);
        for (int j = 0; j < n_; ++j) {
            xs[static_cast<std::size_t>(j)].dot = 1.0;
            g[j] = eval_expr<Dual>(*a_, xs, zs).dot;
            xs[static_cast<std::size_t>(j)].dot = 0.0;
        }
        return g;
    }

    ExprPtr a_;
    int n_;
    Eigen::VectorXd q_;
};

class BallComponent final : public Component {
public:
    BallComponent(ExprPtr radius, int n, int m) : radius_(std::move(radius)), n_(n), m_(m) {}

    double value(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        return z.norm() - eval_radius(x);
    }
    Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd&) const override {
        Eigen::VectorXd g(n_);
        std::vector<Dual> xs(static_cast<std::size_t>(n_));
        std::vector<Dual> zs;
        for (int j = 0; j < n_; ++j) xs[static_cast<std::size_t>(j)] = Dual(x[j]);
        for (int j = 0; j < n_; ++j) {
            xs[static_cast<std::size_t>(j)].dot = 1.0;
            g[j] = -eval_expr<Dual>(*radius_, xs, zs).dot;
            xs[static_cast<std::size_t>(j)].dot = 0.0;
        }
        return g;
    }
    Eigen::VectorXd grad_z(const Eigen::VectorXd&, const Eigen::VectorXd& z) const override {
        const double norm = z.norm();
        if (norm == 0.0) {
            throw DomainError("ball component: grad_z undefined at z = 0");
        }
        return z / norm;
    }
    bool convex_in_z() const override { return true; }
    bool smooth() const override { return true; }
    std::string describe() const override { return "ball"; }

private:
    double eval_radius(const Eigen::VectorXd& x) const {
        std::vector<double> xs(x.data(), x.data() + x.size());
        std::vector<double> zs;
        return eval_expr<double>(*radius_, xs, zs);
    }

    ExprPtr radius_;
    int n_;
    int m_;
};

class ExpressionComponent final : public Component {
public:
    ExpressionComponent(ExprPtr e, int n, int m, bool convex, bool smooth)
        : expr_(std::move(e)), n_(n), m_(m), convex_(convex), smooth_(smooth) {}

    double value(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        std::vector<double> xs(x.data(), x.data() + x.size());
        std::vector<double> zs(z.data(), z.data() + z.size());
        return eval_expr<double>(*expr_, xs, zs);
    }
    Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        return grad(x, z, true);
    }
    Eigen::VectorXd grad_z(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        return grad(x, z, false);
    }
    bool convex_in_z() const override { return convex_; }
    bool smooth() const override { return smooth_; }
    std::string describe() const override { return print_expression(expr_); }

private:
    Eigen::VectorXd grad(const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                         bool wrt_x) const {
        std::vector<Dual> xs(static_cast<std::size_t>(n_));
        std::vector<Dual> zs(static_cast<std::size_t>(m_));
        for (int j = 0; j < n_; ++j) xs[static_cast<std::size_t>(j)] = Dual(x[j]);
        for (int j = 0; j < m_; ++j) zs[static_cast<std::size_t>(j)] = Dual(z[j]);
        auto& seeded = wrt_x ? xs : zs;
        Eigen::VectorXd g(wrt_x ? n_ : m_);
        for (std::size_t j = 0; j < seeded.size(); ++j) {
            seeded[j].dot = 1.0;
            g[static_cast<int>(j)] = eval_expr<Dual>(*expr_, xs, zs).dot;
            seeded[j].dot = 0.0;
        }
        return g;
    }

    ExprPtr expr_;
    int n_;
    int m_;
    bool convex_;
    bool smooth_;
};

}  // namespace

ComponentPtr make_affine_component(Eigen::VectorXd w, Eigen::VectorXd c, double d) {
    return std::make_shared<AffineComponent>(std::move(w), std::move(c), d);
}

ComponentPtr make_separable_quadratic_component(const ExprPtr& a_of_x, int n,
                                                Eigen::VectorXd q) {
    if ((q.array() < 0.0).any()) {
        throw ProblemError("separable quadratic component: weights q must be >= 0");
    }
    if (mentions_z(a_of_x)) {
        throw ProblemError("separable quadratic component: a(x) must not mention z");
    }
    return std::make_shared<SeparableQuadraticComponent>(a_of_x, n, std::move(q));
}

ComponentPtr make_ball_component(const ExprPtr& radius_of_x, int n, int m) {
    if (mentions_z(radius_of_x)) {
        throw ProblemError("ball component: radius expression must not mention z");
    }
    return std::make_shared<BallComponent>(radius_of_x, n, m);
}

ComponentPtr make_expression_component(const ExprPtr& e, int n, int m,
                                       bool convex_in_z, int smooth_override) {
    const bool smooth =
        (smooth_override >= 0) ? (smooth_override != 0) : !norm_touches_z(e);
    return std::make_shared<ExpressionComponent>(e, n, m, convex_in_z, smooth);
}

ComponentPtr make_expression_component(std::string_view src, int n, int m,
                                       bool convex_in_z, int smooth_override) {
    return make_expression_component(parse_expression(src, n, m), n, m, convex_in_z,
                                     smooth_override);
}

}  // namespace sphrad
