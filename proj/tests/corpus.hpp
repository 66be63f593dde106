// The fixed regression corpus: half-space, slab, ball, product of
// half-spaces, duplicated constraint, and the exp-barrier example, each with
// a Slater-feasible decision point.
#pragma once

#include <string>
#include <vector>

#include "sphrad/example_problem.hpp"
#include "sphrad/gaussian_model.hpp"
#include "sphrad/problem.hpp"

namespace corpus {

struct Entry {
    std::string name;
    sphrad::InequalitySystem sys;
    sphrad::GaussianModel model;
    Eigen::VectorXd x;
};

inline Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd x(1);
    x[0] = v;
    return x;
}

inline sphrad::GaussianModel standard_model(int m) {
    return sphrad::GaussianModel::build(Eigen::VectorXd::Zero(m),
                                        Eigen::MatrixXd::Identity(m, m));
}

inline sphrad::ComponentPtr affine1(double w, double c1, double c2, double d = 0.0) {
    Eigen::VectorXd wv(1), cv(2);
    wv << w;
    cv << c1, c2;
    return sphrad::make_affine_component(wv, cv, d);
}

// Half-space z1 <= x in m dimensions: phi(x) = Phi(x).
inline Entry halfspace(int m = 2, double x = 1.0) {
    Eigen::VectorXd w(1), c(m);
    w << -1.0;
    c.setZero();
    c[0] = 1.0;
    return {"halfspace-m" + std::to_string(m),
            sphrad::InequalitySystem(1, m, {sphrad::make_affine_component(w, c, 0.0)}),
            standard_model(m), vec1(x)};
}

// |z1| <= x: phi(x) = 2 Phi(x) - 1.
inline Entry slab(double x = 1.0) {
    return {"slab",
            sphrad::InequalitySystem(1, 2, {affine1(-1.0, 1.0, 0.0),
                                            affine1(-1.0, -1.0, 0.0)}),
            standard_model(2), vec1(x)};
}

// ||z|| <= r fixed: phi = F_eta(r), gradient identically zero.
inline Entry ball(int m = 2, double radius = 2.0) {
    return {"ball-m" + std::to_string(m) + "-r" + std::to_string(static_cast<int>(radius)),
            sphrad::InequalitySystem(
                1, m,
                {sphrad::make_ball_component(
                    sphrad::parse_expression(std::to_string(radius), 1, 0), 1, m)}),
            standard_model(m), vec1(0.0)};
}

// z1 <= x and z2 <= x: phi(x) = Phi(x)^2.
inline Entry product(double x = 1.0) {
    return {"product",
            sphrad::InequalitySystem(1, 2, {affine1(-1.0, 1.0, 0.0),
                                            affine1(-1.0, 0.0, 1.0)}),
            standard_model(2), vec1(x)};
}

// Two identical copies of the half-space: ties on every finite direction.
inline Entry duplicated(double x = 1.0) {
    return {"duplicated",
            sphrad::InequalitySystem(1, 2, {affine1(-1.0, 1.0, 0.0),
                                            affine1(-1.0, 1.0, 0.0)}),
            standard_model(2), vec1(x)};
}

inline Entry example52(double x = 0.1) {
    return {"example52", sphrad::example_system(), sphrad::example_model(), vec1(x)};
}

inline std::vector<Entry> all() {
    std::vector<Entry> entries;
    entries.push_back(halfspace());
    entries.push_back(slab());
    entries.push_back(ball());
    entries.push_back(product());
    entries.push_back(duplicated());
    entries.push_back(example52());
    return entries;
}

}  // namespace corpus
