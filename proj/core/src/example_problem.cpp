#include "sphrad/example_problem.hpp"

#include <algorithm>
#include <cmath>

#include "sphrad/distributions.hpp"
#include "sphrad/quadrature.hpp"

namespace sphrad {

namespace {
constexpr double kHClamp = 8.0;
}

double example_alpha(double x) { return x >= 0.0 ? x * x : 0.0; }

double example_alpha_prime(double x) { return x >= 0.0 ? 2.0 * x : 0.0; }

double example_h(double t) {
    const double tc = std::min(t, kHClamp);
    return -1.0 - 4.0 * log_normal_sf(tc);
}

double example_h_prime(double t) {
    if (t > kHClamp) return 0.0;
    // h'(t) = 4 phi(t) / (1 - Phi(t))
    return 4.0 * normal_pdf(t) / (0.5 * std::erfc(t / 1.4142135623730951));
}

namespace {

class ExampleComponent final : public Component {
public:
    double value(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        return example_alpha(x[0]) * std::exp(example_h(z[0])) + z[1] - 1.0;
    }
    Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        Eigen::VectorXd g(1);
        g[0] = example_alpha_prime(x[0]) * std::exp(example_h(z[0]));
        return g;
    }
    Eigen::VectorXd grad_z(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        Eigen::VectorXd g(2);
        g[0] = example_alpha(x[0]) * std::exp(example_h(z[0])) * example_h_prime(z[0]);
        g[1] = 1.0;
        return g;
    }
    bool convex_in_z() const override { return true; }  // e^h convex, z2 affine
    bool smooth() const override { return true; }
    std::string describe() const override { return "exp-barrier example"; }
};

}  // namespace

ComponentPtr example_component() { return std::make_shared<ExampleComponent>(); }

InequalitySystem example_system() {
    return InequalitySystem(1, 2, {example_component()});
}

GaussianModel example_model() {
    return GaussianModel::build(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
}

double example_phi_closed_form(double t, double quad_tol) {
    if (!(quad_tol > 0.0)) throw OutOfRange("example_phi_closed_form: quad_tol must be > 0");
    if (t <= 0.0) return normal_cdf(1.0);

    const double t2 = t * t;
    auto integrand = [t2](double s) {
        return normal_pdf(s) * normal_cdf(1.0 - t2 * std::exp(example_h(s)));
    };
    return integrate(integrand, -8.0, 8.0, quad_tol);
}

double example_epsilon() {
    return normal_cdf(1.0) - normal_cdf(1.0 - std::exp(-1.0));
}

std::vector<WitnessRow> nonsmoothness_witness(const std::vector<double>& t_grid,
                                              double quad_tol) {
    const double phi0 = normal_cdf(1.0);
    const double eps = example_epsilon();

    std::vector<WitnessRow> rows;
    rows.reserve(t_grid.size());
    for (double t : t_grid) {
        if (!(t > 0.0)) {
            throw OutOfRange("nonsmoothness_witness: grid values must be > 0, got " +
                             std::to_string(t));
        }
        WitnessRow row;
        row.t = t;
        row.phi_gap = phi0 - example_phi_closed_form(t, quad_tol);
        row.eps_sqrt_t = eps * std::sqrt(t);
        row.ratio = row.phi_gap / t;
        if (row.phi_gap < row.eps_sqrt_t) {
            throw Error("nonsmoothness_witness: phi(0) - phi(t) >= eps sqrt(t) failed at t = " +
                        std::to_string(t));
        }
        rows.push_back(row);
    }

    // The difference quotient must strictly increase as t decreases.
    std::vector<WitnessRow> sorted = rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const WitnessRow& a, const WitnessRow& b) { return a.t > b.t; });
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        if (sorted[k].t < sorted[k - 1].t && !(sorted[k].ratio > sorted[k - 1].ratio)) {
            throw Error("nonsmoothness_witness: difference quotient not increasing at t = " +
                        std::to_string(sorted[k].t));
        }
    }
    return rows;
}

}  // namespace sphrad
