#include "sphrad/gaussian_model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sphrad {

GaussianModel GaussianModel::build(const Eigen::VectorXd& mean,
                                   const Eigen::MatrixXd& covariance) {
    const auto m = mean.size();
    if (m < 1) throw DimensionMismatch("build_model: dimension must be >= 1");
    if (covariance.rows() != m || covariance.cols() != m) {
        throw DimensionMismatch("build_model: covariance must be " + std::to_string(m) +
                                "x" + std::to_string(m) + ", got " +
                                std::to_string(covariance.rows()) + "x" +
                                std::to_string(covariance.cols()));
    }

    const double scale = covariance.cwiseAbs().maxCoeff();
    if (!((covariance - covariance.transpose()).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(scale, 1.0))) {
        throw NotPositiveDefinite("build_model: covariance is not symmetric");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(covariance(i, i) > 0.0)) {
            throw NotPositiveDefinite("build_model: covariance diagonal entry " +
                                      std::to_string(i) + " is not strictly positive");
        }
    }

    GaussianModel model;
    model.mean_ = mean;
    model.sigma_ = 0.5 * (covariance + covariance.transpose());
    model.d_ = model.sigma_.diagonal().cwiseSqrt().cwiseInverse();
    model.r_ = model.d_.asDiagonal() * model.sigma_ * model.d_.asDiagonal();
    // Exact unit diagonal regardless of rounding in the scaling above.
    model.r_.diagonal().setOnes();
    model.r_ = (0.5 * (model.r_ + model.r_.transpose())).eval();

    Eigen::LLT<Eigen::MatrixXd> llt(model.r_);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("build_model: Cholesky of the correlation matrix failed");
    }
    model.l_ = llt.matrixL();

    // Pivot tolerance 1e-12 relative to the largest diagonal of R (= 1).
    const double pivot_floor = 1e-12 * model.r_.diagonal().maxCoeff();
    for (Eigen::Index i = 0; i < m; ++i) {
        const double pivot = model.l_(i, i) * model.l_(i, i);
        if (!(pivot > pivot_floor)) {
            throw NotPositiveDefinite("build_model: Cholesky pivot " + std::to_string(i) +
                                      " below tolerance (correlation matrix is "
                                      "numerically singular)");
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.r_);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    model.condition_ = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
    model.l_norm_ = std::sqrt(std::max(hi, 0.0));
    model.l_min_gain_ = std::sqrt(std::max(lo, 0.0));
    return model;
}

Eigen::VectorXd GaussianModel::standardize(const Eigen::VectorXd& xi) const {
    if (xi.size() != mean_.size()) {
        throw DimensionMismatch("standardize: vector has wrong dimension");
    }
    return d_.cwiseProduct(xi - mean_);
}

Eigen::VectorXd GaussianModel::unstandardize(const Eigen::VectorXd& z) const {
    if (z.size() != mean_.size()) {
        throw DimensionMismatch("unstandardize: vector has wrong dimension");
    }
    return z.cwiseQuotient(d_) + mean_;
}

Eigen::MatrixXd GaussianModel::sigma_factor() const {
    return d_.cwiseInverse().asDiagonal() * l_;
}

namespace {

// g~(x,z) = g(x, D^{-1} z + mu). The map z -> D^{-1} z + mu is affine, so
// convexity in z is preserved; grad_z g~ = D^{-1} grad_z g (D diagonal).
class StandardizedComponent final : public Component {
public:
    StandardizedComponent(ComponentPtr inner, Eigen::VectorXd d_inv, Eigen::VectorXd mu)
        : inner_(std::move(inner)), d_inv_(std::move(d_inv)), mu_(std::move(mu)) {}

    double value(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        return inner_->value(x, to_inner(z));
    }
    Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        return inner_->grad_x(x, to_inner(z));
    }
    Eigen::VectorXd grad_z(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override {
        return d_inv_.cwiseProduct(inner_->grad_z(x, to_inner(z)));
    }
    bool convex_in_z() const override { return inner_->convex_in_z(); }
    bool smooth() const override { return inner_->smooth(); }
    std::string describe() const override {
        return "standardized(" + inner_->describe() + ")";
    }

private:
    Eigen::VectorXd to_inner(const Eigen::VectorXd& z) const {
        return d_inv_.cwiseProduct(z) + mu_;
    }

    ComponentPtr inner_;
    Eigen::VectorXd d_inv_;  // D^{-1} diagonal
    Eigen::VectorXd mu_;
};

}  // namespace

InequalitySystem standardize_system(const GaussianModel& model,
                                    const InequalitySystem& g) {
    if (model.dim() != g.m()) {
        throw DimensionMismatch("standardize_system: model dimension " +
                                std::to_string(model.dim()) + " != system m " +
                                std::to_string(g.m()));
    }
    const bool trivial =
        model.mean().isZero(0.0) && (model.scale().array() == 1.0).all();
    if (trivial) return g;

    const Eigen::VectorXd d_inv = model.scale().cwiseInverse();
    std::vector<ComponentPtr> comps;
    comps.reserve(g.components().size());
    for (const auto& c : g.components()) {
        comps.push_back(std::make_shared<StandardizedComponent>(c, d_inv, model.mean()));
    }
    return InequalitySystem(g.n(), g.m(), std::move(comps));
}

}  // namespace sphrad
