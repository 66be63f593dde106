#pragma once

#include <Eigen/Core>

#include "sphrad/problem.hpp"

namespace sphrad {

// The Gaussian law of the random vector xi ~ N(mu, Sigma) together with the
// standardization that reduces it to N(0, R):
//
//   xi~ = D (xi - mu),   D_ii = 1 / sqrt(Sigma_ii),   R = D Sigma D,
//
// and the lower Cholesky factor L with L L^T = R used by the spheric-radial
// decomposition. Immutable after construction; safe to share across threads.
class GaussianModel {
public:
    // Validates shapes, symmetry and positive definiteness (Cholesky of R
    // with pivot tolerance 1e-12 relative to the largest diagonal entry).
    // Throws DimensionMismatch / NotPositiveDefinite.
    static GaussianModel build(const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& covariance);

    int dim() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return sigma_; }
    const Eigen::MatrixXd& correlation() const { return r_; }
    const Eigen::MatrixXd& cholesky() const { return l_; }

    // Diagonal of D as a vector.
    const Eigen::VectorXd& scale() const { return d_; }

    // Spectral condition number of R; near_singular() flags > 1e12. This is
    // a diagnostics warning only, the math just needs L nonsingular.
    double condition_estimate() const { return condition_; }
    bool near_singular() const { return condition_ > 1e12; }

    // Operator 2-norm of L (= sqrt of the largest eigenvalue of R).
    double l_operator_norm() const { return l_norm_; }
    // min_{||v||=1} ||Lv|| (= sqrt of the smallest eigenvalue of R).
    double l_min_gain() const { return l_min_gain_; }

    // xi~ = D (xi - mu)
    Eigen::VectorXd standardize(const Eigen::VectorXd& xi) const;
    // xi = D^{-1} z + mu
    Eigen::VectorXd unstandardize(const Eigen::VectorXd& z) const;

    // Factor A with A A^T = Sigma (A = D^{-1} L), used to draw xi directly.
    Eigen::MatrixXd sigma_factor() const;

private:
    GaussianModel() = default;

    Eigen::VectorXd mean_;
    Eigen::MatrixXd sigma_;
    Eigen::MatrixXd r_;
    Eigen::VectorXd d_;
    Eigen::MatrixXd l_;
    double condition_ = 1.0;
    double l_norm_ = 1.0;
    double l_min_gain_ = 1.0;
};

// g~(x,z) := g(x, D^{-1} z + mu): rewrites the system over the standardized
// vector. Gradients transform accordingly (grad_z picks up a factor D^{-1}).
// Throws DimensionMismatch when model.dim() != g.m().
InequalitySystem standardize_system(const GaussianModel& model,
                                    const InequalitySystem& g);

}  // namespace sphrad
