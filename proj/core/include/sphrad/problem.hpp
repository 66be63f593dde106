#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "sphrad/errors.hpp"
#include "sphrad/expression.hpp"

namespace sphrad {

// Constraint indices attaining the minimal per-component radius at a
// direction, together with the tie tolerance that was applied.
struct ActiveSet {
    std::vector<int> indices;
    double tie_tolerance = 0.0;
};

// One scalar constraint g_i(x,z) with its partial gradients.
//
// convex_in_z() is a declared contract (assumption on the model, spot-checked
// stochastically in the tests, never verified symbolically). smooth() states
// that the component is C^1 at every point the estimators evaluate; the
// production gradient path refuses systems with non-smooth components.
class Component {
public:
    virtual ~Component() = default;

    virtual double value(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const = 0;
    virtual Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const = 0;
    virtual Eigen::VectorXd grad_z(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const = 0;

    virtual bool convex_in_z() const = 0;
    virtual bool smooth() const = 0;
    virtual std::string describe() const = 0;
};

using ComponentPtr = std::shared_ptr<const Component>;

// The inequality system g(x,z) = max_i g_i(x,z) over x in R^n, z in R^m.
// Immutable after construction; evaluation is reentrant.
class InequalitySystem {
public:
    InequalitySystem(int n, int m, std::vector<ComponentPtr> components);

    int n() const { return n_; }
    int m() const { return m_; }
    int p() const { return static_cast<int>(components_.size()); }

    const Component& component(int i) const;
    const std::vector<ComponentPtr>& components() const { return components_; }

    double value(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& z) const;
    Eigen::VectorXd grad_x(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& z) const;
    Eigen::VectorXd grad_z(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& z) const;

    // g(x,z) = max_i g_i(x,z)
    double max_value(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const;

    bool all_smooth() const;

private:
    void check_dims(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const;
    void check_index(int i) const;

    int n_;
    int m_;
    std::vector<ComponentPtr> components_;
};

// --- Built-in component families -------------------------------------------

// Affine in both arguments: g(x,z) = <w,x> + <c,z> + d.
ComponentPtr make_affine_component(Eigen::VectorXd w, Eigen::VectorXd c, double d);

// Separable convex in z: g(x,z) = a(x) + sum_j q_j z_j^2 with q_j >= 0.
// a is an expression over x variables only.
ComponentPtr make_separable_quadratic_component(const ExprPtr& a_of_x, int n,
                                                Eigen::VectorXd q);

// Norm ball: g(x,z) = ||z|| - c(x), with c an expression over x variables
// only. grad_z is undefined at z = 0 (never reached by the radial solver,
// which only differentiates at positive radii).
ComponentPtr make_ball_component(const ExprPtr& radius_of_x, int n, int m);

// A parsed expression with forward-mode AD gradients. convex_in_z is a
// declared contract. The component reports itself non-smooth when a norm()
// node touches z variables, unless smooth_override says otherwise.
ComponentPtr make_expression_component(const ExprPtr& e, int n, int m,
                                       bool convex_in_z = true,
                                       int smooth_override = -1);
ComponentPtr make_expression_component(std::string_view src, int n, int m,
                                       bool convex_in_z = true,
                                       int smooth_override = -1);

}  // namespace sphrad
