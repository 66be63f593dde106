#pragma once

#include <Eigen/Core>
#include <limits>
#include <vector>

#include "sphrad/distributions.hpp"
#include "sphrad/problem.hpp"

namespace sphrad {

struct RadialConfig {
    // Mixed root tolerance: accept r when |g(x, rLv)| <= eps_root * (1 + |g(x,0)|).
    double eps_root = 1e-10;
    // Relative active-set tie tolerance: i is active when rho_i - rho <= tie_tol * (1 + rho).
    double tie_tol = 1e-9;
    // Directions with no sign change up to r_max = chi quantile of this level
    // are classified effectively infinite (truncation residual <= 1e-12).
    double cutoff_level = 1.0 - 1e-12;
    int max_iterations = 200;
};

// Result of classifying a direction v: either the unique positive root
// rho(x,v) of g(x, rLv) = 0 with its active set, or an effectively infinite
// direction (g stays negative up to the cutoff radius).
struct RadiusOutcome {
    bool finite = false;
    double rho = std::numeric_limits<double>::infinity();
    ActiveSet active;
    // Per-component exit roots rho_i (+inf where the component never exits).
    std::vector<double> component_roots;
    // Effectively-infinite case:
    double cutoff = 0.0;
    double residual_prob = 0.0;  // 1 - F_eta(cutoff), <= 1e-12
};

// Per-direction gradient contribution:
//   -chi(rho) * grad_x g_i(x, rho Lv) / <grad_z g_i(x, rho Lv), Lv>,  i in T(v),
// or the zero contribution for effectively infinite directions.
struct DirectionGradientTerm {
    bool zero = false;
    std::vector<int> active;
    std::vector<Eigen::VectorXd> terms;
    std::vector<double> denominators;  // <grad_z g_i, Lv> per active i
    double rho = 0.0;
    double chi_rho = 0.0;
};

// Probability mass of {r >= 0 : g(x, rLv) <= 0} under the Chi distribution.
// Defined for any x (with or without the Slater property); by convexity in z
// the feasible r-set is an interval.
struct RayProbability {
    double e = 0.0;
    bool effectively_infinite = false;
    double residual = 0.0;
    int active_count = 0;  // |T(v)| on the Slater path, 0 otherwise
};

// Per-direction kernel of the spheric-radial decomposition. Holds the
// standardized system, the Cholesky factor L of the correlation matrix, and
// the Chi distribution with m degrees of freedom. Stateless per call; safe
// for concurrent fan-out over directions.
class RadialEngine {
public:
    RadialEngine(InequalitySystem standardized_system, Eigen::MatrixXd l,
                 ChiDistribution chi, RadialConfig config = {});

    // Values of the system and its components at z = 0 for a fixed decision x.
    struct XContext {
        Eigen::VectorXd x;
        double g0 = 0.0;                // g(x,0) = max_i g_i(x,0)
        std::vector<double> g0_comp;    // g_i(x,0)
        bool slater = false;            // g0 < 0
    };

    // Evaluates g(.,0) at x. With require_slater, throws SlaterViolation
    // unless g(x,0) < 0.
    XContext prepare(const Eigen::VectorXd& x, bool require_slater = true) const;

    // Unique positive root of g(x, rLv) = 0 (finite directions) or the
    // effectively-infinite classification. Requires the Slater property.
    // Throws SlaterViolation / NonConvexityDetected / DomainError (non-unit v).
    RadiusOutcome solve_radius(const XContext& ctx, const Eigen::VectorXd& v) const;
    RadiusOutcome solve_radius(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;

    // e(x,v) = F_eta(rho(x,v)); 1 for effectively infinite directions.
    double radial_probability(const RadiusOutcome& outcome) const;

    // Chi-measure of the feasible r-interval along v; works without the
    // Slater property (the feasible set is then a general interval).
    RayProbability ray_probability(const XContext& ctx, const Eigen::VectorXd& v) const;

    // Per-direction gradient terms for the active components, or the zero
    // contribution for effectively infinite directions. Requires every
    // active component to be C^1 (else NonSmoothComponent); throws
    // DegenerateDenominator if <grad_z g_i, Lv> <= 1e-14.
    DirectionGradientTerm radial_gradient(const XContext& ctx, const Eigen::VectorXd& v,
                                          const RadiusOutcome& outcome) const;

    const InequalitySystem& system() const { return sys_; }
    const Eigen::MatrixXd& l_factor() const { return l_; }
    const ChiDistribution& chi() const { return chi_; }
    const RadialConfig& config() const { return config_; }

    // Cutoff radius r_max with 1 - F_eta(r_max) <= 1 - cutoff_level.
    double r_max() const { return r_max_; }
    double residual_at_cutoff() const { return residual_; }

private:
    // Exit root of component i along lv given g_i(x,0) < 0; +inf when the
    // component stays negative up to r_max.
    double component_exit_root(const XContext& ctx, int i, const Eigen::VectorXd& lv,
                               double f_tol) const;
    // Feasible r-interval [enter, exit] of component i for arbitrary g_i(x,0).
    // Returns false when the intersection with [0, inf) is empty.
    bool component_interval(const XContext& ctx, int i, const Eigen::VectorXd& lv,
                            double f_tol, double& enter, double& exit) const;
    double refine_root(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& lv,
                       double lo, double hi, double fhi, double f_tol) const;
    // Entry root in (0, rneg) given g_i(x,0) >= 0 > g_i(x, rneg Lv).
    double refine_enter(int i, const XContext& ctx, const Eigen::VectorXd& lv,
                        double rneg, double f_tol) const;
    // Exit root beyond rneg given g_i(x, rneg Lv) < 0; +inf when none by r_max.
    double exit_from_negative(int i, const XContext& ctx, const Eigen::VectorXd& lv,
                              double rneg, double f_tol) const;
    void check_unit(const Eigen::VectorXd& v) const;

    InequalitySystem sys_;
    Eigen::MatrixXd l_;
    ChiDistribution chi_;
    RadialConfig config_;
    double r_max_;
    double residual_;
};

}  // namespace sphrad
