#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sphrad/gaussian_model.hpp"
#include "sphrad/radial_engine.hpp"
#include "sphrad/sphere_sampler.hpp"

namespace sphrad {

// Execution policy for the direction loop. Directions are processed in
// fixed-size chunks whose compensated partial sums are combined in chunk
// order, so reported values are identical for any thread count.
struct ExecPolicy {
    int threads = 1;  // 0 = hardware concurrency
};

// Options shared by the estimator entry points. require_slater applies to
// estimate_probability only: with it the Slater property g(x,0) < 0 is
// enforced (SlaterViolation otherwise); without it the general
// feasible-interval kernel evaluates phi at any x. The gradient and
// subdifferential paths always require the Slater property.
struct EstimatorOptions {
    ExecPolicy exec{};
    RadialConfig radial{};
    bool require_slater = true;
};

struct ScalarEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t n = 0;
    std::string sampler;
    double residual_infinite_mass = 0.0;  // accumulated truncation probability
    double infinite_fraction = 0.0;       // fraction of effectively infinite directions
    double tie_fraction = 0.0;            // fraction of directions with |T(v)| > 1
};

struct VectorEstimate {
    Eigen::VectorXd value;
    Eigen::VectorXd stderr_;
    std::int64_t n = 0;
    std::string sampler;
    double residual_infinite_mass = 0.0;
    double infinite_fraction = 0.0;
    double tie_fraction = 0.0;  // fraction of directions with |T(v)| > 1
};

// Deterministic rule choosing one active index when |T(v)| > 1.
struct TiePolicy {
    enum class Kind { LowestIndex, HighestIndex, MaxCoordinate, MinCoordinate };
    Kind kind = Kind::LowestIndex;
    int coordinate = 0;  // for Max/MinCoordinate

    std::string name() const;
};

// lowest, highest, and per-coordinate extreme selections (2n policies).
std::vector<TiePolicy> default_policies(int n);
// Parses "lowest,highest,extremes" / explicit "max:2" / "min:1" (1-based).
std::vector<TiePolicy> parse_policies(const std::string& csv, int n);

// One integral estimate per tie-selection policy, plus the componentwise
// interval hull over the policy estimates.
struct SubdiffEnclosure {
    std::vector<std::string> policy_names;
    std::vector<Eigen::VectorXd> policy_values;
    std::vector<Eigen::VectorXd> policy_stderrs;
    Eigen::VectorXd hull_lo;
    Eigen::VectorXd hull_hi;
    double tie_fraction = 0.0;
    std::int64_t n = 0;
    std::string sampler;
    double residual_infinite_mass = 0.0;
    double infinite_fraction = 0.0;
};

struct GrowthReport {
    bool pass = true;
    double worst_ratio = 0.0;
    Eigen::VectorXd witness_x;
    Eigen::VectorXd witness_z;
    int witness_component = -1;
    int random_probes = 0;
    double l = 1.0;
};

struct NiceDirectionReport {
    Eigen::VectorXd h;
    bool pass = true;
    double worst_ratio = 0.0;  // max of g°(.,z)(y;h) / (envelope * ||h||)
    Eigen::VectorXd witness_y;
    Eigen::VectorXd witness_z;
    int random_probes = 0;
    double l = 1.0;
};

struct BoundCheckReport {
    int directions_checked = 0;
    int violations = 0;
    double worst_ratio = 0.0;
};

enum class DifferentiabilityVerdict { StrictlyDifferentiable, LipschitzOnly, Unknown };
const char* to_string(DifferentiabilityVerdict v);

struct DiagnosticsReport {
    bool slater_ok = false;
    double g_at_origin = 0.0;
    GrowthReport growth;
    std::vector<NiceDirectionReport> nice_directions;
    BoundCheckReport bound;
    double tie_fraction = 0.0;
    bool all_directions_finite = false;
    double r_hat = 0.0;  // diagnostic constant 2 l K K* / |g(x0,0)|
    bool near_singular_correlation = false;
    DifferentiabilityVerdict verdict = DifferentiabilityVerdict::Unknown;
};

// --- Estimators --------------------------------------------------------------

// phi(x) ~ (1/N) sum_k e(x, v_k) over the sphere sample.
ScalarEstimate estimate_probability(const InequalitySystem& sys,
                                    const GaussianModel& model,
                                    const Eigen::VectorXd& x, const SphereSample& sample,
                                    const EstimatorOptions& options = {});

// Gradient of phi via the per-direction terms (ties resolved to the lowest
// active index; tie fraction reported). Requires the Slater property and C^1
// components.
VectorEstimate estimate_gradient(const InequalitySystem& sys, const GaussianModel& model,
                                 const Eigen::VectorXd& x, const SphereSample& sample,
                                 const EstimatorOptions& options = {});

// Clarke-subdifferential enclosure: one integral estimate per tie policy plus
// the componentwise hull. On tie-free problems all policies coincide.
SubdiffEnclosure estimate_subdifferential(const InequalitySystem& sys,
                                          const GaussianModel& model,
                                          const Eigen::VectorXd& x,
                                          const SphereSample& sample,
                                          const std::vector<TiePolicy>& policies,
                                          const EstimatorOptions& options = {});

// Independent oracle: empirical frequency of g(x, xi) <= 0 over N direct
// draws xi ~ N(mu, Sigma); binomial standard error. No spheric-radial
// machinery involved.
ScalarEstimate oracle_probability_mc(const InequalitySystem& sys,
                                     const GaussianModel& model,
                                     const Eigen::VectorXd& x, std::int64_t n,
                                     std::uint64_t seed);

// Central finite differences of estimate_probability with common random
// directions (the same sample at every displaced point); step
// h_j = h_base * (1 + |x_j|). Requires the Slater property at every
// displaced point.
Eigen::VectorXd oracle_gradient_fd(const InequalitySystem& sys,
                                   const GaussianModel& model, const Eigen::VectorXd& x,
                                   const SphereSample& sample, double h_base = 1e-4,
                                   const EstimatorOptions& options = {});

// g(x,0) and the verdict g(x,0) < 0, on the system as given (pass the
// standardized system for the Slater condition of the decomposition).
std::pair<bool, double> check_slater(const InequalitySystem& sys,
                                     const Eigen::VectorXd& x);

// Samples x in B_{1/l}(x0) and z with ||z|| in [l, r_max ||L||] and reports
// the worst ratio ||grad_x g_i(x,z)|| / (l ||z||^{-m} e^{||z||^2/(2||L||^2)}),
// with a witness when it exceeds 1. Deterministic boundary probes
// (x0 +- (1/l) e_j, z = +- l e_k) are always included. A pass is evidence,
// not proof.
GrowthReport check_growth(const InequalitySystem& sys, const GaussianModel& model,
                          const Eigen::VectorXd& x0, double l, int probes,
                          std::uint64_t seed);

// Membership evidence for h in the l-cone of nice directions at x0: checks
// g°(.,z)(y;h) <= l ||z||^{-m} e^{||z||^2/(2||L||^2)} ||h|| at every probe.
NiceDirectionReport probe_nice_direction(const InequalitySystem& sys,
                                         const GaussianModel& model,
                                         const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& h, double l, int probes,
                                         std::uint64_t seed);

// Ratio of the Clarke directional derivative to the nice-direction envelope
// at one probe point (y, z); > 1 falsifies membership for this l.
double nice_direction_ratio(const InequalitySystem& sys, const GaussianModel& model,
                            const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                            const Eigen::VectorXd& h, double l);

// strict-differentiable if (growth passes or all directions finite) and no
// ties; lipschitz-only if the Lipschitz evidence holds but ties were seen;
// unknown otherwise.
DifferentiabilityVerdict classify_differentiability(bool growth_pass,
                                                    bool all_directions_finite,
                                                    double tie_fraction);

// Full diagnostics at x: Slater, growth, nice directions along +-e_j, the
// per-direction subgradient norm bound, tie statistics and the verdict.
DiagnosticsReport run_diagnostics(const InequalitySystem& sys, const GaussianModel& model,
                                  const Eigen::VectorXd& x, const SphereSample& sample,
                                  double l, int probes, std::uint64_t seed,
                                  const EstimatorOptions& options = {});

// Mean of replicate estimates; stderr = sd(replicate values) / sqrt(R).
ScalarEstimate combine_replicates(const std::vector<ScalarEstimate>& replicates);
VectorEstimate combine_replicates(const std::vector<VectorEstimate>& replicates);

}  // namespace sphrad
