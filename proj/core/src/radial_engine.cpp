#include "sphrad/radial_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sphrad {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

RadialEngine::RadialEngine(InequalitySystem standardized_system, Eigen::MatrixXd l,
                           ChiDistribution chi, RadialConfig config)
    : sys_(std::move(standardized_system)),
      l_(std::move(l)),
      chi_(chi),
      config_(config) {
    if (l_.rows() != sys_.m() || l_.cols() != sys_.m()) {
        throw DimensionMismatch("RadialEngine: L must be m x m");
    }
    if (chi_.degrees() != sys_.m()) {
        throw DimensionMismatch("RadialEngine: chi degrees of freedom must equal m");
    }

    // Solve sf(t) = 1 - cutoff_level by bisection and keep the upper end of
    // the final bracket so that the truncation residual is guaranteed.
    const double target = 1.0 - config_.cutoff_level;
    double lo = 0.5, hi = 45.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (chi_.sf(mid) > target) lo = mid; else hi = mid;
    }
    r_max_ = hi;
    residual_ = chi_.sf(r_max_);
}

RadialEngine::XContext RadialEngine::prepare(const Eigen::VectorXd& x,
                                             bool require_slater) const {
    XContext ctx;
    ctx.x = x;
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(sys_.m());
    ctx.g0_comp.resize(static_cast<std::size_t>(sys_.p()));
    ctx.g0 = -kInf;
    for (int i = 0; i < sys_.p(); ++i) {
        const double gi = sys_.value(i, x, origin);
        ctx.g0_comp[static_cast<std::size_t>(i)] = gi;
        ctx.g0 = std::max(ctx.g0, gi);
    }
    ctx.slater = ctx.g0 < 0.0;
    if (require_slater && !ctx.slater) {
        throw SlaterViolation(
            "Slater condition violated: g(x,0) = " + std::to_string(ctx.g0) +
                " >= 0 (the standardized origin must be strictly feasible)",
            ctx.g0);
    }
    return ctx;
}

void RadialEngine::check_unit(const Eigen::VectorXd& v) const {
    if (v.size() != sys_.m()) {
        throw DimensionMismatch("direction v has wrong dimension");
    }
    if (std::abs(v.norm() - 1.0) > 1e-12) {
        throw DomainError("direction v must be a unit vector (|norm - 1| <= 1e-12)");
    }
}

double RadialEngine::refine_root(int i, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& lv, double lo, double hi,
                                 double fhi, double f_tol) const {
    // Invariant: f(lo) < 0 <= f(hi). Newton from the z-gradient chain rule
    // d/dr g_i(x, rLv) = <grad_z g_i(x, rLv), Lv>, bisection as safeguard;
    // components declared non-smooth in z use pure bisection.
    const bool use_newton = sys_.component(i).smooth();
    double r = hi, fr = fhi;
    if (fr == 0.0) return r;
    for (int it = 0; it < config_.max_iterations; ++it) {
        if (std::abs(fr) <= f_tol && it > 0) return r;
        if (fr < 0.0) lo = r; else hi = r;
        if (hi - lo <= 1e-15 * (1.0 + hi)) return hi;

        double next = 0.0;
        bool have_newton = false;
        if (use_newton) {
            const double slope = sys_.grad_z(i, x, r * lv).dot(lv);
            if (slope > 0.0) {
                next = r - fr / slope;
                have_newton = next > lo && next < hi;
            }
        }
        if (!have_newton) next = 0.5 * (lo + hi);
        r = next;
        fr = sys_.value(i, x, r * lv);
    }
    return r;
}

double RadialEngine::component_exit_root(const XContext& ctx, int i,
                                         const Eigen::VectorXd& lv, double f_tol) const {
    double lo = 0.0;
    double hi = std::min(1.0, r_max_);
    double fhi = sys_.value(i, ctx.x, hi * lv);
    while (fhi < 0.0) {
        if (hi >= r_max_) return kInf;
        lo = hi;
        hi = std::min(2.0 * hi, r_max_);
        fhi = sys_.value(i, ctx.x, hi * lv);
    }
    return refine_root(i, ctx.x, lv, lo, hi, fhi, f_tol);
}

RadiusOutcome RadialEngine::solve_radius(const XContext& ctx,
                                         const Eigen::VectorXd& v) const {
    if (!ctx.slater) {
        throw SlaterViolation("solve_radius requires g(x,0) < 0, got " +
                                  std::to_string(ctx.g0),
                              ctx.g0);
    }
    check_unit(v);
    const Eigen::VectorXd lv = l_ * v;
    const double f_tol = 0.01 * config_.eps_root * (1.0 + std::abs(ctx.g0));

    RadiusOutcome out;
    out.component_roots.resize(static_cast<std::size_t>(sys_.p()), kInf);
    double rho = kInf;
    for (int i = 0; i < sys_.p(); ++i) {
        const double ri = component_exit_root(ctx, i, lv, f_tol);
        out.component_roots[static_cast<std::size_t>(i)] = ri;
        rho = std::min(rho, ri);
    }

    if (!std::isfinite(rho)) {
        out.finite = false;
        out.cutoff = r_max_;
        out.residual_prob = residual_;
        return out;
    }

    out.finite = true;
    out.rho = rho;
    out.active.tie_tolerance = config_.tie_tol;
    for (int i = 0; i < sys_.p(); ++i) {
        const double ri = out.component_roots[static_cast<std::size_t>(i)];
        if (std::isfinite(ri) && ri - rho <= config_.tie_tol * (1.0 + rho)) {
            out.active.indices.push_back(i);
        }
    }

    // Convexity sanity: on [0, rho] the section r -> g(x, rLv) must stay
    // negative; a nonnegative value at rho/2 means the declared convexity in
    // z does not hold.
    if (sys_.max_value(ctx.x, 0.5 * rho * lv) > f_tol) {
        throw NonConvexityDetected(
            "g(x, (rho/2) Lv) >= 0 at an interior point of the bracket; "
            "component is not convex in z as declared");
    }
    return out;
}

RadiusOutcome RadialEngine::solve_radius(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& v) const {
    return solve_radius(prepare(x), v);
}

double RadialEngine::radial_probability(const RadiusOutcome& outcome) const {
    return outcome.finite ? chi_.cdf(outcome.rho) : 1.0;
}

bool RadialEngine::component_interval(const XContext& ctx, int i,
                                      const Eigen::VectorXd& lv, double f_tol,
                                      double& enter, double& exit) const {
    const double f0 = ctx.g0_comp[static_cast<std::size_t>(i)];
    if (f0 < 0.0) {
        enter = 0.0;
        exit = component_exit_root(ctx, i, lv, f_tol);
        return true;
    }

    auto f = [&](double r) { return sys_.value(i, ctx.x, r * lv); };
    // Right derivative of the convex section at 0 (finite-difference fallback
    // for non-smooth components or undefined gradients at the origin).
    double slope;
    try {
        if (sys_.component(i).smooth()) {
            slope = sys_.grad_z(i, ctx.x, Eigen::VectorXd::Zero(sys_.m())).dot(lv);
        } else {
            slope = (f(1e-7) - f0) / 1e-7;
        }
    } catch (const DomainError&) {
        slope = (f(1e-7) - f0) / 1e-7;
    }

    if (f0 == 0.0) {
        if (slope > 0.0) {
            enter = exit = 0.0;  // the ray touches the boundary only at r = 0
            return true;
        }
        if (slope < 0.0) {
            // Section dips negative immediately; find a negative point, then
            // the exit root beyond it.
            double rneg = 1.0, fneg = f(rneg);
            while (fneg >= 0.0 && rneg > 1e-12) {
                rneg *= 0.5;
                fneg = f(rneg);
            }
            if (fneg >= 0.0) { enter = exit = 0.0; return true; }
            enter = 0.0;
            exit = exit_from_negative(i, ctx, lv, rneg, f_tol);
            return true;
        }
        // Flat start: 0 minimizes the section, so it is feasible only while
        // it stays at zero (e.g. a section that is identically zero out to
        // some radius).
        const double f1 = f(1.0);
        if (f1 <= 0.0) {
            enter = 0.0;
            exit = exit_from_negative(i, ctx, lv, 1.0, f_tol);
            return true;
        }
        enter = exit = 0.0;
        return true;
    }

    // f0 > 0: by convexity the section can only become feasible if it
    // initially decreases.
    if (slope >= 0.0) return false;

    // Walk down until the section turns negative or starts rising again.
    double prev = 0.0, fprev = f0;
    double r = 1.0, fr = f(r);
    while (fr > 0.0) {
        if (fr > fprev) {
            // Passed the minimum while still positive: locate it by bisecting
            // the (monotone) slope; if the minimum is positive, infeasible.
            double a = prev * 0.5, b = r;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (a + b);
                const double ds = (f(mid + 1e-7) - f(mid)) / 1e-7;
                if (ds < 0.0) a = mid; else b = mid;
            }
            const double rmin = 0.5 * (a + b);
            const double fmin = f(rmin);
            if (fmin > 0.0) return false;
            // Negative dip found after all: enter in (prev_pos, rmin], exit after.
            enter = refine_enter(i, ctx, lv, rmin, f_tol);
            exit = exit_from_negative(i, ctx, lv, rmin, f_tol);
            return true;
        }
        if (r >= r_max_) return false;
        prev = r;
        fprev = fr;
        r = std::min(2.0 * r, r_max_);
        fr = f(r);
    }
    // fr <= 0: enter root in (0, r], exit root beyond.
    enter = refine_enter(i, ctx, lv, r, f_tol);
    exit = exit_from_negative(i, ctx, lv, r, f_tol);
    return true;
}

double RadialEngine::refine_enter(int i, const XContext& ctx, const Eigen::VectorXd& lv,
                                  double rneg, double f_tol) const {
    // Decreasing crossing: f(lo) >= 0 > f(hi). Bisection with a Newton step
    // where the slope is available and negative.
    double lo = 0.0, hi = rneg;
    const bool use_newton = sys_.component(i).smooth();
    double r = 0.5 * (lo + hi);
    for (int it = 0; it < config_.max_iterations; ++it) {
        const double fr = sys_.value(i, ctx.x, r * lv);
        if (std::abs(fr) <= f_tol) return r;
        if (fr >= 0.0) lo = r; else hi = r;
        if (hi - lo <= 1e-15 * (1.0 + hi)) return 0.5 * (lo + hi);
        double next = 0.0;
        bool have_newton = false;
        if (use_newton) {
            const double slope = sys_.grad_z(i, ctx.x, r * lv).dot(lv);
            if (slope < 0.0) {
                next = r - fr / slope;
                have_newton = next > lo && next < hi;
            }
        }
        r = have_newton ? next : 0.5 * (lo + hi);
    }
    return r;
}

double RadialEngine::exit_from_negative(int i, const XContext& ctx,
                                        const Eigen::VectorXd& lv, double rneg,
                                        double f_tol) const {
    double lo = rneg;
    double hi = std::min(std::max(2.0 * rneg, 1.0), r_max_);
    if (hi <= lo) return kInf;  // already at the cutoff
    double fhi = sys_.value(i, ctx.x, hi * lv);
    while (fhi < 0.0) {
        if (hi >= r_max_) return kInf;
        lo = hi;
        hi = std::min(2.0 * hi, r_max_);
        fhi = sys_.value(i, ctx.x, hi * lv);
    }
    return refine_root(i, ctx.x, lv, lo, hi, fhi, f_tol);
}

RayProbability RadialEngine::ray_probability(const XContext& ctx,
                                             const Eigen::VectorXd& v) const {
    if (ctx.slater) {
        const RadiusOutcome outcome = solve_radius(ctx, v);
        RayProbability rp;
        rp.e = radial_probability(outcome);
        rp.effectively_infinite = !outcome.finite;
        rp.residual = outcome.residual_prob;
        rp.active_count = static_cast<int>(outcome.active.indices.size());
        return rp;
    }

    check_unit(v);
    const Eigen::VectorXd lv = l_ * v;
    const double f_tol = 0.01 * config_.eps_root * (1.0 + std::abs(ctx.g0));

    double lo = 0.0, hi = kInf;
    for (int i = 0; i < sys_.p(); ++i) {
        double enter = 0.0, exit = kInf;
        if (!component_interval(ctx, i, lv, f_tol, enter, exit)) {
            return {0.0, false, 0.0};
        }
        lo = std::max(lo, enter);
        hi = std::min(hi, exit);
    }
    if (!(hi >= lo)) return {0.0, false, 0.0};

    RayProbability rp;
    if (std::isinf(hi)) {
        rp.effectively_infinite = true;
        rp.residual = residual_;
        rp.e = 1.0 - chi_.cdf(lo);
    } else {
        rp.e = std::max(chi_.cdf(hi) - chi_.cdf(lo), 0.0);
    }
    return rp;
}

DirectionGradientTerm RadialEngine::radial_gradient(const XContext& ctx,
                                                    const Eigen::VectorXd& v,
                                                    const RadiusOutcome& outcome) const {
    DirectionGradientTerm term;
    if (!outcome.finite) {
        term.zero = true;
        return term;
    }

    const Eigen::VectorXd lv = l_ * v;
    const double rho = outcome.rho;
    const double chi_rho = chi_.pdf(rho);
    const Eigen::VectorXd z_root = rho * lv;

    term.rho = rho;
    term.chi_rho = chi_rho;
    term.active = outcome.active.indices;
    for (int i : outcome.active.indices) {
        if (!sys_.component(i).smooth()) {
            throw NonSmoothComponent("radial_gradient: component " + std::to_string(i) +
                                     " is not C^1; only the smooth path is supported");
        }
        const double denom = sys_.grad_z(i, ctx.x, z_root).dot(lv);
        if (denom <= 1e-14) {
            throw DegenerateDenominator(
                "radial_gradient: <grad_z g_i, Lv> = " + std::to_string(denom) +
                " <= 1e-14 at the root, contradicting the convexity lower bound");
        }
        term.denominators.push_back(denom);
        term.terms.push_back((-chi_rho / denom) * sys_.grad_x(i, ctx.x, z_root));
    }
    return term;
}

}  // namespace sphrad
