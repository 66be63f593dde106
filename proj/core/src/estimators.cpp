#include "sphrad/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace sphrad {

namespace {

constexpr std::int64_t kChunk = 1024;

// Compensated (Kahan) accumulator. Within a chunk values are added in index
// order; chunk totals are then combined in chunk order, so the result is
// independent of the thread schedule.
struct Kahan {
    double sum = 0.0;
    double c = 0.0;

    void add(double x) {
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

int resolve_threads(int threads, std::int64_t n_chunks) {
    if (threads == 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
    }
    threads = std::max(threads, 1);
    return static_cast<int>(std::min<std::int64_t>(threads, n_chunks));
}

// Runs fn(chunk_index, begin, end) over [0, n) split into kChunk-sized chunks
// and returns the per-chunk results in chunk order.
template <typename ChunkResult, typename Fn>
std::vector<ChunkResult> run_chunked(std::int64_t n, int threads, Fn&& fn) {
    const std::int64_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<ChunkResult> results(static_cast<std::size_t>(n_chunks));
    const int workers = resolve_threads(threads, n_chunks);

    auto work_on = [&](std::int64_t chunk) {
        const std::int64_t begin = chunk * kChunk;
        const std::int64_t end = std::min(n, begin + kChunk);
        results[static_cast<std::size_t>(chunk)] = fn(begin, end);
    };

    if (workers <= 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) work_on(c);
        return results;
    }

    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t c = next.fetch_add(1);
                if (c >= n_chunks) return;
                try {
                    work_on(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return results;
}

void validate_inputs(const InequalitySystem& sys, const GaussianModel& model,
                     const Eigen::VectorXd& x, const SphereSample& sample) {
    if (model.dim() != sys.m()) {
        throw DimensionMismatch("estimator: model dimension != system m");
    }
    if (x.size() != sys.n()) {
        throw DimensionMismatch("estimator: x must lie in R^" + std::to_string(sys.n()));
    }
    if (sample.dim != sys.m()) {
        throw DimensionMismatch("estimator: sphere sample dimension != system m");
    }
    if (sample.count() < 1) {
        throw OutOfRange("estimator: empty sphere sample");
    }
}

double sample_sd(double sum, double sumsq, std::int64_t n) {
    if (n < 2) return 0.0;
    const double mean = sum / static_cast<double>(n);
    const double var =
        std::max(0.0, (sumsq - static_cast<double>(n) * mean * mean) /
                          static_cast<double>(n - 1));
    return std::sqrt(var);
}

}  // namespace

ScalarEstimate estimate_probability(const InequalitySystem& sys,
                                    const GaussianModel& model,
                                    const Eigen::VectorXd& x, const SphereSample& sample,
                                    const EstimatorOptions& options) {
    validate_inputs(sys, model, x, sample);
    const InequalitySystem std_sys = standardize_system(model, sys);
    const RadialEngine engine(std_sys, model.cholesky(), ChiDistribution(sys.m()),
                              options.radial);
    const auto ctx = engine.prepare(x, options.require_slater);

    struct Chunk {
        Kahan e, e2, resid;
        std::int64_t infinite = 0;
        std::int64_t ties = 0;
    };
    const std::int64_t n = sample.count();
    const auto chunks =
        run_chunked<Chunk>(n, options.exec.threads, [&](std::int64_t b, std::int64_t e) {
            Chunk c;
            Eigen::VectorXd v(sample.dim);
            for (std::int64_t k = b; k < e; ++k) {
                v = sample.directions.col(k);
                const RayProbability rp = engine.ray_probability(ctx, v);
                c.e.add(rp.e);
                c.e2.add(rp.e * rp.e);
                c.resid.add(rp.residual);
                if (rp.effectively_infinite) ++c.infinite;
                if (rp.active_count > 1) ++c.ties;
            }
            return c;
        });

    Kahan sum_e, sum_e2, sum_resid;
    std::int64_t infinite = 0, ties = 0;
    for (const auto& c : chunks) {
        sum_e.add(c.e.sum);
        sum_e2.add(c.e2.sum);
        sum_resid.add(c.resid.sum);
        infinite += c.infinite;
        ties += c.ties;
    }

    ScalarEstimate est;
    est.n = n;
    est.sampler = sample.generator;
    est.value = sum_e.sum / static_cast<double>(n);
    est.stderr_ = sample_sd(sum_e.sum, sum_e2.sum, n) / std::sqrt(static_cast<double>(n));
    est.residual_infinite_mass = sum_resid.sum / static_cast<double>(n);
    est.infinite_fraction = static_cast<double>(infinite) / static_cast<double>(n);
    est.tie_fraction = static_cast<double>(ties) / static_cast<double>(n);
    return est;
}

namespace {

// Shared per-direction machinery for the gradient/subdifferential loops.
struct GradientChunk {
    std::vector<Kahan> sums;    // one per (policy, coordinate)
    std::vector<Kahan> sumsq;
    Kahan resid;
    std::int64_t infinite = 0;
    std::int64_t ties = 0;

    void init(std::size_t lanes) {
        sums.assign(lanes, Kahan{});
        sumsq.assign(lanes, Kahan{});
    }
};

int select_index(const DirectionGradientTerm& term, const TiePolicy& policy) {
    const int count = static_cast<int>(term.terms.size());
    switch (policy.kind) {
        case TiePolicy::Kind::LowestIndex:
            return 0;
        case TiePolicy::Kind::HighestIndex:
            return count - 1;
        case TiePolicy::Kind::MaxCoordinate: {
            int best = 0;
            for (int a = 1; a < count; ++a) {
                if (term.terms[static_cast<std::size_t>(a)][policy.coordinate] >
                    term.terms[static_cast<std::size_t>(best)][policy.coordinate]) {
                    best = a;
                }
            }
            return best;
        }
        case TiePolicy::Kind::MinCoordinate: {
            int best = 0;
            for (int a = 1; a < count; ++a) {
                if (term.terms[static_cast<std::size_t>(a)][policy.coordinate] <
                    term.terms[static_cast<std::size_t>(best)][policy.coordinate]) {
                    best = a;
                }
            }
            return best;
        }
    }
    return 0;
}

GradientChunk gradient_chunk_loop(const RadialEngine& engine,
                                  const RadialEngine::XContext& ctx,
                                  const SphereSample& sample,
                                  const std::vector<TiePolicy>& policies, int n_coords,
                                  std::int64_t b, std::int64_t e) {
    GradientChunk c;
    c.init(policies.size() * static_cast<std::size_t>(n_coords));
    Eigen::VectorXd v(sample.dim);
    for (std::int64_t k = b; k < e; ++k) {
        v = sample.directions.col(k);
        const RadiusOutcome outcome = engine.solve_radius(ctx, v);
        if (!outcome.finite) {
            ++c.infinite;
            c.resid.add(outcome.residual_prob);
            // Zero contribution: still counts toward the averages.
            for (auto& s : c.sumsq) s.add(0.0);
            for (auto& s : c.sums) s.add(0.0);
            continue;
        }
        const DirectionGradientTerm term = engine.radial_gradient(ctx, v, outcome);
        if (term.terms.size() > 1) ++c.ties;
        for (std::size_t pi = 0; pi < policies.size(); ++pi) {
            const int chosen = select_index(term, policies[pi]);
            const Eigen::VectorXd& g = term.terms[static_cast<std::size_t>(chosen)];
            for (int j = 0; j < n_coords; ++j) {
                const std::size_t lane = pi * static_cast<std::size_t>(n_coords) +
                                         static_cast<std::size_t>(j);
                c.sums[lane].add(g[j]);
                c.sumsq[lane].add(g[j] * g[j]);
            }
        }
    }
    return c;
}

struct GradientTotals {
    std::vector<double> sums;
    std::vector<double> sumsq;
    double resid = 0.0;
    std::int64_t infinite = 0;
    std::int64_t ties = 0;
};

GradientTotals run_gradient_loop(const InequalitySystem& sys, const GaussianModel& model,
                                 const Eigen::VectorXd& x, const SphereSample& sample,
                                 const std::vector<TiePolicy>& policies,
                                 const EstimatorOptions& options) {
    validate_inputs(sys, model, x, sample);
    const InequalitySystem std_sys = standardize_system(model, sys);
    if (!std_sys.all_smooth()) {
        throw NonSmoothComponent(
            "gradient estimation requires all components to be C^1");
    }
    const RadialEngine engine(std_sys, model.cholesky(), ChiDistribution(sys.m()),
                              options.radial);
    const auto ctx = engine.prepare(x, /*require_slater=*/true);

    const int n_coords = sys.n();
    const std::int64_t n = sample.count();
    const auto chunks = run_chunked<GradientChunk>(
        n, options.exec.threads, [&](std::int64_t b, std::int64_t e) {
            return gradient_chunk_loop(engine, ctx, sample, policies, n_coords, b, e);
        });

    GradientTotals totals;
    const std::size_t lanes = policies.size() * static_cast<std::size_t>(n_coords);
    std::vector<Kahan> sums(lanes), sumsq(lanes);
    Kahan resid;
    for (const auto& c : chunks) {
        for (std::size_t l = 0; l < lanes; ++l) {
            sums[l].add(c.sums[l].sum);
            sumsq[l].add(c.sumsq[l].sum);
        }
        resid.add(c.resid.sum);
        totals.infinite += c.infinite;
        totals.ties += c.ties;
    }
    totals.sums.resize(lanes);
    totals.sumsq.resize(lanes);
    for (std::size_t l = 0; l < lanes; ++l) {
        totals.sums[l] = sums[l].sum;
        totals.sumsq[l] = sumsq[l].sum;
    }
    totals.resid = resid.sum;
    return totals;
}

}  // namespace

VectorEstimate estimate_gradient(const InequalitySystem& sys, const GaussianModel& model,
                                 const Eigen::VectorXd& x, const SphereSample& sample,
                                 const EstimatorOptions& options) {
    const std::vector<TiePolicy> lowest{TiePolicy{TiePolicy::Kind::LowestIndex, 0}};
    const GradientTotals totals =
        run_gradient_loop(sys, model, x, sample, lowest, options);

    const std::int64_t n = sample.count();
    VectorEstimate est;
    est.n = n;
    est.sampler = sample.generator;
    est.value.resize(sys.n());
    est.stderr_.resize(sys.n());
    for (int j = 0; j < sys.n(); ++j) {
        const std::size_t lane = static_cast<std::size_t>(j);
        est.value[j] = totals.sums[lane] / static_cast<double>(n);
        est.stderr_[j] = sample_sd(totals.sums[lane], totals.sumsq[lane], n) /
                         std::sqrt(static_cast<double>(n));
    }
    est.residual_infinite_mass = totals.resid / static_cast<double>(n);
    est.infinite_fraction =
        static_cast<double>(totals.infinite) / static_cast<double>(n);
    est.tie_fraction = static_cast<double>(totals.ties) / static_cast<double>(n);
    return est;
}

std::string TiePolicy::name() const {
    switch (kind) {
        case Kind::LowestIndex: return "lowest";
        case Kind::HighestIndex: return "highest";
        case Kind::MaxCoordinate: return "max:" + std::to_string(coordinate + 1);
        case Kind::MinCoordinate: return "min:" + std::to_string(coordinate + 1);
    }
    return "?";
}

std::vector<TiePolicy> default_policies(int n) {
    std::vector<TiePolicy> policies;
    policies.push_back({TiePolicy::Kind::LowestIndex, 0});
    policies.push_back({TiePolicy::Kind::HighestIndex, 0});
    for (int j = 0; j < n; ++j) {
        policies.push_back({TiePolicy::Kind::MaxCoordinate, j});
        policies.push_back({TiePolicy::Kind::MinCoordinate, j});
    }
    return policies;
}

std::vector<TiePolicy> parse_policies(const std::string& csv, int n) {
    std::vector<TiePolicy> policies;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t end = csv.find(',', start);
        if (end == std::string::npos) end = csv.size();
        const std::string item = csv.substr(start, end - start);
        start = end + 1;
        if (item.empty()) {
            if (start > csv.size()) break;
            continue;
        }
        if (item == "lowest") {
            policies.push_back({TiePolicy::Kind::LowestIndex, 0});
        } else if (item == "highest") {
            policies.push_back({TiePolicy::Kind::HighestIndex, 0});
        } else if (item == "extremes") {
            for (int j = 0; j < n; ++j) {
                policies.push_back({TiePolicy::Kind::MaxCoordinate, j});
                policies.push_back({TiePolicy::Kind::MinCoordinate, j});
            }
        } else if (item.rfind("max:", 0) == 0 || item.rfind("min:", 0) == 0) {
            const int coord = std::stoi(item.substr(4)) - 1;
            if (coord < 0 || coord >= n) {
                throw ConfigError("policy coordinate out of range in '" + item + "'");
            }
            policies.push_back({item[1] == 'a' ? TiePolicy::Kind::MaxCoordinate
                                               : TiePolicy::Kind::MinCoordinate,
                                coord});
        } else {
            throw ConfigError("unknown tie policy '" + item +
                              "' (expected lowest|highest|extremes|max:J|min:J)");
        }
    }
    if (policies.empty()) throw ConfigError("empty tie policy list");
    return policies;
}

SubdiffEnclosure estimate_subdifferential(const InequalitySystem& sys,
                                          const GaussianModel& model,
                                          const Eigen::VectorXd& x,
                                          const SphereSample& sample,
                                          const std::vector<TiePolicy>& policies,
                                          const EstimatorOptions& options) {
    if (policies.empty()) throw ConfigError("estimate_subdifferential: no policies");
    const GradientTotals totals =
        run_gradient_loop(sys, model, x, sample, policies, options);

    const std::int64_t n = sample.count();
    const int nc = sys.n();
    SubdiffEnclosure enc;
    enc.n = n;
    enc.sampler = sample.generator;
    enc.tie_fraction = static_cast<double>(totals.ties) / static_cast<double>(n);
    enc.residual_infinite_mass = totals.resid / static_cast<double>(n);
    enc.infinite_fraction =
        static_cast<double>(totals.infinite) / static_cast<double>(n);
    enc.hull_lo = Eigen::VectorXd::Constant(nc, std::numeric_limits<double>::infinity());
    enc.hull_hi = Eigen::VectorXd::Constant(nc, -std::numeric_limits<double>::infinity());

    for (std::size_t pi = 0; pi < policies.size(); ++pi) {
        Eigen::VectorXd value(nc), se(nc);
        for (int j = 0; j < nc; ++j) {
            const std::size_t lane = pi * static_cast<std::size_t>(nc) +
                                     static_cast<std::size_t>(j);
            value[j] = totals.sums[lane] / static_cast<double>(n);
            se[j] = sample_sd(totals.sums[lane], totals.sumsq[lane], n) /
                    std::sqrt(static_cast<double>(n));
        }
        enc.hull_lo = enc.hull_lo.cwiseMin(value);
        enc.hull_hi = enc.hull_hi.cwiseMax(value);
        enc.policy_names.push_back(policies[pi].name());
        enc.policy_values.push_back(std::move(value));
        enc.policy_stderrs.push_back(std::move(se));
    }
    return enc;
}

ScalarEstimate oracle_probability_mc(const InequalitySystem& sys,
                                     const GaussianModel& model,
                                     const Eigen::VectorXd& x, std::int64_t n,
                                     std::uint64_t seed) {
    if (model.dim() != sys.m()) {
        throw DimensionMismatch("oracle: model dimension != system m");
    }
    if (x.size() != sys.n()) {
        throw DimensionMismatch("oracle: x must lie in R^" + std::to_string(sys.n()));
    }
    if (n < 1) throw OutOfRange("oracle: sample count must be >= 1");

    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd factor = model.sigma_factor();
    std::int64_t hits = 0;
    for (std::int64_t k = 0; k < n; ++k) {
        const Eigen::VectorXd xi =
            model.mean() + factor * standard_normal_vector(sys.m(), rng);
        if (sys.max_value(x, xi) <= 0.0) ++hits;
    }

    ScalarEstimate est;
    est.n = n;
    est.sampler = "direct-mc:seed=" + std::to_string(seed);
    est.value = static_cast<double>(hits) / static_cast<double>(n);
    est.stderr_ = std::sqrt(std::max(est.value * (1.0 - est.value), 0.0) /
                            static_cast<double>(n));
    return est;
}

Eigen::VectorXd oracle_gradient_fd(const InequalitySystem& sys,
                                   const GaussianModel& model, const Eigen::VectorXd& x,
                                   const SphereSample& sample, double h_base,
                                   const EstimatorOptions& options) {
    EstimatorOptions opt = options;
    opt.require_slater = true;
    Eigen::VectorXd grad(sys.n());
    for (int j = 0; j < sys.n(); ++j) {
        const double h = h_base * (1.0 + std::abs(x[j]));
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fp = estimate_probability(sys, model, xp, sample, opt).value;
        const double fm = estimate_probability(sys, model, xm, sample, opt).value;
        grad[j] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

std::pair<bool, double> check_slater(const InequalitySystem& sys,
                                     const Eigen::VectorXd& x) {
    const double g0 = sys.max_value(x, Eigen::VectorXd::Zero(sys.m()));
    return {g0 < 0.0, g0};
}

namespace {

double growth_envelope(double l, double z_norm, int m, double l_op_norm) {
    return l * std::pow(z_norm, -m) *
           std::exp(z_norm * z_norm / (2.0 * l_op_norm * l_op_norm));
}

// Deterministic boundary probes plus seeded random probes of
// B_{1/l}(x0) x {z : ||z|| in [l, r_hi]}.
template <typename Visit>
void visit_growth_probes(const InequalitySystem& std_sys, const GaussianModel& model,
                         const Eigen::VectorXd& x0, double l, int probes,
                         std::uint64_t seed, Visit&& visit) {
    const int n = std_sys.n();
    const int m = std_sys.m();
    const double r_hi = ChiDistribution(m).quantile(1.0 - 1e-12) * model.l_operator_norm();

    std::vector<Eigen::VectorXd> xs, zs;
    xs.push_back(x0);
    for (int j = 0; j < n; ++j) {
        for (double s : {1.0, -1.0}) {
            Eigen::VectorXd x = x0;
            x[j] += s / l;
            xs.push_back(x);
        }
    }
    for (int k = 0; k < m; ++k) {
        for (double s : {1.0, -1.0}) {
            Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
            z[k] = s * l;
            zs.push_back(z);
        }
    }
    for (const auto& x : xs) {
        for (const auto& z : zs) visit(x, z);
    }

    std::mt19937_64 rng(seed);
    for (int t = 0; t < probes; ++t) {
        Eigen::VectorXd dx = standard_normal_vector(n, rng);
        const double dx_norm = dx.norm();
        const double radius =
            std::pow(uniform_open01(rng), 1.0 / static_cast<double>(n)) / l;
        Eigen::VectorXd x = x0;
        if (dx_norm > 0.0) x += (radius / dx_norm) * dx;

        Eigen::VectorXd dz = standard_normal_vector(m, rng);
        double dz_norm = dz.norm();
        if (dz_norm == 0.0) { dz.setZero(); dz[0] = 1.0; dz_norm = 1.0; }
        const double z_radius = l + uniform_open01(rng) * std::max(r_hi - l, 0.0);
        visit(x, (z_radius / dz_norm) * dz);
    }
}

}  // namespace

GrowthReport check_growth(const InequalitySystem& sys, const GaussianModel& model,
                          const Eigen::VectorXd& x0, double l, int probes,
                          std::uint64_t seed) {
    if (!(l > 0.0)) throw OutOfRange("check_growth: l must be > 0");
    const InequalitySystem std_sys = standardize_system(model, sys);

    GrowthReport report;
    report.l = l;
    report.random_probes = probes;
    visit_growth_probes(std_sys, model, x0, l, probes, seed,
                        [&](const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
                            const double env =
                                growth_envelope(l, z.norm(), std_sys.m(),
                                                model.l_operator_norm());
                            for (int i = 0; i < std_sys.p(); ++i) {
                                const double ratio =
                                    std_sys.grad_x(i, x, z).norm() / env;
                                if (ratio > report.worst_ratio) {
                                    report.worst_ratio = ratio;
                                    report.witness_x = x;
                                    report.witness_z = z;
                                    report.witness_component = i;
                                }
                            }
                        });
    report.pass = report.worst_ratio <= 1.0;
    return report;
}

double nice_direction_ratio(const InequalitySystem& sys, const GaussianModel& model,
                            const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                            const Eigen::VectorXd& h, double l) {
    const InequalitySystem std_sys = standardize_system(model, sys);
    // Clarke directional derivative of the max-system in x: by Danskin,
    // the max of <grad_x g_i, h> over components active at (y, z).
    double gmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < std_sys.p(); ++i) {
        gmax = std::max(gmax, std_sys.value(i, y, z));
    }
    const double tol = 1e-9 * (1.0 + std::abs(gmax));
    double deriv = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < std_sys.p(); ++i) {
        if (std_sys.value(i, y, z) >= gmax - tol) {
            deriv = std::max(deriv, std_sys.grad_x(i, y, z).dot(h));
        }
    }
    const double env =
        growth_envelope(l, z.norm(), std_sys.m(), model.l_operator_norm()) * h.norm();
    return deriv / env;
}

NiceDirectionReport probe_nice_direction(const InequalitySystem& sys,
                                         const GaussianModel& model,
                                         const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& h, double l, int probes,
                                         std::uint64_t seed) {
    if (!(l > 0.0)) throw OutOfRange("probe_nice_direction: l must be > 0");
    if (h.size() != sys.n() || h.norm() == 0.0) {
        throw DimensionMismatch("probe_nice_direction: h must be a nonzero vector in R^n");
    }
    const InequalitySystem std_sys = standardize_system(model, sys);

    NiceDirectionReport report;
    report.h = h;
    report.l = l;
    report.random_probes = probes;
    report.worst_ratio = -std::numeric_limits<double>::infinity();
    visit_growth_probes(std_sys, model, x0, l, probes, seed,
                        [&](const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
                            const double ratio =
                                nice_direction_ratio(sys, model, y, z, h, l);
                            if (ratio > report.worst_ratio) {
                                report.worst_ratio = ratio;
                                report.witness_y = y;
                                report.witness_z = z;
                            }
                        });
    report.pass = report.worst_ratio <= 1.0;
    return report;
}

DifferentiabilityVerdict classify_differentiability(bool growth_pass,
                                                    bool all_directions_finite,
                                                    double tie_fraction) {
    const bool lipschitz_evidence = growth_pass || all_directions_finite;
    if (lipschitz_evidence && tie_fraction == 0.0) {
        return DifferentiabilityVerdict::StrictlyDifferentiable;
    }
    if (lipschitz_evidence) return DifferentiabilityVerdict::LipschitzOnly;
    return DifferentiabilityVerdict::Unknown;
}

const char* to_string(DifferentiabilityVerdict v) {
    switch (v) {
        case DifferentiabilityVerdict::StrictlyDifferentiable:
            return "strict-differentiable";
        case DifferentiabilityVerdict::LipschitzOnly:
            return "lipschitz-only";
        case DifferentiabilityVerdict::Unknown:
            return "unknown";
    }
    return "?";
}

DiagnosticsReport run_diagnostics(const InequalitySystem& sys, const GaussianModel& model,
                                  const Eigen::VectorXd& x, const SphereSample& sample,
                                  double l, int probes, std::uint64_t seed,
                                  const EstimatorOptions& options) {
    validate_inputs(sys, model, x, sample);
    const InequalitySystem std_sys = standardize_system(model, sys);
    const ChiDistribution chi(sys.m());
    const RadialEngine engine(std_sys, model.cholesky(), chi, options.radial);

    DiagnosticsReport report;
    report.near_singular_correlation = model.near_singular();
    const auto [ok, g0] = check_slater(std_sys, x);
    report.slater_ok = ok;
    report.g_at_origin = g0;

    report.growth = check_growth(sys, model, x, l, probes, seed);
    for (int j = 0; j < sys.n(); ++j) {
        for (double s : {1.0, -1.0}) {
            Eigen::VectorXd h = Eigen::VectorXd::Zero(sys.n());
            h[j] = s;
            report.nice_directions.push_back(
                probe_nice_direction(sys, model, x, h, l, probes, seed));
        }
    }

    if (!ok) {
        report.verdict = DifferentiabilityVerdict::Unknown;
        return report;
    }

    // K* = max_{||v||=1} ||Lv||^{-m} = (min singular value of L)^{-m}.
    const double k_star = std::pow(model.l_min_gain(), -sys.m());
    report.r_hat = 2.0 * l * chi.normalizer() * k_star / std::abs(g0);

    const auto ctx = engine.prepare(x, /*require_slater=*/true);
    const bool smooth = std_sys.all_smooth();
    std::int64_t ties = 0, infinite = 0;
    const std::int64_t bound_budget = std::min<std::int64_t>(sample.count(), 256);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);

    for (std::int64_t k = 0; k < sample.count(); ++k) {
        const Eigen::VectorXd v = sample.directions.col(k);
        const RadiusOutcome outcome = engine.solve_radius(ctx, v);
        if (!outcome.finite) {
            ++infinite;
            continue;
        }
        if (outcome.active.indices.size() > 1) ++ties;
        if (!smooth || k >= bound_budget) continue;

        // Norm bound on the per-direction subgradient: ||y*|| <=
        // rho chi(rho) M / |g(x,0)| with M a sampled Lipschitz estimate of
        // g(., rho Lv) near x.
        const DirectionGradientTerm term = engine.radial_gradient(ctx, v, outcome);
        const Eigen::VectorXd z_root = outcome.rho * (model.cholesky() * v);
        const double delta = 1e-6 * (1.0 + x.norm());
        const double g_at = std_sys.max_value(x, z_root);
        double m_hat = 0.0;
        auto probe_dir = [&](const Eigen::VectorXd& d) {
            const double dn = d.norm();
            if (dn == 0.0) return;
            const double g_disp = std_sys.max_value(x + (delta / dn) * d, z_root);
            m_hat = std::max(m_hat, std::abs(g_disp - g_at) / delta);
        };
        for (int j = 0; j < sys.n(); ++j) {
            Eigen::VectorXd ej = Eigen::VectorXd::Zero(sys.n());
            ej[j] = 1.0;
            probe_dir(ej);
            probe_dir(-ej);
        }
        for (const auto& g : term.terms) {
            probe_dir(g);
            probe_dir(-g);
        }
        for (int t = 0; t < 8; ++t) probe_dir(standard_normal_vector(sys.n(), rng));

        const double bound =
            outcome.rho * term.chi_rho * m_hat / std::abs(g0) * (1.0 + 1e-6) + 1e-12;
        ++report.bound.directions_checked;
        for (const auto& g : term.terms) {
            const double norm = g.norm();
            if (bound > 0.0) {
                report.bound.worst_ratio = std::max(report.bound.worst_ratio, norm / bound);
            }
            if (norm > bound) ++report.bound.violations;
        }
    }

    report.tie_fraction =
        static_cast<double>(ties) / static_cast<double>(sample.count());
    report.all_directions_finite = infinite == 0;
    report.verdict = classify_differentiability(report.growth.pass,
                                                report.all_directions_finite,
                                                report.tie_fraction);
    return report;
}

ScalarEstimate combine_replicates(const std::vector<ScalarEstimate>& replicates) {
    if (replicates.empty()) throw OutOfRange("combine_replicates: empty list");
    if (replicates.size() == 1) return replicates.front();
    const auto r = static_cast<double>(replicates.size());
    ScalarEstimate out;
    Kahan sum, sumsq, resid;
    for (const auto& e : replicates) {
        sum.add(e.value);
        sumsq.add(e.value * e.value);
        resid.add(e.residual_infinite_mass);
        out.n += e.n;
        out.infinite_fraction += e.infinite_fraction / r;
    }
    out.value = sum.sum / r;
    out.stderr_ = sample_sd(sum.sum, sumsq.sum, static_cast<std::int64_t>(replicates.size())) /
                  std::sqrt(r);
    out.residual_infinite_mass = resid.sum / r;
    out.sampler = replicates.front().sampler + ",replicates=" +
                  std::to_string(replicates.size());
    return out;
}

VectorEstimate combine_replicates(const std::vector<VectorEstimate>& replicates) {
    if (replicates.empty()) throw OutOfRange("combine_replicates: empty list");
    if (replicates.size() == 1) return replicates.front();
    const auto r = static_cast<double>(replicates.size());
    const int nc = static_cast<int>(replicates.front().value.size());
    VectorEstimate out;
    out.value = Eigen::VectorXd::Zero(nc);
    out.stderr_ = Eigen::VectorXd::Zero(nc);
    for (int j = 0; j < nc; ++j) {
        Kahan sum, sumsq;
        for (const auto& e : replicates) {
            sum.add(e.value[j]);
            sumsq.add(e.value[j] * e.value[j]);
        }
        out.value[j] = sum.sum / r;
        out.stderr_[j] =
            sample_sd(sum.sum, sumsq.sum, static_cast<std::int64_t>(replicates.size())) /
            std::sqrt(r);
    }
    for (const auto& e : replicates) {
        out.n += e.n;
        out.residual_infinite_mass += e.residual_infinite_mass / r;
        out.tie_fraction += e.tie_fraction / r;
        out.infinite_fraction += e.infinite_fraction / r;
    }
    out.sampler = replicates.front().sampler + ",replicates=" +
                  std::to_string(replicates.size());
    return out;
}

}  // namespace sphrad
