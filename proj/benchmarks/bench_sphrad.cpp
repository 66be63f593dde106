#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "sphrad/distributions.hpp"
#include "sphrad/estimators.hpp"
#include "sphrad/example_problem.hpp"
#include "sphrad/gaussian_model.hpp"
#include "sphrad/radial_engine.hpp"
#include "sphrad/sphere_sampler.hpp"

namespace {

using namespace sphrad;

GaussianModel standard_model(int m) {
    return GaussianModel::build(Eigen::VectorXd::Zero(m),
                                Eigen::MatrixXd::Identity(m, m));
}

InequalitySystem halfspace(int m) {
    Eigen::VectorXd w(1), c(m);
    w << -1.0;
    c.setZero();
    c[0] = 1.0;
    return InequalitySystem(1, m, {make_affine_component(w, c, 0.0)});
}

Eigen::VectorXd x1(double v) {
    Eigen::VectorXd x(1);
    x << v;
    return x;
}

void BM_chi_cdf(benchmark::State& state) {
    ChiDistribution chi(static_cast<int>(state.range(0)));
    double t = 0.0;
    for (auto _ : state) {
        t += 1e-9;
        benchmark::DoNotOptimize(chi.cdf(1.3 + t));
    }
}
BENCHMARK(BM_chi_cdf)->Arg(2)->Arg(5)->Arg(10);

void BM_normal_quantile(benchmark::State& state) {
    double p = 0.0;
    for (auto _ : state) {
        p += 1e-12;
        benchmark::DoNotOptimize(normal_quantile(0.3 + p));
    }
}
BENCHMARK(BM_normal_quantile);

void BM_sobol_points(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    SobolSequence sobol(m);
    std::vector<double> u(static_cast<std::size_t>(m));
    for (auto _ : state) {
        sobol.next(u.data());
        benchmark::DoNotOptimize(u.data());
    }
}
BENCHMARK(BM_sobol_points)->Arg(2)->Arg(8);

void BM_sample_qmc(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_qmc(m, 4096, 0));
    }
}
BENCHMARK(BM_sample_qmc)->Arg(2)->Arg(5);

void BM_solve_radius(benchmark::State& state) {
    const int m = 2;
    const auto model = standard_model(m);
    const InequalitySystem sys = halfspace(m);
    const RadialEngine engine(sys, model.cholesky(), ChiDistribution(m));
    const auto ctx = engine.prepare(x1(1.0));
    const SphereSample sample = sample_qmc(m, 1024, 0);
    std::int64_t k = 0;
    for (auto _ : state) {
        const Eigen::VectorXd v = sample.directions.col(k % sample.count());
        benchmark::DoNotOptimize(engine.solve_radius(ctx, v));
        ++k;
    }
}
BENCHMARK(BM_solve_radius);

void BM_estimate_probability(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const auto model = standard_model(m);
    const InequalitySystem sys = halfspace(m);
    const SphereSample sample = sample_qmc(m, state.range(1), 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_probability(sys, model, x1(1.0), sample));
    }
    state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_estimate_probability)
    ->Args({2, 1 << 10})
    ->Args({2, 1 << 14})
    ->Args({5, 1 << 14});

void BM_estimate_gradient_example(benchmark::State& state) {
    const InequalitySystem sys = example_system();
    const GaussianModel model = example_model();
    const SphereSample sample = sample_qmc(2, state.range(0), 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_gradient(sys, model, x1(0.1), sample));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_estimate_gradient_example)->Arg(1 << 12);

void BM_example_phi_quadrature(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(example_phi_closed_form(0.1, 1e-10));
    }
}
BENCHMARK(BM_example_phi_quadrature);

}  // namespace

BENCHMARK_MAIN();
