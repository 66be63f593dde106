// Acceptance suite: every criterion prints one [PASS]/[FAIL] line; the
// process exits nonzero if any criterion fails. Tolerances are pinned in
// code, not configurable.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "sphrad/distributions.hpp"
#include "sphrad/estimators.hpp"
#include "sphrad/example_problem.hpp"
#include "sphrad/radial_engine.hpp"
#include "sphrad/sphere_sampler.hpp"

using namespace sphrad;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& what, bool pass,
            const std::string& detail = "") {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << criterion << ": "
              << what;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// --- 1. closed-form probability reproduction --------------------------------

void criterion_1() {
    struct Case {
        std::string name;
        corpus::Entry entry;
        double truth;
        bool needs_general;
    };
    std::vector<Case> cases;
    for (double x : {-1.0, 0.0, 1.0, 2.0}) {
        cases.push_back({"half-space x=" + fmt(x), corpus::halfspace(2, x),
                         normal_cdf(x), x <= 0.0});
    }
    for (double x : {0.5, 1.0, 2.0}) {
        cases.push_back({"slab x=" + fmt(x), corpus::slab(x), 2.0 * normal_cdf(x) - 1.0,
                         false});
    }
    for (int m : {2, 3}) {
        for (double r : {1.0, 2.0}) {
            cases.push_back({"ball m=" + std::to_string(m) + " r=" + fmt(r),
                             corpus::ball(m, r), ChiDistribution(m).cdf(r), false});
        }
    }

    bool all = true;
    std::ostringstream detail;
    for (const auto& c : cases) {
        EstimatorOptions opt;
        opt.require_slater = !c.needs_general;
        const auto t0 = std::chrono::steady_clock::now();
        const auto est = estimate_probability(c.entry.sys, c.entry.model, c.entry.x,
                                              sample_qmc(c.entry.sys.m(), 1 << 14, 0), opt);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double err = std::abs(est.value - c.truth);
        const bool ok = err <= 1e-3 && seconds < 5.0;
        if (!ok) {
            all = false;
            detail << c.name << " err=" << fmt(err) << " time=" << fmt(seconds) << "s; ";
        }
    }
    report(1, "closed-form probabilities within 1e-3 at N=2^14, < 5 s per case", all,
           detail.str());
}

// --- 2. spheric-radial vs direct MC on the corpus ---------------------------

void criterion_2() {
    bool all = true;
    std::ostringstream detail;
    for (const auto& entry : corpus::all()) {
        const auto sr = estimate_probability(entry.sys, entry.model, entry.x,
                                             sample_qmc(entry.sys.m(), 1 << 14, 0));
        const auto mc =
            oracle_probability_mc(entry.sys, entry.model, entry.x, 100000, 20250607);
        const double gap = std::abs(sr.value - mc.value);
        const double allow = 3.0 * (sr.stderr_ + mc.stderr_) + 1e-12;
        if (gap > allow) {
            all = false;
            detail << entry.name << " gap=" << fmt(gap) << " allow=" << fmt(allow) << "; ";
        }
    }
    report(2, "oracle agreement within 3 combined standard errors (six problems)", all,
           detail.str());
}

// --- 3. gradient formula vs common-direction finite differences -------------

void criterion_3() {
    bool all = true;
    std::ostringstream detail;
    std::mt19937_64 rng(13);
    for (const auto& make :
         {+[] { return corpus::halfspace(); }, +[] { return corpus::slab(); },
          +[] { return corpus::product(); }}) {
        corpus::Entry entry = make();
        const InequalitySystem std_sys = standardize_system(entry.model, entry.sys);
        const SphereSample sample = sample_qmc(entry.sys.m(), 1 << 13, 0);
        int accepted = 0;
        while (accepted < 5) {
            Eigen::VectorXd x(entry.sys.n());
            for (int j = 0; j < entry.sys.n(); ++j) {
                x[j] = 0.25 + 1.75 * uniform_open01(rng);
            }
            if (check_slater(std_sys, x).second >= 0.0) continue;
            ++accepted;
            const auto grad = estimate_gradient(entry.sys, entry.model, x, sample);
            const Eigen::VectorXd fd =
                oracle_gradient_fd(entry.sys, entry.model, x, sample, 1e-4);
            for (int j = 0; j < entry.sys.n(); ++j) {
                const double delta = std::abs(grad.value[j] - fd[j]);
                const double allow = std::max(1e-3, 3.0 * grad.stderr_[j]);
                if (delta > allow) {
                    all = false;
                    detail << entry.name << " x=" << fmt(x[j]) << " delta=" << fmt(delta)
                           << "; ";
                }
            }
        }
    }
    report(3, "gradient matches common-direction FD at 5 random Slater points", all,
           detail.str());
}

// --- 4. exact closed-form gradients ------------------------------------------

void criterion_4() {
    const auto hs = corpus::halfspace();
    const auto hg =
        estimate_gradient(hs.sys, hs.model, hs.x, sample_qmc(2, 1 << 14, 0));
    const bool ok_hs = std::abs(hg.value[0] - 0.24197072451914337) <= 1e-2;

    const auto prod = corpus::product();
    const auto pg =
        estimate_gradient(prod.sys, prod.model, prod.x, sample_qmc(2, 1 << 14, 0));
    const bool ok_prod = std::abs(pg.value[0] - 0.4071615955531600) <= 2e-2;

    report(4, "half-space grad 0.24197 +- 1e-2; product grad 0.40716 +- 2e-2",
           ok_hs && ok_prod,
           "got " + fmt(hg.value[0]) + " and " + fmt(pg.value[0]));
}

// --- 5. the exp-barrier example ----------------------------------------------

void criterion_5() {
    const InequalitySystem sys = example_system();
    const GaussianModel model = example_model();
    const double phi1 = normal_cdf(1.0);

    // (a) phi(t) = Phi(1) for t in {-1, -0.1}: 1e-6 by quadrature, 2e-3 by
    // the spheric-radial estimator.
    bool ok_a = true;
    for (double t : {-1.0, -0.1}) {
        ok_a = ok_a && std::abs(example_phi_closed_form(t) - phi1) <= 1e-6;
        const auto est = estimate_probability(sys, model, corpus::vec1(t),
                                              sample_qmc(2, 1 << 14, 0));
        ok_a = ok_a && std::abs(est.value - phi1) <= 2e-3;
    }
    report(5, "(a) phi(t) = Phi(1) for t<0: quadrature 1e-6, spheric-radial 2e-3", ok_a);

    // (b) phi(0) - phi(t) >= eps sqrt(t), (c) strictly increasing quotient.
    bool ok_b = true, ok_c = true;
    try {
        const auto rows = nonsmoothness_witness({1e-1, 1e-2, 1e-3, 1e-4});
        for (const auto& row : rows) ok_b = ok_b && row.phi_gap >= row.eps_sqrt_t;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            ok_c = ok_c && rows[k].ratio > rows[k - 1].ratio;
        }
    } catch (const Error&) {
        ok_b = ok_c = false;
    }
    report(5, "(b) phi(0) - phi(t) >= eps sqrt(t) on {1e-1..1e-4}", ok_b);
    report(5, "(c) difference quotient strictly increases as t decreases", ok_c);

    // (d) nice-direction probe: h=-1 passes, h=+1 fails; the named witness
    // x=1, z=(1,0) exceeds ratio 100.
    const auto down = probe_nice_direction(sys, model, corpus::vec1(0.0),
                                           corpus::vec1(-1.0), 1.0, 256, 17);
    const auto up = probe_nice_direction(sys, model, corpus::vec1(0.0),
                                         corpus::vec1(1.0), 1.0, 256, 17);
    Eigen::VectorXd z(2);
    z << 1.0, 0.0;
    const double witness_ratio =
        nice_direction_ratio(sys, model, corpus::vec1(1.0), z, corpus::vec1(1.0), 1.0);
    report(5, "(d) nice-direction probe: h=-1 passes, h=+1 fails, witness ratio > 100",
           down.pass && !up.pass && witness_ratio > 100.0,
           "witness ratio " + fmt(witness_ratio));
}

// --- 6. Lemma 3.3 inequality at every finite-direction root -----------------

void criterion_6() {
    bool all = true;
    std::ostringstream detail;
    for (const auto& entry : corpus::all()) {
        const InequalitySystem std_sys = standardize_system(entry.model, entry.sys);
        const RadialEngine engine(std_sys, entry.model.cholesky(),
                                  ChiDistribution(entry.sys.m()));
        const auto ctx = engine.prepare(entry.x);
        const SphereSample sample = sample_mc(entry.sys.m(), 10000, 606);
        long long checked = 0, violations = 0;
        for (std::int64_t k = 0; k < sample.count(); ++k) {
            const Eigen::VectorXd v = sample.directions.col(k);
            const RadiusOutcome out = engine.solve_radius(ctx, v);
            if (!out.finite) continue;
            const Eigen::VectorXd lv = entry.model.cholesky() * v;
            const Eigen::VectorXd z_root = out.rho * lv;
            for (int i : out.active.indices) {
                ++checked;
                const double denom = std_sys.grad_z(i, entry.x, z_root).dot(lv);
                if (denom < -ctx.g0 / out.rho - 1e-10) ++violations;
            }
        }
        if (violations != 0 || checked == 0) {
            all = false;
            detail << entry.name << " violations=" << violations << "/" << checked << "; ";
        }
    }
    report(6, "Lemma-type denominator bound holds at 10^4 directions per problem", all,
           detail.str());
}

// --- 7. distribution kernels --------------------------------------------------

double quad_simpson(const std::function<double(double)>& f, double a, double b, int n) {
    double sum = f(a) + f(b);
    const double h = (b - a) / n;
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
    return sum * h / 3.0;
}

void criterion_7() {
    bool norm_ok = true;
    for (int m : {1, 2, 3, 5, 10}) {
        ChiDistribution chi(m);
        const double hi = chi.quantile(1.0 - 1e-14);
        // Composite Simpson with a fine fixed grid as the independent check.
        const double total =
            quad_simpson([&](double t) { return chi.pdf(t); }, 0.0, hi, 200000);
        norm_ok = norm_ok && std::abs(total - 1.0) <= 1e-10;
    }
    report(7, "chi normalization <= 1e-10 for m in {1,2,3,5,10}", norm_ok);

    bool deriv_ok = true;
    for (int m : {1, 2, 3, 5, 10}) {
        ChiDistribution chi(m);
        for (double t : {0.5, 1.0, 2.0, 5.0}) {
            const double numeric = (chi.cdf(t + 1e-5) - chi.cdf(t - 1e-5)) / 2e-5;
            deriv_ok = deriv_ok && std::abs(numeric - chi.pdf(t)) <= 1e-6;
        }
    }
    report(7, "chi cdf/pdf derivative consistency <= 1e-6", deriv_ok);

    bool sym_ok = true;
    for (double t = 0.0; t <= 8.0; t += 0.25) {
        sym_ok = sym_ok && std::abs(normal_cdf(-t) - (1.0 - normal_cdf(t))) <= 1e-10;
    }
    bool round_ok = true;
    for (double t = -6.0; t <= 4.5 + 1e-9; t += 0.25) {
        round_ok =
            round_ok && std::abs(normal_quantile(normal_cdf(t)) - t) <= 1e-10;
    }
    report(7, "Phi symmetry and inverse round-trip <= 1e-10", sym_ok && round_ok);
}

// --- 8. determinism -----------------------------------------------------------

std::string run_cli_capture(const std::string& args, int& exit_code) {
    const std::string cmd = std::string(SPHRAD_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        exit_code = -1;
        return {};
    }
    std::string out;
    std::array<char, 4096> buf;
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

void criterion_8() {
    const std::string args = std::string("eval --problem ") + SPHRAD_PROBLEMS_DIR +
                             "/product.json --x 1 --samples 4096 --seed 3";
    int ec1 = 0, ec2 = 0;
    const std::string a = run_cli_capture(args, ec1);
    const std::string b = run_cli_capture(args, ec2);
    report(8, "two identical CLI runs produce byte-identical reports",
           ec1 == 0 && ec2 == 0 && !a.empty() && a == b);

    const auto prod = corpus::product();
    const SphereSample sample = sample_qmc(2, 1 << 13, 0);
    EstimatorOptions serial, parallel;
    serial.exec.threads = 1;
    parallel.exec.threads = 4;
    const auto sa = estimate_probability(prod.sys, prod.model, prod.x, sample, serial);
    const auto pa = estimate_probability(prod.sys, prod.model, prod.x, sample, parallel);
    const auto sg = estimate_gradient(prod.sys, prod.model, prod.x, sample, serial);
    const auto pg = estimate_gradient(prod.sys, prod.model, prod.x, sample, parallel);
    const double dv = std::abs(sa.value - pa.value);
    const double ds = std::abs(sa.stderr_ - pa.stderr_);
    const double dg = (sg.value - pg.value).cwiseAbs().maxCoeff();
    report(8, "parallel and serial execution agree to <= 1e-13",
           dv <= 1e-13 && ds <= 1e-13 && dg <= 1e-13,
           "dv=" + fmt(dv) + " dg=" + fmt(dg));
}

// --- 9. tie handling ----------------------------------------------------------

void criterion_9() {
    const auto dup = corpus::duplicated();
    const auto enc = estimate_subdifferential(dup.sys, dup.model, dup.x,
                                              sample_qmc(2, 1 << 13, 0),
                                              default_policies(dup.sys.n()));
    const double width = (enc.hull_hi - enc.hull_lo).cwiseAbs().maxCoeff();
    report(9, "duplicated constraint yields a zero-width hull (<= 1e-12)",
           width <= 1e-12 && enc.tie_fraction > 0.0, "width=" + fmt(width));

    bool generic_ok = true;
    std::ostringstream detail;
    for (const auto& make :
         {+[] { return corpus::halfspace(); }, +[] { return corpus::slab(); },
          +[] { return corpus::product(); }, +[] { return corpus::ball(); },
          +[] { return corpus::example52(); }}) {
        corpus::Entry entry = make();
        const auto e = estimate_subdifferential(entry.sys, entry.model, entry.x,
                                                sample_qmc(2, 1 << 13, 0),
                                                default_policies(entry.sys.n()));
        double max_se = 0.0;
        for (const auto& se : e.policy_stderrs) max_se = std::max(max_se, se.maxCoeff());
        const double spread = (e.hull_hi - e.hull_lo).cwiseAbs().maxCoeff();
        if (e.tie_fraction != 0.0 || spread > 3.0 * max_se + 1e-12) {
            generic_ok = false;
            detail << entry.name << " ties=" << fmt(e.tie_fraction)
                   << " spread=" << fmt(spread) << "; ";
        }
    }
    report(9, "generic corpus problems: tie fraction 0, policy spread <= 3 stderr",
           generic_ok, detail.str());
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures == 0) {
        std::cout << "acceptance: all criteria passed" << std::endl;
        return 0;
    }
    std::cout << "acceptance: " << g_failures << " criterion check(s) failed" << std::endl;
    return 1;
}
