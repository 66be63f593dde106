// Command-line front end: load a problem file, run the spheric-radial
// estimators, the direct oracles, the regularity diagnostics, or the built-in
// non-Lipschitz example, and emit machine-readable reports.
//
// Exit codes: 0 success, 2 Slater violation, 3 configuration / problem
// validation error, 1 anything else.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "sphrad/distributions.hpp"
#include "sphrad/errors.hpp"
#include "sphrad/estimators.hpp"
#include "sphrad/example_problem.hpp"
#include "sphrad/problem_io.hpp"
#include "sphrad/sphere_sampler.hpp"

namespace {

using nlohmann::ordered_json;
using namespace sphrad;

struct RunConfig {
    std::string problem_path;
    std::string x_csv;
    std::string sampler = "qmc";
    std::int64_t samples = 16384;  // 2^14
    std::uint64_t seed = 1;
    int replicates = 1;
    std::string format = "json";
    int threads = 1;
    bool allow_non_slater = false;
    double tie_tol = 1e-9;
    double root_tol = 1e-10;
    double fd_step = 1e-4;
    double l = 1.0;
    int probes = 256;
    std::string policies = "lowest,highest,extremes";
    std::string t_grid = "0.1,0.01,0.001,0.0001";
    double quad_tol = 1e-10;
};

double require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw Error(std::string("report value '") + what + "' is not finite");
    }
    return v;
}

ordered_json to_json(const Eigen::VectorXd& v, const char* what) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(require_finite(v[i], what));
    return a;
}

std::vector<double> parse_csv_doubles(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start < csv.size()) {
        std::size_t end = csv.find(',', start);
        if (end == std::string::npos) end = csv.size();
        const std::string item = csv.substr(start, end - start);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(std::string("cannot parse ") + what + " entry '" + item + "'");
        }
        start = end + 1;
    }
    if (out.empty()) throw ConfigError(std::string(what) + " must be a non-empty list");
    return out;
}

Eigen::VectorXd parse_x(const RunConfig& cfg, int n) {
    if (cfg.x_csv.empty()) throw ConfigError("--x is required for this command");
    const std::vector<double> vals = parse_csv_doubles(cfg.x_csv, "--x");
    if (static_cast<int>(vals.size()) != n) {
        throw ConfigError("--x has " + std::to_string(vals.size()) +
                          " entries but the problem has n = " + std::to_string(n));
    }
    return Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                             static_cast<Eigen::Index>(vals.size()));
}

EstimatorOptions make_options(const RunConfig& cfg) {
    EstimatorOptions opt;
    opt.exec.threads = cfg.threads;
    opt.radial.tie_tol = cfg.tie_tol;
    opt.radial.eps_root = cfg.root_tol;
    opt.require_slater = !cfg.allow_non_slater;
    return opt;
}

// Every report starts with the full effective configuration so that runs are
// reproducible from the output alone.
ordered_json config_json(const RunConfig& cfg, const std::string& command) {
    ordered_json j;
    j["command"] = command;
    j["problem"] = cfg.problem_path;
    if (!cfg.x_csv.empty()) j["x"] = cfg.x_csv;
    j["sampler"] = cfg.sampler;
    j["samples"] = cfg.samples;
    j["seed"] = cfg.seed;
    j["replicates"] = cfg.replicates;
    j["threads"] = cfg.threads;
    j["tie_tolerance"] = cfg.tie_tol;
    j["root_tolerance"] = cfg.root_tol;
    j["cutoff_level"] = RadialConfig{}.cutoff_level;
    j["fd_step"] = cfg.fd_step;
    j["l"] = cfg.l;
    j["probes"] = cfg.probes;
    j["policies"] = cfg.policies;
    j["allow_non_slater"] = cfg.allow_non_slater;
    j["format"] = cfg.format;
    return j;
}

std::vector<SphereSample> make_samples(const RunConfig& cfg, int m) {
    if (cfg.replicates < 1) throw ConfigError("--replicates must be >= 1");
    if (cfg.samples < 1) throw ConfigError("--samples must be >= 1");
    std::vector<SphereSample> samples;
    if (cfg.sampler == "mc") {
        for (int r = 0; r < cfg.replicates; ++r) {
            samples.push_back(sample_mc(m, cfg.samples, cfg.seed + static_cast<std::uint64_t>(r)));
        }
    } else if (cfg.sampler == "qmc") {
        if (cfg.replicates == 1) {
            samples.push_back(sample_qmc(m, cfg.samples, 0));
        } else {
            for (int r = 0; r < cfg.replicates; ++r) {
                samples.push_back(sample_qmc_shifted(
                    m, cfg.samples, 0, cfg.seed + static_cast<std::uint64_t>(r)));
            }
        }
    } else {
        throw ConfigError("--sampler must be mc or qmc, got '" + cfg.sampler + "'");
    }
    return samples;
}

ordered_json estimate_json(const ScalarEstimate& e) {
    ordered_json j;
    j["value"] = require_finite(e.value, "value");
    j["stderr"] = require_finite(e.stderr_, "stderr");
    j["N"] = e.n;
    j["sampler"] = e.sampler;
    j["tie_fraction"] = require_finite(e.tie_fraction, "tie_fraction");
    j["residual_infinite_mass"] =
        require_finite(e.residual_infinite_mass, "residual_infinite_mass");
    j["infinite_fraction"] = require_finite(e.infinite_fraction, "infinite_fraction");
    return j;
}

ordered_json estimate_json(const VectorEstimate& e) {
    ordered_json j;
    j["value"] = to_json(e.value, "value");
    j["stderr"] = to_json(e.stderr_, "stderr");
    j["N"] = e.n;
    j["sampler"] = e.sampler;
    j["tie_fraction"] = require_finite(e.tie_fraction, "tie_fraction");
    j["residual_infinite_mass"] =
        require_finite(e.residual_infinite_mass, "residual_infinite_mass");
    j["infinite_fraction"] = require_finite(e.infinite_fraction, "infinite_fraction");
    return j;
}

ordered_json slater_json(const InequalitySystem& std_sys, const Eigen::VectorXd& x) {
    const auto [ok, g0] = check_slater(std_sys, x);
    ordered_json j;
    j["slater_ok"] = ok;
    j["g_at_origin"] = require_finite(g0, "g_at_origin");
    return j;
}

ordered_json diagnostics_json(const DiagnosticsReport& rep) {
    ordered_json j;
    j["slater_ok"] = rep.slater_ok;
    j["g_at_origin"] = require_finite(rep.g_at_origin, "g_at_origin");
    ordered_json growth;
    growth["pass"] = rep.growth.pass;
    growth["l"] = rep.growth.l;
    growth["worst_ratio"] = require_finite(rep.growth.worst_ratio, "growth worst_ratio");
    growth["random_probes"] = rep.growth.random_probes;
    if (!rep.growth.pass) {
        growth["witness_x"] = to_json(rep.growth.witness_x, "growth witness_x");
        growth["witness_z"] = to_json(rep.growth.witness_z, "growth witness_z");
        growth["witness_component"] = rep.growth.witness_component;
    }
    j["growth"] = growth;
    ordered_json nice = ordered_json::array();
    for (const auto& nd : rep.nice_directions) {
        ordered_json item;
        item["h"] = to_json(nd.h, "nice h");
        item["pass"] = nd.pass;
        item["worst_ratio"] = require_finite(nd.worst_ratio, "nice worst_ratio");
        if (!nd.pass) {
            item["witness_y"] = to_json(nd.witness_y, "nice witness_y");
            item["witness_z"] = to_json(nd.witness_z, "nice witness_z");
        }
        nice.push_back(item);
    }
    j["nice_directions"] = nice;
    ordered_json bound;
    bound["directions_checked"] = rep.bound.directions_checked;
    bound["violations"] = rep.bound.violations;
    bound["worst_ratio"] = require_finite(rep.bound.worst_ratio, "bound worst_ratio");
    j["subgradient_norm_bound"] = bound;
    j["tie_fraction"] = require_finite(rep.tie_fraction, "tie_fraction");
    j["all_directions_finite"] = rep.all_directions_finite;
    if (rep.slater_ok) j["constant_r_hat"] = require_finite(rep.r_hat, "constant_r_hat");
    j["near_singular_correlation"] = rep.near_singular_correlation;
    j["differentiability_verdict"] = to_string(rep.verdict);
    return j;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", require_finite(v, "csv value"));
    return buf;
}

void print_csv_config(const ordered_json& config) {
    for (const auto& [key, value] : config.items()) {
        std::cout << "# " << key << "=" << value.dump() << "\n";
    }
}

int run_eval(const RunConfig& cfg) {
    const Problem problem = load_problem(cfg.problem_path);
    const Eigen::VectorXd x = parse_x(cfg, problem.system.n());
    const EstimatorOptions opt = make_options(cfg);

    std::vector<ScalarEstimate> parts;
    for (const auto& s : make_samples(cfg, problem.system.m())) {
        parts.push_back(estimate_probability(problem.system, problem.model, x, s, opt));
    }
    const ScalarEstimate est = combine_replicates(parts);

    ordered_json result = estimate_json(est);
    result["diagnostics"] =
        slater_json(standardize_system(problem.model, problem.system), x);

    if (cfg.format == "csv") {
        print_csv_config(config_json(cfg, "eval"));
        std::cout << "value,stderr,N,sampler,tie_fraction,residual_infinite_mass\n"
                  << format_double(est.value) << ',' << format_double(est.stderr_) << ','
                  << est.n << ',' << est.sampler << ',' << format_double(est.tie_fraction)
                  << ',' << format_double(est.residual_infinite_mass) << "\n";
        return 0;
    }
    ordered_json report;
    report["config"] = config_json(cfg, "eval");
    report["result"] = result;
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_grad(const RunConfig& cfg) {
    const Problem problem = load_problem(cfg.problem_path);
    const Eigen::VectorXd x = parse_x(cfg, problem.system.n());
    const EstimatorOptions opt = make_options(cfg);

    std::vector<VectorEstimate> parts;
    for (const auto& s : make_samples(cfg, problem.system.m())) {
        parts.push_back(estimate_gradient(problem.system, problem.model, x, s, opt));
    }
    const VectorEstimate est = combine_replicates(parts);

    if (cfg.format == "csv") {
        print_csv_config(config_json(cfg, "grad"));
        std::cout << "coordinate,value,stderr\n";
        for (Eigen::Index j = 0; j < est.value.size(); ++j) {
            std::cout << (j + 1) << ',' << format_double(est.value[j]) << ','
                      << format_double(est.stderr_[j]) << "\n";
        }
        return 0;
    }
    ordered_json result = estimate_json(est);
    result["diagnostics"] =
        slater_json(standardize_system(problem.model, problem.system), x);
    ordered_json report;
    report["config"] = config_json(cfg, "grad");
    report["result"] = result;
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_subdiff(const RunConfig& cfg) {
    const Problem problem = load_problem(cfg.problem_path);
    const Eigen::VectorXd x = parse_x(cfg, problem.system.n());
    const EstimatorOptions opt = make_options(cfg);
    const std::vector<TiePolicy> policies = parse_policies(cfg.policies, problem.system.n());

    // Replicates would average the per-policy estimates; run the enclosure on
    // the base sample and report replicate spread through `grad` instead.
    const SphereSample sample = make_samples(cfg, problem.system.m()).front();
    const SubdiffEnclosure enc =
        estimate_subdifferential(problem.system, problem.model, x, sample, policies, opt);

    // The growth verdict decides whether the integral term alone encloses the
    // Clarke subdifferential or whether a nontrivial cone term remains.
    const GrowthReport growth =
        check_growth(problem.system, problem.model, x, cfg.l, cfg.probes, cfg.seed);

    if (cfg.format == "csv") {
        print_csv_config(config_json(cfg, "subdiff"));
        std::cout << "policy,coordinate,value,stderr\n";
        for (std::size_t p = 0; p < enc.policy_names.size(); ++p) {
            for (Eigen::Index j = 0; j < enc.policy_values[p].size(); ++j) {
                std::cout << enc.policy_names[p] << ',' << (j + 1) << ','
                          << format_double(enc.policy_values[p][j]) << ','
                          << format_double(enc.policy_stderrs[p][j]) << "\n";
            }
        }
        for (Eigen::Index j = 0; j < enc.hull_lo.size(); ++j) {
            std::cout << "hull_lo," << (j + 1) << ',' << format_double(enc.hull_lo[j])
                      << ",\n";
        }
        for (Eigen::Index j = 0; j < enc.hull_hi.size(); ++j) {
            std::cout << "hull_hi," << (j + 1) << ',' << format_double(enc.hull_hi[j])
                      << ",\n";
        }
        return 0;
    }

    ordered_json result;
    ordered_json policies_json = ordered_json::array();
    for (std::size_t p = 0; p < enc.policy_names.size(); ++p) {
        ordered_json item;
        item["policy"] = enc.policy_names[p];
        item["value"] = to_json(enc.policy_values[p], "policy value");
        item["stderr"] = to_json(enc.policy_stderrs[p], "policy stderr");
        policies_json.push_back(item);
    }
    result["policies"] = policies_json;
    result["hull_lo"] = to_json(enc.hull_lo, "hull_lo");
    result["hull_hi"] = to_json(enc.hull_hi, "hull_hi");
    result["N"] = enc.n;
    result["sampler"] = enc.sampler;
    result["tie_fraction"] = require_finite(enc.tie_fraction, "tie_fraction");
    result["residual_infinite_mass"] =
        require_finite(enc.residual_infinite_mass, "residual_infinite_mass");
    result["cone_term"] = growth.pass
                              ? "trivial (growth condition passed; integral term is the enclosure)"
                              : "integral part only; cone term nontrivial";
    result["diagnostics"] =
        slater_json(standardize_system(problem.model, problem.system), x);
    ordered_json report;
    report["config"] = config_json(cfg, "subdiff");
    report["result"] = result;
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_oracle(const RunConfig& cfg) {
    const Problem problem = load_problem(cfg.problem_path);
    const Eigen::VectorXd x = parse_x(cfg, problem.system.n());
    const EstimatorOptions opt = make_options(cfg);

    const ScalarEstimate prob =
        oracle_probability_mc(problem.system, problem.model, x, cfg.samples, cfg.seed);

    const InequalitySystem std_sys = standardize_system(problem.model, problem.system);
    const auto [slater_ok, g0] = check_slater(std_sys, x);

    ordered_json result;
    result["probability"] = estimate_json(prob);
    if (slater_ok && std_sys.all_smooth()) {
        const SphereSample sample = make_samples(cfg, problem.system.m()).front();
        const Eigen::VectorXd fd = oracle_gradient_fd(problem.system, problem.model, x,
                                                      sample, cfg.fd_step, opt);
        result["gradient_fd"] = to_json(fd, "gradient_fd");
    }
    result["diagnostics"] = slater_json(std_sys, x);

    if (cfg.format == "csv") {
        print_csv_config(config_json(cfg, "oracle"));
        std::cout << "quantity,value,stderr\n"
                  << "probability," << format_double(prob.value) << ','
                  << format_double(prob.stderr_) << "\n";
        if (result.contains("gradient_fd")) {
            const auto& fd = result["gradient_fd"];
            for (std::size_t j = 0; j < fd.size(); ++j) {
                std::cout << "gradient_fd_" << (j + 1) << ','
                          << format_double(fd[j].get<double>()) << ",\n";
            }
        }
        return 0;
    }
    ordered_json report;
    report["config"] = config_json(cfg, "oracle");
    report["result"] = result;
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_check(const RunConfig& cfg) {
    if (cfg.format == "csv") {
        throw ConfigError("check emits a nested report; use --format json");
    }
    const Problem problem = load_problem(cfg.problem_path);
    const Eigen::VectorXd x = parse_x(cfg, problem.system.n());
    const EstimatorOptions opt = make_options(cfg);

    const SphereSample sample = make_samples(cfg, problem.system.m()).front();
    const DiagnosticsReport rep = run_diagnostics(problem.system, problem.model, x,
                                                  sample, cfg.l, cfg.probes, cfg.seed, opt);
    ordered_json report;
    report["config"] = config_json(cfg, "check");
    report["result"] = diagnostics_json(rep);
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_example(const RunConfig& cfg) {
    const std::vector<double> grid = parse_csv_doubles(cfg.t_grid, "--t-grid");
    const std::vector<WitnessRow> rows = nonsmoothness_witness(grid, cfg.quad_tol);

    if (cfg.format == "json") {
        ordered_json result;
        result["phi_at_0"] = normal_cdf(1.0);
        result["epsilon"] = example_epsilon();
        ordered_json table = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json row;
            row["t"] = require_finite(r.t, "t");
            row["phi_gap"] = require_finite(r.phi_gap, "phi_gap");
            row["eps_sqrt_t"] = require_finite(r.eps_sqrt_t, "eps_sqrt_t");
            row["ratio"] = require_finite(r.ratio, "ratio");
            table.push_back(row);
        }
        result["witness"] = table;
        ordered_json report;
        report["config"] = config_json(cfg, "example");
        report["result"] = result;
        std::cout << report.dump(2) << "\n";
        return 0;
    }

    print_csv_config(config_json(cfg, "example"));
    std::cout << "t,phi_gap,eps_sqrt_t,ratio\n";
    for (const auto& r : rows) {
        std::cout << format_double(r.t) << ',' << format_double(r.phi_gap) << ','
                  << format_double(r.eps_sqrt_t) << ',' << format_double(r.ratio) << "\n";
    }
    return 0;
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg, bool needs_problem) {
    if (needs_problem) {
        cmd->add_option("--problem", cfg.problem_path, "Problem JSON file")->required();
        cmd->add_option("--x", cfg.x_csv, "Decision vector, comma-separated");
    }
    cmd->add_option("--sampler", cfg.sampler, "Sphere sampler: mc or qmc");
    cmd->add_option("--samples", cfg.samples, "Directions per estimate (default 2^14)");
    cmd->add_option("--seed", cfg.seed, "RNG seed / QMC shift seed");
    cmd->add_option("--replicates", cfg.replicates,
                    "Independent replicates for error estimation");
    cmd->add_option("--format", cfg.format, "Output format: json or csv");
    cmd->add_option("--threads", cfg.threads,
                    "Worker threads for the direction loop (0 = auto)");
    cmd->add_option("--tie-tol", cfg.tie_tol, "Active-set tie tolerance (relative)");
    cmd->add_option("--root-tol", cfg.root_tol, "Radial root tolerance");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian probability functions via the spheric-radial decomposition"};
    app.require_subcommand(1);

    RunConfig cfg;

    CLI::App* eval = app.add_subcommand("eval", "Estimate phi(x)");
    add_common_flags(eval, cfg, true);
    eval->add_flag("--allow-non-slater", cfg.allow_non_slater,
                   "Evaluate phi at points where g(x,0) >= 0 via the general "
                   "feasible-interval kernel");

    CLI::App* grad = app.add_subcommand("grad", "Estimate grad phi(x)");
    add_common_flags(grad, cfg, true);

    CLI::App* subdiff =
        app.add_subcommand("subdiff", "Clarke subdifferential enclosure at x");
    add_common_flags(subdiff, cfg, true);
    subdiff->add_option("--policies", cfg.policies,
                        "Tie policies: lowest,highest,extremes,max:J,min:J");
    subdiff->add_option("--l", cfg.l, "Growth-condition parameter for the cone verdict");
    subdiff->add_option("--probes", cfg.probes, "Random probes for the growth check");

    CLI::App* oracle =
        app.add_subcommand("oracle", "Direct Monte Carlo probability + FD gradient");
    add_common_flags(oracle, cfg, true);
    oracle->add_option("--fd-step", cfg.fd_step, "Base finite-difference step");

    CLI::App* check = app.add_subcommand("check", "Regularity diagnostics at x");
    add_common_flags(check, cfg, true);
    check->add_option("--l", cfg.l, "Growth / nice-direction parameter l");
    check->add_option("--probes", cfg.probes, "Random probes per check");

    CLI::App* example =
        app.add_subcommand("example", "Non-Lipschitz witness table of the built-in example");
    example->add_option("--t-grid", cfg.t_grid, "Positive t values, comma-separated");
    example->add_option("--quad-tol", cfg.quad_tol, "Quadrature tolerance");
    example->add_option("--format", cfg.format, "Output format: json or csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << e.what() << "\n";
        return 3;
    }

    // The witness table is a table; it defaults to CSV.
    if (app.got_subcommand(example) && example->count("--format") == 0) {
        cfg.format = "csv";
    }

    try {
        if (app.got_subcommand(eval)) return run_eval(cfg);
        if (app.got_subcommand(grad)) return run_grad(cfg);
        if (app.got_subcommand(subdiff)) return run_subdiff(cfg);
        if (app.got_subcommand(oracle)) return run_oracle(cfg);
        if (app.got_subcommand(check)) return run_check(cfg);
        if (app.got_subcommand(example)) return run_example(cfg);
        std::cerr << "no subcommand\n";
        return 3;
    } catch (const SlaterViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ProblemError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const UnknownIdentifier& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NonSmoothComponent& e) {
        // The problem does not support the requested gradient path.
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
