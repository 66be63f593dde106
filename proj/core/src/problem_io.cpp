#include "sphrad/problem_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sphrad/example_problem.hpp"

namespace sphrad {

namespace {

using nlohmann::json;

Eigen::VectorXd to_vector(const json& j, Eigen::Index expected, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != expected) {
        throw ProblemError(std::string(what) + " must be an array of length " +
                           std::to_string(expected));
    }
    Eigen::VectorXd v(expected);
    for (Eigen::Index i = 0; i < expected; ++i) {
        const auto& e = j[static_cast<std::size_t>(i)];
        if (!e.is_number()) throw ProblemError(std::string(what) + " must be numeric");
        v[i] = e.get<double>();
    }
    return v;
}

Eigen::MatrixXd to_matrix(const json& j, Eigen::Index rows, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw ProblemError(std::string(what) + " must be a " + std::to_string(rows) +
                           "x" + std::to_string(rows) + " array of arrays");
    }
    Eigen::MatrixXd m(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        m.row(i) = to_vector(j[static_cast<std::size_t>(i)], rows, what).transpose();
    }
    return m;
}

ComponentPtr parse_component(const json& j, int n, int m) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw ProblemError("component entries must be objects with a string 'kind'");
    }
    const std::string kind = j["kind"].get<std::string>();

    if (kind == "expr") {
        if (!j.contains("src") || !j["src"].is_string()) {
            throw ProblemError("expr component requires a string 'src'");
        }
        const bool convex = j.value("convex_in_z", true);
        const int smooth = j.contains("smooth") ? (j["smooth"].get<bool>() ? 1 : 0) : -1;
        return make_expression_component(j["src"].get<std::string>(), n, m, convex,
                                         smooth);
    }
    if (kind == "affine") {
        if (!j.contains("w") || !j.contains("c") || !j.contains("d")) {
            throw ProblemError("affine component requires 'w', 'c' and 'd'");
        }
        if (!j["d"].is_number()) throw ProblemError("affine 'd' must be numeric");
        return make_affine_component(to_vector(j["w"], n, "affine 'w'"),
                                     to_vector(j["c"], m, "affine 'c'"),
                                     j["d"].get<double>());
    }
    if (kind == "ball") {
        if (!j.contains("radius_expr") || !j["radius_expr"].is_string()) {
            throw ProblemError("ball component requires a string 'radius_expr'");
        }
        return make_ball_component(
            parse_expression(j["radius_expr"].get<std::string>(), n, 0), n, m);
    }
    if (kind == "paper_example") {
        if (n != 1 || m != 2) {
            throw ProblemError("paper_example component requires n = 1 and m = 2");
        }
        return example_component();
    }
    throw ProblemError("unknown component kind '" + kind +
                       "' (expected expr | affine | ball | paper_example)");
}

}  // namespace

Problem parse_problem(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ProblemError(std::string("problem file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProblemError("problem file must be a JSON object");

    for (const char* key : {"n", "m", "mean", "covariance", "components"}) {
        if (!j.contains(key)) {
            throw ProblemError(std::string("problem file missing '") + key + "'");
        }
    }
    if (!j["n"].is_number_integer() || !j["m"].is_number_integer()) {
        throw ProblemError("'n' and 'm' must be integers");
    }
    const int n = j["n"].get<int>();
    const int m = j["m"].get<int>();
    if (n < 1 || m < 1) throw ProblemError("'n' and 'm' must be >= 1");

    const Eigen::VectorXd mean = to_vector(j["mean"], m, "'mean'");
    const Eigen::MatrixXd covariance = to_matrix(j["covariance"], m, "'covariance'");

    if (!j["components"].is_array() || j["components"].empty()) {
        throw ProblemError("'components' must be a non-empty array");
    }
    std::vector<ComponentPtr> comps;
    comps.reserve(j["components"].size());
    for (const auto& cj : j["components"]) {
        comps.push_back(parse_component(cj, n, m));
    }

    return Problem{InequalitySystem(n, m, std::move(comps)),
                   GaussianModel::build(mean, covariance)};
}

Problem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProblemError("cannot open problem file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem(buf.str());
}

}  // namespace sphrad
