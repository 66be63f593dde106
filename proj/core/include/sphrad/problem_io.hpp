#pragma once

#include <string>

#include "sphrad/gaussian_model.hpp"
#include "sphrad/problem.hpp"

namespace sphrad {

// A problem file pairs a Gaussian model with an inequality system.
//
// JSON schema:
//   {
//     "n": int, "m": int,
//     "mean": [..m..],
//     "covariance": [[..m..] x m],
//     "components": [
//       {"kind": "expr", "src": "...", "convex_in_z": bool?, "smooth": bool?}
//       | {"kind": "affine", "w": [..n..], "c": [..m..], "d": num}
//       | {"kind": "ball", "radius_expr": "..."}
//       | {"kind": "paper_example"}
//     ]
//   }
struct Problem {
    InequalitySystem system;
    GaussianModel model;
};

// Throws ProblemError on schema violations; expression errors propagate as
// ParseError / UnknownIdentifier.
Problem load_problem(const std::string& path);
Problem parse_problem(const std::string& json_text);

}  // namespace sphrad
