#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sphrad/errors.hpp"

namespace sphrad {

// A set of unit directions with uniform weights representing the uniform
// distribution on S^{m-1}. Consumption is read-only and concurrent.
struct SphereSample {
    int dim = 0;
    Eigen::MatrixXd directions;  // dim x count, unit-norm columns
    double weight = 0.0;         // uniform 1/count
    std::string generator;       // provenance tag (sampler kind, seed/id, offset)

    std::int64_t count() const { return directions.cols(); }
};

// N i.i.d. uniform directions from normalized standard Gaussian draws.
// Identical (m, n_points, seed) give bitwise-identical output.
SphereSample sample_mc(int m, std::int64_t n_points, std::uint64_t seed);

// Deterministic low-discrepancy directions: Sobol points in (0,1)^m mapped
// coordinatewise through the normal quantile and normalized to the sphere.
// sequence_id selects a consecutive block of the underlying sequence, so
// different ids give non-overlapping point sets. No randomization.
SphereSample sample_qmc(int m, std::int64_t n_points, std::uint64_t sequence_id = 0);

// Randomly shifted QMC replicate (Cranley-Patterson rotation, seeded);
// replicate spread yields a QMC error estimate.
SphereSample sample_qmc_shifted(int m, std::int64_t n_points,
                                std::uint64_t sequence_id, std::uint64_t shift_seed);

// Uniform double strictly inside (0,1) from one 64-bit draw; midpoint offset
// keeps the endpoints unreachable.
double uniform_open01(std::mt19937_64& rng);

// Standard normal draw via the inverse CDF; reproducible across standard
// library implementations (std::normal_distribution is not).
double standard_normal(std::mt19937_64& rng);

Eigen::VectorXd standard_normal_vector(int m, std::mt19937_64& rng);

// Gray-code Sobol sequence over (0,1)^dim with 52 output bits and a fixed
// per-dimension digital shift (so exact coordinate-diagonal alignments of the
// raw sequence cannot survive the inverse-Gaussian map). Point index 0 is
// never emitted; iteration starts at index 1.
class SobolSequence {
public:
    static constexpr int kMaxDim = 16;

    explicit SobolSequence(int dim);

    // Fills out[0..dim) with the next point.
    void next(double* out);

    // Index of the point next() will produce.
    std::uint64_t position() const { return index_ + 1; }

    // Skips ahead so that next() produces the point with the given index (>= 1).
    void seek(std::uint64_t index);

private:
    int dim_;
    std::uint64_t index_ = 0;  // last emitted index (0 = none)
    std::vector<std::array<std::uint64_t, 52>> v_;  // direction integers
    std::vector<std::uint64_t> state_;
    std::vector<std::uint64_t> shift_;  // fixed digital shift
};

}  // namespace sphrad
