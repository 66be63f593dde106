#include "sphrad/sphere_sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include "sphrad/distributions.hpp"

namespace sphrad {

namespace {

constexpr int kBits = 52;
constexpr double kScale = 1.0 / 4503599627370496.0;  // 2^-52

// Primitive polynomial (degree s, interior coefficients a) and initial
// direction numbers m_1..m_s per dimension, Joe-Kuo style. Dimension 1 is
// the van der Corput sequence (all m_i = 1).
struct DirectionSeed {
    int s;
    std::uint64_t a;
    std::uint64_t m[6];
};

constexpr DirectionSeed kSeeds[] = {
    {1, 0, {1}},                  // dim 2
    {2, 1, {1, 3}},               // dim 3
    {3, 1, {1, 3, 1}},            // dim 4
    {3, 2, {1, 1, 1}},            // dim 5
    {4, 1, {1, 1, 3, 3}},         // dim 6
    {4, 4, {1, 3, 5, 13}},        // dim 7
    {5, 2, {1, 1, 5, 5, 17}},     // dim 8
    {5, 4, {1, 1, 5, 5, 5}},      // dim 9
    {5, 7, {1, 1, 7, 11, 19}},    // dim 10
    {5, 11, {1, 1, 5, 1, 1}},     // dim 11
    {5, 13, {1, 1, 1, 3, 11}},    // dim 12
    {5, 14, {1, 3, 5, 5, 31}},    // dim 13
    {6, 1, {1, 3, 3, 9, 7, 49}},  // dim 14
    {6, 13, {1, 1, 1, 15, 21, 21}},  // dim 15
    {6, 16, {1, 3, 1, 13, 27, 49}},  // dim 16
};

std::uint64_t gray(std::uint64_t i) { return i ^ (i >> 1); }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

SobolSequence::SobolSequence(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) {
        throw ConfigError("SobolSequence: dimension must lie in [1, " +
                          std::to_string(kMaxDim) + "], got " + std::to_string(dim));
    }
    v_.resize(static_cast<std::size_t>(dim));
    state_.assign(static_cast<std::size_t>(dim), 0);
    // Fixed digital (xor) shift per dimension. The raw sequence puts some
    // points exactly on coordinate diagonals (u_i = u_j), which the inverse
    // Gaussian map would send onto symmetry sets of the sphere; the shift
    // removes those exact alignments while preserving the net structure and
    // determinism.
    shift_.resize(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        shift_[static_cast<std::size_t>(d)] =
            splitmix64(static_cast<std::uint64_t>(d) + 1) >> 12;
    }

    for (int d = 0; d < dim; ++d) {
        auto& v = v_[static_cast<std::size_t>(d)];
        if (d == 0) {
            for (int j = 0; j < kBits; ++j) v[static_cast<std::size_t>(j)] = 1ULL << (kBits - 1 - j);
            continue;
        }
        const DirectionSeed& seed = kSeeds[d - 1];
        const int s = seed.s;
        std::uint64_t m[kBits];
        for (int j = 0; j < s; ++j) {
            m[j] = seed.m[j];
            if (m[j] % 2 == 0 || m[j] >= (1ULL << (j + 1))) {
                throw Error("SobolSequence: corrupt direction-number table");
            }
        }
        for (int j = s; j < kBits; ++j) {
            std::uint64_t val = m[j - s] ^ (m[j - s] << s);
            for (int k = 1; k < s; ++k) {
                if ((seed.a >> (s - 1 - k)) & 1ULL) {
                    val ^= m[j - k] << k;
                }
            }
            m[j] = val;
        }
        for (int j = 0; j < kBits; ++j) {
            v[static_cast<std::size_t>(j)] = m[j] << (kBits - 1 - j);
        }
    }
}

void SobolSequence::next(double* out) {
    // x_{k} = x_{k-1} xor v_{ctz(k)} enumerates the sequence in Gray-code
    // order starting from x_0 = 0.
    const std::uint64_t k = index_ + 1;
    const int bit = std::countr_zero(k);
    for (int d = 0; d < dim_; ++d) {
        state_[static_cast<std::size_t>(d)] ^= v_[static_cast<std::size_t>(d)][static_cast<std::size_t>(bit)];
        out[d] = static_cast<double>(state_[static_cast<std::size_t>(d)] ^
                                     shift_[static_cast<std::size_t>(d)]) *
                 kScale;
    }
    index_ = k;
}

void SobolSequence::seek(std::uint64_t index) {
    if (index < 1) throw OutOfRange("SobolSequence::seek: index must be >= 1");
    // Recompute the state for the point before `index` directly from the
    // Gray code of its index.
    const std::uint64_t g = gray(index - 1);
    for (int d = 0; d < dim_; ++d) {
        std::uint64_t y = 0;
        for (int j = 0; j < kBits; ++j) {
            if ((g >> j) & 1ULL) y ^= v_[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)];
        }
        state_[static_cast<std::size_t>(d)] = y;
    }
    index_ = index - 1;
}

double uniform_open01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double standard_normal(std::mt19937_64& rng) {
    return normal_quantile(uniform_open01(rng));
}

Eigen::VectorXd standard_normal_vector(int m, std::mt19937_64& rng) {
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z[i] = standard_normal(rng);
    return z;
}

SphereSample sample_mc(int m, std::int64_t n_points, std::uint64_t seed) {
    if (m < 1) throw OutOfRange("sample_mc: dimension must be >= 1");
    if (n_points < 1) throw OutOfRange("sample_mc: sample count must be >= 1");

    std::mt19937_64 rng(seed);
    SphereSample sample;
    sample.dim = m;
    sample.directions.resize(m, n_points);
    sample.weight = 1.0 / static_cast<double>(n_points);
    sample.generator = "mc:seed=" + std::to_string(seed);

    for (std::int64_t k = 0; k < n_points; ++k) {
        for (;;) {
            const Eigen::VectorXd z = standard_normal_vector(m, rng);
            const double norm = z.norm();
            if (norm > 1e-8) {
                sample.directions.col(k) = z / norm;
                break;
            }
        }
    }
    return sample;
}

namespace {

SphereSample sample_qmc_impl(int m, std::int64_t n_points, std::uint64_t sequence_id,
                             const std::vector<double>& shift, const std::string& tag) {
    if (m < 1) throw OutOfRange("sample_qmc: dimension must be >= 1");
    if (n_points < 1) throw OutOfRange("sample_qmc: sample count must be >= 1");
    if (m > SobolSequence::kMaxDim) {
        throw ConfigError("sample_qmc: Sobol table covers dimensions up to " +
                          std::to_string(SobolSequence::kMaxDim) +
                          "; use the mc sampler for larger m");
    }

    SphereSample sample;
    sample.dim = m;
    sample.directions.resize(m, n_points);
    sample.weight = 1.0 / static_cast<double>(n_points);
    sample.generator = tag;

    SobolSequence sobol(m);
    const std::uint64_t offset =
        1 + sequence_id * static_cast<std::uint64_t>(n_points);
    sobol.seek(offset);

    std::vector<double> u(static_cast<std::size_t>(m));
    Eigen::VectorXd z(m);
    for (std::int64_t k = 0; k < n_points; ++k) {
        for (;;) {
            sobol.next(u.data());
            for (int d = 0; d < m; ++d) {
                double ud = u[static_cast<std::size_t>(d)];
                if (!shift.empty()) {
                    ud += shift[static_cast<std::size_t>(d)];
                    ud -= std::floor(ud);
                }
                // Keep strictly inside (0,1) for the quantile map.
                ud = std::min(std::max(ud, 0x1p-53), 1.0 - 0x1p-53);
                z[d] = normal_quantile(ud);
            }
            const double norm = z.norm();
            if (norm > 1e-8) {
                sample.directions.col(k) = z / norm;
                break;
            }
            // The all-0.5 point maps to the Gaussian origin; skip it.
        }
    }
    return sample;
}

}  // namespace

SphereSample sample_qmc(int m, std::int64_t n_points, std::uint64_t sequence_id) {
    return sample_qmc_impl(m, n_points, sequence_id, {},
                           "qmc:sobol,id=" + std::to_string(sequence_id) + ",offset=" +
                               std::to_string(1 + sequence_id *
                                                      static_cast<std::uint64_t>(n_points)));
}

SphereSample sample_qmc_shifted(int m, std::int64_t n_points,
                                std::uint64_t sequence_id, std::uint64_t shift_seed) {
    std::mt19937_64 rng(shift_seed);
    std::vector<double> shift(static_cast<std::size_t>(m));
    for (auto& s : shift) s = uniform_open01(rng);
    return sample_qmc_impl(m, n_points, sequence_id, shift,
                           "qmc:sobol,id=" + std::to_string(sequence_id) +
                               ",shift_seed=" + std::to_string(shift_seed));
}

}  // namespace sphrad
