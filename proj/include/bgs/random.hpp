#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "bgs/matrix.hpp"

namespace bgs {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Per-check / per-sweep-member seeds, derived deterministically from the
// scenario seed so the report is independent of check ordering.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
    return splitmix64(base ^ fnv1a64(label));
}

// All randomness in the library flows through this generator: mt19937_64
// uniforms turned into Gaussians by Box-Muller. Same seed, same platform,
// same stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {
        return std::generate_canonical<double, 53>(gen_);
    }

    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * M_PI * u2);
    }

    Complex cgaussian() {
        const double re = gaussian();
        const double im = gaussian();
        return Complex(re, im);
    }

    ComplexVector vector(Eigen::Index n) {
        ComplexVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = cgaussian();
        return v;
    }

    ComplexVector unit_vector(Eigen::Index n) {
        ComplexVector v = vector(n);
        return v / v.norm();
    }

    ComplexMatrix matrix(Eigen::Index n) {
        ComplexMatrix m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cgaussian();
        return m;
    }

    // i.i.d. complex Gaussian entries, normalized to unit operator norm so
    // residuals are scale-free.
    ComplexMatrix unit_norm_matrix(Eigen::Index n) {
        ComplexMatrix m = matrix(n);
        return m / operator_norm(m);
    }

    ComplexMatrix hermitian_unit(Eigen::Index n) {
        ComplexMatrix m = matrix(n);
        ComplexMatrix h = (m + m.adjoint()) / 2.0;
        return h / operator_norm(h);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace bgs
