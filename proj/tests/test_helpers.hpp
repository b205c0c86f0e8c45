#pragma once

// Shared fixtures and independent oracles for the test suite. Oracles here
// must not reuse the library's computational path for the quantity they
// check.

#include <cmath>
#include <complex>

#include "bgs/bgs.hpp"

namespace bgs_test {

using bgs::Complex;
using bgs::ComplexMatrix;
using bgs::ComplexVector;

// Independent operator-norm oracle: power iteration on M*M with a fixed
// deterministic start vector.
inline double power_iteration_norm(const ComplexMatrix& m, int iters = 2000) {
    const Eigen::Index n = m.rows();
    ComplexMatrix gram = m.adjoint() * m;
    ComplexVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = Complex(1.0 + 0.37 * static_cast<double>(i % 7),
                       0.11 * static_cast<double>((i * i) % 5));
    v /= v.norm();
    double lambda = 0.0;
    for (int k = 0; k < iters; ++k) {
        ComplexVector w = gram * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = w / nw;
        lambda = nw;
    }
    return std::sqrt(lambda);
}

// Brute-force partial sums of sum_{n<N} e^{-beta n} c(n) in long double.
template <typename Fn>
long double weighted_partial_sum(int terms, long double beta, Fn c) {
    long double acc = 0.0L;
    for (int n = 0; n < terms; ++n)
        acc += std::exp(-beta * static_cast<long double>(n)) * c(n);
    return acc;
}

inline bgs::ScenarioRecipe identity_recipe(int dim, double beta = std::log(2.0)) {
    bgs::ScenarioRecipe r;
    r.kind = bgs::ScenarioKind::identity;
    r.dim = dim;
    r.beta = beta;
    return r;
}

inline bgs::ScenarioRecipe projector_recipe(int dim, int u_index = 0,
                                            double beta = std::log(2.0)) {
    bgs::ScenarioRecipe r;
    r.kind = bgs::ScenarioKind::projector;
    r.dim = dim;
    r.beta = beta;
    r.u_index = u_index;
    return r;
}

inline bgs::ScenarioRecipe diagonal_recipe(int dim, double beta = std::log(2.0)) {
    bgs::ScenarioRecipe r;
    r.kind = bgs::ScenarioKind::diagonal;
    r.dim = dim;
    r.beta = beta;
    return r;
}

inline bgs::ScenarioRecipe riesz_recipe(int dim, double epsilon = 0.3,
                                        std::uint64_t seed = 42,
                                        double beta = std::log(2.0)) {
    bgs::ScenarioRecipe r;
    r.kind = bgs::ScenarioKind::random_riesz;
    r.dim = dim;
    r.beta = beta;
    r.epsilon = epsilon;
    r.seed = seed;
    return r;
}

}  // namespace bgs_test
