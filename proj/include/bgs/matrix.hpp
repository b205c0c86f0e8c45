#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "bgs/errors.hpp"

namespace bgs {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// exp() overflows past this; used to reject beta*lambda out of range.
inline constexpr double kExpArgMax = 709.0;

inline ComplexMatrix identity_matrix(Eigen::Index n) {
    return ComplexMatrix::Identity(n, n);
}

inline ComplexVector basis_vector(Eigen::Index n, Eigen::Index k) {
    ComplexVector e = ComplexVector::Zero(n);
    e(k) = Complex(1.0, 0.0);
    return e;
}

// <x, y>, antilinear in the first argument.
inline Complex inner(const ComplexVector& x, const ComplexVector& y) {
    if (x.size() != y.size())
        throw DimensionMismatchError("inner: vector sizes differ");
    return x.dot(y);
}

// |x><y| : f -> <y, f> x.
inline ComplexMatrix outer(const ComplexVector& x, const ComplexVector& y) {
    return x * y.adjoint();
}

inline ComplexMatrix adjoint(const ComplexMatrix& m) { return m.adjoint(); }

inline Complex trace(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatchError("trace: matrix not square");
    return m.trace();
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
        throw DimensionMismatchError("commutator: dimensions do not match");
    return a * b - b * a;
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatchError("max_abs_diff: dimensions do not match");
    return (a - b).cwiseAbs().maxCoeff();
}

inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
    return max_abs_diff(a, b) <= tol;
}

inline bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

inline void ensure_finite(const ComplexMatrix& m, const std::string& what) {
    if (!all_finite(m)) throw Error(what + ": non-finite entries");
}

// Largest singular value, via a self-adjoint eigensolve of M*M.
inline double operator_norm(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    ComplexMatrix gram = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
    double top = es.eigenvalues().maxCoeff();
    return top > 0.0 ? std::sqrt(top) : 0.0;
}

struct InverseResult {
    ComplexMatrix inverse;
    double residual;  // ||M * inverse - 1||_op actually achieved
};

// Partial-pivoting LU with residual certification. Throws SingularMatrixError
// when a pivot falls below pivot_rel_tol relative to the largest pivot, or
// when the certified residual exceeds tol_inv (default 1e-10 * dim).
inline InverseResult invert(const ComplexMatrix& m, double tol_inv = -1.0,
                            double pivot_rel_tol = 1e-13) {
    if (m.rows() != m.cols()) throw DimensionMismatchError("invert: matrix not square");
    const Eigen::Index n = m.rows();
    if (tol_inv < 0.0) tol_inv = 1e-10 * static_cast<double>(n);

    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double pmax = pivots.maxCoeff();
    const double pmin = pivots.minCoeff();
    if (pmax == 0.0 || pmin <= pivot_rel_tol * pmax)
        throw SingularMatrixError("invert: pivot " + std::to_string(pmin) +
                                  " below threshold (matrix numerically singular)");

    InverseResult out;
    out.inverse = lu.solve(identity_matrix(n));
    out.residual = operator_norm(m * out.inverse - identity_matrix(n));
    if (!(out.residual <= tol_inv))
        throw SingularMatrixError("invert: residual " + std::to_string(out.residual) +
                                  " exceeds certification tolerance " + std::to_string(tol_inv));
    return out;
}

// An operator presented as T diag(lambda) T^{-1}; exponentials of it are
// exact similarity transforms of scalar exponentials.
struct EigenSimilarity {
    RealVector lambdas;
    ComplexMatrix transform;          // T, columns are eigenvectors
    ComplexMatrix transform_inverse;  // certified T^{-1}

    Eigen::Index dim() const { return lambdas.size(); }

    ComplexMatrix realize() const {
        return transform * lambdas.cast<Complex>().asDiagonal() * transform_inverse;
    }
};

inline Complex checked_exp(Complex w, const char* where) {
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
        throw OverflowError(std::string(where) + ": non-finite exponent");
    if (w.real() > kExpArgMax)
        throw OverflowError(std::string(where) + ": exponent real part " +
                            std::to_string(w.real()) + " out of double range");
    return std::exp(w);
}

// e^{z M} for M = T diag(lambda) T^{-1}, computed as T diag(e^{z lambda}) T^{-1}.
inline ComplexMatrix exp_similar(const EigenSimilarity& es, Complex z) {
    const Eigen::Index n = es.dim();
    ComplexVector factors(n);
    for (Eigen::Index i = 0; i < n; ++i)
        factors(i) = checked_exp(z * es.lambdas(i), "exp_similar");
    return es.transform * factors.asDiagonal() * es.transform_inverse;
}

}  // namespace bgs
