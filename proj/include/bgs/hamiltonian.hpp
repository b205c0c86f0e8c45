#pragma once

#include <functional>
#include <vector>

#include "bgs/biorthogonal.hpp"
#include "bgs/matrix.hpp"
#include "bgs/random.hpp"

namespace bgs {

// H0 = diag(lambda), H = T H0 T^{-1}, H* = (T*)^{-1} H0 T*. The similarity
// data is cached so every exponential is exact.
struct HamiltonianTriple {
    ComplexMatrix H0;
    ComplexMatrix H;
    ComplexMatrix Hstar;
    EigenSimilarity es_H;
    EigenSimilarity es_Hstar;

    Eigen::Index dim() const { return H0.rows(); }
};

inline HamiltonianTriple build_triple(const BiorthogonalSystem& sys) {
    HamiltonianTriple t;
    ComplexMatrix d = sys.lambdas.cast<Complex>().asDiagonal();
    t.H0 = d;
    t.H = sys.T * d * sys.T_inv;
    t.Hstar = sys.T_inv.adjoint() * d * sys.T.adjoint();
    t.es_H = EigenSimilarity{sys.lambdas, sys.T, sys.T_inv};
    t.es_Hstar = EigenSimilarity{sys.lambdas, sys.T_inv.adjoint(), sys.T.adjoint()};
    return t;
}

struct EigenResiduals {
    double max_e;    // max_n ||H0 e_n - lambda_n e_n||
    double max_phi;  // max_n ||H phi_n - lambda_n phi_n||
    double max_psi;  // max_n ||H* psi_n - lambda_n psi_n||

    double max_all() const { return std::max(max_e, std::max(max_phi, max_psi)); }
};

inline EigenResiduals eigen_residuals(const HamiltonianTriple& t,
                                      const BiorthogonalSystem& sys) {
    const double scale = 1.0 + sys.lambdas.cwiseAbs().maxCoeff();
    EigenResiduals r{0.0, 0.0, 0.0};
    for (int n = 0; n < sys.dim; ++n) {
        const Complex ln(sys.lambdas(n), 0.0);
        ComplexVector e = basis_vector(sys.dim, n);
        r.max_e = std::max(r.max_e, (t.H0 * e - ln * e).norm() / scale);
        r.max_phi = std::max(r.max_phi, (t.H * sys.phi_col(n) - ln * sys.phi_col(n)).norm() / scale);
        r.max_psi = std::max(r.max_psi, (t.Hstar * sys.psi_col(n) - ln * sys.psi_col(n)).norm() / scale);
    }
    return r;
}

struct IntertwiningResiduals {
    double r1;  // ||T H0 - H T||_op / ||H0||_op
    double r2;  // ||H* (T*)^{-1} - (T*)^{-1} H0||_op / ||H0||_op
};

inline IntertwiningResiduals intertwining_residuals(const HamiltonianTriple& t,
                                                    const BiorthogonalSystem& sys) {
    double h0 = operator_norm(t.H0);
    if (h0 == 0.0) h0 = 1.0;
    ComplexMatrix tstar_inv = sys.T_inv.adjoint();
    IntertwiningResiduals r;
    r.r1 = operator_norm(sys.T * t.H0 - t.H * sys.T) / h0;
    r.r2 = operator_norm(t.Hstar * tstar_inv - tstar_inv * t.H0) / h0;
    return r;
}

// R_k = T P_k T^{-1} = |phi_k><psi_k|.
struct ResolutionFamily {
    std::vector<ComplexMatrix> members;
};

inline ResolutionFamily resolution_family(const BiorthogonalSystem& sys) {
    ResolutionFamily fam;
    fam.members.reserve(sys.dim);
    for (int k = 0; k < sys.dim; ++k)
        fam.members.push_back(outer(sys.phi_col(k), sys.psi_col(k)));
    return fam;
}

struct ResolutionResiduals {
    double idempotency;   // max_k ||R_k R_k - R_k||_op
    double annihilation;  // max_{k != j} ||R_k R_j||_op
    double completeness;  // ||sum_k R_k - 1||_op
};

inline ResolutionResiduals resolution_residuals(const ResolutionFamily& fam) {
    ResolutionResiduals r{0.0, 0.0, 0.0};
    const std::size_t n = fam.members.size();
    if (n == 0) return r;
    const Eigen::Index d = fam.members[0].rows();
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (std::size_t k = 0; k < n; ++k) {
        sum += fam.members[k];
        for (std::size_t j = 0; j < n; ++j) {
            ComplexMatrix prod = fam.members[k] * fam.members[j];
            if (k == j)
                r.idempotency = std::max(r.idempotency, operator_norm(prod - fam.members[k]));
            else
                r.annihilation = std::max(r.annihilation, operator_norm(prod));
        }
    }
    r.completeness = operator_norm(sum - identity_matrix(d));
    return r;
}

// u(H) = T diag(u(lambda_n)) T^{-1}.
inline ComplexMatrix functional_calculus(const HamiltonianTriple& t,
                                         const std::function<Complex(double)>& u) {
    const Eigen::Index n = t.es_H.dim();
    ComplexVector vals(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex v = u(t.es_H.lambdas(i));
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw OverflowError("functional_calculus: u(lambda) out of range");
        vals(i) = v;
    }
    return t.es_H.transform * vals.asDiagonal() * t.es_H.transform_inverse;
}

// Consistency of the functional calculus against the resolution of identity:
// <u(H) f, g> vs sum_k u(lambda_k) <R_k f, g> on sampled pairs.
inline double functional_calculus_residual(const HamiltonianTriple& t,
                                           const BiorthogonalSystem& sys,
                                           const std::function<Complex(double)>& u,
                                           int trials, std::uint64_t seed) {
    ComplexMatrix uh = functional_calculus(t, u);
    ResolutionFamily fam = resolution_family(sys);
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < trials; ++i) {
        ComplexVector f = rng.unit_vector(sys.dim);
        ComplexVector g = rng.unit_vector(sys.dim);
        Complex direct = inner(ComplexVector(uh * f), g);
        Complex viar = 0.0;
        for (int k = 0; k < sys.dim; ++k)
            viar += u(sys.lambdas(k)) * inner(ComplexVector(fam.members[k] * f), g);
        worst = std::max(worst, std::abs(direct - viar));
    }
    return worst;
}

struct SpectrumCertificate {
    bool certified;
    double max_residual;
};

// sigma(H) = sigma(H0) = {lambda_n}: a full set of certified eigenpairs with
// an invertible eigenvector stack determines the spectrum with multiplicities
// in finite dimension. sigma_c and sigma_r are empty by construction here.
inline SpectrumCertificate spectrum_check(const HamiltonianTriple& t,
                                          const BiorthogonalSystem& sys,
                                          double tol = 1e-10) {
    EigenResiduals r = eigen_residuals(t, sys);
    const bool stack_ok = sys.inv_residual <= 1e-10 * sys.dim;
    return SpectrumCertificate{r.max_all() <= tol && stack_ok, r.max_all()};
}

// sum_k lambda_k^2 |<g, psi_k>|^2 -- the truncated shadow of the domain
// characterization of H.
inline double domain_energy(const BiorthogonalSystem& sys, const ComplexVector& g) {
    if (g.size() != sys.dim) throw DimensionMismatchError("domain_energy: vector size");
    double s = 0.0;
    for (int k = 0; k < sys.dim; ++k) {
        const double a = std::abs(inner(g, sys.psi_col(k)));
        s += sys.lambdas(k) * sys.lambdas(k) * a * a;
    }
    return s;
}

}  // namespace bgs
