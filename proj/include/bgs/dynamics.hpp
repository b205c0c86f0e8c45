#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "bgs/hamiltonian.hpp"

namespace bgs {

enum class EvolutionKind { alpha0, alpha_phi, alpha_psi };

inline std::string to_string(EvolutionKind k) {
    switch (k) {
        case EvolutionKind::alpha0: return "alpha0";
        case EvolutionKind::alpha_phi: return "alpha_phi";
        case EvolutionKind::alpha_psi: return "alpha_psi";
    }
    return "?";
}

namespace detail {

// Entrywise e^{i t (lambda_i - lambda_j)} applied to a matrix already
// expressed in the eigenbasis of the generator. Differences are taken in
// the exponent, so mixed huge/tiny products never appear.
inline ComplexMatrix phase_conjugate(const RealVector& lambdas, Complex t,
                                     const ComplexMatrix& x) {
    const Eigen::Index n = lambdas.size();
    const Complex w = Complex(0.0, 1.0) * t;
    ComplexMatrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out(i, j) = checked_exp(w * (lambdas(i) - lambdas(j)), "evolve") * x(i, j);
    return out;
}

}  // namespace detail

// alpha0: e^{itH0} X e^{-itH0};
// alpha_phi: T alpha0^t(T^{-1} X T) T^{-1}  (= e^{itH} X e^{-itH});
// alpha_psi: (T*)^{-1} alpha0^t(T* X (T*)^{-1}) T*  (= e^{itH*} X e^{-itH*}).
// The sandwich forms are the definitions; the exponential forms are
// cross-checked in the test suite.
inline ComplexMatrix evolve(EvolutionKind kind, const HamiltonianTriple& triple,
                            const BiorthogonalSystem& sys, Complex t,
                            const ComplexMatrix& x) {
    (void)triple;
    if (x.rows() != sys.dim || x.cols() != sys.dim)
        throw DimensionMismatchError("evolve: operator dimension mismatch");
    switch (kind) {
        case EvolutionKind::alpha0:
            return detail::phase_conjugate(sys.lambdas, t, x);
        case EvolutionKind::alpha_phi: {
            ComplexMatrix inner_x = sys.T_inv * x * sys.T;
            return sys.T * detail::phase_conjugate(sys.lambdas, t, inner_x) * sys.T_inv;
        }
        case EvolutionKind::alpha_psi: {
            ComplexMatrix tstar = sys.T.adjoint();
            ComplexMatrix tstar_inv = sys.T_inv.adjoint();
            ComplexMatrix inner_x = tstar * x * tstar_inv;
            return tstar_inv * detail::phase_conjugate(sys.lambdas, t, inner_x) * tstar;
        }
    }
    throw Error("evolve: unhandled kind");
}

// t = i beta: alpha^{i beta}(X) = e^{-beta G} X e^{beta G} for the matching
// generator.
inline ComplexMatrix imaginary_time(EvolutionKind kind, const HamiltonianTriple& triple,
                                    const BiorthogonalSystem& sys, double beta,
                                    const ComplexMatrix& x) {
    return evolve(kind, triple, sys, Complex(0.0, beta), x);
}

struct GroupElement {
    Complex t;
    ComplexMatrix V;    // V(t) = T e^{i H0 t} T^{-1}
    double norm;        // ||V(t)||_op
    double norm_bound;  // ||T|| ||T^{-1}||, valid for real t
};

inline GroupElement group_element(const BiorthogonalSystem& sys,
                                  const HamiltonianTriple& triple, Complex t) {
    GroupElement g;
    g.t = t;
    g.V = exp_similar(triple.es_H, Complex(0.0, 1.0) * t);
    g.norm = operator_norm(g.V);
    g.norm_bound = operator_norm(sys.T) * operator_norm(sys.T_inv);
    return g;
}

// max over pairs of ||V(t+s) - V(t) V(s)|| / (1 + ||V(t+s)||), including the
// inverse relation V(-t) V(t) = 1 for each t that appears.
inline double group_law_residual(const BiorthogonalSystem& sys,
                                 const HamiltonianTriple& triple,
                                 const std::vector<std::pair<double, double>>& ts) {
    double worst = 0.0;
    auto v = [&](double t) { return exp_similar(triple.es_H, Complex(0.0, t)); };
    for (auto [t, s] : ts) {
        ComplexMatrix vts = v(t + s);
        double law = operator_norm(vts - v(t) * v(s)) / (1.0 + operator_norm(vts));
        double inv_t = operator_norm(v(-t) * v(t) - identity_matrix(sys.dim));
        double inv_s = operator_norm(v(-s) * v(s) - identity_matrix(sys.dim));
        worst = std::max({worst, law, inv_t, inv_s});
    }
    return worst;
}

// U(t) = T^{-1} V(t) T should be exactly unitary (it is e^{i H0 t}); reports
// max_t ||U(t)* U(t) - 1||_op.
inline double similar_to_unitary_check(const BiorthogonalSystem& sys,
                                       const HamiltonianTriple& triple,
                                       const std::vector<double>& ts) {
    double worst = 0.0;
    for (double t : ts) {
        ComplexMatrix v = exp_similar(triple.es_H, Complex(0.0, t));
        ComplexMatrix u = sys.T_inv * v * sys.T;
        worst = std::max(worst, operator_norm(u.adjoint() * u - identity_matrix(sys.dim)));
    }
    return worst;
}

struct GeneratorCheck {
    std::vector<double> hs;
    std::vector<double> errors;          // ||D(h) - i[G, X]||_op per step size
    std::optional<double> fitted_order;  // log-log slope; empty for fixed points
    double limit_error;                  // Richardson-extrapolated limit vs i[G, X]
};

// Central differences of alpha^t at t = 0 against the commutator generator.
// The extrapolated limit uses Neville's scheme in h^2 over the whole ladder.
inline GeneratorCheck generator_fd_check(EvolutionKind kind, const HamiltonianTriple& triple,
                                         const BiorthogonalSystem& sys,
                                         const ComplexMatrix& x,
                                         const std::vector<double>& hs) {
    if (hs.size() < 2) throw Error("generator_fd_check: need at least two step sizes");
    for (std::size_t i = 1; i < hs.size(); ++i)
        if (!(hs[i] < hs[i - 1]) || !(hs[i] > 0.0))
            throw Error("generator_fd_check: step sizes must be positive decreasing");

    const ComplexMatrix* g = nullptr;
    switch (kind) {
        case EvolutionKind::alpha0: g = &triple.H0; break;
        case EvolutionKind::alpha_phi: g = &triple.H; break;
        case EvolutionKind::alpha_psi: g = &triple.Hstar; break;
    }
    ComplexMatrix exact = Complex(0.0, 1.0) * commutator(*g, x);

    GeneratorCheck out;
    out.hs = hs;
    std::vector<ComplexMatrix> diffs;
    for (double h : hs) {
        ComplexMatrix fwd = evolve(kind, triple, sys, Complex(h, 0.0), x);
        ComplexMatrix bwd = evolve(kind, triple, sys, Complex(-h, 0.0), x);
        diffs.push_back((fwd - bwd) / (2.0 * h));
        out.errors.push_back(operator_norm(diffs.back() - exact));
    }

    // Neville extrapolation in h^2.
    std::vector<ComplexMatrix> tab = diffs;
    for (std::size_t m = 1; m < tab.size(); ++m)
        for (std::size_t k = tab.size() - 1; k >= m; --k) {
            const double ratio = (hs[k - m] * hs[k - m]) / (hs[k] * hs[k]);
            tab[k] = tab[k] + (tab[k] - tab[k - 1]) / (ratio - 1.0);
            if (k == m) break;
        }
    out.limit_error = operator_norm(tab.back() - exact);

    bool informative = true;
    for (double e : out.errors)
        if (e < 1e-12) informative = false;  // fixed point: nothing to fit
    if (informative) {
        std::vector<double> xs(hs.begin(), hs.end());
        out.fitted_order = detail::loglog_slope(xs, out.errors);
    }
    return out;
}

struct RankOneEvolution {
    ComplexVector Phi_0t;            // e^{i H0 t} Phi
    ComplexVector Psi_0t;            // e^{i H0 t} Psi
    ComplexVector Phi_phit;          // T e^{i H0 t} T^{-1} Phi = e^{iHt} Phi
    ComplexVector Psi_psit;          // (T^{-1})* e^{i H0 t} T* Psi = e^{iH*t} Psi
    double alpha0_residual;          // alpha0^t(Y) vs |Phi_0(t)><Psi_0(t)|
    double alpha_phi_residual;       // alpha_phi^t(Y) vs |Phi_phi(t)><Psi_psi(t)|
    double simplify_phi_residual;    // T e^{iH0t} T^{-1} Phi vs e^{iHt} Phi
    double simplify_psi_residual;    // (T^{-1})* e^{iH0t} T* Psi vs e^{iH*t} Psi
};

// Evolution of Y = |Phi><Psi|. Conjugating Y by V(t) puts the H-evolution on
// the ket and the H*-evolution on the bra: alpha_phi^t(Y) =
// |e^{iHt} Phi><e^{iH*t} Psi|.
inline RankOneEvolution rank_one_evolution(const BiorthogonalSystem& sys,
                                           const HamiltonianTriple& triple,
                                           const ComplexVector& Phi,
                                           const ComplexVector& Psi, double t) {
    if (std::abs(Phi.norm() - 1.0) > 1e-12 || std::abs(Psi.norm() - 1.0) > 1e-12)
        throw Error("rank_one_evolution: Phi and Psi must be unit vectors");

    const Complex it(0.0, t);
    ComplexVector u0(sys.dim);
    for (int i = 0; i < sys.dim; ++i) u0(i) = std::exp(it * sys.lambdas(i));
    ComplexMatrix e_h0 = ComplexMatrix(u0.asDiagonal());

    RankOneEvolution r;
    r.Phi_0t = e_h0 * Phi;
    r.Psi_0t = e_h0 * Psi;
    // Vector route (stepwise products) ...
    r.Phi_phit = sys.T * (e_h0 * (sys.T_inv * Phi));
    r.Psi_psit = sys.T_inv.adjoint() * (e_h0 * (sys.T.adjoint() * Psi));
    // ... against the assembled group-element matrices.
    ComplexMatrix exp_h = exp_similar(triple.es_H, it);
    ComplexMatrix exp_hstar = exp_similar(triple.es_Hstar, it);
    r.simplify_phi_residual = (exp_h * Phi - r.Phi_phit).norm();
    r.simplify_psi_residual = (exp_hstar * Psi - r.Psi_psit).norm();

    ComplexMatrix y = outer(Phi, Psi);
    r.alpha0_residual = operator_norm(evolve(EvolutionKind::alpha0, triple, sys, t, y) -
                                      outer(r.Phi_0t, r.Psi_0t));
    r.alpha_phi_residual = operator_norm(evolve(EvolutionKind::alpha_phi, triple, sys, t, y) -
                                         outer(r.Phi_phit, r.Psi_psit));
    return r;
}

}  // namespace bgs
