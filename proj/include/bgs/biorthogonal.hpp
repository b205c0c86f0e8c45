#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bgs/matrix.hpp"
#include "bgs/random.hpp"

namespace bgs {

enum class ScenarioKind { identity, projector, diagonal, random_riesz };

inline std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::identity: return "identity";
        case ScenarioKind::projector: return "projector";
        case ScenarioKind::diagonal: return "diagonal";
        case ScenarioKind::random_riesz: return "random_riesz";
    }
    return "?";
}

inline ScenarioKind scenario_from_string(const std::string& s) {
    if (s == "identity") return ScenarioKind::identity;
    if (s == "projector") return ScenarioKind::projector;
    if (s == "diagonal") return ScenarioKind::diagonal;
    if (s == "random_riesz" || s == "random-riesz") return ScenarioKind::random_riesz;
    throw ConfigError("scenario: unknown kind '" + s + "'");
}

// How to build T at a given truncation dimension. beta rides along because
// the thermal weights e^{-beta lambda_n} belong to the scenario.
struct ScenarioRecipe {
    ScenarioKind kind = ScenarioKind::identity;
    int dim = 8;
    double beta = 0.6931471805599453;  // ln 2: Z0 = 2 for lambda_n = n
    std::uint64_t seed = 0;

    int u_index = 0;                    // projector: u = e_k ...
    std::optional<ComplexVector> u;     // ... unless an explicit unit vector is given
    double epsilon = 0.3;               // random_riesz: T = 1 + eps R, ||R|| = 1
    std::string c_rule = "linear";      // diagonal: c_n = 1 + n
    std::optional<RealVector> lambdas;  // custom eigenvalues; default lambda_n = n

    bool lambda_is_default() const { return !lambdas.has_value(); }
};

inline RealVector recipe_lambdas(const ScenarioRecipe& r) {
    if (r.dim < 1) throw RecipeError("recipe: dim must be >= 1");
    if (r.lambdas) {
        if (r.lambdas->size() != r.dim)
            throw RecipeError("recipe: custom lambdas length differs from dim");
        for (Eigen::Index i = 1; i < r.lambdas->size(); ++i)
            if ((*r.lambdas)(i) < (*r.lambdas)(i - 1))
                throw RecipeError("recipe: lambdas must be nondecreasing");
        return *r.lambdas;
    }
    RealVector l(r.dim);
    for (int i = 0; i < r.dim; ++i) l(i) = static_cast<double>(i);
    return l;
}

inline ComplexVector recipe_u(const ScenarioRecipe& r) {
    if (r.u) {
        if (r.u->size() != r.dim) throw RecipeError("projector: u length differs from dim");
        if (std::abs(r.u->norm() - 1.0) > 1e-12)
            throw RecipeError("projector: u must be a unit vector");
        return *r.u;
    }
    if (r.u_index < 0 || r.u_index >= r.dim)
        throw RecipeError("projector: u_index out of range");
    return basis_vector(r.dim, r.u_index);
}

inline double diagonal_weight(const ScenarioRecipe& r, int n) {
    if (r.c_rule == "linear") return 1.0 + static_cast<double>(n);
    throw RecipeError("diagonal: unknown c_rule '" + r.c_rule + "'");
}

// Truncated biorthogonal family: phi_n = T e_n, psi_n = (T*)^{-1} e_n.
struct BiorthogonalSystem {
    ScenarioRecipe recipe;
    int dim = 0;
    RealVector lambdas;
    ComplexMatrix T;
    ComplexMatrix T_inv;
    double inv_residual = 0.0;  // ||T T^{-1} - 1||_op from certification
    ComplexMatrix phi;          // column n is phi_n (equals T)
    ComplexMatrix psi;          // column n is psi_n (equals (T^{-1})*)

    ComplexVector phi_col(int n) const { return phi.col(n); }
    ComplexVector psi_col(int n) const { return psi.col(n); }
};

inline ComplexMatrix recipe_transform(const ScenarioRecipe& r) {
    const int n = r.dim;
    switch (r.kind) {
        case ScenarioKind::identity:
            return identity_matrix(n);
        case ScenarioKind::projector: {
            ComplexVector u = recipe_u(r);
            return identity_matrix(n) + Complex(0.0, 1.0) * outer(u, u);
        }
        case ScenarioKind::diagonal: {
            ComplexVector d(n);
            for (int i = 0; i < n; ++i) {
                double c = diagonal_weight(r, i);
                if (c == 0.0) throw RecipeError("diagonal: c_n must be nonzero");
                d(i) = Complex(c, 0.0);
            }
            return ComplexMatrix(d.asDiagonal());
        }
        case ScenarioKind::random_riesz: {
            if (!(r.epsilon > 0.0 && r.epsilon < 1.0))
                throw RecipeError("random_riesz: epsilon must lie in (0,1)");
            Rng rng(r.seed);
            ComplexMatrix pert = rng.unit_norm_matrix(n);
            // ||eps R|| = eps < 1, so T is invertible by the Neumann bound.
            return identity_matrix(n) + r.epsilon * pert;
        }
    }
    throw RecipeError("recipe: unhandled kind");
}

inline BiorthogonalSystem build_system(const ScenarioRecipe& r, double tol_inv = -1.0) {
    BiorthogonalSystem sys;
    sys.recipe = r;
    sys.dim = r.dim;
    sys.lambdas = recipe_lambdas(r);
    if (!(r.beta > 0.0)) throw RecipeError("recipe: beta must be positive");

    sys.T = recipe_transform(r);
    ensure_finite(sys.T, "build_system");
    InverseResult inv = invert(sys.T, tol_inv);
    sys.T_inv = inv.inverse;
    sys.inv_residual = inv.residual;
    sys.phi = sys.T;
    sys.psi = sys.T_inv.adjoint();
    return sys;
}

// max over (n, m) of |<phi_n, psi_m> - delta_{n,m}|.
inline double biorthogonality_residual(const BiorthogonalSystem& sys) {
    ComplexMatrix gram = sys.phi.adjoint() * sys.psi;
    return max_abs_diff(gram, identity_matrix(sys.dim));
}

struct MetricOperators {
    ComplexMatrix S_phi;  // sum_n |phi_n><phi_n|
    ComplexMatrix S_psi;  // sum_n |psi_n><psi_n|
    double residual_phi;  // ||S_phi - T T*||_op
    double residual_psi;  // ||S_psi - (T T*)^{-1}||_op
};

inline MetricOperators metric_operators(const BiorthogonalSystem& sys) {
    const int n = sys.dim;
    MetricOperators m;
    m.S_phi = ComplexMatrix::Zero(n, n);
    m.S_psi = ComplexMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        m.S_phi += outer(sys.phi_col(k), sys.phi_col(k));
        m.S_psi += outer(sys.psi_col(k), sys.psi_col(k));
    }
    ComplexMatrix tts = sys.T * sys.T.adjoint();
    m.residual_phi = operator_norm(m.S_phi - tts);
    m.residual_psi = operator_norm(m.S_psi - invert(tts).inverse);
    return m;
}

struct WellBehavedDiagnostic {
    double Z_phiphi;
    double Z_psipsi;
    double tail_estimate;  // geometric extrapolation of the dropped tail; +inf when the
                           // retained terms are not yet decreasing
};

namespace detail {
inline double geometric_tail(double t_prev, double t_last) {
    if (!(t_last > 0.0)) return 0.0;
    if (!(t_prev > 0.0)) return std::numeric_limits<double>::infinity();
    const double r = t_last / t_prev;
    if (r >= 1.0) return std::numeric_limits<double>::infinity();
    return t_last * r / (1.0 - r);
}
}  // namespace detail

inline WellBehavedDiagnostic well_behaved_diagnostic(const BiorthogonalSystem& sys,
                                                     double beta) {
    if (!(beta > 0.0)) throw RecipeError("well_behaved_diagnostic: beta must be positive");
    const int n = sys.dim;
    double z_phi = 0.0, z_psi = 0.0;
    double tp_prev = 0.0, tp_last = 0.0, ts_prev = 0.0, ts_last = 0.0;
    for (int k = 0; k < n; ++k) {
        const double w = std::exp(-beta * sys.lambdas(k));
        const double tp = w * sys.phi_col(k).squaredNorm();
        const double ts = w * sys.psi_col(k).squaredNorm();
        z_phi += tp;
        z_psi += ts;
        tp_prev = tp_last;
        tp_last = tp;
        ts_prev = ts_last;
        ts_last = ts;
    }
    WellBehavedDiagnostic d;
    d.Z_phiphi = z_phi;
    d.Z_psipsi = z_psi;
    d.tail_estimate = std::max(detail::geometric_tail(tp_prev, tp_last),
                               detail::geometric_tail(ts_prev, ts_last));
    return d;
}

// max over sampled unit pairs (f, g) of |<f,g> - sum_n <f,phi_n><psi_n,g>|,
// with the mirrored expansion checked as well.
inline double quasi_basis_residual(const BiorthogonalSystem& sys, int trials,
                                   std::uint64_t seed) {
    if (trials < 1) throw Error("quasi_basis_residual: trials must be >= 1");
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        ComplexVector f = rng.unit_vector(sys.dim);
        ComplexVector g = rng.unit_vector(sys.dim);
        Complex direct = inner(f, g);
        Complex via_phi_psi = 0.0, via_psi_phi = 0.0;
        for (int k = 0; k < sys.dim; ++k) {
            via_phi_psi += inner(f, sys.phi_col(k)) * inner(sys.psi_col(k), g);
            via_psi_phi += inner(f, sys.psi_col(k)) * inner(sys.phi_col(k), g);
        }
        worst = std::max(worst, std::abs(direct - via_phi_psi));
        worst = std::max(worst, std::abs(direct - via_psi_phi));
    }
    return worst;
}

struct GrowthRow {
    int dim;
    double norm_T;
    double norm_T_inv;
    double Z_phiphi;
    double Z_psipsi;
};

struct GrowthSweep {
    std::vector<GrowthRow> rows;
    double ratio_T = 1.0;      // last/first norm ratio over the sweep
    double ratio_T_inv = 1.0;
    double exponent_T = 0.0;   // least-squares slope of log||T_N|| vs log N
    double exponent_T_inv = 0.0;
    bool growth_flag = false;  // raised when either ratio exceeds the factor
};

namespace detail {
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return 0.0;
    const double denom = m * sxx - sx * sx;
    return denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
}
}  // namespace detail

// Norm/partition table across truncation sizes. Bounded-T recipes stay flat;
// the diagonal c_n = 1 + n family shows ||T_N|| = N, the truncated face of an
// unbounded intertwiner.
inline GrowthSweep riesz_growth_sweep(const ScenarioRecipe& base,
                                      const std::vector<int>& dims,
                                      double growth_factor = 1.5) {
    if (dims.empty()) throw RecipeError("riesz_growth_sweep: empty dims");
    for (std::size_t i = 1; i < dims.size(); ++i)
        if (dims[i] <= dims[i - 1]) throw RecipeError("riesz_growth_sweep: dims must increase");

    GrowthSweep sweep;
    std::vector<double> ns, nt, nti;
    for (int d : dims) {
        ScenarioRecipe r = base;
        r.dim = d;
        r.lambdas.reset();  // rule-based lambdas only, re-evaluated per dim
        r.seed = derive_seed(base.seed, "sweep_dim_" + std::to_string(d));
        BiorthogonalSystem sys = build_system(r);
        WellBehavedDiagnostic wb = well_behaved_diagnostic(sys, r.beta);
        GrowthRow row;
        row.dim = d;
        row.norm_T = operator_norm(sys.T);
        row.norm_T_inv = operator_norm(sys.T_inv);
        row.Z_phiphi = wb.Z_phiphi;
        row.Z_psipsi = wb.Z_psipsi;
        sweep.rows.push_back(row);
        ns.push_back(static_cast<double>(d));
        nt.push_back(row.norm_T);
        nti.push_back(row.norm_T_inv);
    }
    sweep.ratio_T = sweep.rows.back().norm_T / sweep.rows.front().norm_T;
    sweep.ratio_T_inv = sweep.rows.back().norm_T_inv / sweep.rows.front().norm_T_inv;
    sweep.exponent_T = detail::loglog_slope(ns, nt);
    sweep.exponent_T_inv = detail::loglog_slope(ns, nti);
    sweep.growth_flag = sweep.ratio_T > growth_factor || sweep.ratio_T_inv > growth_factor;
    return sweep;
}

}  // namespace bgs
