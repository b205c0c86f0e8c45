// Acceptance suite: closed-form reproduction and property checks at desk
// scale. One pass/fail line per criterion; exit 0 iff everything passes.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bgs/bgs.hpp"

using namespace bgs;

namespace {

const double kLn2 = std::log(2.0);

struct Criterion {
    std::string name;
    std::function<void(std::vector<std::string>&)> body;
};

#define EXPECT(cond, msg)                                                        \
    do {                                                                         \
        if (!(cond)) failures.push_back(msg);                                    \
    } while (0)

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

struct Scene {
    BiorthogonalSystem sys;
    HamiltonianTriple triple;
};

Scene make_scene(ScenarioKind kind, int dim, double beta = kLn2, std::uint64_t seed = 42,
                 double epsilon = 0.3) {
    ScenarioRecipe r;
    r.kind = kind;
    r.dim = dim;
    r.beta = beta;
    r.seed = seed;
    r.epsilon = epsilon;
    Scene s{build_system(r), {}};
    s.triple = build_triple(s.sys);
    return s;
}

double elapsed_ms(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

// ---------------------------------------------------------------------------

void criterion_partition(std::vector<std::string>& failures) {
    const auto start = std::chrono::steady_clock::now();

    Scene s_ln2 = make_scene(ScenarioKind::identity, 64, kLn2);
    PartitionReport p_ln2 = partition_report(s_ln2.sys, s_ln2.triple, kLn2);
    const double tol_geo = std::ldexp(4.0, -63);  // 2^-63 * 4 geometric tail
    EXPECT(std::abs(p_ln2.Z0_partial - 2.0) <= tol_geo,
           "Z0(beta=ln2, N=64) off by " + fmt(std::abs(p_ln2.Z0_partial - 2.0)));

    Scene s_1 = make_scene(ScenarioKind::identity, 64, 1.0);
    PartitionReport p_1 = partition_report(s_1.sys, s_1.triple, 1.0);
    const double closed = std::exp(1.0) / (std::exp(1.0) - 1.0);
    EXPECT(std::abs(p_1.Z0_partial - closed) <= 1e-12,
           "Z0(beta=1, N=64) off by " + fmt(std::abs(p_1.Z0_partial - closed)));

    const double ms = elapsed_ms(start);
    EXPECT(ms < 100.0, "runtime " + fmt(ms) + " ms exceeds 0.1 s");
}

void criterion_standard_kms(std::vector<std::string>& failures) {
    const auto start = std::chrono::steady_clock::now();
    Scene s = make_scene(ScenarioKind::identity, 16);
    Rng rng(derive_seed(1, "acceptance_kms0"));
    for (int i = 0; i < 20; ++i) {
        ComplexMatrix a = rng.unit_norm_matrix(16);
        ComplexMatrix b = rng.unit_norm_matrix(16);
        KmsReport r = kms_check(KmsIdentity::kms0, s.sys, s.triple, kLn2, a, b);
        EXPECT(r.residual <= 1e-10,
               "pair " + std::to_string(i) + " residual " + fmt(r.residual));
    }
    const double ms = elapsed_ms(start);
    EXPECT(ms < 1000.0, "runtime " + fmt(ms) + " ms exceeds 1 s");
}

void criterion_eq215_eq214(std::vector<std::string>& failures) {
    Scene s = make_scene(ScenarioKind::random_riesz, 16, kLn2, 42, 0.3);
    Rng rng(derive_seed(2, "acceptance_215"));
    for (int i = 0; i < 20; ++i) {
        ComplexMatrix a = rng.unit_norm_matrix(16);
        ComplexMatrix b = rng.unit_norm_matrix(16);
        KmsReport r = kms_check(KmsIdentity::kms_phiphi_215, s.sys, s.triple, kLn2, a, b);
        EXPECT(r.residual <= 1e-9,
               "eq215 pair " + std::to_string(i) + " residual " + fmt(r.residual));
    }

    // B a degree-3 polynomial in TT*: (214) holds
    const ComplexMatrix tts = s.sys.T * s.sys.T.adjoint();
    ComplexMatrix b_poly = 0.7 * identity_matrix(16) + 0.4 * tts - 0.3 * tts * tts +
                           0.1 * tts * tts * tts;
    b_poly /= operator_norm(b_poly);
    ComplexMatrix a = rng.unit_norm_matrix(16);
    KmsReport commuting = kms_check(KmsIdentity::kms_phiphi_214, s.sys, s.triple, kLn2, a,
                                    b_poly);
    EXPECT(commuting.residual <= 1e-9,
           "eq214 with commuting B: residual " + fmt(commuting.residual));

    // generic B with a sizable commutator: the violated hypothesis is detected
    const double tts_norm = operator_norm(tts);
    int tested = 0;
    for (int i = 0; i < 50 && tested < 5; ++i) {
        ComplexMatrix b = rng.unit_norm_matrix(16);
        const double ratio = operator_norm(commutator(b, tts)) / tts_norm;
        if (ratio <= 0.1) continue;
        ++tested;
        KmsReport r = kms_check(KmsIdentity::kms_phiphi_214, s.sys, s.triple, kLn2,
                                rng.unit_norm_matrix(16), b);
        EXPECT(r.residual > 1e-6,
               "eq214 violation not detected: residual " + fmt(r.residual) + " at ratio " +
                   fmt(ratio));
    }
    EXPECT(tested >= 1, "no generic B with commutator ratio > 0.1 sampled");
}

void criterion_eq217_eq36(std::vector<std::string>& failures) {
    Scene s = make_scene(ScenarioKind::random_riesz, 16, kLn2, 42, 0.3);
    GibbsFunctional wps = make_gibbs(Flavor::phipsi, s.sys, kLn2);
    const ComplexMatrix exp_hstar = exp_similar(s.triple.es_Hstar, Complex(-kLn2, 0.0));
    Rng rng(derive_seed(3, "acceptance_217"));
    for (int i = 0; i < 20; ++i) {
        ComplexMatrix a = rng.unit_norm_matrix(16);
        ComplexMatrix b = rng.unit_norm_matrix(16);
        KmsReport r217 = kms_check(KmsIdentity::kms_psipsi_217, s.sys, s.triple, kLn2, a, b);
        EXPECT(r217.residual <= 1e-9,
               "eq217 pair " + std::to_string(i) + " residual " + fmt(r217.residual));

        KmsReport r36 = kms_check(KmsIdentity::kms_phipsi_36, s.sys, s.triple, kLn2, a, b);
        EXPECT(r36.residual <= 1e-9,
               "eq36 pair " + std::to_string(i) + " residual " + fmt(r36.residual));
        Complex tr_route = trace(ComplexMatrix(exp_hstar * b * a)) / wps.Z;
        const double scale = 1.0 + std::abs(r36.lhs);
        EXPECT(std::abs(r36.lhs - tr_route) / scale <= 1e-9,
               "eq36 lhs vs trace route: " + fmt(std::abs(r36.lhs - tr_route) / scale));
        EXPECT(std::abs(r36.rhs - tr_route) / scale <= 1e-9,
               "eq36 rhs vs trace route: " + fmt(std::abs(r36.rhs - tr_route) / scale));
    }
}

void criterion_projector_example(std::vector<std::string>& failures) {
    const int n = 32;
    Scene s = make_scene(ScenarioKind::projector, n);
    GibbsFunctional wpp = make_gibbs(Flavor::phiphi, s.sys, kLn2);
    ComplexMatrix p0 = outer(basis_vector(n, 0), basis_vector(n, 0));

    Complex direct = evaluate(wpp, s.sys, p0);
    EXPECT(std::abs(direct - Complex(2.0 / 3.0, 0.0)) <= 1e-9,
           "direct omega_pp(P0) off by " + fmt(std::abs(direct - Complex(2.0 / 3.0, 0.0))));
    auto reports = example_formula_check(s.sys, kLn2, p0);
    EXPECT(std::abs(reports[0].rhs - Complex(2.0 / 3.0, 0.0)) <= 1e-9,
           "omega_0-formula route off by " +
               fmt(std::abs(reports[0].rhs - Complex(2.0 / 3.0, 0.0))));
    EXPECT(std::abs(wpp.Z - Complex(3.0, 0.0)) <= 1e-8,
           "Z_phiphi off by " + fmt(std::abs(wpp.Z - Complex(3.0, 0.0))));

    Rng rng(derive_seed(4, "acceptance_projector"));
    const double ts[] = {0.5, 1.0, -1.5, 2.0, 0.25, -0.75, 3.0, 1.25, -2.5, 0.8};
    for (int i = 0; i < 10; ++i) {
        ComplexMatrix x = rng.unit_norm_matrix(n);
        ComplexMatrix a0 = evolve(EvolutionKind::alpha0, s.triple, s.sys, ts[i], x);
        ComplexMatrix ap = evolve(EvolutionKind::alpha_phi, s.triple, s.sys, ts[i], x);
        EXPECT(operator_norm(a0 - ap) <= 1e-10,
               "alpha_phi != alpha0 on op " + std::to_string(i) + ": " +
                   fmt(operator_norm(a0 - ap)));
    }
}

void criterion_t_independence(std::vector<std::string>& failures) {
    const int n = 16;
    Rng rng(derive_seed(5, "acceptance_primed"));
    ComplexMatrix a = rng.unit_norm_matrix(n);
    ComplexMatrix x = rng.unit_norm_matrix(n);
    const Complex reference =
        trace(ComplexMatrix(a.adjoint() * a * x)) / trace(ComplexMatrix(a.adjoint() * a));

    std::vector<Complex> values;
    for (ScenarioKind kind :
         {ScenarioKind::identity, ScenarioKind::projector, ScenarioKind::random_riesz}) {
        Scene s = make_scene(kind, n);
        GibbsFunctional g = make_primed(Flavor::phipsi, s.sys, a);
        values.push_back(evaluate(g, s.sys, x));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        EXPECT(std::abs(values[i] - reference) <= 1e-9,
               "scenario " + std::to_string(i) + " deviates from tr(A*AX)/tr(A*A) by " +
                   fmt(std::abs(values[i] - reference)));
        for (std::size_t j = i + 1; j < values.size(); ++j)
            EXPECT(std::abs(values[i] - values[j]) <= 1e-9,
                   "scenarios " + std::to_string(i) + "," + std::to_string(j) +
                       " disagree by " + fmt(std::abs(values[i] - values[j])));
    }
}

void criterion_resolution(std::vector<std::string>& failures) {
    for (ScenarioKind kind : {ScenarioKind::identity, ScenarioKind::projector,
                              ScenarioKind::diagonal, ScenarioKind::random_riesz}) {
        Scene s = make_scene(kind, 32);
        ResolutionResiduals r = resolution_residuals(resolution_family(s.sys));
        const std::string tag = std::string(to_string(kind));
        EXPECT(std::max(r.idempotency, r.annihilation) <= 1e-10,
               tag + ": R_k R_j residual " + fmt(std::max(r.idempotency, r.annihilation)));
        EXPECT(r.completeness <= 1e-9, tag + ": sum R_k residual " + fmt(r.completeness));
    }
}

void criterion_group(std::vector<std::string>& failures) {
    const std::vector<double> ts{-2.0, -1.0, 0.5, 1.0, 3.0};
    std::vector<std::pair<double, double>> pairs;
    for (double t : ts)
        for (double u : ts) pairs.emplace_back(t, u);

    for (ScenarioKind kind : {ScenarioKind::identity, ScenarioKind::projector,
                              ScenarioKind::diagonal, ScenarioKind::random_riesz}) {
        Scene s = make_scene(kind, 16);
        const std::string tag = std::string(to_string(kind));
        const double law = group_law_residual(s.sys, s.triple, pairs);
        EXPECT(law <= 1e-10, tag + ": group law residual " + fmt(law));
        for (double t : ts) {
            GroupElement g = group_element(s.sys, s.triple, Complex(t, 0.0));
            EXPECT(g.norm <= g.norm_bound + 1e-9,
                   tag + ": ||V(t)|| exceeds bound by " + fmt(g.norm - g.norm_bound));
        }
        const double uni = similar_to_unitary_check(s.sys, s.triple, ts);
        EXPECT(uni <= 1e-11, tag + ": similar-to-unitary residual " + fmt(uni));
    }
}

void criterion_generator(std::vector<std::string>& failures) {
    Scene s = make_scene(ScenarioKind::random_riesz, 16);
    Rng rng(derive_seed(6, "acceptance_generator"));
    const std::vector<double> hs{1e-2, 5e-3, 2.5e-3};
    for (EvolutionKind kind :
         {EvolutionKind::alpha0, EvolutionKind::alpha_phi, EvolutionKind::alpha_psi}) {
        for (int i = 0; i < 5; ++i) {
            ComplexMatrix x = rng.unit_norm_matrix(16);
            GeneratorCheck g = generator_fd_check(kind, s.triple, s.sys, x, hs);
            const std::string tag = std::string(to_string(kind)) + " op " + std::to_string(i);
            EXPECT(g.fitted_order.has_value(), tag + ": no order fit");
            if (g.fitted_order)
                EXPECT(*g.fitted_order >= 1.7 && *g.fitted_order <= 2.3,
                       tag + ": fd order " + fmt(*g.fitted_order));
            EXPECT(g.limit_error <= 1e-6, tag + ": limit error " + fmt(g.limit_error));
        }
    }
}

void criterion_growth(std::vector<std::string>& failures) {
    // high-N long-double oracle for the psi-limit pi^2/6 - ln^2 2
    long double oracle = 0.0L;
    const long double beta = std::log(2.0L);
    for (int n = 0; n < 10000; ++n)
        oracle += std::exp(-beta * n) / ((1.0L + n) * (1.0L + n));
    const double analytic = M_PI * M_PI / 6.0 - std::log(2.0) * std::log(2.0);
    EXPECT(std::abs(static_cast<double>(oracle) - analytic) <= 1e-12,
           "oracle vs analytic psi-limit: " +
               fmt(std::abs(static_cast<double>(oracle) - analytic)));

    ScenarioRecipe recipe;
    recipe.kind = ScenarioKind::diagonal;
    recipe.dim = 8;
    recipe.beta = kLn2;
    GrowthSweep sweep = riesz_growth_sweep(recipe, {8, 16, 32, 64});
    double prev = 0.0;
    for (const GrowthRow& row : sweep.rows) {
        EXPECT(std::abs(row.norm_T - double(row.dim)) <= 1e-10,
               "||T_N|| != N at N=" + std::to_string(row.dim) + ": " +
                   fmt(std::abs(row.norm_T - double(row.dim))));
        EXPECT(row.Z_phiphi > prev, "Z_phiphi not monotone at N=" + std::to_string(row.dim));
        prev = row.Z_phiphi;
    }
    EXPECT(std::abs(sweep.rows.back().Z_phiphi - 12.0) <= 1e-9,
           "Z_phiphi(64) off by " + fmt(std::abs(sweep.rows.back().Z_phiphi - 12.0)));
    EXPECT(std::abs(sweep.rows.back().Z_psipsi - analytic) <= 1e-9,
           "Z_psipsi(64) off by " + fmt(std::abs(sweep.rows.back().Z_psipsi - analytic)));
    EXPECT(sweep.growth_flag, "growth flag not raised for the non-Riesz family");
}

std::string g_cli_path;

void criterion_determinism(std::vector<std::string>& failures) {
    RunConfig cfg;
    cfg.recipe.kind = ScenarioKind::random_riesz;
    cfg.recipe.dim = 16;
    cfg.recipe.beta = kLn2;
    cfg.recipe.seed = 42;
    std::string first = report_to_json_string(run(cfg));
    std::string second = report_to_json_string(run(cfg));
    EXPECT(first == second, "in-process reports differ byte-wise");

    if (!g_cli_path.empty()) {
        const std::string base = "acceptance_det";
        const std::string cmd_tail =
            " run --scenario random-riesz --dim 16 --seed 42 --epsilon 0.3";
        int rc1 = std::system(
            (g_cli_path + cmd_tail + " --out " + base + "1.json 2>/dev/null").c_str());
        int rc2 = std::system(
            (g_cli_path + cmd_tail + " --out " + base + "2.json 2>/dev/null").c_str());
        EXPECT(rc1 != -1 && rc2 != -1, "could not launch the CLI");
        std::ifstream f1(base + "1.json", std::ios::binary);
        std::ifstream f2(base + "2.json", std::ios::binary);
        std::stringstream s1, s2;
        s1 << f1.rdbuf();
        s2 << f2.rdbuf();
        EXPECT(f1 && f2 && !s1.str().empty(), "CLI reports missing");
        EXPECT(s1.str() == s2.str(), "CLI reports differ byte-wise");
        std::remove((base + "1.json").c_str());
        std::remove((base + "2.json").c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli_path = argv[1];

    const std::vector<Criterion> criteria = {
        {"partition closed form (Z0 at beta=ln2 and beta=1, N=64)", criterion_partition},
        {"standard KMS condition on the identity scenario", criterion_standard_kms},
        {"eq215 + eq214 commuting/violated hypotheses", criterion_eq215_eq214},
        {"eq217 + eq36 with the trace route", criterion_eq217_eq36},
        {"bosonic projector example (omega_pp(P0)=2/3, Z=3, commuting dynamics)",
         criterion_projector_example},
        {"T-independence of the primed mixed functional", criterion_t_independence},
        {"resolution of identity at N=32", criterion_resolution},
        {"one-parameter group structure", criterion_group},
        {"generator central-difference order and limit", criterion_generator},
        {"non-Riesz growth and partition limits", criterion_growth},
        {"byte-identical reports under a fixed seed", criterion_determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::vector<std::string> failures;
        try {
            criteria[i].body(failures);
        } catch (const std::exception& e) {
            failures.push_back(std::string("exception: ") + e.what());
        }
        if (failures.empty()) {
            std::printf("[PASS] criterion %zu: %s\n", i + 1, criteria[i].name.c_str());
        } else {
            ++failed;
            std::printf("[FAIL] criterion %zu: %s\n", i + 1, criteria[i].name.c_str());
            for (const std::string& f : failures) std::printf("       - %s\n", f.c_str());
        }
    }
    std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - failed,
                criteria.size());
    return failed == 0 ? 0 : 1;
}
