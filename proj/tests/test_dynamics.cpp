#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace bgs;
using namespace bgs_test;

namespace {
const double kLn2 = std::log(2.0);

struct Scene {
    BiorthogonalSystem sys;
    HamiltonianTriple triple;
};

Scene make_scene(const ScenarioRecipe& r) {
    Scene s{build_system(r), {}};
    s.triple = build_triple(s.sys);
    return s;
}

const std::vector<EvolutionKind> kKinds{EvolutionKind::alpha0, EvolutionKind::alpha_phi,
                                        EvolutionKind::alpha_psi};
}  // namespace

TEST_CASE("evolve: t = 0 is the identity map", "[dynamics]") {
    Scene s = make_scene(riesz_recipe(8));
    Rng rng(3);
    ComplexMatrix x = rng.unit_norm_matrix(8);
    for (EvolutionKind k : kKinds)
        CHECK(operator_norm(evolve(k, s.triple, s.sys, Complex(0, 0), x) - x) <= 1e-13);
}

TEST_CASE("evolve: phase factor on a rank-one off-diagonal operator", "[dynamics]") {
    Scene s = make_scene(identity_recipe(2));
    ComplexMatrix x = outer(basis_vector(2, 0), basis_vector(2, 1));
    const double t = 0.83;
    ComplexMatrix ev = evolve(EvolutionKind::alpha0, s.triple, s.sys, t, x);
    CHECK(max_abs_diff(ev, ComplexMatrix(std::exp(Complex(0.0, -t)) * x)) <= 1e-15);
}

TEST_CASE("evolve: commuting projector makes alpha_phi equal alpha0", "[dynamics]") {
    Scene s = make_scene(projector_recipe(8, 0));
    Rng rng(5);
    for (int i = 0; i < 5; ++i) {
        ComplexMatrix x = rng.unit_norm_matrix(8);
        ComplexMatrix a0 = evolve(EvolutionKind::alpha0, s.triple, s.sys, 1.7, x);
        ComplexMatrix ap = evolve(EvolutionKind::alpha_phi, s.triple, s.sys, 1.7, x);
        CHECK(operator_norm(a0 - ap) <= 1e-12);
    }
}

TEST_CASE("group element: V(0) = 1 and norm bounds", "[dynamics]") {
    Scene id = make_scene(identity_recipe(6));
    GroupElement g0 = group_element(id.sys, id.triple, Complex(0, 0));
    CHECK(operator_norm(g0.V - identity_matrix(6)) <= 1e-13);

    for (double t : {-1.5, 0.4, 2.0}) {
        GroupElement gid = group_element(id.sys, id.triple, Complex(t, 0));
        CHECK(gid.norm == Catch::Approx(1.0).margin(1e-12));  // unitary group

        Scene proj = make_scene(projector_recipe(6, 0));
        GroupElement gp = group_element(proj.sys, proj.triple, Complex(t, 0));
        CHECK(gp.norm <= std::sqrt(2.0) + 1e-12);
        CHECK(gp.norm_bound == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
    }
}

TEST_CASE("group law", "[dynamics]") {
    const std::vector<std::pair<double, double>> pairs{{1, 2}, {0.5, -0.5}, {3, -1}};
    Scene id = make_scene(identity_recipe(8));
    CHECK(group_law_residual(id.sys, id.triple, pairs) <= 1e-13);

    Scene rr = make_scene(riesz_recipe(16));
    CHECK(group_law_residual(rr.sys, rr.triple, pairs) <= 1e-11);

    // Injected fault: a perturbed group element breaks the law at the 0.01 scale.
    ComplexMatrix v1 = exp_similar(rr.triple.es_H, Complex(0.0, 1.0));
    ComplexMatrix v2 = exp_similar(rr.triple.es_H, Complex(0.0, 2.0));
    ComplexMatrix v3 = exp_similar(rr.triple.es_H, Complex(0.0, 3.0));
    Rng rng(77);
    ComplexMatrix faulty = v1 + 0.01 * rng.unit_norm_matrix(16);
    const double res = operator_norm(v3 - faulty * v2) / (1.0 + operator_norm(v3));
    CHECK(res > 1e-3);
}

TEST_CASE("similar-to-unitary check", "[dynamics]") {
    const std::vector<double> ts{-2.0, -0.5, 0.0, 1.0, 3.0};
    for (const ScenarioRecipe& r :
         {identity_recipe(8), projector_recipe(8, 0), diagonal_recipe(8), riesz_recipe(8)}) {
        Scene s = make_scene(r);
        INFO("scenario " << to_string(r.kind));
        CHECK(similar_to_unitary_check(s.sys, s.triple, ts) <= 1e-12);
    }
}

TEST_CASE("generator check: fixed points and exact phases", "[dynamics]") {
    const std::vector<double> hs{1e-2, 5e-3, 2.5e-3};
    SECTION("X commuting with the generator is a fixed point") {
        Scene s = make_scene(identity_recipe(6));
        ComplexMatrix x = s.triple.H0;  // commutes with itself
        GeneratorCheck g = generator_fd_check(EvolutionKind::alpha0, s.triple, s.sys, x, hs);
        for (double e : g.errors) CHECK(e <= 1e-12);
        CHECK_FALSE(g.fitted_order.has_value());
    }
    SECTION("closed-form phase case: derivative -iX") {
        Scene s = make_scene(identity_recipe(2));
        ComplexMatrix x = outer(basis_vector(2, 0), basis_vector(2, 1));
        GeneratorCheck g = generator_fd_check(EvolutionKind::alpha0, s.triple, s.sys, x, hs);
        // error of the central difference of e^{-ith} is |sin(h)/h - 1| ~ h^2/6
        for (std::size_t i = 0; i < hs.size(); ++i)
            CHECK(g.errors[i] == Catch::Approx(hs[i] * hs[i] / 6.0).epsilon(0.01));
        REQUIRE(g.fitted_order.has_value());
        CHECK(*g.fitted_order == Catch::Approx(2.0).margin(0.05));
    }
    SECTION("random operators: second order, extrapolated limit hits the commutator") {
        Scene s = make_scene(riesz_recipe(16));
        Rng rng(9);
        for (EvolutionKind k : kKinds) {
            ComplexMatrix x = rng.unit_norm_matrix(16);
            GeneratorCheck g = generator_fd_check(k, s.triple, s.sys, x, hs);
            REQUIRE(g.fitted_order.has_value());
            CHECK(*g.fitted_order >= 1.7);
            CHECK(*g.fitted_order <= 2.3);
            CHECK(g.limit_error <= 1e-6);
        }
    }
}

TEST_CASE("rank-one evolution", "[dynamics]") {
    SECTION("T = 1: deformed evolution equals the standard one") {
        Scene s = make_scene(identity_recipe(6));
        Rng rng(13);
        RankOneEvolution r = rank_one_evolution(s.sys, s.triple, rng.unit_vector(6),
                                                rng.unit_vector(6), 1.3);
        CHECK((r.Phi_phit - r.Phi_0t).norm() <= 1e-13);
        CHECK((r.Psi_psit - r.Psi_0t).norm() <= 1e-13);
        CHECK(r.alpha0_residual <= 1e-13);
        CHECK(r.alpha_phi_residual <= 1e-13);
    }
    SECTION("commuting projector: alpha_phi(Y) = alpha0(Y)") {
        Scene s = make_scene(projector_recipe(6, 0));
        Rng rng(17);
        ComplexVector phi_vec = rng.unit_vector(6);
        ComplexVector psi_vec = rng.unit_vector(6);
        ComplexMatrix y = outer(phi_vec, psi_vec);
        ComplexMatrix a0 = evolve(EvolutionKind::alpha0, s.triple, s.sys, 0.9, y);
        ComplexMatrix ap = evolve(EvolutionKind::alpha_phi, s.triple, s.sys, 0.9, y);
        CHECK(operator_norm(a0 - ap) <= 1e-12);
    }
    SECTION("generic scenario: the two dynamics differ, factorization still exact") {
        Scene s = make_scene(riesz_recipe(12));
        Rng rng(19);
        ComplexVector phi_vec = rng.unit_vector(12);
        ComplexVector psi_vec = rng.unit_vector(12);
        RankOneEvolution r = rank_one_evolution(s.sys, s.triple, phi_vec, psi_vec, 1.0);
        CHECK(r.alpha_phi_residual <= 1e-12);
        CHECK(r.simplify_phi_residual <= 1e-12);
        CHECK(r.simplify_psi_residual <= 1e-12);
        ComplexMatrix y = outer(phi_vec, psi_vec);
        ComplexMatrix a0 = evolve(EvolutionKind::alpha0, s.triple, s.sys, 1.0, y);
        ComplexMatrix ap = evolve(EvolutionKind::alpha_phi, s.triple, s.sys, 1.0, y);
        CHECK(operator_norm(a0 - ap) > 1e-3);
    }
    SECTION("non-unit vectors are rejected") {
        Scene s = make_scene(identity_recipe(4));
        ComplexVector v = 2.0 * basis_vector(4, 0);
        CHECK_THROWS_AS(rank_one_evolution(s.sys, s.triple, v, basis_vector(4, 1), 1.0),
                        Error);
    }
}

TEST_CASE("imaginary time evolution", "[dynamics]") {
    SECTION("X = 1 is fixed") {
        Scene s = make_scene(riesz_recipe(8));
        for (EvolutionKind k : kKinds)
            CHECK(operator_norm(imaginary_time(k, s.triple, s.sys, kLn2,
                                               identity_matrix(8)) -
                                identity_matrix(8)) <= 1e-12);
    }
    SECTION("diagonal conjugation doubles the off-diagonal at beta = ln 2") {
        Scene s = make_scene(identity_recipe(2));
        ComplexMatrix x = outer(basis_vector(2, 0), basis_vector(2, 1));
        ComplexMatrix ev = imaginary_time(EvolutionKind::alpha0, s.triple, s.sys, kLn2, x);
        CHECK(max_abs_diff(ev, ComplexMatrix(2.0 * x)) <= 1e-14);
    }
    SECTION("e^{-beta H} is a fixed point of alpha_phi^{i beta}") {
        Scene s = make_scene(riesz_recipe(8));
        ComplexMatrix eh = exp_similar(s.triple.es_H, Complex(-kLn2, 0.0));
        ComplexMatrix ev = imaginary_time(EvolutionKind::alpha_phi, s.triple, s.sys, kLn2, eh);
        CHECK(operator_norm(ev - eh) <= 1e-11);
    }
    SECTION("agrees with the exponential sandwich at moderate truncation") {
        Scene s = make_scene(riesz_recipe(8));
        Rng rng(23);
        ComplexMatrix x = rng.unit_norm_matrix(8);
        ComplexMatrix lhs = imaginary_time(EvolutionKind::alpha_phi, s.triple, s.sys, kLn2, x);
        ComplexMatrix rhs = exp_similar(s.triple.es_H, Complex(-kLn2, 0.0)) * x *
                            exp_similar(s.triple.es_H, Complex(kLn2, 0.0));
        CHECK(operator_norm(lhs - rhs) <= 1e-10 * operator_norm(rhs));
    }
    SECTION("overflow guard") {
        ScenarioRecipe r = identity_recipe(4);
        RealVector l(4);
        l << 0.0, 1.0, 2.0, 2000.0;
        r.lambdas = l;
        Scene s = make_scene(r);
        CHECK_THROWS_AS(imaginary_time(EvolutionKind::alpha0, s.triple, s.sys, 1.0,
                                       identity_matrix(4)),
                        OverflowError);
    }
}

TEST_CASE("dynamics algebra invariants", "[dynamics]") {
    for (const ScenarioRecipe& r :
         {identity_recipe(10), projector_recipe(10, 2), diagonal_recipe(10),
          riesz_recipe(10)}) {
        Scene s = make_scene(r);
        Rng rng(29);
        const Complex t(0.8, 0.0), u(1.9, 0.0);
        INFO("scenario " << to_string(r.kind));
        for (EvolutionKind k : kKinds) {
            ComplexMatrix x = rng.unit_norm_matrix(10);
            ComplexMatrix y = rng.unit_norm_matrix(10);
            // unital
            CHECK(operator_norm(evolve(k, s.triple, s.sys, t, identity_matrix(10)) -
                                identity_matrix(10)) <= 1e-12);
            // multiplicative
            CHECK(operator_norm(evolve(k, s.triple, s.sys, t, x * y) -
                                evolve(k, s.triple, s.sys, t, x) *
                                    evolve(k, s.triple, s.sys, t, y)) <= 1e-11);
            // cocycle
            CHECK(operator_norm(evolve(k, s.triple, s.sys, t + u, x) -
                                evolve(k, s.triple, s.sys, t,
                                       evolve(k, s.triple, s.sys, u, x))) <= 1e-11);
            // inverse
            CHECK(operator_norm(evolve(k, s.triple, s.sys, -t,
                                       evolve(k, s.triple, s.sys, t, x)) -
                                x) <= 1e-11);
        }
        // alpha0 is isometric for real t
        ComplexMatrix x = rng.unit_norm_matrix(10);
        CHECK(std::abs(operator_norm(evolve(EvolutionKind::alpha0, s.triple, s.sys, t, x)) -
                       operator_norm(x)) <= 1e-11);
        // definition consistency: alpha_phi^t(X) T = T alpha0^t(T^{-1} X T)
        ComplexMatrix lhs = evolve(EvolutionKind::alpha_phi, s.triple, s.sys, t, x) * s.sys.T;
        ComplexMatrix rhs = s.sys.T * evolve(EvolutionKind::alpha0, s.triple, s.sys, t,
                                             ComplexMatrix(s.sys.T_inv * x * s.sys.T));
        CHECK(operator_norm(lhs - rhs) <= 1e-12 * (1.0 + operator_norm(x)));
    }
}

TEST_CASE("norm bound on V(t) holds across scenarios", "[dynamics]") {
    for (const ScenarioRecipe& r :
         {identity_recipe(12), projector_recipe(12, 0), diagonal_recipe(12),
          riesz_recipe(12)}) {
        Scene s = make_scene(r);
        INFO("scenario " << to_string(r.kind));
        for (double t : {-2.0, -1.0, 0.5, 1.0, 3.0}) {
            GroupElement g = group_element(s.sys, s.triple, Complex(t, 0.0));
            CHECK(g.norm <= g.norm_bound + 1e-9);
        }
    }
}
