#include <doctest.h>

#include <random>

#include "crossed/crossed_system.hpp"
#include "crossed/examples.hpp"
#include "test_util.hpp"

using namespace crossed;
using testutil::mat;
using testutil::vec;

namespace {

QField qq;

/* A plain flip system: V an arbitrary 2-dim space over A = Q[Z/2], with
 * chi(v (x) a) = a (x) v, the trivial cocycle through V's group product, and
 * preunit 1 (x) u0. Used to exercise single checks in isolation. */
CrossedSystemSpec<QField> flip_system() {
    auto a = cyclic_group_algebra(qq, 2);
    return group_action_system(qq, a, SparseMat<QField>::identity(qq, 2), 2,
                               SparseMat<QField>::from_columns(qq, 2, {vec(qq, {1, 0})}));
}

SparseMat<QField> random_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> entry(-3, 3);
    SparseMat<QField> m(qq, rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m.add_at(i, j, mpq_class(entry(rng)));
    return m;
}

} // namespace

TEST_CASE("twisted space identity accepts the flip and the projector twist") {
    CHECK(check_twisted_space(flip_system()).ok);
    CHECK(check_twisted_space(example(qq, "W1")).ok);
    CHECK(check_twisted_space(example(qq, "T1")).ok);
}

TEST_CASE("twisted space identity rejects a hand-made defect with a witness") {
    auto s = flip_system();
    /* redirect u1 (x) x-like entry: chi(u1 (x) g1) picks up a spurious term */
    s.chi.mat.add_at(0, 1 * 2 + 1, mpq_class(1));
    auto r = check_twisted_space(s);
    CHECK_FALSE(r.ok);
    CHECK(r.witness.find("twisted-space identity fails at (") != std::string::npos);
}

TEST_CASE("twisted space identity rejects random twists") {
    std::mt19937_64 rng(20240817);
    int rejected = 0;
    for (int trial = 0; trial < 8; ++trial) {
        auto s = flip_system();
        s.chi.mat = random_matrix(4, 4, rng);
        auto r = check_twisted_space(s);
        if (!r.ok) {
            ++rejected;
            CHECK(r.witness.find("(") != std::string::npos);
        }
    }
    CHECK(rejected >= 7); // a random bilinear map is essentially never a twist
}

TEST_CASE("preunit identities hold on the catalog and fail for a zero preunit") {
    CHECK(check_preunit(example(qq, "T1")).ok);
    CHECK(check_preunit(example(qq, "W1")).ok);

    auto s = example(qq, "T1");
    s.preunit = vec_zero<QField>(qq, 4);
    auto r = check_preunit(s);
    CHECK_FALSE(r.ok);
    CHECK(r.witness.find("preunit identity 2") != std::string::npos);
}

TEST_CASE("cocycle conditions hold for the trivial cocycle and fail when perturbed") {
    CHECK(check_cocycle_conditions(example(qq, "T1")).ok);
    CHECK(check_cocycle_conditions(example(qq, "W1")).ok);

    std::mt19937_64 rng(7);
    int rejected = 0;
    for (int trial = 0; trial < 6; ++trial) {
        auto s = example(qq, "T1");
        std::uniform_int_distribution<int> pick(0, s.cocycle.mat.rows - 1);
        std::uniform_int_distribution<int> pickc(0, s.cocycle.mat.cols - 1);
        s.cocycle.mat.add_at(pick(rng), pickc(rng), mpq_class(1));
        if (!validate_crossed_system(s).ok()) ++rejected;
    }
    CHECK(rejected == 6);
}

TEST_CASE("crossed product of the sign action: full rank projector") {
    auto cp = build_crossed_product(example(qq, "T1"));
    CHECK(cp.nabla.mat == SparseMat<QField>::identity(qq, 4));
    CHECK(cp.E.space.dim == 4);

    /* (x (x) g)^2 = x sigma(x) (x) g^2 = -x^2 (x) 1 = 0 */
    auto xg = cp.p.apply(vec_unit<QField>(qq, 4, 1 * 2 + 1));
    CHECK(vec_is_zero<QField>(qq, cp.E.multiply(xg, xg)));

    /* unit is 1_A (x) u0 */
    CHECK(cp.iota.apply(cp.unit_E()) == vec(qq, {1, 0, 0, 0}));
}

TEST_CASE("crossed product of the projector twist: rank one") {
    auto cp = build_crossed_product(example(qq, "W1"));
    CHECK(cp.E.space.dim == 1);
    CHECK(cp.iota.apply(cp.unit_E()) == vec(qq, {1, 0})); // e0 (x) v

    /* j(a) = a e0 (x) v */
    CHECK(cp.iota.apply(cp.j_nu.apply(vec(qq, {1, 0}))) == vec(qq, {1, 0}));
    CHECK(vec_is_zero<QField>(qq, cp.j_nu.apply(vec(qq, {0, 1}))));
    CHECK(cp.complement.cols == 1);
}

TEST_CASE("crossed product over the ground field is the group algebra") {
    auto cp = build_crossed_product(example(qq, "G1"));
    CHECK(cp.E.space.dim == 3);
    auto z3 = cyclic_group_algebra(qq, 3);
    CHECK(cp.E.mult.mat == z3.mult.mat);
    CHECK(cp.iota.apply(cp.unit_E()) == vec(qq, {1, 0, 0}));
}

TEST_CASE("construction rejects an invalid system with the axiom witness") {
    auto s = example(qq, "T1");
    s.preunit = vec_zero<QField>(qq, 4);
    CHECK_THROWS_WITH_AS(build_crossed_product(s),
                         doctest::Contains("preunit identity 2"), std::domain_error);
}

TEST_CASE("iterated twist: degenerate exponents give identities") {
    auto s = example(qq, "T1");
    CHECK(iterate_chi(s, 0, 1).mat == SparseMat<QField>::identity(qq, 2));
    CHECK(iterate_chi(s, 0, 3).mat == SparseMat<QField>::identity(qq, 8));
    CHECK(iterate_chi(s, 2, 0).mat == SparseMat<QField>::identity(qq, 4));
}

TEST_CASE("iterated twist on the projector example") {
    auto s = example(qq, "W1");
    /* v (x) a (x) b -> a e0 (x) b e0 (x) v: only (e0, e0) survives */
    auto m = iterate_chi(s, 1, 2).mat;
    CHECK(m.rows == 4);
    CHECK(m.cols == 4);
    CHECK(m.column(0) == vec(qq, {1, 0, 0, 0}));
    for (int j = 1; j < 4; ++j) CHECK(vec_is_zero<QField>(qq, m.column(j)));
}

TEST_CASE("iterated twist of a flip is the block rotation") {
    auto s = flip_system();
    auto m = iterate_chi(s, 2, 1).mat; // V (x) V (x) A -> A (x) V (x) V
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                int from = (i * 2 + j) * 2 + k;
                int to = (k * 2 + i) * 2 + j;
                CHECK(m.at(to, from) == mpq_class(1));
            }
    CHECK(static_cast<int>(m.nnz()) == 8);
}

TEST_CASE("stability: scalars and the full algebra are stable, the diagonal is not") {
    auto t1 = example(qq, "T1");
    CHECK(check_stable(t1, t1.K).ok);
    auto full = make_subalgebra(t1.A, SparseMat<QField>::identity(qq, 2));
    CHECK(check_stable(t1, full).ok);

    auto w1 = example(qq, "W1");
    CHECK(check_stable(w1, w1.K).ok);
    auto diag = make_subalgebra(w1.A, SparseMat<QField>::from_columns(qq, 2, {vec(qq, {1, 1})}));
    auto r = check_stable(w1, diag);
    CHECK_FALSE(r.ok);
    CHECK(r.witness == "stability fails at (v, k0)");
}

TEST_CASE("induced twist on the reduced relative square") {
    auto s1 = example(qq, "S1");
    auto ind = induce_twist(s1, s1.K, 1, 1, true);
    REQUIRE(ind.domain.quotient.dim == 2);  // V (x) A-bar
    REQUIRE(ind.codomain.quotient.dim == 2);
    /* A-bar has basis the class of e1; the swap sends it to the class of e0 = -e1 */
    CHECK(ind.map.mat.at(0, 0) == mpq_class(1));
    CHECK(ind.map.mat.at(1, 1) == mpq_class(-1));
    CHECK(static_cast<int>(ind.map.mat.nnz()) == 2);

    /* full-subalgebra quotients collapse */
    auto w1 = example(qq, "W1");
    auto flat = induce_twist(w1, w1.K, 1, 2, true);
    CHECK(flat.domain.quotient.dim == 0);
    CHECK(flat.codomain.quotient.dim == 0);
}

TEST_CASE("canonical identities on the image: projector columns are acted basis classes") {
    for (const auto& name : example_names()) {
        CAPTURE(name);
        auto cp = build_crossed_product(example(qq, name));
        const auto& s = cp.system;
        int dA = s.A.space.dim, dV = s.V.dim;
        /* nabla(a (x) v) = a . gamma(v) for every basis pair */
        for (int i = 0; i < dA; ++i)
            for (int j = 0; j < dV; ++j) {
                auto lhs = cp.nabla.mat.column(i * dV + j);
                auto gv = cp.gamma.apply(vec_unit<QField>(qq, dV, j));
                auto rhs = cp.iota.apply(
                    cp.left_action.apply(vec_kron<QField>(qq, vec_unit<QField>(qq, dA, i), gv)));
                CHECK(lhs == rhs);
            }
    }
}

TEST_CASE("membership chains for subalgebras and the image") {
    for (const auto& name : example_names()) {
        CAPTURE(name);
        auto cp = build_crossed_product(example(qq, name));
        const auto& s = cp.system;
        auto idV = SparseMat<QField>::identity(qq, s.V.dim);

        struct Candidate {
            SubalgebraEmbedding<QField> r;
            bool stable;
        };
        std::vector<Candidate> rs;
        rs.push_back({s.K, check_stable(s, s.K).ok});
        rs.push_back({make_subalgebra(s.A, SparseMat<QField>::identity(qq, s.A.space.dim)), true});

        for (const auto& cand : rs) {
            auto rv_span = SparseMat<QField>::kron(cand.r.basis, idV);
            auto inter = intersect_columns(rv_span, cp.iota.mat);
            auto j_r = image_basis(cp.j_nu.mat * cand.r.basis);
            auto jr_gv = cp.iota.mat * product_span(cp.E, j_r, cp.gamma.mat);

            /* intersection is contained in j(R) gamma(V) for every subalgebra */
            CHECK(subspace_leq(inter, jr_gv));

            /* with gamma(V) inside R (x) V the two spans agree */
            bool gamma_in = subspace_leq(cp.nabla.mat * (cp.iota.mat * cp.gamma.mat), rv_span);
            if (gamma_in) CHECK(subspace_leq(jr_gv, inter));

            if (cand.stable) {
                auto gv_jr = cp.iota.mat * product_span(cp.E, cp.gamma.mat, j_r);
                CHECK(subspace_leq(gv_jr, inter));
                CHECK(subspace_leq(jr_gv, inter));
                CHECK(subspace_leq(inter, jr_gv));
            }

            /* cocycle image inside R (x) V forces gamma-square containments */
            if (subspace_leq(s.cocycle.mat, rv_span)) {
                auto gg = cp.iota.mat * product_span(cp.E, cp.gamma.mat, cp.gamma.mat);
                CHECK(subspace_leq(gg, inter));
                CHECK(subspace_leq(inter, jr_gv));
            }
        }
    }
}

TEST_CASE("catalog entries validate, build, and have the advertised dimensions") {
    for (const auto& name : example_names()) {
        CAPTURE(name);
        auto entry = catalog_entry(qq, name);
        auto report = validate_crossed_system(entry.spec);
        CHECK(report.ok());

        auto cp = build_crossed_product(entry.spec);
        CHECK(cp.E.space.dim == entry.dim_E);
        CHECK(base_quotient(entry.spec).quotient.dim == entry.dim_A_bar);
        CHECK(product_mod_base(cp).quotient.dim == entry.dim_E_tilde);
        CHECK(product_mod_base_subalgebra(cp).quotient.dim ==
              entry.dim_E - image_basis(cp.j_nu.mat * entry.spec.K.basis).cols);

        /* standing hypotheses of the resolution: K stable, unit supported in K (x) V */
        CHECK(check_stable(entry.spec, entry.spec.K).ok);
        Solver<QField> kv(SparseMat<QField>::kron(entry.spec.K.basis,
                                                  SparseMat<QField>::identity(qq, entry.spec.V.dim)));
        CHECK(kv.contains(cp.iota.apply(cp.unit_E())));

        /* auxiliary comultiplication data is coherent */
        REQUIRE(entry.spec.sweedler.has_value());
        CHECK(check_sweedler(entry.spec).ok);
    }
}

TEST_CASE("tampered comultiplication data is rejected") {
    auto s = example(qq, "T1");
    s.sweedler->rho.mat.add_at(1, 0, mpq_class(1));
    auto r = check_sweedler(s);
    CHECK_FALSE(r.ok);
    CHECK(r.witness.find("twist is not expressed") != std::string::npos);
}

TEST_CASE("catalog builds over a prime field as well") {
    PField f5(5);
    for (const auto& name : example_names()) {
        CAPTURE(name);
        auto s = example(f5, name);
        CHECK(validate_crossed_system(s).ok());
        auto cp = build_crossed_product(s);
        CHECK(cp.E.space.dim == catalog_entry(qq, name).dim_E);
    }
}

TEST_CASE("seeded perturbations of every defining map are rejected") {
    std::mt19937_64 rng(424242);
    for (const auto& name : example_names()) {
        CAPTURE(name);
        for (int what = 0; what < 3; ++what) {
            int rejected = 0;
            for (int trial = 0; trial < 4; ++trial) {
                auto s = example(qq, name);
                auto& target = what == 0 ? s.chi.mat : what == 1 ? s.cocycle.mat : s.chi.mat;
                if (what == 2) {
                    std::uniform_int_distribution<int> pick(0, static_cast<int>(s.preunit.size()) - 1);
                    s.preunit[static_cast<std::size_t>(pick(rng))] += 1;
                } else {
                    std::uniform_int_distribution<int> pickr(0, target.rows - 1);
                    std::uniform_int_distribution<int> pickc(0, target.cols - 1);
                    target.add_at(pickr(rng), pickc(rng), mpq_class(1));
                }
                if (!validate_crossed_system(s).ok()) ++rejected;
            }
            CHECK(rejected >= 3);
        }
    }
}
