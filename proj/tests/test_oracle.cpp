#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "crossed/examples.hpp"
#include "crossed/oracle.hpp"
#include "test_util.hpp"

using namespace crossed;
using testutil::vec;

namespace {

QField qq;

SparseMat<QField> unit_span(const Algebra<QField>& e) {
    SparseMat<QField> s(qq, e.space.dim, 1);
    s.set_column(0, e.unit_vec());
    return s;
}

CrossedProductAlgebra<QField> product(const std::string& name) {
    return build_crossed_product(example(qq, name));
}

} // namespace

TEST_CASE("bar resolution has the expected reduced-word dimensions") {
    auto cp = product("T1");
    auto base = base_image_in_product(cp);
    auto R = bar_resolution(cp.E, base, 2);

    CHECK(R.reduced.quotient.dim == 3);
    CHECK(R.space(0).quotient.dim == 16);  // 4 * 4, no interior slots
    CHECK(R.space(1).quotient.dim == 48);  // 4 * 3 * 4
    CHECK(R.space(2).quotient.dim == 144); // 4 * 3 * 3 * 4

    /* the augmentation splits off the algebra */
    CHECK(R.differential(0).mat * R.contraction(0).mat == SparseMat<QField>::identity(qq, 4));

    /* contraction in degree one appends the unit with a sign flip */
    auto in = vec_unit<QField>(qq, 16, 6); // class of e1 (x) e2, no relations in degree zero
    auto expected = vec_scale<QField>(qq, qq.neg(qq.one()),
                                      R.space(1).projection.apply(vec_unit<QField>(qq, 64, 24)));
    CHECK(R.contraction(1).apply(in) == expected);

    CHECK_THROWS_AS(R.space(5), std::out_of_range);
    CHECK_THROWS_AS(R.differential(5), std::out_of_range);
    CHECK_THROWS_AS(R.contraction(-1), std::out_of_range);
}

TEST_CASE("bar resolution over a prime field keeps the same dimensions") {
    PField f5(5);
    auto cp = build_crossed_product(example(f5, "T1"));
    auto base = base_image_in_product(cp);
    auto R = bar_resolution(cp.E, base, 1);
    CHECK(R.space(0).quotient.dim == 16);
    CHECK(R.space(1).quotient.dim == 48);
}

TEST_CASE("bar resolution collapses when the base subalgebra is everything") {
    auto cp = product("W1");
    auto base = base_image_in_product(cp);
    auto R = bar_resolution(cp.E, base, 2);
    CHECK(R.reduced.quotient.dim == 0);
    CHECK(R.space(0).quotient.dim == 1);
    CHECK(R.space(1).quotient.dim == 0);
    CHECK(R.space(2).quotient.dim == 0);
    CHECK(rank(R.differential(0).mat) == 1);
}

TEST_CASE("bar resolution passes its identities on a group algebra through degree three") {
    auto cp = product("G1");
    auto R = bar_resolution(cp.E, base_image_in_product(cp), 3);
    CHECK(R.space(0).quotient.dim == 9);
    CHECK(R.space(1).quotient.dim == 18);
    CHECK(R.space(2).quotient.dim == 36);
    CHECK(R.space(3).quotient.dim == 72);
    /* identities are self-checked by the builder; re-verify one externally */
    auto lhs = R.contraction(2).mat * R.differential(2).mat +
               R.differential(3).mat * R.contraction(3).mat;
    CHECK(lhs == SparseMat<QField>::identity(qq, R.space(2).quotient.dim));
}

TEST_CASE("bar resolution rejects unusable base spans") {
    auto cp = product("T1");

    auto no_unit = SparseMat<QField>::from_columns(qq, 4, {vec(qq, {0, 0, 1, 0})});
    CHECK_THROWS_WITH_AS(bar_resolution(cp.E, no_unit, 1),
                         doctest::Contains("does not contain the unit"), std::invalid_argument);

    auto not_closed = SparseMat<QField>::from_columns(
        qq, 4, {vec(qq, {1, 0, 0, 0}), vec(qq, {0, 1, 0, 0}), vec(qq, {0, 0, 0, 1})});
    CHECK_THROWS_WITH_AS(bar_resolution(cp.E, not_closed, 1),
                         doctest::Contains("not closed under multiplication"),
                         std::invalid_argument);
}

TEST_CASE("bar resolution reports the budget it would need") {
    auto cp = product("T1");
    auto base = base_image_in_product(cp);
    try {
        bar_resolution(cp.E, base, 2, 100);
        FAIL("expected a budget error");
    } catch (const budget_error& e) {
        CHECK(e.required == 256);
    }
}

TEST_CASE("chain oracle reproduces the pinned homology of the catalog products") {
    auto p1 = product("P1");
    auto c1 = normalized_hochschild_chains(p1.E, base_image_in_product(p1),
                                           regular_bimodule(p1.E), 4);
    CHECK(homology_table(c1, 3) == std::vector<int>{2, 1, 1, 1});

    auto g1 = product("G1");
    auto cg = normalized_hochschild_chains(g1.E, base_image_in_product(g1),
                                           regular_bimodule(g1.E), 4);
    CHECK(homology_table(cg, 3) == std::vector<int>{3, 0, 0, 0});

    auto w1 = product("W1");
    auto cw = normalized_hochschild_chains(w1.E, base_image_in_product(w1),
                                           regular_bimodule(w1.E), 4);
    CHECK(homology_table(cw, 3) == std::vector<int>{1, 0, 0, 0});

    /* the swap product is a 2x2 matrix algebra: one trace class, nothing above */
    auto s1 = product("S1");
    auto cs = normalized_hochschild_chains(s1.E, base_image_in_product(s1),
                                           regular_bimodule(s1.E), 3);
    CHECK(homology_table(cs, 2) == std::vector<int>{1, 0, 0});

    CHECK_THROWS_AS(cs.homology(3), std::out_of_range);
}

TEST_CASE("chain oracle works on a plain algebra with no product structure around") {
    auto a = cyclic_group_algebra(qq, 2);
    auto c = normalized_hochschild_chains(a, unit_span(a), regular_bimodule(a), 3);
    CHECK(homology_table(c, 2) == std::vector<int>{2, 0, 0});
}

TEST_CASE("chain oracle handles a base subalgebra bigger than the scalars") {
    /* Z/4 group algebra over the Z/2 subgroup algebra: the junction relations
     * are nontrivial, interior words reduce, and the relative homology agrees
     * with the absolute one because the base is separable. */
    auto e = cyclic_group_algebra(qq, 4);
    SparseMat<QField> sub(qq, 4, 2);
    sub.add_at(0, 0, qq.one());
    sub.add_at(2, 1, qq.one());
    auto c = normalized_hochschild_chains(e, sub, regular_bimodule(e), 3);
    CHECK(c.space(0).quotient.dim == 4);
    CHECK(c.space(1).quotient.dim == 4);
    CHECK(c.space(2).quotient.dim == 4);
    CHECK(homology_table(c, 2) == std::vector<int>{4, 0, 0});
}

TEST_CASE("cochain oracle reproduces pinned cohomology") {
    auto p1 = product("P1");
    auto c1 = normalized_hochschild_cochains(p1.E, base_image_in_product(p1),
                                             regular_bimodule(p1.E), 3);
    CHECK(c1.dim(0) == 2);
    CHECK(c1.dim(1) == 2);
    CHECK(cohomology_table(c1, 2) == std::vector<int>{2, 1, 1});

    auto a = cyclic_group_algebra(qq, 2);
    auto ca = normalized_hochschild_cochains(a, unit_span(a), regular_bimodule(a), 3);
    CHECK(cohomology_table(ca, 2) == std::vector<int>{2, 0, 0});

    auto w1 = product("W1");
    auto cw = normalized_hochschild_cochains(w1.E, base_image_in_product(w1),
                                             regular_bimodule(w1.E), 3);
    CHECK(cw.dim(0) == 1);
    CHECK(cw.dim(1) == 0);
    CHECK(cohomology_table(cw, 2) == std::vector<int>{1, 0, 0});

    CHECK_THROWS_AS(cw.cohomology(3), std::out_of_range);
}

TEST_CASE("cochain oracle over a bigger base constrains functionals correctly") {
    auto e = cyclic_group_algebra(qq, 4);
    SparseMat<QField> sub(qq, 4, 2);
    sub.add_at(0, 0, qq.one());
    sub.add_at(2, 1, qq.one());
    auto c = normalized_hochschild_cochains(e, sub, regular_bimodule(e), 2);
    CHECK(c.dim(0) == 4); // commutative: every element centralizes the base
    CHECK(c.dim(1) == 4); // a bimodule map from the rank-one reduced word space
    CHECK(cohomology_table(c, 1) == std::vector<int>{4, 0});
}

TEST_CASE("mixed complex checker names the identity that fails") {
    BasedSpace pt(1), none(0, std::vector<std::string>{});
    auto one = SparseMat<QField>::identity(qq, 1);
    LinearMap<QField> id_pt(pt, pt, one);

    MixedComplex<QField> bad{qq,
                             1,
                             {pt, pt},
                             {LinearMap<QField>::zero(qq, pt, none), id_pt},
                             {id_pt}};
    auto res = check_mixed_complex(bad);
    CHECK_FALSE(res.ok);
    CHECK(res.witness == "anticommutation fails at degree 0");

    MixedComplex<QField> squares{qq,
                                 2,
                                 {pt, pt, pt},
                                 {LinearMap<QField>::zero(qq, pt, none), id_pt, id_pt},
                                 {LinearMap<QField>::zero(qq, pt, pt),
                                  LinearMap<QField>::zero(qq, pt, pt)}};
    auto res2 = check_mixed_complex(squares);
    CHECK_FALSE(res2.ok);
    CHECK(res2.witness == "lowering square fails at degree 2");
}

TEST_CASE("cyclic homology of the ground field alternates") {
    auto k = ground_field_algebra(qq);
    auto cm = canonical_mixed(k, unit_span(k), 5);
    CHECK(check_mixed_complex(cm.mixed).ok);
    CHECK(hc_table(cm.mixed, 4) == std::vector<int>{1, 0, 1, 0, 1});

    auto hn0 = hn_dimension(cm.mixed, 0);
    CHECK(hn0.dim == 1);
    CHECK(hn0.stable);
    auto hn1 = hn_dimension(cm.mixed, 1);
    CHECK(hn1.dim == 0);
    CHECK(hn1.stable);
    auto hp0 = hp_dimension(cm.mixed, 0);
    CHECK(hp0.dim == 1);
    CHECK(hp0.stable);
    auto hp1 = hp_dimension(cm.mixed, 1);
    CHECK(hp1.dim == 0);
    CHECK(hp1.stable);
}

TEST_CASE("cyclic homology of a separable group algebra is periodic") {
    auto a = cyclic_group_algebra(qq, 2);
    auto cm = canonical_mixed(a, unit_span(a), 5);
    CHECK(hc_table(cm.mixed, 4) == std::vector<int>{2, 0, 2, 0, 2});
    CHECK(hn_dimension(cm.mixed, 0).dim == 2);
    CHECK(hn_dimension(cm.mixed, 0).stable);
    CHECK(hp_dimension(cm.mixed, 0).dim == 2);
    CHECK(hp_dimension(cm.mixed, 0).stable);
    CHECK(hp_dimension(cm.mixed, 1).dim == 0);
    CHECK(hp_dimension(cm.mixed, 1).stable);
}

TEST_CASE("canonical mixed complexes of the catalog products pass and pin degree zero") {
    for (const auto& name : example_names()) {
        CAPTURE(name);
        auto cp = product(name);
        auto cm = canonical_mixed(cp.E, base_image_in_product(cp), 3);
        CHECK(check_mixed_complex(cm.mixed).ok);
        CHECK(hc_dimension(cm.mixed, 0) == cm.chains.homology(0));
    }
}

TEST_CASE("cyclic homology tables for the small catalog products") {
    auto w1 = product("W1");
    auto cw = canonical_mixed(w1.E, base_image_in_product(w1), 3);
    CHECK(hc_table(cw.mixed, 2) == std::vector<int>{1, 0, 1});

    auto g1 = product("G1");
    auto cg = canonical_mixed(g1.E, base_image_in_product(g1), 3);
    CHECK(hc_table(cg.mixed, 2) == std::vector<int>{3, 0, 3});

    auto s1 = product("S1"); // a 2x2 matrix algebra: same cyclic homology as the scalars
    auto cs = canonical_mixed(s1.E, base_image_in_product(s1), 3);
    CHECK(hc_table(cs.mixed, 2) == std::vector<int>{1, 0, 1});

    CHECK_THROWS_AS(hc_dimension(cs.mixed, 3), std::out_of_range);
    CHECK_THROWS_AS(hc_dimension(cs.mixed, -1), std::invalid_argument);
}

TEST_CASE("dimension comparison reports mismatches by degree") {
    auto ok = compare_dimension_tables("same", {1, 2, 3}, {1, 2, 3});
    CHECK(ok.pass());
    CHECK(ok.render().find("PASS") != std::string::npos);

    auto bad = compare_dimension_tables("off-by-degree-one", {1, 2, 3}, {1, 4, 3});
    CHECK_FALSE(bad.pass());
    CHECK(bad.render().find("MISMATCH") != std::string::npos);
    CHECK(bad.render().find("degree 1: 2 vs 4") != std::string::npos);

    CHECK_FALSE(compare_dimension_tables("length", {1, 2}, {1, 2, 0}).pass());
}

TEST_CASE("oracle tables confirm every pinned catalog row end-to-end") {
    for (const auto& name : example_names()) {
        auto entry = catalog_entry(qq, name);
        if (entry.hochschild_E.empty()) continue;
        CAPTURE(name);
        auto cp = build_crossed_product(entry.spec);
        auto chains = normalized_hochschild_chains(cp.E, base_image_in_product(cp),
                                                   regular_bimodule(cp.E), 4);
        auto report = compare_dimension_tables(
            name, homology_table(chains, 3), entry.hochschild_E);
        CHECK_MESSAGE(report.pass(), report.render());
    }
}
