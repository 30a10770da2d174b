#include <doctest.h>

#include <crossed/linalg.hpp>

#include "test_util.hpp"

using namespace crossed;
using testutil::mat;
using testutil::vec;

static const QField Q{};

TEST_CASE("rational field: parsing and arithmetic") {
    CHECK(Q.parse("7").has_value());
    CHECK(Q.eq(*Q.parse("7"), Q.from_int(7)));
    CHECK(Q.eq(*Q.parse("-7"), Q.from_int(-7)));
    CHECK(Q.eq(*Q.parse("3/4"), Q.div(Q.from_int(3), Q.from_int(4))));
    CHECK(Q.eq(*Q.parse("-6/8"), Q.div(Q.from_int(-3), Q.from_int(4))));
    CHECK_FALSE(Q.parse("1/0").has_value());
    CHECK_FALSE(Q.parse("a").has_value());
    CHECK_FALSE(Q.parse("").has_value());
    CHECK(Q.is_zero(Q.sub(Q.from_int(2), Q.from_int(2))));
    CHECK(Q.eq(Q.mul(Q.inv(Q.from_int(5)), Q.from_int(5)), Q.one()));
}

TEST_CASE("prime field: construction and arithmetic") {
    CHECK_THROWS_AS(PField(4), std::invalid_argument);
    CHECK_THROWS_AS(PField(1), std::invalid_argument);
    PField f7(7);
    CHECK(f7.eq(f7.mul(f7.inv(f7.from_int(3)), f7.from_int(3)), f7.one()));
    CHECK(f7.eq(f7.from_int(-1), f7.from_int(6)));
    CHECK_THROWS_AS(f7.inv(f7.zero()), std::domain_error);
    auto half = f7.parse("1/2");
    REQUIRE(half.has_value());
    CHECK(f7.eq(f7.mul(*half, f7.from_int(2)), f7.one()));
}

TEST_CASE("rank_profile: pinned cases") {
    SUBCASE("2x2 identity over Q") {
        auto [r, p] = rank_profile(SparseMat<QField>::identity(Q, 2));
        CHECK(r == 2);
        CHECK(p == std::vector<int>{0, 1});
    }
    SUBCASE("3x2 zero matrix") {
        auto [r, p] = rank_profile(SparseMat<QField>::zero(Q, 3, 2));
        CHECK(r == 0);
        CHECK(p.empty());
    }
    SUBCASE("all-ones 2x2 over F_2") {
        PField f2(2);
        auto m = mat(f2, {{1, 1}, {1, 1}});
        auto [r, p] = rank_profile(m);
        CHECK(r == 1);
        CHECK(p == std::vector<int>{0});
    }
}

TEST_CASE("kernel_basis: pinned cases") {
    SUBCASE("identity has trivial kernel") {
        auto k = kernel_basis(SparseMat<QField>::identity(Q, 3));
        CHECK(k.cols == 0);
    }
    SUBCASE("zero 2x3 has full kernel") {
        auto k = kernel_basis(SparseMat<QField>::zero(Q, 2, 3));
        CHECK(k == SparseMat<QField>::identity(Q, 3));
    }
    SUBCASE("row (1,1) kernel is span of (1,-1)") {
        auto k = kernel_basis(mat(Q, {{1, 1}}));
        REQUIRE(k.cols == 1);
        auto c = k.column(0);
        CHECK(Q.eq(c[1], Q.neg(c[0])));
        CHECK_FALSE(Q.is_zero(c[0]));
    }
}

TEST_CASE("kernel columns are actual null vectors") {
    std::mt19937_64 rng(20240817);
    for (int t = 0; t < 20; ++t) {
        auto m = testutil::random_mat(Q, 5, 7, rng);
        auto k = kernel_basis(m);
        auto prod = m * k;
        CHECK(prod.is_zero());
        CHECK(rank(k) == k.cols); // independent columns
    }
}

TEST_CASE("rank-nullity over both fields") {
    std::mt19937_64 rng(99);
    PField f5(5);
    for (int t = 0; t < 15; ++t) {
        auto mq = testutil::random_mat(Q, 6, 4, rng);
        CHECK(rank(mq) + kernel_basis(mq).cols == mq.cols);
        auto mp = testutil::random_mat(f5, 4, 6, rng);
        CHECK(rank(mp) + kernel_basis(mp).cols == mp.cols);
    }
}

TEST_CASE("quotient_space: pinned cases") {
    SUBCASE("by the full space") {
        BasedSpace amb(3);
        auto qs = quotient_space(amb, SparseMat<QField>::identity(Q, 3));
        CHECK(qs.quotient.dim == 0);
    }
    SUBCASE("by the zero subspace") {
        BasedSpace amb(3);
        auto qs = quotient_space(amb, SparseMat<QField>::zero(Q, 3, 0));
        CHECK(qs.quotient.dim == 3);
        CHECK(qs.projection.mat == SparseMat<QField>::identity(Q, 3));
    }
    SUBCASE("Q^3 by span{(1,1,0)}") {
        BasedSpace amb(3);
        auto sub = mat(Q, {{1}, {1}, {0}});
        auto qs = quotient_space(amb, sub);
        CHECK(qs.quotient.dim == 2);
        auto ps = qs.projection.mat * qs.section.mat;
        CHECK(ps == SparseMat<QField>::identity(Q, 2));
        CHECK((qs.projection.mat * sub).is_zero());
    }
    SUBCASE("dimension mismatch rejected") {
        BasedSpace amb(3);
        CHECK_THROWS_AS(quotient_space(amb, SparseMat<QField>::zero(Q, 2, 1)), std::invalid_argument);
    }
}

TEST_CASE("quotient_space invariants on random subspaces") {
    std::mt19937_64 rng(717);
    for (int t = 0; t < 15; ++t) {
        int n = 6;
        auto sub = testutil::random_mat(Q, n, 3, rng);
        BasedSpace amb(n);
        auto qs = quotient_space(amb, sub);
        CHECK(qs.quotient.dim == n - rank(sub));
        CHECK(qs.projection.mat * qs.section.mat == SparseMat<QField>::identity(Q, qs.quotient.dim));
        CHECK((qs.projection.mat * sub).is_zero());
        // kernel of projection equals the span: both contained in each other
        auto kp = kernel_basis(qs.projection.mat);
        CHECK(rank(kp) == rank(sub));
        CHECK(rank(SparseMat<QField>::hstack(kp, sub)) == rank(sub));
    }
}

TEST_CASE("solver: consistent and inconsistent systems") {
    auto a = mat(Q, {{1, 2}, {3, 4}, {4, 6}}); // third row = first + second
    Solver<QField> s(a);
    CHECK(s.rank() == 2);
    auto sol = s.solve(vec(Q, {3, 7, 10}));
    REQUIRE(sol.has_value());
    auto back = a.apply(*sol);
    CHECK(Q.eq(back[0], Q.from_int(3)));
    CHECK(Q.eq(back[1], Q.from_int(7)));
    CHECK(Q.eq(back[2], Q.from_int(10)));
    CHECK_FALSE(s.solve(vec(Q, {1, 0, 0})).has_value());

    std::mt19937_64 rng(5150);
    for (int t = 0; t < 10; ++t) {
        auto m = testutil::random_mat(Q, 5, 3, rng);
        Solver<QField> sv(m);
        auto x = testutil::vec(Q, {1, -2, 3});
        auto b = m.apply(x);
        auto got = sv.solve(b);
        REQUIRE(got.has_value());
        auto b2 = m.apply(*got);
        for (int i = 0; i < 5; ++i) CHECK(Q.eq(b2[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)]));
    }
}

TEST_CASE("homology_dimension: pinned cases") {
    SUBCASE("zero maps give the full dimension") {
        BasedSpace u(2), w(4), t(3);
        LinearMap<QField> din = LinearMap<QField>::zero(Q, u, w);
        LinearMap<QField> dout = LinearMap<QField>::zero(Q, w, t);
        CHECK(homology_dimension(din, dout) == 4);
    }
    SUBCASE("injective outgoing map kills everything") {
        BasedSpace u(3), w(2);
        LinearMap<QField> din = LinearMap<QField>::zero(Q, u, w);
        LinearMap<QField> dout = LinearMap<QField>::identity(Q, w);
        CHECK(homology_dimension(din, dout) == 0);
    }
    SUBCASE("nonzero composition is rejected with a witness") {
        BasedSpace w(2);
        LinearMap<QField> id = LinearMap<QField>::identity(Q, w);
        CHECK_THROWS_AS(homology_dimension(id, id), std::domain_error);
    }
}

/* Degree-1 homology of the normalized chain complex of k[x]/(x^2) with
 * coefficients in itself, built by hand: C_n = A (x) Abar^n with
 * A = {1, x}, Abar = {xbar}.  b_1 = 0 (A commutative), b_2 has rank 1. */
TEST_CASE("homology_dimension: truncated polynomial algebra, degree 1") {
    BasedSpace c2(2), c1(2), c0(2);
    // basis of C_1: 1(x)xbar, x(x)xbar ; C_2: 1(x)xbar(x)xbar, x(x)xbar(x)xbar
    auto b1 = LinearMap<QField>::zero(Q, c1, c0); // a.x - x.a = 0
    // b_2(a (x) xbar (x) xbar) = ax (x) xbar - a (x) [x.x=0] + xa (x) xbar
    SparseMat<QField> m2(Q, 2, 2);
    m2.add_at(1, 0, Q.from_int(2)); // 1: -> 2 x(x)xbar
    // x: -> 2 x^2 (x) xbar = 0
    LinearMap<QField> b2(c2, c1, m2);
    CHECK(homology_dimension(b2, b1) == 1);
}

TEST_CASE("homology_dimension is invariant under change of basis") {
    std::mt19937_64 rng(31337);
    for (int t = 0; t < 8; ++t) {
        int nu = 4, nw = 5, nt = 3;
        auto dout_m = testutil::random_mat(Q, nt, nw, rng);
        auto k = kernel_basis(dout_m);
        auto r = testutil::random_mat(Q, k.cols, nu, rng);
        auto din_m = k * r;
        BasedSpace u(nu), w(nw), s(nt);
        LinearMap<QField> din(u, w, din_m), dout(w, s, dout_m);
        int h = homology_dimension(din, dout);

        auto pu = testutil::random_invertible(Q, nu, rng);
        auto pw = testutil::random_invertible(Q, nw, rng);
        auto pt = testutil::random_invertible(Q, nt, rng);
        Solver<QField> inv_pu(pu), inv_pw(pw);
        auto pu_inv = *inv_pu.solve_mat(SparseMat<QField>::identity(Q, nu));
        auto pw_inv = *inv_pw.solve_mat(SparseMat<QField>::identity(Q, nw));
        LinearMap<QField> din2(u, w, pw * din_m * pu_inv);
        LinearMap<QField> dout2(w, s, pt * dout_m * pw_inv);
        CHECK(homology_dimension(din2, dout2) == h);
    }
}

TEST_CASE("image_basis spans the column space") {
    std::mt19937_64 rng(4242);
    auto m = testutil::random_mat(Q, 6, 5, rng);
    auto im = image_basis(m);
    CHECK(im.cols == rank(m));
    CHECK(rank(SparseMat<QField>::hstack(im, m)) == rank(m));
}

TEST_CASE("tensor index conventions round-trip") {
    std::vector<int> dims{3, 2, 4};
    for (int flat = 0; flat < 24; ++flat) {
        auto idx = tensor_unindex(dims, flat);
        CHECK(tensor_index(dims, idx) == flat);
    }
    // first factor varies slowest
    CHECK(tensor_index(dims, {1, 0, 0}) == 8);
    CHECK(tensor_index(dims, {0, 1, 0}) == 4);
    CHECK(tensor_index(dims, {0, 0, 1}) == 1);
}

TEST_CASE("kron matches tensor index convention") {
    auto a = mat(Q, {{1, 2}, {3, 4}});
    auto b = mat(Q, {{0, 1}, {1, 0}});
    auto k = SparseMat<QField>::kron(a, b);
    REQUIRE(k.rows == 4);
    REQUIRE(k.cols == 4);
    // entry ((i1,i2),(j1,j2)) = a[i1][j1] * b[i2][j2]
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2)
            for (int j1 = 0; j1 < 2; ++j1)
                for (int j2 = 0; j2 < 2; ++j2)
                    CHECK(Q.eq(k.at(i1 * 2 + i2, j1 * 2 + j2), Q.mul(a.at(i1, j1), b.at(i2, j2))));
}
