#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "crossed/crossed_system.hpp"

namespace crossed {

/* --- small algebra constructors used by the catalog ----------------------- */

/* k[x]/(x^t), basis 1, x, ..., x^{t-1}. */
template <class F>
Algebra<F> truncated_polynomial_algebra(F f, int t) {
    std::vector<std::string> labels{"1"};
    for (int i = 1; i < t; ++i) labels.push_back("x^" + std::to_string(i));
    BasedSpace s(t, labels);
    SparseMat<F> m(f, t, t * t);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j)
            if (i + j < t) m.add_at(i + j, i * t + j, f.one());
    return make_algebra(f, s, m, vec_unit<F>(f, t, 0));
}

/* k[Z/n], basis g0 (identity), g1, ..., g_{n-1}. */
template <class F>
Algebra<F> cyclic_group_algebra(F f, int n) {
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) labels.push_back("g" + std::to_string(i));
    BasedSpace s(n, labels);
    SparseMat<F> m(f, n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.add_at((i + j) % n, i * n + j, f.one());
    return make_algebra(f, s, m, vec_unit<F>(f, n, 0));
}

/* k x k with the idempotent basis e0 = (1,0), e1 = (0,1). */
template <class F>
Algebra<F> split_pair_algebra(F f) {
    BasedSpace s(2, std::vector<std::string>{"e0", "e1"});
    SparseMat<F> m(f, 2, 4);
    m.add_at(0, 0, f.one()); // e0 e0 = e0
    m.add_at(1, 3, f.one()); // e1 e1 = e1
    Vec<F> unit{f.one(), f.one()};
    return make_algebra(f, s, m, unit);
}

/* --- generic builder: Z/n acting on A by an algebra automorphism ---------- */

/* The system with V = k[Z/n], twist u_i (x) a -> sigma^i(a) (x) u_i, the
 * trivial cocycle u_i (x) u_j -> 1_A (x) u_{i+j}, preunit 1_A (x) u_0, and
 * the grouplike comultiplication data. K is passed as a span inside A. */
template <class F>
CrossedSystemSpec<F> group_action_system(F f, const Algebra<F>& a, const SparseMat<F>& sigma,
                                         int n, const SparseMat<F>& k_span) {
    const int dA = a.space.dim;
    if (sigma.rows != dA || sigma.cols != dA)
        throw std::invalid_argument("group_action_system: automorphism has wrong shape");

    std::vector<std::string> vlabels;
    for (int i = 0; i < n; ++i) vlabels.push_back("u" + std::to_string(i));
    BasedSpace V(n, vlabels);

    /* powers of sigma */
    std::vector<SparseMat<F>> pw;
    pw.push_back(SparseMat<F>::identity(f, dA));
    for (int i = 1; i < n; ++i) pw.push_back(sigma * pw.back());

    SparseMat<F> chi(f, dA * n, n * dA);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dA; ++j) {
            auto img = pw[static_cast<std::size_t>(i)].column(j); // sigma^i(a_j)
            for (int t = 0; t < dA; ++t)
                chi.add_at(t * n + i, i * dA + j, img[static_cast<std::size_t>(t)]);
        }

    SparseMat<F> cocycle(f, dA * n, n * n);
    auto unit = a.unit_vec();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int t = 0; t < dA; ++t)
                cocycle.add_at(t * n + (i + j) % n, i * n + j, unit[static_cast<std::size_t>(t)]);

    Vec<F> nu = vec_kron<F>(f, unit, vec_unit<F>(f, n, 0));

    /* grouplike comultiplication, group product, action, trivial pairing */
    SparseMat<F> comult(f, n * n, n);
    for (int i = 0; i < n; ++i) comult.add_at(i * n + i, i, f.one());
    SparseMat<F> mult_v(f, n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mult_v.add_at((i + j) % n, i * n + j, f.one());
    SparseMat<F> rho(f, dA, n * dA);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dA; ++j) {
            auto img = pw[static_cast<std::size_t>(i)].column(j);
            for (int t = 0; t < dA; ++t) rho.add_at(t, i * dA + j, img[static_cast<std::size_t>(t)]);
        }
    SparseMat<F> f_map(f, dA, n * n);
    for (int i = 0; i < n * n; ++i)
        for (int t = 0; t < dA; ++t) f_map.add_at(t, i, unit[static_cast<std::size_t>(t)]);

    BasedSpace VV = tensor_space({V, V});
    BasedSpace VA = tensor_space({V, a.space});
    BasedSpace AV = tensor_space({a.space, V});
    SweedlerData<F> sw{LinearMap<F>(V, VV, comult), LinearMap<F>(VV, V, mult_v),
                       LinearMap<F>(VA, a.space, rho), LinearMap<F>(VV, a.space, f_map)};
    return CrossedSystemSpec<F>{f,
                                a,
                                V,
                                LinearMap<F>(VA, AV, chi),
                                LinearMap<F>(VV, AV, cocycle),
                                nu,
                                make_subalgebra(a, k_span),
                                sw};
}

/* --- the catalog ----------------------------------------------------------- */

inline std::vector<std::string> example_names() { return {"T1", "G1", "W1", "S1", "P1"}; }

template <class F>
CrossedSystemSpec<F> example(F f, const std::string& name) {
    if (name == "T1") {
        auto a = truncated_polynomial_algebra(f, 2);
        SparseMat<F> sigma(f, 2, 2); // 1 -> 1, x -> -x
        sigma.add_at(0, 0, f.one());
        sigma.add_at(1, 1, f.neg(f.one()));
        SparseMat<F> k_span(f, 2, 1);
        k_span.set_column(0, a.unit_vec());
        return group_action_system(f, a, sigma, 2, k_span);
    }
    if (name == "G1") {
        auto a = ground_field_algebra(f);
        SparseMat<F> k_span(f, 1, 1);
        k_span.add_at(0, 0, f.one());
        return group_action_system(f, a, SparseMat<F>::identity(f, 1), 3, k_span);
    }
    if (name == "S1") {
        auto a = split_pair_algebra(f);
        SparseMat<F> exchange(f, 2, 2); // exchange the two idempotents
        exchange.add_at(1, 0, f.one());
        exchange.add_at(0, 1, f.one());
        SparseMat<F> k_span(f, 2, 1);
        k_span.set_column(0, a.unit_vec());
        return group_action_system(f, a, exchange, 2, k_span);
    }
    if (name == "P1") {
        auto a = truncated_polynomial_algebra(f, 2);
        SparseMat<F> k_span(f, 2, 1);
        k_span.set_column(0, a.unit_vec());
        return group_action_system(f, a, SparseMat<F>::identity(f, 2), 1, k_span);
    }
    if (name == "W1") {
        auto a = split_pair_algebra(f);
        BasedSpace V(1, std::vector<std::string>{"v"});
        BasedSpace VA = tensor_space({V, a.space});
        BasedSpace AV = tensor_space({a.space, V});
        BasedSpace VV = tensor_space({V, V});
        SparseMat<F> chi(f, 2, 2); // v (x) a -> a e0 (x) v
        chi.add_at(0, 0, f.one());
        SparseMat<F> cocycle(f, 2, 1); // v (x) v -> e0 (x) v
        cocycle.add_at(0, 0, f.one());
        Vec<F> nu{f.one(), f.zero()}; // e0 (x) v
        SparseMat<F> k_span(f, 2, 2); // K = span{1_A, e0} = A
        k_span.set_column(0, a.unit_vec());
        k_span.add_at(0, 1, f.one());

        SparseMat<F> comult(f, 1, 1);
        comult.add_at(0, 0, f.one());
        SparseMat<F> mult_v(f, 1, 1);
        mult_v.add_at(0, 0, f.one());
        SparseMat<F> rho(f, 2, 2); // v (x) a -> a e0
        rho.add_at(0, 0, f.one());
        SparseMat<F> f_map(f, 2, 1); // v (x) v -> e0
        f_map.add_at(0, 0, f.one());
        SweedlerData<F> sw{LinearMap<F>(V, VV, comult), LinearMap<F>(VV, V, mult_v),
                           LinearMap<F>(VA, a.space, rho), LinearMap<F>(VV, a.space, f_map)};
        return CrossedSystemSpec<F>{f,
                                    a,
                                    V,
                                    LinearMap<F>(VA, AV, chi),
                                    LinearMap<F>(VV, AV, cocycle),
                                    nu,
                                    make_subalgebra(a, k_span),
                                    sw};
    }
    throw std::invalid_argument("example: unknown name \"" + name + "\" (known: T1, G1, W1, S1, P1)");
}

/* Catalog entry: the spec plus the expected small dimensions. An empty
 * homology row means the value is computed rather than pinned. */
template <class F>
struct ExampleCatalogEntry {
    std::string name;
    std::string description;
    CrossedSystemSpec<F> spec;
    int dim_E = 0;
    int dim_A_bar = 0;
    int dim_E_tilde = 0;
    std::vector<int> hochschild_E; // dims of H_n(E, E) for n = 0.. when pinned
};

template <class F>
ExampleCatalogEntry<F> catalog_entry(F f, const std::string& name) {
    auto spec = example(f, name);
    if (name == "T1")
        return {name, "sign action of Z/2 on k[x]/(x^2), twisted tensor product", spec, 4, 1, 2, {}};
    if (name == "G1")
        return {name, "group algebra k[Z/3] over the ground field", spec, 3, 0, 2, {3, 0, 0, 0}};
    if (name == "W1")
        return {name, "rank-one weak product over k x k (projector twist)", spec, 1, 0, 0, {1, 0, 0, 0}};
    if (name == "S1")
        return {name, "Z/2 swapping the factors of k x k, group crossed product", spec, 4, 1, 2, {}};
    return {name, "trivial twist over k[x]/(x^2), product collapses to the base", spec, 2, 1, 0, {2, 1, 1, 1}};
}

} // namespace crossed
