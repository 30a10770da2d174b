#pragma once

#include <random>
#include <vector>

#include <crossed/algebra.hpp>
#include <crossed/linalg.hpp>

namespace testutil {

using crossed::LinearMap;
using crossed::QField;
using crossed::SparseMat;
using crossed::Vec;

/* Build a matrix from integer row data. */
template <class F>
SparseMat<F> mat(F f, const std::vector<std::vector<long>>& rows) {
    int r = static_cast<int>(rows.size());
    int c = r ? static_cast<int>(rows[0].size()) : 0;
    SparseMat<F> m(f, r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            if (rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0)
                m.add_at(i, j, f.from_int(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
    return m;
}

template <class F>
Vec<F> vec(F f, const std::vector<long>& entries) {
    Vec<F> v;
    v.reserve(entries.size());
    for (long e : entries) v.push_back(f.from_int(e));
    return v;
}

template <class F>
SparseMat<F> random_mat(F f, int rows, int cols, std::mt19937_64& rng, int density_pct = 60) {
    SparseMat<F> m(f, rows, cols);
    std::uniform_int_distribution<int> pick(0, 99);
    std::uniform_int_distribution<long> val(-4, 4);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            if (pick(rng) < density_pct) {
                long v = val(rng);
                if (v != 0) m.add_at(i, j, f.from_int(v));
            }
    return m;
}

template <class F>
SparseMat<F> random_invertible(F f, int n, std::mt19937_64& rng) {
    for (;;) {
        auto m = random_mat(f, n, n, rng, 70);
        if (crossed::rank(m) == n) return m;
    }
}

/* The group algebra of Z/n over the rationals: basis g0..g_{n-1}, gi*gj = g_{i+j mod n}. */
inline crossed::Algebra<QField> group_algebra(QField q, int n) {
    crossed::BasedSpace s(n, "g");
    SparseMat<QField> m(q, n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.add_at((i + j) % n, i * n + j, q.one());
    return crossed::make_algebra(q, s, m, crossed::vec_unit<QField>(q, n, 0));
}

/* Truncated polynomials Q[x]/(x^t): basis 1, x, ..., x^{t-1}. */
inline crossed::Algebra<QField> truncated_poly_algebra(QField q, int t) {
    std::vector<std::string> labels;
    for (int i = 0; i < t; ++i) labels.push_back(i == 0 ? "1" : "x^" + std::to_string(i));
    crossed::BasedSpace s(t, std::move(labels));
    SparseMat<QField> m(q, t, t * t);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j)
            if (i + j < t) m.add_at(i + j, i * t + j, q.one());
    return crossed::make_algebra(q, s, m, crossed::vec_unit<QField>(q, t, 0));
}

} // namespace testutil
