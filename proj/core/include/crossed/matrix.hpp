#pragma once

#include <algorithm>
#include <cassert>
#include <utility>
#include <vector>

#include "crossed/scalar.hpp"

namespace crossed {

template <class F>
using Vec = std::vector<typename F::Elem>;

/* Column-major sparse matrix over a field F. Column j holds the image of the
 * j-th domain basis vector as sorted (row, value) entries with value != 0. */
template <class F>
class SparseMat {
  public:
    using Elem = typename F::Elem;
    using Entry = std::pair<int, Elem>;

    F field;
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<Entry>> col;

    SparseMat(F f, int r, int c) : field(f), rows(r), cols(c), col(static_cast<std::size_t>(c)) {
        assert(r >= 0 && c >= 0);
    }

    static SparseMat identity(F f, int n) {
        SparseMat m(f, n, n);
        for (int j = 0; j < n; ++j) m.col[j].push_back({j, f.one()});
        return m;
    }

    static SparseMat zero(F f, int r, int c) { return SparseMat(f, r, c); }

    /* m[i][j] += v, keeping the column sorted and free of zeros. */
    void add_at(int i, int j, const Elem& v) {
        assert(0 <= i && i < rows && 0 <= j && j < cols);
        if (field.is_zero(v)) return;
        auto& c = col[j];
        auto it = std::lower_bound(c.begin(), c.end(), i,
                                   [](const Entry& e, int row) { return e.first < row; });
        if (it != c.end() && it->first == i) {
            it->second = field.add(it->second, v);
            if (field.is_zero(it->second)) c.erase(it);
        } else {
            c.insert(it, {i, v});
        }
    }

    void set_at(int i, int j, const Elem& v) {
        auto& c = col[j];
        auto it = std::lower_bound(c.begin(), c.end(), i,
                                   [](const Entry& e, int row) { return e.first < row; });
        if (it != c.end() && it->first == i) c.erase(it);
        if (!field.is_zero(v)) {
            it = std::lower_bound(c.begin(), c.end(), i,
                                  [](const Entry& e, int row) { return e.first < row; });
            c.insert(it, {i, v});
        }
    }

    Elem at(int i, int j) const {
        const auto& c = col[j];
        auto it = std::lower_bound(c.begin(), c.end(), i,
                                   [](const Entry& e, int row) { return e.first < row; });
        if (it != c.end() && it->first == i) return it->second;
        return field.zero();
    }

    std::size_t nnz() const {
        std::size_t n = 0;
        for (const auto& c : col) n += c.size();
        return n;
    }

    bool is_zero() const {
        for (const auto& c : col)
            if (!c.empty()) return false;
        return true;
    }

    bool operator==(const SparseMat& o) const {
        if (rows != o.rows || cols != o.cols) return false;
        for (int j = 0; j < cols; ++j) {
            if (col[j].size() != o.col[j].size()) return false;
            for (std::size_t t = 0; t < col[j].size(); ++t)
                if (col[j][t].first != o.col[j][t].first ||
                    !field.eq(col[j][t].second, o.col[j][t].second))
                    return false;
        }
        return true;
    }

    Vec<F> column(int j) const {
        Vec<F> v(static_cast<std::size_t>(rows), field.zero());
        for (const auto& [i, x] : col[j]) v[static_cast<std::size_t>(i)] = x;
        return v;
    }

    void set_column(int j, const Vec<F>& v) {
        assert(static_cast<int>(v.size()) == rows);
        col[j].clear();
        for (int i = 0; i < rows; ++i)
            if (!field.is_zero(v[static_cast<std::size_t>(i)]))
                col[j].push_back({i, v[static_cast<std::size_t>(i)]});
    }

    /* Add v (a sparse column) scaled by c into column j. */
    void axpy_into_column(int j, const Elem& c, const std::vector<Entry>& v) {
        for (const auto& [i, x] : v) add_at(i, j, field.mul(c, x));
    }

    Vec<F> apply(const Vec<F>& x) const {
        assert(static_cast<int>(x.size()) == cols);
        Vec<F> y(static_cast<std::size_t>(rows), field.zero());
        for (int j = 0; j < cols; ++j) {
            const Elem& xj = x[static_cast<std::size_t>(j)];
            if (field.is_zero(xj)) continue;
            for (const auto& [i, v] : col[j])
                y[static_cast<std::size_t>(i)] = field.add(y[static_cast<std::size_t>(i)], field.mul(v, xj));
        }
        return y;
    }

    SparseMat operator*(const SparseMat& b) const {
        assert(cols == b.rows);
        SparseMat r(field, rows, b.cols);
        Vec<F> acc(static_cast<std::size_t>(rows), field.zero());
        std::vector<int> touched;
        for (int j = 0; j < b.cols; ++j) {
            touched.clear();
            for (const auto& [l, bv] : b.col[j]) {
                for (const auto& [i, av] : col[l]) {
                    auto& slot = acc[static_cast<std::size_t>(i)];
                    if (field.is_zero(slot)) touched.push_back(i);
                    slot = field.add(slot, field.mul(av, bv));
                }
            }
            std::sort(touched.begin(), touched.end());
            for (int i : touched) {
                if (!field.is_zero(acc[static_cast<std::size_t>(i)]))
                    r.col[j].push_back({i, acc[static_cast<std::size_t>(i)]});
                acc[static_cast<std::size_t>(i)] = field.zero();
            }
        }
        return r;
    }

    SparseMat operator+(const SparseMat& b) const {
        assert(rows == b.rows && cols == b.cols);
        SparseMat r = *this;
        for (int j = 0; j < cols; ++j)
            for (const auto& [i, v] : b.col[j]) r.add_at(i, j, v);
        return r;
    }

    SparseMat operator-(const SparseMat& b) const {
        assert(rows == b.rows && cols == b.cols);
        SparseMat r = *this;
        for (int j = 0; j < cols; ++j)
            for (const auto& [i, v] : b.col[j]) r.add_at(i, j, field.neg(v));
        return r;
    }

    SparseMat scaled(const Elem& c) const {
        SparseMat r(field, rows, cols);
        if (field.is_zero(c)) return r;
        for (int j = 0; j < cols; ++j)
            for (const auto& [i, v] : col[j]) r.col[j].push_back({i, field.mul(c, v)});
        return r;
    }

    SparseMat operator-() const { return scaled(field.neg(field.one())); }

    SparseMat transpose() const {
        SparseMat r(field, cols, rows);
        for (int j = 0; j < cols; ++j)
            for (const auto& [i, v] : col[j]) r.col[i].push_back({j, v});
        for (auto& c : r.col)
            std::sort(c.begin(), c.end(),
                      [](const Entry& a, const Entry& b) { return a.first < b.first; });
        return r;
    }

    /* Kronecker/tensor product. Index convention everywhere in this library:
     * basis vector (i, j) of X (x) Y has flat index i * dim(Y) + j
     * (first factor varies slowest). */
    static SparseMat kron(const SparseMat& a, const SparseMat& b) {
        SparseMat r(a.field, a.rows * b.rows, a.cols * b.cols);
        for (int ja = 0; ja < a.cols; ++ja)
            for (int jb = 0; jb < b.cols; ++jb) {
                auto& c = r.col[ja * b.cols + jb];
                for (const auto& [ia, va] : a.col[ja])
                    for (const auto& [ib, vb] : b.col[jb])
                        c.push_back({ia * b.rows + ib, a.field.mul(va, vb)});
                std::sort(c.begin(), c.end(),
                          [](const Entry& x, const Entry& y) { return x.first < y.first; });
            }
        return r;
    }

    /* [A | B]: same row space, columns side by side. */
    static SparseMat hstack(const SparseMat& a, const SparseMat& b) {
        assert(a.rows == b.rows);
        SparseMat r(a.field, a.rows, a.cols + b.cols);
        for (int j = 0; j < a.cols; ++j) r.col[j] = a.col[j];
        for (int j = 0; j < b.cols; ++j) r.col[a.cols + j] = b.col[j];
        return r;
    }

    SparseMat cols_subset(const std::vector<int>& idx) const {
        SparseMat r(field, rows, static_cast<int>(idx.size()));
        for (std::size_t t = 0; t < idx.size(); ++t) r.col[t] = col[static_cast<std::size_t>(idx[t])];
        return r;
    }

    std::vector<std::vector<Elem>> to_dense() const {
        std::vector<std::vector<Elem>> d(static_cast<std::size_t>(rows),
                                         std::vector<Elem>(static_cast<std::size_t>(cols), field.zero()));
        for (int j = 0; j < cols; ++j)
            for (const auto& [i, v] : col[j]) d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
        return d;
    }

    static SparseMat from_dense(F f, const std::vector<std::vector<Elem>>& d) {
        int r = static_cast<int>(d.size());
        int c = r == 0 ? 0 : static_cast<int>(d[0].size());
        SparseMat m(f, r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
                if (!f.is_zero(d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]))
                    m.col[j].push_back({i, d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]});
        for (auto& cc : m.col)
            std::sort(cc.begin(), cc.end(),
                      [](const Entry& a, const Entry& b) { return a.first < b.first; });
        return m;
    }

    static SparseMat from_columns(F f, int rows_, const std::vector<Vec<F>>& columns) {
        SparseMat m(f, rows_, static_cast<int>(columns.size()));
        for (std::size_t j = 0; j < columns.size(); ++j) m.set_column(static_cast<int>(j), columns[j]);
        return m;
    }
};

template <class F>
Vec<F> vec_zero(F f, int n) {
    return Vec<F>(static_cast<std::size_t>(n), f.zero());
}

template <class F>
Vec<F> vec_unit(F f, int n, int i) {
    Vec<F> v(static_cast<std::size_t>(n), f.zero());
    v[static_cast<std::size_t>(i)] = f.one();
    return v;
}

template <class F>
bool vec_is_zero(F f, const Vec<F>& v) {
    for (const auto& x : v)
        if (!f.is_zero(x)) return false;
    return true;
}

template <class F>
Vec<F> vec_add(F f, const Vec<F>& a, const Vec<F>& b) {
    assert(a.size() == b.size());
    Vec<F> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = f.add(a[i], b[i]);
    return r;
}

template <class F>
Vec<F> vec_sub(F f, const Vec<F>& a, const Vec<F>& b) {
    assert(a.size() == b.size());
    Vec<F> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = f.sub(a[i], b[i]);
    return r;
}

template <class F>
Vec<F> vec_scale(F f, const typename F::Elem& c, const Vec<F>& a) {
    Vec<F> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = f.mul(c, a[i]);
    return r;
}

/* Flat index of the tensor-basis tuple `idx` with factor dimensions `dims`
 * (first factor slowest). */
inline int tensor_index(const std::vector<int>& dims, const std::vector<int>& idx) {
    assert(dims.size() == idx.size());
    int flat = 0;
    for (std::size_t t = 0; t < dims.size(); ++t) {
        assert(0 <= idx[t] && idx[t] < dims[t]);
        flat = flat * dims[t] + idx[t];
    }
    return flat;
}

/* Inverse of tensor_index. */
inline std::vector<int> tensor_unindex(const std::vector<int>& dims, int flat) {
    std::vector<int> idx(dims.size(), 0);
    for (std::size_t t = dims.size(); t-- > 0;) {
        idx[t] = flat % dims[t];
        flat /= dims[t];
    }
    assert(flat == 0);
    return idx;
}

} // namespace crossed
