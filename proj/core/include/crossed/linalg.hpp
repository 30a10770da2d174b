#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "crossed/space.hpp"

namespace crossed {

template <class F>
struct Rref {
    int rank = 0;
    std::vector<int> pivot_cols;
    std::vector<Vec<F>> rows; // the `rank` nonzero rows, reduced, pivot entries = 1
};

namespace detail {

/* Plain Gauss-Jordan, any field. Rows are consumed in place. */
template <class F>
Rref<F> rref_rows_generic(F f, std::vector<Vec<F>>& rows, int ncols) {
    Rref<F> out;
    int nrows = static_cast<int>(rows.size());
    int rank = 0;
    for (int c = 0; c < ncols && rank < nrows; ++c) {
        int pr = -1;
        for (int i = rank; i < nrows; ++i)
            if (!f.is_zero(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)])) {
                pr = i;
                break;
            }
        if (pr < 0) continue;
        std::swap(rows[static_cast<std::size_t>(rank)], rows[static_cast<std::size_t>(pr)]);
        auto& prow = rows[static_cast<std::size_t>(rank)];
        auto piv_inv = f.inv(prow[static_cast<std::size_t>(c)]);
        for (int j = c; j < ncols; ++j)
            prow[static_cast<std::size_t>(j)] = f.mul(piv_inv, prow[static_cast<std::size_t>(j)]);
        for (int i = 0; i < nrows; ++i) {
            if (i == rank) continue;
            auto& row = rows[static_cast<std::size_t>(i)];
            const auto& factor = row[static_cast<std::size_t>(c)];
            if (f.is_zero(factor)) continue;
            auto mfac = f.neg(factor);
            for (int j = c; j < ncols; ++j)
                row[static_cast<std::size_t>(j)] =
                    f.add(row[static_cast<std::size_t>(j)],
                          f.mul(mfac, prow[static_cast<std::size_t>(j)]));
        }
        out.pivot_cols.push_back(c);
        ++rank;
    }
    out.rank = rank;
    out.rows.assign(rows.begin(), rows.begin() + rank);
    return out;
}

/* Fraction-free elimination over the rationals: rows are cleared to primitive
 * integer vectors, forward elimination is Bareiss (exact integer divisions,
 * no intermediate fractions), and only the final back-substitution to reduced
 * form reintroduces rationals. */
inline Rref<QField> rref_rows_q(QField f, std::vector<Vec<QField>>& qrows, int ncols) {
    int nrows = static_cast<int>(qrows.size());
    std::vector<std::vector<mpz_class>> a(static_cast<std::size_t>(nrows));
    for (int i = 0; i < nrows; ++i) {
        auto& row = a[static_cast<std::size_t>(i)];
        row.resize(static_cast<std::size_t>(ncols));
        mpz_class l = 1;
        for (const auto& x : qrows[static_cast<std::size_t>(i)]) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den().get_mpz_t());
        mpz_class g = 0;
        for (int j = 0; j < ncols; ++j) {
            const auto& x = qrows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            row[static_cast<std::size_t>(j)] = x.get_num() * (l / x.get_den());
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), row[static_cast<std::size_t>(j)].get_mpz_t());
        }
        if (g > 1)
            for (auto& x : row) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
    }

    Rref<QField> out;
    mpz_class prev = 1;
    int rank = 0;
    for (int c = 0; c < ncols && rank < nrows; ++c) {
        int pr = -1;
        for (int i = rank; i < nrows; ++i)
            if (a[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] != 0) {
                pr = i;
                break;
            }
        if (pr < 0) continue;
        std::swap(a[static_cast<std::size_t>(rank)], a[static_cast<std::size_t>(pr)]);
        const mpz_class piv = a[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c)];
        for (int i = rank + 1; i < nrows; ++i) {
            auto& row = a[static_cast<std::size_t>(i)];
            const mpz_class lead = row[static_cast<std::size_t>(c)];
            for (int j = c; j < ncols; ++j) {
                mpz_class t = piv * row[static_cast<std::size_t>(j)] -
                              lead * a[static_cast<std::size_t>(rank)][static_cast<std::size_t>(j)];
                mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
                row[static_cast<std::size_t>(j)] = t;
            }
        }
        out.pivot_cols.push_back(c);
        prev = piv;
        ++rank;
    }
    out.rank = rank;

    /* Exact back-substitution: normalize pivots to 1 and clear above. */
    out.rows.assign(static_cast<std::size_t>(rank), Vec<QField>(static_cast<std::size_t>(ncols), f.zero()));
    for (int i = 0; i < rank; ++i)
        for (int j = 0; j < ncols; ++j)
            out.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                mpq_class(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    for (int i = rank - 1; i >= 0; --i) {
        auto& row = out.rows[static_cast<std::size_t>(i)];
        int pc = out.pivot_cols[static_cast<std::size_t>(i)];
        mpq_class piv = row[static_cast<std::size_t>(pc)];
        for (int j = pc; j < ncols; ++j) row[static_cast<std::size_t>(j)] /= piv;
        for (int k = 0; k < i; ++k) {
            auto& upper = out.rows[static_cast<std::size_t>(k)];
            mpq_class factor = upper[static_cast<std::size_t>(pc)];
            if (factor == 0) continue;
            for (int j = pc; j < ncols; ++j)
                upper[static_cast<std::size_t>(j)] -= factor * row[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

template <class F>
Rref<F> rref_rows(F f, std::vector<Vec<F>>& rows, int ncols) {
    if constexpr (std::is_same_v<F, QField>)
        return rref_rows_q(f, rows, ncols);
    else
        return rref_rows_generic(f, rows, ncols);
}

/* Online sparse row elimination. Rows are sorted (index, value) lists without
 * explicit zeros. Pivot rows are kept in echelon form keyed by their leading
 * coordinate; back_substitute() finishes the reduction when fully reduced
 * rows are needed. The final pivot set and reduced rows depend only on the
 * row span, so feeding rows in any order matches the dense elimination. */
template <class F>
class SparseEliminator {
  public:
    using Elem = typename F::Elem;
    using Row = std::vector<std::pair<int, Elem>>;

    explicit SparseEliminator(F f) : f_(std::move(f)) {}

    /* v - c*r, both sorted; exact zeros are dropped. */
    Row axpy(const Row& v, const Elem& c, const Row& r) const {
        Row out;
        out.reserve(v.size() + r.size());
        std::size_t a = 0, b = 0;
        while (a < v.size() || b < r.size()) {
            if (b == r.size() || (a < v.size() && v[a].first < r[b].first)) {
                out.push_back(v[a++]);
            } else if (a == v.size() || r[b].first < v[a].first) {
                out.emplace_back(r[b].first, f_.neg(f_.mul(c, r[b].second)));
                ++b;
            } else {
                auto x = f_.sub(v[a].second, f_.mul(c, r[b].second));
                if (!f_.is_zero(x)) out.emplace_back(v[a].first, std::move(x));
                ++a, ++b;
            }
        }
        return out;
    }

    /* Eliminate every pivoted coordinate from v; empty result = dependent.
     * Eliminating at coordinate p only touches coordinates > p, so a single
     * left-to-right sweep suffices. */
    Row reduce(Row v) const {
        std::size_t k = 0;
        while (k < v.size()) {
            auto it = piv_.find(v[k].first);
            if (it == piv_.end()) {
                ++k;
                continue;
            }
            v = axpy(v, v[k].second, it->second);
        }
        return v;
    }

    /* Returns true when v was independent of the rows seen so far. */
    bool insert(Row v) {
        v = reduce(std::move(v));
        if (v.empty()) return false;
        const Elem lead_inv = f_.inv(v.front().second);
        for (auto& e : v) e.second = f_.mul(lead_inv, e.second);
        const int p = v.front().first;
        piv_.emplace(p, std::move(v));
        return true;
    }

    /* Clear the remaining pivoted coordinates from every row (idempotent).
     * Processing pivots in decreasing order keeps each elimination step
     * against an already-reduced row. */
    void back_substitute() {
        for (auto it = piv_.rbegin(); it != piv_.rend(); ++it) {
            Row& v = it->second;
            std::size_t k = 1; // entry 0 is the row's own pivot
            while (k < v.size()) {
                auto jt = piv_.find(v[k].first);
                if (jt == piv_.end()) {
                    ++k;
                    continue;
                }
                v = axpy(v, v[k].second, jt->second);
            }
        }
    }

    int rank() const { return static_cast<int>(piv_.size()); }
    const std::map<int, Row>& pivot_rows() const { return piv_; }

  private:
    F f_;
    std::map<int, Row> piv_;
};

/* The rows of m as sorted sparse index/value lists. */
template <class F>
std::vector<typename SparseEliminator<F>::Row> sparse_rows(const SparseMat<F>& m) {
    std::vector<typename SparseEliminator<F>::Row> rows(static_cast<std::size_t>(m.rows));
    for (int j = 0; j < m.cols; ++j)
        for (const auto& [i, v] : m.col[j]) rows[static_cast<std::size_t>(i)].emplace_back(j, v);
    return rows;
}

} // namespace detail

/* Reduced row echelon form of a sparse matrix (sparse elimination inside;
 * the returned rows are densified). */
template <class F>
Rref<F> rref(const SparseMat<F>& m) {
    detail::SparseEliminator<F> el(m.field);
    for (auto& row : detail::sparse_rows(m)) el.insert(std::move(row));
    el.back_substitute();
    Rref<F> out;
    out.rank = el.rank();
    out.pivot_cols.reserve(static_cast<std::size_t>(out.rank));
    out.rows.reserve(static_cast<std::size_t>(out.rank));
    for (const auto& [p, row] : el.pivot_rows()) {
        out.pivot_cols.push_back(p);
        Vec<F> dense(static_cast<std::size_t>(m.cols), m.field.zero());
        for (const auto& [j, v] : row) dense[static_cast<std::size_t>(j)] = v;
        out.rows.push_back(std::move(dense));
    }
    return out;
}

template <class F>
std::pair<int, std::vector<int>> rank_profile(const SparseMat<F>& m) {
    detail::SparseEliminator<F> el(m.field);
    for (auto& row : detail::sparse_rows(m)) el.insert(std::move(row));
    std::vector<int> pivots;
    pivots.reserve(static_cast<std::size_t>(el.rank()));
    for (const auto& kv : el.pivot_rows()) pivots.push_back(kv.first);
    return {el.rank(), std::move(pivots)};
}

template <class F>
int rank(const SparseMat<F>& m) {
    detail::SparseEliminator<F> el(m.field);
    for (auto& row : detail::sparse_rows(m)) el.insert(std::move(row));
    return el.rank();
}

/* Basis of the null space; columns ordered by free-column index. */
template <class F>
SparseMat<F> kernel_basis(const SparseMat<F>& m) {
    detail::SparseEliminator<F> el(m.field);
    for (auto& row : detail::sparse_rows(m)) el.insert(std::move(row));
    el.back_substitute();
    /* Map each free column to its output index. */
    std::vector<int> out_index(static_cast<std::size_t>(m.cols), -1);
    int nfree = 0;
    {
        auto it = el.pivot_rows().begin();
        for (int j = 0; j < m.cols; ++j) {
            if (it != el.pivot_rows().end() && it->first == j) {
                ++it;
                continue;
            }
            out_index[static_cast<std::size_t>(j)] = nfree++;
        }
    }
    SparseMat<F> k(m.field, m.cols, nfree);
    for (int j = 0; j < m.cols; ++j)
        if (out_index[static_cast<std::size_t>(j)] >= 0)
            k.add_at(j, out_index[static_cast<std::size_t>(j)], m.field.one());
    for (const auto& [p, row] : el.pivot_rows())
        for (const auto& [j, v] : row)
            if (j != p) k.add_at(p, out_index[static_cast<std::size_t>(j)], m.field.neg(v));
    return k;
}

/* The pivot columns of m, as a basis of its column space: exactly the
 * columns that are independent of all earlier ones. */
template <class F>
SparseMat<F> image_basis(const SparseMat<F>& m) {
    detail::SparseEliminator<F> el(m.field);
    std::vector<int> keep;
    for (int j = 0; j < m.cols; ++j)
        if (el.insert(m.col[j])) keep.push_back(j);
    return m.cols_subset(keep);
}

/* Basis of the intersection of the kernels of the given operators. */
template <class F>
SparseMat<F> common_kernel(F f, int dim, const std::vector<SparseMat<F>>& ops) {
    auto basis = SparseMat<F>::identity(f, dim);
    for (const auto& c : ops) {
        if (c.cols != dim) throw std::invalid_argument("common_kernel: operator width differs from the ambient");
        basis = basis * kernel_basis(c * basis);
        if (basis.cols == 0) break;
    }
    return basis;
}

/* span(a) <= span(b), decided by rank arithmetic. */
template <class F>
bool subspace_leq(const SparseMat<F>& a, const SparseMat<F>& b) {
    if (a.rows != b.rows) throw std::invalid_argument("subspace_leq: ambient dimensions differ");
    return rank(SparseMat<F>::hstack(b, a)) == rank(b);
}

/* Basis of span(a) ∩ span(b): kernel vectors (x, y) of [a | -b] give the
 * intersection elements a·x. */
template <class F>
SparseMat<F> intersect_columns(const SparseMat<F>& a, const SparseMat<F>& b) {
    if (a.rows != b.rows) throw std::invalid_argument("intersect_columns: ambient dimensions differ");
    auto k = kernel_basis(SparseMat<F>::hstack(a, -b));
    SparseMat<F> keep(a.field, a.cols, k.cols);
    for (int j = 0; j < k.cols; ++j) {
        Vec<F> x(static_cast<std::size_t>(a.cols), a.field.zero());
        auto full = k.column(j);
        for (int t = 0; t < a.cols; ++t) x[static_cast<std::size_t>(t)] = full[static_cast<std::size_t>(t)];
        keep.set_column(j, x);
    }
    return image_basis(a * keep);
}

/* Solves A x = b repeatedly against one elimination of [A | I]. */
template <class F>
class Solver {
  public:
    explicit Solver(const SparseMat<F>& a) : field_(a.field), acols_(a.cols), arows_(a.rows) {
        std::vector<Vec<F>> rows(static_cast<std::size_t>(a.rows),
                                 Vec<F>(static_cast<std::size_t>(a.cols + a.rows), field_.zero()));
        for (int j = 0; j < a.cols; ++j)
            for (const auto& [i, v] : a.col[j]) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
        for (int i = 0; i < a.rows; ++i)
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(a.cols + i)] = field_.one();
        auto full = detail::rref_rows(field_, rows, a.cols + a.rows);
        /* Rows whose pivot lies in the A-block describe the solution; rows with
         * pivot in the I-block witness left null combinations (consistency). */
        for (int i = 0; i < full.rank; ++i) {
            if (full.pivot_cols[static_cast<std::size_t>(i)] < acols_) {
                rank_ = i + 1;
                pivot_cols_.push_back(full.pivot_cols[static_cast<std::size_t>(i)]);
            }
        }
        rows_ = std::move(full.rows);
        nrows_stored_ = static_cast<int>(rows_.size());
    }

    int rank() const { return rank_; }
    const std::vector<int>& pivot_cols() const { return pivot_cols_; }

    std::optional<Vec<F>> solve(const Vec<F>& b) const {
        assert(static_cast<int>(b.size()) == arows_);
        Vec<F> x(static_cast<std::size_t>(acols_), field_.zero());
        /* c_i = (E b)_i where E is the recorded row-operation matrix. */
        for (int i = 0; i < nrows_stored_; ++i) {
            typename F::Elem c = field_.zero();
            const auto& row = rows_[static_cast<std::size_t>(i)];
            for (int t = 0; t < arows_; ++t) {
                const auto& e = row[static_cast<std::size_t>(acols_ + t)];
                if (!field_.is_zero(e) && !field_.is_zero(b[static_cast<std::size_t>(t)]))
                    c = field_.add(c, field_.mul(e, b[static_cast<std::size_t>(t)]));
            }
            if (i < rank_) {
                x[static_cast<std::size_t>(pivot_cols_[static_cast<std::size_t>(i)])] = c;
            } else if (!field_.is_zero(c)) {
                return std::nullopt; // inconsistent
            }
        }
        /* Rows of rank(A)..end have pivots in the I-block; anything the loop
         * above left in x already satisfies R x = E b on the A-block. */
        return x;
    }

    bool contains(const Vec<F>& b) const { return solve(b).has_value(); }

    std::optional<SparseMat<F>> solve_mat(const SparseMat<F>& b) const {
        assert(b.rows == arows_);
        SparseMat<F> x(field_, acols_, b.cols);
        for (int j = 0; j < b.cols; ++j) {
            auto s = solve(b.column(j));
            if (!s) return std::nullopt;
            x.set_column(j, *s);
        }
        return x;
    }

  private:
    F field_;
    int acols_;
    int arows_;
    int rank_ = 0;
    int nrows_stored_ = 0;
    std::vector<int> pivot_cols_;
    std::vector<Vec<F>> rows_;
};

template <class F>
std::optional<Vec<F>> solve(const SparseMat<F>& a, const Vec<F>& b) {
    return Solver<F>(a).solve(b);
}

/* Quotient of an ambient based space by the column span of `subspace`.
 * The section sends quotient basis classes to the standard basis vectors at
 * the non-pivot coordinates of the reduced subspace; projection subtracts the
 * unique subspace element matching on pivot coordinates. */
template <class F>
struct QuotientSpace {
    BasedSpace ambient;
    SparseMat<F> subspace_basis;
    BasedSpace quotient;
    LinearMap<F> projection; // ambient -> quotient
    LinearMap<F> section;    // quotient -> ambient
};

template <class F>
QuotientSpace<F> quotient_space(const BasedSpace& ambient, const SparseMat<F>& subspace) {
    if (subspace.rows != ambient.dim)
        throw std::invalid_argument("quotient_space: subspace rows != ambient dim");
    F f = subspace.field;
    const int n = ambient.dim;

    /* Reduce the subspace columns as sparse row vectors. */
    detail::SparseEliminator<F> el(f);
    for (int j = 0; j < subspace.cols; ++j) el.insert(subspace.col[j]);
    el.back_substitute();

    std::vector<bool> is_pivot(static_cast<std::size_t>(n), false);
    for (const auto& kv : el.pivot_rows()) is_pivot[static_cast<std::size_t>(kv.first)] = true;
    std::vector<int> comp; // coordinates indexing the complement
    std::vector<int> comp_index(static_cast<std::size_t>(n), -1);
    for (int t = 0; t < n; ++t)
        if (!is_pivot[static_cast<std::size_t>(t)]) {
            comp_index[static_cast<std::size_t>(t)] = static_cast<int>(comp.size());
            comp.push_back(t);
        }
    const int q = static_cast<int>(comp.size());

    std::vector<std::string> qlabels;
    qlabels.reserve(static_cast<std::size_t>(q));
    for (int t : comp) qlabels.push_back("[" + ambient.labels[static_cast<std::size_t>(t)] + "]");
    BasedSpace quot(q, std::move(qlabels));

    SparseMat<F> proj(f, q, n);
    for (int u = 0; u < q; ++u) proj.add_at(u, comp[static_cast<std::size_t>(u)], f.one());
    for (const auto& [pc, row] : el.pivot_rows())
        for (const auto& [t, v] : row)
            if (t != pc) proj.add_at(comp_index[static_cast<std::size_t>(t)], pc, f.neg(v));

    SparseMat<F> sect(f, n, q);
    for (int u = 0; u < q; ++u) sect.add_at(comp[static_cast<std::size_t>(u)], u, f.one());

    return QuotientSpace<F>{ambient, subspace, quot, LinearMap<F>(ambient, quot, std::move(proj)),
                            LinearMap<F>(quot, ambient, std::move(sect))};
}

/* dim ker(d_out) - rank(d_in) for a composable pair with d_out o d_in = 0. */
template <class F>
struct HomologyError {
    int witness_column;
};

template <class F>
int homology_dimension(const LinearMap<F>& d_in, const LinearMap<F>& d_out) {
    if (d_in.codomain.dim != d_out.domain.dim)
        throw std::invalid_argument("homology_dimension: maps not composable");
    auto comp = d_out.mat * d_in.mat;
    for (int j = 0; j < comp.cols; ++j)
        if (!comp.col[j].empty())
            throw std::domain_error("homology_dimension: d_out o d_in != 0 on domain basis vector " +
                                    std::to_string(j) + " (" + d_in.domain.labels[static_cast<std::size_t>(j)] + ")");
    int k = d_out.mat.cols - rank(d_out.mat);
    return k - rank(d_in.mat);
}

} // namespace crossed
