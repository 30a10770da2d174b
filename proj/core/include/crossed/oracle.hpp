#pragma once

// Brute-force ground truth. Everything in this header is computed directly
// from first definitions on explicit word spaces -- the normalized relative
// bar resolution of an algebra over a unital base subalgebra, the normalized
// Hochschild chain and cochain complexes with bimodule coefficients, the
// canonical mixed complex with the cyclic shuffle operator, and truncated
// cyclic / negative / periodic homology of mixed complexes. The fast
// constructions elsewhere in the library are validated against this module,
// so it deliberately shares no differential formulas with them.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crossed/crossed_system.hpp"

namespace crossed {

/* ------------------------------------------------------------------ */
/* budget guard                                                        */

struct budget_error : std::runtime_error {
    long required;
    explicit budget_error(long req)
        : std::runtime_error("budget exceeded: this computation needs a budget of at least " +
                             std::to_string(req) + " ambient dimensions"),
          required(req) {}
};

inline void guard_budget(long need, long budget) {
    if (budget > 0 && need > budget) throw budget_error(need);
}

namespace oracle_detail {

inline long int_power(int base, int exp) {
    long total = 1;
    for (int t = 0; t < exp; ++t) total *= base;
    return total;
}

/* Tensor power of a space, with word labels. */
inline BasedSpace word_space(const BasedSpace& s, int w) {
    return tensor_space(std::vector<BasedSpace>(static_cast<std::size_t>(w), s));
}

template <class F>
SparseMat<F> column_matrix(F f, const Vec<F>& v) {
    return SparseMat<F>::from_columns(f, static_cast<int>(v.size()), {v});
}

/* Relation columns in an algebra word space E^{(x)w}: junction relations
 * over the base subalgebra at every adjacent pair, plus full kills of the
 * slots in [kill_lo, kill_hi). */
template <class F>
SparseMat<F> word_relations(F f, const Algebra<F>& e, const SparseMat<F>& base, int w,
                            int kill_lo, int kill_hi) {
    const int d = e.space.dim;
    std::vector<int> dims(static_cast<std::size_t>(w), d);
    SparseMat<F> rel(f, static_cast<int>(int_power(d, w)), 0);
    for (int i = 0; i + 1 < w; ++i)
        for (int t = 0; t < base.cols; ++t) {
            auto lam = base.column(t);
            auto cols = embed_at_slot(f, dims, static_cast<std::size_t>(i), e.right_mult_operator(lam)) -
                        embed_at_slot(f, dims, static_cast<std::size_t>(i + 1), e.left_mult_operator(lam));
            rel = SparseMat<F>::hstack(rel, cols);
        }
    for (int i = kill_lo; i < kill_hi; ++i) {
        auto span_dims = dims;
        span_dims[static_cast<std::size_t>(i)] = base.cols;
        rel = SparseMat<F>::hstack(rel, embed_at_slot(f, span_dims, static_cast<std::size_t>(i), base));
    }
    return rel;
}

/* Merge the adjacent slots i, i+1 of a w-fold all-equal word with a two-slot
 * operator (e.g. a multiplication map). */
template <class F>
SparseMat<F> merge_slots(F f, int d, int w, int i, const SparseMat<F>& op) {
    std::vector<int> dims;
    dims.reserve(static_cast<std::size_t>(w - 1));
    for (int t = 0; t < w - 1; ++t) dims.push_back(t == i ? d * d : d);
    return embed_at_slot(f, dims, static_cast<std::size_t>(i), op);
}

/* Permutation matrices cycling one factor through the word. */
template <class F>
SparseMat<F> rotate_first_to_back(F f, std::vector<int> dims) {
    long total = 1;
    for (int t : dims) total *= t;
    auto acc = SparseMat<F>::identity(f, static_cast<int>(total));
    for (std::size_t t = 0; t + 1 < dims.size(); ++t) {
        acc = swap_factors(f, dims, t) * acc;
        std::swap(dims[t], dims[t + 1]);
    }
    return acc;
}

template <class F>
SparseMat<F> rotate_last_to_front(F f, std::vector<int> dims) {
    long total = 1;
    for (int t : dims) total *= t;
    auto acc = SparseMat<F>::identity(f, static_cast<int>(total));
    for (int t = static_cast<int>(dims.size()) - 2; t >= 0; --t) {
        acc = swap_factors(f, dims, static_cast<std::size_t>(t)) * acc;
        std::swap(dims[static_cast<std::size_t>(t)], dims[static_cast<std::size_t>(t + 1)]);
    }
    return acc;
}

/* Validate and normalize a base-subalgebra span inside an algebra. */
template <class F>
SparseMat<F> checked_base(const Algebra<F>& e, const SparseMat<F>& base_span, const char* who) {
    if (!e.unit) throw std::invalid_argument(std::string(who) + ": algebra must be unital");
    if (base_span.rows != e.space.dim)
        throw std::invalid_argument(std::string(who) + ": base span does not live in the algebra");
    auto base = image_basis(base_span);
    Solver<F> in_base(base);
    if (!in_base.contains(e.unit_vec()))
        throw std::invalid_argument(std::string(who) + ": base subalgebra does not contain the unit");
    for (int i = 0; i < base.cols; ++i)
        for (int j = 0; j < base.cols; ++j)
            if (!in_base.contains(e.multiply(base.column(i), base.column(j))))
                throw std::invalid_argument(std::string(who) + ": base span is not closed under multiplication");
    return base;
}

template <class F>
void require_bimodule_over(const BimoduleStructure<F>& m, const Algebra<F>& e, const char* who) {
    if (m.left_alg.space.dim != e.space.dim || !(m.left_alg.mult.mat == e.mult.mat) ||
        m.right_alg.space.dim != e.space.dim || !(m.right_alg.mult.mat == e.mult.mat))
        throw std::invalid_argument(std::string(who) + ": coefficients are not a bimodule over the given algebra");
}

} // namespace oracle_detail

/* ------------------------------------------------------------------ */
/* normalized relative bar resolution                                  */

template <class F>
struct BarResolution {
    F field;
    int N = 0; // spaces stored for degrees 0..N+1
    Algebra<F> E;
    SparseMat<F> base;        // basis of the unital base subalgebra inside E
    QuotientSpace<F> reduced; // E / base
    std::vector<QuotientSpace<F>> spaces;
    std::vector<LinearMap<F>> bprime; // bprime[0]: B_0 -> E (augmentation); bprime[n]: B_n -> B_{n-1}
    std::vector<LinearMap<F>> xi;     // xi[0]: E -> B_0; xi[n]: B_{n-1} -> B_n

    const QuotientSpace<F>& space(int n) const {
        if (n < 0 || n >= static_cast<int>(spaces.size()))
            throw std::out_of_range("bar resolution: degree " + std::to_string(n) +
                                    " is outside the truncation");
        return spaces[static_cast<std::size_t>(n)];
    }
    const LinearMap<F>& differential(int n) const {
        if (n < 0 || n >= static_cast<int>(bprime.size()))
            throw std::out_of_range("bar resolution: differential " + std::to_string(n) +
                                    " is outside the truncation");
        return bprime[static_cast<std::size_t>(n)];
    }
    const LinearMap<F>& contraction(int n) const {
        if (n < 0 || n >= static_cast<int>(xi.size()))
            throw std::out_of_range("bar resolution: contraction " + std::to_string(n) +
                                    " is outside the truncation");
        return xi[static_cast<std::size_t>(n)];
    }
};

template <class F>
BarResolution<F> bar_resolution(const Algebra<F>& E, const SparseMat<F>& base_span, int N,
                                long budget = 0) {
    F f = E.field;
    auto base = oracle_detail::checked_base(E, base_span, "bar_resolution");
    const int d = E.space.dim;

    BarResolution<F> R{f, N, E, base, quotient_space(E.space, base), {}, {}, {}};
    std::vector<BasedSpace> ambients;
    for (int n = 0; n <= N + 1; ++n) {
        long need = oracle_detail::int_power(d, n + 2);
        guard_budget(need, budget);
        ambients.push_back(oracle_detail::word_space(E.space, n + 2));
        auto rel = oracle_detail::word_relations(f, E, base, n + 2, 1, n + 1);
        R.spaces.push_back(quotient_space(ambients.back(), rel));
    }

    /* augmentation and bar differentials */
    R.bprime.push_back(descend_domain(LinearMap<F>(ambients[0], E.space, E.mult.mat), R.spaces[0]));
    for (int n = 1; n <= N + 1; ++n) {
        SparseMat<F> bmat(f, static_cast<int>(oracle_detail::int_power(d, n + 1)),
                          static_cast<int>(oracle_detail::int_power(d, n + 2)));
        for (int i = 0; i <= n; ++i) {
            auto term = oracle_detail::merge_slots(f, d, n + 2, i, E.mult.mat);
            bmat = (i % 2 == 0) ? bmat + term : bmat - term;
        }
        R.bprime.push_back(induced_on_quotients(
            LinearMap<F>(ambients[static_cast<std::size_t>(n)], ambients[static_cast<std::size_t>(n - 1)], bmat),
            R.spaces[static_cast<std::size_t>(n)], R.spaces[static_cast<std::size_t>(n - 1)]));
    }

    /* contracting homotopy: append the unit on the right, alternating sign */
    auto unit_col = oracle_detail::column_matrix(f, E.unit_vec());
    R.xi.push_back(LinearMap<F>(E.space, R.spaces[0].quotient,
                                R.spaces[0].projection.mat *
                                    SparseMat<F>::kron(SparseMat<F>::identity(f, d), unit_col)));
    for (int n = 1; n <= N + 1; ++n) {
        auto app = SparseMat<F>::kron(
            SparseMat<F>::identity(f, static_cast<int>(oracle_detail::int_power(d, n + 1))), unit_col);
        if (n % 2 == 1) app = -app;
        R.xi.push_back(induced_on_quotients(
            LinearMap<F>(ambients[static_cast<std::size_t>(n - 1)], ambients[static_cast<std::size_t>(n)], app),
            R.spaces[static_cast<std::size_t>(n - 1)], R.spaces[static_cast<std::size_t>(n)]));
    }

    /* self-checks: complex, and contraction identities through degree N */
    for (int n = 1; n <= N + 1; ++n)
        if (!(R.bprime[static_cast<std::size_t>(n - 1)].mat * R.bprime[static_cast<std::size_t>(n)].mat)
                 .is_zero())
            throw std::logic_error("bar resolution self-check failed: differential square at degree " +
                                   std::to_string(n));
    if (!(R.bprime[0].mat * R.xi[0].mat == SparseMat<F>::identity(f, d)))
        throw std::logic_error("bar resolution self-check failed: contraction onto the algebra");
    for (int n = 0; n <= N; ++n) {
        auto lhs = R.xi[static_cast<std::size_t>(n)].mat * R.bprime[static_cast<std::size_t>(n)].mat +
                   R.bprime[static_cast<std::size_t>(n + 1)].mat * R.xi[static_cast<std::size_t>(n + 1)].mat;
        if (!(lhs == SparseMat<F>::identity(f, R.spaces[static_cast<std::size_t>(n)].quotient.dim)))
            throw std::logic_error("bar resolution self-check failed: contraction identity at degree " +
                                   std::to_string(n));
    }
    return R;
}

/* ------------------------------------------------------------------ */
/* normalized Hochschild chain complex                                 */

template <class F>
struct HochschildChainOracle {
    F field;
    int N = 0;
    Algebra<F> E;
    SparseMat<F> base;
    BimoduleStructure<F> M;
    std::vector<QuotientSpace<F>> spaces; // C_0..C_N
    std::vector<LinearMap<F>> b;          // b[0]: C_0 -> (0); b[n]: C_n -> C_{n-1}

    const QuotientSpace<F>& space(int n) const {
        if (n < 0 || n >= static_cast<int>(spaces.size()))
            throw std::out_of_range("hochschild chains: degree " + std::to_string(n) +
                                    " is outside the truncation");
        return spaces[static_cast<std::size_t>(n)];
    }
    const LinearMap<F>& boundary(int n) const {
        if (n < 0 || n >= static_cast<int>(b.size()))
            throw std::out_of_range("hochschild chains: boundary " + std::to_string(n) +
                                    " is outside the truncation");
        return b[static_cast<std::size_t>(n)];
    }
    int homology(int n) const {
        if (n < 0 || n + 1 > N)
            throw std::out_of_range("hochschild homology at degree " + std::to_string(n) +
                                    " needs a truncation of at least " + std::to_string(n + 1));
        return homology_dimension(b[static_cast<std::size_t>(n + 1)], b[static_cast<std::size_t>(n)]);
    }
};

namespace oracle_detail {

/* Relations presenting C_n = (M (x) E^{(x)n}) / [junctions over the base +
 * trailing-to-leading cyclic junction + degenerate words]. */
template <class F>
SparseMat<F> cyclic_word_relations(F f, const Algebra<F>& e, const BimoduleStructure<F>& m,
                                   const SparseMat<F>& base, int n) {
    const int d = e.space.dim, dm = m.space.dim;
    std::vector<int> dims;
    dims.push_back(dm);
    for (int t = 0; t < n; ++t) dims.push_back(d);
    long total = dm * int_power(d, n);
    SparseMat<F> rel(f, static_cast<int>(total), 0);
    auto idm = SparseMat<F>::identity(f, dm);
    for (int t = 0; t < base.cols; ++t) {
        auto lam = base.column(t);
        auto lamcol = column_matrix(f, lam);
        auto rmul_m = m.right_action.mat * SparseMat<F>::kron(idm, lamcol);
        auto lmul_m = m.left_action.mat * SparseMat<F>::kron(lamcol, idm);
        if (n == 0) {
            rel = SparseMat<F>::hstack(rel, lmul_m - rmul_m);
            continue;
        }
        rel = SparseMat<F>::hstack(rel, embed_at_slot(f, dims, 0, rmul_m) -
                                            embed_at_slot(f, dims, 1, e.left_mult_operator(lam)));
        for (int i = 1; i + 1 <= n; ++i)
            rel = SparseMat<F>::hstack(
                rel, embed_at_slot(f, dims, static_cast<std::size_t>(i), e.right_mult_operator(lam)) -
                         embed_at_slot(f, dims, static_cast<std::size_t>(i + 1), e.left_mult_operator(lam)));
        rel = SparseMat<F>::hstack(rel, embed_at_slot(f, dims, static_cast<std::size_t>(n),
                                                      e.right_mult_operator(lam)) -
                                            embed_at_slot(f, dims, 0, lmul_m));
    }
    for (int i = 1; i <= n; ++i) {
        auto span_dims = dims;
        span_dims[static_cast<std::size_t>(i)] = base.cols;
        rel = SparseMat<F>::hstack(rel, embed_at_slot(f, span_dims, static_cast<std::size_t>(i), base));
    }
    return rel;
}

/* The Hochschild boundary on the ambient word space M (x) E^{(x)n}. */
template <class F>
SparseMat<F> hochschild_boundary_ambient(F f, const Algebra<F>& e, const BimoduleStructure<F>& m,
                                         int n) {
    const int d = e.space.dim, dm = m.space.dim;
    SparseMat<F> out(f, static_cast<int>(dm * int_power(d, n - 1)),
                     static_cast<int>(dm * int_power(d, n)));
    { /* merge the module with the first algebra entry */
        std::vector<int> dims2;
        dims2.push_back(dm * d);
        for (int t = 0; t < n - 1; ++t) dims2.push_back(d);
        out = out + embed_at_slot(f, dims2, 0, m.right_action.mat);
    }
    for (int i = 1; i + 1 <= n; ++i) { /* merge algebra entries i, i+1 */
        std::vector<int> dims2;
        dims2.push_back(dm);
        for (int t = 1; t < n; ++t) dims2.push_back(t == i ? d * d : d);
        auto term = embed_at_slot(f, dims2, static_cast<std::size_t>(i), e.mult.mat);
        out = (i % 2 == 0) ? out + term : out - term;
    }
    { /* wrap the last entry around to act on the left */
        std::vector<int> dims;
        dims.push_back(dm);
        for (int t = 0; t < n; ++t) dims.push_back(d);
        auto rot = rotate_last_to_front(f, dims);
        std::vector<int> dims2;
        dims2.push_back(d * dm);
        for (int t = 0; t < n - 1; ++t) dims2.push_back(d);
        auto term = embed_at_slot(f, dims2, 0, m.left_action.mat) * rot;
        out = (n % 2 == 0) ? out + term : out - term;
    }
    return out;
}

} // namespace oracle_detail

template <class F>
HochschildChainOracle<F> normalized_hochschild_chains(const Algebra<F>& E,
                                                      const SparseMat<F>& base_span,
                                                      const BimoduleStructure<F>& M, int N,
                                                      long budget = 0) {
    F f = E.field;
    auto base = oracle_detail::checked_base(E, base_span, "normalized_hochschild_chains");
    oracle_detail::require_bimodule_over(M, E, "normalized_hochschild_chains");
    const int d = E.space.dim, dm = M.space.dim;

    HochschildChainOracle<F> C{f, N, E, base, M, {}, {}};
    std::vector<BasedSpace> ambients;
    for (int n = 0; n <= N; ++n) {
        long need = dm * oracle_detail::int_power(d, n);
        guard_budget(need, budget);
        std::vector<BasedSpace> factors{M.space};
        for (int t = 0; t < n; ++t) factors.push_back(E.space);
        ambients.push_back(tensor_space(factors));
        C.spaces.push_back(quotient_space(
            ambients.back(), oracle_detail::cyclic_word_relations(f, E, M, base, n)));
    }

    BasedSpace zero_space(0, std::vector<std::string>{});
    C.b.push_back(LinearMap<F>::zero(f, C.spaces[0].quotient, zero_space));
    for (int n = 1; n <= N; ++n) {
        auto bmat = oracle_detail::hochschild_boundary_ambient(f, E, M, n);
        C.b.push_back(induced_on_quotients(
            LinearMap<F>(ambients[static_cast<std::size_t>(n)], ambients[static_cast<std::size_t>(n - 1)], bmat),
            C.spaces[static_cast<std::size_t>(n)], C.spaces[static_cast<std::size_t>(n - 1)]));
    }
    for (int n = 2; n <= N; ++n)
        if (!(C.b[static_cast<std::size_t>(n - 1)].mat * C.b[static_cast<std::size_t>(n)].mat).is_zero())
            throw std::logic_error("hochschild chain self-check failed: boundary square at degree " +
                                   std::to_string(n));
    return C;
}

template <class F>
std::vector<int> homology_table(const HochschildChainOracle<F>& c, int up_to) {
    std::vector<int> t;
    for (int n = 0; n <= up_to; ++n) t.push_back(c.homology(n));
    return t;
}

/* ------------------------------------------------------------------ */
/* normalized Hochschild cochain complex                               */

template <class F>
struct HochschildCochainOracle {
    F field;
    int N = 0;
    Algebra<F> E;
    SparseMat<F> base;
    BimoduleStructure<F> M;
    std::vector<QuotientSpace<F>> words;     // T_n = reduced word space, quotient of E^{(x)n}
    std::vector<SparseMat<F>> cochain_basis; // basis[n]: (dim M * dim T_n) x c_n
    std::vector<LinearMap<F>> d;             // d[n]: C^n -> C^{n+1}, n = 0..N-1

    int dim(int n) const {
        if (n < 0 || n >= static_cast<int>(cochain_basis.size()))
            throw std::out_of_range("hochschild cochains: degree " + std::to_string(n) +
                                    " is outside the truncation");
        return cochain_basis[static_cast<std::size_t>(n)].cols;
    }
    int cohomology(int n) const {
        if (n < 0 || n > N - 1)
            throw std::out_of_range("hochschild cohomology at degree " + std::to_string(n) +
                                    " needs a truncation of at least " + std::to_string(n + 1));
        int kernel = d[static_cast<std::size_t>(n)].mat.cols - rank(d[static_cast<std::size_t>(n)].mat);
        if (n == 0) return kernel;
        return kernel - rank(d[static_cast<std::size_t>(n - 1)].mat);
    }
};

namespace oracle_detail {

/* Coboundary of the functional with matrix `a_red` (module x reduced words),
 * written out on the ambient word space E^{(x)(n+1)}. */
template <class F>
SparseMat<F> cochain_coboundary_ambient(F f, const Algebra<F>& e, const BimoduleStructure<F>& m,
                                        const SparseMat<F>& a_amb, int n) {
    const int d = e.space.dim;
    SparseMat<F> out = m.left_action.mat *
                       SparseMat<F>::kron(SparseMat<F>::identity(f, d), a_amb);
    for (int j = 0; j + 1 <= n; ++j) {
        auto term = a_amb * merge_slots(f, d, n + 1, j, e.mult.mat);
        out = (j % 2 == 0) ? out - term : out + term; /* merging entries j+1, j+2 carries (-1)^{j+1} */
    }
    {
        auto term = m.right_action.mat * SparseMat<F>::kron(a_amb, SparseMat<F>::identity(f, d));
        out = (n % 2 == 0) ? out - term : out + term; /* sign (-1)^{n+1} */
    }
    return out;
}

} // namespace oracle_detail

template <class F>
HochschildCochainOracle<F> normalized_hochschild_cochains(const Algebra<F>& E,
                                                          const SparseMat<F>& base_span,
                                                          const BimoduleStructure<F>& M, int N,
                                                          long budget = 0) {
    F f = E.field;
    auto base = oracle_detail::checked_base(E, base_span, "normalized_hochschild_cochains");
    oracle_detail::require_bimodule_over(M, E, "normalized_hochschild_cochains");
    const int d = E.space.dim, dm = M.space.dim;
    auto idm = SparseMat<F>::identity(f, dm);

    HochschildCochainOracle<F> C{f, N, E, base, M, {}, {}, {}};
    for (int n = 0; n <= N; ++n) {
        guard_budget(dm * oracle_detail::int_power(d, n), budget);
        C.words.push_back(quotient_space(oracle_detail::word_space(E.space, n),
                                         oracle_detail::word_relations(f, E, base, n, 0, n)));
        const int t = C.words.back().quotient.dim;

        std::vector<SparseMat<F>> constraints;
        for (int s = 0; s < base.cols; ++s) {
            auto lam = base.column(s);
            auto lamcol = oracle_detail::column_matrix(f, lam);
            auto lact = M.left_action.mat * SparseMat<F>::kron(lamcol, idm);
            auto ract = M.right_action.mat * SparseMat<F>::kron(idm, lamcol);
            if (n == 0) {
                constraints.push_back(lact - ract);
                continue;
            }
            std::vector<int> dims(static_cast<std::size_t>(n), d);
            auto lmul_words = induced_on_quotients(
                LinearMap<F>(C.words.back().ambient, C.words.back().ambient,
                             embed_at_slot(f, dims, 0, E.left_mult_operator(lam))),
                C.words.back(), C.words.back());
            auto rmul_words = induced_on_quotients(
                LinearMap<F>(C.words.back().ambient, C.words.back().ambient,
                             embed_at_slot(f, dims, static_cast<std::size_t>(n - 1),
                                           E.right_mult_operator(lam))),
                C.words.back(), C.words.back());
            auto it = SparseMat<F>::identity(f, t);
            constraints.push_back(SparseMat<F>::kron(it, lact) -
                                  SparseMat<F>::kron(lmul_words.mat.transpose(), idm));
            constraints.push_back(SparseMat<F>::kron(rmul_words.mat.transpose(), idm) -
                                  SparseMat<F>::kron(it, ract));
        }
        C.cochain_basis.push_back(common_kernel(f, dm * t, constraints));
    }

    for (int n = 0; n + 1 <= N; ++n) {
        const int tn = C.words[static_cast<std::size_t>(n)].quotient.dim;
        const int cn = C.cochain_basis[static_cast<std::size_t>(n)].cols;
        const int cn1 = C.cochain_basis[static_cast<std::size_t>(n + 1)].cols;
        Solver<F> next(C.cochain_basis[static_cast<std::size_t>(n + 1)]);
        SparseMat<F> dn(f, cn1, cn);
        for (int j = 0; j < cn; ++j) {
            /* unflatten the basis vector into a (module x words) matrix */
            auto flat = C.cochain_basis[static_cast<std::size_t>(n)].column(j);
            SparseMat<F> A(f, dm, tn);
            for (int col = 0; col < tn; ++col)
                for (int row = 0; row < dm; ++row) {
                    const auto& v = flat[static_cast<std::size_t>(col * dm + row)];
                    if (!f.is_zero(v)) A.add_at(row, col, v);
                }
            auto a_amb = A * C.words[static_cast<std::size_t>(n)].projection.mat;
            auto amb = oracle_detail::cochain_coboundary_ambient(f, E, M, a_amb, n);
            if (!(amb * C.words[static_cast<std::size_t>(n + 1)].subspace_basis).is_zero())
                throw std::logic_error("hochschild cochain self-check failed: coboundary is not "
                                       "defined on reduced words at degree " +
                                       std::to_string(n));
            auto value = amb * C.words[static_cast<std::size_t>(n + 1)].section.mat;
            Vec<F> vec_value(static_cast<std::size_t>(dm * value.cols), f.zero());
            for (int col = 0; col < value.cols; ++col) {
                auto vcol = value.column(col);
                for (int row = 0; row < dm; ++row)
                    vec_value[static_cast<std::size_t>(col * dm + row)] = vcol[static_cast<std::size_t>(row)];
            }
            auto coords = next.solve(vec_value);
            if (!coords)
                throw std::logic_error("hochschild cochain self-check failed: coboundary left the "
                                       "constrained space at degree " +
                                       std::to_string(n));
            dn.set_column(j, *coords);
        }
        C.d.push_back(LinearMap<F>(BasedSpace(cn, "c"), BasedSpace(cn1, "c"), std::move(dn)));
    }
    for (int n = 0; n + 2 <= N; ++n)
        if (!(C.d[static_cast<std::size_t>(n + 1)].mat * C.d[static_cast<std::size_t>(n)].mat).is_zero())
            throw std::logic_error("hochschild cochain self-check failed: coboundary square at degree " +
                                   std::to_string(n));
    return C;
}

template <class F>
std::vector<int> cohomology_table(const HochschildCochainOracle<F>& c, int up_to) {
    std::vector<int> t;
    for (int n = 0; n <= up_to; ++n) t.push_back(c.cohomology(n));
    return t;
}

/* ------------------------------------------------------------------ */
/* mixed complexes and their truncated totalizations                   */

template <class F>
struct MixedComplex {
    F field;
    int N = 0;
    std::vector<BasedSpace> spaces;  // degrees 0..N
    std::vector<LinearMap<F>> b;     // b[0]: X_0 -> (0); b[n]: X_n -> X_{n-1}
    std::vector<LinearMap<F>> B;     // B[n]: X_n -> X_{n+1}, n = 0..N-1
};

template <class F>
CheckResult check_mixed_complex(const MixedComplex<F>& mc) {
    for (int n = 2; n <= mc.N; ++n)
        if (!(mc.b[static_cast<std::size_t>(n - 1)].mat * mc.b[static_cast<std::size_t>(n)].mat).is_zero())
            return CheckResult::fail("lowering square fails at degree " + std::to_string(n));
    for (int n = 0; n + 2 <= mc.N; ++n)
        if (!(mc.B[static_cast<std::size_t>(n + 1)].mat * mc.B[static_cast<std::size_t>(n)].mat).is_zero())
            return CheckResult::fail("raising square fails at degree " + std::to_string(n));
    for (int n = 0; n + 1 <= mc.N; ++n) {
        auto anti = mc.b[static_cast<std::size_t>(n + 1)].mat * mc.B[static_cast<std::size_t>(n)].mat;
        if (n >= 1)
            anti = anti + mc.B[static_cast<std::size_t>(n - 1)].mat * mc.b[static_cast<std::size_t>(n)].mat;
        if (!anti.is_zero())
            return CheckResult::fail("anticommutation fails at degree " + std::to_string(n));
    }
    return CheckResult::pass();
}

namespace oracle_detail {

/* Block matrix of the totalized differential between column lists given as
 * degree lists; the lowering part keeps the formal-variable power, the
 * raising part lowers it, which in degree bookkeeping means: degree m blocks
 * map to degree m-1 (lowering) and m+1 (raising) wherever those degrees
 * appear in the target list. */
template <class F>
SparseMat<F> totalized_differential(const MixedComplex<F>& mc, const std::vector<int>& src,
                                    const std::vector<int>& tgt) {
    F f = mc.field;
    long rows = 0, cols = 0;
    std::vector<long> roff, coff;
    for (int m : tgt) {
        roff.push_back(rows);
        rows += mc.spaces[static_cast<std::size_t>(m)].dim;
    }
    for (int m : src) {
        coff.push_back(cols);
        cols += mc.spaces[static_cast<std::size_t>(m)].dim;
    }
    auto tgt_offset = [&](int degree) -> std::optional<long> {
        for (std::size_t t = 0; t < tgt.size(); ++t)
            if (tgt[t] == degree) return roff[t];
        return std::nullopt;
    };
    SparseMat<F> out(f, static_cast<int>(rows), static_cast<int>(cols));
    auto add_block = [&](long r0, long c0, const SparseMat<F>& blk) {
        for (int j = 0; j < blk.cols; ++j)
            for (const auto& [i, v] : blk.col[static_cast<std::size_t>(j)])
                out.add_at(static_cast<int>(r0) + i, static_cast<int>(c0) + j, v);
    };
    for (std::size_t s = 0; s < src.size(); ++s) {
        int m = src[s];
        if (m >= 1)
            if (auto r0 = tgt_offset(m - 1)) add_block(*r0, coff[s], mc.b[static_cast<std::size_t>(m)].mat);
        if (m + 1 <= mc.N)
            if (auto r0 = tgt_offset(m + 1)) add_block(*r0, coff[s], mc.B[static_cast<std::size_t>(m)].mat);
    }
    return out;
}

inline std::vector<int> descending_degrees(int top) {
    std::vector<int> v;
    for (int t = top; t >= 0; t -= 2) v.push_back(t);
    return v;
}

inline std::vector<int> ascending_degrees(int from, int window, int cap) {
    std::vector<int> v;
    for (int j = 0; j <= window; ++j) {
        int m = from + 2 * j;
        if (m >= 0 && m <= cap) v.push_back(m);
    }
    return v;
}

inline std::vector<int> parity_degrees(int like, int window, int cap) {
    std::vector<int> v;
    int start = ((like % 2) + 2) % 2;
    int top = like + 2 * window;
    for (int m = start; m <= top && m <= cap; m += 2) v.push_back(m);
    return v;
}

} // namespace oracle_detail

/* Cyclic homology of the truncated mixed complex; exact within truncation. */
template <class F>
int hc_dimension(const MixedComplex<F>& mc, int n) {
    if (n < 0) throw std::invalid_argument("hc_dimension: negative degree");
    if (n + 1 > mc.N)
        throw std::out_of_range("hc_dimension at degree " + std::to_string(n) +
                                " needs a truncation of at least " + std::to_string(n + 1));
    auto dn = oracle_detail::totalized_differential(mc, oracle_detail::descending_degrees(n),
                                                    oracle_detail::descending_degrees(n - 1));
    auto dn1 = oracle_detail::totalized_differential(mc, oracle_detail::descending_degrees(n + 1),
                                                     oracle_detail::descending_degrees(n));
    return (dn.cols - rank(dn)) - rank(dn1);
}

template <class F>
std::vector<int> hc_table(const MixedComplex<F>& mc, int up_to) {
    std::vector<int> t;
    for (int n = 0; n <= up_to; ++n) t.push_back(hc_dimension(mc, n));
    return t;
}

/* Negative / periodic variants carry a stability certificate: the reported
 * dimension is trustworthy only if shrinking the column window by one does
 * not change it. */
struct StabilizedDim {
    int dim = 0;
    bool stable = false;
};

namespace oracle_detail {

template <class F>
StabilizedDim windowed_dimension(const MixedComplex<F>& mc, int n, bool periodic) {
    int window = (mc.N - n - 1) / 2;
    auto degrees = [&](int m, int w) {
        return periodic ? parity_degrees(m, (m - n) / 2 + w, mc.N)
                        : ascending_degrees(m, w, mc.N);
    };
    auto dim_with = [&](int w) -> int {
        auto dn = totalized_differential(mc, degrees(n, w), degrees(n - 1, w));
        auto dn1 = totalized_differential(mc, degrees(n + 1, w), degrees(n, w));
        return (dn.cols - rank(dn)) - rank(dn1);
    };
    if (window < 0) return {0, false};
    StabilizedDim out;
    out.dim = dim_with(window);
    out.stable = window >= 1 && dim_with(window - 1) == out.dim;
    return out;
}

} // namespace oracle_detail

template <class F>
StabilizedDim hn_dimension(const MixedComplex<F>& mc, int n) {
    if (n < 0) throw std::invalid_argument("hn_dimension: negative degree");
    return oracle_detail::windowed_dimension(mc, n, false);
}

template <class F>
StabilizedDim hp_dimension(const MixedComplex<F>& mc, int n) {
    if (n < 0) throw std::invalid_argument("hp_dimension: negative degree");
    return oracle_detail::windowed_dimension(mc, n, true);
}

/* ------------------------------------------------------------------ */
/* canonical mixed complex of an algebra over a base subalgebra        */

template <class F>
struct CanonicalMixedOracle {
    HochschildChainOracle<F> chains;
    MixedComplex<F> mixed;
};

template <class F>
CanonicalMixedOracle<F> canonical_mixed(const Algebra<F>& E, const SparseMat<F>& base_span, int N,
                                        long budget = 0) {
    auto chains = normalized_hochschild_chains(E, base_span, regular_bimodule(E), N, budget);
    F f = E.field;
    const int d = E.space.dim;

    MixedComplex<F> mc{f, N, {}, chains.b, {}};
    for (int n = 0; n <= N; ++n) mc.spaces.push_back(chains.spaces[static_cast<std::size_t>(n)].quotient);

    auto prepend_unit = [&](int width) {
        return SparseMat<F>::kron(oracle_detail::column_matrix(f, E.unit_vec()),
                                  SparseMat<F>::identity(f, width));
    };
    for (int n = 0; n + 1 <= N; ++n) {
        const int width = static_cast<int>(oracle_detail::int_power(d, n + 1));
        std::vector<int> dims(static_cast<std::size_t>(n + 1), d);
        auto rot1 = oracle_detail::rotate_first_to_back(f, dims);
        auto prep = prepend_unit(width);
        SparseMat<F> acc = SparseMat<F>::identity(f, width);
        SparseMat<F> Bamb(f, width * d, width);
        for (int i = 0; i <= n; ++i) {
            auto term = prep * acc;
            Bamb = ((i * n) % 2 == 0) ? Bamb + term : Bamb - term;
            acc = rot1 * acc;
        }
        mc.B.push_back(induced_on_quotients(
            LinearMap<F>(chains.spaces[static_cast<std::size_t>(n)].ambient,
                         chains.spaces[static_cast<std::size_t>(n + 1)].ambient, Bamb),
            chains.spaces[static_cast<std::size_t>(n)], chains.spaces[static_cast<std::size_t>(n + 1)]));
    }

    auto ok = check_mixed_complex(mc);
    if (!ok.ok)
        throw std::logic_error("canonical mixed complex self-check failed: " + ok.witness);
    return CanonicalMixedOracle<F>{std::move(chains), std::move(mc)};
}

/* ------------------------------------------------------------------ */
/* dimension comparison reports                                        */

struct DimensionComparison {
    std::string label;
    std::vector<int> left;
    std::vector<int> right;

    bool pass() const {
        if (left.size() != right.size()) return false;
        for (std::size_t t = 0; t < left.size(); ++t)
            if (left[t] != right[t]) return false;
        return true;
    }
    std::string render() const {
        std::string out = label + ":\n";
        std::size_t rows = left.size() > right.size() ? left.size() : right.size();
        for (std::size_t t = 0; t < rows; ++t) {
            std::string l = t < left.size() ? std::to_string(left[t]) : "-";
            std::string r = t < right.size() ? std::to_string(right[t]) : "-";
            bool same = t < left.size() && t < right.size() && left[t] == right[t];
            out += "  degree " + std::to_string(t) + ": " + l + " vs " + r +
                   (same ? "" : "  <-- MISMATCH") + "\n";
        }
        out += pass() ? "  PASS\n" : "  FAIL\n";
        return out;
    }
};

inline DimensionComparison compare_dimension_tables(std::string label, std::vector<int> left,
                                                    std::vector<int> right) {
    return DimensionComparison{std::move(label), std::move(left), std::move(right)};
}

} // namespace crossed
