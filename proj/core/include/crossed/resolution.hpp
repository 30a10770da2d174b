#pragma once

/* Small projective resolution of a weak crossed product E as an E-bimodule,
 * together with an explicit comparison to the two-sided bar resolution.
 *
 * The tower is a first-quadrant array
 *
 *     X_{r,s} = E (x)_A Etilde^{(x)_A s} (x) Abar^{(x) r} (x) E,
 *
 * where Etilde = E / j_nu(A), Abar = A / K, and the unadorned tensor
 * products are taken over the distinguished subalgebra K.  The total spaces
 * X_n = (+)_{s <= n} X_{n-s,s} carry a perturbed differential
 * d = d^0 + d^1 + d^2 + ... whose higher strata are produced recursively
 * from an explicit contraction of the rows; a second contraction of the
 * columns produces a contracting homotopy sigma_bar of the total complex.
 *
 * Everything is realised by exact matrices on explicit bases of the
 * quotient spaces.  Every formula that is written on an ambient tensor
 * word is factored through the defining relations with a descent check, so
 * an incorrect formula raises std::logic_error instead of silently
 * producing garbage.  Evaluation is lazy and memoised; a tower instance is
 * meant for single-threaded use.
 */

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crossed_system.hpp"
#include "oracle.hpp"

namespace crossed {

namespace resolution_detail {

inline int checked_dim(long v) {
    if (v < 0 || v > 1000000000L)
        throw std::overflow_error("tensor word dimension exceeds the supported range");
    return static_cast<int>(v);
}

inline long dims_product(const std::vector<int>& dims) {
    long p = 1;
    for (int d : dims) p *= d;
    return p;
}

/* kron(I_pre, op, I_post): apply `op` to the `count` adjacent factors
 * starting at `lo`; `op` may change the dimension of that window. */
template <class F>
SparseMat<F> window(F f, const std::vector<int>& dims, std::size_t lo, std::size_t count,
                    const SparseMat<F>& op) {
    long pre = 1, mid = 1, post = 1;
    for (std::size_t t = 0; t < dims.size(); ++t) {
        if (t < lo) pre *= dims[t];
        else if (t < lo + count) mid *= dims[t];
        else post *= dims[t];
    }
    if (static_cast<long>(op.cols) != mid)
        throw std::logic_error("window: operator shape does not match the selected factors");
    auto m = SparseMat<F>::kron(SparseMat<F>::identity(f, checked_dim(pre)), op);
    return SparseMat<F>::kron(m, SparseMat<F>::identity(f, checked_dim(post)));
}

/* Accumulates a composite of windowed operators on a tensor word while
 * tracking the factor dimensions. */
template <class F>
struct ChainBuilder {
    F f;
    std::vector<int> dims;
    SparseMat<F> M;

    ChainBuilder(F field, std::vector<int> d)
        : f(field), dims(std::move(d)),
          M(SparseMat<F>::identity(field, checked_dim(dims_product(dims)))) {}

    void apply(std::size_t lo, std::size_t count, const SparseMat<F>& op,
               const std::vector<int>& out_dims) {
        M = window(f, dims, lo, count, op) * M;
        dims.erase(dims.begin() + static_cast<long>(lo),
                   dims.begin() + static_cast<long>(lo + count));
        dims.insert(dims.begin() + static_cast<long>(lo), out_dims.begin(), out_dims.end());
    }
    void swap_adjacent(std::size_t i) {
        M = swap_factors(f, dims, i) * M;
        std::swap(dims[i], dims[i + 1]);
    }
    void move(std::size_t from, std::size_t to) {
        while (from < to) { swap_adjacent(from); ++from; }
        while (from > to) { swap_adjacent(from - 1); --from; }
    }
};

/* One factor of a tensor word: its ambient dimension and an optional
 * subspace that is killed slotwise (columns in the slot's coordinates). */
template <class F>
struct SlotSpec {
    int dim = 0;
    std::optional<SparseMat<F>> kill;
};

/* The algebra sitting between two adjacent slots, acting on the slot to its
 * left (ract_prev: prev x (prev * alg)) and on the slot to its right
 * (lact_next: next x (alg * next)). */
template <class F>
struct JunctionSpec {
    int alg_dim = 0;
    SparseMat<F> ract_prev;
    SparseMat<F> lact_next;
};

/* A realised word quotient: ambient factor dimensions, the projection onto
 * a chosen basis of the quotient and a section of it. */
template <class F>
struct TowerCell {
    std::vector<int> dims;
    long amb = 0;
    BasedSpace space;
    SparseMat<F> proj; // space.dim x amb
    SparseMat<F> sect; // amb x space.dim
};

/* Builds the quotient of slot_0 (x) ... (x) slot_m by the slotwise kills
 * and the junction relations (x . lam (x) y - x (x) lam . y), appending one
 * slot at a time so every elimination happens on a small presentation.
 * The right action used to form each junction relation is re-expressed on
 * the quotient built so far, with an explicit descent check. */
template <class F>
TowerCell<F> build_word_cell(F f, const std::vector<SlotSpec<F>>& slots,
                             const std::vector<JunctionSpec<F>>& juncs, const std::string& stem) {
    using SM = SparseMat<F>;
    if (slots.empty() || juncs.size() + 1 != slots.size())
        throw std::invalid_argument("build_word_cell: slot/junction count mismatch");

    std::vector<int> dims{slots[0].dim};
    long amb = slots[0].dim;
    SM empty_rel = SM::zero(f, slots[0].dim, 0);
    auto q0 = quotient_space(BasedSpace(slots[0].dim, "w"),
                             slots[0].kill ? *slots[0].kill : empty_rel);
    SM proj = q0.projection.mat;
    SM sect = q0.section.mat;

    for (std::size_t k = 0; k < juncs.size(); ++k) {
        const auto& jn = juncs[k];
        const auto& nxt = slots[k + 1];
        const int dR = jn.alg_dim;
        const int dn = nxt.dim;
        const int q = proj.rows;
        const int prev = slots[k].dim;
        if (jn.ract_prev.rows != prev || jn.ract_prev.cols != prev * dR ||
            jn.lact_next.rows != dn || jn.lact_next.cols != dR * dn)
            throw std::invalid_argument("build_word_cell: junction operator shape mismatch");

        // Right action of the junction algebra on the word built so far.
        SM ract_amb = SM::kron(SM::identity(f, checked_dim(amb / prev)), jn.ract_prev);
        SM ract_q = (proj * ract_amb) * SM::kron(sect, SM::identity(f, dR));
        if (!(ract_q * SM::kron(proj, SM::identity(f, dR)) - proj * ract_amb).is_zero())
            throw std::logic_error("build_word_cell: the junction action does not descend");

        SM rel = SM::zero(f, q * dn, 0);
        for (int t = 0; t < dR; ++t) {
            SM pick = SM::zero(f, dR, 1);
            pick.add_at(t, 0, f.one());
            SM ract_lam = ract_q * SM::kron(SM::identity(f, q), pick); // q x q
            SM lact_lam = jn.lact_next * SM::kron(pick, SM::identity(f, dn)); // dn x dn
            rel = SM::hstack(rel, SM::kron(ract_lam, SM::identity(f, dn)) -
                                      SM::kron(SM::identity(f, q), lact_lam));
        }
        if (nxt.kill) rel = SM::hstack(rel, SM::kron(SM::identity(f, q), *nxt.kill));

        auto qk = quotient_space(BasedSpace(q * dn, "w"), rel);
        proj = qk.projection.mat * SM::kron(proj, SM::identity(f, dn));
        sect = SM::kron(sect, SM::identity(f, dn)) * qk.section.mat;
        dims.push_back(dn);
        amb *= dn;
    }
    return TowerCell<F>{std::move(dims), amb, BasedSpace(proj.rows, stem), std::move(proj),
                        std::move(sect)};
}

/* A uniform view of a realised quotient of a tensor word whose last factor
 * is a copy of E: either a TowerCell or one of the bar quotients. */
template <class F>
struct CellView {
    long amb = 0;
    int last = 0;
    const SparseMat<F>* proj = nullptr;
    const SparseMat<F>* sect = nullptr;
    const BasedSpace* space = nullptr;
};

template <class F>
CellView<F> view_of(const TowerCell<F>& c) {
    return CellView<F>{c.amb, c.dims.back(), &c.proj, &c.sect, &c.space};
}

template <class F>
CellView<F> view_of(const QuotientSpace<F>& q, int last) {
    return CellView<F>{static_cast<long>(q.ambient.dim), last, &q.projection.mat,
                       &q.section.mat, &q.quotient};
}

/* Factors an ambient formula through the defining relations of `src`,
 * raising std::logic_error when the formula does not descend. */
template <class F>
LinearMap<F> factor_through(const CellView<F>& src, const BasedSpace& target,
                            const SparseMat<F>& g_amb, const std::string& who) {
    SparseMat<F> m = g_amb * (*src.sect);
    if (!(m * (*src.proj) - g_amb).is_zero())
        throw std::logic_error(who + ": the formula does not descend to the quotient");
    return LinearMap<F>(*src.space, target, m);
}

template <class F>
LinearMap<F> factor_through(const TowerCell<F>& src, const BasedSpace& target,
                            const SparseMat<F>& g_amb, const std::string& who) {
    return factor_through(view_of(src), target, g_amb, who);
}

/* Extends a map, given on the classes of words whose last slot is the unit
 * of E, to the whole cell by right E-linearity:  ghat picks the value on
 * N (x) 1 and ract_t multiplies the spare slot back in on the target. */
template <class F>
LinearMap<F> extend_from_unit_ghat(F f, const CellView<F>& src, const SparseMat<F>& ghat,
                                   const SparseMat<F>& ract_t, const BasedSpace& target,
                                   const std::string& who) {
    using SM = SparseMat<F>;
    SM f_amb = ract_t * SM::kron(ghat, SM::identity(f, src.last));
    return factor_through(src, target, f_amb, who);
}

template <class F>
LinearMap<F> extend_from_unit_slot(F f, const CellView<F>& src, const SparseMat<F>& g,
                                   const SparseMat<F>& ract_t, const BasedSpace& target,
                                   const Vec<F>& unit_e, const std::string& who) {
    using SM = SparseMat<F>;
    long pre = src.amb / src.last;
    SM ins = SM::kron(SM::identity(f, checked_dim(pre)),
                      oracle_detail::column_matrix(f, unit_e));
    SM ghat = g * ((*src.proj) * ins); // target coords x pre
    return extend_from_unit_ghat(f, src, ghat, ract_t, target, who);
}

/* Right multiplication by E on the last slot, expressed on the quotient. */
template <class F>
SparseMat<F> right_mult_on_view(F f, const CellView<F>& v, const SparseMat<F>& mult_e) {
    using SM = SparseMat<F>;
    const int dE = v.last;
    SM r_amb = SM::kron(SM::identity(f, checked_dim(v.amb / dE)), mult_e);
    SM r_q = ((*v.proj) * r_amb) * SM::kron(*v.sect, SM::identity(f, dE));
    if (!(r_q * SM::kron(*v.proj, SM::identity(f, dE)) - (*v.proj) * r_amb).is_zero())
        throw std::logic_error("right multiplication does not descend to the quotient");
    return r_q;
}

/* Left multiplication by E on the first slot (assumed to be a copy of E). */
template <class F>
SparseMat<F> left_mult_on_view(F f, const CellView<F>& v, int first, const SparseMat<F>& mult_e) {
    using SM = SparseMat<F>;
    SM l_amb = SM::kron(mult_e, SM::identity(f, checked_dim(v.amb / first)));
    SM l_q = ((*v.proj) * l_amb) * SM::kron(SM::identity(f, first), *v.sect);
    if (!(l_q * SM::kron(SM::identity(f, first), *v.proj) - (*v.proj) * l_amb).is_zero())
        throw std::logic_error("left multiplication does not descend to the quotient");
    return l_q;
}

inline void add_block(auto& m, const auto& b, int roff, int coff) {
    for (int j = 0; j < b.cols; ++j)
        for (const auto& [i, v] : b.col[static_cast<std::size_t>(j)])
            m.add_at(roff + i, coff + j, v);
}

inline std::vector<std::vector<int>> subsets_of_size(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int start) {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (int j = start; j <= n - (k - static_cast<int>(cur.size())); ++j) {
            cur.push_back(j);
            rec(j + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

template <class F>
SparseMat<F> columns_slice(F f, const SparseMat<F>& m, int lo, int width) {
    SparseMat<F> out(f, m.rows, width);
    for (int j = 0; j < width; ++j)
        for (const auto& [i, v] : m.col[static_cast<std::size_t>(lo + j)]) out.add_at(i, j, v);
    return out;
}

} // namespace resolution_detail

/* Offsets of the blocks X_{n-s,s}, s = 0..n, inside the total space X_n. */
struct TotalDegree {
    int n = 0;
    std::vector<int> offsets;
    std::vector<int> block_dims;
    BasedSpace space{0, std::vector<std::string>{}};
};

template <class F>
class ResolutionTower {
  public:
    using SM = SparseMat<F>;
    using LM = LinearMap<F>;
    using Cell = resolution_detail::TowerCell<F>;

    ResolutionTower(const CrossedProductAlgebra<F>& cp, int truncation)
        : f_(cp.system.field), cp_(cp), N_(truncation), dE_(cp.E.space.dim),
          dA_(cp.system.A.space.dim), dV_(cp.system.V.dim), dK_(cp.system.K.basis.cols),
          jA_(image_basis(cp.j_nu.mat)), jK_(image_basis(cp.j_nu.mat * cp.system.K.basis)) {
        if (truncation < 0) throw std::invalid_argument("ResolutionTower: negative truncation");
    }

    F field() const { return f_; }
    int truncation() const { return N_; }
    const CrossedProductAlgebra<F>& product() const { return cp_; }
    const SM& base_image() const { return jA_; } // basis of j_nu(A) inside E
    const SM& unit_image() const { return jK_; } // basis of j_nu(K) inside E

    /* ---------------- cells ---------------- */

    const Cell& cell(int r, int s) const {
        require_cell(r, s);
        return get_cell(cells_, {r, s}, [&] { return build_x_cell(r, s, false); });
    }
    const Cell& primed_cell(int r, int s) const {
        require_cell(r, s);
        return get_cell(primed_, {r, s}, [&] { return build_x_cell(r, s, true); });
    }
    /* Y_s = E (x)_A Etilde^{(x)_A s} (x)_A E; kept one step past the
     * truncation so the column contraction can be inspected at the edge. */
    const Cell& column_cell(int s) const {
        if (s < 0) throw std::invalid_argument("column_cell: negative index");
        if (s > N_ + 1)
            throw std::out_of_range("column_cell(" + std::to_string(s) +
                                    "): outside the truncation");
        return get_cell(ycells_, {s, 0}, [&] { return build_y_cell(s); });
    }

    const TotalDegree& total(int n) const {
        if (n < 0) throw std::invalid_argument("total: negative degree");
        if (n > N_)
            throw std::out_of_range("total(" + std::to_string(n) + "): outside the truncation");
        auto it = totals_.find(n);
        if (it == totals_.end()) {
            TotalDegree t;
            t.n = n;
            int off = 0;
            for (int s = 0; s <= n; ++s) {
                t.offsets.push_back(off);
                int d = cell(n - s, s).space.dim;
                t.block_dims.push_back(d);
                off += d;
            }
            t.space = BasedSpace(off, "t" + std::to_string(n) + "_");
            it = totals_.emplace(n, std::move(t)).first;
        }
        return it->second;
    }

    SM block_embed(int n, int s) const {
        const auto& t = total(n);
        SM m(f_, t.space.dim, t.block_dims[static_cast<std::size_t>(s)]);
        for (int j = 0; j < m.cols; ++j)
            m.add_at(t.offsets[static_cast<std::size_t>(s)] + j, j, f_.one());
        return m;
    }
    SM block_project(int n, int s) const {
        const auto& t = total(n);
        SM m(f_, t.block_dims[static_cast<std::size_t>(s)], t.space.dim);
        for (int i = 0; i < m.rows; ++i)
            m.add_at(i, t.offsets[static_cast<std::size_t>(s)] + i, f_.one());
        return m;
    }

    /* ------------- structural maps ------------- */

    /* upsilon_s : X_{0,s} -> Y_s, the identity on ambient words. */
    const LM& upsilon(int s) const {
        require_cell(0, s);
        return memo({k_upsilon, s, 0, 0}, [&] {
            const auto& y = column_cell(s);
            return resolution_detail::factor_through(cell(0, s), y.space, y.proj, "upsilon");
        });
    }

    /* The simplicial boundary of the column complex Y. */
    const LM& column_boundary(int s) const {
        if (s < 1) throw std::invalid_argument("column_boundary: degree must be positive");
        if (s > N_ + 1)
            throw std::out_of_range("column_boundary(" + std::to_string(s) +
                                    "): outside the truncation");
        return memo({k_col_boundary, s, 0, 0}, [&] {
            const auto& src = column_cell(s);
            const auto& tgt = column_cell(s - 1);
            SM acc = SM::zero(f_, resolution_detail::checked_dim(src.amb / dE_),
                              resolution_detail::checked_dim(src.amb));
            bool plus = true;
            for (int i = 0; i <= s; ++i) {
                auto w = resolution_detail::window(f_, src.dims, static_cast<std::size_t>(i), 2,
                                                   cp_.E.mult.mat);
                acc = plus ? acc + w : acc - w;
                plus = !plus;
            }
            return resolution_detail::factor_through(src, tgt.space, tgt.proj * acc,
                                                     "column_boundary");
        });
    }

    const LM& column_augmentation() const {
        return memo({k_col_aug, 0, 0, 0}, [&] {
            return resolution_detail::factor_through(column_cell(0), cp_.E.space, cp_.E.mult.mat,
                                                     "column_augmentation");
        });
    }

    /* The contraction of the column complex: sigma_minus(0) : E -> Y_0 is
     * -( x (x) 1 ), sigma_minus(s) : Y_{s-1} -> Y_s appends the unit with
     * sign (-1)^{s-1}. */
    const LM& sigma_minus(int s) const {
        if (s < 0) throw std::invalid_argument("sigma_minus: negative index");
        if (s > N_ + 1)
            throw std::out_of_range("sigma_minus(" + std::to_string(s) +
                                    "): outside the truncation");
        return memo({k_sigma_minus, s, 0, 0}, [&] {
            SM ucol = oracle_detail::column_matrix(f_, cp_.unit_E());
            if (s == 0) {
                const auto& y0 = column_cell(0);
                SM m = y0.proj * SM::kron(SM::identity(f_, dE_), ucol);
                return LM(cp_.E.space, y0.space, -m);
            }
            const auto& src = column_cell(s - 1);
            const auto& tgt = column_cell(s);
            SM g = tgt.proj * SM::kron(SM::identity(f_, resolution_detail::checked_dim(src.amb)),
                                       ucol);
            if (s % 2 == 0) g = -g; // sign (-1)^{s-1}
            return resolution_detail::factor_through(src, tgt.space, g, "sigma_minus");
        });
    }

    /* sigma(l, r, s): the weight-l stratum of the row contraction.
     *   r = -1, l = 0 : Y_s -> X_{0,s}          (the basic splitting)
     *   r >= 0, l = 0 : X_{r,s} -> X_{r+1,s}    (split the right frame)
     *   l >= 1        : source as above, target X_{r+l+1, s-l}. */
    const LM& sigma(int l, int r, int s) const {
        if (r < -1 || s < 0) throw std::invalid_argument("sigma: malformed indices");
        if (l < 0 || l > s)
            throw std::invalid_argument("sigma: level " + std::to_string(l) +
                                        " does not exist at column " + std::to_string(s));
        if (r == -1) {
            if (s > N_)
                throw std::out_of_range("sigma: outside the truncation");
        } else if (r + s + 1 > N_) {
            throw std::out_of_range("sigma: outside the truncation");
        }
        return memo({k_sigma, l, r, s}, [&] { return build_sigma(l, r, s); });
    }

    /* sigma0(r, s): the classical notation for the level-0 contraction into
     * X_{r,s}; r = 0 takes Y_s as the source. */
    const LM& sigma0(int r, int s) const {
        if (r < 0) throw std::invalid_argument("sigma0: negative row");
        return r == 0 ? sigma(0, -1, s) : sigma(0, r - 1, s);
    }

    const LM& homotopy(int l, int r, int s) const { return sigma(l, r, s); }

    /* boundary(l, r, s): the weight-l stratum of the perturbed differential
     * out of X_{r,s}; l = 0 is the plain row boundary (needs r >= 1), and
     * l >= 1 lands in X_{r+l-1, s-l}. */
    const LM& boundary(int l, int r, int s) const {
        if (l < 0) throw std::invalid_argument("boundary: negative level");
        if (l == 0 && r < 1)
            throw std::invalid_argument("boundary: the row boundary needs a coefficient slot");
        if (l > s)
            throw std::invalid_argument("boundary: level " + std::to_string(l) +
                                        " does not exist at column " + std::to_string(s));
        require_cell(r, s);
        return memo({k_boundary, l, r, s}, [&] { return build_boundary(l, r, s); });
    }

    const LM& total_boundary(int n) const {
        if (n < 1) throw std::invalid_argument("total_boundary: degree must be positive");
        if (n > N_)
            throw std::out_of_range("total_boundary(" + std::to_string(n) +
                                    "): outside the truncation");
        return memo({k_total_boundary, n, 0, 0}, [&] {
            const auto& src = total(n);
            const auto& tgt = total(n - 1);
            SM m(f_, tgt.space.dim, src.space.dim);
            for (int s = 0; s <= n; ++s) {
                const int r = n - s;
                if (r >= 1)
                    resolution_detail::add_block(m, boundary(0, r, s).mat,
                                                 tgt.offsets[static_cast<std::size_t>(s)],
                                                 src.offsets[static_cast<std::size_t>(s)]);
                for (int l = 1; l <= s; ++l)
                    resolution_detail::add_block(m, boundary(l, r, s).mat,
                                                 tgt.offsets[static_cast<std::size_t>(s - l)],
                                                 src.offsets[static_cast<std::size_t>(s)]);
            }
            return LM(src.space, tgt.space, m);
        });
    }

    /* The augmentation X_0 = E (x)_K E -> E. */
    const LM& augmentation() const {
        return memo({k_augmentation, 0, 0, 0}, [&] {
            auto a = resolution_detail::factor_through(cell(0, 0), cp_.E.space, cp_.E.mult.mat,
                                                       "augmentation");
            return LM(total(0).space, cp_.E.space, a.mat);
        });
    }

    /* The contracting homotopy of the total complex:
     * sigma_bar(0) : E -> X_0 and sigma_bar(n) : X_{n-1} -> X_n. */
    const LM& sigma_bar(int n) const {
        if (n < 0) throw std::invalid_argument("sigma_bar: negative degree");
        if (n > N_)
            throw std::out_of_range("sigma_bar(" + std::to_string(n) +
                                    "): outside the truncation");
        return memo({k_sigma_bar, n, 0, 0}, [&] { return build_sigma_bar(n); });
    }

    /* ------------- closed forms ------------- */

    /* The weight-1 stratum computed from the explicit mixed formula (the
     * merges plus the twist term on the last reduced slot). */
    const LM& d1_closed(int r, int s) const {
        if (s < 1)
            throw std::invalid_argument("d1_closed: requires at least one reduced slot (s >= 1)");
        require_cell(r, s);
        return memo({k_d1, r, s, 0}, [&] {
            const auto& src = cell(r, s);
            const auto& tgt = cell(r, s - 1);
            SM acc = SM::zero(f_, tgt.space.dim, resolution_detail::checked_dim(src.amb));
            for (int i = 0; i <= s; ++i) {
                SM term = tgt.proj * mu_prime_ambient(i, r, s);
                acc = (i % 2 == 0) ? acc + term : acc - term;
            }
            return resolution_detail::factor_through(src, tgt.space, acc, "d1_closed");
        });
    }

    /* The individual summand mu'_i of the weight-1 formula, which descends
     * only to the partially reduced cells X'. */
    const LM& mu_prime(int i, int r, int s) const {
        if (s < 1) throw std::invalid_argument("mu_prime: requires s >= 1");
        if (i < 0 || i > s) throw std::invalid_argument("mu_prime: summand index out of range");
        require_cell(r, s);
        return memo({k_mu_prime, i, r, s}, [&] {
            const auto& src = primed_cell(r, s);
            const auto& tgt = primed_cell(r, s - 1);
            return resolution_detail::factor_through(src, tgt.space,
                                                     tgt.proj * mu_prime_ambient(i, r, s),
                                                     "mu_prime");
        });
    }

    /* The weight-2 stratum computed from the auxiliary comultiplication
     * data, through the generator presentation E (x) V^s (x) A^r (x) E. */
    const LM& d2_closed(int r, int s) const {
        if (s < 2) throw std::invalid_argument("d2_closed: requires s >= 2");
        require_cell(r, s);
        if (!cp_.system.sweedler)
            throw std::domain_error(
                "d2_closed: closed form unavailable: no auxiliary comultiplication data");
        auto ok = check_sweedler(cp_.system);
        if (!ok.ok)
            throw std::domain_error("d2_closed: closed form unavailable: auxiliary data invalid: " +
                                    ok.witness);
        return memo({k_d2, r, s, 0}, [&] { return build_d2(r, s); });
    }

    /* ------------- shuffles ------------- */

    /* V^{(x)s} (x) Abar^{(x)_K i}: the domain of the shuffle maps. */
    const QuotientSpace<F>& v_word_space(int s, int i) const {
        if (s < 0 || i < 0) throw std::invalid_argument("v_word_space: negative indices");
        auto key = std::make_pair(s, i);
        auto it = vword_.find(key);
        if (it == vword_.end()) {
            long dv = 1;
            for (int t = 0; t < s; ++t) dv *= dV_;
            SM rel = relative_power_relations(f_, cp_.system.A, cp_.system.K, i, true);
            auto q = quotient_space(
                BasedSpace(resolution_detail::checked_dim(dv * rel.rows), "vw"),
                SM::kron(SM::identity(f_, resolution_detail::checked_dim(dv)), rel));
            it = vword_.emplace(key, std::move(q)).first;
        }
        return it->second;
    }

    /* Ebar^{(x)_K m}, the reduced word space of the quotient Ebar = E/j_nu(K). */
    const QuotientSpace<F>& reduced_word_space(int m) const {
        if (m < 0) throw std::invalid_argument("reduced_word_space: negative length");
        auto it = redword_.find(m);
        if (it == redword_.end()) {
            auto rel = oracle_detail::word_relations(f_, cp_.E, jK_, m, 0, m);
            auto q = quotient_space(oracle_detail::word_space(cp_.E.space, m), rel);
            it = redword_.emplace(m, std::move(q)).first;
        }
        return it->second;
    }

    /* V^{(x)(s-1)} (x) Abar^{(x)_K i} (x)_K Ebar: the codomain of one leg. */
    const QuotientSpace<F>& digamma_codomain(int s, int i) const {
        if (s < 1 || i < 0) throw std::invalid_argument("digamma_codomain: malformed indices");
        auto key = std::make_pair(s, i);
        auto it = dgcod_.find(key);
        if (it == dgcod_.end()) {
            long dv = 1;
            for (int t = 1; t < s; ++t) dv *= dV_;
            long tail = 1;
            for (int t = 0; t < i; ++t) tail *= dA_;
            tail *= dE_;
            std::vector<int> tdims(static_cast<std::size_t>(i), dA_);
            tdims.push_back(dE_);
            SM rel = SM::zero(f_, resolution_detail::checked_dim(tail), 0);
            if (i > 0) {
                rel = SM::hstack(
                    rel, SM::kron(relative_power_relations(f_, cp_.system.A, cp_.system.K, i, true),
                                  SM::identity(f_, dE_)));
                for (int t = 0; t < dK_; ++t) {
                    auto lam = cp_.system.K.basis.column(t);
                    auto d = embed_at_slot(f_, tdims, static_cast<std::size_t>(i - 1),
                                           cp_.system.A.right_mult_operator(lam)) -
                             embed_at_slot(f_, tdims, static_cast<std::size_t>(i),
                                           cp_.left_action.mat *
                                               SM::kron(oracle_detail::column_matrix(f_, lam),
                                                        SM::identity(f_, dE_)));
                    rel = SM::hstack(rel, d);
                }
            }
            auto kdims = tdims;
            kdims[static_cast<std::size_t>(i)] = jK_.cols;
            rel = SM::hstack(rel, embed_at_slot(f_, kdims, static_cast<std::size_t>(i), jK_));
            auto q = quotient_space(
                BasedSpace(resolution_detail::checked_dim(dv * tail), "dg"),
                SM::kron(SM::identity(f_, resolution_detail::checked_dim(dv)), rel));
            it = dgcod_.emplace(key, std::move(q)).first;
        }
        return it->second;
    }

    /* digamma(s, i): the i-th leg of the shuffle, inserting the last V slot
     * as a twisted frame after i coefficient slots, with sign (-1)^i. */
    const LM& digamma(int s, int i) const {
        if (s < 1 || i < 0) throw std::invalid_argument("digamma: malformed indices");
        return memo({k_digamma, s, i, 0}, [&] {
            const auto& dom = v_word_space(s, i);
            const auto& cod = digamma_codomain(s, i);
            SM big = cod.projection.mat * digamma_ambient(s, i);
            SM m = big * dom.section.mat;
            if (!(m * dom.projection.mat - big).is_zero())
                throw std::logic_error("digamma: the formula does not descend");
            return LM(dom.quotient, cod.quotient, m);
        });
    }

    /* shuffle(s, r): V^{(x)s} (x) Abar^{(x)_K r} -> Ebar^{(x)_K (r+s)}. */
    const LM& shuffle(int s, int r) const {
        if (s < 0 || r < 0) throw std::invalid_argument("shuffle: negative indices");
        return memo({k_shuffle, s, r, 0}, [&] {
            const auto& dom = v_word_space(s, r);
            const auto& cod = reduced_word_space(s + r);
            SM big = cod.projection.mat * shuffle_ambient(s, r);
            SM m = big * dom.section.mat;
            if (!(m * dom.projection.mat - big).is_zero())
                throw std::logic_error("shuffle: the formula does not descend");
            return LM(dom.quotient, cod.quotient, m);
        });
    }

    /* ------------- multiplication matrices ------------- */

    /* Right multiplication by E on the last slot: space.dim x (space.dim * dE). */
    const SM& right_mult_matrix(int r, int s, bool primed = false) const {
        return memo_mat({m_ract, r, s, primed ? 1 : 0}, [&] {
            const auto& c = primed ? primed_cell(r, s) : cell(r, s);
            return resolution_detail::right_mult_on_view(f_, resolution_detail::view_of(c),
                                                         cp_.E.mult.mat);
        });
    }
    /* Left multiplication by E on the first slot: space.dim x (dE * space.dim). */
    const SM& left_mult_matrix(int r, int s, bool primed = false) const {
        return memo_mat({m_lact, r, s, primed ? 1 : 0}, [&] {
            const auto& c = primed ? primed_cell(r, s) : cell(r, s);
            return resolution_detail::left_mult_on_view(f_, resolution_detail::view_of(c), dE_,
                                                        cp_.E.mult.mat);
        });
    }
    const SM& column_right_mult_matrix(int s) const {
        return memo_mat({m_ract_y, s, 0, 0}, [&] {
            return resolution_detail::right_mult_on_view(
                f_, resolution_detail::view_of(column_cell(s)), cp_.E.mult.mat);
        });
    }
    /* Blockwise right multiplication on the total space X_n. */
    const SM& total_right_mult(int n) const {
        return memo_mat({m_ract_total, n, 0, 0}, [&] {
            const auto& t = total(n);
            SM m(f_, t.space.dim, t.space.dim * dE_);
            for (int s = 0; s <= n; ++s)
                resolution_detail::add_block(m, right_mult_matrix(n - s, s),
                                             t.offsets[static_cast<std::size_t>(s)],
                                             t.offsets[static_cast<std::size_t>(s)] * dE_);
            return m;
        });
    }

    /* ------------- diagnostic identities ------------- */

    /* Checks the defining identities of the level-0 contraction at (r, s):
     * for r = 0, upsilon . sigma0 = id and sigma0 . upsilon + d0 . sigma0 =
     * id; for r >= 1, sigma0 . d0 + d0 . sigma0 = id.  Also checks that two
     * consecutive contractions compose to zero.  Needs r + s < truncation. */
    bool verify_row_homotopy(int r, int s) const {
        if (r < 0 || s < 0) throw std::invalid_argument("verify_row_homotopy: negative indices");
        if (r + s + 1 > N_)
            throw std::out_of_range("verify_row_homotopy: outside the truncation");
        const int dx = cell(r, s).space.dim;
        SM idx = SM::identity(f_, dx);
        if (r == 0) {
            SM a = upsilon(s).mat * sigma(0, -1, s).mat;
            if (!(a - SM::identity(f_, column_cell(s).space.dim)).is_zero()) return false;
            SM b = sigma(0, -1, s).mat * upsilon(s).mat +
                   boundary(0, 1, s).mat * sigma(0, 0, s).mat;
            if (!(b - idx).is_zero()) return false;
            if (!(sigma(0, 0, s).mat * sigma(0, -1, s).mat).is_zero()) return false;
            return true;
        }
        SM h = sigma(0, r - 1, s).mat * boundary(0, r, s).mat +
               boundary(0, r + 1, s).mat * sigma(0, r, s).mat;
        if (!(h - idx).is_zero()) return false;
        if (!(sigma(0, r, s).mat * sigma(0, r - 1, s).mat).is_zero()) return false;
        return true;
    }

    /* The column contraction: at s = 0 checks aug . sm = -id on E and
     * -sm.aug - del.sm = id on Y_0; for s >= 1 checks -sm.del - del.sm = id
     * on Y_s.  Needs s + 1 <= truncation + 1. */
    bool verify_column_contraction(int s) const {
        if (s < 0) throw std::invalid_argument("verify_column_contraction: negative index");
        if (s + 1 > N_ + 1)
            throw std::out_of_range("verify_column_contraction: outside the truncation");
        if (s == 0) {
            SM a = column_augmentation().mat * sigma_minus(0).mat;
            if (!(a + SM::identity(f_, dE_)).is_zero()) return false;
            SM b = -(sigma_minus(0).mat * column_augmentation().mat) -
                   column_boundary(1).mat * sigma_minus(1).mat;
            return (b - SM::identity(f_, column_cell(0).space.dim)).is_zero();
        }
        SM b = -(sigma_minus(s).mat * column_boundary(s).mat) -
               column_boundary(s + 1).mat * sigma_minus(s + 1).mat;
        return (b - SM::identity(f_, column_cell(s).space.dim)).is_zero();
    }

    /* d(n) . d(n+1) = 0 (with the augmentation at n = 0). */
    bool verify_total_square(int n) const {
        if (n < 0 || n + 1 > N_)
            throw std::out_of_range("verify_total_square: outside the truncation");
        if (n == 0) return (augmentation().mat * total_boundary(1).mat).is_zero();
        return (total_boundary(n).mat * total_boundary(n + 1).mat).is_zero();
    }

    /* The homotopy identities of sigma_bar: aug . sigma_bar(0) = id on E,
     * d(1).sigma_bar(1) + sigma_bar(0).aug = id on X_0, and for n >= 1
     * d(n+1).sigma_bar(n+1) + sigma_bar(n).d(n) = id on X_n. */
    bool verify_total_homotopy(int n) const {
        if (n < 0 || n + 1 > N_)
            throw std::out_of_range("verify_total_homotopy: outside the truncation");
        if (n == 0) {
            SM a = augmentation().mat * sigma_bar(0).mat;
            if (!(a - SM::identity(f_, dE_)).is_zero()) return false;
            SM b = total_boundary(1).mat * sigma_bar(1).mat +
                   sigma_bar(0).mat * augmentation().mat;
            return (b - SM::identity(f_, total(0).space.dim)).is_zero();
        }
        SM b = total_boundary(n + 1).mat * sigma_bar(n + 1).mat +
               sigma_bar(n).mat * total_boundary(n).mat;
        return (b - SM::identity(f_, total(n).space.dim)).is_zero();
    }

  private:
    enum : int {
        k_upsilon = 1,
        k_col_boundary,
        k_col_aug,
        k_sigma_minus,
        k_sigma,
        k_boundary,
        k_total_boundary,
        k_augmentation,
        k_sigma_bar,
        k_d1,
        k_mu_prime,
        k_d2,
        k_shuffle,
        k_digamma
    };
    enum : int { m_ract = 1, m_lact, m_ract_y, m_ract_total };

    F f_;
    CrossedProductAlgebra<F> cp_;
    int N_;
    int dE_, dA_, dV_, dK_;
    SM jA_, jK_;

    mutable std::map<std::pair<int, int>, Cell> cells_, primed_, ycells_;
    mutable std::map<int, TotalDegree> totals_;
    mutable std::map<std::array<int, 4>, LM> maps_;
    mutable std::map<std::array<int, 4>, SM> mats_;
    mutable std::map<std::pair<int, int>, QuotientSpace<F>> vword_, dgcod_;
    mutable std::map<int, QuotientSpace<F>> redword_;
    mutable std::map<std::pair<int, int>, SM> shamb_;

    void require_cell(int r, int s) const {
        if (r < 0 || s < 0) throw std::invalid_argument("cell: negative indices");
        if (r + s > N_)
            throw std::out_of_range("cell(" + std::to_string(r) + ", " + std::to_string(s) +
                                    "): outside the truncation");
    }

    template <class Build>
    const Cell& get_cell(std::map<std::pair<int, int>, Cell>& store, std::pair<int, int> key,
                         Build build) const {
        auto it = store.find(key);
        if (it == store.end()) it = store.emplace(key, build()).first;
        return it->second;
    }

    const LM& memo(std::array<int, 4> key, const std::function<LM()>& build) const {
        auto it = maps_.find(key);
        if (it != maps_.end()) return it->second;
        LM v = build();
        return maps_.emplace(key, std::move(v)).first->second;
    }
    const SM& memo_mat(std::array<int, 4> key, const std::function<SM()>& build) const {
        auto it = mats_.find(key);
        if (it != mats_.end()) return it->second;
        SM v = build();
        return mats_.emplace(key, std::move(v)).first->second;
    }

    /* ------------- junction specs ------------- */

    resolution_detail::JunctionSpec<F> jnc_ee_a() const {
        return {dA_, cp_.right_action.mat, cp_.left_action.mat};
    }
    resolution_detail::JunctionSpec<F> jnc_ee_k() const {
        const auto& kb = cp_.system.K.basis;
        return {dK_, cp_.right_action.mat * SM::kron(SM::identity(f_, dE_), kb),
                cp_.left_action.mat * SM::kron(kb, SM::identity(f_, dE_))};
    }
    resolution_detail::JunctionSpec<F> jnc_ea_k() const {
        const auto& kb = cp_.system.K.basis;
        return {dK_, cp_.right_action.mat * SM::kron(SM::identity(f_, dE_), kb),
                cp_.system.A.mult.mat * SM::kron(kb, SM::identity(f_, dA_))};
    }
    resolution_detail::JunctionSpec<F> jnc_aa_k() const {
        const auto& kb = cp_.system.K.basis;
        return {dK_, cp_.system.A.mult.mat * SM::kron(SM::identity(f_, dA_), kb),
                cp_.system.A.mult.mat * SM::kron(kb, SM::identity(f_, dA_))};
    }
    resolution_detail::JunctionSpec<F> jnc_ae_k() const {
        const auto& kb = cp_.system.K.basis;
        return {dK_, cp_.system.A.mult.mat * SM::kron(SM::identity(f_, dA_), kb),
                cp_.left_action.mat * SM::kron(kb, SM::identity(f_, dE_))};
    }

    Cell build_x_cell(int r, int s, bool primed) const {
        std::vector<resolution_detail::SlotSpec<F>> slots;
        std::vector<resolution_detail::JunctionSpec<F>> juncs;
        slots.push_back({dE_, std::nullopt});
        for (int t = 0; t < s; ++t) {
            slots.push_back({dE_, primed ? std::optional<SM>{} : std::optional<SM>{jA_}});
            juncs.push_back(jnc_ee_a());
        }
        if (r > 0) {
            juncs.push_back(jnc_ea_k());
            for (int t = 0; t < r; ++t) {
                slots.push_back({dA_, cp_.system.K.basis});
                if (t + 1 < r) juncs.push_back(jnc_aa_k());
            }
            juncs.push_back(jnc_ae_k());
        } else {
            juncs.push_back(jnc_ee_k());
        }
        slots.push_back({dE_, std::nullopt});
        std::string stem = (primed ? "xp" : "x") + std::to_string(r) + "_" + std::to_string(s) + "_";
        return resolution_detail::build_word_cell(f_, slots, juncs, stem);
    }

    Cell build_y_cell(int s) const {
        std::vector<resolution_detail::SlotSpec<F>> slots;
        std::vector<resolution_detail::JunctionSpec<F>> juncs;
        slots.push_back({dE_, std::nullopt});
        for (int t = 0; t < s; ++t) {
            slots.push_back({dE_, jA_});
            juncs.push_back(jnc_ee_a());
        }
        slots.push_back({dE_, std::nullopt});
        juncs.push_back(jnc_ee_a());
        return resolution_detail::build_word_cell(f_, slots, juncs,
                                                  "y" + std::to_string(s) + "_");
    }

    /* ------------- the contraction strata ------------- */

    LM build_sigma(int l, int r, int s) const {
        if (l == 0 && r == -1) {
            // Y_s -> X_{0,s}: split the right frame through iota and push
            // the coefficient leg onto the slot to its left.
            const auto& src = column_cell(s);
            const auto& tgt = cell(0, s);
            SM op = SM::kron(SM::identity(f_, dE_), cp_.gamma.mat) *
                    (SM::kron(cp_.right_action.mat, SM::identity(f_, dV_)) *
                     SM::kron(SM::identity(f_, dE_), cp_.iota.mat));
            SM g = tgt.proj * resolution_detail::window(f_, src.dims,
                                                        static_cast<std::size_t>(s), 2, op);
            auto out = resolution_detail::factor_through(src, tgt.space, g, "sigma");
            // Basic splitting identity: upsilon . sigma = id on Y_s.
            if (!(upsilon(s).mat * out.mat - SM::identity(f_, src.space.dim)).is_zero())
                throw std::logic_error("sigma: the basic splitting identity fails");
            return out;
        }
        if (l == 0) {
            // X_{r,s} -> X_{r+1,s}: split the right frame into a fresh
            // coefficient slot and a twisted frame, sign (-1)^{r+s+1}.
            const auto& src = cell(r, s);
            const auto& tgt = cell(r + 1, s);
            SM op = SM::kron(SM::identity(f_, dA_), cp_.gamma.mat) * cp_.iota.mat;
            SM g = tgt.proj * resolution_detail::window(
                                  f_, src.dims, static_cast<std::size_t>(s + r + 1), 1, op);
            if ((r + s + 1) % 2 != 0) g = -g;
            return resolution_detail::factor_through(src, tgt.space, g, "sigma");
        }
        // l >= 1: the recursive stratum
        //   sigma_l = - sum_{i<l} sigma_0 . boundary_{l-i} . sigma_i.
        const BasedSpace& dom = (r == -1) ? column_cell(s).space : cell(r, s).space;
        const auto& tgt = cell(r + l + 1, s - l);
        SM acc = SM::zero(f_, tgt.space.dim, dom.dim);
        for (int i = 0; i < l; ++i) {
            const LM& inner = sigma(i, r, s); // -> X_{r+i+1, s-i}
            const LM& mid = boundary(l - i, r + i + 1, s - i); // -> X_{r+l, s-l}
            const LM& outer = sigma(0, r + l, s - l); // -> X_{r+l+1, s-l}
            acc = acc + outer.mat * (mid.mat * inner.mat);
        }
        return LM(dom, tgt.space, -acc);
    }

    LM build_boundary(int l, int r, int s) const {
        const auto& src = cell(r, s);
        if (l == 0) {
            // The plain row boundary: merge the coefficient slots leftwards,
            // with the global sign (-1)^s on the alternating sum.
            const auto& tgt = cell(r - 1, s);
            SM acc = SM::zero(f_, resolution_detail::checked_dim(src.amb / dA_),
                              resolution_detail::checked_dim(src.amb));
            for (int i = 0; i <= r; ++i) {
                const SM& op = (i == 0) ? cp_.right_action.mat
                                        : (i == r ? cp_.left_action.mat : cp_.system.A.mult.mat);
                SM w = resolution_detail::window(f_, src.dims, static_cast<std::size_t>(s + i), 2,
                                                 op);
                acc = ((s + i) % 2 == 0) ? acc + w : acc - w;
            }
            return resolution_detail::factor_through(src, tgt.space, tgt.proj * acc, "boundary");
        }
        // l >= 1: the recursive stratum, defined on classes with a unit
        // right frame and extended by right E-linearity.
        const auto& tgt = cell(r + l - 1, s - l);
        SM g = SM::zero(f_, tgt.space.dim, src.space.dim);
        if (l == 1 && r == 0) {
            g = sigma(0, -1, s - 1).mat * (column_boundary(s).mat * upsilon(s).mat);
        } else if (l == 1) {
            g = -(sigma(0, r - 1, s - 1).mat *
                  (boundary(1, r - 1, s).mat * boundary(0, r, s).mat));
        } else {
            const int jlo = (r == 0) ? 1 : 0;
            for (int j = jlo; j < l; ++j) {
                const int rj = (j == 0) ? r - 1 : r + j - 1;
                const int sj = (j == 0) ? s : s - j;
                g = g + sigma(0, r + l - 2, s - l).mat *
                            (boundary(l - j, rj, sj).mat * boundary(j, r, s).mat);
            }
            g = -g;
        }
        return resolution_detail::extend_from_unit_slot(
            f_, resolution_detail::view_of(src), g, right_mult_matrix(r + l - 1, s - l),
            tgt.space, cp_.unit_E(), "boundary");
    }

    LM build_sigma_bar(int n) const {
        if (n == 0) {
            SM m = sigma(0, -1, 0).mat * sigma_minus(0).mat;
            return LM(cp_.E.space, total(0).space, -m);
        }
        const auto& src = total(n - 1);
        const auto& tgt = total(n);
        SM m(f_, tgt.space.dim, src.space.dim);
        for (int sp = 0; sp <= n - 1; ++sp) {
            const int r = n - 1 - sp;
            const int coff = src.offsets[static_cast<std::size_t>(sp)];
            if (r == 0) {
                // Through the column contraction: -sum_l sigma_l . sm . upsilon ...
                SM through = sigma_minus(n).mat * upsilon(n - 1).mat;
                for (int l = 0; l <= n; ++l)
                    resolution_detail::add_block(m, -(sigma(l, -1, n).mat * through),
                                                 tgt.offsets[static_cast<std::size_t>(n - l)],
                                                 coff);
                // ... plus the strata that stay on the zeroth row's source.
                for (int l = 0; l <= n - 1; ++l)
                    resolution_detail::add_block(m, sigma(l, 0, n - 1).mat,
                                                 tgt.offsets[static_cast<std::size_t>(n - 1 - l)],
                                                 coff);
            } else {
                for (int l = 0; l <= sp; ++l)
                    resolution_detail::add_block(m, sigma(l, r, sp).mat,
                                                 tgt.offsets[static_cast<std::size_t>(sp - l)],
                                                 coff);
            }
        }
        return LM(src.space, tgt.space, m);
    }

    /* ------------- the weight-1 closed form ------------- */

    /* mu'_i on the ambient word of X_{r,s}; i < s merges slots (i, i+1),
     * i = s sends the last reduced slot through iota, pushes the
     * coefficient leg to the left and twists the V leg past the A slots. */
    SM mu_prime_ambient(int i, int r, int s) const {
        using resolution_detail::window;
        std::vector<int> dims(static_cast<std::size_t>(s + 1), dE_);
        for (int t = 0; t < r; ++t) dims.push_back(dA_);
        dims.push_back(dE_);
        if (i < s)
            return window(f_, dims, static_cast<std::size_t>(i), 2, cp_.E.mult.mat);
        resolution_detail::ChainBuilder<F> cb(f_, dims);
        cb.apply(static_cast<std::size_t>(s), 1, cp_.iota.mat, {dA_, dV_});
        cb.apply(static_cast<std::size_t>(s - 1), 2, cp_.right_action.mat, {dE_});
        if (r > 0) {
            std::vector<int> out(static_cast<std::size_t>(r), dA_);
            out.push_back(dV_);
            cb.apply(static_cast<std::size_t>(s), static_cast<std::size_t>(1 + r),
                     iterate_chi(cp_.system, 1, r).mat, out);
        }
        cb.apply(static_cast<std::size_t>(s + r), 2,
                 cp_.E.mult.mat * SM::kron(cp_.gamma.mat, SM::identity(f_, dE_)), {dE_});
        return cb.M;
    }

    /* ------------- the weight-2 closed form ------------- */

    /* rho distributed over j coefficient slots: V (x) A^j -> A^j. */
    SM dist_mat(int j) const {
        const auto& sw = *cp_.system.sweedler;
        if (j < 1) throw std::logic_error("dist_mat: needs at least one slot");
        if (j == 1) return sw.rho.mat;
        SM prev = dist_mat(j - 1);
        long tail = 1;
        for (int t = 0; t < j - 1; ++t) tail *= dA_;
        SM sw13 = swap_factors(f_, {dV_, dV_, dA_, resolution_detail::checked_dim(tail)}, 1);
        long dAj = tail * dA_;
        return SM::kron(sw.rho.mat, prev) *
               (sw13 * SM::kron(sw.comult.mat,
                                SM::identity(f_, resolution_detail::checked_dim(dAj))));
    }

    /* The cocycle-distribution operator on (p, q, A^r) -> A^{r+1}. */
    SM twisted_cocycle_mat(int r) const {
        const auto& sw = *cp_.system.sweedler;
        std::vector<int> base{dV_, dV_};
        for (int t = 0; t < r; ++t) base.push_back(dA_);
        SM comult2 = SM::kron(sw.comult.mat, SM::identity(f_, dV_)) * sw.comult.mat;
        long in_cols = dV_ * dV_;
        long out_rows = dA_;
        for (int t = 0; t < r; ++t) {
            in_cols *= dA_;
            out_rows *= dA_;
        }
        SM acc = SM::zero(f_, resolution_detail::checked_dim(out_rows),
                          resolution_detail::checked_dim(in_cols));
        bool plus = true;
        std::vector<int> adims_r(static_cast<std::size_t>(r), dA_);
        for (int i = 0; i <= r; ++i) {
            resolution_detail::ChainBuilder<F> cb(f_, base);
            if (i == 0 && r == 0) {
                cb.apply(0, 2, sw.f_map.mat, {dA_});
            } else if (i == 0) {
                cb.apply(0, 1, sw.comult.mat, {dV_, dV_});   // p -> p1 p2
                cb.apply(2, 1, sw.comult.mat, {dV_, dV_});   // q -> q1 q2
                cb.swap_adjacent(1);                          // p1 q1 p2 q2 A^r
                cb.apply(2, 2, sw.mult_v.mat, {dV_});         // p1 q1 m A^r
                cb.apply(0, 2, sw.f_map.mat, {dA_});          // f m A^r
                cb.apply(1, static_cast<std::size_t>(1 + r), dist_mat(r), adims_r);
            } else if (i == r) {
                cb.apply(0, 1, sw.comult.mat, {dV_, dV_});
                cb.apply(2, 1, sw.comult.mat, {dV_, dV_});
                cb.move(2, 1);                                // p1 q1 p2 q2 A^r
                for (int t = 0; t < r; ++t) cb.move(static_cast<std::size_t>(4 + t),
                                                    static_cast<std::size_t>(2 + t));
                // p1 q1 A^r p2 q2
                cb.apply(1, static_cast<std::size_t>(1 + r), dist_mat(r), adims_r);
                cb.apply(0, static_cast<std::size_t>(1 + r), dist_mat(r), adims_r);
                cb.apply(static_cast<std::size_t>(r), 2, sw.f_map.mat, {dA_});
            } else {
                cb.apply(0, 1, comult2, {dV_, dV_, dV_});     // p1 p2 p3 q A^r
                cb.apply(3, 1, comult2, {dV_, dV_, dV_});     // p1 p2 p3 q1 q2 q3 A^r
                cb.move(3, 1);                                // p1 q1 p2 p3 q2 q3 A^r
                cb.move(4, 3);                                // p1 q1 p2 q2 p3 q3 A^r
                std::vector<int> adims_i(static_cast<std::size_t>(i), dA_);
                std::vector<int> adims_t(static_cast<std::size_t>(r - i), dA_);
                for (int t = 0; t < i; ++t) cb.move(static_cast<std::size_t>(6 + t),
                                                    static_cast<std::size_t>(2 + t));
                // p1 q1 A^i p2 q2 p3 q3 A^{r-i}
                cb.apply(1, static_cast<std::size_t>(1 + i), dist_mat(i), adims_i);
                cb.apply(0, static_cast<std::size_t>(1 + i), dist_mat(i), adims_i);
                cb.apply(static_cast<std::size_t>(i), 2, sw.f_map.mat, {dA_});
                cb.apply(static_cast<std::size_t>(i + 1), 2, sw.mult_v.mat, {dV_});
                cb.apply(static_cast<std::size_t>(i + 1), static_cast<std::size_t>(1 + (r - i)),
                         dist_mat(r - i), adims_t);
            }
            acc = plus ? acc + cb.M : acc - cb.M;
            plus = !plus;
        }
        return acc;
    }

    LM build_d2(int r, int s) const {
        const auto& sw = *cp_.system.sweedler;
        const auto& src = cell(r, s);
        const auto& tgt = cell(r + 1, s - 2);
        // Generator presentation E (x) V^s (x) A^r (x) E ->> X_{r,s}.
        std::vector<int> pdims{dE_};
        for (int t = 0; t < s; ++t) pdims.push_back(dV_);
        for (int t = 0; t < r; ++t) pdims.push_back(dA_);
        pdims.push_back(dE_);
        resolution_detail::ChainBuilder<F> emb(f_, pdims);
        for (int t = 1; t <= s; ++t) emb.apply(static_cast<std::size_t>(t), 1, cp_.gamma.mat, {dE_});
        SM pres = src.proj * emb.M;
        auto span = image_basis(pres);
        if (span.cols != src.space.dim)
            throw std::logic_error("d2_closed: the twisted frames do not generate the cell");
        auto section = Solver<F>(pres).solve_mat(SM::identity(f_, src.space.dim));
        if (!section)
            throw std::logic_error("d2_closed: no section of the generator presentation");

        // The ambient chain on the presentation.
        resolution_detail::ChainBuilder<F> cb(f_, pdims);
        cb.apply(static_cast<std::size_t>(s - 1), 1, sw.comult.mat, {dV_, dV_}); // p1 p2
        cb.apply(static_cast<std::size_t>(s + 1), 1, sw.comult.mat, {dV_, dV_}); // q1 q2
        cb.swap_adjacent(static_cast<std::size_t>(s));                           // p1 q1 p2 q2
        cb.apply(static_cast<std::size_t>(s + 1), 2, sw.mult_v.mat, {dV_});      // p1 q1 m
        cb.move(static_cast<std::size_t>(s + 1), static_cast<std::size_t>(s + 1 + r));
        cb.apply(static_cast<std::size_t>(s + 1 + r), 2,
                 cp_.E.mult.mat * SM::kron(cp_.gamma.mat, SM::identity(f_, dE_)), {dE_});
        std::vector<int> adims(static_cast<std::size_t>(r + 1), dA_);
        cb.apply(static_cast<std::size_t>(s - 1), static_cast<std::size_t>(2 + r),
                 twisted_cocycle_mat(r), adims);
        for (int t = 1; t <= s - 2; ++t)
            cb.apply(static_cast<std::size_t>(t), 1, cp_.gamma.mat, {dE_});
        SM dhat = tgt.proj * cb.M;
        if (s % 2 == 0) dhat = -dhat; // sign (-1)^{s+1}
        SM d = dhat * (*section);
        if (!(d * pres - dhat).is_zero())
            throw std::logic_error("d2_closed: the closed form does not factor through the "
                                   "presentation");
        return LM(src.space, tgt.space, d);
    }

    /* ------------- shuffles, ambient level ------------- */

    SM digamma_ambient(int s, int i) const {
        long dv = 1;
        for (int t = 1; t < s; ++t) dv *= dV_;
        SM leg = (i == 0)
                     ? cp_.gamma.mat
                     : SM::kron(SM::identity(f_, resolution_detail::checked_dim(
                                                     resolution_detail::dims_product(
                                                         std::vector<int>(
                                                             static_cast<std::size_t>(i), dA_)))),
                                cp_.gamma.mat) *
                           iterate_chi(cp_.system, 1, i).mat;
        SM m = SM::kron(SM::identity(f_, resolution_detail::checked_dim(dv)), leg);
        return (i % 2 == 0) ? m : -m;
    }

    SM jnu_power(int r) const {
        SM m = SM::identity(f_, 1);
        for (int t = 0; t < r; ++t) m = SM::kron(m, cp_.j_nu.mat);
        return m;
    }

    const SM& shuffle_ambient(int s, int r) const {
        auto key = std::make_pair(s, r);
        auto it = shamb_.find(key);
        if (it != shamb_.end()) return it->second;
        SM m = SM::zero(f_, 1, 1);
        if (s == 0) {
            m = jnu_power(r);
        } else {
            long rows = 1;
            for (int t = 0; t < s + r; ++t) rows *= dE_;
            long cols = 1;
            for (int t = 0; t < s; ++t) cols *= dV_;
            for (int t = 0; t < r; ++t) cols *= dA_;
            m = SM::zero(f_, resolution_detail::checked_dim(rows),
                         resolution_detail::checked_dim(cols));
            for (int i = 0; i <= r; ++i) {
                long e_tail = 1;
                for (int t = 0; t < r - i + 1; ++t) e_tail *= dE_;
                SM term = SM::kron(shuffle_ambient(s - 1, i),
                                   SM::identity(f_, resolution_detail::checked_dim(e_tail))) *
                          SM::kron(digamma_ambient(s, i), jnu_power(r - i));
                m = m + term;
            }
        }
        return shamb_.emplace(key, std::move(m)).first->second;
    }
};

/* ------------- construction ------------- */

/* Builds the tower after checking the standing assumptions: the
 * distinguished subalgebra must be stable under the twist, and the unit of
 * E must lie in K (x) V.  A failure names the assumption that broke. */
template <class F>
ResolutionTower<F> build_tower(const CrossedProductAlgebra<F>& cp, int truncation) {
    using SM = SparseMat<F>;
    if (truncation < 0) throw std::invalid_argument("build_tower: negative truncation");
    const auto& sys = cp.system;
    F f = sys.field;
    auto stable = check_stable(sys, sys.K);
    if (!stable.ok)
        throw std::domain_error(
            "build_tower: the distinguished subalgebra is not stable under the twist (" +
            stable.witness + ")");
    Solver<F> kv(SM::kron(sys.K.basis, SM::identity(f, sys.V.dim)));
    if (!kv.contains(cp.iota.apply(cp.unit_E())))
        throw std::domain_error(
            "build_tower: the unit of the crossed product does not lie in K (x) V");
    for (int b = 0; b < sys.V.dim; ++b)
        if (!kv.contains(cp.iota.apply(cp.gamma.mat.column(b))))
            throw std::logic_error(
                "build_tower: internal check failed: the twisted frame leaves K (x) V");
    return ResolutionTower<F>(cp, truncation);
}

template <class F>
ResolutionTower<F> build_tower(const CrossedSystemSpec<F>& spec, int truncation) {
    return build_tower(build_crossed_product(spec), truncation);
}

/* ------------- comparison with the bar resolution ------------- */

template <class F>
struct ComparisonData {
    BarResolution<F> bar;
    std::vector<LinearMap<F>> phi;   // phi[n]: X_n -> B_n
    std::vector<LinearMap<F>> psi;   // psi[n]: B_n -> X_n
    std::vector<LinearMap<F>> omega; // omega[n]: B_{n-1} -> B_n (omega[0] unused)
};

/* Builds phi/psi by the standard contraction transport and the homotopy
 * omega measuring phi . psi - id; psi is produced by a direct one-step
 * formula and cross-checked against its defining recursion. */
template <class F>
ComparisonData<F> comparison(const ResolutionTower<F>& tw, long budget = 0) {
    using SM = SparseMat<F>;
    using LM = LinearMap<F>;
    namespace rd = resolution_detail;
    F f = tw.field();
    const int N = tw.truncation();
    const auto& cp = tw.product();
    const int dE = cp.E.space.dim;

    auto bar = bar_resolution(cp.E, tw.unit_image(), N, budget);

    std::vector<std::optional<SM>> bar_ract(static_cast<std::size_t>(N) + 2);
    auto ract_of = [&](int n) -> const SM& {
        auto& slot = bar_ract[static_cast<std::size_t>(n)];
        if (!slot)
            slot = rd::right_mult_on_view(f, rd::view_of(bar.space(n), dE), cp.E.mult.mat);
        return *slot;
    };

    std::vector<LM> phi, psi, omega;

    // Degree zero: X_0 and B_0 are two presentations of E (x)_K E on the
    // same ambient word; the cross-descents must be mutually inverse.
    {
        const auto& x0 = tw.cell(0, 0);
        const auto& b0 = bar.space(0);
        SM p = b0.projection.mat * x0.sect;
        SM q = x0.proj * b0.section.mat;
        if (!(p * q - SM::identity(f, b0.quotient.dim)).is_zero() ||
            !(q * p - SM::identity(f, x0.space.dim)).is_zero())
            throw std::logic_error("comparison: the degree-zero comparison is not invertible");
        phi.emplace_back(tw.total(0).space, b0.quotient, p);
        psi.emplace_back(b0.quotient, tw.total(0).space, q);
    }

    for (int n = 1; n <= N; ++n) {
        const auto& tn = tw.total(n);
        // phi_n: blockwise unit-frame extension of xi_n . phi_{n-1} . d_n.
        SM g_tot = bar.contraction(n).mat * (phi.back().mat * tw.total_boundary(n).mat);
        SM phim(f, bar.space(n).quotient.dim, tn.space.dim);
        for (int s = 0; s <= n; ++s) {
            SM g_blk = rd::columns_slice(f, g_tot, tn.offsets[static_cast<std::size_t>(s)],
                                         tn.block_dims[static_cast<std::size_t>(s)]);
            LM ext = rd::extend_from_unit_slot(f, rd::view_of(tw.cell(n - s, s)), g_blk,
                                               ract_of(n), bar.space(n).quotient, cp.unit_E(),
                                               "comparison phi");
            rd::add_block(phim, ext.mat, 0, tn.offsets[static_cast<std::size_t>(s)]);
        }
        phi.emplace_back(tn.space, bar.space(n).quotient, phim);

        // psi_n: one-step formula through sigma_bar, cross-checked against
        // the defining recursion before it is accepted.
        auto bview = rd::view_of(bar.space(n), dE);
        SM ghat = tw.sigma_bar(n).mat *
                  (psi.back().mat * bar.space(n - 1).projection.mat);
        if (n % 2 != 0) ghat = -ghat;
        LM fast = rd::extend_from_unit_ghat(f, bview, ghat, tw.total_right_mult(n), tn.space,
                                            "comparison psi");
        SM g_rec = tw.sigma_bar(n).mat * (psi.back().mat * bar.differential(n).mat);
        LM rec = rd::extend_from_unit_slot(f, bview, g_rec, tw.total_right_mult(n), tn.space,
                                           cp.unit_E(), "comparison psi");
        if (!(fast.mat - rec.mat).is_zero())
            throw std::logic_error("comparison: the fast contraction disagrees with the recursion");
        psi.push_back(rec);
    }

    // omega_1 = 0 and omega_{n+1} = extension of
    // xi_{n+1} . (phi_n psi_n - id - omega_n . b'_n).
    omega.push_back(LM::zero(f, bar.space(0).quotient, bar.space(0).quotient));
    omega.push_back(LM::zero(f, bar.space(0).quotient, bar.space(1).quotient));
    for (int n = 1; n <= N; ++n) {
        SM defect = phi[static_cast<std::size_t>(n)].mat * psi[static_cast<std::size_t>(n)].mat -
                    SM::identity(f, bar.space(n).quotient.dim) -
                    omega[static_cast<std::size_t>(n)].mat * bar.differential(n).mat;
        SM g = bar.contraction(n + 1).mat * defect;
        omega.push_back(rd::extend_from_unit_slot(f, rd::view_of(bar.space(n), dE), g,
                                                  ract_of(n + 1), bar.space(n + 1).quotient,
                                                  cp.unit_E(), "comparison omega"));
    }
    return ComparisonData<F>{std::move(bar), std::move(phi), std::move(psi), std::move(omega)};
}

/* ------------- shuffle bundle ------------- */

template <class F>
struct ShuffleMaps {
    LinearMap<F> sh;                  // V^s (x) Abar^r -> Ebar^{r+s}
    std::vector<LinearMap<F>> legs;   // digamma(s, i), i = 0..r (empty when s = 0)
};

template <class F>
ShuffleMaps<F> shuffle_maps(const ResolutionTower<F>& tw, int s, int r) {
    std::vector<LinearMap<F>> legs;
    if (s >= 1)
        for (int i = 0; i <= r; ++i) legs.push_back(tw.digamma(s, i));
    return ShuffleMaps<F>{tw.shuffle(s, r), std::move(legs)};
}

/* ------------- filtrations ------------- */

enum class FiltrationKind {
    column_prefix,         // blocks with column index <= i inside X_n
    column_marked_prefix,  // (+)_{s<=i} of the twisted generator span, u = 1
    reduced_word_weight,   // words of Ebar^{(x)m} with >= m-i base-image slots
    reduced_word_marked,   // slots in j_nu(A) or gamma(V), <= i twisted, >= u marked
    framed_word_weight,    // the weight filtration inside a bar degree
    framed_word_marked,    // the marked filtration inside a bar degree
    generator_left,        // L: base-image frame, twisted middles, >= u marked slots
    generator_twist,       // U = L . gamma(V)
    generator_row,         // W = L . j_nu(A)
    generator_left_unreduced,  // L realised inside the partially reduced cell X'
    generator_twist_unreduced  // U realised inside X'
};

template <class F>
struct FiltrationSelector {
    FiltrationKind kind = FiltrationKind::column_prefix;
    int i = 0;
    int u = 0;
    int n = 0; // total degree (column_* / reduced_* / framed_* kinds)
    int r = 0; // cell row (generator_* kinds)
    int s = 0; // cell column (generator_* kinds)
    std::optional<SparseMat<F>> marked; // basis of the marked subspace R <= A (default K)
};

/* The span L^u_{r,s}(R): classes of words with a base-image left frame,
 * twisted middles, at least u coefficient slots inside R, and a unit-image
 * right frame.  Returns a basis in the cell's coordinates. */
template <class F>
SparseMat<F> generator_span(const ResolutionTower<F>& tw, int r, int s, int u,
                            const SparseMat<F>& rbasis, bool primed = false) {
    using SM = SparseMat<F>;
    F f = tw.field();
    const auto& c = primed ? tw.primed_cell(r, s) : tw.cell(r, s);
    const auto& cp = tw.product();
    const int dA = cp.system.A.space.dim;
    SM cols = SM::zero(f, c.space.dim, 0);
    const int want = u < 0 ? 0 : u;
    for (const auto& mask : resolution_detail::subsets_of_size(r, want)) {
        SM m = tw.base_image();
        for (int t = 0; t < s; ++t) m = SM::kron(m, cp.gamma.mat);
        std::size_t next = 0;
        for (int j = 0; j < r; ++j) {
            bool in_mask = next < mask.size() && mask[next] == j;
            if (in_mask) ++next;
            m = SM::kron(m, in_mask ? rbasis : SM::identity(f, dA));
        }
        m = SM::kron(m, tw.unit_image());
        cols = SM::hstack(cols, c.proj * m);
    }
    return image_basis(cols);
}

template <class F>
SparseMat<F> right_multiplied_span(const ResolutionTower<F>& tw, int r, int s,
                                   const SparseMat<F>& span, const SparseMat<F>& by,
                                   bool primed = false) {
    using SM = SparseMat<F>;
    return image_basis(tw.right_mult_matrix(r, s, primed) * SM::kron(span, by));
}

template <class F>
SparseMat<F> left_multiplied_span(const ResolutionTower<F>& tw, int r, int s,
                                  const SparseMat<F>& span, const SparseMat<F>& by,
                                  bool primed = false) {
    using SM = SparseMat<F>;
    return image_basis(tw.left_mult_matrix(r, s, primed) * SM::kron(by, span));
}

template <class F>
SparseMat<F> twist_generator_span(const ResolutionTower<F>& tw, int r, int s, int u,
                                  const SparseMat<F>& rbasis, bool primed = false) {
    return right_multiplied_span(tw, r, s, generator_span(tw, r, s, u, rbasis, primed),
                                 tw.product().gamma.mat, primed);
}

template <class F>
SparseMat<F> row_generator_span(const ResolutionTower<F>& tw, int r, int s, int u,
                                const SparseMat<F>& rbasis, bool primed = false) {
    return right_multiplied_span(tw, r, s, generator_span(tw, r, s, u, rbasis, primed),
                                 tw.base_image(), primed);
}

/* Words of Ebar^{(x)m} with at least m - i slots inside the base image. */
template <class F>
SparseMat<F> reduced_word_weight_span(const ResolutionTower<F>& tw, int m, int i) {
    using SM = SparseMat<F>;
    F f = tw.field();
    const auto& q = tw.reduced_word_space(m);
    if (i < 0) return SM::zero(f, q.quotient.dim, 0);
    const int dE = tw.product().E.space.dim;
    const int marked = m - (i < m ? i : m);
    SM cols = SM::zero(f, q.quotient.dim, 0);
    for (const auto& mask : resolution_detail::subsets_of_size(m, marked)) {
        SM w = SM::identity(f, 1);
        std::size_t next = 0;
        for (int j = 0; j < m; ++j) {
            bool in_mask = next < mask.size() && mask[next] == j;
            if (in_mask) ++next;
            w = SM::kron(w, in_mask ? tw.base_image() : SM::identity(f, dE));
        }
        cols = SM::hstack(cols, q.projection.mat * w);
    }
    return image_basis(cols);
}

/* Words whose slots all lie in j_nu(A) or gamma(V), with at most i twisted
 * slots and at least u slots inside j_nu(R); closed under the outer
 * K-action. */
template <class F>
SparseMat<F> reduced_word_marked_span(const ResolutionTower<F>& tw, int m, int i, int u,
                                      const SparseMat<F>& rbasis) {
    using SM = SparseMat<F>;
    F f = tw.field();
    const auto& q = tw.reduced_word_space(m);
    SM zero = SM::zero(f, q.quotient.dim, 0);
    if (i < 0 || u > m) return zero;
    if (m == 0) return u <= 0 ? SM::identity(f, q.quotient.dim) : zero;
    const auto& cp = tw.product();
    const int dE = cp.E.space.dim;
    SM jr = image_basis(cp.j_nu.mat * rbasis);
    SM cols = zero;
    const int gmax = i < m ? i : m;
    for (int g = 0; g <= gmax; ++g) {
        for (const auto& gset : resolution_detail::subsets_of_size(m, g)) {
            std::vector<int> rest;
            {
                std::size_t next = 0;
                for (int j = 0; j < m; ++j) {
                    if (next < gset.size() && gset[next] == j) ++next;
                    else rest.push_back(j);
                }
            }
            const int want = u < 0 ? 0 : u;
            if (want > static_cast<int>(rest.size())) continue;
            for (const auto& tsel :
                 resolution_detail::subsets_of_size(static_cast<int>(rest.size()), want)) {
                std::vector<int> kind(static_cast<std::size_t>(m), 0); // 0 = base, 1 = twist, 2 = R
                for (int j : gset) kind[static_cast<std::size_t>(j)] = 1;
                for (int tj : tsel) kind[static_cast<std::size_t>(rest[static_cast<std::size_t>(tj)])] = 2;
                SM w = SM::identity(f, 1);
                for (int j = 0; j < m; ++j) {
                    const int k = kind[static_cast<std::size_t>(j)];
                    w = SM::kron(w, k == 1 ? cp.gamma.mat : (k == 2 ? jr : tw.base_image()));
                }
                cols = SM::hstack(cols, q.projection.mat * w);
            }
        }
    }
    SM span = image_basis(cols);
    // Close under the outer K-action (inner junctions absorb it already).
    std::vector<int> dims(static_cast<std::size_t>(m), dE);
    auto mult_span = [&](bool left_side, const SM& s0) {
        SM acc = s0;
        for (int t = 0; t < tw.unit_image().cols; ++t) {
            auto lam = tw.unit_image().column(t);
            SM op = left_side ? cp.E.left_mult_operator(lam) : cp.E.right_mult_operator(lam);
            SM amb = embed_at_slot(f, dims, static_cast<std::size_t>(left_side ? 0 : m - 1), op);
            SM onq = (q.projection.mat * amb) * q.section.mat;
            acc = SM::hstack(acc, onq * s0);
        }
        return image_basis(acc);
    };
    span = mult_span(true, span);
    span = mult_span(false, span);
    return span;
}

/* The weight filtration transported into a bar degree: the outer frames are
 * free and at least n - i middles lie in the base image. */
template <class F>
SparseMat<F> framed_word_weight_span(const ResolutionTower<F>& tw, const BarResolution<F>& bar,
                                     int n, int i) {
    using SM = SparseMat<F>;
    F f = tw.field();
    const auto& q = bar.space(n);
    if (i < 0) return SM::zero(f, q.quotient.dim, 0);
    const int dE = tw.product().E.space.dim;
    const int marked = n - (i < n ? i : n);
    SM cols = SM::zero(f, q.quotient.dim, 0);
    for (const auto& mask : resolution_detail::subsets_of_size(n, marked)) {
        SM w = SM::identity(f, dE);
        std::size_t next = 0;
        for (int j = 0; j < n; ++j) {
            bool in_mask = next < mask.size() && mask[next] == j;
            if (in_mask) ++next;
            w = SM::kron(w, in_mask ? tw.base_image() : SM::identity(f, dE));
        }
        w = SM::kron(w, SM::identity(f, dE));
        cols = SM::hstack(cols, q.projection.mat * w);
    }
    return image_basis(cols);
}

/* The marked filtration transported into a bar degree (outer frames free,
 * so the K-closure is automatic). */
template <class F>
SparseMat<F> framed_word_marked_span(const ResolutionTower<F>& tw, const BarResolution<F>& bar,
                                     int n, int i, int u, const SparseMat<F>& rbasis) {
    using SM = SparseMat<F>;
    F f = tw.field();
    const auto& q = bar.space(n);
    SM zero = SM::zero(f, q.quotient.dim, 0);
    if (i < 0 || u > n) return zero;
    const auto& cp = tw.product();
    const int dE = cp.E.space.dim;
    SM jr = image_basis(cp.j_nu.mat * rbasis);
    SM cols = zero;
    const int gmax = i < n ? i : n;
    for (int g = 0; g <= gmax; ++g) {
        for (const auto& gset : resolution_detail::subsets_of_size(n, g)) {
            std::vector<int> rest;
            {
                std::size_t next = 0;
                for (int j = 0; j < n; ++j) {
                    if (next < gset.size() && gset[next] == j) ++next;
                    else rest.push_back(j);
                }
            }
            const int want = u < 0 ? 0 : u;
            if (want > static_cast<int>(rest.size())) continue;
            for (const auto& tsel :
                 resolution_detail::subsets_of_size(static_cast<int>(rest.size()), want)) {
                std::vector<int> kind(static_cast<std::size_t>(n), 0);
                for (int j : gset) kind[static_cast<std::size_t>(j)] = 1;
                for (int tj : tsel) kind[static_cast<std::size_t>(rest[static_cast<std::size_t>(tj)])] = 2;
                SM w = SM::identity(f, dE);
                for (int j = 0; j < n; ++j) {
                    const int k = kind[static_cast<std::size_t>(j)];
                    w = SM::kron(w, k == 1 ? cp.gamma.mat : (k == 2 ? jr : tw.base_image()));
                }
                w = SM::kron(w, SM::identity(f, dE));
                cols = SM::hstack(cols, q.projection.mat * w);
            }
        }
    }
    return image_basis(cols);
}

/* The block-prefix filtration of the total degree n: blocks with column
 * index <= i. */
template <class F>
SparseMat<F> column_prefix_span(const ResolutionTower<F>& tw, int n, int i) {
    using SM = SparseMat<F>;
    F f = tw.field();
    const auto& t = tw.total(n);
    if (i < 0) return SM::zero(f, t.space.dim, 0);
    const int smax = i < n ? i : n;
    int width = 0;
    for (int s = 0; s <= smax; ++s) width += t.block_dims[static_cast<std::size_t>(s)];
    SM m(f, t.space.dim, width);
    for (int j = 0; j < width; ++j) m.add_at(j, j, f.one());
    return m;
}

/* The marked block-prefix filtration: the twisted generator span with one
 * marked slot, summed over the blocks with column index <= i. */
template <class F>
SparseMat<F> column_marked_prefix_span(const ResolutionTower<F>& tw, int n, int i,
                                       const SparseMat<F>& rbasis) {
    using SM = SparseMat<F>;
    F f = tw.field();
    const auto& t = tw.total(n);
    if (i < 0) return SM::zero(f, t.space.dim, 0);
    const int smax = (i < n - 1 ? i : n - 1);
    SM cols = SM::zero(f, t.space.dim, 0);
    for (int s = 0; s <= smax; ++s) {
        SM blk = twist_generator_span(tw, n - s, s, 1, rbasis);
        cols = SM::hstack(cols, tw.block_embed(n, s) * blk);
    }
    return image_basis(cols);
}

/* Dispatcher over the filtration kinds; framed kinds need the bar
 * resolution they live in. */
template <class F>
SparseMat<F> filtration(const ResolutionTower<F>& tw, const FiltrationSelector<F>& sel,
                        const BarResolution<F>* bar = nullptr) {
    const SparseMat<F>& rb = sel.marked ? *sel.marked : tw.product().system.K.basis;
    switch (sel.kind) {
        case FiltrationKind::column_prefix:
            return column_prefix_span(tw, sel.n, sel.i);
        case FiltrationKind::column_marked_prefix:
            return column_marked_prefix_span(tw, sel.n, sel.i, rb);
        case FiltrationKind::reduced_word_weight:
            return reduced_word_weight_span(tw, sel.n, sel.i);
        case FiltrationKind::reduced_word_marked:
            return reduced_word_marked_span(tw, sel.n, sel.i, sel.u, rb);
        case FiltrationKind::framed_word_weight:
            if (!bar)
                throw std::invalid_argument("filtration: the framed kinds need a bar resolution");
            return framed_word_weight_span(tw, *bar, sel.n, sel.i);
        case FiltrationKind::framed_word_marked:
            if (!bar)
                throw std::invalid_argument("filtration: the framed kinds need a bar resolution");
            return framed_word_marked_span(tw, *bar, sel.n, sel.i, sel.u, rb);
        case FiltrationKind::generator_left:
            return generator_span(tw, sel.r, sel.s, sel.u, rb, false);
        case FiltrationKind::generator_twist:
            return twist_generator_span(tw, sel.r, sel.s, sel.u, rb, false);
        case FiltrationKind::generator_row:
            return row_generator_span(tw, sel.r, sel.s, sel.u, rb, false);
        case FiltrationKind::generator_left_unreduced:
            return generator_span(tw, sel.r, sel.s, sel.u, rb, true);
        case FiltrationKind::generator_twist_unreduced:
            return twist_generator_span(tw, sel.r, sel.s, sel.u, rb, true);
    }
    throw std::invalid_argument("filtration: unknown kind");
}

} // namespace crossed
