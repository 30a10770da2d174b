#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crossed/linalg.hpp"

namespace crossed {

/* Kronecker product of coordinate vectors; index convention matches
 * SparseMat::kron (first factor varies slowest). */
template <class F>
Vec<F> vec_kron(F f, const Vec<F>& u, const Vec<F>& v) {
    Vec<F> w(u.size() * v.size(), f.zero());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (f.is_zero(u[i])) continue;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (!f.is_zero(v[j])) w[i * v.size() + j] = f.mul(u[i], v[j]);
    }
    return w;
}

/* A finite-dimensional associative algebra with chosen basis. `unit` is
 * optional: some factors (like the twisting space V) carry only a product. */
template <class F>
struct Algebra {
    F field;
    BasedSpace space;
    LinearMap<F> mult; // space (x) space -> space
    std::optional<Vec<F>> unit;

    Vec<F> multiply(const Vec<F>& a, const Vec<F>& b) const { return mult.apply(vec_kron(field, a, b)); }
    Vec<F> basis_product(int i, int j) const { return mult.mat.column(i * space.dim + j); }
    Vec<F> unit_vec() const {
        if (!unit) throw std::logic_error("algebra has no unit");
        return *unit;
    }
    /* Matrix of m |-> a*m resp. m |-> m*a. */
    SparseMat<F> left_mult_operator(const Vec<F>& a) const {
        SparseMat<F> op(field, space.dim, space.dim);
        for (int j = 0; j < space.dim; ++j) {
            Vec<F> ej = vec_unit<F>(field, space.dim, j);
            op.set_column(j, mult.apply(vec_kron(field, a, ej)));
        }
        return op;
    }
    SparseMat<F> right_mult_operator(const Vec<F>& a) const {
        SparseMat<F> op(field, space.dim, space.dim);
        for (int j = 0; j < space.dim; ++j) {
            Vec<F> ej = vec_unit<F>(field, space.dim, j);
            op.set_column(j, mult.apply(vec_kron(field, ej, a)));
        }
        return op;
    }
};

/* Build and validate an algebra: associativity on all basis triples, and
 * two-sided unit laws when a unit is supplied. Violations name the witness. */
template <class F>
Algebra<F> make_algebra(F f, const BasedSpace& space, const SparseMat<F>& mult_matrix,
                        std::optional<Vec<F>> unit = std::nullopt, bool check_associative = true) {
    int n = space.dim;
    if (mult_matrix.rows != n || mult_matrix.cols != n * n)
        throw std::invalid_argument("make_algebra: multiplication matrix must be dim x dim^2");
    BasedSpace sq = tensor_space({space, space});
    Algebra<F> alg{f, space, LinearMap<F>(sq, space, mult_matrix), std::move(unit)};

    if (alg.unit) {
        if (static_cast<int>(alg.unit->size()) != n)
            throw std::invalid_argument("make_algebra: unit vector has wrong dimension");
        for (int i = 0; i < n; ++i) {
            Vec<F> e = vec_unit<F>(f, n, i);
            if (!vec_is_zero<F>(f, vec_sub<F>(f, alg.multiply(e, *alg.unit), e)))
                throw std::domain_error("make_algebra: unit law fails at (" +
                                        space.labels[static_cast<std::size_t>(i)] + ", 1)");
            if (!vec_is_zero<F>(f, vec_sub<F>(f, alg.multiply(*alg.unit, e), e)))
                throw std::domain_error("make_algebra: unit law fails at (1, " +
                                        space.labels[static_cast<std::size_t>(i)] + ")");
        }
    }
    if (check_associative) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Vec<F> ij = alg.basis_product(i, j);
                for (int k = 0; k < n; ++k) {
                    Vec<F> left = alg.multiply(ij, vec_unit<F>(f, n, k));
                    Vec<F> right = alg.multiply(vec_unit<F>(f, n, i), alg.basis_product(j, k));
                    if (!vec_is_zero<F>(f, vec_sub<F>(f, left, right)))
                        throw std::domain_error("make_algebra: associativity fails at basis triple (" +
                                                space.labels[static_cast<std::size_t>(i)] + ", " +
                                                space.labels[static_cast<std::size_t>(j)] + ", " +
                                                space.labels[static_cast<std::size_t>(k)] + ")");
                }
            }
    }
    return alg;
}

/* Convenience: the ground field as a one-dimensional algebra. */
template <class F>
Algebra<F> ground_field_algebra(F f) {
    BasedSpace s(1, std::vector<std::string>{"1"});
    SparseMat<F> m(f, 1, 1);
    m.add_at(0, 0, f.one());
    return make_algebra(f, s, m, Vec<F>{f.one()});
}

/* A subalgebra given by spanning columns inside an ambient algebra. The span
 * is reduced to a deterministic independent basis; closure under the ambient
 * product and presence of the ambient unit are enforced. */
template <class F>
struct SubalgebraEmbedding {
    Algebra<F> ambient;
    SparseMat<F> basis; // ambient.dim x sub.dim, independent columns
    Algebra<F> sub;     // induced algebra on the subspace
    Solver<F> coords_solver;

    /* Coordinates of an ambient vector in the subalgebra basis (if it lies in the span). */
    std::optional<Vec<F>> coords(const Vec<F>& ambient_vec) const { return coords_solver.solve(ambient_vec); }
    Vec<F> embed(const Vec<F>& sub_vec) const { return basis.apply(sub_vec); }
    bool is_full() const { return sub.space.dim == ambient.space.dim; }
};

template <class F>
SubalgebraEmbedding<F> make_subalgebra(const Algebra<F>& ambient, const SparseMat<F>& span,
                                       const std::string& stem = "k") {
    F f = ambient.field;
    if (span.rows != ambient.space.dim)
        throw std::invalid_argument("make_subalgebra: span rows do not match the ambient dimension");
    SparseMat<F> basis = image_basis(span);
    int k = basis.cols;
    Solver<F> solver(basis);
    if (!ambient.unit) throw std::invalid_argument("make_subalgebra: ambient algebra must be unital");
    auto unit_coords = solver.solve(*ambient.unit);
    if (!unit_coords)
        throw std::domain_error("make_subalgebra: subalgebra does not contain the ambient unit");

    BasedSpace sub_space(k, stem);
    SparseMat<F> sub_mult(f, k, k * k);
    for (int s = 0; s < k; ++s)
        for (int t = 0; t < k; ++t) {
            Vec<F> prod = ambient.multiply(basis.column(s), basis.column(t));
            auto c = solver.solve(prod);
            if (!c)
                throw std::domain_error("make_subalgebra: not closed under multiplication at basis pair (" +
                                        std::to_string(s) + ", " + std::to_string(t) + ")");
            sub_mult.set_column(s * k + t, *c);
        }
    Algebra<F> sub = make_algebra(f, sub_space, sub_mult, *unit_coords);
    return SubalgebraEmbedding<F>{ambient, basis, std::move(sub), std::move(solver)};
}

/* A space with a left action of one algebra and a right action of another
 * (either may be the ground field for a one-sided module). */
template <class F>
struct BimoduleStructure {
    BasedSpace space;
    Algebra<F> left_alg;
    LinearMap<F> left_action; // left_alg.space (x) space -> space
    Algebra<F> right_alg;
    LinearMap<F> right_action; // space (x) right_alg.space -> space

    Vec<F> act_left(const Vec<F>& a, const Vec<F>& m) const {
        return left_action.apply(vec_kron(left_alg.field, a, m));
    }
    Vec<F> act_right(const Vec<F>& m, const Vec<F>& a) const {
        return right_action.apply(vec_kron(right_alg.field, m, a));
    }
};

template <class F>
BimoduleStructure<F> make_bimodule(const BasedSpace& space, const Algebra<F>& left_alg,
                                   const LinearMap<F>& left_action, const Algebra<F>& right_alg,
                                   const LinearMap<F>& right_action) {
    F f = left_alg.field;
    int m = space.dim, nl = left_alg.space.dim, nr = right_alg.space.dim;
    if (left_action.mat.rows != m || left_action.mat.cols != nl * m)
        throw std::invalid_argument("make_bimodule: left action has wrong shape");
    if (right_action.mat.rows != m || right_action.mat.cols != m * nr)
        throw std::invalid_argument("make_bimodule: right action has wrong shape");
    BimoduleStructure<F> b{space, left_alg, left_action, right_alg, right_action};

    auto bad = [&](const std::string& what, int i, int j, int t) {
        throw std::domain_error("make_bimodule: " + what + " fails at (" + std::to_string(i) + ", " +
                                std::to_string(j) + ", " + std::to_string(t) + ")");
    };
    for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) {
            Vec<F> prod = left_alg.basis_product(i, j);
            for (int t = 0; t < m; ++t) {
                Vec<F> e = vec_unit<F>(f, m, t);
                Vec<F> lhs = b.act_left(prod, e);
                Vec<F> rhs = b.act_left(vec_unit<F>(f, nl, i), b.act_left(vec_unit<F>(f, nl, j), e));
                if (!vec_is_zero<F>(f, vec_sub<F>(f, lhs, rhs))) bad("left associativity", i, j, t);
            }
        }
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nr; ++j) {
            Vec<F> prod = right_alg.basis_product(i, j);
            for (int t = 0; t < m; ++t) {
                Vec<F> e = vec_unit<F>(f, m, t);
                Vec<F> lhs = b.act_right(e, prod);
                Vec<F> rhs = b.act_right(b.act_right(e, vec_unit<F>(f, nr, i)), vec_unit<F>(f, nr, j));
                if (!vec_is_zero<F>(f, vec_sub<F>(f, lhs, rhs))) bad("right associativity", i, j, t);
            }
        }
    for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nr; ++j)
            for (int t = 0; t < m; ++t) {
                Vec<F> e = vec_unit<F>(f, m, t);
                Vec<F> lhs = b.act_right(b.act_left(vec_unit<F>(f, nl, i), e), vec_unit<F>(f, nr, j));
                Vec<F> rhs = b.act_left(vec_unit<F>(f, nl, i), b.act_right(e, vec_unit<F>(f, nr, j)));
                if (!vec_is_zero<F>(f, vec_sub<F>(f, lhs, rhs))) bad("left/right commutation", i, j, t);
            }
    if (left_alg.unit)
        for (int t = 0; t < m; ++t) {
            Vec<F> e = vec_unit<F>(f, m, t);
            if (!vec_is_zero<F>(f, vec_sub<F>(f, b.act_left(*left_alg.unit, e), e))) bad("left unit", t, t, t);
        }
    if (right_alg.unit)
        for (int t = 0; t < m; ++t) {
            Vec<F> e = vec_unit<F>(f, m, t);
            if (!vec_is_zero<F>(f, vec_sub<F>(f, b.act_right(e, *right_alg.unit), e))) bad("right unit", t, t, t);
        }
    return b;
}

/* An algebra as a bimodule over itself. */
template <class F>
BimoduleStructure<F> regular_bimodule(const Algebra<F>& a) {
    return make_bimodule(a.space, a, a.mult, a, a.mult);
}

/* Restrict actions along a subalgebra embedding: precompose with the basis
 * inclusion on the acting tensor factor. */
template <class F>
LinearMap<F> restrict_left_action(const LinearMap<F>& action, const SubalgebraEmbedding<F>& k,
                                  const BasedSpace& module_space) {
    LinearMap<F> incl(k.sub.space, k.ambient.space, k.basis);
    return action.compose(LinearMap<F>::tensor(incl, LinearMap<F>::identity(action.mat.field, module_space)));
}

template <class F>
LinearMap<F> restrict_right_action(const LinearMap<F>& action, const SubalgebraEmbedding<F>& k,
                                   const BasedSpace& module_space) {
    LinearMap<F> incl(k.sub.space, k.ambient.space, k.basis);
    return action.compose(LinearMap<F>::tensor(LinearMap<F>::identity(action.mat.field, module_space), incl));
}

/* Scalar actions of the ground field viewed as a one-dimensional algebra. */
template <class F>
LinearMap<F> scalar_left_action(F f, const BasedSpace& s) {
    BasedSpace k(1, std::vector<std::string>{"1"});
    return LinearMap<F>(tensor_space({k, s}), s, SparseMat<F>::identity(f, s.dim));
}
template <class F>
LinearMap<F> scalar_right_action(F f, const BasedSpace& s) {
    BasedSpace k(1, std::vector<std::string>{"1"});
    return LinearMap<F>(tensor_space({s, k}), s, SparseMat<F>::identity(f, s.dim));
}

/* One factor of a relative tensor chain: a space with the actions of the
 * common algebra on each side. Only the actions facing a junction are
 * required; an outermost side may be left empty. */
template <class F>
struct ModuleFactor {
    BasedSpace space;
    std::optional<LinearMap<F>> left_action;  // actor (x) space -> space
    std::optional<LinearMap<F>> right_action; // space (x) actor -> space
};

/* M_1 (x)_S M_2 (x)_S ... (x)_S M_t realized as the quotient of the plain
 * tensor product by the middle-actor relations
 *   ... (x) (m_i . a) (x) m_{i+1} ... - ... (x) m_i (x) (a . m_{i+1}) ...
 * over all basis tuples and actor basis elements. */
template <class F>
QuotientSpace<F> relative_tensor_chain(F f, const std::vector<ModuleFactor<F>>& factors,
                                       const BasedSpace& actor) {
    std::vector<BasedSpace> spaces;
    spaces.reserve(factors.size());
    std::vector<int> dims;
    for (const auto& fac : factors) {
        spaces.push_back(fac.space);
        dims.push_back(fac.space.dim);
    }
    BasedSpace ambient = tensor_space(spaces);
    long total = ambient.dim;

    for (std::size_t i = 0; i + 1 < factors.size(); ++i) {
        if (!factors[i].right_action || !factors[i + 1].left_action)
            throw std::invalid_argument("relative_tensor_chain: junction " + std::to_string(i) +
                                        " is missing an action");
        if (factors[i].right_action->mat.cols != dims[i] * actor.dim ||
            factors[i + 1].left_action->mat.cols != actor.dim * dims[i + 1])
            throw std::invalid_argument("relative_tensor_chain: action shape mismatch at junction " +
                                        std::to_string(i));
    }

    std::vector<Vec<F>> rel_cols;
    for (int flat = 0; flat < total; ++flat) {
        auto tup = tensor_unindex(dims, flat);
        for (std::size_t i = 0; i + 1 < factors.size(); ++i) {
            for (int a = 0; a < actor.dim; ++a) {
                Vec<F> av = vec_unit<F>(f, actor.dim, a);
                /* (m_i . a) placed in slot i */
                Vec<F> mi = vec_unit<F>(f, dims[i], tup[i]);
                Vec<F> mi_a = factors[i].right_action->apply(vec_kron(f, mi, av));
                /* (a . m_{i+1}) placed in slot i+1 */
                Vec<F> mj = vec_unit<F>(f, dims[i + 1], tup[i + 1]);
                Vec<F> a_mj = factors[i + 1].left_action->apply(vec_kron(f, av, mj));

                Vec<F> col(static_cast<std::size_t>(total), f.zero());
                auto tweak = [&](std::size_t slot, const Vec<F>& repl, typename F::Elem sign) {
                    std::vector<int> t2 = tup;
                    for (int b = 0; b < dims[slot]; ++b) {
                        if (f.is_zero(repl[static_cast<std::size_t>(b)])) continue;
                        t2[slot] = b;
                        int fl = tensor_index(dims, t2);
                        col[static_cast<std::size_t>(fl)] =
                            f.add(col[static_cast<std::size_t>(fl)],
                                  f.mul(sign, repl[static_cast<std::size_t>(b)]));
                    }
                };
                tweak(i, mi_a, f.one());
                tweak(i + 1, a_mj, f.neg(f.one()));
                if (!vec_is_zero<F>(f, col)) rel_cols.push_back(std::move(col));
            }
        }
    }
    SparseMat<F> relations = SparseMat<F>::from_columns(f, static_cast<int>(total), rel_cols);
    return quotient_space(ambient, relations);
}

/* M (x)_S N for a right S-module M and a left S-module N. */
template <class F>
QuotientSpace<F> tensor_over_subalgebra(const BimoduleStructure<F>& m, const BimoduleStructure<F>& n,
                                        const Algebra<F>& actor) {
    F f = actor.field;
    if (m.right_alg.space.dim != actor.space.dim || n.left_alg.space.dim != actor.space.dim)
        throw std::invalid_argument("tensor_over_subalgebra: actions are not over the given algebra");
    std::vector<ModuleFactor<F>> factors{{m.space, std::nullopt, m.right_action},
                                         {n.space, n.left_action, std::nullopt}};
    return relative_tensor_chain(f, factors, actor.space);
}

/* Quotient by a designated subspace (A-bar = A/K, E-tilde = E/j(A), ...). */
template <class F>
QuotientSpace<F> quotient_by_subspace(const BasedSpace& ambient, const SparseMat<F>& image) {
    return quotient_space(ambient, image);
}

/* Does f map the distinguished subspace of qdom into that of qcod? Returns
 * the index of an offending relation column, or nothing when it descends. */
template <class F>
std::optional<int> descent_obstruction(const LinearMap<F>& f, const QuotientSpace<F>& qdom,
                                       const QuotientSpace<F>& qcod) {
    auto probe = qcod.projection.mat * (f.mat * qdom.subspace_basis);
    for (int j = 0; j < probe.cols; ++j)
        if (!probe.col[j].empty()) return j;
    return std::nullopt;
}

/* The unique map on quotients with g o proj_dom = proj_cod o f; rejects maps
 * that do not descend, naming a relation column with nonzero image. */
template <class F>
LinearMap<F> induced_on_quotients(const LinearMap<F>& f, const QuotientSpace<F>& qdom,
                                  const QuotientSpace<F>& qcod) {
    if (f.domain.dim != qdom.ambient.dim || f.codomain.dim != qcod.ambient.dim)
        throw std::invalid_argument("induced_on_quotients: map does not fit the ambients");
    if (auto bad = descent_obstruction(f, qdom, qcod))
        throw std::domain_error("induced_on_quotients: map does not descend; relation column " +
                                std::to_string(*bad) + " has nonzero image in the codomain quotient");
    return LinearMap<F>(qdom.quotient, qcod.quotient,
                        qcod.projection.mat * (f.mat * qdom.section.mat));
}

/* Induce only on the codomain (domain unchanged). */
template <class F>
LinearMap<F> project_codomain(const LinearMap<F>& f, const QuotientSpace<F>& qcod) {
    return LinearMap<F>(f.domain, qcod.quotient, qcod.projection.mat * f.mat);
}

/* Descend a map to a quotient of its domain only; the map must kill the
 * quotient relations, so that composing with the section is representative
 * independent. */
template <class F>
LinearMap<F> descend_domain(const LinearMap<F>& f, const QuotientSpace<F>& qdom) {
    if (f.domain.dim != qdom.ambient.dim)
        throw std::invalid_argument("descend_domain: map does not fit the ambient");
    auto probe = f.mat * qdom.subspace_basis;
    for (int j = 0; j < probe.cols; ++j)
        if (!probe.col[j].empty())
            throw std::domain_error("descend_domain: map does not kill relation column " + std::to_string(j));
    return LinearMap<F>(qdom.quotient, f.codomain, f.mat * qdom.section.mat);
}

/* id (x) ... (x) op (x) ... (x) id acting on the `slot`-th factor of a tensor
 * product with the given factor dimensions; op consumes dims[slot]. */
template <class F>
SparseMat<F> embed_at_slot(F f, const std::vector<int>& dims, std::size_t slot,
                           const SparseMat<F>& op) {
    if (slot >= dims.size()) throw std::invalid_argument("embed_at_slot: slot out of range");
    if (op.cols != dims[slot]) throw std::invalid_argument("embed_at_slot: operator does not consume the slot");
    int pre = 1, post = 1;
    for (std::size_t t = 0; t < slot; ++t) pre *= dims[t];
    for (std::size_t t = slot + 1; t < dims.size(); ++t) post *= dims[t];
    auto left = SparseMat<F>::kron(SparseMat<F>::identity(f, pre), op);
    return SparseMat<F>::kron(left, SparseMat<F>::identity(f, post));
}

/* Permutation matrix exchanging the adjacent tensor factors i and i+1 of a
 * tensor product with the given factor dimensions. */
template <class F>
SparseMat<F> swap_factors(F f, const std::vector<int>& dims, std::size_t i) {
    if (i + 1 >= dims.size()) throw std::invalid_argument("swap_factors: factor out of range");
    long total = 1;
    for (int d : dims) total *= d;
    std::vector<int> out_dims = dims;
    std::swap(out_dims[i], out_dims[i + 1]);
    SparseMat<F> m(f, static_cast<int>(total), static_cast<int>(total));
    for (int flat = 0; flat < total; ++flat) {
        auto idx = tensor_unindex(dims, flat);
        std::swap(idx[i], idx[i + 1]);
        m.add_at(tensor_index(out_dims, idx), flat, f.one());
    }
    return m;
}

/* Basis of the span of all products x·y for x, y running over the columns of
 * two coordinate matrices (columns live in the algebra's space). */
template <class F>
SparseMat<F> product_span(const Algebra<F>& alg, const SparseMat<F>& xs, const SparseMat<F>& ys) {
    if (xs.rows != alg.space.dim || ys.rows != alg.space.dim)
        throw std::invalid_argument("product_span: operand columns do not live in the algebra");
    F f = alg.field;
    SparseMat<F> prods(f, alg.space.dim, xs.cols * ys.cols);
    int j = 0;
    for (int x = 0; x < xs.cols; ++x)
        for (int y = 0; y < ys.cols; ++y)
            prods.set_column(j++, alg.multiply(xs.column(x), ys.column(y)));
    return image_basis(prods);
}

} // namespace crossed
