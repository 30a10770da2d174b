#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crossed/algebra.hpp"

namespace crossed {

/* Verdict of an axiom check. `witness` names the first basis tuple where the
 * identity fails, or is empty on success. */
struct CheckResult {
    bool ok = true;
    std::string witness;

    static CheckResult pass() { return {true, ""}; }
    static CheckResult fail(std::string w) { return {false, std::move(w)}; }
    explicit operator bool() const { return ok; }
};

namespace detail {

/* "(lab_1, ..., lab_t)" for the flat basis index of a tensor word. */
inline std::string tuple_label(const std::vector<BasedSpace>& spaces, int flat) {
    std::vector<int> dims;
    dims.reserve(spaces.size());
    for (const auto& s : spaces) dims.push_back(s.dim);
    auto idx = tensor_unindex(dims, flat);
    std::string out = "(";
    for (std::size_t t = 0; t < idx.size(); ++t) {
        if (t) out += ", ";
        out += spaces[t].labels[static_cast<std::size_t>(idx[t])];
    }
    return out + ")";
}

template <class F>
std::optional<int> first_column_mismatch(const SparseMat<F>& a, const SparseMat<F>& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("first_column_mismatch: shapes differ");
    for (int j = 0; j < a.cols; ++j)
        if (!vec_is_zero<F>(a.field, vec_sub<F>(a.field, a.column(j), b.column(j)))) return j;
    return std::nullopt;
}

} // namespace detail

/* Sweedler-style auxiliary data for a crossed product system: a coassociative
 * comultiplication and an associative product on V, together with maps
 * expressing the twist and the cocycle through them,
 *   gamma(v) j_nu(a) = (v{1} . a) (x) v{2}   with v . a := rho(v (x) a),
 *   gamma(v) gamma(w) = f(v{1} (x) w{1}) (x) v{2} w{2}.
 * Needed only by the closed form of the degree-two part of the differential. */
template <class F>
struct SweedlerData {
    LinearMap<F> comult; // V -> V (x) V
    LinearMap<F> mult_v; // V (x) V -> V
    LinearMap<F> rho;    // V (x) A -> A
    LinearMap<F> f_map;  // V (x) V -> A
};

/* The defining datum (A, V, chi, F, nu) together with the distinguished
 * subalgebra K of A used by the resolution, and optional Sweedler data. */
template <class F>
struct CrossedSystemSpec {
    F field;
    Algebra<F> A;
    BasedSpace V;
    LinearMap<F> chi;     // V (x) A -> A (x) V
    LinearMap<F> cocycle; // V (x) V -> A (x) V
    Vec<F> preunit;       // element of A (x) V
    SubalgebraEmbedding<F> K;
    std::optional<SweedlerData<F>> sweedler;

    BasedSpace AV() const { return tensor_space({A.space, V}); }
    BasedSpace VA() const { return tensor_space({V, A.space}); }
    BasedSpace VV() const { return tensor_space({V, V}); }

    LinearMap<F> idA() const { return LinearMap<F>::identity(field, A.space); }
    LinearMap<F> idV() const { return LinearMap<F>::identity(field, V); }

    /* nu as a dim(A(x)V) x 1 column. */
    SparseMat<F> preunit_column() const {
        SparseMat<F> c(field, A.space.dim * V.dim, 1);
        c.set_column(0, preunit);
        return c;
    }
};

namespace detail {

/* mu_A (x) id_V as a LinearMap A(x)A(x)V -> A(x)V. */
template <class F>
LinearMap<F> mult_tensor_idv(const CrossedSystemSpec<F>& s) {
    return LinearMap<F>::tensor(s.A.mult, s.idV());
}

/* Right action of A on the ambient: (mu_A (x) V) o (A (x) chi), from
 * (A(x)V)(x)A to A(x)V. */
template <class F>
LinearMap<F> right_ambient(const CrossedSystemSpec<F>& s) {
    auto a_chi = LinearMap<F>::tensor(s.idA(), s.chi);
    return mult_tensor_idv(s).compose(a_chi);
}

/* Left action of A on the ambient, A (x) (A(x)V) -> A(x)V. */
template <class F>
LinearMap<F> left_ambient(const CrossedSystemSpec<F>& s) {
    return mult_tensor_idv(s);
}

} // namespace detail

/* The projector x -> x . 1_A on A(x)V (right action through the twist). */
template <class F>
SparseMat<F> nabla_matrix(const CrossedSystemSpec<F>& s) {
    F f = s.field;
    SparseMat<F> unit_col(f, s.A.space.dim, 1);
    unit_col.set_column(0, s.A.unit_vec());
    return detail::right_ambient(s).mat *
           SparseMat<F>::kron(SparseMat<F>::identity(f, s.A.space.dim * s.V.dim), unit_col);
}

/* Shape consistency of the datum; throws std::invalid_argument. */
template <class F>
void validate_shapes(const CrossedSystemSpec<F>& s) {
    const int dA = s.A.space.dim, dV = s.V.dim;
    if (!s.A.unit) throw std::invalid_argument("crossed system: the base algebra must be unital");
    if (s.chi.mat.rows != dA * dV || s.chi.mat.cols != dV * dA)
        throw std::invalid_argument("crossed system: twist map must go from V(x)A to A(x)V");
    if (s.cocycle.mat.rows != dA * dV || s.cocycle.mat.cols != dV * dV)
        throw std::invalid_argument("crossed system: cocycle must go from V(x)V to A(x)V");
    if (static_cast<int>(s.preunit.size()) != dA * dV)
        throw std::invalid_argument("crossed system: preunit must live in A(x)V");
    if (s.K.ambient.space.dim != dA)
        throw std::invalid_argument("crossed system: K must be a subalgebra of the base algebra");
    if (s.sweedler) {
        const auto& sw = *s.sweedler;
        if (sw.comult.mat.rows != dV * dV || sw.comult.mat.cols != dV ||
            sw.mult_v.mat.rows != dV || sw.mult_v.mat.cols != dV * dV ||
            sw.rho.mat.rows != dA || sw.rho.mat.cols != dV * dA ||
            sw.f_map.mat.rows != dA || sw.f_map.mat.cols != dV * dV)
            throw std::invalid_argument("crossed system: auxiliary comultiplication data has wrong shapes");
    }
}

/* chi o (V (x) mu_A) = (mu_A (x) V) o (A (x) chi) o (chi (x) A)
 * on every basis triple (v, a, a'). */
template <class F>
CheckResult check_twisted_space(const CrossedSystemSpec<F>& s) {
    validate_shapes(s);
    auto lhs = s.chi.compose(LinearMap<F>::tensor(s.idV(), s.A.mult));
    auto rhs = detail::mult_tensor_idv(s)
                   .compose(LinearMap<F>::tensor(s.idA(), s.chi))
                   .compose(LinearMap<F>::tensor(s.chi, s.idA()));
    if (auto j = detail::first_column_mismatch(lhs.mat, rhs.mat))
        return CheckResult::fail("twisted-space identity fails at " +
                                 detail::tuple_label({s.V, s.A.space, s.A.space}, *j));
    return CheckResult::pass();
}

/* The three defining identities of the preunit,
 *   1: (mu(x)V) o (A(x)F) o (chi(x)V) o (V(x)nu) = nabla o (eta(x)V),
 *   2: (mu(x)V) o (A(x)F) o (nu(x)V)            = nabla o (eta(x)V),
 *   3: (mu(x)V) o (A(x)chi) o (nu(x)A)          = (mu(x)V) o (A(x)nu),
 * plus invariance of the cocycle image under the canonical projector. */
template <class F>
CheckResult check_preunit(const CrossedSystemSpec<F>& s) {
    validate_shapes(s);
    F f = s.field;
    const int dA = s.A.space.dim, dV = s.V.dim;
    auto nu_col = s.preunit_column();
    auto mul_v = detail::mult_tensor_idv(s).mat;             // A(x)A(x)V -> A(x)V
    auto a_f = LinearMap<F>::tensor(s.idA(), s.cocycle).mat; // A(x)V(x)V -> A(x)A(x)V
    auto a_chi = LinearMap<F>::tensor(s.idA(), s.chi).mat;   // A(x)V(x)A -> A(x)A(x)V
    auto nab = nabla_matrix(s);

    SparseMat<F> unit_col(f, dA, 1);
    unit_col.set_column(0, s.A.unit_vec());
    auto rhs12 = nab * SparseMat<F>::kron(unit_col, SparseMat<F>::identity(f, dV)); // v -> nabla(1(x)v)

    auto lhs2 = mul_v * (a_f * SparseMat<F>::kron(nu_col, SparseMat<F>::identity(f, dV)));
    if (auto j = detail::first_column_mismatch(lhs2, rhs12))
        return CheckResult::fail("preunit identity 2 fails at (" +
                                 s.V.labels[static_cast<std::size_t>(*j)] + ")");

    auto chi_v = LinearMap<F>::tensor(s.chi, s.idV()).mat; // V(x)A(x)V -> A(x)V(x)V
    auto lhs1 = mul_v * (a_f * (chi_v * SparseMat<F>::kron(SparseMat<F>::identity(f, dV), nu_col)));
    if (auto j = detail::first_column_mismatch(lhs1, rhs12))
        return CheckResult::fail("preunit identity 1 fails at (" +
                                 s.V.labels[static_cast<std::size_t>(*j)] + ")");

    auto lhs3 = mul_v * (a_chi * SparseMat<F>::kron(nu_col, SparseMat<F>::identity(f, dA)));
    auto rhs3 = mul_v * SparseMat<F>::kron(SparseMat<F>::identity(f, dA), nu_col);
    if (auto j = detail::first_column_mismatch(lhs3, rhs3))
        return CheckResult::fail("preunit identity 3 fails at (" +
                                 s.A.space.labels[static_cast<std::size_t>(*j)] + ")");

    if (auto j = detail::first_column_mismatch(nab * s.cocycle.mat, s.cocycle.mat))
        return CheckResult::fail("cocycle image is not invariant under the canonical projector at " +
                                 detail::tuple_label({s.V, s.V}, *j));
    return CheckResult::pass();
}

/* (i) twisted-module condition and (ii) cocycle condition. */
template <class F>
CheckResult check_cocycle_conditions(const CrossedSystemSpec<F>& s) {
    validate_shapes(s);
    auto mul_v = detail::mult_tensor_idv(s);
    auto a_f = LinearMap<F>::tensor(s.idA(), s.cocycle);
    auto a_chi = LinearMap<F>::tensor(s.idA(), s.chi);

    auto tm_lhs = mul_v.compose(a_chi).compose(LinearMap<F>::tensor(s.cocycle, s.idA()));
    auto tm_rhs = mul_v.compose(a_f)
                      .compose(LinearMap<F>::tensor(s.chi, s.idV()))
                      .compose(LinearMap<F>::tensor(s.idV(), s.chi));
    if (auto j = detail::first_column_mismatch(tm_lhs.mat, tm_rhs.mat))
        return CheckResult::fail("twisted-module condition fails at " +
                                 detail::tuple_label({s.V, s.V, s.A.space}, *j));

    auto cc_lhs = mul_v.compose(a_f).compose(LinearMap<F>::tensor(s.cocycle, s.idV()));
    auto cc_rhs = mul_v.compose(a_f)
                      .compose(LinearMap<F>::tensor(s.chi, s.idV()))
                      .compose(LinearMap<F>::tensor(s.idV(), s.cocycle));
    if (auto j = detail::first_column_mismatch(cc_lhs.mat, cc_rhs.mat))
        return CheckResult::fail("cocycle condition fails at " +
                                 detail::tuple_label({s.V, s.V, s.V}, *j));
    return CheckResult::pass();
}

struct ValidationReport {
    CheckResult twisted_space;
    CheckResult preunit;
    CheckResult cocycle;
    bool ok() const { return twisted_space.ok && preunit.ok && cocycle.ok; }
    std::string first_failure() const {
        if (!twisted_space.ok) return twisted_space.witness;
        if (!preunit.ok) return preunit.witness;
        return cocycle.witness;
    }
};

template <class F>
ValidationReport validate_crossed_system(const CrossedSystemSpec<F>& s) {
    return {check_twisted_space(s), check_preunit(s), check_cocycle_conditions(s)};
}

/* The unitary crossed product: the image E of the projector, with its
 * associative unital product, the section/retraction to the ambient, the
 * canonical maps from A and V, and the two A-actions. */
template <class F>
struct CrossedProductAlgebra {
    CrossedSystemSpec<F> system;
    LinearMap<F> nabla;        // A(x)V -> A(x)V, projector with image E
    LinearMap<F> iota;         // E -> A(x)V, the chosen image basis
    LinearMap<F> p;            // A(x)V -> E, retraction (p o iota = id)
    SparseMat<F> complement;   // basis of ker(nabla)
    LinearMap<F> mu_ambient;   // (A(x)V) (x) (A(x)V) -> A(x)V
    Algebra<F> E;              // associative product with unit p(nu)
    LinearMap<F> gamma;        // V -> E, class of 1_A (x) v
    LinearMap<F> j_prime;      // A -> A(x)V, a . nu
    LinearMap<F> j_nu;         // A -> E
    LinearMap<F> left_action;  // A (x) E -> E
    LinearMap<F> right_action; // E (x) A -> E

    Vec<F> unit_E() const { return *E.unit; }
};

namespace detail {

template <class F>
void require_equal(const SparseMat<F>& a, const SparseMat<F>& b, int item, const std::string& what) {
    if (auto j = first_column_mismatch(a, b))
        throw std::logic_error("crossed product self-check failed at item " + std::to_string(item) +
                               ": " + what + " (column " + std::to_string(*j) + ")");
}

} // namespace detail

template <class F>
CrossedProductAlgebra<F> build_crossed_product(const CrossedSystemSpec<F>& s) {
    validate_shapes(s);
    auto report = validate_crossed_system(s);
    if (!report.ok())
        throw std::domain_error("build_crossed_product: " + report.first_failure());

    F f = s.field;
    const int dA = s.A.space.dim, dV = s.V.dim, dAV = dA * dV;
    const BasedSpace AVs = s.AV();
    auto idAV = SparseMat<F>::identity(f, dAV);

    auto nab_mat = nabla_matrix(s);
    LinearMap<F> nab(AVs, AVs, nab_mat);
    if (detail::first_column_mismatch(nab_mat * nab_mat, nab_mat))
        throw std::logic_error("crossed product self-check failed: projector is not idempotent");

    /* E and the section/retraction. */
    auto im = image_basis(nab_mat);
    BasedSpace Espace(im.cols, "x");
    LinearMap<F> iota(Espace, AVs, im);
    Solver<F> coords(im);
    auto P = coords.solve_mat(nab_mat);
    if (!P) throw std::logic_error("crossed product self-check failed: projector image escapes its basis");
    LinearMap<F> p(AVs, Espace, *P);
    if (detail::first_column_mismatch((p.compose(iota)).mat, SparseMat<F>::identity(f, im.cols)))
        throw std::logic_error("crossed product self-check failed: retraction does not split the section");
    auto complement = kernel_basis(nab_mat);
    if (im.cols + complement.cols != dAV)
        throw std::logic_error("crossed product self-check failed: image and kernel do not complement");

    /* The ambient product (mu (x) V) o (mu (x) F) o (A (x) chi (x) V). */
    auto step1 = LinearMap<F>::tensor(LinearMap<F>::tensor(s.idA(), s.chi), s.idV());
    auto step2 = LinearMap<F>::tensor(s.A.mult, s.cocycle);
    auto mu_amb = detail::mult_tensor_idv(s).compose(step2).compose(step1);

    auto lamb = detail::left_ambient(s);
    auto ramb = detail::right_ambient(s);

    /* Item 1: ambient product is associative, A-linear on both sides, and
     * normalized with respect to the projector. */
    {
        auto idav_map = LinearMap<F>::identity(f, AVs);
        detail::require_equal(mu_amb.compose(LinearMap<F>::tensor(mu_amb, idav_map)).mat,
                              mu_amb.compose(LinearMap<F>::tensor(idav_map, mu_amb)).mat, 1,
                              "ambient product is not associative");
        detail::require_equal(mu_amb.compose(LinearMap<F>::tensor(lamb, idav_map)).mat,
                              lamb.compose(LinearMap<F>::tensor(s.idA(), mu_amb)).mat, 1,
                              "ambient product is not left linear over the base");
        detail::require_equal(mu_amb.compose(LinearMap<F>::tensor(idav_map, ramb)).mat,
                              ramb.compose(LinearMap<F>::tensor(mu_amb, s.idA())).mat, 1,
                              "ambient product is not right linear over the base");
        detail::require_equal(nab_mat * mu_amb.mat, mu_amb.mat, 1,
                              "ambient product is not normalized (left composite)");
        detail::require_equal(mu_amb.mat * SparseMat<F>::kron(nab_mat, nab_mat), mu_amb.mat, 1,
                              "ambient product is not normalized (right composite)");
    }

    /* Item 2: the preunit is central for the ambient product, multiplying by
     * it is the canonical projector, and it lies in E. */
    auto nu_col = s.preunit_column();
    {
        auto lmul_nu = mu_amb.mat * SparseMat<F>::kron(nu_col, idAV);
        auto rmul_nu = mu_amb.mat * SparseMat<F>::kron(idAV, nu_col);
        detail::require_equal(lmul_nu, rmul_nu, 2, "preunit is not central for the ambient product");
        detail::require_equal(rmul_nu, nab_mat, 2, "multiplication by the preunit is not the projector");
        if (!vec_is_zero<F>(f, vec_sub<F>(f, nab.apply(s.preunit), s.preunit)))
            throw std::logic_error("crossed product self-check failed at item 2: preunit escapes the image");
    }

    /* Item 3: restricted product is associative and unital ... */
    auto mult_E = p.mat * (mu_amb.mat * SparseMat<F>::kron(im, im));
    Algebra<F> algE = [&] {
        try {
            return make_algebra(f, Espace, mult_E, p.apply(s.preunit));
        } catch (const std::exception& e) {
            throw std::logic_error(std::string("crossed product self-check failed at item 3: ") + e.what());
        }
    }();

    /* ... and linear over the base on both sides. */
    auto left_act = LinearMap<F>(tensor_space({s.A.space, Espace}), Espace,
                                 p.mat * (lamb.mat * SparseMat<F>::kron(SparseMat<F>::identity(f, dA), im)));
    auto right_act = LinearMap<F>(tensor_space({Espace, s.A.space}), Espace,
                                  p.mat * (ramb.mat * SparseMat<F>::kron(im, SparseMat<F>::identity(f, dA))));
    {
        auto idE = SparseMat<F>::identity(f, Espace.dim);
        detail::require_equal(mult_E * SparseMat<F>::kron(left_act.mat, idE),
                              left_act.mat * SparseMat<F>::kron(SparseMat<F>::identity(f, dA), mult_E), 3,
                              "restricted product is not left linear over the base");
        detail::require_equal(mult_E * SparseMat<F>::kron(idE, right_act.mat),
                              right_act.mat * SparseMat<F>::kron(mult_E, SparseMat<F>::identity(f, dA)), 3,
                              "restricted product is not right linear over the base");
    }

    /* Item 4: section and retraction are multiplicative. */
    detail::require_equal(mu_amb.mat * SparseMat<F>::kron(im, im), im * mult_E, 4,
                          "section is not multiplicative");
    detail::require_equal(mult_E * SparseMat<F>::kron(p.mat, p.mat), p.mat * mu_amb.mat, 4,
                          "retraction is not multiplicative");

    /* Item 5: a -> a . nu is A-linear on both sides, multiplicative, and
     * lands in E. */
    auto jp_mat = lamb.mat * SparseMat<F>::kron(SparseMat<F>::identity(f, dA), nu_col);
    LinearMap<F> j_prime(s.A.space, AVs, jp_mat);
    {
        detail::require_equal(nab_mat * jp_mat, jp_mat, 5, "canonical section of the base escapes the image");
        detail::require_equal(jp_mat * s.A.mult.mat, mu_amb.mat * SparseMat<F>::kron(jp_mat, jp_mat), 5,
                              "canonical section of the base is not multiplicative");
        detail::require_equal(jp_mat * s.A.mult.mat, lamb.mat * SparseMat<F>::kron(SparseMat<F>::identity(f, dA), jp_mat),
                              5, "canonical section of the base is not left linear");
        detail::require_equal(jp_mat * s.A.mult.mat, ramb.mat * SparseMat<F>::kron(jp_mat, SparseMat<F>::identity(f, dA)),
                              5, "canonical section of the base is not right linear");
    }

    /* Item 6: its corestriction to E is multiplicative, unitary and A-linear. */
    auto j_nu_mat = p.mat * jp_mat;
    LinearMap<F> j_nu(s.A.space, Espace, j_nu_mat);
    {
        detail::require_equal(j_nu_mat * s.A.mult.mat, mult_E * SparseMat<F>::kron(j_nu_mat, j_nu_mat), 6,
                              "corestricted section of the base is not multiplicative");
        if (!vec_is_zero<F>(f, vec_sub<F>(f, j_nu.apply(s.A.unit_vec()), *algE.unit)))
            throw std::logic_error("crossed product self-check failed at item 6: section of the base is not unitary");
        detail::require_equal(j_nu_mat * s.A.mult.mat,
                              left_act.mat * SparseMat<F>::kron(SparseMat<F>::identity(f, dA), j_nu_mat), 6,
                              "corestricted section of the base is not left linear");
        detail::require_equal(j_nu_mat * s.A.mult.mat,
                              right_act.mat * SparseMat<F>::kron(j_nu_mat, SparseMat<F>::identity(f, dA)), 6,
                              "corestricted section of the base is not right linear");
    }

    /* Item 7: multiplication by the image of the base equals the actions. */
    {
        auto idE = SparseMat<F>::identity(f, Espace.dim);
        detail::require_equal(mult_E * SparseMat<F>::kron(j_nu_mat, idE), left_act.mat, 7,
                              "left multiplication by the image of the base is not the left action");
        detail::require_equal(mult_E * SparseMat<F>::kron(idE, j_nu_mat), right_act.mat, 7,
                              "right multiplication by the image of the base is not the right action");
    }

    /* Items 8 and 9: the twist and cocycle are recovered from products of
     * canonical elements, in the ambient and in E. */
    SparseMat<F> unit_col(f, dA, 1);
    unit_col.set_column(0, s.A.unit_vec());
    auto one_v = SparseMat<F>::kron(unit_col, SparseMat<F>::identity(f, dV)); // v -> 1_A (x) v
    auto gamma_mat = p.mat * (nab_mat * one_v);
    LinearMap<F> gamma(s.V, Espace, gamma_mat);
    {
        detail::require_equal(mu_amb.mat * SparseMat<F>::kron(one_v, jp_mat), s.chi.mat, 8,
                              "twist is not recovered by the ambient product");
        detail::require_equal(mu_amb.mat * SparseMat<F>::kron(one_v, one_v), s.cocycle.mat, 8,
                              "cocycle is not recovered by the ambient product");
        detail::require_equal(im * (mult_E * SparseMat<F>::kron(gamma_mat, j_nu_mat)), s.chi.mat, 9,
                              "twist is not recovered by the restricted product");
        detail::require_equal(im * (mult_E * SparseMat<F>::kron(gamma_mat, gamma_mat)), s.cocycle.mat, 9,
                              "cocycle is not recovered by the restricted product");
    }

    return CrossedProductAlgebra<F>{s,       nab,   iota,    p,    std::move(complement),
                                    mu_amb,  algE,  gamma,   j_prime, j_nu,
                                    left_act, right_act};
}

/* Iterated twist V^{(x)j} (x) A^{(x)l} -> A^{(x)l} (x) V^{(x)j}, defined by
 * the recursion on single factors and identities in the degenerate cases. */
template <class F>
LinearMap<F> iterate_chi(const CrossedSystemSpec<F>& s, int j, int l) {
    if (j < 0 || l < 0) throw std::invalid_argument("iterate_chi: exponents must be nonnegative");
    F f = s.field;
    auto power = [&](const BasedSpace& b, int n) {
        return tensor_space(std::vector<BasedSpace>(static_cast<std::size_t>(n), b));
    };
    if (j == 0) return LinearMap<F>::identity(f, power(s.A.space, l));
    if (l == 0) return LinearMap<F>::identity(f, power(s.V, j));

    /* chi_{j,1} */
    LinearMap<F> chi_j1 = s.chi;
    for (int t = 2; t <= j; ++t) {
        auto pre = LinearMap<F>::identity(f, power(s.V, t - 1));
        chi_j1 = LinearMap<F>::tensor(chi_j1, s.idV()).compose(LinearMap<F>::tensor(pre, s.chi));
    }
    /* chi_{j,l} */
    LinearMap<F> out = chi_j1;
    for (int t = 2; t <= l; ++t) {
        auto pre = LinearMap<F>::identity(f, power(s.A.space, t - 1));
        out = LinearMap<F>::tensor(pre, chi_j1).compose(LinearMap<F>::tensor(out, s.idA()));
    }
    return LinearMap<F>(tensor_space({power(s.V, j), power(s.A.space, l)}),
                        tensor_space({power(s.A.space, l), power(s.V, j)}), out.mat);
}

/* chi(V (x) R) <= R (x) V, with a witness pair on failure. */
template <class F>
CheckResult check_stable(const CrossedSystemSpec<F>& s, const SubalgebraEmbedding<F>& r) {
    validate_shapes(s);
    F f = s.field;
    auto span = SparseMat<F>::kron(r.basis, SparseMat<F>::identity(f, s.V.dim));
    Solver<F> membership(span);
    for (int v = 0; v < s.V.dim; ++v) {
        for (int t = 0; t < r.basis.cols; ++t) {
            auto img = s.chi.apply(vec_kron<F>(f, vec_unit<F>(f, s.V.dim, v),
                                               r.basis.column(t)));
            if (!membership.contains(img))
                return CheckResult::fail("stability fails at (" + s.V.labels[static_cast<std::size_t>(v)] +
                                         ", " + r.sub.space.labels[static_cast<std::size_t>(t)] + ")");
        }
    }
    return CheckResult::pass();
}

/* Kernel of A^{(x)l} -> A^{(x)_R l} (junction relations over R), optionally
 * extended by the kernel of the further slotwise quotient by R. */
template <class F>
SparseMat<F> relative_power_relations(F f, const Algebra<F>& a, const SubalgebraEmbedding<F>& r,
                                      int l, bool reduce_slots) {
    const int dA = a.space.dim;
    long total = 1;
    for (int t = 0; t < l; ++t) total *= dA;
    std::vector<int> dims(static_cast<std::size_t>(l), dA);
    SparseMat<F> rel(f, static_cast<int>(total), 0);
    for (int i = 0; i + 1 < l; ++i) {
        for (int t = 0; t < r.basis.cols; ++t) {
            auto lam = r.basis.column(t);
            auto d = embed_at_slot(f, dims, static_cast<std::size_t>(i), a.right_mult_operator(lam)) -
                     embed_at_slot(f, dims, static_cast<std::size_t>(i + 1), a.left_mult_operator(lam));
            rel = SparseMat<F>::hstack(rel, d);
        }
    }
    if (reduce_slots) {
        for (int i = 0; i < l; ++i) {
            auto span_dims = dims;
            span_dims[static_cast<std::size_t>(i)] = r.basis.cols; // inject the subspace at slot i
            rel = SparseMat<F>::hstack(rel, embed_at_slot(f, span_dims, static_cast<std::size_t>(i), r.basis));
        }
    }
    return rel;
}

/* The maps induced by the iterated twist on the relative tensor powers over a
 * stable subalgebra (and, with `reduce_slots`, on powers of the quotient). */
template <class F>
struct InducedTwist {
    QuotientSpace<F> domain;   // quotient of V^{(x)j} (x) A^{(x)l}
    QuotientSpace<F> codomain; // quotient of A^{(x)l} (x) V^{(x)j}
    LinearMap<F> map;
};

template <class F>
InducedTwist<F> induce_twist(const CrossedSystemSpec<F>& s, const SubalgebraEmbedding<F>& r,
                             int j, int l, bool reduce_slots) {
    auto stable = check_stable(s, r);
    if (!stable.ok) throw std::domain_error("induce_twist: " + stable.witness);
    F f = s.field;
    int dVj = 1;
    for (int t = 0; t < j; ++t) dVj *= s.V.dim;
    auto rel = relative_power_relations(f, s.A, r, l, reduce_slots);
    auto chi_jl = iterate_chi(s, j, l);
    auto qdom = quotient_space(chi_jl.domain,
                               SparseMat<F>::kron(SparseMat<F>::identity(f, dVj), rel));
    auto qcod = quotient_space(chi_jl.codomain,
                               SparseMat<F>::kron(rel, SparseMat<F>::identity(f, dVj)));
    return InducedTwist<F>{qdom, qcod, induced_on_quotients(chi_jl, qdom, qcod)};
}

/* Quotients of the crossed product and the base that the resolution uses. */
template <class F>
QuotientSpace<F> base_quotient(const CrossedSystemSpec<F>& s) { // A / K
    return quotient_by_subspace(s.A.space, s.K.basis);
}

/* Basis of the image of the base subalgebra inside the product. */
template <class F>
SparseMat<F> base_image_in_product(const CrossedProductAlgebra<F>& cp) {
    return image_basis(cp.j_nu.mat * cp.system.K.basis);
}

template <class F>
QuotientSpace<F> product_mod_base_subalgebra(const CrossedProductAlgebra<F>& cp) { // E / j(K)
    return quotient_by_subspace(cp.E.space, base_image_in_product(cp));
}

template <class F>
QuotientSpace<F> product_mod_base(const CrossedProductAlgebra<F>& cp) { // E / j(A)
    return quotient_by_subspace(cp.E.space, image_basis(cp.j_nu.mat));
}

/* Validates the Sweedler-style data: coassociativity, associativity, the
 * compatibility of the comultiplication with the product, and the two
 * defining identities relating it to the twist and the cocycle. */
template <class F>
CheckResult check_sweedler(const CrossedSystemSpec<F>& s) {
    validate_shapes(s);
    if (!s.sweedler) throw std::invalid_argument("check_sweedler: no auxiliary comultiplication data");
    F f = s.field;
    const auto& sw = *s.sweedler;
    const int dV = s.V.dim, dA = s.A.space.dim;

    auto coassoc_l = LinearMap<F>::tensor(sw.comult, s.idV()).compose(sw.comult);
    auto coassoc_r = LinearMap<F>::tensor(s.idV(), sw.comult).compose(sw.comult);
    if (auto j = detail::first_column_mismatch(coassoc_l.mat, coassoc_r.mat))
        return CheckResult::fail("comultiplication is not coassociative at (" +
                                 s.V.labels[static_cast<std::size_t>(*j)] + ")");

    auto assoc_l = sw.mult_v.compose(LinearMap<F>::tensor(sw.mult_v, s.idV()));
    auto assoc_r = sw.mult_v.compose(LinearMap<F>::tensor(s.idV(), sw.mult_v));
    if (auto j = detail::first_column_mismatch(assoc_l.mat, assoc_r.mat))
        return CheckResult::fail("product on V is not associative at " +
                                 detail::tuple_label({s.V, s.V, s.V}, *j));

    auto swap_mid_vv = swap_factors(f, {dV, dV, dV, dV}, 1);
    auto mult_compat_l = sw.comult.mat * sw.mult_v.mat;
    auto mult_compat_r = SparseMat<F>::kron(sw.mult_v.mat, sw.mult_v.mat) *
                         (swap_mid_vv * SparseMat<F>::kron(sw.comult.mat, sw.comult.mat));
    if (auto j = detail::first_column_mismatch(mult_compat_l, mult_compat_r))
        return CheckResult::fail("comultiplication is not multiplicative at " +
                                 detail::tuple_label({s.V, s.V}, *j));

    /* chi(v (x) a) = rho(v{1} (x) a) (x) v{2} */
    auto swap_va = swap_factors(f, {dV, dV, dA}, 1);
    auto chi_via_rho = SparseMat<F>::kron(sw.rho.mat, SparseMat<F>::identity(f, dV)) *
                       (swap_va * SparseMat<F>::kron(sw.comult.mat, SparseMat<F>::identity(f, dA)));
    if (auto j = detail::first_column_mismatch(chi_via_rho, s.chi.mat))
        return CheckResult::fail("twist is not expressed by the auxiliary action at " +
                                 detail::tuple_label({s.V, s.A.space}, *j));

    /* F(v (x) w) = f(v{1} (x) w{1}) (x) v{2} w{2} */
    auto cocycle_via_f = SparseMat<F>::kron(sw.f_map.mat, sw.mult_v.mat) *
                         (swap_mid_vv * SparseMat<F>::kron(sw.comult.mat, sw.comult.mat));
    if (auto j = detail::first_column_mismatch(cocycle_via_f, s.cocycle.mat))
        return CheckResult::fail("cocycle is not expressed by the auxiliary pairing at " +
                                 detail::tuple_label({s.V, s.V}, *j));
    return CheckResult::pass();
}

} // namespace crossed
