#pragma once

#include <cassert>
#include <string>
#include <vector>

#include "crossed/matrix.hpp"

namespace crossed {

/* A finite-dimensional vector space with a fixed ordered basis. Labels are
 * diagnostics only; all equality is by coordinates. */
struct BasedSpace {
    int dim = 0;
    std::vector<std::string> labels;

    BasedSpace() = default;
    explicit BasedSpace(int d, std::string stem = "e") : dim(d) {
        labels.reserve(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) labels.push_back(stem + std::to_string(i));
    }
    BasedSpace(int d, std::vector<std::string> ls) : dim(d), labels(std::move(ls)) {
        assert(static_cast<int>(labels.size()) == dim);
    }

    bool operator==(const BasedSpace& o) const { return dim == o.dim; }
};

/* Tensor product of based spaces over the ground field; labels are tensor
 * words, flat index = tensor_index over the factor dims. An empty factor
 * list gives the ground field (dim 1). */
inline BasedSpace tensor_space(const std::vector<BasedSpace>& factors) {
    if (factors.empty()) return BasedSpace(1, std::vector<std::string>{"1"});
    long dim = 1;
    for (const auto& s : factors) dim *= s.dim;
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(dim));
    std::vector<int> dims;
    dims.reserve(factors.size());
    for (const auto& s : factors) dims.push_back(s.dim);
    for (long flat = 0; flat < dim; ++flat) {
        auto idx = tensor_unindex(dims, static_cast<int>(flat));
        std::string w;
        for (std::size_t t = 0; t < idx.size(); ++t) {
            if (t) w += "(x)";
            w += factors[t].labels[static_cast<std::size_t>(idx[t])];
        }
        labels.push_back(std::move(w));
    }
    return BasedSpace(static_cast<int>(dim), std::move(labels));
}

/* A linear map between based spaces; column j of `mat` is the image of the
 * j-th domain basis vector. */
template <class F>
struct LinearMap {
    BasedSpace domain;
    BasedSpace codomain;
    SparseMat<F> mat;

    LinearMap(BasedSpace dom, BasedSpace cod, SparseMat<F> m)
        : domain(std::move(dom)), codomain(std::move(cod)), mat(std::move(m)) {
        assert(mat.rows == codomain.dim && mat.cols == domain.dim);
    }

    static LinearMap identity(F f, const BasedSpace& s) {
        return LinearMap(s, s, SparseMat<F>::identity(f, s.dim));
    }
    static LinearMap zero(F f, const BasedSpace& dom, const BasedSpace& cod) {
        return LinearMap(dom, cod, SparseMat<F>::zero(f, cod.dim, dom.dim));
    }

    Vec<F> apply(const Vec<F>& x) const { return mat.apply(x); }

    /* this after g (usual composition: (*this) o g). */
    LinearMap compose(const LinearMap& g) const {
        assert(g.codomain.dim == domain.dim);
        return LinearMap(g.domain, codomain, mat * g.mat);
    }

    LinearMap operator+(const LinearMap& o) const {
        assert(domain.dim == o.domain.dim && codomain.dim == o.codomain.dim);
        return LinearMap(domain, codomain, mat + o.mat);
    }
    LinearMap operator-(const LinearMap& o) const {
        assert(domain.dim == o.domain.dim && codomain.dim == o.codomain.dim);
        return LinearMap(domain, codomain, mat - o.mat);
    }
    LinearMap scaled(const typename F::Elem& c) const {
        return LinearMap(domain, codomain, mat.scaled(c));
    }
    LinearMap operator-() const { return LinearMap(domain, codomain, -mat); }

    bool operator==(const LinearMap& o) const {
        return domain.dim == o.domain.dim && codomain.dim == o.codomain.dim && mat == o.mat;
    }

    static LinearMap tensor(const LinearMap& a, const LinearMap& b) {
        return LinearMap(tensor_space({a.domain, b.domain}), tensor_space({a.codomain, b.codomain}),
                         SparseMat<F>::kron(a.mat, b.mat));
    }
};

} // namespace crossed
