#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace crossed {

/* Field of exact rationals. Stateless; elements are GMP rationals in lowest
 * terms with positive denominator (mpq_class canonical form). */
struct QField {
    using Elem = mpq_class;

    Elem zero() const { return Elem(0); }
    Elem one() const { return Elem(1); }
    Elem from_int(long n) const { return Elem(n); }

    Elem add(const Elem& a, const Elem& b) const { return a + b; }
    Elem sub(const Elem& a, const Elem& b) const { return a - b; }
    Elem mul(const Elem& a, const Elem& b) const { return a * b; }
    Elem neg(const Elem& a) const { return -a; }
    Elem inv(const Elem& a) const {
        if (a == 0) throw std::domain_error("QField::inv: division by zero");
        return Elem(1) / a;
    }
    Elem div(const Elem& a, const Elem& b) const { return mul(a, inv(b)); }

    bool is_zero(const Elem& a) const { return a == 0; }
    bool eq(const Elem& a, const Elem& b) const { return a == b; }

    std::string to_string(const Elem& a) const { return a.get_str(); }

    /* Accepts "7", "-7", "3/4", "-3/4". Rejects anything else. */
    std::optional<Elem> parse(std::string_view s) const {
        if (s.empty()) return std::nullopt;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        bool seen_digit = false, seen_slash = false;
        for (std::size_t j = i; j < s.size(); ++j) {
            if (s[j] == '/') {
                if (seen_slash || !seen_digit || j + 1 == s.size()) return std::nullopt;
                seen_slash = true;
                seen_digit = false;
            } else if (s[j] >= '0' && s[j] <= '9') {
                seen_digit = true;
            } else {
                return std::nullopt;
            }
        }
        if (!seen_digit) return std::nullopt;
        Elem e(std::string(s), 10);
        if (seen_slash && e.get_den() == 0) return std::nullopt;
        e.canonicalize();
        return e;
    }

    bool operator==(const QField&) const { return true; }
};

/* Prime field F_p with runtime modulus. Elements are residues 0 <= r < p
 * stored as plain integers; all arithmetic goes through the field object. */
struct PField {
    using Elem = std::uint64_t;

    std::uint64_t p;

    explicit PField(std::uint64_t prime) : p(prime) {
        if (p < 2 || p > (1ull << 31)) throw std::invalid_argument("PField: modulus out of range");
        for (std::uint64_t d = 2; d * d <= p; ++d)
            if (p % d == 0) throw std::invalid_argument("PField: modulus is not prime");
    }

    Elem zero() const { return 0; }
    Elem one() const { return 1 % p; }
    Elem from_int(long n) const {
        long r = n % static_cast<long>(p);
        if (r < 0) r += static_cast<long>(p);
        return static_cast<Elem>(r);
    }

    Elem add(Elem a, Elem b) const {
        Elem s = a + b;
        return s >= p ? s - p : s;
    }
    Elem sub(Elem a, Elem b) const { return a >= b ? a - b : a + p - b; }
    Elem mul(Elem a, Elem b) const {
        return static_cast<Elem>((static_cast<unsigned __int128>(a) * b) % p);
    }
    Elem neg(Elem a) const { return a == 0 ? 0 : p - a; }
    Elem inv(Elem a) const {
        if (a == 0) throw std::domain_error("PField::inv: division by zero");
        Elem r = one(), base = a;
        for (std::uint64_t e = p - 2; e; e >>= 1) {
            if (e & 1) r = mul(r, base);
            base = mul(base, base);
        }
        return r;
    }
    Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }

    bool is_zero(Elem a) const { return a == 0; }
    bool eq(Elem a, Elem b) const { return a == b; }

    std::string to_string(Elem a) const { return std::to_string(a); }

    std::optional<Elem> parse(std::string_view s) const {
        QField q;
        auto r = q.parse(s);
        if (!r) return std::nullopt;
        mpz_class num = r->get_num(), den = r->get_den();
        mpz_class pz(static_cast<unsigned long>(p));
        mpz_class nm = num % pz, dm = den % pz;
        if (nm < 0) nm += pz;
        if (dm == 0) return std::nullopt;
        return div(nm.get_ui(), dm.get_ui());
    }

    bool operator==(const PField& o) const { return p == o.p; }
};

} // namespace crossed
