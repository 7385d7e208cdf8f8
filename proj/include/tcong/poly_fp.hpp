#pragma once

// Polynomials over a prime field F_l and factorization of cyclotomic
// polynomials by equal-degree splitting.

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tcong/arith.hpp"
#include "tcong/cyclotomic.hpp"

namespace tcong {

// Dense polynomial over F_l, lowest degree first, no trailing zeros.
struct PolyFp {
    i64 l = 2;
    std::vector<i64> c;

    PolyFp() = default;
    PolyFp(i64 ell, std::vector<i64> coeffs) : l(ell), c(std::move(coeffs)) {
        for (auto& x : c) x = mod(x, l);
        trim();
    }
    static PolyFp constant(i64 ell, i64 a) { return PolyFp(ell, {a}); }
    static PolyFp x_power(i64 ell, std::size_t k) {
        std::vector<i64> v(k + 1, 0);
        v[k] = 1;
        return PolyFp(ell, v);
    }

    void trim() {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }
    bool is_zero() const { return c.empty(); }
    int deg() const { return static_cast<int>(c.size()) - 1; }
    i64 lead() const { return c.empty() ? 0 : c.back(); }
    i64 coeff(std::size_t i) const { return i < c.size() ? c[i] : 0; }

    friend bool operator==(const PolyFp& a, const PolyFp& b) { return a.l == b.l && a.c == b.c; }
    friend bool operator!=(const PolyFp& a, const PolyFp& b) { return !(a == b); }
    friend bool operator<(const PolyFp& a, const PolyFp& b) {
        if (a.c.size() != b.c.size()) return a.c.size() < b.c.size();
        return std::lexicographical_compare(a.c.rbegin(), a.c.rend(), b.c.rbegin(), b.c.rend());
    }

    friend PolyFp operator+(const PolyFp& a, const PolyFp& b) {
        std::vector<i64> r(std::max(a.c.size(), b.c.size()), 0);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(i) + b.coeff(i);
        return PolyFp(a.l, r);
    }
    friend PolyFp operator-(const PolyFp& a, const PolyFp& b) {
        std::vector<i64> r(std::max(a.c.size(), b.c.size()), 0);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(i) - b.coeff(i);
        return PolyFp(a.l, r);
    }
    friend PolyFp operator*(const PolyFp& a, const PolyFp& b) {
        if (a.is_zero() || b.is_zero()) return PolyFp(a.l, {});
        std::vector<i64> r(a.c.size() + b.c.size() - 1, 0);
        for (std::size_t i = 0; i < a.c.size(); ++i) {
            if (!a.c[i]) continue;
            for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] = (r[i + j] + mulmod(a.c[i], b.c[j], a.l)) % a.l;
        }
        return PolyFp(a.l, r);
    }

    // Quotient and remainder.
    static std::pair<PolyFp, PolyFp> divmod(const PolyFp& a, const PolyFp& b) {
        if (b.is_zero()) throw InputError("PolyFp: division by zero");
        const i64 l = a.l;
        std::vector<i64> r = a.c;
        if (r.size() < b.c.size()) return {PolyFp(l, {}), a};
        std::vector<i64> q(r.size() - b.c.size() + 1, 0);
        i64 inv = invmod(b.lead(), l);
        const std::size_t db = b.c.size() - 1;
        for (std::size_t k = q.size(); k-- > 0;) {
            i64 t = mulmod(r[k + db], inv, l);
            q[k] = t;
            if (!t) continue;
            for (std::size_t j = 0; j <= db; ++j) r[k + j] = mod(r[k + j] - mulmod(t, b.c[j], l), l);
        }
        return {PolyFp(l, q), PolyFp(l, r)};
    }
    friend PolyFp operator%(const PolyFp& a, const PolyFp& b) { return divmod(a, b).second; }
    friend PolyFp operator/(const PolyFp& a, const PolyFp& b) { return divmod(a, b).first; }

    PolyFp monic() const {
        if (is_zero()) return *this;
        i64 inv = invmod(lead(), l);
        std::vector<i64> r(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) r[i] = mulmod(c[i], inv, l);
        return PolyFp(l, r);
    }

    i64 eval(i64 x) const {
        i64 r = 0;
        for (std::size_t i = c.size(); i-- > 0;) r = mod(mulmod(r, x, l) + c[i], l);
        return r;
    }

    // Substitution x -> x^k.
    PolyFp compose_power(std::size_t k) const {
        std::vector<i64> r(c.empty() ? 0 : (c.size() - 1) * k + 1, 0);
        for (std::size_t i = 0; i < c.size(); ++i) r[i * k] = c[i];
        return PolyFp(l, r);
    }

    std::string str() const {
        if (is_zero()) return "0";
        std::ostringstream os;
        bool any = false;
        for (std::size_t i = c.size(); i-- > 0;) {
            if (!c[i]) continue;
            if (any) os << " + ";
            if (i == 0 || c[i] != 1) os << c[i];
            if (i > 0) os << (c[i] != 1 ? "*x" : "x");
            if (i > 1) os << "^" << i;
            any = true;
        }
        return os.str();
    }
    friend std::ostream& operator<<(std::ostream& os, const PolyFp& f) { return os << f.str() << " mod " << f.l; }
};

inline PolyFp poly_gcd(PolyFp a, PolyFp b) {
    while (!b.is_zero()) {
        PolyFp r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

inline PolyFp mulmod_poly(const PolyFp& a, const PolyFp& b, const PolyFp& f) { return (a * b) % f; }

inline PolyFp powmod_poly(PolyFp base, BigInt e, const PolyFp& f) {
    PolyFp r(f.l, {1});
    base = base % f;
    while (e > 0) {
        if ((e & 1) != 0) r = mulmod_poly(r, base, f);
        base = mulmod_poly(base, base, f);
        e >>= 1;
    }
    return r % f;
}

// Reduction of an integer polynomial mod l.
inline PolyFp reduce_poly(const std::vector<i64>& coeffs, i64 l) { return PolyFp(l, coeffs); }

namespace detail {

// Splits a squarefree product of irreducibles of common degree f.
inline void equal_degree_split(const PolyFp& g, int f, std::mt19937_64& rng, std::vector<PolyFp>& out) {
    if (g.deg() == f) {
        out.push_back(g.monic());
        return;
    }
    if (g.deg() < f || g.deg() % f != 0) throw InputError("equal_degree_split: degree not a multiple");
    const i64 l = g.l;
    std::uniform_int_distribution<i64> dist(0, l - 1);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<i64> rc(static_cast<std::size_t>(g.deg()));
        for (auto& x : rc) x = dist(rng);
        PolyFp a(l, rc);
        if (a.deg() < 1) continue;
        PolyFp h;
        if (l == 2) {
            // absolute trace a + a^2 + ... + a^(2^(f-1))
            PolyFp t = a % g, s = a % g;
            for (int i = 1; i < f; ++i) {
                t = mulmod_poly(t, t, g);
                s = s + t;
            }
            h = s;
        } else {
            BigInt e = (boost::multiprecision::pow(BigInt(l), static_cast<unsigned>(f)) - 1) / 2;
            h = powmod_poly(a, e, g) - PolyFp(l, {1});
        }
        PolyFp d = poly_gcd(g, h);
        if (d.deg() > 0 && d.deg() < g.deg()) {
            equal_degree_split(d, f, rng, out);
            equal_degree_split(g / d, f, rng, out);
            return;
        }
    }
    throw Error("equal_degree_split: no split found");
}

}  // namespace detail

struct PolyFactor {
    PolyFp factor;
    int multiplicity = 1;
};

// Irreducible factors of Phi_n mod l (l prime, l not dividing n), sorted.
inline std::vector<PolyFactor> factor_cyclotomic_mod_ell(i64 n, i64 l, std::uint64_t seed = 0x5eed) {
    if (!is_prime(l)) throw InputError("factor_cyclotomic_mod_ell: l must be prime");
    if (n % l == 0) throw InputError("factor_cyclotomic_mod_ell: l divides n (ramified)");
    PolyFp phi = reduce_poly(cyclotomic_poly(n), l);
    const int f = static_cast<int>(n == 1 ? 1 : mult_order(l, n));
    std::vector<PolyFp> parts;
    std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(n * 1000003 + l));
    detail::equal_degree_split(phi, f, rng, parts);
    std::sort(parts.begin(), parts.end());
    std::vector<PolyFactor> out;
    for (auto& g : parts) out.push_back({g, 1});
    return out;
}

// Element of F_l[x]/(g) with g irreducible.
struct FiniteFieldElt {
    PolyFp modulus;
    PolyFp value;

    FiniteFieldElt(PolyFp g, PolyFp v) : modulus(std::move(g)), value(std::move(v)) {
        value = value % modulus;
    }
    i64 characteristic() const { return modulus.l; }
    int degree() const { return modulus.deg(); }

    friend bool operator==(const FiniteFieldElt& a, const FiniteFieldElt& b) {
        return a.modulus == b.modulus && a.value == b.value;
    }
    friend FiniteFieldElt operator*(const FiniteFieldElt& a, const FiniteFieldElt& b) {
        if (a.modulus != b.modulus) throw MismatchError("FiniteFieldElt: different fields");
        return {a.modulus, a.value * b.value};
    }
    friend FiniteFieldElt operator+(const FiniteFieldElt& a, const FiniteFieldElt& b) {
        if (a.modulus != b.modulus) throw MismatchError("FiniteFieldElt: different fields");
        return {a.modulus, a.value + b.value};
    }
    FiniteFieldElt pow(const BigInt& e) const { return {modulus, powmod_poly(value, e, modulus)}; }
};

}  // namespace tcong
