#pragma once

// Integer helpers shared by every module: big integers, rationals and
// word-sized modular arithmetic.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "tcong/errors.hpp"

namespace tcong {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using i64 = std::int64_t;
using i128 = __int128;

inline std::string to_string(const BigInt& x) { return x.str(); }

inline std::string to_string(const Rational& x) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

// Non-negative residue of a mod m (m > 0).
inline i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

inline i64 mod(const BigInt& a, i64 m) {
    BigInt r = a % m;
    if (r < 0) r += m;
    return static_cast<i64>(r);
}

inline i64 mulmod(i64 a, i64 b, i64 m) {
    return static_cast<i64>(static_cast<i128>(a) * b % m);
}

inline i64 powmod(i64 b, std::uint64_t e, i64 m) {
    i64 r = 1 % m;
    b = mod(b, m);
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

inline i64 powmod(i64 b, const BigInt& e, i64 m) {
    if (e < 0) throw InputError("powmod: negative exponent");
    i64 r = 1 % m;
    b = mod(b, m);
    BigInt x = e;
    while (x > 0) {
        if ((x & 1) != 0) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        x >>= 1;
    }
    return r;
}

// Returns (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0.
inline std::tuple<i64, i64, i64> xgcd(i64 a, i64 b) {
    i64 x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        i64 q = a / b;
        std::tie(a, b) = std::make_pair(b, a - q * b);
        std::tie(x0, x1) = std::make_pair(x1, x0 - q * x1);
        std::tie(y0, y1) = std::make_pair(y1, y0 - q * y1);
    }
    if (a < 0) return {-a, -x0, -y0};
    return {a, x0, y0};
}

inline BigInt big_gcd(BigInt a, BigInt b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        BigInt t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Inverse of a mod m; throws NotUnitError when gcd(a, m) != 1.
inline i64 invmod(i64 a, i64 m) {
    auto [g, x, y] = xgcd(mod(a, m), m);
    (void)y;
    if (g != 1) throw NotUnitError("invmod: " + std::to_string(a) + " not invertible mod " + std::to_string(m));
    return mod(x, m);
}

inline i64 ipow(i64 b, int e) {
    i64 r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// p-adic valuation of a nonzero integer.
inline int valuation(i64 a, i64 p) {
    if (a == 0) return 1 << 30;
    int v = 0;
    while (a % p == 0) {
        a /= p;
        ++v;
    }
    return v;
}

inline int valuation(BigInt a, i64 p) {
    if (a == 0) return 1 << 30;
    int v = 0;
    while (a % p == 0) {
        a /= p;
        ++v;
    }
    return v;
}

inline bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 q : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % q == 0) return n == q;
    }
    i64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (i64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        i64 x = powmod(a, static_cast<std::uint64_t>(d), n);
        if (x == 1 || x == n - 1) continue;
        bool comp = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                comp = false;
                break;
            }
        }
        if (comp) return false;
    }
    return true;
}

inline std::vector<i64> primes_up_to(i64 n) {
    std::vector<i64> out;
    if (n < 2) return out;
    std::vector<bool> sieve(static_cast<std::size_t>(n + 1), true);
    for (i64 i = 2; i <= n; ++i) {
        if (!sieve[static_cast<std::size_t>(i)]) continue;
        out.push_back(i);
        for (i64 j = i * i; j <= n; j += i) sieve[static_cast<std::size_t>(j)] = false;
    }
    return out;
}

// Prime factorization by trial division, (prime, exponent) ascending.
inline std::vector<std::pair<i64, int>> factorize(i64 n) {
    std::vector<std::pair<i64, int>> f;
    if (n < 0) n = -n;
    for (i64 q = 2; q * q <= n; ++q) {
        if (n % q) continue;
        int e = 0;
        while (n % q == 0) {
            n /= q;
            ++e;
        }
        f.emplace_back(q, e);
    }
    if (n > 1) f.emplace_back(n, 1);
    return f;
}

inline i64 euler_phi(i64 n) {
    i64 r = n;
    for (auto [q, e] : factorize(n)) {
        (void)e;
        r = r / q * (q - 1);
    }
    return r;
}

inline std::vector<i64> divisors(i64 n) {
    std::vector<i64> d;
    for (i64 i = 1; i * i <= n; ++i) {
        if (n % i) continue;
        d.push_back(i);
        if (i * i != n) d.push_back(n / i);
    }
    std::sort(d.begin(), d.end());
    return d;
}

// Multiplicative order of a mod n (gcd(a, n) = 1).
inline i64 mult_order(i64 a, i64 n) {
    a = mod(a, n);
    if (std::gcd(a, n) != 1) throw InputError("mult_order: not a unit");
    i64 phi = euler_phi(n);
    for (i64 d : divisors(phi)) {
        if (powmod(a, static_cast<std::uint64_t>(d), n) == 1 % n) return d;
    }
    return phi;
}

// Kronecker symbol (a | n) for n > 0.
inline int kronecker(i64 a, i64 n) {
    if (n <= 0) throw InputError("kronecker: n must be positive");
    int res = 1;
    while (n % 2 == 0) {
        n /= 2;
        if (a % 2 == 0) return 0;
        i64 am = mod(a, 8);
        if (am == 3 || am == 5) res = -res;
    }
    a = mod(a, n);
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            i64 nm = n % 8;
            if (nm == 3 || nm == 5) res = -res;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) res = -res;
        a %= n;
    }
    return n == 1 ? res : 0;
}

inline bool is_squarefree(i64 n) {
    for (auto [q, e] : factorize(n)) {
        (void)q;
        if (e > 1) return false;
    }
    return true;
}

inline BigInt isqrt(const BigInt& n) {
    if (n < 0) throw InputError("isqrt of negative");
    return boost::multiprecision::sqrt(n);
}

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
    return q;
}

inline BigInt floor(const Rational& x) {
    return floor_div(boost::multiprecision::numerator(x), boost::multiprecision::denominator(x));
}

// Smallest primitive root modulo a prime q.
inline i64 primitive_root(i64 q) {
    if (q == 2) return 1;
    auto f = factorize(q - 1);
    for (i64 g = 2; g < q; ++g) {
        bool ok = true;
        for (auto [r, e] : f) {
            (void)e;
            if (powmod(g, static_cast<std::uint64_t>((q - 1) / r), q) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
    throw InputError("primitive_root: no generator found");
}

}  // namespace tcong
