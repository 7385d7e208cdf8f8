#pragma once

// Exact cyclotomic integers Z[zeta_n] and their reductions (Z/p^N)[zeta_n],
// both stored on the power basis 1, zeta, ..., zeta^(phi(n)-1).

#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "tcong/arith.hpp"
#include "tcong/qlinalg.hpp"
#include "tcong/residue.hpp"

namespace tcong {

namespace detail {

inline std::vector<i64> compute_cyclotomic(i64 n) {
    // x^n - 1 divided by Phi_d for every proper divisor d.
    std::vector<i64> num(static_cast<std::size_t>(n + 1), 0);
    num[0] = -1;
    num[static_cast<std::size_t>(n)] = 1;
    for (i64 d : divisors(n)) {
        if (d == n) continue;
        std::vector<i64> den = compute_cyclotomic(d);
        // exact division by a monic polynomial
        std::size_t dn = num.size() - 1, dd = den.size() - 1;
        std::vector<i64> q(dn - dd + 1, 0);
        for (std::size_t i = dn + 1; i-- > dd;) {
            i64 c = num[i];
            q[i - dd] = c;
            if (c == 0) continue;
            for (std::size_t j = 0; j <= dd; ++j) num[i - dd + j] -= c * den[j];
        }
        num = q;
    }
    return num;
}

}  // namespace detail

// Coefficients of the n-th cyclotomic polynomial, lowest degree first.
inline const std::vector<i64>& cyclotomic_poly(i64 n) {
    if (n < 1) throw InputError("cyclotomic_poly: n must be positive");
    static std::mutex mu;
    static std::map<i64, std::vector<i64>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::compute_cyclotomic(n)).first;
    return it->second;
}

namespace detail {

// Reduces a coefficient vector in place modulo the monic polynomial f;
// Ops supplies the scalar arithmetic.
template <class T, class SubMul>
void reduce_monic(std::vector<T>& c, const std::vector<i64>& f, SubMul submul) {
    const std::size_t d = f.size() - 1;
    for (std::size_t i = c.size(); i-- > d;) {
        if (c[i] == 0) continue;
        T lead = c[i];
        for (std::size_t j = 0; j < d; ++j) {
            if (f[j] != 0) submul(c[i - d + j], lead, f[j]);
        }
        c[i] = 0;
    }
    c.resize(d);
}

}  // namespace detail

class CyclotomicInt {
public:
    CyclotomicInt() : CyclotomicInt(1) {}
    explicit CyclotomicInt(i64 n) : n_(n), c_(static_cast<std::size_t>(euler_phi(n)), BigInt(0)) {
        if (n < 1) throw InputError("CyclotomicInt: conductor must be positive");
    }
    CyclotomicInt(i64 n, std::vector<BigInt> coeffs) : n_(n), c_(std::move(coeffs)) {
        reduce_();
    }

    static CyclotomicInt from_int(i64 n, const BigInt& a) {
        CyclotomicInt r(n);
        r.c_[0] = a;
        return r;
    }
    static CyclotomicInt one(i64 n) { return from_int(n, 1); }
    static CyclotomicInt zeta_power(i64 n, i64 k) {
        std::vector<BigInt> c(static_cast<std::size_t>(mod(k, n) + 1), BigInt(0));
        c.back() = 1;
        return CyclotomicInt(n, std::move(c));
    }

    i64 conductor() const { return n_; }
    const std::vector<BigInt>& coeffs() const { return c_; }

    bool is_zero() const {
        for (const auto& x : c_)
            if (x != 0) return false;
        return true;
    }
    bool is_rational() const {
        for (std::size_t i = 1; i < c_.size(); ++i)
            if (c_[i] != 0) return false;
        return true;
    }

    friend bool operator==(const CyclotomicInt& a, const CyclotomicInt& b) {
        return a.n_ == b.n_ && a.c_ == b.c_;
    }
    friend bool operator!=(const CyclotomicInt& a, const CyclotomicInt& b) { return !(a == b); }

    friend CyclotomicInt operator+(const CyclotomicInt& a, const CyclotomicInt& b) {
        same(a, b);
        CyclotomicInt r = a;
        for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] += b.c_[i];
        return r;
    }
    friend CyclotomicInt operator-(const CyclotomicInt& a, const CyclotomicInt& b) {
        same(a, b);
        CyclotomicInt r = a;
        for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] -= b.c_[i];
        return r;
    }
    CyclotomicInt operator-() const {
        CyclotomicInt r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }
    friend CyclotomicInt operator*(const CyclotomicInt& a, const CyclotomicInt& b) {
        same(a, b);
        std::vector<BigInt> prod(a.c_.size() + b.c_.size(), BigInt(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i] == 0) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j) prod[i + j] += a.c_[i] * b.c_[j];
        }
        return CyclotomicInt(a.n_, std::move(prod));
    }

    // Image under zeta_n -> zeta_m^(m/n); m must be a multiple of n.
    CyclotomicInt embed(i64 m) const {
        if (m % n_ != 0) throw MismatchError("CyclotomicInt::embed: target conductor not a multiple");
        const i64 s = m / n_;
        std::vector<BigInt> c(static_cast<std::size_t>(s * static_cast<i64>(c_.size()) + 1), BigInt(0));
        for (std::size_t i = 0; i < c_.size(); ++i) c[static_cast<std::size_t>(s) * i] = c_[i];
        return CyclotomicInt(m, std::move(c));
    }

    // Galois automorphism zeta -> zeta^a, gcd(a, n) = 1.
    CyclotomicInt galois(i64 a) const {
        if (std::gcd(mod(a, n_), n_) != 1 && n_ > 1) throw InputError("galois: exponent not a unit");
        std::vector<BigInt> c(static_cast<std::size_t>(n_), BigInt(0));
        for (std::size_t i = 0; i < c_.size(); ++i) c[static_cast<std::size_t>(mod(a * static_cast<i64>(i), n_))] += c_[i];
        return CyclotomicInt(n_, std::move(c));
    }

    // Element of Z[zeta_m] (m | n) whose embedding is this one.
    CyclotomicInt descend(i64 m) const {
        if (n_ % m != 0) throw MismatchError("descend: conductor does not divide");
        const std::size_t dm = static_cast<std::size_t>(euler_phi(m));
        QMatrix A(c_.size(), QVector(dm, Rational(0)));
        for (std::size_t j = 0; j < dm; ++j) {
            CyclotomicInt e = zeta_power(m, static_cast<i64>(j)).embed(n_);
            for (std::size_t i = 0; i < c_.size(); ++i) A[i][j] = Rational(e.c_[i]);
        }
        QVector b(c_.size());
        for (std::size_t i = 0; i < c_.size(); ++i) b[i] = Rational(c_[i]);
        auto x = solve_rational(A, b);
        if (!x) throw InputError("descend: element not in the subfield");
        std::vector<BigInt> out(dm);
        for (std::size_t j = 0; j < dm; ++j) {
            if (boost::multiprecision::denominator((*x)[j]) != 1) throw InputError("descend: non-integral");
            out[j] = boost::multiprecision::numerator((*x)[j]);
        }
        return CyclotomicInt(m, std::move(out));
    }

    // Exponent k with this == zeta^k, or -1 when not a power of zeta.
    i64 root_of_unity_exponent() const {
        for (i64 k = 0; k < n_; ++k) {
            if (*this == zeta_power(n_, k)) return k;
        }
        return -1;
    }

    std::string str() const {
        std::ostringstream os;
        bool any = false;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] == 0) continue;
            if (any) os << (c_[i] < 0 ? " - " : " + ");
            else if (c_[i] < 0) os << "-";
            BigInt a = c_[i] < 0 ? BigInt(-c_[i]) : c_[i];
            if (i == 0) os << a;
            else {
                if (a != 1) os << a << "*";
                os << "z" << n_;
                if (i > 1) os << "^" << i;
            }
            any = true;
        }
        if (!any) os << "0";
        return os.str();
    }

private:
    static void same(const CyclotomicInt& a, const CyclotomicInt& b) {
        if (a.n_ != b.n_) {
            throw MismatchError("cyclotomic conductor mismatch: " + std::to_string(a.n_) + " vs " +
                                std::to_string(b.n_) + " (embed explicitly)");
        }
    }
    void reduce_() {
        const auto& f = cyclotomic_poly(n_);
        const std::size_t d = f.size() - 1;
        if (c_.size() < d) c_.resize(d, BigInt(0));
        detail::reduce_monic(c_, f, [](BigInt& t, const BigInt& lead, i64 fj) { t -= lead * fj; });
    }

    i64 n_;
    std::vector<BigInt> c_;
};

// Product with an explicit request to embed both factors into the lcm
// conductor first.
inline CyclotomicInt cyclo_mul(const CyclotomicInt& a, const CyclotomicInt& b, bool embed = false) {
    if (a.conductor() != b.conductor()) {
        if (!embed) throw MismatchError("cyclo_mul: conductor mismatch without explicit embedding");
        i64 l = std::lcm(a.conductor(), b.conductor());
        return a.embed(l) * b.embed(l);
    }
    return a * b;
}

// Product of the conjugates of a over Q(zeta_target), as an element of
// Z[zeta_target].
inline CyclotomicInt relative_norm(const CyclotomicInt& a, i64 target) {
    const i64 n = a.conductor();
    if (target < 1 || n % target != 0) throw InputError("relative_norm: target conductor must divide the conductor");
    CyclotomicInt r = CyclotomicInt::one(n);
    for (i64 s = 1; s <= n; ++s) {
        if (std::gcd(s, n) != 1 || mod(s - 1, target) != 0) continue;
        r = r * a.galois(s);
    }
    return r.descend(target);
}

// Coefficient ring (Z/p^N)[zeta_n].
class CycloModPN {
public:
    using value_type = std::vector<i64>;

    CycloModPN() = default;
    CycloModPN(i64 p, int N, i64 n) : base_(p, N), n_(n), f_(cyclotomic_poly(n)) {
        d_ = f_.size() - 1;
        for (auto& x : f_) x = mod(x, base_.modulus());
    }
    explicit CycloModPN(const ZmodPN& base, i64 n = 1) : CycloModPN(base.p(), base.N(), n) {}

    const ZmodPN& base() const { return base_; }
    i64 conductor() const { return n_; }
    i64 p() const { return base_.p(); }
    i64 modulus() const { return base_.modulus(); }
    std::size_t dim() const { return d_; }

    value_type zero() const { return value_type(d_, 0); }
    value_type one() const { return from_int(1); }
    value_type from_int(i64 a) const {
        value_type v(d_, 0);
        v[0] = base_.from_int(a);
        return v;
    }
    value_type from_big(const BigInt& a) const {
        value_type v(d_, 0);
        v[0] = base_.from_big(a);
        return v;
    }
    value_type from_cyclotomic(const CyclotomicInt& a) const {
        CyclotomicInt b = a.conductor() == n_ ? a : a.embed(n_);
        value_type v(d_, 0);
        for (std::size_t i = 0; i < d_; ++i) v[i] = base_.from_big(b.coeffs()[i]);
        return v;
    }
    value_type zeta(i64 k) const { return from_cyclotomic(CyclotomicInt::zeta_power(n_, k)); }

    value_type add(const value_type& a, const value_type& b) const {
        value_type r(d_);
        for (std::size_t i = 0; i < d_; ++i) r[i] = base_.add(a[i], b[i]);
        return r;
    }
    value_type sub(const value_type& a, const value_type& b) const {
        value_type r(d_);
        for (std::size_t i = 0; i < d_; ++i) r[i] = base_.sub(a[i], b[i]);
        return r;
    }
    value_type neg(const value_type& a) const {
        value_type r(d_);
        for (std::size_t i = 0; i < d_; ++i) r[i] = base_.neg(a[i]);
        return r;
    }
    value_type mul(const value_type& a, const value_type& b) const {
        if (d_ == 1) return {base_.mul(a[0], b[0])};
        const i64 m = base_.modulus();
        std::vector<i128> acc(2 * d_ - 1, 0);
        for (std::size_t i = 0; i < d_; ++i) {
            if (a[i] == 0) continue;
            for (std::size_t j = 0; j < d_; ++j) {
                if (b[j] == 0) continue;
                acc[i + j] = (acc[i + j] + static_cast<i128>(a[i]) * b[j]) % m;
            }
        }
        std::vector<i64> c(acc.size());
        for (std::size_t i = 0; i < acc.size(); ++i) c[i] = static_cast<i64>(acc[i]);
        detail::reduce_monic(c, f_, [m](i64& t, i64 lead, i64 fj) { t = mod(t - mulmod(lead, fj, m), m); });
        return c;
    }
    value_type scale(const value_type& a, i64 k) const {
        value_type r(d_);
        i64 kk = base_.from_int(k);
        for (std::size_t i = 0; i < d_; ++i) r[i] = base_.mul(a[i], kk);
        return r;
    }
    bool is_zero(const value_type& a) const {
        for (i64 x : a)
            if (x) return false;
        return true;
    }
    bool eq(const value_type& a, const value_type& b) const { return a == b; }
    // Every power-basis coordinate divisible by p.
    bool divisible_by_p(const value_type& a) const {
        for (i64 x : a)
            if (x % base_.p()) return false;
        return true;
    }
    // Image under zeta -> 1 in F_p.
    i64 reduce_mod_p(const value_type& a) const {
        i64 s = 0;
        for (i64 x : a) s = (s + x) % base_.p();
        return s;
    }
    bool is_rational(const value_type& a) const {
        for (std::size_t i = 1; i < d_; ++i)
            if (a[i]) return false;
        return true;
    }
    bool is_unit(const value_type& a) const;
    value_type galois(const value_type& a, i64 s) const {
        const i64 m = base_.modulus();
        std::vector<i64> c(static_cast<std::size_t>(n_), 0);
        for (std::size_t i = 0; i < d_; ++i) {
            auto k = static_cast<std::size_t>(mod(s * static_cast<i64>(i), n_));
            c[k] = mod(c[k] + a[i], m);
        }
        if (c.size() < d_) c.resize(d_, 0);
        detail::reduce_monic(c, f_, [m](i64& t, i64 lead, i64 fj) { t = mod(t - mulmod(lead, fj, m), m); });
        return c;
    }
    // Image of a value of the ring `from` (whose conductor divides ours).
    value_type promote(const value_type& a, const CycloModPN& from) const {
        if (from.base_ != base_) throw MismatchError("promote: coefficient precision mismatch");
        if (n_ % from.n_ != 0) throw MismatchError("promote: conductor does not divide");
        if (from.n_ == n_) return a;
        const i64 s = n_ / from.n_;
        std::vector<i64> c(static_cast<std::size_t>(s) * a.size() + 1, 0);
        for (std::size_t i = 0; i < a.size(); ++i) c[static_cast<std::size_t>(s) * i] = a[i];
        const i64 m = base_.modulus();
        if (c.size() < d_) c.resize(d_, 0);
        detail::reduce_monic(c, f_, [m](i64& t, i64 lead, i64 fj) { t = mod(t - mulmod(lead, fj, m), m); });
        return c;
    }
    std::string str(const value_type& a) const {
        std::ostringstream os;
        bool any = false;
        for (std::size_t i = 0; i < d_; ++i) {
            if (!a[i]) continue;
            if (any) os << " + ";
            if (i == 0) os << a[i];
            else {
                if (a[i] != 1) os << a[i] << "*";
                os << "z" << n_;
                if (i > 1) os << "^" << i;
            }
            any = true;
        }
        if (!any) os << "0";
        return os.str();
    }
    std::string name() const { return base_.name() + "[z" + std::to_string(n_) + "]"; }

    friend bool operator==(const CycloModPN& a, const CycloModPN& b) {
        return a.base_ == b.base_ && a.n_ == b.n_;
    }
    friend bool operator!=(const CycloModPN& a, const CycloModPN& b) { return !(a == b); }

private:
    ZmodPN base_;
    i64 n_ = 1;
    std::vector<i64> f_{-1, 1};
    std::size_t d_ = 1;
};

// Units of (Z/p^N)[zeta_n]: invertible multiplication matrix mod p.
inline bool CycloModPN::is_unit(const value_type& a) const {
    const i64 p = base_.p();
    std::vector<std::vector<i64>> M(d_, std::vector<i64>(d_, 0));
    for (std::size_t j = 0; j < d_; ++j) {
        value_type e(d_, 0);
        e[j] = 1;
        value_type col = mul(a, e);
        for (std::size_t i = 0; i < d_; ++i) M[i][j] = col[i] % p;
    }
    for (std::size_t c = 0; c < d_; ++c) {
        std::size_t piv = c;
        while (piv < d_ && M[piv][c] == 0) ++piv;
        if (piv == d_) return false;
        std::swap(M[piv], M[c]);
        i64 inv = invmod(M[c][c], p);
        for (std::size_t i = c + 1; i < d_; ++i) {
            if (!M[i][c]) continue;
            i64 f = mulmod(M[i][c], inv, p);
            for (std::size_t j = c; j < d_; ++j) M[i][j] = mod(M[i][j] - mulmod(f, M[c][j], p), p);
        }
    }
    return true;
}

}  // namespace tcong
