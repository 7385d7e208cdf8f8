#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "tcong/arith.hpp"

namespace tcong {

// Element of Z/p^N. The modulus travels with the value so that mixing
// precisions is caught at the first operation.
struct ResidueInt {
    i64 value = 0;
    i64 modulus = 1;

    ResidueInt() = default;
    ResidueInt(i64 v, i64 m) : value(mod(v, m)), modulus(m) {
        if (m <= 0) throw InputError("ResidueInt: modulus must be positive");
    }

    friend bool operator==(const ResidueInt& a, const ResidueInt& b) {
        return a.modulus == b.modulus && a.value == b.value;
    }

    friend ResidueInt operator+(const ResidueInt& a, const ResidueInt& b) {
        check(a, b);
        return {a.value + b.value, a.modulus};
    }
    friend ResidueInt operator-(const ResidueInt& a, const ResidueInt& b) {
        check(a, b);
        return {a.value - b.value, a.modulus};
    }
    friend ResidueInt operator*(const ResidueInt& a, const ResidueInt& b) {
        check(a, b);
        return {mulmod(a.value, b.value, a.modulus), a.modulus};
    }
    ResidueInt operator-() const { return {-value, modulus}; }

    ResidueInt inverse() const { return {invmod(value, modulus), modulus}; }

    friend std::ostream& operator<<(std::ostream& os, const ResidueInt& a) {
        return os << a.value << " mod " << a.modulus;
    }

private:
    static void check(const ResidueInt& a, const ResidueInt& b) {
        if (a.modulus != b.modulus) throw MismatchError("ResidueInt: modulus mismatch");
    }
};

// Coefficient ring Z/p^N used by group rings. Values are plain words in
// [0, p^N).
class ZmodPN {
public:
    using value_type = i64;

    ZmodPN() = default;
    ZmodPN(i64 p, int N) : p_(p), N_(N), m_(1) {
        if (p < 3 || p % 2 == 0 || !is_prime(p)) throw InputError("ZmodPN: p must be an odd prime");
        if (N < 1) throw InputError("ZmodPN: precision must be >= 1");
        for (int i = 0; i < N; ++i) {
            if (m_ > (i64{1} << 61) / p) throw InputError("ZmodPN: p^N exceeds 2^61");
            m_ *= p;
        }
    }

    i64 p() const { return p_; }
    int N() const { return N_; }
    i64 modulus() const { return m_; }

    value_type zero() const { return 0; }
    value_type one() const { return 1 % m_; }
    value_type from_int(i64 a) const { return mod(a, m_); }
    value_type from_big(const BigInt& a) const { return mod(a, m_); }
    value_type add(value_type a, value_type b) const {
        i64 s = a + b;
        return s >= m_ ? s - m_ : s;
    }
    value_type sub(value_type a, value_type b) const {
        i64 s = a - b;
        return s < 0 ? s + m_ : s;
    }
    value_type neg(value_type a) const { return a == 0 ? 0 : m_ - a; }
    value_type mul(value_type a, value_type b) const { return mulmod(a, b, m_); }
    value_type scale(value_type a, i64 k) const { return mul(a, from_int(k)); }
    bool is_zero(value_type a) const { return a == 0; }
    bool eq(value_type a, value_type b) const { return a == b; }
    bool divisible_by_p(value_type a) const { return a % p_ == 0; }
    // Residue of the value mod p; for cyclotomic rings this is the image
    // under zeta -> 1.
    i64 reduce_mod_p(value_type a) const { return a % p_; }
    bool is_unit(value_type a) const { return a % p_ != 0; }
    value_type inverse(value_type a) const { return invmod(a, m_); }
    std::string str(value_type a) const { return std::to_string(a); }
    std::string name() const { return "Z/" + std::to_string(p_) + "^" + std::to_string(N_); }

    friend bool operator==(const ZmodPN& a, const ZmodPN& b) { return a.m_ == b.m_ && a.p_ == b.p_; }
    friend bool operator!=(const ZmodPN& a, const ZmodPN& b) { return !(a == b); }

private:
    i64 p_ = 3;
    int N_ = 1;
    i64 m_ = 3;
};

}  // namespace tcong
