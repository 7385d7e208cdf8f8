#pragma once

// Imaginary quadratic fields Q(sqrt(-D)), their class groups via binary
// quadratic forms, the cyclotomic towers M_r = Q(sqrt(-D), mu_{p^r}),
// prime splitting, p^r-th power residue symbols, and checkers for the
// relative-different condition and the class-group condition on a
// degree-p layer.

#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tcong/abgroups.hpp"
#include "tcong/cyclotomic.hpp"
#include "tcong/iwalg.hpp"
#include "tcong/poly_fp.hpp"
#include "tcong/qlinalg.hpp"

namespace tcong {

struct ImagQuadField {
    i64 D = 1;     // field Q(sqrt(-D)), D > 0 squarefree
    i64 disc = -4;
    i64 p = 3;

    ImagQuadField() = default;
    ImagQuadField(i64 D_, i64 p_) : D(D_), p(p_) {
        if (D <= 0 || !is_squarefree(D)) throw InputError("ImagQuadField: D must be a positive squarefree integer");
        if (p < 3 || !is_prime(p)) throw InputError("ImagQuadField: p must be an odd prime");
        disc = (mod(-D, 4) == 1) ? -D : -4 * D;
    }
    std::string str() const { return "Q(sqrt(-" + std::to_string(D) + "))"; }
};

inline bool is_p_split(const ImagQuadField& K) {
    if (K.disc % K.p == 0) throw InputError("is_p_split: p divides the discriminant");
    return kronecker(K.disc, K.p) == 1;
}

// ---------------------------------------------------------------------------
// Binary quadratic forms

struct QForm {
    i64 a = 1, b = 1, c = 1;
    i64 disc() const { return b * b - 4 * a * c; }
    friend bool operator==(const QForm& x, const QForm& y) { return x.a == y.a && x.b == y.b && x.c == y.c; }
    friend bool operator<(const QForm& x, const QForm& y) {
        return std::tie(x.a, x.b, x.c) < std::tie(y.a, y.b, y.c);
    }
    std::string str() const {
        return "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
    }
};

inline bool is_reduced(const QForm& f) {
    if (std::abs(f.b) > f.a || f.a > f.c) return false;
    if ((std::abs(f.b) == f.a || f.a == f.c) && f.b < 0) return false;
    return true;
}

// Reduction of a positive definite form.
inline QForm reduce_form(QForm f) {
    if (f.a <= 0 || f.disc() >= 0) throw InputError("reduce_form: form is not positive definite");
    for (;;) {
        if (f.b > f.a || f.b <= -f.a) {
            // normalize b into (-a, a]
            i64 two_a = 2 * f.a;
            i64 r = mod(f.b, two_a);
            if (r > f.a) r -= two_a;
            i64 k = (r - f.b) / two_a;  // x -> x + k y
            i128 c = static_cast<i128>(f.a) * k * k + static_cast<i128>(f.b) * k + f.c;
            f.b = r;
            f.c = static_cast<i64>(c);
        }
        if (f.a > f.c) {
            std::swap(f.a, f.c);
            f.b = -f.b;
            continue;
        }
        if (f.a == f.c && f.b < 0) f.b = -f.b;
        break;
    }
    return f;
}

// Gaussian composition (Cohen, Algorithm 5.4.7), followed by reduction.
inline QForm compose_forms(QForm f1, QForm f2) {
    if (f1.disc() != f2.disc()) throw MismatchError("compose_forms: discriminants differ");
    const i64 D = f1.disc();
    if (f1.a > f2.a) std::swap(f1, f2);
    const i64 s = (f1.b + f2.b) / 2, n = f2.b - s;
    i64 y1, d;
    if (f2.a % f1.a == 0) {
        y1 = 0;
        d = f1.a;
    } else {
        auto [g, u, v] = xgcd(f2.a, f1.a);
        (void)v;
        d = g;
        y1 = u;
    }
    i64 x2, y2, d1;
    if (s % d == 0) {
        y2 = -1;
        x2 = 0;
        d1 = d;
    } else {
        auto [g, u, v] = xgcd(s, d);
        x2 = u;
        y2 = -v;
        d1 = g;
    }
    const i64 v1 = f1.a / d1, v2 = f2.a / d1;
    i128 rr = (static_cast<i128>(y1) * y2 % v1 * n - static_cast<i128>(x2) * f2.c) % v1;
    if (rr < 0) rr += v1;
    const i64 r = static_cast<i64>(rr);
    const i64 b3 = f2.b + 2 * v2 * r;
    const i64 a3 = v1 * v2;
    i128 num = static_cast<i128>(b3) * b3 - D;
    if (num % (4 * static_cast<i128>(a3)) != 0) throw Error("compose_forms: inconsistent composition");
    QForm out{a3, b3, static_cast<i64>(num / (4 * static_cast<i128>(a3)))};
    return reduce_form(out);
}

inline QForm principal_form(i64 D) {
    if (D >= 0 || mod(D, 4) > 1) throw InputError("principal_form: not a negative discriminant");
    i64 b = mod(D, 2);
    return QForm{1, b, (b * b - D) / 4};
}

inline QForm inverse_form(const QForm& f) { return reduce_form(QForm{f.a, -f.b, f.c}); }

// All reduced primitive forms of discriminant D < 0.
inline std::vector<QForm> reduced_forms(i64 D) {
    if (D >= 0 || mod(D, 4) > 1) throw InputError("reduced_forms: not a negative discriminant");
    std::vector<QForm> out;
    for (i64 a = 1; 3 * a * a <= -D; ++a) {
        for (i64 b = -a + 1; b <= a; ++b) {
            i64 num = b * b - D;
            if (num % (4 * a) != 0) continue;
            i64 c = num / (4 * a);
            if (c < a) continue;
            QForm f{a, b, c};
            if (!is_reduced(f)) continue;
            if (std::gcd(std::gcd(a, std::abs(b)), c) != 1) continue;
            out.push_back(f);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct QuadFormClassGroup {
    i64 disc = -4;
    std::vector<QForm> forms;                      // reduced, sorted
    std::vector<std::vector<std::size_t>> table;   // composition table on indices
    std::size_t identity = 0;
    TabulatedGroup structure;

    std::size_t order() const { return forms.size(); }
    std::size_t index_of(const QForm& f) const {
        auto g = reduce_form(f);
        auto it = std::lower_bound(forms.begin(), forms.end(), g);
        if (it == forms.end() || !(*it == g)) throw Error("class group: form not found " + g.str());
        return static_cast<std::size_t>(it - forms.begin());
    }
    const GroupPtr& group() const { return structure.group; }
};

inline QuadFormClassGroup class_group_of_disc(i64 D) {
    QuadFormClassGroup cg;
    cg.disc = D;
    cg.forms = reduced_forms(D);
    const std::size_t h = cg.forms.size();
    cg.identity = cg.index_of(principal_form(D));
    cg.table.assign(h, std::vector<std::size_t>(h, 0));
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = i; j < h; ++j) {
            cg.table[i][j] = cg.table[j][i] = cg.index_of(compose_forms(cg.forms[i], cg.forms[j]));
        }
    // associativity spot check on a few triples
    for (std::size_t i = 0; i < std::min<std::size_t>(h, 4); ++i)
        for (std::size_t j = 0; j < h; ++j) {
            std::size_t k = (i + 2 * j + 1) % h;
            if (cg.table[cg.table[i][j]][k] != cg.table[i][cg.table[j][k]])
                throw Error("class group: composition is not associative");
        }
    if (h == 1) {
        cg.structure = TabulatedGroup{make_group({}), {0}, {0}};
    } else {
        cg.structure = structure_from_table(
            h, [&](std::size_t a, std::size_t b) { return cg.table[a][b]; }, cg.identity);
    }
    return cg;
}

inline QuadFormClassGroup class_group(const ImagQuadField& K) { return class_group_of_disc(K.disc); }

// ---------------------------------------------------------------------------
// Splitting of rational primes

struct SplittingData {
    i64 ell = 0;
    i64 pr = 1;          // p^r
    i64 f_cyc = 1;       // residue degree in Q(mu_{p^r})
    i64 g_cyc = 1;       // number of primes in Q(mu_{p^r})
    int quad_symbol = 1; // Kronecker symbol (disc / ell)
    i64 f_total = 1;     // residue degree in M_r
    i64 g_total = 1;     // number of primes in M_r
};

inline SplittingData splitting_data(const ImagQuadField& K, i64 ell, int r) {
    if (!is_prime(ell)) throw InputError("splitting_data: ell must be prime");
    if (ell == K.p || K.disc % ell == 0) throw InputError("splitting_data: ell is ramified");
    SplittingData s;
    s.ell = ell;
    s.pr = ipow(K.p, r);
    s.f_cyc = s.pr == 1 ? 1 : mult_order(ell, s.pr);
    s.g_cyc = euler_phi(s.pr) / s.f_cyc;
    s.quad_symbol = kronecker(K.disc, ell);
    const bool split = s.quad_symbol == 1 || s.f_cyc % 2 == 0;
    s.f_total = split ? s.f_cyc : 2 * s.f_cyc;
    s.g_total = split ? 2 * s.g_cyc : s.g_cyc;
    return s;
}

// ---------------------------------------------------------------------------
// Power residue symbols

// Prime of M_r above ell: an irreducible factor g of Phi_n mod ell with
// zeta_n -> x mod g, and the residue degree 1 or 2 contributed by the
// quadratic part.
struct ResiduePrime {
    i64 ell = 2;
    i64 n = 1;
    PolyFp g;
    int quad_degree = 1;

    i64 degree() const { return g.deg() * quad_degree; }
    BigInt norm() const { return boost::multiprecision::pow(BigInt(ell), static_cast<unsigned>(degree())); }
    std::string str() const {
        return "ell=" + std::to_string(ell) + " g=" + g.str() + (quad_degree == 2 ? " (quadratic inert)" : "");
    }
};

struct SymbolValue {
    i64 order = 1;     // the symbol is zeta_order^k
    i64 exponent = 0;
    CyclotomicInt value() const { return CyclotomicInt::zeta_power(order, exponent); }
};

// (m / P)_{pr}: the pr-th root of unity congruent to m^((q-1)/pr) mod P.
inline SymbolValue power_residue_symbol(const BigInt& m, const ResiduePrime& P, i64 pr) {
    if (P.n % pr != 0) throw InputError("power_residue_symbol: symbol order must divide the conductor of the prime");
    const BigInt q = P.norm();
    if ((q - 1) % pr != 0) throw InputError("power_residue_symbol: residue field does not contain mu_" + std::to_string(pr));
    const i64 mm = mod(m, P.ell);
    if (mm == 0) throw InputError("power_residue_symbol: m is not coprime to the prime");
    const BigInt e = ((q - 1) / pr) % (P.ell - 1);
    const i64 t = powmod(mm, e, P.ell);
    const PolyFp zeta = PolyFp::x_power(P.ell, static_cast<std::size_t>(P.n / pr)) % P.g;
    PolyFp cur(P.ell, {1});
    for (i64 k = 0; k < pr; ++k) {
        if (cur == PolyFp(P.ell, {t}) % P.g) return {pr, k};
        cur = mulmod_poly(cur, zeta, P.g);
    }
    throw Error("power_residue_symbol: value is not a power of the chosen root of unity");
}

inline SymbolValue power_residue_symbol(i64 m, const ResiduePrime& P, i64 pr) {
    return power_residue_symbol(BigInt(m), P, pr);
}

// (1 + l + ... + l^(p-1)) / p
inline BigInt inert_exponent_b(i64 p, i64 ell) {
    BigInt s = 0, t = 1;
    for (i64 i = 0; i < p; ++i) {
        s += t;
        t *= ell;
    }
    if (s % p != 0) throw InputError("inert_exponent_b: p does not divide the sum (ell not 1 mod p)");
    return s / p;
}

struct Prime5322Line {
    i64 ell = 0;
    PolyFp lower;                    // factor h of Phi_{p^(r-1)} mod ell
    int lower_quad_degree = 1;
    int lower_count = 1;             // primes of M_{r-1} sharing this residue data
    i64 lower_exponent = 0;          // (m/l) = zeta_{p^(r-1)}^k
    std::vector<std::pair<PolyFp, i64>> upper;  // (g, k_g) for primes above
    int upper_quad_degree = 1;
    bool holds = false;

    std::string str(i64 p, int r) const {
        std::ostringstream os;
        os << "ell=" << ell << " lower=" << lower.str() << " [zeta_" << ipow(p, r - 1) << " -> x]"
           << (lower_quad_degree == 2 ? " inert-quadratic" : " split-quadratic x" + std::to_string(lower_count))
           << " k=" << lower_exponent << " upper={";
        for (std::size_t i = 0; i < upper.size(); ++i)
            os << (i ? ", " : "") << upper[i].first.str() << ":" << upper[i].second;
        os << "} " << (holds ? "ok" : "FAIL");
        return os.str();
    }
};

struct Report5322 {
    i64 p = 3;
    int r = 2;
    BigInt m = 2;
    i64 D = 1;
    i64 bound = 0;
    std::vector<Prime5322Line> lines;
    std::vector<i64> skipped;  // ell dividing p m disc
    std::size_t failures() const {
        std::size_t f = 0;
        for (const auto& l : lines)
            if (!l.holds) ++f;
        return f;
    }
};

namespace detail {

inline std::vector<Prime5322Line> check_5322_at(const ImagQuadField& K, const BigInt& m, int r, i64 ell) {
    const i64 p = K.p, pr = ipow(p, r), pr1 = ipow(p, r - 1);
    const int qs = kronecker(K.disc, ell);
    auto lower = factor_cyclotomic_mod_ell(pr1, ell);
    auto upper = factor_cyclotomic_mod_ell(pr, ell);
    std::vector<Prime5322Line> out;
    for (const auto& hf : lower) {
        const PolyFp& h = hf.factor;
        Prime5322Line line;
        line.ell = ell;
        line.lower = h;
        const bool lsplit = qs == 1 || h.deg() % 2 == 0;
        line.lower_quad_degree = lsplit ? 1 : 2;
        line.lower_count = lsplit ? 2 : 1;
        ResiduePrime L{ell, pr1, h, line.lower_quad_degree};
        line.lower_exponent = power_residue_symbol(m, L, pr1).exponent;
        i64 sum = 0;
        for (const auto& gf : upper) {
            const PolyFp& g = gf.factor;
            // g lies over h iff zeta_{p^r}^p = x^p mod g is a root of h
            if (!(h.compose_power(static_cast<std::size_t>(p)) % g).is_zero()) continue;
            const bool usplit = qs == 1 || g.deg() % 2 == 0;
            line.upper_quad_degree = usplit ? 1 : 2;
            if (usplit != lsplit) throw Error("verify_5322: quadratic splitting changes along an odd-degree extension");
            ResiduePrime Q{ell, pr, g, line.upper_quad_degree};
            i64 k = power_residue_symbol(m, Q, pr).exponent;
            line.upper.emplace_back(g, k);
            sum += k;
        }
        if (line.upper.empty()) throw Error("verify_5322: no prime above a lower prime (embedding inconsistency)");
        line.holds = mod(sum - p * line.lower_exponent, pr) == 0;
        out.push_back(std::move(line));
    }
    return out;
}

}  // namespace detail

// Checks that the product of (m/Q)_{p^r} over Q | l equals (m/l)_{p^(r-1)}
// for every prime l of M_{r-1} above every admissible ell <= bound.
inline Report5322 verify_5322(const ImagQuadField& K, const BigInt& m, int r, i64 bound, unsigned threads = 1) {
    if (r < 2) throw InputError("verify_5322: r must be at least 2");
    if (m == 0) throw InputError("verify_5322: m must be nonzero");
    Report5322 rep;
    rep.p = K.p;
    rep.r = r;
    rep.m = m;
    rep.D = K.D;
    rep.bound = bound;
    std::vector<i64> ells;
    for (i64 ell : primes_up_to(bound)) {
        if (ell == K.p || K.disc % ell == 0 || m % ell == 0) {
            rep.skipped.push_back(ell);
            continue;
        }
        ells.push_back(ell);
    }
    threads = std::max(1u, threads);
    std::vector<std::vector<Prime5322Line>> per(ells.size());
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < threads; ++t) {
        jobs.push_back(std::async(std::launch::async, [&, t] {
            for (std::size_t i = t; i < ells.size(); i += threads) per[i] = detail::check_5322_at(K, m, r, ells[i]);
        }));
    }
    for (auto& j : jobs) j.get();
    for (auto& v : per)
        for (auto& l : v) rep.lines.push_back(std::move(l));
    return rep;
}

// ---------------------------------------------------------------------------
// Cyclotomic tower levels

// Polynomial with integer coefficients, lowest degree first.
using ZPoly = std::vector<BigInt>;

inline ZPoly zpoly_mul(const ZPoly& a, const ZPoly& b) {
    if (a.empty() || b.empty()) return {};
    ZPoly r(a.size() + b.size() - 1, BigInt(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline ZPoly zpoly_derivative(const ZPoly& a) {
    ZPoly r;
    for (std::size_t i = 1; i < a.size(); ++i) r.push_back(a[i] * static_cast<long long>(i));
    return r;
}

// Resultant via the Sylvester matrix.
inline BigInt resultant(const ZPoly& f, const ZPoly& g) {
    const std::size_t m = f.size() - 1, n = g.size() - 1;
    const std::size_t s = m + n;
    std::vector<std::vector<BigInt>> S(s, std::vector<BigInt>(s, BigInt(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= m; ++j) S[i][i + j] = f[m - j];
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= n; ++j) S[n + i][i + j] = g[n - j];
    return det_bareiss(S);
}

inline ZPoly cyclotomic_zpoly(i64 n) {
    ZPoly r;
    for (auto c : cyclotomic_poly(n)) r.push_back(BigInt(c));
    return r;
}

// Discriminant of a monic polynomial: (-1)^(d(d-1)/2) Res(f, f').
inline BigInt poly_discriminant(const ZPoly& f) {
    const std::size_t d = f.size() - 1;
    BigInt r = resultant(f, zpoly_derivative(f));
    return ((d * (d - 1) / 2) % 2) ? BigInt(-r) : r;
}

struct CyclotomicTowerLevel {
    ImagQuadField K;
    int r = 0;
    ZPoly defining_poly;        // minimal polynomial of zeta_{p^r} + sqrt(-D)
    CyclotomicInt uniformizer;  // 1 - zeta_{p^r}

    CyclotomicTowerLevel(const ImagQuadField& K_, int r_) : K(K_), r(r_) {
        if (r < 0) throw InputError("CyclotomicTowerLevel: r must be non-negative");
        const i64 n = ipow(K.p, r);
        uniformizer = CyclotomicInt::one(n) - CyclotomicInt::zeta_power(n, 1);
        if (r == 1) {
            if (relative_norm(uniformizer, 1) != CyclotomicInt::from_int(1, K.p))
                throw Error("CyclotomicTowerLevel: norm of the uniformizer is not p");
        } else if (r > 1) {
            const i64 m = n / K.p;
            if (relative_norm(uniformizer, m) != CyclotomicInt::one(m) - CyclotomicInt::zeta_power(m, 1))
                throw Error("CyclotomicTowerLevel: norm chain fails");
        }
        // Phi(x + s) = P(x) + s Q(x) with s^2 = -D; the product of the two
        // conjugates is P^2 + D Q^2.
        ZPoly phi = cyclotomic_zpoly(n);
        ZPoly P{BigInt(0)}, Q{BigInt(0)};
        ZPoly pw_even{BigInt(1)}, pw_odd{BigInt(0)};  // (x + s)^k = even + s odd
        for (std::size_t k = 0; k < phi.size(); ++k) {
            auto acc = [&](ZPoly& dst, const ZPoly& src) {
                if (dst.size() < src.size()) dst.resize(src.size(), BigInt(0));
                for (std::size_t i = 0; i < src.size(); ++i) dst[i] += phi[k] * src[i];
            };
            acc(P, pw_even);
            acc(Q, pw_odd);
            // multiply by (x + s)
            ZPoly ne = zpoly_mul(pw_even, {BigInt(0), BigInt(1)});
            ZPoly no = zpoly_mul(pw_odd, {BigInt(0), BigInt(1)});
            for (std::size_t i = 0; i < pw_odd.size(); ++i) {
                if (ne.size() <= i) ne.resize(i + 1, BigInt(0));
                ne[i] -= BigInt(K.D) * pw_odd[i];
            }
            for (std::size_t i = 0; i < pw_even.size(); ++i) {
                if (no.size() <= i) no.resize(i + 1, BigInt(0));
                no[i] += pw_even[i];
            }
            pw_even = std::move(ne);
            pw_odd = std::move(no);
        }
        ZPoly PP = zpoly_mul(P, P), QQ = zpoly_mul(Q, Q);
        defining_poly.assign(std::max(PP.size(), QQ.size()), BigInt(0));
        for (std::size_t i = 0; i < PP.size(); ++i) defining_poly[i] += PP[i];
        for (std::size_t i = 0; i < QQ.size(); ++i) defining_poly[i] += BigInt(K.D) * QQ[i];
        while (defining_poly.size() > 1 && defining_poly.back() == 0) defining_poly.pop_back();
    }

    i64 degree() const { return static_cast<i64>(defining_poly.size()) - 1; }
};

// ---------------------------------------------------------------------------
// Relative different of Q(mu_{p^r}) over Q(mu_{p^(r-1)})

struct PPrimeReport {
    i64 p = 3;
    int r = 2;
    BigInt disc_upper, disc_lower;
    int exponent_upper = 0, exponent_lower = 0;
    i64 standard_exponent = 0;   // sum_j j (phi(p^j) - phi(p^(j-1)))
    i64 displayed_exponent = 0;  // sum_j p^j (phi(p^j) - phi(p^(j-1)))
    i64 relative_different_exponent = 0;  // exponent of the prime above p
    i64 ramification_index = 0;           // v_P(p) in the upper field
    bool verdict = false;

    std::string str() const {
        std::ostringstream os;
        os << "p=" << p << " r=" << r << " disc(Q(mu_" << ipow(p, r) << "))=" << disc_upper.str() << " (exponent "
           << exponent_upper << ", standard formula " << standard_exponent << ", p^j-weighted formula " << displayed_exponent
           << "); relative different P^" << relative_different_exponent << ", (p) = P^" << ramification_index << ": "
           << (verdict ? "different is (p)" : "different is not (p)");
        return os.str();
    }
};

inline PPrimeReport check_P_prime(i64 p, int r) {
    if (r < 2) throw InputError("check_P_prime: r must be at least 2 (level 1 over level 0 has degree p-1)");
    if (p < 3 || !is_prime(p)) throw InputError("check_P_prime: p must be an odd prime");
    PPrimeReport rep;
    rep.p = p;
    rep.r = r;
    rep.disc_upper = poly_discriminant(cyclotomic_zpoly(ipow(p, r)));
    rep.disc_lower = poly_discriminant(cyclotomic_zpoly(ipow(p, r - 1)));
    rep.exponent_upper = valuation(rep.disc_upper, p);
    rep.exponent_lower = valuation(rep.disc_lower, p);
    BigInt rest_u = abs(rep.disc_upper), rest_l = abs(rep.disc_lower);
    for (int i = 0; i < rep.exponent_upper; ++i) rest_u /= p;
    for (int i = 0; i < rep.exponent_lower; ++i) rest_l /= p;
    if (rest_u != 1 || rest_l != 1) throw Error("check_P_prime: discriminant has a prime factor other than p");
    for (int j = 1; j <= r; ++j) {
        i64 d = euler_phi(ipow(p, j)) - euler_phi(ipow(p, j - 1));
        rep.standard_exponent += j * d;
        rep.displayed_exponent += ipow(p, j) * d;
    }
    // disc(L) = disc(K)^p N(d_{L/K}); the prime above p has residue degree 1
    rep.relative_different_exponent = rep.exponent_upper - p * rep.exponent_lower;
    rep.ramification_index = euler_phi(ipow(p, r));
    rep.verdict = rep.relative_different_exponent == rep.ramification_index &&
                  rep.exponent_upper == rep.standard_exponent;
    return rep;
}

// ---------------------------------------------------------------------------
// Class-group condition on a degree-p layer M / M'

// A representative class in D (or D') with its reciprocity image in Z (or Z').
struct ClassRep {
    std::string label;
    i64 cls = 0;  // element of Cl (or Cl')
    i64 rec = 0;  // element of Z (or Z')
};

struct ConditionCData {
    ZmodPN R{3, 2};
    // coefficient groups with the order-p action and the transfer
    CyclicAction z_action;
    GroupPtr Zprime;
    GroupHom ver;           // Z' -> Z
    // class groups with action and transfer
    CyclicAction cl_action; // on Cl
    GroupPtr Clprime;
    GroupHom cl_transfer;   // Cl' -> Cl
    // representatives: D is a G-set, D' embeds into D
    std::vector<ClassRep> reps;
    std::vector<std::size_t> reps_perm;
    std::vector<ClassRep> reps_prime;
    // places w in Sigma_p: class of varpi_w / varpi_wbar in Cl
    std::vector<i64> ratio_classes;
    LambdaElt C, Cprime;    // modification factors
};

struct ConditionCReport {
    bool b_bijective = false;
    bool a_coset_structure = false;
    bool identity_holds = false;
    bool verdict = false;
    std::vector<std::string> witnesses;
    LambdaElt lhs, rhs;
};

namespace detail {

inline bool is_p_power_order(i64 o, i64 p) {
    while (o % p == 0) o /= p;
    return o == 1;
}

}  // namespace detail

inline ConditionCReport check_condition_C(const ConditionCData& d) {
    ConditionCReport rep;
    const i64 p = d.z_action.p;
    const GroupPtr& Cl = d.cl_action.group;
    const GroupPtr& Z = d.z_action.group;
    if (d.cl_action.p != p) throw InputError("check_condition_C: actions of different orders");
    if (!same_group(d.cl_transfer.source(), d.Clprime) || !same_group(d.cl_transfer.target(), Cl))
        throw MismatchError("check_condition_C: class transfer has the wrong shape");
    if (!same_group(d.ver.source(), d.Zprime) || !same_group(d.ver.target(), Z))
        throw MismatchError("check_condition_C: ver has the wrong shape");
    if (d.reps_perm.size() != d.reps.size()) throw InputError("check_condition_C: representative action size");

    // B' -> B^G: prime-to-p parts
    std::map<i64, i64> hit;  // B^G element -> preimage
    std::vector<i64> BG;
    for (i64 x = 0; x < Cl->order(); ++x)
        if (std::gcd(Cl->element_order(x), p) == 1 && d.cl_action.is_fixed(x)) BG.push_back(x);
    rep.b_bijective = true;
    for (i64 y = 0; y < d.Clprime->order(); ++y) {
        if (std::gcd(d.Clprime->element_order(y), p) != 1) continue;
        i64 x = d.cl_transfer.apply(y);
        if (hit.count(x)) {
            rep.b_bijective = false;
            rep.witnesses.push_back("B' -> B^G not injective: " + d.Clprime->element_str(y) + " and " +
                                    d.Clprime->element_str(hit[x]) + " map to " + Cl->element_str(x));
        }
        hit[x] = y;
    }
    for (i64 x : BG) {
        if (!hit.count(x)) {
            rep.b_bijective = false;
            rep.witnesses.push_back("B' -> B^G not surjective: " + Cl->element_str(x) + " not hit");
        }
    }

    // A^G = disjoint union of J(A') + sum_w j_w * ratio_w
    std::vector<i64> AG;
    for (i64 x = 0; x < Cl->order(); ++x)
        if (detail::is_p_power_order(Cl->element_order(x), p) && d.cl_action.is_fixed(x)) AG.push_back(x);
    std::map<i64, std::string> cover;
    rep.a_coset_structure = true;
    const std::size_t nw = d.ratio_classes.size();
    i64 combos = 1;
    for (std::size_t i = 0; i < nw; ++i) combos *= p;
    for (i64 y = 0; y < d.Clprime->order(); ++y) {
        if (!detail::is_p_power_order(d.Clprime->element_order(y), p)) continue;
        for (i64 c = 0; c < combos; ++c) {
            i64 x = d.cl_transfer.apply(y), cc = c;
            std::string tag = d.Clprime->element_str(y) + " j=(";
            for (std::size_t w = 0; w < nw; ++w) {
                i64 j = cc % p;
                cc /= p;
                x = Cl->add(x, Cl->scalar(d.ratio_classes[w], j));
                tag += (w ? "," : "") + std::to_string(j);
            }
            tag += ")";
            if (!std::binary_search(AG.begin(), AG.end(), x)) {
                rep.a_coset_structure = false;
                rep.witnesses.push_back("coset element outside A^G: " + tag + " -> " + Cl->element_str(x));
            } else if (cover.count(x)) {
                rep.a_coset_structure = false;
                rep.witnesses.push_back("cosets overlap at " + Cl->element_str(x) + ": " + tag + " and " + cover[x]);
            }
            cover[x] = tag;
        }
    }
    for (i64 x : AG) {
        if (!cover.count(x)) {
            rep.a_coset_structure = false;
            rep.witnesses.push_back("A^G element not covered: " + Cl->element_str(x));
        }
    }

    // C * sum_{a in D^G} rec(a) = ver(C' * sum_{a' in D'} rec'(a'))
    LambdaElt sumD(Z, d.R), sumDp(d.Zprime, d.R);
    for (std::size_t i = 0; i < d.reps.size(); ++i)
        if (d.reps_perm[i] == i) sumD.add_term(d.reps[i].rec, d.R.one());
    for (const auto& a : d.reps_prime) sumDp.add_term(a.rec, d.R.one());
    rep.lhs = d.C * sumD;
    rep.rhs = ver_pushforward(d.Cprime * sumDp, d.ver);
    rep.identity_holds = rep.lhs == rep.rhs;
    if (!rep.identity_holds) rep.witnesses.push_back("group ring identity fails: difference " + (rep.lhs - rep.rhs).str());
    rep.verdict = rep.b_bijective && rep.a_coset_structure && rep.identity_holds;
    return rep;
}

}  // namespace tcong
