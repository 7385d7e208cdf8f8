#include <gtest/gtest.h>

#include <complex>
#include <random>

#include "oracles.hpp"
#include "tcong/cyclotomic.hpp"
#include "tcong/howell.hpp"
#include "tcong/poly_fp.hpp"
#include "tcong/residue.hpp"

using namespace tcong;

namespace {

std::complex<double> embed_at(const CyclotomicInt& a, i64 k) {
    const double t = 2 * M_PI * static_cast<double>(k) / static_cast<double>(a.conductor());
    std::complex<double> z(std::cos(t), std::sin(t)), s(0, 0), w(1, 0);
    for (const auto& c : a.coeffs()) {
        s += w * static_cast<double>(c);
        w *= z;
    }
    return s;
}

// Compare all complex embeddings.
bool same_embeddings(const CyclotomicInt& a, const CyclotomicInt& b) {
    const i64 n = a.conductor();
    for (i64 k = 1; k <= n; ++k) {
        if (std::gcd(k, n) != 1) continue;
        if (std::abs(embed_at(a, k) - embed_at(b, k)) > 1e-8) return false;
    }
    return true;
}

CyclotomicInt random_cyclo(i64 n, std::mt19937_64& rng, int range = 5) {
    std::uniform_int_distribution<int> d(-range, range);
    std::vector<BigInt> c(static_cast<std::size_t>(euler_phi(n)));
    for (auto& x : c) x = d(rng);
    return CyclotomicInt(n, c);
}

CyclotomicInt one_minus_zeta(i64 n, i64 k) { return CyclotomicInt::one(n) - CyclotomicInt::zeta_power(n, k); }

}  // namespace

TEST(ResidueInt, Arithmetic) {
    ResidueInt a{7, 9}, b{5, 9};
    EXPECT_EQ((a + b).value, 3);
    EXPECT_EQ((a * b).value, 8);
    EXPECT_EQ((a * a.inverse()).value, 1);
    EXPECT_THROW((a + ResidueInt{1, 27}), MismatchError);
    EXPECT_THROW((ResidueInt{3, 9}.inverse()), NotUnitError);
}

TEST(ZmodPN, RingOps) {
    ZmodPN R(3, 2);
    EXPECT_EQ(R.modulus(), 9);
    EXPECT_EQ(R.mul(4, R.inverse(4)), 1);
    EXPECT_TRUE(R.divisible_by_p(6));
    EXPECT_FALSE(R.is_unit(3));
    EXPECT_THROW(ZmodPN(2, 3), InputError);
}

TEST(Cyclotomic, ZetaSquaredReduction) {
    CyclotomicInt z = CyclotomicInt::zeta_power(3, 1);
    CyclotomicInt z2 = cyclo_mul(z, z);
    EXPECT_EQ(z2, CyclotomicInt(3, {BigInt(-1), BigInt(-1)}));
}

TEST(Cyclotomic, MultiplicativeIdentity) {
    std::mt19937_64 rng(1);
    auto a = random_cyclo(9, rng);
    EXPECT_EQ(cyclo_mul(a, CyclotomicInt::one(9)), a);
}

TEST(Cyclotomic, NinthRootProduct) {
    auto prod = cyclo_mul(cyclo_mul(one_minus_zeta(9, 1), one_minus_zeta(9, 4)), one_minus_zeta(9, 7));
    auto expect = one_minus_zeta(3, 1).embed(9);
    EXPECT_EQ(prod, expect);
    EXPECT_TRUE(same_embeddings(prod, expect));
}

TEST(Cyclotomic, ConductorMismatchThrows) {
    EXPECT_THROW(cyclo_mul(CyclotomicInt::one(3), CyclotomicInt::one(9)), MismatchError);
    auto r = cyclo_mul(CyclotomicInt::zeta_power(3, 1), CyclotomicInt::zeta_power(9, 1), true);
    EXPECT_EQ(r, CyclotomicInt::zeta_power(9, 4));
}

TEST(Cyclotomic, RingAxiomsRandom) {
    std::mt19937_64 rng(2);
    for (i64 n : {3, 5, 9, 15, 25, 27}) {
        for (int t = 0; t < 20; ++t) {
            auto a = random_cyclo(n, rng), b = random_cyclo(n, rng), c = random_cyclo(n, rng);
            EXPECT_EQ(a * b, b * a);
            EXPECT_EQ((a * b) * c, a * (b * c));
            EXPECT_EQ(a * (b + c), a * b + a * c);
            // product against a floating point evaluation of every embedding
            for (i64 k = 1; k <= n; ++k) {
                if (std::gcd(k, n) != 1) continue;
                auto lhs = embed_at(a * b, k), rhs = embed_at(a, k) * embed_at(b, k);
                EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-6);
            }
        }
    }
}

TEST(Cyclotomic, GaloisAndDescent) {
    auto z = CyclotomicInt::zeta_power(9, 1);
    EXPECT_EQ(z.galois(2), CyclotomicInt::zeta_power(9, 2));
    EXPECT_EQ(one_minus_zeta(3, 1).embed(9).descend(3), one_minus_zeta(3, 1));
    EXPECT_THROW(z.descend(3), InputError);
}

TEST(RelativeNorm, Examples) {
    EXPECT_EQ(relative_norm(one_minus_zeta(9, 1), 3), one_minus_zeta(3, 1));
    EXPECT_EQ(relative_norm(one_minus_zeta(3, 1), 1), CyclotomicInt::from_int(1, 3));
    EXPECT_EQ(relative_norm(CyclotomicInt::one(9), 3), CyclotomicInt::one(3));
    EXPECT_THROW(relative_norm(CyclotomicInt::one(9), 2), InputError);
}

TEST(RelativeNorm, NormChain) {
    for (i64 p : {3, 5}) {
        i64 q = p;
        for (int r = 1; r <= 2; ++r) {
            EXPECT_EQ(relative_norm(one_minus_zeta(q * p, 1), q), one_minus_zeta(q, 1));
            q *= p;
        }
        EXPECT_EQ(relative_norm(one_minus_zeta(p, 1), 1), CyclotomicInt::from_int(1, p));
    }
}

TEST(RelativeNorm, MultiplicativeRandom) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        i64 n = (t % 2) ? 9 : 15;
        i64 m = (t % 2) ? 3 : 5;
        auto a = random_cyclo(n, rng, 3), b = random_cyclo(n, rng, 3);
        EXPECT_EQ(relative_norm(a * b, m), relative_norm(a, m) * relative_norm(b, m));
    }
}

TEST(RelativeNorm, MatchesEmbeddingProduct) {
    std::mt19937_64 rng(4);
    auto a = random_cyclo(9, rng, 2);
    auto n = relative_norm(a, 1);
    // product over all embeddings
    std::complex<double> prod(1, 0);
    for (i64 k : {1, 2, 4, 5, 7, 8}) prod *= embed_at(a, k);
    EXPECT_NEAR(prod.real(), static_cast<double>(n.coeffs()[0]), 1e-6 * std::max(1.0, std::abs(prod.real())));
}

TEST(CycloModPN, ReductionAndUnits) {
    ZmodPN B(3, 3);
    CycloModPN R(B, 9);
    auto z = R.zeta(1);
    auto one_minus = R.sub(R.one(), z);
    EXPECT_FALSE(R.is_unit(one_minus));
    EXPECT_TRUE(R.is_unit(z));
    EXPECT_EQ(R.reduce_mod_p(R.from_int(4)), 1);
    auto prod = R.mul(R.mul(one_minus, R.sub(R.one(), R.zeta(4))), R.sub(R.one(), R.zeta(7)));
    EXPECT_EQ(prod, R.from_cyclotomic(one_minus_zeta(3, 1).embed(9)));
}

TEST(FactorCyclotomic, Examples) {
    auto f97 = factor_cyclotomic_mod_ell(9, 7);
    ASSERT_EQ(f97.size(), 2u);
    for (const auto& f : f97) EXPECT_EQ(f.factor.deg(), 3);
    auto f37 = factor_cyclotomic_mod_ell(3, 7);
    ASSERT_EQ(f37.size(), 2u);
    // sorted with the higher-degree coefficients compared first
    EXPECT_EQ(f37[0].factor, PolyFp(7, {-4, 1}));
    EXPECT_EQ(f37[1].factor, PolyFp(7, {-2, 1}));
    auto f1 = factor_cyclotomic_mod_ell(1, 11);
    ASSERT_EQ(f1.size(), 1u);
    EXPECT_EQ(f1[0].factor, PolyFp(11, {-1, 1}));
    EXPECT_THROW(factor_cyclotomic_mod_ell(9, 3), InputError);
}

TEST(FactorCyclotomic, DegreesCountsAndProduct) {
    for (i64 n : {3, 5, 7, 9, 25, 27, 45}) {
        for (i64 l : primes_up_to(60)) {
            if (n % l == 0) continue;
            auto fs = factor_cyclotomic_mod_ell(n, l);
            const i64 f = mult_order(l, n);
            EXPECT_EQ(static_cast<i64>(fs.size()), euler_phi(n) / f);
            PolyFp prod(l, {1});
            for (const auto& g : fs) {
                EXPECT_EQ(g.factor.deg(), f);
                // irreducible: x^(l^f) = x mod g and no smaller degree root field
                PolyFp x(l, {0, 1});
                EXPECT_EQ(powmod_poly(x, boost::multiprecision::pow(BigInt(l), static_cast<unsigned>(f)), g.factor), x % g.factor);
                prod = prod * g.factor;
            }
            EXPECT_EQ(prod, reduce_poly(cyclotomic_poly(n), l));
        }
    }
}

TEST(Howell, Examples) {
    ModPNMatrix zero(3, 2, 2);
    zero.add_row({0, 0});
    EXPECT_EQ(howell_basis(zero).row_count(), 0u);
    ModPNMatrix id(3, 2, 2);
    id.add_row({1, 0});
    id.add_row({0, 1});
    EXPECT_EQ(howell_basis(id), id);
    ModPNMatrix m(3, 2, 2);
    m.add_row({3, 0});
    m.add_row({0, 3});
    auto b = howell_basis(m);
    EXPECT_TRUE(howell_contains(b, {3, 6}));
    EXPECT_FALSE(howell_contains(b, {1, 0}));
    auto span = oracle::additive_span(m.rows, 2, 9);
    EXPECT_EQ(span.size(), 9u);
    for (i64 a = 0; a < 9; ++a)
        for (i64 c = 0; c < 9; ++c) EXPECT_EQ(howell_contains(b, {a, c}), span.count({a, c}) == 1);
}

TEST(Howell, AgreesWithExhaustiveSpan) {
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int N : {2, 3}) {
        const i64 m = ipow(3, N);
        for (std::size_t dim = 1; dim <= 4; ++dim) {
            if (N == 3 && dim == 4) continue;  // 27^4 vectors is still fine but slow; dim 3 covers Z/27
            for (int trial = 0; trial < 12; ++trial) {
                std::uniform_int_distribution<i64> d(0, m - 1), nr(1, 3);
                std::vector<std::vector<i64>> rows;
                for (i64 r = nr(rng); r > 0; --r) {
                    std::vector<i64> v(dim);
                    for (auto& x : v) x = d(rng) * ((trial % 3 == 0) ? 3 : 1) % m;
                    rows.push_back(v);
                }
                ModPNMatrix M(3, N, dim);
                for (auto& r : rows) M.add_row(r);
                HowellBasis H(3, N, dim);
                for (auto& r : rows) H.insert(r);
                auto span = oracle::additive_span(rows, dim, m);
                std::vector<i64> v(dim, 0);
                for (;;) {
                    EXPECT_EQ(H.contains(v), span.count(v) == 1);
                    ++checked;
                    std::size_t k = 0;
                    while (k < dim && ++v[k] == m) v[k++] = 0;
                    if (k == dim) break;
                }
                EXPECT_EQ(howell_basis(M), H.canonical());
            }
        }
    }
    EXPECT_GT(checked, 10000);
}
