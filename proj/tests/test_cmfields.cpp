#include <gtest/gtest.h>

#include <complex>

#include "oracles.hpp"
#include "tcong/cmfields.hpp"

using namespace tcong;

namespace {

// Analytic class number formula for a fundamental discriminant D < 0.
i64 analytic_class_number(i64 D) {
    i64 s = 0;
    for (i64 n = 1; n < -D; ++n) s += kronecker(D, n) * n;
    i64 w = D == -3 ? 6 : (D == -4 ? 4 : 2);
    return -w * s / (2 * -D);
}

}  // namespace

TEST(ImagQuadField, PSplitExamples) {
    EXPECT_TRUE(is_p_split(ImagQuadField(23, 3)));
    EXPECT_TRUE(is_p_split(ImagQuadField(1, 5)));
    // disc -8 = 1 mod 3 is a square: 3 splits in Q(sqrt(-2)) (3 = (1 + sqrt(-2))(1 - sqrt(-2)))
    EXPECT_TRUE(is_p_split(ImagQuadField(2, 3)));
    EXPECT_FALSE(is_p_split(ImagQuadField(1, 3)));
    EXPECT_THROW(is_p_split(ImagQuadField(3, 3)), InputError);
    EXPECT_THROW(ImagQuadField(4, 3), InputError);
}

TEST(ClassGroup, Examples) {
    auto cg23 = class_group(ImagQuadField(23, 3));
    EXPECT_EQ(cg23.order(), 3u);
    EXPECT_EQ(cg23.forms, (std::vector<QForm>{{1, 1, 6}, {2, -1, 3}, {2, 1, 3}}));
    EXPECT_EQ(class_group(ImagQuadField(1, 5)).order(), 1u);
    EXPECT_EQ(class_group(ImagQuadField(47, 3)).order(), 5u);
}

TEST(ClassGroup, GroupLawAndStructure) {
    for (i64 D : {-23, -47, -84, -420, -164, -260, -1155}) {
        auto cg = class_group_of_disc(D);
        const std::size_t h = cg.order();
        for (std::size_t i = 0; i < h; ++i) {
            EXPECT_EQ(cg.table[i][cg.identity], i);
            EXPECT_EQ(cg.table[i][cg.index_of(inverse_form(cg.forms[i]))], cg.identity);
            for (std::size_t j = 0; j < h; ++j)
                for (std::size_t k = 0; k < h; ++k) EXPECT_EQ(cg.table[cg.table[i][j]][k], cg.table[i][cg.table[j][k]]);
        }
        EXPECT_EQ(cg.group()->order(), static_cast<i64>(h));
    }
    // -84: (Z/2)^2, -420: (Z/2)^3
    EXPECT_EQ(class_group_of_disc(-84).group()->invariant_factors(), (std::vector<i64>{2, 2}));
    EXPECT_EQ(class_group_of_disc(-420).group()->invariant_factors(), (std::vector<i64>{2, 2, 2}));
}

TEST(ClassGroup, OrdersMatchBruteForce) {
    int n = 0;
    for (i64 D = -3; D >= -2000; --D) {
        if (!oracle::is_fundamental(D)) continue;
        auto h = static_cast<i64>(class_group_of_disc(D).order());
        EXPECT_EQ(h, oracle::brute_class_number(D)) << D;
        EXPECT_EQ(h, analytic_class_number(D)) << D;
        ++n;
    }
    EXPECT_GT(n, 500);
}

TEST(SplittingData, Examples) {
    ImagQuadField K(23, 3);
    auto s = splitting_data(K, 7, 2);
    EXPECT_EQ(s.f_cyc, 3);
    EXPECT_EQ(s.g_cyc, 2);
    auto s19 = splitting_data(K, 19, 2);
    EXPECT_EQ(s19.f_cyc, 1);
    EXPECT_EQ(s19.g_cyc, 6);
    auto s2 = splitting_data(K, 2, 1);
    EXPECT_EQ(s2.f_cyc, 2);
    EXPECT_EQ(s2.g_cyc, 1);
    EXPECT_EQ(s2.f_total * s2.g_total, 2 * euler_phi(3));
    EXPECT_THROW(splitting_data(K, 23, 1), InputError);
    EXPECT_THROW(splitting_data(K, 3, 1), InputError);
}

TEST(PowerResidueSymbol, Examples) {
    ResiduePrime P{7, 3, PolyFp(7, {-2, 1}), 1};  // zeta_3 -> 2 in F_7
    EXPECT_EQ(power_residue_symbol(2, P, 3).exponent, 2);
    EXPECT_EQ(power_residue_symbol(8, P, 3).exponent, 0);  // 8 = 1 mod 7
    EXPECT_EQ(power_residue_symbol(27, P, 3).exponent, 0);  // a cube
    EXPECT_THROW(power_residue_symbol(14, P, 3), InputError);
    ResiduePrime bad{5, 3, PolyFp(5, {1, 1, 1}), 1};
    EXPECT_NO_THROW(power_residue_symbol(2, bad, 3));  // F_25 contains mu_3
    ResiduePrime tiny{7, 1, PolyFp(7, {-1, 1}), 1};
    EXPECT_THROW(power_residue_symbol(2, tiny, 3), InputError);
}

TEST(PowerResidueSymbol, MultiplicativeAndOrder) {
    for (i64 ell : {19, 37, 73, 109, 7, 13}) {
        for (const auto& f : factor_cyclotomic_mod_ell(9, ell)) {
            for (int quad : {1, 2}) {
                ResiduePrime P{ell, 9, f.factor, quad};
                for (i64 m = 2; m < 12; ++m) {
                    if (m % ell == 0) continue;
                    for (i64 m2 = 2; m2 < 6; ++m2) {
                        if (m2 % ell == 0) continue;
                        auto a = power_residue_symbol(m, P, 9), b = power_residue_symbol(m2, P, 9);
                        EXPECT_EQ(power_residue_symbol(m * m2, P, 9).exponent, mod(a.exponent + b.exponent, 9));
                    }
                    // value is a genuine 9th root of unity
                    auto v = power_residue_symbol(m, P, 9).value();
                    CyclotomicInt w = CyclotomicInt::one(9);
                    for (int i = 0; i < 9; ++i) w = w * v;
                    EXPECT_EQ(w, CyclotomicInt::one(9));
                }
            }
        }
    }
}

TEST(PowerResidueSymbol, GaloisEquivariance) {
    // sigma_a(P) has residue map zeta -> x^(a^-1) mod g; the symbol transforms by sigma_a
    for (i64 ell : {19, 37, 7}) {
        auto fs = factor_cyclotomic_mod_ell(9, ell);
        for (const auto& f : fs) {
            for (i64 a : {2, 4, 5, 7, 8}) {
                i64 ainv = invmod(a, 9);
                const PolyFp* image = nullptr;
                for (const auto& h : fs)
                    if ((h.factor.compose_power(static_cast<std::size_t>(ainv)) % f.factor).is_zero()) image = &h.factor;
                ASSERT_NE(image, nullptr);
                for (i64 m : {2, 3, 5, 10}) {
                    if (m % ell == 0) continue;
                    auto k = power_residue_symbol(m, ResiduePrime{ell, 9, f.factor, 1}, 9).exponent;
                    auto k2 = power_residue_symbol(m, ResiduePrime{ell, 9, *image, 1}, 9).exponent;
                    EXPECT_EQ(k2, mod(a * k, 9));
                }
            }
        }
    }
}

TEST(ResidueProductIdentity, SmallBound) {
    for (i64 D : {23, 11}) {
        auto rep = verify_5322(ImagQuadField(D, 3), BigInt(2), 2, 200);
        EXPECT_EQ(rep.failures(), 0u);
        EXPECT_GT(rep.lines.size(), 20u);
    }
    auto rep3 = verify_5322(ImagQuadField(23, 3), BigInt(5), 3, 120, 2);
    EXPECT_EQ(rep3.failures(), 0u);
    EXPECT_THROW(verify_5322(ImagQuadField(23, 3), BigInt(2), 1, 100), InputError);
}

TEST(InertExponent, SpotValue) {
    EXPECT_EQ(inert_exponent_b(3, 19), BigInt(127));
    EXPECT_EQ(mod(inert_exponent_b(3, 19) - 1, 9), 0);
    EXPECT_THROW(inert_exponent_b(3, 5), InputError);
}

TEST(CheckPPrime, Examples) {
    auto r3 = check_P_prime(3, 2);
    EXPECT_EQ(r3.disc_upper, BigInt(-19683));
    EXPECT_EQ(r3.exponent_upper, 9);
    EXPECT_EQ(r3.standard_exponent, 9);
    EXPECT_EQ(r3.displayed_exponent, 39);
    EXPECT_TRUE(r3.verdict);
    auto r5 = check_P_prime(5, 2);
    EXPECT_EQ(r5.exponent_upper, 35);
    EXPECT_TRUE(r5.verdict);
    EXPECT_TRUE(check_P_prime(3, 3).verdict);
    EXPECT_THROW(check_P_prime(3, 1), InputError);
}

TEST(CheckPPrime, DiscriminantMatchesRootProduct) {
    // |disc| = prod over roots of |Phi'(zeta)|
    for (i64 n : {9, 25}) {
        const auto& phi = cyclotomic_poly(n);
        double logprod = 0;
        for (i64 k = 1; k < n; ++k) {
            if (std::gcd(k, n) != 1) continue;
            std::complex<double> z = std::polar(1.0, 2 * M_PI * static_cast<double>(k) / static_cast<double>(n));
            std::complex<double> d(0, 0), w(1, 0);
            for (std::size_t i = 1; i < phi.size(); ++i) {
                d += static_cast<double>(i) * static_cast<double>(phi[i]) * w;
                w *= z;
            }
            logprod += std::log(std::abs(d));
        }
        auto rep = check_P_prime(n == 9 ? 3 : 5, 2);
        EXPECT_NEAR(logprod, std::log(static_cast<double>(abs(rep.disc_upper))), 1e-6);
    }
}

TEST(CyclotomicTowerLevel, DefiningPolynomialAndNorms) {
    for (i64 p : {3, 5}) {
        ImagQuadField K(p == 3 ? 23 : 1, p);
        for (int r = 0; r <= 2; ++r) {
            CyclotomicTowerLevel L(K, r);
            EXPECT_EQ(L.degree(), 2 * euler_phi(ipow(p, r)));
            std::complex<double> z = std::polar(1.0, 2 * M_PI / static_cast<double>(ipow(p, r)));
            std::complex<double> x = z + std::complex<double>(0, std::sqrt(static_cast<double>(K.D))), s(0, 0), w(1, 0);
            double scale = 0;
            for (const auto& c : L.defining_poly) {
                s += static_cast<double>(c) * w;
                scale += std::abs(static_cast<double>(c)) * std::abs(w);
                w *= x;
            }
            EXPECT_LT(std::abs(s), 1e-12 * scale);
        }
    }
}

TEST(ConditionC, TelescopingSingleRamifiedPlace) {
    // Z = Z/9 with trivial action, Z' = Z/3, ver(1) = 3; one place with z_w = 1, z_w^3 = ver(z'_w)
    const i64 p = 3;
    ZmodPN R(3, 2);
    auto Z = make_group({9}), Zp = make_group({3});
    ConditionCData d;
    d.R = R;
    d.z_action = CyclicAction::trivial(Z, p);
    d.Zprime = Zp;
    d.ver = GroupHom(Zp, Z, {{3}});
    auto Cl = make_group({3}), Clp = make_group({3});
    d.cl_action = CyclicAction::trivial(Cl, p);
    d.Clprime = Clp;
    d.cl_transfer = GroupHom::zero(Clp, Cl);  // A' -> A^G trivial image
    // A' trivial in effect: only the ratio classes generate A^G
    d.Clprime = make_group({});
    d.cl_transfer = GroupHom::zero(d.Clprime, Cl);
    d.ratio_classes = {1};
    for (i64 j = 0; j < p; ++j) {
        d.reps.push_back({"a" + std::to_string(j), j, j});
        d.reps_perm.push_back(static_cast<std::size_t>(j));
    }
    d.reps_prime.push_back({"a'", 0, 0});
    d.C = LambdaElt::one(Z, R) - LambdaElt::element(Z, R, 1);
    d.Cprime = LambdaElt::one(Zp, R) - LambdaElt::element(Zp, R, 1);
    auto rep = check_condition_C(d);
    EXPECT_TRUE(rep.b_bijective);
    EXPECT_TRUE(rep.a_coset_structure);
    EXPECT_TRUE(rep.identity_holds);
    EXPECT_TRUE(rep.verdict);
    EXPECT_EQ(rep.lhs, LambdaElt::one(Z, R) - LambdaElt::element(Z, R, 3));

    // corrupt: no fixed representatives while C != 0
    auto e = d;
    for (std::size_t i = 0; i < e.reps_perm.size(); ++i) e.reps_perm[i] = (i + 1) % 3;
    auto rep2 = check_condition_C(e);
    EXPECT_FALSE(rep2.identity_holds);
    EXPECT_FALSE(rep2.verdict);
}

TEST(ConditionC, BTransferNotBijective) {
    const i64 p = 3;
    ZmodPN R(3, 1);
    auto Z = make_group({3});
    ConditionCData d;
    d.R = R;
    d.z_action = CyclicAction::trivial(Z, p);
    d.Zprime = Z;
    d.ver = GroupHom::identity(Z);
    auto Cl = make_group({2}), Clp = make_group({2});
    d.cl_action = CyclicAction::trivial(Cl, p);
    d.Clprime = Clp;
    d.cl_transfer = GroupHom::zero(Clp, Cl);  // corrupted: should be an isomorphism
    d.reps = {{"b0", 0, 0}, {"b1", 1, 0}};
    d.reps_perm = {0, 1};
    d.reps_prime = {{"b0'", 0, 0}, {"b1'", 1, 0}};
    d.C = LambdaElt::one(Z, R);
    d.Cprime = LambdaElt::one(Z, R);
    auto rep = check_condition_C(d);
    EXPECT_FALSE(rep.b_bijective);
    EXPECT_FALSE(rep.verdict);
    EXPECT_FALSE(rep.witnesses.empty());
    d.cl_transfer = GroupHom::identity(Cl);
    EXPECT_TRUE(check_condition_C(d).verdict);
}
