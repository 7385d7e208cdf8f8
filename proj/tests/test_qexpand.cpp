#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "tcong/qexpand.hpp"

using namespace tcong;

namespace {

// Positivity from the numeric embeddings; no value may sit near zero.
bool numerically_positive(const TotallyRealField& F, const QVector& b) {
    bool pos = true;
    for (long double v : F.embed(b)) {
        EXPECT_GT(std::fabs(static_cast<double>(v)), 1e-9) << F.str(b);
        if (v <= 0) pos = false;
    }
    return pos;
}

using QE = QExpansion<ZmodPN>;

QE random_expansion(const FieldTower& T, const GroupPtr& G, const ZmodPN& R, const Rational& bound, std::mt19937_64& rng,
                    bool constant = false) {
    const auto L = FieldLattice::integers(T.F->degree());
    QE f(T.F, L, bound, G, R);
    // large fields: support drawn from relative trace fibers only
    std::vector<Coords> pts;
    if (T.F->degree() <= 3) {
        pts = totally_positive_points(*T.F, L, bound);
    } else {
        const auto Ls = FieldLattice::integers(T.Fsub->degree());
        for (const auto& bs : totally_positive_points(*T.Fsub, Ls, Rational(floor(bound / Rational(T.p)))))
            for (auto& c : enumerate_trace_fiber(T, L, Ls.point(bs))) pts.push_back(std::move(c));
    }
    std::uniform_int_distribution<int> coin(0, 2);
    std::uniform_int_distribution<i64> gd(0, G->order() - 1), cd(1, R.modulus() - 1);
    for (const auto& c : pts) {
        if (coin(rng)) continue;
        LambdaElt a(G, R);
        a.add_term(gd(rng), cd(rng));
        a.add_term(gd(rng), cd(rng));
        f.add_term(c, a);
    }
    if (constant) f.add_term(Coords(T.F->degree(), BigInt(0)), LambdaElt::one(G, R));
    return f;
}

QVector rational_vec(std::initializer_list<int> xs) {
    QVector v;
    for (int x : xs) v.push_back(Rational(x));
    return v;
}

}  // namespace

TEST(TotallyRealField, RealCyclotomicNine) {
    auto F = real_cyclotomic_field(9);
    EXPECT_EQ(F->degree(), 3u);
    // 2cos(2 pi/9) has minimal polynomial x^3 - 3x + 1
    EXPECT_EQ(F->char_poly(F->basis(1)), rational_vec({1, -3, 0, 1}));
    EXPECT_EQ(F->trace(F->one()), 3);
    EXPECT_EQ(F->trace(F->basis(1)), 0);
    EXPECT_EQ(F->trace_form()[1][1], 6);
    EXPECT_FALSE(F->is_totally_positive(F->basis(1)));
    EXPECT_TRUE(F->is_totally_positive(F->add(F->basis(1), F->from_int(2))));
}

TEST(TotallyRealField, PositivityAgreesWithEmbeddings) {
    std::mt19937_64 rng(1);
    for (i64 n : {9, 25, 27}) {
        auto F = real_cyclotomic_field(n);
        std::uniform_int_distribution<int> c(-3, 3);
        int positive = 0;
        for (int k = 0; k < 300; ++k) {
            QVector b(F->degree());
            for (auto& x : b) x = c(rng);
            b[0] += 2 * static_cast<int>(F->degree());
            bool exact = F->is_totally_positive(b);
            bool numeric = true;
            bool clear = true;
            for (long double v : F->embed(b)) {
                if (std::fabs(static_cast<double>(v)) < 1e-9) clear = false;
                if (v <= 0) numeric = false;
            }
            if (!clear) continue;
            EXPECT_EQ(exact, numeric) << F->str(b);
            positive += exact;
        }
        EXPECT_GT(positive, 0);
    }
}

TEST(TotallyRealField, CharPolyRootsAreEmbeddings) {
    auto F = real_cyclotomic_field(25);
    QVector b = F->add(F->basis(1), F->scale(F->basis(3), 2));
    QVector c = F->char_poly(b);
    for (long double x : F->embed(b)) {
        long double v = 0, pw = 1;
        for (const auto& ck : c) {
            v += static_cast<long double>(ck.convert_to<double>()) * pw;
            pw *= x;
        }
        EXPECT_NEAR(static_cast<double>(v), 0.0, 1e-6);
    }
}

TEST(FieldTower, Validates) {
    for (auto [p, r] : std::vector<std::pair<i64, int>>{{3, 1}, {3, 2}, {5, 1}}) {
        auto T = real_cyclotomic_tower(p, r);
        EXPECT_EQ(T.F->degree(), static_cast<std::size_t>(p) * T.Fsub->degree());
        // relative trace of 1 is p
        EXPECT_EQ(T.relative_trace(T.F->one()), T.Fsub->scale(T.Fsub->one(), Rational(p)));
    }
}

TEST(FieldTower, RelativeTraceNumeric) {
    auto T = real_cyclotomic_tower(3, 1);
    QVector b = rational_vec({2, -1, 3});
    long double s = 0;
    for (auto v : T.F->embed(b)) s += v;
    EXPECT_NEAR(static_cast<double>(s), T.relative_trace(b)[0].convert_to<double>(), 1e-9);
}

TEST(TraceFiber, ContainsOne) {
    auto T = real_cyclotomic_tower(3, 1);
    auto L = FieldLattice::integers(3);
    auto fib = enumerate_trace_fiber(T, L, rational_vec({1}));
    Coords one{1, 0, 0};
    EXPECT_NE(std::find(fib.begin(), fib.end(), one), fib.end());
}

TEST(TraceFiber, NonPositiveTargetIsEmpty) {
    auto T = real_cyclotomic_tower(3, 1);
    auto L = FieldLattice::integers(3);
    EXPECT_TRUE(enumerate_trace_fiber(T, L, rational_vec({-1})).empty());
    EXPECT_TRUE(enumerate_trace_fiber(T, L, rational_vec({0})).empty());
}

TEST(TraceFiber, MatchesBoxSearchNine) {
    auto T = real_cyclotomic_tower(3, 1);
    auto L = FieldLattice::integers(3);
    for (int b = 1; b <= 10; ++b) {
        auto fib = enumerate_trace_fiber(T, L, rational_vec({b}));
        EXPECT_EQ(fib, oracle::box_fiber(T, rational_vec({b}))) << "beta' = " << b;
        for (const auto& c : fib) {
            QVector beta = L.point(c);
            EXPECT_EQ(T.F->trace(beta), 3 * b);
            EXPECT_TRUE(numerically_positive(*T.F, beta));
        }
    }
    EXPECT_EQ(enumerate_trace_fiber(T, L, rational_vec({2})).size(), oracle::box_fiber(T, rational_vec({2})).size());
}

TEST(TraceFiber, AgreesWithPointsAndBasisChangeTwentyFive) {
    auto T = real_cyclotomic_tower(5, 1);
    const std::size_t d = T.F->degree();
    auto L = FieldLattice::integers(d);
    // unimodular upper triangular change of basis
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> entry(-1, 1);
    FieldLattice M = L;
    for (std::size_t i = 0; i + 1 < d; ++i) M.basis[i][i + 1] = Rational(entry(rng));
    for (const auto& bs : {rational_vec({1, 0}), rational_vec({2, 0})}) {
        ASSERT_TRUE(T.Fsub->is_totally_positive(bs));
        auto a = enumerate_trace_fiber(T, L, bs), b = enumerate_trace_fiber(T, M, bs);
        std::set<QVector> pa, pb;
        for (const auto& c : a) pa.insert(L.point(c));
        for (const auto& c : b) pb.insert(M.point(c));
        EXPECT_EQ(pa, pb);
        EXPECT_FALSE(pa.empty());
        std::set<QVector> pc;
        const Rational S = T.Fsub->trace(T.Fsub->scale(bs, Rational(5)));
        for (const auto& c : totally_positive_points(*T.F, L, S))
            if (T.relative_trace(L.point(c)) == T.Fsub->scale(bs, Rational(5))) pc.insert(L.point(c));
        EXPECT_EQ(pa, pc);
        const QVector target = T.Fsub->scale(bs, Rational(5));
        for (const auto& v : pa) {
            EXPECT_EQ(T.relative_trace(v), target);
            EXPECT_TRUE(T.F->is_totally_positive(v));
        }
    }
}

TEST(TraceFiber, ScaledLattice) {
    auto T = real_cyclotomic_tower(3, 1);
    FieldLattice L = FieldLattice::integers(3);
    for (auto& row : L.basis)
        for (auto& x : row) x *= Rational(1, 2);
    auto half = enumerate_trace_fiber(T, L, rational_vec({1}));
    // (1/2)O: points c with Tr(c/2) = 3, i.e. Tr(c) = 6
    auto full = enumerate_trace_fiber(T, FieldLattice::integers(3), rational_vec({2}));
    EXPECT_EQ(half, full);
}

TEST(QExpansion, LinearPlumbing) {
    std::mt19937_64 rng(3);
    auto T = real_cyclotomic_tower(3, 1);
    auto G = make_group({3});
    ZmodPN R(3, 2);
    auto f = random_expansion(T, G, R, 15, rng);
    QE zero(T.F, FieldLattice::integers(3), 15, G, R);
    EXPECT_EQ(f + zero, f);
    EXPECT_EQ(f.scale(LambdaElt::one(G, R)), f);
    auto lam = LambdaElt::element(G, R, 1) + LambdaElt::one(G, R).scale(4);
    auto mu = LambdaElt::element(G, R, 2).scale(7);
    EXPECT_EQ(f.scale(lam) + f.scale(mu), f.scale(lam + mu));
    EXPECT_EQ(f - f, zero);
}

TEST(QExpansion, RejectsBadSupport) {
    auto T = real_cyclotomic_tower(3, 1);
    auto G = make_group({3});
    ZmodPN R(3, 2);
    QE f(T.F, FieldLattice::integers(3), 9, G, R);
    EXPECT_THROW(f.add_term({0, 1, 0}, LambdaElt::one(G, R)), InputError);
    EXPECT_THROW(f.add_term({4, 0, 0}, LambdaElt::one(G, R)), InputError);
    QE g(T.F, FieldLattice::integers(3), 10, G, R);
    EXPECT_THROW(f + g, MismatchError);
}

TEST(DiagonalRestrict, ZeroAndSingleTerm) {
    auto T = real_cyclotomic_tower(3, 1);
    auto G = make_group({3});
    ZmodPN R(3, 2);
    auto L = FieldLattice::integers(3);
    auto L1 = FieldLattice::integers(1);
    QE zero(T.F, L, 30, G, R);
    auto r0 = diagonal_restrict(zero, T, L1);
    EXPECT_TRUE(r0.terms().empty());
    EXPECT_EQ(r0.trace_bound(), 10);

    // beta0 = 1 is alone in its fiber over beta' = 1
    ASSERT_EQ(enumerate_trace_fiber(T, L, rational_vec({1})).size(), 1u);
    QE f(T.F, L, 30, G, R);
    auto a = LambdaElt::element(G, R, 2);
    f.add_term({1, 0, 0}, a);
    auto r = diagonal_restrict(f, T, L1);
    ASSERT_EQ(r.terms().size(), 1u);
    EXPECT_EQ(r.coeff({1}), a);
}

TEST(DiagonalRestrict, MatchesFiberSumOracle) {
    std::mt19937_64 rng(5);
    auto G = make_group({3, 3});
    ZmodPN R(3, 2);
    for (auto [p, r, bound] : std::vector<std::tuple<i64, int, int>>{{3, 1, 30}, {3, 2, 20}, {5, 1, 12}}) {
        auto T = real_cyclotomic_tower(p, r);
        auto L = FieldLattice::integers(T.F->degree());
        auto Ls = FieldLattice::integers(T.Fsub->degree());
        for (int k = 0; k < (p == 3 && r == 1 ? 10 : 2); ++k) {
            auto f = random_expansion(T, G, R, bound, rng, k % 2 == 0);
            auto res = diagonal_restrict(f, T, Ls);
            EXPECT_EQ(res.trace_bound(), floor(Rational(bound, p)));
            // every beta' up to the reduced bound, plus the zero term
            for (const auto& bs : totally_positive_points(*T.Fsub, Ls, res.trace_bound())) {
                LambdaElt expect(G, R);
                for (const auto& beta : enumerate_trace_fiber(T, L, Ls.point(bs))) expect += f.coeff(beta);
                EXPECT_EQ(res.coeff(bs), expect);
            }
            Coords z(T.Fsub->degree(), BigInt(0));
            EXPECT_EQ(res.coeff(z), f.coeff(Coords(T.F->degree(), BigInt(0))));
            std::size_t support = 0;
            for (const auto& bs : totally_positive_points(*T.Fsub, Ls, res.trace_bound())) support += res.terms().count(bs);
            EXPECT_EQ(support + res.terms().count(z), res.terms().size());
        }
    }
}

TEST(DiagonalRestrict, LinearAndNoConstantTerm) {
    std::mt19937_64 rng(6);
    auto T = real_cyclotomic_tower(3, 1);
    auto G = make_group({3});
    ZmodPN R(3, 2);
    auto L1 = FieldLattice::integers(1);
    for (int k = 0; k < 5; ++k) {
        auto f = random_expansion(T, G, R, 24, rng), g = random_expansion(T, G, R, 24, rng);
        auto lam = LambdaElt::element(G, R, 1).scale(2);
        EXPECT_EQ(diagonal_restrict(f.scale(lam) + g, T, L1), diagonal_restrict(f, T, L1).scale(lam) + diagonal_restrict(g, T, L1));
        EXPECT_EQ(diagonal_restrict(f, T, L1).terms().count(Coords{0}), 0u);
    }
}
