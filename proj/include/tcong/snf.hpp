#pragma once

// Smith normal form over the integers with unimodular transforms.

#include <vector>

#include "tcong/arith.hpp"

namespace tcong {

using ZMatrix = std::vector<std::vector<BigInt>>;

inline ZMatrix identity_matrix(std::size_t n) {
    ZMatrix I(n, std::vector<BigInt>(n, BigInt(0)));
    for (std::size_t i = 0; i < n; ++i) I[i][i] = 1;
    return I;
}

inline ZMatrix zmul(const ZMatrix& A, const ZMatrix& B) {
    const std::size_t m = A.size(), k = B.size(), n = k ? B[0].size() : 0;
    ZMatrix C(m, std::vector<BigInt>(n, BigInt(0)));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (A[i][l] == 0) continue;
            for (std::size_t j = 0; j < n; ++j) C[i][j] += A[i][l] * B[l][j];
        }
    return C;
}

struct SNFResult {
    std::vector<BigInt> diag;  // min(m, n) entries, d_i | d_(i+1), non-negative
    ZMatrix U;                 // m x m
    ZMatrix V;                 // n x n, with U * A * V = diag
};

inline SNFResult smith_normal_form(ZMatrix A) {
    const std::size_t m = A.size();
    const std::size_t n = m ? A[0].size() : 0;
    ZMatrix U = identity_matrix(m), V = identity_matrix(n);

    auto row_op = [&](std::size_t dst, std::size_t src, const BigInt& f) {
        // row_dst -= f * row_src
        for (std::size_t j = 0; j < n; ++j) A[dst][j] -= f * A[src][j];
        for (std::size_t j = 0; j < m; ++j) U[dst][j] -= f * U[src][j];
    };
    auto col_op = [&](std::size_t dst, std::size_t src, const BigInt& f) {
        for (std::size_t i = 0; i < m; ++i) A[i][dst] -= f * A[i][src];
        for (std::size_t i = 0; i < n; ++i) V[i][dst] -= f * V[i][src];
    };
    auto swap_rows = [&](std::size_t a, std::size_t b) {
        std::swap(A[a], A[b]);
        std::swap(U[a], U[b]);
    };
    auto swap_cols = [&](std::size_t a, std::size_t b) {
        for (auto& r : A) std::swap(r[a], r[b]);
        for (auto& r : V) std::swap(r[a], r[b]);
    };

    const std::size_t r = std::min(m, n);
    for (std::size_t t = 0; t < r; ++t) {
        for (;;) {
            // smallest nonzero entry in the remaining block becomes the pivot
            bool found = false;
            std::size_t pi = t, pj = t;
            BigInt best;
            for (std::size_t i = t; i < m; ++i)
                for (std::size_t j = t; j < n; ++j) {
                    if (A[i][j] == 0) continue;
                    BigInt a = abs(A[i][j]);
                    if (!found || a < best) {
                        best = a;
                        pi = i;
                        pj = j;
                        found = true;
                    }
                }
            if (!found) goto done;
            swap_rows(t, pi);
            swap_cols(t, pj);
            bool clean = true;
            for (std::size_t i = t + 1; i < m; ++i) {
                if (A[i][t] == 0) continue;
                row_op(i, t, A[i][t] / A[t][t]);
                if (A[i][t] != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < n; ++j) {
                if (A[t][j] == 0) continue;
                col_op(j, t, A[t][j] / A[t][t]);
                if (A[t][j] != 0) clean = false;
            }
            if (!clean) continue;
            // divisibility: fold a non-divisible entry into the pivot row
            bool divides = true;
            for (std::size_t i = t + 1; i < m && divides; ++i)
                for (std::size_t j = t + 1; j < n; ++j) {
                    if (A[i][j] % A[t][t] != 0) {
                        row_op(t, i, BigInt(-1));
                        divides = false;
                        break;
                    }
                }
            if (divides) break;
        }
        if (A[t][t] < 0) {
            for (std::size_t j = 0; j < n; ++j) A[t][j] = -A[t][j];
            for (std::size_t j = 0; j < m; ++j) U[t][j] = -U[t][j];
        }
    }
done:
    SNFResult res;
    res.diag.resize(r);
    for (std::size_t i = 0; i < r; ++i) res.diag[i] = A[i][i];
    res.U = std::move(U);
    res.V = std::move(V);
    return res;
}

// Basis (as columns of the returned n x k matrix) of {x in Z^n : A x = 0}.
inline ZMatrix integer_kernel(const ZMatrix& A, std::size_t n) {
    if (A.empty()) return identity_matrix(n);
    SNFResult s = smith_normal_form(A);
    std::size_t rank = 0;
    for (const auto& d : s.diag)
        if (d != 0) ++rank;
    ZMatrix K(n, std::vector<BigInt>(n - rank, BigInt(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = rank; j < n; ++j) K[i][j - rank] = s.V[i][j];
    return K;
}

// Inverse of a unimodular integer matrix.
inline ZMatrix unimodular_inverse(const ZMatrix& M) {
    const std::size_t n = M.size();
    std::vector<std::vector<Rational>> A(n, std::vector<Rational>(2 * n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) A[i][j] = Rational(M[i][j]);
        A[i][n + i] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && A[piv][c] == 0) ++piv;
        if (piv == n) throw InputError("unimodular_inverse: singular");
        std::swap(A[piv], A[c]);
        Rational inv = 1 / A[c][c];
        for (auto& x : A[c]) x *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || A[i][c] == 0) continue;
            Rational f = A[i][c];
            for (std::size_t j = 0; j < 2 * n; ++j) A[i][j] -= f * A[c][j];
        }
    }
    ZMatrix R(n, std::vector<BigInt>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const Rational& x = A[i][n + j];
            if (boost::multiprecision::denominator(x) != 1) throw InputError("unimodular_inverse: not unimodular");
            R[i][j] = boost::multiprecision::numerator(x);
        }
    return R;
}

}  // namespace tcong
