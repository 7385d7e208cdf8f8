#pragma once

// Dense linear algebra over the rationals and the integers.

#include <optional>
#include <vector>

#include "tcong/arith.hpp"

namespace tcong {

using QMatrix = std::vector<std::vector<Rational>>;
using QVector = std::vector<Rational>;

// Solves A x = b (A is m x n). Returns nullopt if inconsistent; free
// variables are set to zero.
inline std::optional<QVector> solve_rational(QMatrix A, QVector b) {
    const std::size_t m = A.size();
    const std::size_t n = m ? A[0].size() : 0;
    if (b.size() != m) throw MismatchError("solve_rational: shape");
    std::vector<std::size_t> pivcol;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < m; ++col) {
        std::size_t piv = row;
        while (piv < m && A[piv][col] == 0) ++piv;
        if (piv == m) continue;
        std::swap(A[piv], A[row]);
        std::swap(b[piv], b[row]);
        Rational inv = 1 / A[row][col];
        for (std::size_t j = col; j < n; ++j) A[row][j] *= inv;
        b[row] *= inv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row || A[i][col] == 0) continue;
            Rational f = A[i][col];
            for (std::size_t j = col; j < n; ++j) A[i][j] -= f * A[row][j];
            b[i] -= f * b[row];
        }
        pivcol.push_back(col);
        ++row;
    }
    for (std::size_t i = row; i < m; ++i) {
        if (b[i] != 0) return std::nullopt;
    }
    QVector x(n, Rational(0));
    for (std::size_t i = 0; i < pivcol.size(); ++i) x[pivcol[i]] = b[i];
    return x;
}

inline std::optional<QMatrix> inverse_rational(const QMatrix& A) {
    const std::size_t n = A.size();
    QMatrix M = A;
    QMatrix I(n, QVector(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) I[i][i] = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && M[piv][col] == 0) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(M[piv], M[col]);
        std::swap(I[piv], I[col]);
        Rational inv = 1 / M[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            M[col][j] *= inv;
            I[col][j] *= inv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || M[i][col] == 0) continue;
            Rational f = M[i][col];
            for (std::size_t j = 0; j < n; ++j) {
                M[i][j] -= f * M[col][j];
                I[i][j] -= f * I[col][j];
            }
        }
    }
    return I;
}

inline QMatrix mat_mul(const QMatrix& A, const QMatrix& B) {
    const std::size_t m = A.size(), k = B.size(), n = k ? B[0].size() : 0;
    QMatrix C(m, QVector(n, Rational(0)));
    for (std::size_t i = 0; i < m; ++i) {
        if (A[i].size() != k) throw MismatchError("mat_mul: shape");
        for (std::size_t l = 0; l < k; ++l) {
            if (A[i][l] == 0) continue;
            for (std::size_t j = 0; j < n; ++j) C[i][j] += A[i][l] * B[l][j];
        }
    }
    return C;
}

inline QVector mat_vec(const QMatrix& A, const QVector& x) {
    QVector y(A.size(), Rational(0));
    for (std::size_t i = 0; i < A.size(); ++i) {
        if (A[i].size() != x.size()) throw MismatchError("mat_vec: shape");
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += A[i][j] * x[j];
    }
    return y;
}

// Fraction-free determinant of an integer matrix (Bareiss).
inline BigInt det_bareiss(std::vector<std::vector<BigInt>> M) {
    const std::size_t n = M.size();
    if (n == 0) return 1;
    BigInt sign = 1, prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (M[k][k] == 0) {
            std::size_t s = k + 1;
            while (s < n && M[s][k] == 0) ++s;
            if (s == n) return 0;
            std::swap(M[s], M[k]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev;
            }
        }
        prev = M[k][k];
    }
    return sign * M[n - 1][n - 1];
}

}  // namespace tcong
