#pragma once

// Totally real fields with an explicit integral basis, trace fibers of a
// degree-p tower, and truncated q-expansions with Lambda coefficients.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "tcong/cyclotomic.hpp"
#include "tcong/iwalg.hpp"
#include "tcong/qlinalg.hpp"
#include "tcong/snf.hpp"

namespace tcong {

using Coords = std::vector<BigInt>;

namespace detail {

inline std::string coords_label(const Coords& c) {
    std::string s = "[";
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + c[i].str();
    return s + "]";
}

}  // namespace detail

// Field of degree d with Z-basis b_0..b_(d-1) of its integers; elements are
// rational coordinate vectors. mult[i][j] holds the coordinates of b_i b_j;
// embeddings[k][i] is the k-th real embedding of b_i.
class TotallyRealField {
public:
    TotallyRealField(std::string name, std::vector<std::vector<QVector>> mult, std::vector<std::vector<long double>> embeddings)
        : name_(std::move(name)), mult_(std::move(mult)), emb_(std::move(embeddings)) {
        d_ = mult_.size();
        if (d_ == 0) throw InputError("TotallyRealField: empty basis");
        for (std::size_t i = 0; i < d_; ++i) {
            if (mult_[i].size() != d_) throw InputError("TotallyRealField: multiplication table shape");
            for (std::size_t j = 0; j < d_; ++j) {
                if (mult_[i][j].size() != d_) throw InputError("TotallyRealField: multiplication table shape");
                if (mult_[i][j] != mult_[j][i]) throw InputError("TotallyRealField: multiplication is not commutative");
            }
        }
        if (emb_.size() != d_) throw InputError("TotallyRealField: need one real embedding per degree");
        for (const auto& e : emb_)
            if (e.size() != d_) throw InputError("TotallyRealField: embedding table shape");
        for (std::size_t k = 0; k < d_; ++k)
            for (std::size_t l = k + 1; l < d_; ++l) {
                bool differ = false;
                for (std::size_t i = 0; i < d_ && !differ; ++i) differ = std::fabs(static_cast<double>(emb_[k][i] - emb_[l][i])) > 1e-9;
                if (!differ) throw InputError("TotallyRealField: embeddings are not distinct");
            }
        Q_.assign(d_, std::vector<BigInt>(d_));
        for (std::size_t i = 0; i < d_; ++i) {
            Rational t = trace(basis(i));
            long double s = 0;
            for (std::size_t k = 0; k < d_; ++k) s += emb_[k][i];
            if (std::fabs(static_cast<double>(s - static_cast<long double>(t.convert_to<double>()))) > 1e-6 * (1 + std::fabs(static_cast<double>(s))))
                throw InputError("TotallyRealField: embeddings disagree with the trace of b_" + std::to_string(i));
            for (std::size_t j = 0; j < d_; ++j) {
                Rational q = trace(mul(basis(i), basis(j)));
                if (denominator(q) != 1) throw InputError("TotallyRealField: basis is not integral");
                Q_[i][j] = numerator(q);
            }
        }
    }

    const std::string& name() const { return name_; }
    std::size_t degree() const { return d_; }
    // Tr(b_i b_j)
    const std::vector<std::vector<BigInt>>& trace_form() const { return Q_; }
    const std::vector<std::vector<long double>>& embeddings() const { return emb_; }

    QVector zero() const { return QVector(d_, Rational(0)); }
    QVector basis(std::size_t i) const {
        QVector v = zero();
        v.at(i) = 1;
        return v;
    }
    QVector from_int(const Rational& a) const { return scale(one(), a); }
    // Solved from b_0 * e = b_0, so b_0 need not be 1.
    QVector one() const {
        if (!one_) {
            QMatrix M(d_, QVector(d_));
            for (std::size_t i = 0; i < d_; ++i)
                for (std::size_t j = 0; j < d_; ++j) M[i][j] = mult_[0][j][i];
            auto e = solve_rational(M, basis(0));
            if (!e) throw InputError("TotallyRealField: no unit element");
            one_ = std::make_shared<QVector>(*e);
        }
        return *one_;
    }
    QVector add(const QVector& a, const QVector& b) const {
        QVector r(d_);
        for (std::size_t i = 0; i < d_; ++i) r[i] = a[i] + b[i];
        return r;
    }
    QVector sub(const QVector& a, const QVector& b) const {
        QVector r(d_);
        for (std::size_t i = 0; i < d_; ++i) r[i] = a[i] - b[i];
        return r;
    }
    QVector scale(const QVector& a, const Rational& s) const {
        QVector r(d_);
        for (std::size_t i = 0; i < d_; ++i) r[i] = a[i] * s;
        return r;
    }
    QVector mul(const QVector& a, const QVector& b) const {
        QVector r = zero();
        for (std::size_t i = 0; i < d_; ++i) {
            if (a[i] == 0) continue;
            for (std::size_t j = 0; j < d_; ++j) {
                if (b[j] == 0) continue;
                Rational f = a[i] * b[j];
                for (std::size_t k = 0; k < d_; ++k) r[k] += f * mult_[i][j][k];
            }
        }
        return r;
    }
    // Column j: coordinates of a * b_j.
    QMatrix mult_matrix(const QVector& a) const {
        QMatrix M(d_, QVector(d_, Rational(0)));
        for (std::size_t j = 0; j < d_; ++j) {
            QVector c = mul(a, basis(j));
            for (std::size_t i = 0; i < d_; ++i) M[i][j] = c[i];
        }
        return M;
    }
    Rational trace(const QVector& a) const {
        Rational t = 0;
        for (std::size_t i = 0; i < d_; ++i) {
            if (a[i] == 0) continue;
            Rational ti = 0;
            for (std::size_t k = 0; k < d_; ++k) ti += mult_[i][k][k];
            t += a[i] * ti;
        }
        return t;
    }
    // Characteristic polynomial of multiplication by a, low degree first, monic.
    QVector char_poly(const QVector& a) const {
        BigInt D = 1;
        for (const auto& x : a) D = boost::multiprecision::lcm(D, denominator(x));
        std::vector<BigInt> c = int_char_poly(scale(a, Rational(D)));
        // roots of the scaled polynomial are D times the roots
        QVector out(d_ + 1);
        Rational pw = 1;
        for (std::size_t k = d_ + 1; k-- > 0;) {
            out[k] = Rational(c[k]) / pw;
            pw *= Rational(D);
        }
        return out;
    }
    // All roots are real, so every embedding is positive iff the
    // coefficients of the characteristic polynomial strictly alternate.
    bool is_totally_positive(const QVector& a) const {
        BigInt D = 1;
        for (const auto& x : a) D = boost::multiprecision::lcm(D, denominator(x));
        std::vector<BigInt> c = int_char_poly(scale(a, Rational(D)));
        for (std::size_t k = 0; k < d_; ++k) {
            const bool odd = (d_ - k) % 2 == 1;
            if (odd ? c[k] >= 0 : c[k] <= 0) return false;
        }
        return true;
    }
    std::vector<long double> embed(const QVector& a) const {
        std::vector<long double> out(d_, 0);
        for (std::size_t k = 0; k < d_; ++k)
            for (std::size_t i = 0; i < d_; ++i) out[k] += static_cast<long double>(a[i].convert_to<double>()) * emb_[k][i];
        return out;
    }
    std::string str(const QVector& a) const {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < d_; ++i) os << (i ? ", " : "") << to_string(a[i]);
        os << ")";
        return os.str();
    }

    // Cyclotomic model, present for real cyclotomic fields.
    i64 conductor() const { return conductor_; }
    const std::vector<CyclotomicInt>& cyclotomic_basis() const { return cyclo_basis_; }
    QVector from_cyclotomic(const CyclotomicInt& x) const {
        if (cyclo_basis_.empty()) throw InputError("TotallyRealField: no cyclotomic model");
        CyclotomicInt y = x.conductor() == conductor_ ? x : x.embed(conductor_);
        const std::size_t m = y.coeffs().size();
        QMatrix A(m, QVector(d_));
        QVector b(m);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t j = 0; j < d_; ++j) A[r][j] = Rational(cyclo_basis_[j].coeffs()[r]);
            b[r] = Rational(y.coeffs()[r]);
        }
        auto s = solve_rational(A, b);
        if (!s) throw InputError("TotallyRealField: element does not lie in the field");
        return *s;
    }

    void set_cyclotomic_model(i64 n, std::vector<CyclotomicInt> b) {
        conductor_ = n;
        cyclo_basis_ = std::move(b);
    }

private:
    // Faddeev-LeVerrier on the integer multiplication matrix of an element
    // with integral coordinates.
    std::vector<BigInt> int_char_poly(const QVector& a) const {
        std::vector<std::vector<BigInt>> A(d_, std::vector<BigInt>(d_, BigInt(0)));
        for (std::size_t i = 0; i < d_; ++i) {
            if (a[i] == 0) continue;
            BigInt ai = numerator(a[i]);
            for (std::size_t j = 0; j < d_; ++j)
                for (std::size_t k = 0; k < d_; ++k) {
                    if (mult_[i][j][k] == 0) continue;
                    if (denominator(mult_[i][j][k]) != 1) throw InputError("TotallyRealField: multiplication table is not integral");
                    A[k][j] += ai * numerator(mult_[i][j][k]);
                }
        }
        std::vector<BigInt> c(d_ + 1, BigInt(0));
        c[d_] = 1;
        std::vector<std::vector<BigInt>> M(d_, std::vector<BigInt>(d_, BigInt(0)));
        auto mul = [&](const std::vector<std::vector<BigInt>>& X) {
            std::vector<std::vector<BigInt>> R(d_, std::vector<BigInt>(d_, BigInt(0)));
            for (std::size_t i = 0; i < d_; ++i)
                for (std::size_t l = 0; l < d_; ++l) {
                    if (A[i][l] == 0) continue;
                    for (std::size_t j = 0; j < d_; ++j) R[i][j] += A[i][l] * X[l][j];
                }
            return R;
        };
        for (std::size_t k = 1; k <= d_; ++k) {
            M = mul(M);
            for (std::size_t i = 0; i < d_; ++i) M[i][i] += c[d_ - k + 1];
            auto AM = mul(M);
            BigInt tr = 0;
            for (std::size_t i = 0; i < d_; ++i) tr += AM[i][i];
            c[d_ - k] = -tr / static_cast<long>(k);
        }
        return c;
    }

    std::string name_;
    std::size_t d_ = 0;
    std::vector<std::vector<QVector>> mult_;
    std::vector<std::vector<long double>> emb_;
    std::vector<std::vector<BigInt>> Q_;
    mutable std::shared_ptr<QVector> one_;
    i64 conductor_ = 0;
    std::vector<CyclotomicInt> cyclo_basis_;
};

using FieldPtr = std::shared_ptr<TotallyRealField>;

// Q(zeta_n)^+ with basis 1, theta_1, ..., theta_(d-1), theta_k = zeta^k + zeta^-k.
inline FieldPtr real_cyclotomic_field(i64 n) {
    if (n < 3) throw InputError("real_cyclotomic_field: conductor must be at least 3");
    const auto d = static_cast<std::size_t>(euler_phi(n) / 2);
    std::vector<CyclotomicInt> b{CyclotomicInt::one(n)};
    for (std::size_t k = 1; k < d; ++k) b.push_back(CyclotomicInt::zeta_power(n, static_cast<i64>(k)) + CyclotomicInt::zeta_power(n, -static_cast<i64>(k)));
    std::vector<std::vector<long double>> emb;
    for (i64 s = 1; s < n; ++s) {
        if (std::gcd(s, n) != 1 || 2 * s > n) continue;
        std::vector<long double> e{1.0L};
        for (std::size_t k = 1; k < d; ++k) e.push_back(2.0L * std::cos(2.0L * std::numbers::pi_v<long double> * static_cast<long double>(s * static_cast<i64>(k)) / static_cast<long double>(n)));
        emb.push_back(std::move(e));
    }
    // multiplication table through the cyclotomic model
    auto coords = [&](const CyclotomicInt& x) {
        const std::size_t m = x.coeffs().size();
        QMatrix A(m, QVector(d));
        QVector rhs(m);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t j = 0; j < d; ++j) A[r][j] = Rational(b[j].coeffs()[r]);
            rhs[r] = Rational(x.coeffs()[r]);
        }
        auto s = solve_rational(A, rhs);
        if (!s) throw Error("real_cyclotomic_field: product left the real subfield");
        return *s;
    };
    std::vector<std::vector<QVector>> mult(d, std::vector<QVector>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) mult[i][j] = mult[j][i] = coords(b[i] * b[j]);
    auto F = std::make_shared<TotallyRealField>("Q(zeta_" + std::to_string(n) + ")^+", std::move(mult), std::move(emb));
    F->set_cyclotomic_model(n, std::move(b));
    return F;
}

// Degree-p extension F/F' with the inclusion and the relative trace as
// rational matrices on basis coordinates.
struct FieldTower {
    FieldPtr F, Fsub;
    i64 p = 3;
    QMatrix inclusion;  // d x d'
    QMatrix reltrace;   // d' x d
    QMatrix sigma;      // generator of Gal(F/F') when known, d x d

    QVector include(const QVector& b) const { return mat_vec(inclusion, b); }
    QVector apply_sigma(const QVector& b) const {
        if (sigma.empty()) throw InputError("FieldTower: no Galois generator recorded");
        return mat_vec(sigma, b);
    }
    QVector relative_trace(const QVector& b) const { return mat_vec(reltrace, b); }

    void validate() const {
        const std::size_t d = F->degree(), e = Fsub->degree();
        if (d != static_cast<std::size_t>(p) * e) throw InputError("FieldTower: degree is not p times the subfield degree");
        QMatrix TI = mat_mul(reltrace, inclusion);
        for (std::size_t i = 0; i < e; ++i)
            for (std::size_t j = 0; j < e; ++j)
                if (TI[i][j] != (i == j ? Rational(p) : Rational(0))) throw InputError("FieldTower: Tr o inclusion is not p");
        for (std::size_t j = 0; j < d; ++j)
            if (Fsub->trace(relative_trace(F->basis(j))) != F->trace(F->basis(j))) throw InputError("FieldTower: traces do not compose");
        for (std::size_t i = 0; i < e; ++i)
            for (std::size_t j = 0; j < e; ++j)
                if (include(Fsub->mul(Fsub->basis(i), Fsub->basis(j))) != F->mul(include(Fsub->basis(i)), include(Fsub->basis(j))))
                    throw InputError("FieldTower: inclusion is not multiplicative");
    }
};

// Q(zeta_(p^(r+1)))^+ over Q(zeta_(p^r))^+, r >= 1.
inline FieldTower real_cyclotomic_tower(i64 p, int r) {
    if (r < 1) throw InputError("real_cyclotomic_tower: r must be at least 1");
    const i64 m = ipow(p, r), n = m * p;
    FieldTower t;
    t.p = p;
    t.F = real_cyclotomic_field(n);
    t.Fsub = real_cyclotomic_field(m);
    const std::size_t d = t.F->degree(), e = t.Fsub->degree();
    t.inclusion.assign(d, QVector(e));
    for (std::size_t j = 0; j < e; ++j) {
        QVector c = t.F->from_cyclotomic(t.Fsub->cyclotomic_basis()[j]);
        for (std::size_t i = 0; i < d; ++i) t.inclusion[i][j] = c[i];
    }
    t.reltrace.assign(e, QVector(d));
    for (std::size_t j = 0; j < d; ++j) {
        const CyclotomicInt& b = t.F->cyclotomic_basis()[j];
        CyclotomicInt s(n);
        for (i64 k = 0; k < p; ++k) s = s + b.galois(1 + k * m);
        QVector c = t.Fsub->from_cyclotomic(s.descend(m));
        for (std::size_t i = 0; i < e; ++i) t.reltrace[i][j] = c[i];
    }
    t.sigma.assign(d, QVector(d));
    for (std::size_t j = 0; j < d; ++j) {
        QVector c = t.F->from_cyclotomic(t.F->cyclotomic_basis()[j].galois(1 + m));
        for (std::size_t i = 0; i < d; ++i) t.sigma[i][j] = c[i];
    }
    t.validate();
    return t;
}

// Z-lattice in F given by basis columns in field coordinates.
struct FieldLattice {
    QMatrix basis;  // d x d

    static FieldLattice integers(std::size_t d) {
        FieldLattice L;
        L.basis.assign(d, QVector(d, Rational(0)));
        for (std::size_t i = 0; i < d; ++i) L.basis[i][i] = 1;
        return L;
    }
    QVector point(const Coords& c) const {
        QVector v(basis.size(), Rational(0));
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j < c.size(); ++j) v[i] += basis[i][j] * Rational(c[j]);
        return v;
    }
    std::optional<Coords> coords(const QVector& v) const {
        auto s = solve_rational(basis, v);
        if (!s) return std::nullopt;
        Coords c;
        for (const auto& x : *s) {
            if (denominator(x) != 1) return std::nullopt;
            c.push_back(numerator(x));
        }
        return c;
    }
    friend bool operator==(const FieldLattice& a, const FieldLattice& b) { return a.basis == b.basis; }
};

namespace detail {

// LLL reduction (delta = 3/4) of a positive definite Gram matrix; returns
// an integer unimodular W with W^T G W reduced.
inline std::vector<std::vector<BigInt>> lll_gram(QMatrix G) {
    const std::size_t n = G.size();
    std::vector<std::vector<BigInt>> W(n, std::vector<BigInt>(n, BigInt(0)));
    for (std::size_t i = 0; i < n; ++i) W[i][i] = 1;
    if (n < 2) return W;
    QMatrix mu(n, QVector(n, Rational(0)));
    QVector B(n);
    auto gso = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                Rational s = G[i][j];
                for (std::size_t l = 0; l < j; ++l) s -= mu[j][l] * mu[i][l] * B[l];
                mu[i][j] = s / B[j];
            }
            B[i] = G[i][i];
            for (std::size_t l = 0; l < i; ++l) B[i] -= mu[i][l] * mu[i][l] * B[l];
            if (B[i] <= 0) throw InputError("enumerate_quadratic: form is not positive definite");
        }
    };
    // column k -= q * column j
    auto sub = [&](std::size_t k, std::size_t j, const BigInt& q) {
        const Rational qr(q);
        for (std::size_t i = 0; i < n; ++i) W[i][k] -= q * W[i][j];
        const Rational gkk = G[k][k] - 2 * qr * G[k][j] + qr * qr * G[j][j];
        for (std::size_t i = 0; i < n; ++i)
            if (i != k) G[k][i] = G[i][k] = G[i][k] - qr * G[i][j];
        G[k][k] = gkk;
    };
    auto swap = [&](std::size_t k) {
        for (std::size_t i = 0; i < n; ++i) std::swap(W[i][k], W[i][k - 1]);
        std::swap(G[k], G[k - 1]);
        for (auto& row : G) std::swap(row[k], row[k - 1]);
    };
    gso();
    std::size_t k = 1;
    while (k < n) {
        for (std::size_t j = k; j-- > 0;) {
            const BigInt q = floor(mu[k][j] + Rational(1, 2));
            if (q != 0) {
                sub(k, j, q);
                gso();
            }
        }
        if (B[k] >= (Rational(3, 4) - mu[k][k - 1] * mu[k][k - 1]) * B[k - 1]) {
            ++k;
        } else {
            swap(k);
            gso();
            k = std::max<std::size_t>(k - 1, 1);
        }
    }
    return W;
}

// Affine forms h[0] + sum h[j+1] z[j]; leaves where one is clearly negative
// are dropped before the exact check.
using HalfSpaces = std::vector<std::vector<long double>>;

inline bool clearly_negative(const std::vector<long double>& h, const std::vector<long double>& z) {
    long double v = h[0], scale = std::fabs(h[0]);
    for (std::size_t j = 0; j < z.size(); ++j) {
        v += h[j + 1] * z[j];
        scale += std::fabs(h[j + 1] * z[j]);
    }
    return v < -1e-5L * (1.0L + scale);
}

// All z in Z^k with z^T A z + 2 b.z + c <= bound, A positive definite,
// by exact Fincke-Pohst enumeration around the real minimum.
inline std::vector<Coords> enumerate_quadratic_raw(const QMatrix& A, const QVector& b, const Rational& c, const Rational& bound,
                                                   const HalfSpaces& keep = {}) {
    const std::size_t k = A.size();
    std::vector<Coords> out;
    if (k == 0) {
        if (c <= bound) out.push_back({});
        return out;
    }
    auto Ainv = inverse_rational(A);
    if (!Ainv) throw InputError("enumerate_quadratic: form is degenerate");
    QVector center = mat_vec(*Ainv, b);
    for (auto& x : center) x = -x;
    Rational qmin = c;
    for (std::size_t i = 0; i < k; ++i) qmin += b[i] * center[i];
    if (qmin > bound) return out;
    // A = U^T D U with U unit upper triangular
    QVector D(k);
    QMatrix U(k, QVector(k, Rational(0)));
    for (std::size_t i = 0; i < k; ++i) {
        U[i][i] = 1;
        D[i] = A[i][i];
        for (std::size_t l = 0; l < i; ++l) D[i] -= D[l] * U[l][i] * U[l][i];
        if (D[i] <= 0) throw InputError("enumerate_quadratic: form is not positive definite");
        for (std::size_t j = i + 1; j < k; ++j) {
            Rational s = A[i][j];
            for (std::size_t l = 0; l < i; ++l) s -= D[l] * U[l][i] * U[l][j];
            U[i][j] = s / D[i];
        }
    }
    // Pruning runs in long double with a slack far above rounding error;
    // each surviving leaf is checked exactly.
    std::vector<long double> Df(k), cf(k);
    std::vector<std::vector<long double>> Uf(k, std::vector<long double>(k));
    for (std::size_t i = 0; i < k; ++i) {
        Df[i] = static_cast<long double>(D[i].convert_to<double>());
        cf[i] = static_cast<long double>(center[i].convert_to<double>());
        for (std::size_t j = 0; j < k; ++j) Uf[i][j] = static_cast<long double>(U[i][j].convert_to<double>());
    }
    const long double total = static_cast<long double>((bound - qmin).convert_to<double>());
    const long double slack = 1e-6L * (1.0L + std::fabs(total));
    auto exact_value = [&](const Coords& zz) {
        Rational v = c;
        for (std::size_t i = 0; i < k; ++i) {
            Rational zi(zz[i]);
            v += 2 * b[i] * zi;
            for (std::size_t j = 0; j < k; ++j) v += A[i][j] * zi * Rational(zz[j]);
        }
        return v;
    };
    Coords z(k);
    std::vector<long double> x(k), zf(k);  // z - center, z
    std::function<void(std::size_t, long double)> rec = [&](std::size_t i1, long double left) {
        const std::size_t i = i1 - 1;
        long double s = -cf[i];
        for (std::size_t j = i + 1; j < k; ++j) s += Uf[i][j] * x[j];
        const long double r = std::sqrt(std::max(0.0L, (left + slack) / Df[i]));
        const auto lo = static_cast<long long>(std::floor(-s - r)) - 1, hi = static_cast<long long>(std::ceil(-s + r)) + 1;
        for (long long zi = lo; zi <= hi; ++zi) {
            const long double y = static_cast<long double>(zi) + s;
            const long double used = Df[i] * y * y;
            if (used > left + slack) continue;
            z[i] = zi;
            zf[i] = static_cast<long double>(zi);
            x[i] = zf[i] - cf[i];
            if (i > 0) {
                rec(i, left - used);
                continue;
            }
            bool drop = false;
            for (const auto& h : keep) drop = drop || clearly_negative(h, zf);
            if (!drop && exact_value(z) <= bound) out.push_back(z);
        }
    };
    rec(k, total);
    return out;
}

// As enumerate_quadratic_raw, on an LLL-reduced basis of Z^k.
inline std::vector<Coords> enumerate_quadratic(const QMatrix& A, const QVector& b, const Rational& c, const Rational& bound,
                                               const HalfSpaces& keep = {}) {
    const std::size_t k = A.size();
    const auto W = lll_gram(A);
    QMatrix Wq(k, QVector(k)), Wt(k, QVector(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) Wt[j][i] = Wq[i][j] = Rational(W[i][j]);
    HalfSpaces keepW;
    for (const auto& h : keep) {
        std::vector<long double> g(k + 1, 0.0L);
        g[0] = h[0];
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < k; ++i) g[j + 1] += h[i + 1] * W[i][j].convert_to<long double>();
        keepW.push_back(std::move(g));
    }
    auto raw = enumerate_quadratic_raw(mat_mul(mat_mul(Wt, A), Wq), mat_vec(Wt, b), c, bound, keepW);
    std::vector<Coords> out;
    out.reserve(raw.size());
    for (const auto& z : raw) {
        Coords y(k, BigInt(0));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) y[i] += W[i][j] * z[j];
        out.push_back(std::move(y));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline Rational dot(const QVector& a, const QVector& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Gram matrix of the trace form on lattice coordinates.
inline QMatrix lattice_gram(const TotallyRealField& F, const FieldLattice& L) {
    const std::size_t d = F.degree();
    QMatrix Q(d, QVector(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) Q[i][j] = Rational(F.trace_form()[i][j]);
    QMatrix Bt(d, QVector(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) Bt[i][j] = L.basis[j][i];
    return mat_mul(mat_mul(Bt, Q), L.basis);
}

}  // namespace detail

namespace detail {

// Lattice coordinates c with M c = target (M rational, e x d) and
// Tr(beta^2) <= S2 for beta = L c, via Smith form and Fincke-Pohst. With
// positive_only, points with a clearly negative embedding are skipped; the
// rest still need an exact positivity check.
inline std::vector<Coords> affine_slice(const TotallyRealField& F, const FieldLattice& L, const QMatrix& M, const QVector& target,
                                        const Rational& S2, bool positive_only = false) {
    const std::size_t d = F.degree(), e = M.size();
    std::vector<Coords> out;
    ZMatrix Mi(e, std::vector<BigInt>(d));
    std::vector<BigInt> ti(e);
    for (std::size_t i = 0; i < e; ++i) {
        BigInt den = denominator(target[i]);
        for (std::size_t j = 0; j < d; ++j) den = boost::multiprecision::lcm(den, denominator(M[i][j]));
        for (std::size_t j = 0; j < d; ++j) Mi[i][j] = numerator(M[i][j] * Rational(den));
        ti[i] = numerator(target[i] * Rational(den));
    }
    SNFResult s = smith_normal_form(Mi);
    std::vector<BigInt> Ut(e, BigInt(0));
    for (std::size_t i = 0; i < e; ++i)
        for (std::size_t j = 0; j < e; ++j) Ut[i] += s.U[i][j] * ti[j];
    std::size_t rank = 0;
    Coords y(d, BigInt(0));
    for (std::size_t i = 0; i < s.diag.size(); ++i) {
        if (s.diag[i] == 0) break;
        if (Ut[i] % s.diag[i] != 0) return out;
        y[i] = Ut[i] / s.diag[i];
        ++rank;
    }
    for (std::size_t i = rank; i < e; ++i)
        if (Ut[i] != 0) return out;
    QVector c0(d, Rational(0));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) c0[i] += Rational(s.V[i][j] * y[j]);
    const std::size_t k = d - rank;
    QMatrix K(d, QVector(k)), Kt(k, QVector(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < k; ++j) Kt[j][i] = K[i][j] = Rational(s.V[i][rank + j]);
    QMatrix Q = lattice_gram(F, L);
    QMatrix A = mat_mul(mat_mul(Kt, Q), K);
    QVector b = mat_vec(Kt, mat_vec(Q, c0));
    Rational c = dot(c0, mat_vec(Q, c0));
    HalfSpaces keep;
    if (positive_only) {
        auto embed_coords = [&](const QVector& cv) { return F.embed(mat_vec(L.basis, cv)); };
        std::vector<std::vector<long double>> cols;
        for (std::size_t j = 0; j < k; ++j) {
            QVector kj(d);
            for (std::size_t i = 0; i < d; ++i) kj[i] = K[i][j];
            cols.push_back(embed_coords(kj));
        }
        const auto base = embed_coords(c0);
        for (std::size_t e2 = 0; e2 < d; ++e2) {
            std::vector<long double> h{base[e2]};
            for (std::size_t j = 0; j < k; ++j) h.push_back(cols[j][e2]);
            keep.push_back(std::move(h));
        }
    }
    for (const auto& z : enumerate_quadratic(A, b, c, S2, keep)) {
        Coords cc(d);
        for (std::size_t i = 0; i < d; ++i) {
            Rational v = c0[i];
            for (std::size_t j = 0; j < k; ++j) v += K[i][j] * Rational(z[j]);
            cc[i] = numerator(v);
        }
        out.push_back(std::move(cc));
    }
    return out;
}

}  // namespace detail

// Lattice points beta >> 0 with 0 < Tr(beta) <= bound, in lattice
// coordinates, one trace value at a time (beta >> 0 gives
// Tr(beta^2) <= Tr(beta)^2).
inline std::vector<Coords> totally_positive_points(const TotallyRealField& F, const FieldLattice& L, const Rational& bound) {
    const std::size_t d = F.degree();
    std::vector<Coords> out;
    QMatrix M(1, QVector(d));
    BigInt num = 0, den = 1;
    for (std::size_t j = 0; j < d; ++j) {
        QVector col(d);
        for (std::size_t i = 0; i < d; ++i) col[i] = L.basis[i][j];
        M[0][j] = F.trace(col);
        den = boost::multiprecision::lcm(den, denominator(M[0][j]));
    }
    for (std::size_t j = 0; j < d; ++j) num = big_gcd(num, numerator(M[0][j] * Rational(den)));
    if (num == 0) throw InputError("totally_positive_points: trace vanishes on the lattice");
    const Rational step = Rational(num) / Rational(den);
    for (Rational t = step; t <= bound; t += step) {
        for (auto& c : detail::affine_slice(F, L, M, {t}, t * t, true))
            if (F.is_totally_positive(L.point(c))) out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// All totally positive lattice points beta of F with Tr_(F/F')(beta) = p beta',
// in lattice coordinates. Empty when beta' is not totally positive.
inline std::vector<Coords> enumerate_trace_fiber(const FieldTower& T, const FieldLattice& L, const QVector& beta_sub) {
    const TotallyRealField& F = *T.F;
    std::vector<Coords> out;
    if (beta_sub.size() != T.Fsub->degree()) throw MismatchError("enumerate_trace_fiber: subfield element has wrong length");
    if (!T.Fsub->is_totally_positive(beta_sub)) return out;
    QVector target = T.Fsub->scale(beta_sub, Rational(T.p));
    // over each embedding of F' the p embeddings above it are positive and
    // sum to p beta', so Tr(beta^2) <= p^2 Tr(beta'^2)
    const Rational S2 = Rational(T.p * T.p) * T.Fsub->trace(T.Fsub->mul(beta_sub, beta_sub));
    for (auto& c : detail::affine_slice(F, L, mat_mul(T.reltrace, L.basis), target, S2, true)) {
        QVector beta = L.point(c);
        if (T.relative_trace(beta) != target) throw Error("enumerate_trace_fiber: solution off the fiber");
        if (F.is_totally_positive(beta)) out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Formal q-expansion truncated at total trace <= trace_bound, coefficients
// in a group ring, support indexed by lattice coordinates.
template <class Ring>
class QExpansion {
public:
    using Coeff = GroupRingElt<Ring>;

    QExpansion(FieldPtr F, FieldLattice L, Rational trace_bound, GroupPtr G, Ring R)
        : F_(std::move(F)), L_(std::move(L)), bound_(std::move(trace_bound)), G_(std::move(G)), R_(std::move(R)) {
        if (L_.basis.size() != F_->degree()) throw InputError("QExpansion: lattice of the wrong rank");
        if (!inverse_rational(L_.basis)) throw InputError("QExpansion: lattice basis is singular");
    }

    const FieldPtr& field() const { return F_; }
    const FieldLattice& lattice() const { return L_; }
    const Rational& trace_bound() const { return bound_; }
    const GroupPtr& group() const { return G_; }
    const Ring& ring() const { return R_; }
    const std::map<Coords, Coeff>& terms() const { return c_; }

    Coeff coeff(const Coords& beta) const {
        auto it = c_.find(beta);
        return it == c_.end() ? Coeff(G_, R_) : it->second;
    }

    // Adds a to the coefficient of q^beta.
    void add_term(const Coords& beta, const Coeff& a) {
        if (beta.size() != F_->degree()) throw InputError("QExpansion: support of the wrong length");
        if (!same_group(a.group(), G_) || a.ring() != R_) throw MismatchError("QExpansion: coefficient in another group ring");
        QVector b = L_.point(beta);
        bool zero = true;
        for (const auto& x : b)
            if (x != 0) zero = false;
        if (!zero) {
            if (!F_->is_totally_positive(b)) throw InputError("QExpansion: support " + F_->str(b) + " is not totally positive");
            if (F_->trace(b) > bound_) throw InputError("QExpansion: support beyond the trace bound");
        }
        if (a.is_zero()) return;
        auto it = c_.find(beta);
        if (it == c_.end()) {
            c_.emplace(beta, a);
            return;
        }
        it->second += a;
        if (it->second.is_zero()) c_.erase(it);
    }

    friend QExpansion operator+(const QExpansion& a, const QExpansion& b) {
        a.compat(b);
        QExpansion r = a;
        for (const auto& [beta, c] : b.c_) r.add_term(beta, c);
        return r;
    }
    friend QExpansion operator-(const QExpansion& a, const QExpansion& b) {
        a.compat(b);
        QExpansion r = a;
        for (const auto& [beta, c] : b.c_) r.add_term(beta, -c);
        return r;
    }
    // lambda * f, coefficientwise
    QExpansion scale(const Coeff& lambda) const {
        if (!same_group(lambda.group(), G_) || lambda.ring() != R_) throw MismatchError("QExpansion: scalar in another group ring");
        QExpansion r(F_, L_, bound_, G_, R_);
        for (const auto& [beta, c] : c_) r.add_term(beta, lambda * c);
        return r;
    }
    friend bool operator==(const QExpansion& a, const QExpansion& b) {
        return a.F_->name() == b.F_->name() && a.L_ == b.L_ && a.bound_ == b.bound_ && same_group(a.G_, b.G_) && a.R_ == b.R_ &&
               a.c_ == b.c_;
    }

    std::string str() const {
        std::ostringstream os;
        os << "q-expansion over " << F_->name() << ", Tr <= " << to_string(bound_) << "\n";
        for (const auto& [beta, c] : c_) {
            os << "  (";
            for (std::size_t i = 0; i < beta.size(); ++i) os << (i ? "," : "") << beta[i];
            os << ") : " << c.str() << "\n";
        }
        return os.str();
    }

private:
    void compat(const QExpansion& o) const {
        if (F_->name() != o.F_->name() || !(L_ == o.L_) || bound_ != o.bound_ || !same_group(G_, o.G_) || R_ != o.R_)
            throw MismatchError("QExpansion: operands on different carriers");
    }

    FieldPtr F_;
    FieldLattice L_;
    Rational bound_;
    GroupPtr G_;
    Ring R_;
    std::map<Coords, Coeff> c_;
};

// a_(beta')(result) = sum over Tr_(F/F')(beta) = p beta' of a_beta(f), computed
// by pushing each support point forward; the constant term is kept.
template <class Ring>
QExpansion<Ring> diagonal_restrict(const QExpansion<Ring>& f, const FieldTower& T, const FieldLattice& Lsub) {
    if (f.field()->name() != T.F->name()) throw MismatchError("diagonal_restrict: expansion over another field");
    const TotallyRealField& E = *T.Fsub;
    Rational bound = f.trace_bound() / T.p;
    bool integral = true;
    for (std::size_t j = 0; j < E.degree(); ++j) {
        QVector col(E.degree());
        for (std::size_t i = 0; i < E.degree(); ++i) col[i] = Lsub.basis[i][j];
        if (denominator(E.trace(col)) != 1) integral = false;
    }
    if (integral) bound = Rational(floor(bound));
    QExpansion<Ring> r(T.Fsub, Lsub, bound, f.group(), f.ring());
    const Rational inv_p = Rational(1) / T.p;
    for (const auto& [beta, a] : f.terms()) {
        QVector img = E.scale(T.relative_trace(f.lattice().point(beta)), inv_p);
        auto c = Lsub.coords(img);
        if (!c) throw InputError("diagonal_restrict: Tr(beta)/p is not in the subfield lattice");
        r.add_term(*c, a);
    }
    return r;
}

}  // namespace tcong
