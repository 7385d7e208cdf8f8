#pragma once

// Row spans over the chain ring Z/p^N: Howell normal form and membership.

#include <sstream>
#include <string>
#include <vector>

#include "tcong/arith.hpp"

namespace tcong {

struct ModPNMatrix {
    i64 p = 3;
    int N = 1;
    i64 modulus = 3;
    std::size_t cols = 0;
    std::vector<std::vector<i64>> rows;

    ModPNMatrix() = default;
    ModPNMatrix(i64 p_, int N_, std::size_t cols_) : p(p_), N(N_), modulus(ipow(p_, N_)), cols(cols_) {}

    std::size_t row_count() const { return rows.size(); }
    void add_row(std::vector<i64> r) {
        if (r.size() != cols) throw MismatchError("ModPNMatrix: row length");
        for (auto& x : r) x = mod(x, modulus);
        rows.push_back(std::move(r));
    }
    friend bool operator==(const ModPNMatrix& a, const ModPNMatrix& b) {
        return a.modulus == b.modulus && a.cols == b.cols && a.rows == b.rows;
    }
    std::string str() const {
        std::ostringstream os;
        for (const auto& r : rows) {
            os << "[";
            for (std::size_t j = 0; j < r.size(); ++j) os << (j ? " " : "") << r[j];
            os << "]\n";
        }
        return os.str();
    }
};

// Incrementally maintained Howell basis. Each stored row has a pivot p^k
// in its leading column; for every row its annihilated multiple
// p^(N-k) * row lies in the span of rows with later pivots, which makes
// reduction a complete membership test.
class HowellBasis {
public:
    HowellBasis() = default;
    HowellBasis(i64 p, int N, std::size_t cols)
        : p_(p), N_(N), m_(ipow(p, N)), cols_(cols), slot_(cols, -1) {}

    std::size_t cols() const { return cols_; }
    i64 modulus() const { return m_; }
    std::size_t rank() const { return rows_.size(); }

    void insert(std::vector<i64> v) {
        if (v.size() != cols_) throw MismatchError("HowellBasis: vector length");
        for (auto& x : v) x = mod(x, m_);
        std::vector<std::vector<i64>> work{std::move(v)};
        while (!work.empty()) {
            std::vector<i64> w = std::move(work.back());
            work.pop_back();
            insert_one(std::move(w), work);
        }
    }

    // Reduces v against the basis; the result is zero iff v is in the span.
    std::vector<i64> reduce(std::vector<i64> v) const {
        for (auto& x : v) x = mod(x, m_);
        for (std::size_t c = 0; c < cols_; ++c) {
            if (v[c] == 0) continue;
            int s = slot_[c];
            if (s < 0) continue;
            const auto& row = rows_[static_cast<std::size_t>(s)];
            i64 piv = row[c];
            if (v[c] % piv != 0) continue;
            i64 t = v[c] / piv;
            for (std::size_t j = c; j < cols_; ++j) {
                if (row[j]) v[j] = mod(v[j] - mulmod(t, row[j], m_), m_);
            }
        }
        return v;
    }

    bool contains(const std::vector<i64>& v) const {
        for (i64 x : reduce(v))
            if (x) return false;
        return true;
    }

    // Canonical form: rows sorted by pivot column, pivots p^k, entries
    // above later pivots reduced into [0, pivot).
    ModPNMatrix canonical() const {
        std::vector<std::vector<i64>> rs;
        for (std::size_t c = 0; c < cols_; ++c) {
            if (slot_[c] >= 0) rs.push_back(rows_[static_cast<std::size_t>(slot_[c])]);
        }
        for (std::size_t i = rs.size(); i-- > 0;) {
            std::size_t ci = lead_col(rs[i]);
            for (std::size_t k = 0; k < i; ++k) {
                i64 piv = rs[i][ci];
                i64 t = rs[k][ci] / piv;
                if (!t) continue;
                for (std::size_t j = ci; j < cols_; ++j) rs[k][j] = mod(rs[k][j] - mulmod(t, rs[i][j], m_), m_);
            }
        }
        ModPNMatrix out(p_, N_, cols_);
        for (auto& r : rs) out.add_row(r);
        return out;
    }

private:
    static std::size_t lead_col(const std::vector<i64>& r) {
        for (std::size_t j = 0; j < r.size(); ++j)
            if (r[j]) return j;
        return r.size();
    }

    // Unit part u of a = p^k u, returned with k.
    std::pair<i64, int> split(i64 a) const {
        int k = 0;
        while (a % p_ == 0) {
            a /= p_;
            ++k;
        }
        return {a, k};
    }

    void normalize(std::vector<i64>& v, std::size_t c) const {
        auto [u, k] = split(v[c]);
        (void)k;
        i64 inv = invmod(u, m_);
        for (std::size_t j = c; j < cols_; ++j) v[j] = mulmod(v[j], inv, m_);
    }

    std::vector<i64> annihilated(const std::vector<i64>& v, std::size_t c) const {
        auto [u, k] = split(v[c]);
        (void)u;
        i64 f = ipow(p_, N_ - k);
        std::vector<i64> w(cols_);
        for (std::size_t j = 0; j < cols_; ++j) w[j] = mulmod(v[j], f, m_);
        return w;
    }

    void insert_one(std::vector<i64> v, std::vector<std::vector<i64>>& work) {
        for (std::size_t c = 0; c < cols_; ++c) {
            if (v[c] == 0) continue;
            int s = slot_[c];
            if (s < 0) {
                normalize(v, c);
                work.push_back(annihilated(v, c));
                slot_[c] = static_cast<int>(rows_.size());
                rows_.push_back(std::move(v));
                return;
            }
            auto& row = rows_[static_cast<std::size_t>(s)];
            i64 piv = row[c];
            if (v[c] % piv == 0) {
                i64 t = v[c] / piv;
                for (std::size_t j = c; j < cols_; ++j) {
                    if (row[j]) v[j] = mod(v[j] - mulmod(t, row[j], m_), m_);
                }
                continue;
            }
            // v has the smaller valuation here: it takes the slot and the
            // old row is pushed back into the queue.
            normalize(v, c);
            std::vector<i64> old = std::move(row);
            work.push_back(annihilated(v, c));
            row = std::move(v);
            i64 t = old[c] / row[c];
            for (std::size_t j = c; j < cols_; ++j) old[j] = mod(old[j] - mulmod(t, row[j], m_), m_);
            work.push_back(std::move(old));
            return;
        }
    }

    i64 p_ = 3;
    int N_ = 1;
    i64 m_ = 3;
    std::size_t cols_ = 0;
    std::vector<int> slot_;
    std::vector<std::vector<i64>> rows_;
};

inline ModPNMatrix howell_basis(const ModPNMatrix& M) {
    HowellBasis h(M.p, M.N, M.cols);
    for (const auto& r : M.rows) h.insert(r);
    return h.canonical();
}

inline bool howell_contains(const ModPNMatrix& basis, const std::vector<i64>& v) {
    HowellBasis h(basis.p, basis.N, basis.cols);
    for (const auto& r : basis.rows) h.insert(r);
    return h.contains(v);
}

}  // namespace tcong
