#pragma once

// Finite abelian groups given by cyclic generators, homomorphisms between
// them, order-p actions and finite G-sets.

#include <algorithm>
#include <functional>
#include <optional>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tcong/arith.hpp"
#include "tcong/snf.hpp"

namespace tcong {

// Product of cyclic groups Z/o_1 x ... x Z/o_k. Elements are encoded as
// mixed-radix indices, first coordinate least significant; index 0 is the
// identity.
class FiniteAbelianGroup {
public:
    FiniteAbelianGroup() = default;
    explicit FiniteAbelianGroup(std::vector<i64> orders, std::vector<std::string> labels = {})
        : orders_(std::move(orders)), labels_(std::move(labels)) {
        if (labels_.empty()) {
            for (std::size_t i = 0; i < orders_.size(); ++i) labels_.push_back("g" + std::to_string(i + 1));
        }
        if (labels_.size() != orders_.size()) throw InputError("FiniteAbelianGroup: label count mismatch");
        std::set<std::string> seen;
        order_ = 1;
        for (std::size_t i = 0; i < orders_.size(); ++i) {
            if (orders_[i] <= 1) throw InputError("FiniteAbelianGroup: generator orders must exceed 1");
            if (!seen.insert(labels_[i]).second) throw InputError("FiniteAbelianGroup: duplicate label " + labels_[i]);
            radix_.push_back(order_);
            if (order_ > (i64{1} << 40) / orders_[i]) throw InputError("FiniteAbelianGroup: group too large");
            order_ *= orders_[i];
        }
    }

    std::size_t rank() const { return orders_.size(); }
    const std::vector<i64>& orders() const { return orders_; }
    const std::vector<std::string>& labels() const { return labels_; }
    i64 order() const { return order_; }

    i64 encode(const std::vector<i64>& c) const {
        if (c.size() != orders_.size()) throw MismatchError("encode: coordinate count");
        i64 idx = 0;
        for (std::size_t i = 0; i < c.size(); ++i) idx += mod(c[i], orders_[i]) * radix_[i];
        return idx;
    }
    i64 encode_big(const std::vector<BigInt>& c) const {
        std::vector<i64> r(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) r[i] = mod(c[i], orders_[i]);
        return encode(r);
    }
    std::vector<i64> decode(i64 idx) const {
        check(idx);
        std::vector<i64> c(orders_.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i] = idx % orders_[i];
            idx /= orders_[i];
        }
        return c;
    }
    i64 add(i64 a, i64 b) const {
        check(a);
        check(b);
        i64 r = 0;
        for (std::size_t i = 0; i < orders_.size(); ++i) {
            i64 s = (a % orders_[i]) + (b % orders_[i]);
            if (s >= orders_[i]) s -= orders_[i];
            r += s * radix_[i];
            a /= orders_[i];
            b /= orders_[i];
        }
        return r;
    }
    i64 neg(i64 a) const {
        auto c = decode(a);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = mod(-c[i], orders_[i]);
        return encode(c);
    }
    i64 sub(i64 a, i64 b) const { return add(a, neg(b)); }
    i64 scalar(i64 k, i64 a) const {
        auto c = decode(a);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = mod(static_cast<i64>(static_cast<i128>(k % orders_[i]) * c[i] % orders_[i]), orders_[i]);
        return encode(c);
    }
    i64 element_order(i64 a) const {
        auto c = decode(a);
        i64 o = 1;
        for (std::size_t i = 0; i < c.size(); ++i) o = std::lcm(o, orders_[i] / std::gcd(orders_[i], c[i]));
        return o;
    }
    i64 generator(std::size_t i) const {
        std::vector<i64> c(orders_.size(), 0);
        c.at(i) = 1;
        return encode(c);
    }

    // Invariant factors d_1 | d_2 | ... of the group.
    std::vector<i64> invariant_factors() const {
        ZMatrix D(orders_.size(), std::vector<BigInt>(orders_.size(), BigInt(0)));
        for (std::size_t i = 0; i < orders_.size(); ++i) D[i][i] = orders_[i];
        auto s = smith_normal_form(D);
        std::vector<i64> out;
        for (const auto& d : s.diag)
            if (d != 1) out.push_back(static_cast<i64>(d));
        return out;
    }
    bool isomorphic_to(const FiniteAbelianGroup& o) const { return invariant_factors() == o.invariant_factors(); }

    std::string element_str(i64 idx) const {
        auto c = decode(idx);
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
        os << ")";
        return os.str();
    }
    std::string str() const {
        if (orders_.empty()) return "1";
        std::ostringstream os;
        for (std::size_t i = 0; i < orders_.size(); ++i) os << (i ? " x " : "") << "Z/" << orders_[i];
        return os.str();
    }

    friend bool operator==(const FiniteAbelianGroup& a, const FiniteAbelianGroup& b) {
        return a.orders_ == b.orders_ && a.labels_ == b.labels_;
    }
    friend bool operator!=(const FiniteAbelianGroup& a, const FiniteAbelianGroup& b) { return !(a == b); }

    void check(i64 idx) const {
        if (idx < 0 || idx >= order_) throw InputError("group element index out of range");
    }

private:
    std::vector<i64> orders_;
    std::vector<std::string> labels_;
    std::vector<i64> radix_;
    i64 order_ = 1;
};

using GroupPtr = std::shared_ptr<const FiniteAbelianGroup>;

inline GroupPtr make_group(std::vector<i64> orders, std::vector<std::string> labels = {}) {
    return std::make_shared<const FiniteAbelianGroup>(std::move(orders), std::move(labels));
}

inline bool same_group(const GroupPtr& a, const GroupPtr& b) { return a == b || *a == *b; }

// Homomorphism given by the images of the source generators (columns).
class GroupHom {
public:
    GroupHom() = default;
    GroupHom(GroupPtr src, GroupPtr tgt, std::vector<std::vector<i64>> matrix)
        : src_(std::move(src)), tgt_(std::move(tgt)), M_(std::move(matrix)) {
        if (M_.size() != tgt_->rank()) throw InputError("GroupHom: matrix must have one row per target generator");
        for (auto& row : M_) {
            if (row.size() != src_->rank()) throw InputError("GroupHom: matrix must have one column per source generator");
        }
        for (std::size_t i = 0; i < M_.size(); ++i)
            for (std::size_t j = 0; j < src_->rank(); ++j) M_[i][j] = mod(M_[i][j], tgt_->orders()[i]);
        for (std::size_t j = 0; j < src_->rank(); ++j) {
            const i64 o = src_->orders()[j];
            for (std::size_t i = 0; i < M_.size(); ++i) {
                if (static_cast<i64>(static_cast<i128>(o) * M_[i][j] % tgt_->orders()[i]) != 0) {
                    throw InputError("GroupHom: image of generator " + src_->labels()[j] + " does not respect its order");
                }
            }
        }
        table_.resize(static_cast<std::size_t>(src_->order()));
        for (i64 x = 0; x < src_->order(); ++x) table_[static_cast<std::size_t>(x)] = apply_coords(src_->decode(x));
    }

    static GroupHom identity(const GroupPtr& G) {
        std::vector<std::vector<i64>> M(G->rank(), std::vector<i64>(G->rank(), 0));
        for (std::size_t i = 0; i < G->rank(); ++i) M[i][i] = 1;
        return GroupHom(G, G, M);
    }
    static GroupHom zero(const GroupPtr& src, const GroupPtr& tgt) {
        return GroupHom(src, tgt, std::vector<std::vector<i64>>(tgt->rank(), std::vector<i64>(src->rank(), 0)));
    }
    // Homomorphism defined by generator images given as element indices.
    static GroupHom from_images(const GroupPtr& src, const GroupPtr& tgt, const std::vector<i64>& images) {
        if (images.size() != src->rank()) throw InputError("GroupHom::from_images: one image per generator");
        std::vector<std::vector<i64>> M(tgt->rank(), std::vector<i64>(src->rank(), 0));
        for (std::size_t j = 0; j < images.size(); ++j) {
            auto c = tgt->decode(images[j]);
            for (std::size_t i = 0; i < c.size(); ++i) M[i][j] = c[i];
        }
        return GroupHom(src, tgt, M);
    }

    const GroupPtr& source() const { return src_; }
    const GroupPtr& target() const { return tgt_; }
    const std::vector<std::vector<i64>>& matrix() const { return M_; }

    i64 apply(i64 x) const { return table_.at(static_cast<std::size_t>(x)); }
    i64 apply_coords(const std::vector<i64>& c) const {
        std::vector<i64> out(tgt_->rank(), 0);
        for (std::size_t i = 0; i < out.size(); ++i) {
            i128 s = 0;
            for (std::size_t j = 0; j < c.size(); ++j) s += static_cast<i128>(M_[i][j]) * c[j];
            out[i] = mod(static_cast<i64>(s % tgt_->orders()[i]), tgt_->orders()[i]);
        }
        return tgt_->encode(out);
    }

    friend bool operator==(const GroupHom& a, const GroupHom& b) {
        return same_group(a.src_, b.src_) && same_group(a.tgt_, b.tgt_) && a.M_ == b.M_;
    }
    friend bool operator!=(const GroupHom& a, const GroupHom& b) { return !(a == b); }

    bool is_injective() const {
        for (i64 x = 1; x < src_->order(); ++x)
            if (apply(x) == 0) return false;
        return true;
    }
    bool is_surjective() const {
        std::vector<bool> hit(static_cast<std::size_t>(tgt_->order()), false);
        i64 count = 0;
        for (i64 x = 0; x < src_->order(); ++x) {
            auto y = static_cast<std::size_t>(apply(x));
            if (!hit[y]) {
                hit[y] = true;
                ++count;
            }
        }
        return count == tgt_->order();
    }

private:
    GroupPtr src_ = make_group({});
    GroupPtr tgt_ = make_group({});
    std::vector<std::vector<i64>> M_;
    std::vector<i64> table_{0};
};

// g o f
inline GroupHom compose_hom(const GroupHom& g, const GroupHom& f) {
    if (!same_group(f.target(), g.source())) throw MismatchError("compose_hom: target of f is not the source of g");
    std::vector<i64> images;
    for (std::size_t j = 0; j < f.source()->rank(); ++j) images.push_back(g.apply(f.apply(f.source()->generator(j))));
    return GroupHom::from_images(f.source(), g.target(), images);
}

inline GroupHom add_homs(const GroupHom& a, const GroupHom& b) {
    if (!same_group(a.source(), b.source()) || !same_group(a.target(), b.target())) throw MismatchError("add_homs: shapes");
    std::vector<i64> images;
    for (std::size_t j = 0; j < a.source()->rank(); ++j) {
        i64 g = a.source()->generator(j);
        images.push_back(a.target()->add(a.apply(g), b.apply(g)));
    }
    return GroupHom::from_images(a.source(), a.target(), images);
}

inline GroupHom neg_hom(const GroupHom& a) {
    std::vector<i64> images;
    for (std::size_t j = 0; j < a.source()->rank(); ++j) images.push_back(a.target()->neg(a.apply(a.source()->generator(j))));
    return GroupHom::from_images(a.source(), a.target(), images);
}

inline GroupHom hom_power(const GroupHom& s, i64 k) {
    if (!same_group(s.source(), s.target())) throw MismatchError("hom_power: not an endomorphism");
    GroupHom r = GroupHom::identity(s.source());
    for (i64 i = 0; i < k; ++i) r = compose_hom(s, r);
    return r;
}

// A subgroup presented as its own product of cyclic groups together with
// the inclusion into the ambient group.
struct Subgroup {
    GroupPtr group;
    GroupHom inclusion;
    std::vector<i64> elements() const {
        std::vector<i64> out;
        for (i64 x = 0; x < group->order(); ++x) out.push_back(inclusion.apply(x));
        std::sort(out.begin(), out.end());
        return out;
    }
};

// Subgroup of G generated by the given elements, in Smith form.
inline Subgroup subgroup_generated(const GroupPtr& G, const std::vector<i64>& gens) {
    const std::size_t k = gens.size(), t = G->rank();
    if (k == 0) {
        auto S = make_group({});
        return {S, GroupHom::zero(S, G)};
    }
    // relation lattice {x in Z^k : sum x_j g_j = 0}
    ZMatrix A(t, std::vector<BigInt>(k + t, BigInt(0)));
    std::vector<std::vector<i64>> coords;
    for (auto g : gens) coords.push_back(G->decode(g));
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = 0; j < k; ++j) A[i][j] = coords[j][i];
        A[i][k + i] = G->orders()[i];
    }
    ZMatrix K = integer_kernel(A, k + t);
    ZMatrix R(k, std::vector<BigInt>(K.empty() ? 0 : K[0].size(), BigInt(0)));
    for (std::size_t i = 0; i < k; ++i) R[i] = K[i];
    SNFResult s = smith_normal_form(R);
    ZMatrix Uinv = unimodular_inverse(s.U);
    std::vector<i64> orders;
    std::vector<i64> images;
    for (std::size_t i = 0; i < k; ++i) {
        BigInt d = i < s.diag.size() ? s.diag[i] : BigInt(0);
        if (d == 0) throw Error("subgroup_generated: infinite relation lattice");
        if (d == 1) continue;
        orders.push_back(static_cast<i64>(d));
        // image of the i-th new generator: sum_j Uinv[j][i] g_j
        i64 h = 0;
        for (std::size_t j = 0; j < k; ++j) h = G->add(h, G->scalar(mod(Uinv[j][i], G->order()), gens[j]));
        images.push_back(h);
    }
    auto S = make_group(orders);
    return {S, GroupHom::from_images(S, G, images)};
}

inline Subgroup image(const GroupHom& f) {
    std::vector<i64> gens;
    for (std::size_t j = 0; j < f.source()->rank(); ++j) gens.push_back(f.apply(f.source()->generator(j)));
    return subgroup_generated(f.target(), gens);
}

inline Subgroup kernel(const GroupHom& f) {
    const auto& S = f.source();
    const auto& T = f.target();
    const std::size_t s = S->rank(), t = T->rank();
    if (s == 0) return subgroup_generated(S, {});
    ZMatrix A(t, std::vector<BigInt>(s + t, BigInt(0)));
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = 0; j < s; ++j) A[i][j] = f.matrix()[i][j];
        A[i][s + i] = T->orders()[i];
    }
    ZMatrix K = integer_kernel(A, s + t);
    std::vector<i64> gens;
    for (std::size_t c = 0; c < (K.empty() ? 0 : K[0].size()); ++c) {
        std::vector<BigInt> x(s);
        for (std::size_t i = 0; i < s; ++i) x[i] = K[i][c];
        i64 g = S->encode_big(x);
        if (g != 0) gens.push_back(g);
    }
    return subgroup_generated(S, gens);
}

// Action of Z/p on a finite abelian group through an automorphism sigma.
struct CyclicAction {
    GroupPtr group;
    GroupHom sigma;
    i64 p = 3;
    std::vector<std::vector<i64>> powers;  // powers[k][x] = sigma^k(x)

    CyclicAction() = default;
    CyclicAction(GroupHom s, i64 p_) : group(s.source()), sigma(std::move(s)), p(p_) {
        if (!same_group(sigma.source(), sigma.target())) throw InputError("CyclicAction: sigma must be an endomorphism");
        if (!sigma.is_injective()) throw InputError("CyclicAction: sigma is not invertible");
        powers.assign(static_cast<std::size_t>(p), std::vector<i64>(static_cast<std::size_t>(group->order())));
        for (i64 x = 0; x < group->order(); ++x) {
            i64 y = x;
            for (i64 k = 0; k < p; ++k) {
                powers[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)] = y;
                y = sigma.apply(y);
            }
            if (y != x) throw InputError("CyclicAction: sigma^p is not the identity");
        }
    }
    static CyclicAction trivial(const GroupPtr& G, i64 p) { return CyclicAction(GroupHom::identity(G), p); }

    i64 apply(i64 x, i64 k = 1) const {
        return powers[static_cast<std::size_t>(mod(k, p))][static_cast<std::size_t>(x)];
    }
    bool is_fixed(i64 x) const { return apply(x) == x; }
};

inline Subgroup fixed_subgroup(const CyclicAction& act) {
    return kernel(add_homs(act.sigma, neg_hom(GroupHom::identity(act.group))));
}

// Finite set with an action of the generator of Z/p.
struct FiniteGSet {
    std::vector<std::string> labels;
    std::vector<std::size_t> perm;

    FiniteGSet() = default;
    FiniteGSet(std::vector<std::string> l, std::vector<std::size_t> pm) : labels(std::move(l)), perm(std::move(pm)) {
        if (labels.size() != perm.size()) throw InputError("FiniteGSet: label/permutation size mismatch");
        std::vector<bool> hit(perm.size(), false);
        for (auto x : perm) {
            if (x >= perm.size() || hit[x]) throw InputError("FiniteGSet: action is not a permutation");
            hit[x] = true;
        }
    }
    std::size_t size() const { return perm.size(); }
    std::size_t act(std::size_t i, i64 k = 1) const {
        for (i64 s = 0; s < k; ++s) i = perm[i];
        return i;
    }
    std::optional<std::size_t> find(const std::string& label) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return i;
        return std::nullopt;
    }
};

struct OrbitDecomposition {
    std::vector<std::size_t> fixed;
    std::vector<std::vector<std::size_t>> orbits;  // each listed as g, sigma g, sigma^2 g, ...
};

inline OrbitDecomposition orbit_decomposition(const FiniteGSet& W, i64 p) {
    OrbitDecomposition out;
    std::vector<bool> seen(W.size(), false);
    for (std::size_t i = 0; i < W.size(); ++i) {
        if (seen[i]) continue;
        std::vector<std::size_t> orb{i};
        seen[i] = true;
        std::size_t j = W.perm[i];
        while (j != i) {
            if (seen[j]) throw InputError("orbit_decomposition: inconsistent permutation");
            seen[j] = true;
            orb.push_back(j);
            j = W.perm[j];
        }
        if (orb.size() == 1) out.fixed.push_back(i);
        else if (static_cast<i64>(orb.size()) == p) out.orbits.push_back(std::move(orb));
        else
            throw InputError("orbit_decomposition: orbit of size " + std::to_string(orb.size()) +
                             " (action order does not divide p)");
    }
    return out;
}

// Abstract finite abelian group from a composition table, identified with
// a product of cyclic groups. to_index[e] is the index of element e.
struct TabulatedGroup {
    GroupPtr group;
    std::vector<i64> to_index;
    std::vector<std::size_t> from_index;
};

inline TabulatedGroup structure_from_table(std::size_t n, const std::function<std::size_t(std::size_t, std::size_t)>& op,
                                           std::size_t identity) {
    // Greedy generators with triangular relations, then Smith form.
    std::vector<std::size_t> gens;
    std::map<std::size_t, std::vector<BigInt>> coords;  // element -> coordinates in gens
    coords[identity] = {};
    ZMatrix rel;  // rows: relations in generator coordinates
    auto power = [&](std::size_t g, i64 m) {
        std::size_t r = identity;
        for (i64 i = 0; i < m; ++i) r = op(r, g);
        return r;
    };
    while (coords.size() < n) {
        // element outside the current subgroup with the largest order
        std::size_t best = n;
        i64 best_ord = 0;
        for (std::size_t e = 0; e < n; ++e) {
            if (coords.count(e)) continue;
            i64 o = 1;
            std::size_t x = e;
            while (x != identity) {
                x = op(x, e);
                ++o;
                if (o > static_cast<i64>(n)) throw InputError("structure_from_table: not a group");
            }
            if (o > best_ord) {
                best_ord = o;
                best = e;
            }
        }
        const std::size_t k = gens.size();
        i64 m = 1;
        std::size_t y = best;
        while (!coords.count(y)) {
            y = op(y, best);
            ++m;
        }
        std::vector<BigInt> r(k + 1, BigInt(0));
        for (std::size_t j = 0; j < k; ++j) r[j] = coords[y][j];
        r[k] = -m;
        for (auto& row : rel) row.push_back(0);
        rel.push_back(r);
        gens.push_back(best);
        std::map<std::size_t, std::vector<BigInt>> next;
        for (auto& [h, c] : coords) {
            std::size_t z = h;
            for (i64 t = 0; t < m; ++t) {
                std::vector<BigInt> cc = c;
                cc.resize(k + 1, BigInt(0));
                cc[k] = t;
                next[z] = cc;
                z = op(z, best);
            }
        }
        coords = std::move(next);
        (void)power;
    }
    TabulatedGroup out;
    const std::size_t k = gens.size();
    if (k == 0) {
        out.group = make_group({});
        out.to_index.assign(n, 0);
        out.from_index = {identity};
        return out;
    }
    // rel rows are relations; as columns of a k x k matrix
    ZMatrix R(k, std::vector<BigInt>(k, BigInt(0)));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) R[j][i] = rel[i][j];
    SNFResult s = smith_normal_form(R);
    std::vector<i64> orders;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < k; ++i) {
        if (s.diag[i] != 1) {
            orders.push_back(static_cast<i64>(abs(s.diag[i])));
            keep.push_back(i);
        }
    }
    out.group = make_group(orders);
    out.to_index.assign(n, 0);
    out.from_index.assign(static_cast<std::size_t>(out.group->order()), n);
    for (auto& [e, c] : coords) {
        std::vector<i64> y(keep.size());
        for (std::size_t a = 0; a < keep.size(); ++a) {
            BigInt v = 0;
            for (std::size_t j = 0; j < k; ++j) v += s.U[keep[a]][j] * c[j];
            y[a] = mod(v, orders[a]);
        }
        i64 idx = out.group->encode(y);
        out.to_index[e] = idx;
        out.from_index[static_cast<std::size_t>(idx)] = e;
    }
    return out;
}

}  // namespace tcong
