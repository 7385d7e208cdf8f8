#pragma once

// Group rings R[A] of finite abelian groups A over R = Z/p^N or
// (Z/p^N)[zeta_n]: trace maps, trace ideals, transfer and norm maps,
// character integration, and the trace-ideal criteria.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tcong/abgroups.hpp"
#include "tcong/cyclotomic.hpp"
#include "tcong/howell.hpp"
#include "tcong/residue.hpp"

namespace tcong {

namespace detail {

inline i64 div_p(const ZmodPN& R, i64 v) { return v / R.p(); }
inline std::vector<i64> div_p(const CycloModPN& R, const std::vector<i64>& v) {
    std::vector<i64> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i] / R.p();
    return r;
}
inline std::size_t coord_count(const ZmodPN&) { return 1; }
inline std::size_t coord_count(const CycloModPN& R) { return R.dim(); }
inline i64 coord(const ZmodPN&, i64 v, std::size_t) { return v; }
inline i64 coord(const CycloModPN&, const std::vector<i64>& v, std::size_t j) { return v[j]; }
inline const ZmodPN& base_ring(const ZmodPN& R) { return R; }
inline const ZmodPN& base_ring(const CycloModPN& R) { return R.base(); }

}  // namespace detail

template <class Ring>
class GroupRingElt {
public:
    using V = typename Ring::value_type;

    GroupRingElt() : G_(make_group({})) {}
    GroupRingElt(GroupPtr G, Ring R) : G_(std::move(G)), R_(std::move(R)) {}

    static GroupRingElt element(const GroupPtr& G, const Ring& R, i64 g) {
        GroupRingElt x(G, R);
        x.add_term(g, R.one());
        return x;
    }
    static GroupRingElt scalar(const GroupPtr& G, const Ring& R, const V& c) {
        GroupRingElt x(G, R);
        x.add_term(0, c);
        return x;
    }
    static GroupRingElt one(const GroupPtr& G, const Ring& R) { return scalar(G, R, R.one()); }

    const GroupPtr& group() const { return G_; }
    const Ring& ring() const { return R_; }
    const std::map<i64, V>& terms() const { return c_; }
    bool is_zero() const { return c_.empty(); }

    V coeff(i64 g) const {
        auto it = c_.find(g);
        return it == c_.end() ? R_.zero() : it->second;
    }

    void add_term(i64 g, const V& a) {
        if (g < 0 || g >= G_->order()) throw InputError("GroupRingElt: element index out of range");
        if (R_.is_zero(a)) return;
        auto it = c_.find(g);
        if (it == c_.end()) {
            c_.emplace(g, a);
            return;
        }
        it->second = R_.add(it->second, a);
        if (R_.is_zero(it->second)) c_.erase(it);
    }

    GroupRingElt& operator+=(const GroupRingElt& o) {
        compat(o);
        for (const auto& [g, a] : o.c_) add_term(g, a);
        return *this;
    }
    GroupRingElt& operator-=(const GroupRingElt& o) {
        compat(o);
        for (const auto& [g, a] : o.c_) add_term(g, R_.neg(a));
        return *this;
    }
    friend GroupRingElt operator+(GroupRingElt a, const GroupRingElt& b) { return a += b; }
    friend GroupRingElt operator-(GroupRingElt a, const GroupRingElt& b) { return a -= b; }
    GroupRingElt operator-() const {
        GroupRingElt r(G_, R_);
        for (const auto& [g, a] : c_) r.c_.emplace(g, R_.neg(a));
        return r;
    }
    friend GroupRingElt operator*(const GroupRingElt& a, const GroupRingElt& b) {
        a.compat(b);
        std::vector<std::optional<V>> acc(static_cast<std::size_t>(a.G_->order()));
        for (const auto& [g, x] : a.c_) {
            for (const auto& [h, y] : b.c_) {
                auto& slot = acc[static_cast<std::size_t>(a.G_->add(g, h))];
                V xy = a.R_.mul(x, y);
                slot = slot ? a.R_.add(*slot, xy) : xy;
            }
        }
        GroupRingElt r(a.G_, a.R_);
        for (std::size_t k = 0; k < acc.size(); ++k) {
            if (acc[k] && !a.R_.is_zero(*acc[k])) r.c_.emplace(static_cast<i64>(k), *acc[k]);
        }
        return r;
    }
    GroupRingElt scale(const V& s) const {
        GroupRingElt r(G_, R_);
        for (const auto& [g, a] : c_) r.add_term(g, R_.mul(a, s));
        return r;
    }
    GroupRingElt scale_int(i64 k) const { return scale(R_.from_int(k)); }

    // Translate the support by a group element.
    GroupRingElt shift(i64 h) const {
        GroupRingElt r(G_, R_);
        for (const auto& [g, a] : c_) r.c_.emplace(G_->add(g, h), a);
        return r;
    }

    V augmentation() const {
        V s = R_.zero();
        for (const auto& [g, a] : c_) s = R_.add(s, a);
        return s;
    }

    friend bool operator==(const GroupRingElt& a, const GroupRingElt& b) {
        if (!same_group(a.G_, b.G_) || a.R_ != b.R_ || a.c_.size() != b.c_.size()) return false;
        auto it = b.c_.begin();
        for (const auto& [g, x] : a.c_) {
            if (it->first != g || !a.R_.eq(x, it->second)) return false;
            ++it;
        }
        return true;
    }
    friend bool operator!=(const GroupRingElt& a, const GroupRingElt& b) { return !(a == b); }

    // Every coefficient divisible by p.
    bool in_p_lambda() const {
        for (const auto& [g, a] : c_)
            if (!R_.divisible_by_p(a)) return false;
        return true;
    }

    // Dense coordinate vector (one entry per group element) of the j-th
    // coefficient coordinate.
    std::vector<i64> dense(std::size_t j = 0) const {
        std::vector<i64> v(static_cast<std::size_t>(G_->order()), 0);
        for (const auto& [g, a] : c_) v[static_cast<std::size_t>(g)] = detail::coord(R_, a, j);
        return v;
    }

    std::string str() const {
        if (c_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [g, a] : c_) {
            if (!first) os << " + ";
            first = false;
            std::string s = R_.str(a);
            bool compound = s.find(' ') != std::string::npos;
            os << (compound ? "(" : "") << s << (compound ? ")" : "") << "*[" << G_->element_str(g) << "]";
        }
        return os.str();
    }

private:
    void compat(const GroupRingElt& o) const {
        if (!same_group(G_, o.G_)) throw MismatchError("group ring: group mismatch (" + G_->str() + " vs " + o.G_->str() + ")");
        if (R_ != o.R_) throw MismatchError("group ring: coefficient ring mismatch (" + R_.name() + " vs " + o.R_.name() + ")");
    }

    GroupPtr G_;
    Ring R_;
    std::map<i64, V> c_;
};

using LambdaElt = GroupRingElt<ZmodPN>;
using LambdaCyclo = GroupRingElt<CycloModPN>;

template <class Ring>
GroupRingElt<Ring> gr_add(const GroupRingElt<Ring>& a, const GroupRingElt<Ring>& b) {
    return a + b;
}
template <class Ring>
GroupRingElt<Ring> gr_mul(const GroupRingElt<Ring>& a, const GroupRingElt<Ring>& b) {
    return a * b;
}

// sigma^k applied to the support.
template <class Ring>
GroupRingElt<Ring> act_on(const GroupRingElt<Ring>& x, const CyclicAction& act, i64 k = 1) {
    if (!same_group(x.group(), act.group)) throw MismatchError("act_on: action defined on another group");
    GroupRingElt<Ring> r(x.group(), x.ring());
    for (const auto& [g, a] : x.terms()) r.add_term(act.apply(g, k), a);
    return r;
}

template <class Ring>
GroupRingElt<Ring> trace_map(const GroupRingElt<Ring>& x, const CyclicAction& act) {
    GroupRingElt<Ring> r(x.group(), x.ring());
    for (i64 k = 0; k < act.p; ++k) r += act_on(x, act, k);
    return r;
}

// Image of x under the map induced by a group homomorphism; an optional
// automorphism of the coefficients (e.g. a Frobenius twist) is applied
// to every coefficient.
template <class Ring>
GroupRingElt<Ring> ver_pushforward(const GroupRingElt<Ring>& x, const GroupHom& v,
                                   const std::function<typename Ring::value_type(const typename Ring::value_type&)>& coeff_map = {}) {
    if (!same_group(x.group(), v.source())) throw MismatchError("ver_pushforward: source group mismatch");
    GroupRingElt<Ring> r(v.target(), x.ring());
    for (const auto& [g, a] : x.terms()) r.add_term(v.apply(g), coeff_map ? coeff_map(a) : a);
    return r;
}

// Explicit promotion of Z/p^N coefficients to (Z/p^N)[zeta_n].
inline LambdaCyclo promote_coefficients(const LambdaElt& x, const CycloModPN& R) {
    if (R.base() != x.ring()) throw MismatchError("promote_coefficients: precision mismatch");
    LambdaCyclo r(x.group(), R);
    for (const auto& [g, a] : x.terms()) r.add_term(g, R.from_int(a));
    return r;
}

inline LambdaCyclo promote_coefficients(const LambdaCyclo& x, const CycloModPN& R) {
    LambdaCyclo r(x.group(), R);
    for (const auto& [g, a] : x.terms()) r.add_term(g, R.promote(a, x.ring()));
    return r;
}

// Ideal T of Z/p^N[A] generated by the image of the trace map.
class TraceIdealBasis {
public:
    TraceIdealBasis() = default;
    TraceIdealBasis(CyclicAction act, ZmodPN R) : act_(std::move(act)), R_(std::move(R)) {
        const GroupPtr& G = act_.group;
        const auto n = static_cast<std::size_t>(G->order());
        ideal_ = HowellBasis(R_.p(), R_.N(), n);
        image_ = HowellBasis(R_.p(), R_.N(), n);
        // traces of orbit representatives, closed under generator shifts
        std::vector<std::vector<i64>> work;
        std::vector<bool> seen(n, false);
        for (i64 g = 0; g < G->order(); ++g) {
            if (seen[static_cast<std::size_t>(g)]) continue;
            for (i64 k = 0; k < act_.p; ++k) seen[static_cast<std::size_t>(act_.apply(g, k))] = true;
            auto tg = trace_map(LambdaElt::element(G, R_, g), act_).dense();
            image_.insert(tg);
            work.push_back(std::move(tg));
        }
        while (!work.empty()) {
            auto v = std::move(work.back());
            work.pop_back();
            if (ideal_.contains(v)) continue;
            ideal_.insert(v);
            for (std::size_t j = 0; j < G->rank(); ++j) {
                i64 gen = G->generator(j);
                std::vector<i64> shifted(n, 0);
                for (std::size_t x = 0; x < n; ++x) shifted[static_cast<std::size_t>(G->add(static_cast<i64>(x), gen))] = v[x];
                work.push_back(std::move(shifted));
            }
        }
        canonical_ = ideal_.canonical();
        image_is_ideal_ = true;
        for (const auto& row : canonical_.rows) {
            if (!image_.contains(row)) {
                image_is_ideal_ = false;
                break;
            }
        }
    }

    const CyclicAction& action() const { return act_; }
    const GroupPtr& group() const { return act_.group; }
    const ZmodPN& ring() const { return R_; }
    const ModPNMatrix& basis() const { return canonical_; }
    // Whether the additive span of trace(Lambda) already equals the ideal.
    bool image_is_ideal() const { return image_is_ideal_; }

    bool contains_dense(const std::vector<i64>& v) const { return ideal_.contains(v); }
    std::vector<i64> residual_dense(const std::vector<i64>& v) const { return ideal_.reduce(v); }

    template <class Ring>
    bool contains(const GroupRingElt<Ring>& x) const {
        if (!same_group(x.group(), act_.group)) throw MismatchError("trace ideal: group mismatch");
        if (detail::base_ring(x.ring()) != R_) throw MismatchError("trace ideal: precision mismatch");
        for (std::size_t j = 0; j < detail::coord_count(x.ring()); ++j) {
            if (!ideal_.contains(x.dense(j))) return false;
        }
        return true;
    }

private:
    CyclicAction act_;
    ZmodPN R_;
    HowellBasis ideal_, image_;
    ModPNMatrix canonical_;
    bool image_is_ideal_ = true;
};

inline TraceIdealBasis trace_ideal(const CyclicAction& act, const ZmodPN& R) { return TraceIdealBasis(act, R); }

template <class Ring>
bool trace_ideal_contains(const GroupRingElt<Ring>& x, const TraceIdealBasis& T) {
    return T.contains(x);
}

// lambda = trace(preimage) + p * fixed_multiplier, with p * m = trace(1) * m.
template <class Ring>
struct TraceWitness {
    GroupRingElt<Ring> preimage;
    GroupRingElt<Ring> fixed_multiplier;
};

template <class Ring>
struct Criterion4418Result {
    bool verdict = false;
    std::vector<std::string> violations;
    std::optional<TraceWitness<Ring>> witness;
};

// Decides the sufficient condition for sum_gamma lambda_gamma to lie in T:
// equivariance on free orbits and divisibility by p on fixed points.
template <class Ring>
Criterion4418Result<Ring> criterion_4418(const FiniteGSet& W, const std::vector<GroupRingElt<Ring>>& lambda,
                                         const CyclicAction& act, const GroupPtr& G, const Ring& R) {
    if (lambda.size() != W.size()) throw InputError("criterion_4418: one element per index required");
    OrbitDecomposition od = orbit_decomposition(W, act.p);
    Criterion4418Result<Ring> res;
    GroupRingElt<Ring> pre(G, R), mu(G, R);
    for (const auto& orb : od.orbits) {
        for (std::size_t i = 0; i < orb.size(); ++i) {
            std::size_t a = orb[i], b = orb[(i + 1) % orb.size()];
            if (act_on(lambda[a], act) != lambda[b]) {
                res.violations.push_back("equivariance fails: sigma(" + W.labels[a] + ") != " + W.labels[b]);
            }
        }
        pre += lambda[orb[0]];
    }
    for (auto f : od.fixed) {
        if (!lambda[f].in_p_lambda()) {
            res.violations.push_back("fixed index " + W.labels[f] + " not in p*Lambda");
            continue;
        }
        for (const auto& [g, a] : lambda[f].terms()) mu.add_term(g, detail::div_p(R, a));
    }
    res.verdict = res.violations.empty();
    if (res.verdict) {
        GroupRingElt<Ring> total(G, R);
        for (const auto& l : lambda) total += l;
        GroupRingElt<Ring> rebuilt = trace_map(pre, act) + mu.scale_int(act.p);
        if (rebuilt != total) throw Error("criterion_4418: witness does not reproduce the sum");
        res.witness = TraceWitness<Ring>{pre, mu};
    }
    return res;
}

template <class Ring>
Criterion4418Result<Ring> criterion_4418(const FiniteGSet& W, const std::vector<GroupRingElt<Ring>>& lambda,
                                         const CyclicAction& act) {
    if (lambda.empty()) throw InputError("criterion_4418: empty family needs explicit group and ring");
    return criterion_4418(W, lambda, act, lambda.front().group(), lambda.front().ring());
}

template <class Ring>
struct ScalarTerm {
    typename Ring::value_type a;
    i64 z = 0;
};

struct Criterion4424Result {
    bool verdict = false;
    std::vector<std::string> violations;
};

// Scalar form: terms a_gamma * z_gamma with group elements z_gamma.
template <class Ring>
Criterion4424Result criterion_4424(const FiniteGSet& W, const std::vector<ScalarTerm<Ring>>& terms,
                                   const CyclicAction& act, const Ring& R, const TraceIdealBasis* T = nullptr) {
    if (terms.size() != W.size()) throw InputError("criterion_4424: one term per index required");
    OrbitDecomposition od = orbit_decomposition(W, act.p);
    Criterion4424Result res;
    for (std::size_t g = 0; g < W.size(); ++g) {
        if (act.apply(terms[g].z) != terms[W.perm[g]].z)
            res.violations.push_back("z not equivariant at " + W.labels[g]);
    }
    for (const auto& orb : od.orbits) {
        for (auto g : orb) {
            if (!R.eq(terms[g].a, terms[W.perm[g]].a)) res.violations.push_back("coefficient not constant on orbit at " + W.labels[g]);
        }
    }
    for (auto f : od.fixed) {
        if (!R.divisible_by_p(terms[f].a)) res.violations.push_back("fixed index " + W.labels[f] + " has coefficient prime to p");
    }
    res.verdict = res.violations.empty();
    if (res.verdict && T) {
        GroupRingElt<Ring> sum(act.group, R);
        for (const auto& t : terms) sum.add_term(t.z, t.a);
        if (!T->contains(sum)) throw Error("criterion_4424: accepted sum is not in the trace ideal");
    }
    return res;
}

// Units of Z/p^N[A]: invertibility of the multiplication matrix mod p.
inline bool is_unit(const LambdaElt& u) {
    const GroupPtr& G = u.group();
    const auto n = static_cast<std::size_t>(G->order());
    const i64 p = u.ring().p();
    std::vector<std::vector<i64>> M(n, std::vector<i64>(n, 0));
    for (const auto& [g, a] : u.terms()) {
        for (std::size_t x = 0; x < n; ++x) {
            auto y = static_cast<std::size_t>(G->add(g, static_cast<i64>(x)));
            M[y][x] = (M[y][x] + a) % p;
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && M[piv][c] == 0) ++piv;
        if (piv == n) return false;
        std::swap(M[piv], M[c]);
        i64 inv = invmod(M[c][c], p);
        for (std::size_t i = c + 1; i < n; ++i) {
            if (!M[i][c]) continue;
            i64 f = mulmod(M[i][c], inv, p);
            for (std::size_t j = c; j < n; ++j) M[i][j] = mod(M[i][j] - mulmod(f, M[c][j], p), p);
        }
    }
    return true;
}

// Determinant of a square matrix over a commutative ring, division free.
template <class T>
T det_division_free(const std::vector<std::vector<T>>& M, const T& one, const T& zero) {
    const std::size_t k = M.size();
    if (k > 20) throw InputError("det_division_free: dimension too large");
    std::vector<std::optional<T>> dp(std::size_t{1} << k);
    dp[0] = one;
    for (std::size_t mask = 0; mask < dp.size(); ++mask) {
        if (!dp[mask]) continue;
        const auto row = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (row == k) continue;
        for (std::size_t c = 0; c < k; ++c) {
            if (mask & (std::size_t{1} << c)) continue;
            const auto above = static_cast<std::size_t>(__builtin_popcountll(mask >> (c + 1)));
            T term = *dp[mask] * M[row][c];
            if (above % 2) term = -term;
            auto& slot = dp[mask | (std::size_t{1} << c)];
            slot = slot ? *slot + term : term;
        }
    }
    return dp.back() ? *dp.back() : zero;
}

// Norm from Z/p^N[G] to Z/p^N[H] for a subgroup H: determinant of
// multiplication by u on the free module with basis the coset
// representatives.
inline LambdaElt norm_map(const LambdaElt& u, const Subgroup& H) {
    const GroupPtr& G = u.group();
    if (!same_group(H.inclusion.target(), G)) throw MismatchError("norm_map: subgroup of another group");
    if (!H.inclusion.is_injective()) throw InputError("norm_map: inclusion is not injective");
    if (!is_unit(u)) throw NotUnitError("norm_map: element is not a unit");
    const auto n = static_cast<std::size_t>(G->order());
    std::vector<i64> to_h(n, -1);
    for (i64 h = 0; h < H.group->order(); ++h) to_h[static_cast<std::size_t>(H.inclusion.apply(h))] = h;
    std::vector<i64> reps;
    std::vector<std::size_t> coset_of(n, 0);
    std::vector<bool> seen(n, false);
    for (i64 x = 0; x < G->order(); ++x) {
        if (seen[static_cast<std::size_t>(x)]) continue;
        for (i64 h = 0; h < H.group->order(); ++h) {
            auto y = static_cast<std::size_t>(G->add(x, H.inclusion.apply(h)));
            seen[y] = true;
            coset_of[y] = reps.size();
        }
        reps.push_back(x);
    }
    const std::size_t k = reps.size();
    const ZmodPN& R = u.ring();
    std::vector<std::vector<LambdaElt>> M(k, std::vector<LambdaElt>(k, LambdaElt(H.group, R)));
    for (std::size_t j = 0; j < k; ++j) {
        for (const auto& [g, a] : u.terms()) {
            i64 y = G->add(g, reps[j]);
            std::size_t i = coset_of[static_cast<std::size_t>(y)];
            i64 h = to_h[static_cast<std::size_t>(G->sub(y, reps[i]))];
            M[i][j].add_term(h, a);
        }
    }
    return det_division_free(M, LambdaElt::one(H.group, R), LambdaElt(H.group, R));
}

// Character of a finite abelian group with values zeta_n^(e_i) on the
// generators, optionally twisted by kappa^w where kappa takes unit values
// mod p^N on the generators.
struct CharacterData {
    GroupPtr group;
    i64 conductor = 1;
    std::vector<i64> exponents;
    struct Twist {
        i64 weight = 0;
        std::vector<i64> kappa;
    };
    std::optional<Twist> twist;

    CharacterData() = default;
    CharacterData(GroupPtr G, i64 n, std::vector<i64> e, std::optional<Twist> tw = std::nullopt)
        : group(std::move(G)), conductor(n), exponents(std::move(e)), twist(std::move(tw)) {
        if (exponents.size() != group->rank()) throw InputError("CharacterData: one exponent per generator");
        for (std::size_t i = 0; i < exponents.size(); ++i) {
            exponents[i] = mod(exponents[i], conductor);
            if (static_cast<i64>(static_cast<i128>(exponents[i]) * group->orders()[i] % conductor) != 0)
                throw InputError("CharacterData: value order does not divide generator order");
        }
    }

    static CharacterData trivial(const GroupPtr& G) { return CharacterData(G, 1, std::vector<i64>(G->rank(), 0)); }

    i64 exponent_at(i64 g) const {
        auto c = group->decode(g);
        i128 s = 0;
        for (std::size_t i = 0; i < c.size(); ++i) s += static_cast<i128>(exponents[i]) * c[i];
        return mod(static_cast<i64>(s % conductor), conductor);
    }

    // Validates the twist against the coefficient precision.
    void check_twist(const ZmodPN& R) const {
        if (!twist) return;
        if (twist->kappa.size() != group->rank()) throw InputError("CharacterData: one kappa value per generator");
        for (std::size_t i = 0; i < twist->kappa.size(); ++i) {
            i64 k = R.from_int(twist->kappa[i]);
            if (!R.is_unit(k)) throw InputError("CharacterData: kappa value is not a unit");
            if (powmod(k, static_cast<std::uint64_t>(group->orders()[i]), R.modulus()) != R.one())
                throw InputError("CharacterData: kappa is not a character of the group");
        }
    }

    i64 twist_at(i64 g, const ZmodPN& R) const {
        if (!twist) return R.one();
        auto c = group->decode(g);
        i64 r = R.one();
        for (std::size_t i = 0; i < c.size(); ++i) {
            i64 k = R.from_int(twist->kappa[i]);
            i64 e = mod(static_cast<i64>(static_cast<i128>(twist->weight) * c[i] % group->orders()[i]), group->orders()[i]);
            r = R.mul(r, powmod(k, static_cast<std::uint64_t>(e), R.modulus()));
        }
        return r;
    }

    // Composition with a homomorphism into this character's group.
    CharacterData pullback(const GroupHom& f) const {
        if (!same_group(f.target(), group)) throw MismatchError("CharacterData::pullback: target mismatch");
        std::vector<i64> e;
        for (std::size_t j = 0; j < f.source()->rank(); ++j) e.push_back(exponent_at(f.apply(f.source()->generator(j))));
        std::optional<Twist> tw;
        if (twist) throw InputError("CharacterData::pullback: twisted characters are not pulled back");
        return CharacterData(f.source(), conductor, e, tw);
    }

    // Exact order of the character (order of its values).
    i64 order() const {
        i64 o = 1;
        for (auto e : exponents) o = std::lcm(o, conductor / std::gcd(conductor, e));
        return o;
    }
};

struct CycloValue {
    CycloModPN ring;
    std::vector<i64> value;

    bool is_rational() const { return ring.is_rational(value); }
    bool divisible_by_p() const { return ring.divisible_by_p(value); }
    i64 constant() const { return value[0]; }
    std::string str() const { return ring.str(value); }
    friend bool operator==(const CycloValue& a, const CycloValue& b) { return a.ring == b.ring && a.value == b.value; }
};

inline CycloValue integrate_character(const LambdaElt& x, const CharacterData& chi) {
    if (!same_group(x.group(), chi.group)) throw MismatchError("integrate_character: character on another group");
    chi.check_twist(x.ring());
    CycloModPN R(x.ring(), chi.conductor);
    std::vector<i64> s = R.zero();
    for (const auto& [g, a] : x.terms()) {
        i64 c = x.ring().mul(a, chi.twist_at(g, x.ring()));
        s = R.add(s, R.scale(R.zeta(chi.exponent_at(g)), c));
    }
    return {R, s};
}

inline CycloValue integrate_character(const LambdaCyclo& x, const CharacterData& chi) {
    if (!same_group(x.group(), chi.group)) throw MismatchError("integrate_character: character on another group");
    const ZmodPN& B = x.ring().base();
    chi.check_twist(B);
    CycloModPN R(B, std::lcm(chi.conductor, x.ring().conductor()));
    const i64 s_chi = R.conductor() / chi.conductor;
    std::vector<i64> s = R.zero();
    for (const auto& [g, a] : x.terms()) {
        auto term = R.mul(R.promote(a, x.ring()), R.zeta(s_chi * chi.exponent_at(g)));
        s = R.add(s, R.scale(term, chi.twist_at(g, B)));
    }
    return {R, s};
}

// Twist coefficients by chi, then push the support forward along proj.
inline LambdaCyclo pushforward_measure(const LambdaElt& x, const GroupHom& proj, const CharacterData& chi) {
    if (!same_group(x.group(), proj.source()) || !same_group(x.group(), chi.group))
        throw MismatchError("pushforward_measure: group mismatch");
    if (!proj.is_surjective()) throw InputError("pushforward_measure: projection is not surjective");
    chi.check_twist(x.ring());
    CycloModPN R(x.ring(), chi.conductor);
    LambdaCyclo r(proj.target(), R);
    for (const auto& [g, a] : x.terms()) {
        i64 c = x.ring().mul(a, chi.twist_at(g, x.ring()));
        r.add_term(proj.apply(g), R.scale(R.zeta(chi.exponent_at(g)), c));
    }
    return r;
}

}  // namespace tcong
