#pragma once

// Towers of abelianized open subgroups G_r^ab, the patching conditions
// MS1-MS3 on families (x_r), the phi_0/phi_1 compatibility test and the
// character values L(rho_r, n), L(sigma_r, n) with their congruences.

#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tcong/abgroups.hpp"
#include "tcong/iwalg.hpp"

namespace tcong {

struct TowerLevel {
    int r = 0;
    GroupPtr group;
    CyclicAction action;                // G_r/G_(r-1) acting on G_r^ab; trivial on the first level
    std::vector<GroupHom> gamma;        // generators of the Gamma-image at this level
    std::optional<GroupHom> ver;        // transfer from the previous level
    std::optional<Subgroup> norm;       // this level as an index-p subgroup of the previous one
    std::optional<CharacterData> eta;   // eta_r, order exactly p^r
    std::vector<i64> kappa;             // kappa-hat on the generators, empty if not tabled
};

// Immutable after construction; every level invariant is checked there.
class TowerData {
public:
    TowerData() = default;
    TowerData(ZmodPN R, std::vector<TowerLevel> levels) : R_(std::move(R)), levels_(std::move(levels)) {
        if (levels_.empty()) throw InputError("TowerData: no levels");
        const i64 p = R_.p();
        for (std::size_t i = 0; i < levels_.size(); ++i) {
            const TowerLevel& L = levels_[i];
            const std::string at = "TowerData: level " + std::to_string(L.r) + ": ";
            if (i > 0 && L.r != levels_[i - 1].r + 1) throw InputError(at + "levels must be consecutive");
            if (!L.group) throw InputError(at + "missing group");
            if (!same_group(L.action.group, L.group) || L.action.p != p) throw InputError(at + "action on another group");
            for (const auto& g : L.gamma) {
                if (!same_group(g.source(), L.group) || !same_group(g.target(), L.group) || !g.is_injective())
                    throw InputError(at + "Gamma generator is not an automorphism");
            }
            if (i > 0) {
                if (!L.ver) throw InputError(at + "missing transfer");
                if (!same_group(L.ver->source(), levels_[i - 1].group) || !same_group(L.ver->target(), L.group))
                    throw InputError(at + "transfer has wrong source or target");
                const GroupPtr& S = L.ver->source();
                for (std::size_t j = 0; j < S->rank(); ++j) {
                    if (!L.action.is_fixed(L.ver->apply(S->generator(j))))
                        throw InputError(at + "transfer image is not fixed by the level action");
                }
            }
            if (L.norm) {
                if (i == 0) throw InputError(at + "norm data on the first level");
                if (!same_group(L.norm->group, L.group) || !same_group(L.norm->inclusion.target(), levels_[i - 1].group))
                    throw InputError(at + "norm subgroup has wrong groups");
                if (!L.norm->inclusion.is_injective() || levels_[i - 1].group->order() != p * L.group->order())
                    throw InputError(at + "norm subgroup is not of index p");
            }
            if (L.eta) {
                if (!same_group(L.eta->group, L.group)) throw InputError(at + "eta on another group");
                if (L.eta->order() != ipow(p, L.r)) throw InputError(at + "eta must have order exactly p^r");
            }
            if (!L.kappa.empty()) {
                CharacterData probe(L.group, 1, std::vector<i64>(L.group->rank(), 0), CharacterData::Twist{1, L.kappa});
                probe.check_twist(R_);
            }
        }
        for (const auto& L : levels_) T_.emplace_back(L.action, R_);
    }

    const ZmodPN& ring() const { return R_; }
    i64 p() const { return R_.p(); }
    std::size_t size() const { return levels_.size(); }
    int first_level() const { return levels_.front().r; }
    int last_level() const { return levels_.back().r; }
    const std::vector<TowerLevel>& levels() const { return levels_; }

    std::size_t index_of(int r) const {
        if (r < first_level() || r > last_level()) throw InputError("TowerData: no level " + std::to_string(r));
        return static_cast<std::size_t>(r - first_level());
    }
    const TowerLevel& at(int r) const { return levels_[index_of(r)]; }
    const TraceIdealBasis& trace_ideal_at(int r) const { return T_[index_of(r)]; }

    bool has_norms() const {
        for (std::size_t i = 1; i < levels_.size(); ++i)
            if (levels_[i].norm) return true;
        return false;
    }

    // eta_r o ver_r, a character of the previous level.
    CharacterData eta_after_ver(int r) const {
        const TowerLevel& L = at(r);
        if (!L.eta || !L.ver) throw PreconditionError("eta_after_ver: level needs eta and a transfer");
        return L.eta->pullback(*L.ver);
    }

private:
    ZmodPN R_;
    std::vector<TowerLevel> levels_;
    std::vector<TraceIdealBasis> T_;
};

struct MeasureFamily {
    std::vector<LambdaElt> x;  // one element per tower level, in level order

    std::vector<bool> unit_flags() const {
        std::vector<bool> u;
        for (const auto& e : x) u.push_back(is_unit(e));
        return u;
    }
};

namespace detail {

inline void check_family(const MeasureFamily& fam, const TowerData& tower) {
    if (fam.x.size() != tower.size()) throw InputError("family: one element per tower level required");
    for (std::size_t i = 0; i < fam.x.size(); ++i) {
        if (!same_group(fam.x[i].group(), tower.levels()[i].group))
            throw MismatchError("family: element at level " + std::to_string(tower.levels()[i].r) + " lives on another group");
        if (fam.x[i].ring() != tower.ring()) throw MismatchError("family: coefficient precision mismatch");
    }
}

inline std::string first_difference(const LambdaElt& a, const LambdaElt& b) {
    LambdaElt d = a - b;
    if (d.terms().empty()) return "";
    const auto& [g, c] = *d.terms().begin();
    std::ostringstream os;
    os << "coefficient at " << a.group()->element_str(g) << " differs by " << c;
    return os.str();
}

}  // namespace detail

struct LevelVerdict {
    int r = 0;
    bool ok = true;
    std::string witness;
};

struct PatchReport {
    std::string condition;
    bool applicable = true;
    bool verdict = true;
    std::vector<LevelVerdict> levels;

    std::vector<int> failing_levels() const {
        std::vector<int> out;
        for (const auto& l : levels)
            if (!l.ok) out.push_back(l.r);
        return out;
    }
    std::string str() const {
        std::ostringstream os;
        os << condition << ": " << (!applicable ? "not applicable" : verdict ? "pass" : "FAIL") << "\n";
        for (const auto& l : levels) os << "  r=" << l.r << " " << (l.ok ? "ok" : "fail") << (l.witness.empty() ? "" : "  " + l.witness) << "\n";
        return os.str();
    }
};

// MS1: x_r = Nr(x_(r-1)) on every step that carries norm data.
inline PatchReport check_MS1(const MeasureFamily& fam, const TowerData& tower) {
    detail::check_family(fam, tower);
    PatchReport rep{"MS1", tower.has_norms(), true, {}};
    for (std::size_t i = 1; i < tower.size(); ++i) {
        const TowerLevel& L = tower.levels()[i];
        if (!L.norm) continue;
        if (!is_unit(fam.x[i - 1]))
            throw NotUnitError("MS1: x at level " + std::to_string(L.r - 1) + " is not a unit");
        LambdaElt nr = norm_map(fam.x[i - 1], *L.norm);
        LevelVerdict v{L.r, nr == fam.x[i], ""};
        if (!v.ok) v.witness = "Nr(x_prev) vs x: " + detail::first_difference(nr, fam.x[i]);
        rep.verdict = rep.verdict && v.ok;
        rep.levels.push_back(std::move(v));
    }
    return rep;
}

// MS2: every Gamma generator fixes x_r.
inline PatchReport check_MS2(const MeasureFamily& fam, const TowerData& tower) {
    detail::check_family(fam, tower);
    PatchReport rep{"MS2", true, true, {}};
    for (std::size_t i = 0; i < tower.size(); ++i) {
        const TowerLevel& L = tower.levels()[i];
        LevelVerdict v{L.r, true, ""};
        for (std::size_t k = 0; k < L.gamma.size() && v.ok; ++k) {
            LambdaElt moved = ver_pushforward(fam.x[i], L.gamma[k]);
            if (!(moved == fam.x[i])) {
                v.ok = false;
                v.witness = "gamma_" + std::to_string(k + 1) + ": " + detail::first_difference(moved, fam.x[i]);
            }
        }
        rep.verdict = rep.verdict && v.ok;
        rep.levels.push_back(std::move(v));
    }
    return rep;
}

// MS3: x_r - ver_r(x_(r-1)) lies in T_r.
inline PatchReport check_MS3(const MeasureFamily& fam, const TowerData& tower) {
    detail::check_family(fam, tower);
    PatchReport rep{"MS3", tower.size() > 1, true, {}};
    const i64 p = tower.p();
    for (std::size_t i = 1; i < tower.size(); ++i) {
        const TowerLevel& L = tower.levels()[i];
        LambdaElt d = fam.x[i] - ver_pushforward(fam.x[i - 1], *L.ver);
        const TraceIdealBasis& T = tower.trace_ideal_at(L.r);
        LevelVerdict v{L.r, T.contains(d), ""};
        if (d.terms().empty()) {
            v.witness = "difference is zero";
        } else if (v.ok) {
            v.witness = "difference in T";
        } else if (d.augmentation() % p != 0) {
            v.witness = "augmentation of difference is " + std::to_string(d.augmentation() % p) + " mod p";
        } else {
            auto res = T.residual_dense(d.dense());
            for (std::size_t g = 0; g < res.size(); ++g) {
                if (res[g]) {
                    v.witness = "residual mod T at " + L.group->element_str(static_cast<i64>(g)) + " is " + std::to_string(res[g]);
                    break;
                }
            }
        }
        rep.verdict = rep.verdict && v.ok;
        rep.levels.push_back(std::move(v));
    }
    return rep;
}

// ---- phi_0 / phi_1 compatibility ---------------------------------------

// Finite level of Z_p^x -> 1 + pZ_p (norm) and Z/p x (1 + pZ_p) -> 1 + pZ_p
// (projection): A0 = Z/(p-1) x Z/p^(M-1), A1 = Z/p x Z/p^(M-1), C = Z/p^(M-1).
struct PhiCompatData {
    ZmodPN R;
    GroupPtr A0, A1, C;
    Subgroup C_in_A0;
    GroupHom proj1;    // A1 -> C
    GroupHom section1; // C -> A1, a right inverse of proj1
};

inline PhiCompatData phi_compat_data(i64 p, int M, int N) {
    if (M < 2) throw InputError("phi_compat_data: M must be at least 2");
    PhiCompatData d;
    d.R = ZmodPN(p, N);
    const i64 q = ipow(p, M - 1);
    d.A0 = make_group({p - 1, q}, {"w", "u"});
    d.A1 = make_group({p, q}, {"k", "u"});
    d.C = make_group({q}, {"u"});
    d.C_in_A0 = Subgroup{d.C, GroupHom(d.C, d.A0, {{0}, {1}})};
    d.proj1 = GroupHom(d.A1, d.C, {{0, 1}});
    d.section1 = GroupHom(d.C, d.A1, {{0}, {1}});
    return d;
}

struct PhiCompatReport {
    bool verdict = false;
    LambdaElt lhs;  // phi_0(u * lambda_0)
    LambdaElt rhs;  // phi_1(lambda_1)
    LambdaElt difference;
};

inline PhiCompatReport check_phi_compat(const LambdaElt& lambda0, const LambdaElt& lambda1, const PhiCompatData& d,
                                        std::optional<i64> u = std::nullopt) {
    if (!same_group(lambda0.group(), d.A0) || !same_group(lambda1.group(), d.A1))
        throw MismatchError("check_phi_compat: elements on the wrong groups");
    LambdaElt l0 = u ? lambda0.scale(lambda0.ring().from_int(*u)) : lambda0;
    PhiCompatReport r;
    r.lhs = norm_map(l0, d.C_in_A0);
    r.rhs = ver_pushforward(lambda1, d.proj1);
    r.difference = r.lhs - r.rhs;
    r.verdict = r.difference.terms().empty();
    return r;
}

// ---- representations and L-values ---------------------------------------

enum class RepKind { rho, sigma };

// rho_r is induced from eta_r, sigma_r from the trivial character of G_r.
struct RepDescriptor {
    int r = 0;
    RepKind kind = RepKind::sigma;
    CharacterData eta;
    std::vector<i64> kappa;
    std::optional<CharacterData> xi;

    static RepDescriptor rho(const TowerData& tower, int r, std::optional<CharacterData> xi = std::nullopt) {
        const TowerLevel& L = tower.at(r);
        if (!L.eta) throw PreconditionError("rho: level " + std::to_string(r) + " has no eta");
        RepDescriptor d{r, RepKind::rho, *L.eta, L.kappa, std::move(xi)};
        d.validate(tower.p());
        return d;
    }
    static RepDescriptor sigma(const TowerData& tower, int r, std::optional<CharacterData> xi = std::nullopt) {
        const TowerLevel& L = tower.at(r);
        RepDescriptor d{r, RepKind::sigma, CharacterData::trivial(L.group), L.kappa, std::move(xi)};
        d.validate(tower.p());
        return d;
    }

    void validate(i64 p) const {
        if (kind == RepKind::rho && eta.order() != ipow(p, r)) throw InputError("RepDescriptor: eta_r must have order exactly p^r");
        if (kind == RepKind::sigma && eta.order() != 1) throw InputError("RepDescriptor: sigma is induced from the trivial character");
        if (xi && !same_group(xi->group, eta.group)) throw MismatchError("RepDescriptor: twist on another group");
    }

    // eta (or trivial) times xi, twisted by kappa^n.
    CharacterData character(i64 n) const {
        CharacterData c = eta;
        if (xi) {
            const i64 f = std::lcm(eta.conductor, xi->conductor);
            std::vector<i64> e(eta.exponents.size());
            for (std::size_t i = 0; i < e.size(); ++i)
                e[i] = eta.exponents[i] * (f / eta.conductor) + xi->exponents[i] * (f / xi->conductor);
            c = CharacterData(eta.group, f, e);
        }
        if (n != 0) {
            if (kappa.empty()) throw PreconditionError("RepDescriptor: kappa-hat is not tabled at this level");
            c.twist = CharacterData::Twist{n, kappa};
        }
        return c;
    }
};

inline CycloValue eval_L_value(const LambdaElt& measure, const RepDescriptor& rep, i64 n) {
    return integrate_character(measure, rep.character(n));
}

struct Congruence5313Report {
    CycloValue rho, sigma;
    bool residue_congruent = false;         // equal after zeta -> 1, mod p
    bool rho_rational = false;
    std::optional<bool> congruent_mod_p;    // only when rho is rational
    bool verdict = false;
    std::string flag;
};

// L(rho_r, n) against L(sigma_r, n) modulo the prime above p; with
// claim_rational the rho value must lie in Z/p^N and then the congruence
// is an honest one mod p.
inline Congruence5313Report check_congruence_5313(const LambdaElt& measure, const TowerData& tower, int r, i64 n,
                                                  bool claim_rational = false) {
    Congruence5313Report rep;
    rep.rho = eval_L_value(measure, RepDescriptor::rho(tower, r), n);
    rep.sigma = eval_L_value(measure, RepDescriptor::sigma(tower, r), n);
    const i64 p = tower.p();
    rep.residue_congruent = rep.rho.ring.reduce_mod_p(rep.rho.value) == rep.sigma.ring.reduce_mod_p(rep.sigma.value);
    rep.rho_rational = rep.rho.is_rational();
    if (rep.rho_rational) rep.congruent_mod_p = mod(rep.rho.constant() - rep.sigma.constant(), p) == 0;
    rep.verdict = rep.residue_congruent && rep.congruent_mod_p.value_or(true);
    if (claim_rational && !rep.rho_rational) {
        rep.verdict = false;
        rep.flag = "rho value is not rational";
    }
    return rep;
}

struct Congruence5328Report {
    i64 pullback_order = 0;     // order of eta_r o ver_r
    bool pullback_is_eta_prev = false;
    CycloValue upper;           // L(rho_r, n) at x_r
    CycloValue lower;           // L(rho_(r-1), n) at x_(r-1), in the conductor of the upper value
    CycloValue transfer_part;   // integral of eta_r kappa^n against ver(x_(r-1))
    CycloValue trace_part;      // integral against x_r - ver(x_(r-1))
    bool trace_part_divisible = false;
    bool verdict = false;
};

inline Congruence5328Report check_congruence_5328(const MeasureFamily& fam, const TowerData& tower, int r, i64 n) {
    detail::check_family(fam, tower);
    if (r <= tower.first_level()) throw PreconditionError("check_congruence_5328: level needs a predecessor");
    const TowerLevel& L = tower.at(r);
    const TowerLevel& P = tower.at(r - 1);
    if (!L.eta || !P.eta) throw PreconditionError("check_congruence_5328: eta missing at level " + std::to_string(r) + " or below");
    const i64 p = tower.p();
    Congruence5328Report rep;
    CharacterData pulled = tower.eta_after_ver(r);
    rep.pullback_order = pulled.order();
    if (rep.pullback_order != ipow(p, r - 1)) throw PreconditionError("check_congruence_5328: eta_r o ver_r does not have order p^(r-1)");
    {
        const i64 s = pulled.conductor / P.eta->conductor;
        bool same = pulled.conductor % P.eta->conductor == 0;
        for (std::size_t i = 0; same && i < pulled.exponents.size(); ++i)
            same = mod(P.eta->exponents[i] * s - pulled.exponents[i], pulled.conductor) == 0;
        rep.pullback_is_eta_prev = same;
    }
    const std::size_t i = tower.index_of(r);
    const LambdaElt& xr = fam.x[i];
    const LambdaElt& xp = fam.x[i - 1];
    LambdaElt lambda = xr - ver_pushforward(xp, *L.ver);
    if (!tower.trace_ideal_at(r).contains(lambda)) throw PreconditionError("check_congruence_5328: MS3 difference is not in T_r");

    RepDescriptor up = RepDescriptor::rho(tower, r), lo = RepDescriptor::rho(tower, r - 1);
    rep.upper = eval_L_value(xr, up, n);
    CycloValue low = eval_L_value(xp, lo, n);
    rep.lower = {rep.upper.ring, rep.upper.ring.promote(low.value, low.ring)};
    rep.transfer_part = eval_L_value(ver_pushforward(xp, *L.ver), up, n);
    rep.trace_part = eval_L_value(lambda, up, n);
    rep.trace_part_divisible = rep.trace_part.divisible_by_p();
    rep.verdict = rep.upper.ring.divisible_by_p(rep.upper.ring.sub(rep.upper.value, rep.lower.value));
    return rep;
}

// ---- synthetic towers and families ---------------------------------------

// G = Z/p^h x Z/p^(R+1) with G_r = Z/p^h x p^r Z/p^(R+1), levels 0..R.
// The group is abelian, so every level action and Gamma are trivial and
// the norm and transfer maps are explicit.
inline TowerData abelian_cyclic_tower(i64 p, int R, int N, int h = 1) {
    if (R < 1 || h < 1) throw InputError("abelian_cyclic_tower: need R >= 1 and h >= 1");
    ZmodPN ring(p, N);
    std::vector<TowerLevel> levels;
    for (int r = 0; r <= R; ++r) {
        TowerLevel L;
        L.r = r;
        L.group = make_group({ipow(p, h), ipow(p, R + 1 - r)}, {"h", "t"});
        L.action = CyclicAction::trivial(L.group, p);
        L.gamma = {GroupHom::identity(L.group)};
        if (r > 0) {
            const GroupPtr& prev = levels.back().group;
            L.ver = GroupHom(prev, L.group, {{p, 0}, {0, 1}});
            L.norm = Subgroup{L.group, GroupHom(L.group, prev, {{1, 0}, {0, p}})};
        }
        levels.push_back(std::move(L));
    }
    return TowerData(ring, std::move(levels));
}

// Finite model of Z_p x| (1 + pZ_p): G_r^ab = Z/p^r (Kummer part) x
// Z/p^(M-r), levels 1..R. sigma_r and the Gamma generator multiply the
// Kummer part by 1 + p^(r-1) and 1 + p; the transfer is p on the Kummer
// part and the identity on generators of the second factor.
inline TowerData false_tate_tower(i64 p, int R, int M, int N) {
    if (R < 2) throw InputError("false_tate_tower: need at least two levels");
    if (M < R + 1) throw InputError("false_tate_tower: M must exceed R");
    if (N > M) throw InputError("false_tate_tower: kappa-hat needs N <= M");
    ZmodPN ring(p, N);
    std::vector<TowerLevel> levels;
    for (int r = 1; r <= R; ++r) {
        TowerLevel L;
        L.r = r;
        L.group = make_group({ipow(p, r), ipow(p, M - r)}, {"k", "c"});
        if (r == 1) L.action = CyclicAction::trivial(L.group, p);
        else L.action = CyclicAction(GroupHom(L.group, L.group, {{1 + ipow(p, r - 1), 0}, {0, 1}}), p);
        L.gamma = {GroupHom(L.group, L.group, {{1 + p, 0}, {0, 1}})};
        if (r > 1) L.ver = GroupHom(levels.back().group, L.group, {{p, 0}, {0, 1}});
        L.eta = CharacterData(L.group, ipow(p, r), {1, 0});
        L.kappa = {1, powmod(1 + p, static_cast<std::uint64_t>(ipow(p, r - 1)), ring.modulus())};
        levels.push_back(std::move(L));
    }
    return TowerData(ring, std::move(levels));
}

// Sum over the finite group of automorphisms generated by the Gamma
// generators of a level.
inline LambdaElt gamma_symmetrize(const LambdaElt& x, const TowerLevel& L) {
    const auto n = static_cast<std::size_t>(L.group->order());
    std::vector<i64> id(n);
    for (std::size_t g = 0; g < n; ++g) id[g] = static_cast<i64>(g);
    std::set<std::vector<i64>> seen{id};
    std::vector<std::vector<i64>> queue{id};
    for (std::size_t q = 0; q < queue.size(); ++q) {
        for (const auto& gam : L.gamma) {
            std::vector<i64> next(n);
            for (std::size_t g = 0; g < n; ++g) next[g] = gam.apply(queue[q][g]);
            if (seen.insert(next).second) queue.push_back(std::move(next));
        }
    }
    LambdaElt out(x.group(), x.ring());
    for (const auto& perm : queue)
        for (const auto& [g, a] : x.terms()) out.add_term(perm[static_cast<std::size_t>(g)], a);
    return out;
}

inline MeasureFamily constant_family(const TowerData& tower) {
    MeasureFamily f;
    for (const auto& L : tower.levels()) f.x.push_back(LambdaElt::one(L.group, tower.ring()));
    return f;
}

// x_r = Nr(x_(r-1)) starting from a unit on the first level.
inline MeasureFamily norm_family(const TowerData& tower, const LambdaElt& first) {
    MeasureFamily f{{first}};
    for (std::size_t i = 1; i < tower.size(); ++i) {
        const TowerLevel& L = tower.levels()[i];
        if (!L.norm) throw PreconditionError("norm_family: level " + std::to_string(L.r) + " has no norm data");
        f.x.push_back(norm_map(f.x.back(), *L.norm));
    }
    return f;
}

// x_r = ver(x_(r-1)) + trace_r(mu_r), mu_r Gamma-symmetrized; mus[i] lives
// on level i (mus[0] is ignored).
inline MeasureFamily transfer_family(const TowerData& tower, const LambdaElt& first, const std::vector<LambdaElt>& mus) {
    if (mus.size() != tower.size()) throw InputError("transfer_family: one mu per level");
    MeasureFamily f{{gamma_symmetrize(first, tower.levels()[0])}};
    for (std::size_t i = 1; i < tower.size(); ++i) {
        const TowerLevel& L = tower.levels()[i];
        LambdaElt mu = gamma_symmetrize(mus[i], L);
        f.x.push_back(ver_pushforward(f.x.back(), *L.ver) + trace_map(mu, L.action));
    }
    return f;
}

inline LambdaElt random_lambda(const GroupPtr& G, const ZmodPN& R, std::mt19937_64& rng, std::size_t terms) {
    std::uniform_int_distribution<i64> gd(0, G->order() - 1), cd(0, R.modulus() - 1);
    LambdaElt x(G, R);
    for (std::size_t k = 0; k < terms; ++k) x.add_term(gd(rng), cd(rng));
    return x;
}

inline LambdaElt random_unit(const GroupPtr& G, const ZmodPN& R, std::mt19937_64& rng, std::size_t terms) {
    for (;;) {
        LambdaElt x = random_lambda(G, R, rng, terms);
        if (is_unit(x)) return x;
    }
}

}  // namespace tcong
