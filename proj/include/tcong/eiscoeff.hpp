#pragma once

#include <array>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tcong/abgroups.hpp"
#include "tcong/arith.hpp"
#include "tcong/cyclotomic.hpp"
#include "tcong/errors.hpp"
#include "tcong/iwalg.hpp"

namespace tcong {

namespace ladic {

inline int val(const Rational& x, i64 l) {
    if (x == 0) return 1 << 30;
    return valuation(numerator(x), l) - valuation(denominator(x), l);
}

inline Rational rpow(const Rational& x, int k) {
    Rational r = 1;
    const Rational b = k >= 0 ? x : Rational(1) / x;
    for (int i = 0; i < std::abs(k); ++i) r *= b;
    return r;
}

// x mod l^k for an l-integral rational x.
inline i64 reduce(const Rational& x, i64 l, int k) {
    if (val(x, l) < 0) throw InputError("ladic::reduce: not l-integral");
    const i64 m = ipow(l, k);
    if (m == 1) return 0;
    return mulmod(mod(numerator(x), m), invmod(mod(denominator(x), m), m), m);
}

struct RootOfUnity {
    i64 order = 1;
    i64 exponent = 0;
};

// Standard additive character of Q_l: exp(2 pi i {y}), {y} the l-adic
// fractional part.
inline RootOfUnity psi(const Rational& y, i64 l) {
    BigInt s = denominator(y);
    int k = 0;
    while (s % l == 0) {
        s /= l;
        ++k;
    }
    if (k == 0) return {};
    const i64 m = ipow(l, k);
    return {m, mulmod(mod(numerator(y), m), invmod(mod(s, m), m), m)};
}

}  // namespace ladic

// Quadratic extension Q_l(theta), theta^2 = D, with a reciprocity map to a
// finite abelian group given by the image of the uniformizer (l when
// inert, theta when ramified) and by images of generators of (O/l^m)^x.
struct LocalModel {
    i64 ell = 0;
    i64 D = 0;
    bool ramified = false;
    int m = 1;
    std::vector<std::pair<i64, i64>> unit_gens;  // a + b theta
    std::vector<i64> unit_images;
    i64 pi_image = 0;

    // Validates the data and tabulates the unit part by breadth-first
    // search, rejecting tables that do not define a homomorphism.
    void prepare(const GroupPtr& A) {
        if (ell < 3 || !is_prime(ell)) throw InputError("LocalModel: residue characteristic must be an odd prime");
        if (m < 1) throw InputError("LocalModel: conductor exponent must be positive");
        if (ramified) {
            if (valuation(D, ell) != 1) throw InputError("LocalModel: ramified model needs v(D) = 1");
        } else if (mod(D, ell) == 0 || kronecker(mod(D, ell), ell) != -1) {
            throw InputError("LocalModel: inert model needs D a non-residue unit");
        }
        if (unit_gens.size() != unit_images.size()) throw InputError("LocalModel: one image per unit generator");
        A->check(pi_image);
        for (i64 y : unit_images) A->check(y);
        A_ = A;
        L_ = ipow(ell, m);
        const i64 DL = mod(D, L_);
        table_.assign(static_cast<std::size_t>(L_ * L_), -1);
        auto idx = [&](i64 a, i64 b) { return static_cast<std::size_t>(mod(a, L_) * L_ + mod(b, L_)); };
        std::size_t units = 0;
        for (i64 a = 0; a < L_; ++a)
            for (i64 b = 0; b < L_; ++b) units += is_unit_residue(a, b) ? 1 : 0;
        for (const auto& [a, b] : unit_gens)
            if (!is_unit_residue(mod(a, L_), mod(b, L_))) throw InputError("LocalModel: generator is not a unit");
        std::vector<std::pair<i64, i64>> queue{{1, 0}};
        table_[idx(1, 0)] = 0;
        std::size_t seen = 1;
        for (std::size_t h = 0; h < queue.size(); ++h) {
            const auto [a, b] = queue[h];
            const i64 img = table_[idx(a, b)];
            for (std::size_t g = 0; g < unit_gens.size(); ++g) {
                const i64 c = mod(unit_gens[g].first, L_), d = mod(unit_gens[g].second, L_);
                const i64 na = mod(mulmod(a, c, L_) + mulmod(mulmod(b, d, L_), DL, L_), L_);
                const i64 nb = mod(mulmod(a, d, L_) + mulmod(b, c, L_), L_);
                const i64 nimg = A->add(img, unit_images[g]);
                i64& slot = table_[idx(na, nb)];
                if (slot < 0) {
                    slot = nimg;
                    ++seen;
                    queue.push_back({na, nb});
                } else if (slot != nimg) {
                    throw InputError("LocalModel: unit images are not multiplicative");
                }
            }
        }
        if (seen != units) throw InputError("LocalModel: generators do not generate the unit group");
    }

    bool prepared() const { return L_ != 0; }

    // Reciprocity image of a + b theta for integers a, b (not both zero).
    i64 rec_int(i64 a, i64 b) const {
        if (!prepared()) throw Error("LocalModel: not prepared");
        if (a == 0 && b == 0) throw InputError("LocalModel: reciprocity of zero");
        const int va = valuation(a, ell), vb = valuation(b, ell);
        i64 ua = 0, ub = 0;
        int e = 0;
        if (!ramified) {
            e = std::min(va, vb);
            const i64 s = ipow(ell, e);
            ua = mod(a / s, L_);
            ub = b == 0 ? 0 : mod(b / s, L_);
        } else {
            const i64 D0inv = invmod(mod(D / ell, L_), L_);
            e = std::min(a == 0 ? (1 << 30) : 2 * va, b == 0 ? (1 << 30) : 2 * vb + 1);
            const int k = e / 2;
            if (e % 2 == 0) {
                const i64 s = ipow(ell, k), f = powmod(D0inv, static_cast<std::uint64_t>(k), L_);
                ua = mulmod(mod(a / s, L_), f, L_);
                ub = b == 0 ? 0 : mulmod(mod(b / s, L_), f, L_);
            } else {
                ua = mulmod(mod(b / ipow(ell, k), L_), powmod(D0inv, static_cast<std::uint64_t>(k), L_), L_);
                ub = a == 0 ? 0 : mulmod(mod(a / ipow(ell, k + 1), L_), powmod(D0inv, static_cast<std::uint64_t>(k + 1), L_), L_);
            }
        }
        const i64 u = table_[static_cast<std::size_t>(ua * L_ + ub)];
        if (u < 0) throw Error("LocalModel: unit part is not a unit");
        return A_->add(A_->scalar(e, pi_image), u);
    }

    // Reciprocity image of a + b theta (nonzero).
    i64 rec(const Rational& a, const Rational& b) const {
        if (!prepared()) throw Error("LocalModel: not prepared");
        if (a == 0 && b == 0) throw InputError("LocalModel: reciprocity of zero");
        Rational ua, ub;
        int e = 0;
        if (!ramified) {
            e = std::min(ladic::val(a, ell), ladic::val(b, ell));
            const Rational s = ladic::rpow(Rational(ell), -e);
            ua = a * s;
            ub = b * s;
        } else {
            const int va = ladic::val(a, ell), vb = ladic::val(b, ell);
            e = std::min(a == 0 ? (1 << 30) : 2 * va, b == 0 ? (1 << 30) : 2 * vb + 1);
            const int k = e >= 0 ? e / 2 : -((-e + 1) / 2);
            if (e - 2 * k == 0) {
                const Rational s = ladic::rpow(Rational(D), -k);
                ua = a * s;
                ub = b * s;
            } else {
                const Rational s = ladic::rpow(Rational(D), -(k + 1));
                ua = b * Rational(D) * s;
                ub = a * s;
            }
        }
        const i64 ra = ladic::reduce(ua, ell, m), rb = ladic::reduce(ub, ell, m);
        const i64 u = table_[static_cast<std::size_t>(ra * L_ + rb)];
        if (u < 0) throw Error("LocalModel: unit part is not a unit");
        return A_->add(A_->scalar(e, pi_image), u);
    }

private:
    bool is_unit_residue(i64 a, i64 b) const {
        if (ramified) return a % ell != 0;
        return a % ell != 0 || b % ell != 0;
    }

    GroupPtr A_;
    i64 L_ = 0;
    std::vector<i64> table_;
};

enum class MSplitting { split_distinguished, split_generic, inert, ramified };
enum class PlaceDivides { none, p, FFc, iD };

inline std::string to_string(MSplitting s) {
    switch (s) {
        case MSplitting::split_distinguished: return "split-distinguished";
        case MSplitting::split_generic: return "split-generic";
        case MSplitting::inert: return "inert";
        case MSplitting::ramified: return "ramified";
    }
    return "?";
}

inline std::string to_string(PlaceDivides d) {
    switch (d) {
        case PlaceDivides::none: return "none";
        case PlaceDivides::p: return "p";
        case PlaceDivides::FFc: return "FFc";
        case PlaceDivides::iD: return "iD";
    }
    return "?";
}

// One finite place v of the totally real field with everything the local
// coefficient at v needs. Tables are keyed by the labels of beta and of
// class representatives a.
struct LocalPlaceSpec {
    std::string label;
    MSplitting splitting = MSplitting::split_generic;
    PlaceDivides divides = PlaceDivides::none;
    i64 q = 0;
    std::string below;  // label of the place of the subfield under v

    // divides FFc: rec_w(beta) for beta a local unit, nullopt otherwise
    std::map<std::string, std::optional<i64>> rec_w;
    std::vector<std::array<std::string, 3>> rec_products;  // rec(x) + rec(y) = rec(z)

    // divides none: rec(varpi^j c(a)_v) for j = 0, 1, ... and val_v(beta c(a)_v)
    std::map<std::string, std::vector<i64>> rec_c, rec_c_swapped;
    std::map<std::pair<std::string, std::string>, int> val;

    // divides iD
    LocalModel model;
    Rational d = 1, t = 0;
    std::map<std::string, Rational> beta_local;
    std::optional<int> j0, j1;

    void prepare(const GroupPtr& A, i64 p) {
        const std::string where = "place " + label + ": ";
        if (divides != PlaceDivides::p && (q < 2 || q % p == 0)) throw InputError(where + "residue cardinality must be prime to p");
        switch (divides) {
            case PlaceDivides::FFc:
                if (splitting != MSplitting::split_distinguished) throw InputError(where + "FFc places must be split with a distinguished w");
                for (const auto& [b, r] : rec_w)
                    if (r) A->check(*r);
                for (const auto& rel : rec_products) {
                    auto get = [&](const std::string& x) {
                        auto it = rec_w.find(x);
                        if (it == rec_w.end() || !it->second) throw InputError(where + "product relation uses untabled unit " + x);
                        return *it->second;
                    };
                    if (A->add(get(rel[0]), get(rel[1])) != get(rel[2]))
                        throw InputError(where + "reciprocity table not multiplicative on " + rel[0] + "*" + rel[1] + "=" + rel[2]);
                }
                break;
            case PlaceDivides::none:
                if (splitting == MSplitting::ramified) throw InputError(where + "ramified places must divide iD");
                for (const auto* tab : {&rec_c, &rec_c_swapped})
                    for (const auto& [a, rs] : *tab)
                        for (i64 r : rs) A->check(r);
                break;
            case PlaceDivides::iD:
                if (splitting != MSplitting::inert && splitting != MSplitting::ramified)
                    throw InputError(where + "iD places must be inert or ramified");
                if (model.ramified != (splitting == MSplitting::ramified)) throw InputError(where + "local model disagrees with splitting type");
                if (q != model.ell) throw InputError(where + "local field must be Q_l (q = l)");
                if (d == 0) throw InputError(where + "d must be nonzero");
                model.prepare(A);
                break;
            case PlaceDivides::p:
                break;
        }
    }
};

inline LambdaCyclo zero_coeff(const GroupPtr& A, const CycloModPN& R) { return LambdaCyclo(A, R); }

// w | FFc: rec_w(beta) times the indicator of local units.
inline LambdaCyclo coeff_split_F(const LocalPlaceSpec& v, const std::string& beta, const GroupPtr& A, const CycloModPN& R) {
    if (v.divides != PlaceDivides::FFc) throw InputError("coeff_split_F: place " + v.label + " does not divide FFc");
    auto it = v.rec_w.find(beta);
    if (it == v.rec_w.end()) throw InputError("coeff_split_F: no rec_w entry for " + beta + " at " + v.label);
    if (!it->second) return zero_coeff(A, R);
    return LambdaCyclo::element(A, R, *it->second);
}

// v prime to p FFc D: sum_(j <= val) q^j rec(varpi^j c).
inline LambdaCyclo coeff_generic(const LocalPlaceSpec& v, const std::string& beta, const std::string& a, const GroupPtr& A,
                                 const CycloModPN& R, bool swapped = false) {
    if (v.divides != PlaceDivides::none) throw InputError("coeff_generic: place " + v.label + " is not generic");
    auto vi = v.val.find({beta, a});
    if (vi == v.val.end()) throw InputError("coeff_generic: no valuation for (" + beta + "," + a + ") at " + v.label);
    const int n = vi->second;
    LambdaCyclo r(A, R);
    if (n < 0) return r;
    // the swapped table only exists where a distinguished w was chosen
    const auto& tab = swapped && !v.rec_c_swapped.empty() ? v.rec_c_swapped : v.rec_c;
    auto ri = tab.find(a);
    if (ri == tab.end() || static_cast<int>(ri->second.size()) <= n)
        throw InputError("coeff_generic: missing rec entries for " + a + " at " + v.label + (swapped ? " (swapped)" : ""));
    const i64 mdl = R.modulus();
    for (int j = 0; j <= n; ++j) r.add_term(ri->second[static_cast<std::size_t>(j)], R.from_int(powmod(mod(v.q, mdl), static_cast<std::uint64_t>(j), mdl)));
    return r;
}

struct InertCoeff {
    LambdaCyclo value;
    bool stable = true;
    int j0 = 0, j1 = 0;
};

namespace detail {

inline Rational local_beta_over_d(const LocalPlaceSpec& v, const std::string& beta) {
    auto it = v.beta_local.find(beta);
    if (it == v.beta_local.end()) throw InputError("coeff_inert_ramified: no local value of " + beta + " at " + v.label);
    return it->second / v.d;
}

inline std::pair<int, int> default_levels(const LocalPlaceSpec& v, const Rational& bd) {
    const int j1 = v.j1 ? *v.j1 : v.model.m + (v.model.ramified ? 1 : 0);
    const int vb = bd == 0 ? 0 : std::max(0, ladic::val(bd, v.model.ell));
    const int j0 = v.j0 ? *v.j0 : v.model.m + vb + 1;
    return {j0, j1};
}

// Exponent k with l^k the conductor of the psi values at levels (j0, j1).
inline int psi_exponent_needed(const LocalPlaceSpec& v, const Rational& bd, int j0) {
    int k = 0;
    if (bd != 0) k = std::max(k, j0 - ladic::val(bd, v.model.ell));
    const Rational tt = v.t / (2 * v.d);
    if (tt != 0) k = std::max(k, -ladic::val(tt, v.model.ell));
    return k;
}

inline LambdaCyclo inert_sum(const LocalPlaceSpec& v, const Rational& bd, int j0, int j1, const GroupPtr& A, const CycloModPN& R) {
    const i64 l = v.model.ell;
    if (j0 < 0 || j1 < 0) throw InputError("coeff_inert_ramified: levels must be nonnegative");
    if (bd != 0 && ladic::val(bd, l) + j1 < 0) throw InputError("coeff_inert_ramified: psi(-beta x/d) not constant on the quotient at " + v.label);
    const i64 need = ipow(l, psi_exponent_needed(v, bd, j0));
    if (R.conductor() % need != 0) throw MismatchError("coeff_inert_ramified: coefficient ring lacks l-power roots of unity");
    const i64 n = R.conductor();
    const auto nA = static_cast<std::size_t>(A->order());
    std::vector<std::vector<i64>> hist(nA);
    const i64 count = ipow(l, j0 + j1), lj0 = ipow(l, j0);
    const i64 mdl = R.modulus();
    // x = k / l^j0: x + theta/2 = (2k + l^j0 theta) / (2 l^j0), and
    // psi(-beta x / d) = zeta_(l^K)^(c k) with -beta/d = c0 l^vb, K = j0 - vb
    const i64 rec_den = v.model.rec_int(2 * lj0, 0);
    const int vb = bd == 0 ? (1 << 30) : ladic::val(bd, l);
    const int K = std::max(0, j0 - vb);
    const i64 order = ipow(l, K);
    const i64 c = K == 0 ? 0 : ladic::reduce(-bd * ladic::rpow(Rational(l), -vb), l, K);
    const i64 step = n / order;
    for (i64 k = 0; k < count; ++k) {
        const i64 g = A->neg(A->sub(v.model.rec_int(2 * k, lj0), rec_den));
        const i64 e = K == 0 ? 0 : mulmod(c, mod(k, order), order);
        auto& h = hist[static_cast<std::size_t>(g)];
        if (h.empty()) h.assign(static_cast<std::size_t>(n), 0);
        auto& slot = h[static_cast<std::size_t>(e * step)];
        slot = (slot + 1) % mdl;
    }
    const ladic::RootOfUnity pre = ladic::psi(-v.t / (2 * v.d), l);
    const i64 vol = powmod(invmod(mod(v.q, mdl), mdl), static_cast<std::uint64_t>(j1), mdl);
    const auto prefactor = R.scale(R.zeta(pre.exponent * (n / pre.order)), vol);
    std::map<i64, CycloModPN::value_type> zetas;
    LambdaCyclo r(A, R);
    for (std::size_t g = 0; g < nA; ++g) {
        if (hist[g].empty()) continue;
        auto c = R.zero();
        for (i64 e = 0; e < n; ++e) {
            const i64 cnt = hist[g][static_cast<std::size_t>(e)];
            if (!cnt) continue;
            auto it = zetas.find(e);
            if (it == zetas.end()) it = zetas.emplace(e, R.zeta(e)).first;
            c = R.add(c, R.scale(it->second, cnt));
        }
        r.add_term(static_cast<i64>(g), R.mul(c, prefactor));
    }
    return r;
}

}  // namespace detail

// Conductor of the roots of unity the coefficient at v needs for beta
// (levels and the stability re-run included).
inline i64 required_conductor(const LocalPlaceSpec& v, const std::string& beta) {
    if (v.divides != PlaceDivides::iD) return 1;
    const Rational bd = detail::local_beta_over_d(v, beta);
    const auto [j0, j1] = detail::default_levels(v, bd);
    return ipow(v.model.ell, detail::psi_exponent_needed(v, bd, j0));
}

// v | iD: psi(-t/2d) Vol(l^j1) sum_(x in l^-j0 / l^j1) rec(x + theta/2)^-1 psi(-beta x/d),
// with the recomputation at (j0+1, j1+1) reported in `stable`.
inline InertCoeff coeff_inert_ramified(const LocalPlaceSpec& v, const std::string& beta, int j0, int j1, const GroupPtr& A,
                                       const CycloModPN& R) {
    if (v.divides != PlaceDivides::iD) throw InputError("coeff_inert_ramified: place " + v.label + " does not divide iD");
    const Rational bd = detail::local_beta_over_d(v, beta);
    InertCoeff out{detail::inert_sum(v, bd, j0, j1, A, R), true, j0, j1};
    const i64 need = ipow(v.model.ell, detail::psi_exponent_needed(v, bd, j0 + 1));
    const CycloModPN R2(R.p(), R.base().N(), std::lcm(R.conductor(), need));
    const LambdaCyclo next = detail::inert_sum(v, bd, j0 + 1, j1 + 1, A, R2);
    out.stable = promote_coefficients(out.value, R2) == next;
    return out;
}

inline InertCoeff coeff_inert_ramified(const LocalPlaceSpec& v, const std::string& beta, const GroupPtr& A, const CycloModPN& R) {
    const auto [j0, j1] = detail::default_levels(v, detail::local_beta_over_d(v, beta));
    return coeff_inert_ramified(v, beta, j0, j1, A, R);
}

// Data attached to one beta: rec at infinity, Norm(beta) (an integer prime
// to p), rec at the places of Sigma_p, and the class of beta in U/U_alg.
struct BetaData {
    i64 rec_inf = 0;
    i64 norm = 1;
    i64 rec_sigma_p = 0;
    std::string unit_class;
};

struct ClassRepData {
    FiniteGSet reps;
    std::vector<i64> rec_M;  // rec_M(a), indexed like reps
};

struct TorsionUnitIndex {
    FiniteGSet units;
};

struct SigmaPFactor {
    i64 rec_w = 0;     // rec_w(varpi_w)
    i64 rec_wbar = 0;  // rec_wbar(varpi_wbar)
};

// All coefficient data on one side of the transfer (the field or its
// subfield).
struct CoefficientSide {
    GroupPtr A;
    std::vector<LocalPlaceSpec> places;
    std::map<std::string, BetaData> betas;
    ClassRepData reps;
    TorsionUnitIndex units;
    std::vector<SigmaPFactor> sigma_p;

    void prepare(i64 p) {
        if (!A) throw InputError("coefficient side: no target group");
        if (reps.rec_M.size() != reps.reps.size()) throw InputError("coefficient side: one rec_M value per class representative");
        for (i64 r : reps.rec_M) A->check(r);
        for (const auto& [b, bd] : betas) {
            A->check(bd.rec_inf);
            A->check(bd.rec_sigma_p);
            if (mod(bd.norm, p) == 0) throw InputError("coefficient side: Norm(" + b + ") is divisible by p");
            if (!units.units.find(bd.unit_class)) throw InputError("coefficient side: unknown unit class " + bd.unit_class + " for " + b);
        }
        for (const auto& f : sigma_p) {
            A->check(f.rec_w);
            A->check(f.rec_wbar);
        }
        for (auto& v : places) v.prepare(A, p);
    }

    const BetaData& beta(const std::string& b) const {
        auto it = betas.find(b);
        if (it == betas.end()) throw InputError("coefficient side: no data for beta " + b);
        return it->second;
    }
};

// Finite quotient of the class group with its Z/p-action, and the transfer
// from the subfield-level quotient.
struct GroupTargetData {
    CyclicAction action;
    GroupHom ver;  // subfield group -> field group

    void validate() const {
        if (!same_group(ver.target(), action.group)) throw InputError("group target: ver does not land in the acted-on group");
        for (std::size_t j = 0; j < ver.source()->rank(); ++j) {
            const i64 x = ver.apply(ver.source()->generator(j));
            if (action.apply(x) != x) throw InputError("group target: ver image is not fixed by the action");
        }
    }
};

struct UnstableCoefficient {
    std::string place, beta;
    int j0 = 0, j1 = 0;
};

// Per-run memo of the iD coefficients (they do not depend on a) and the
// instability reports. Valid for one coefficient ring.
struct CoeffContext {
    std::map<std::pair<const LocalPlaceSpec*, std::string>, InertCoeff> inert;
    std::vector<UnstableCoefficient> unstable;
};

// Product over the places prime to p of the local coefficients.
inline LambdaCyclo local_product(const CoefficientSide& S, const std::string& beta, const std::string& a, const CycloModPN& R,
                                 bool swapped = false, CoeffContext* ctx = nullptr) {
    LambdaCyclo x = LambdaCyclo::one(S.A, R);
    for (const auto& v : S.places) {
        switch (v.divides) {
            case PlaceDivides::p: continue;
            case PlaceDivides::FFc: x = x * coeff_split_F(v, beta, S.A, R); break;
            case PlaceDivides::none: x = x * coeff_generic(v, beta, a, S.A, R, swapped); break;
            case PlaceDivides::iD: {
                if (!ctx) {
                    x = x * coeff_inert_ramified(v, beta, S.A, R).value;
                    break;
                }
                auto key = std::make_pair(&v, beta);
                auto it = ctx->inert.find(key);
                if (it == ctx->inert.end()) {
                    it = ctx->inert.emplace(key, coeff_inert_ramified(v, beta, S.A, R)).first;
                    if (!it->second.stable) ctx->unstable.push_back({v.label, beta, it->second.j0, it->second.j1});
                }
                x = x * it->second.value;
                break;
            }
        }
        if (x.is_zero()) break;
    }
    return x;
}

// A(beta, c(a); u) = rec_inf(beta) Norm(beta)^-1 prod_v A(beta, v, c(a)_v)
// rec_Sigma_p(beta) I_u(beta).
inline LambdaCyclo assemble_A(const CoefficientSide& S, const std::string& beta, const std::string& a, const std::string& u,
                              const CycloModPN& R, bool swapped = false, CoeffContext* ctx = nullptr) {
    const BetaData& bd = S.beta(beta);
    if (bd.unit_class != u) return zero_coeff(S.A, R);
    const i64 mdl = R.modulus();
    LambdaCyclo pre(S.A, R);
    pre.add_term(S.A->add(bd.rec_inf, bd.rec_sigma_p), R.from_int(invmod(mod(bd.norm, mdl), mdl)));
    return pre * local_product(S, beta, a, R, swapped, ctx);
}

// prod_w (1 - rec_w(varpi_w) rec_wbar(varpi_wbar)^-1).
inline LambdaCyclo modification_factor(const GroupPtr& A, const CycloModPN& R, const std::vector<SigmaPFactor>& factors) {
    LambdaCyclo c = LambdaCyclo::one(A, R);
    for (const auto& f : factors) {
        LambdaCyclo t = LambdaCyclo::one(A, R);
        t.add_term(A->sub(f.rec_w, f.rec_wbar), R.neg(R.one()));
        c = c * t;
    }
    return c;
}

// B(beta, c) = C sum_a rec_M(a) sum_u A(beta, c(a); u).
inline LambdaCyclo assemble_B(const CoefficientSide& S, const std::string& beta, const LambdaCyclo& C, const CycloModPN& R,
                              bool swapped = false, CoeffContext* ctx = nullptr) {
    LambdaCyclo s(S.A, R);
    for (std::size_t i = 0; i < S.reps.reps.size(); ++i) {
        LambdaCyclo inner(S.A, R);
        for (const auto& u : S.units.units.labels) inner += assemble_A(S, beta, S.reps.reps.labels[i], u, R, swapped, ctx);
        s += inner.shift(S.reps.rec_M[i]);
    }
    return C * s;
}

// A full instance of the coefficient-wise transfer congruence: the fiber of
// beta_sub (with the Galois action), both coefficient sides and the group
// data.
struct TransferInstance {
    ZmodPN R;
    GroupTargetData target;
    CoefficientSide F, Fsub;
    FiniteGSet fiber;
    std::string beta_sub;

    i64 p() const { return R.p(); }

    void prepare() {
        target.validate();
        if (!same_group(F.A, target.action.group)) throw InputError("transfer instance: field side group differs from the acted-on group");
        if (!same_group(Fsub.A, target.ver.source())) throw InputError("transfer instance: subfield side group differs from the source of ver");
        if (target.action.p != p()) throw InputError("transfer instance: action order differs from p");
        F.prepare(p());
        Fsub.prepare(p());
        for (const auto& b : fiber.labels) F.beta(b);
        Fsub.beta(beta_sub);
        orbit_decomposition(fiber, p());
        orbit_decomposition(F.reps.reps, p());
        orbit_decomposition(F.units.units, p());
        for (const auto& a : Fsub.reps.reps.labels) {
            auto i = F.reps.reps.find(a);
            if (!i || F.reps.reps.perm[*i] != *i) throw InputError("transfer instance: subfield representative " + a + " is not a fixed representative");
        }
        for (const auto& u : Fsub.units.units.labels) {
            auto i = F.units.units.find(u);
            if (!i || F.units.units.perm[*i] != *i) throw InputError("transfer instance: subfield unit class " + u + " is not fixed");
        }
    }

    // Roots of unity needed by every coefficient of the instance.
    i64 conductor() const {
        i64 n = 1;
        for (const auto* side : {&F, &Fsub}) {
            for (const auto& v : side->places) {
                if (v.divides != PlaceDivides::iD) continue;
                for (const auto& [b, x] : v.beta_local) n = std::lcm(n, required_conductor(v, b));
            }
        }
        return n;
    }
};

struct FixedTermDiagnostic {
    std::string label;
    bool in_T = false;
    LambdaCyclo residual;
};

struct TransferOptions {
    bool swap_distinguished = false;
};

struct TransferReport {
    bool verdict = false;
    CycloModPN ring;
    LambdaCyclo difference;
    bool modification_matches = false;
    std::vector<std::string> equivariance_violations;
    std::vector<FixedTermDiagnostic> fixed_terms;
    std::vector<std::string> offending;
    std::vector<std::string> hypothesis_notes;
    std::vector<UnstableCoefficient> unstable;
    // difference = trace(preimage) + sum of fixed residuals, when recorded
    std::optional<LambdaCyclo> preimage;
    std::optional<bool> verdict_swapped;

    std::string str() const {
        std::ostringstream os;
        os << "transfer congruence: " << (verdict ? "holds" : "FAILS") << " (coefficients in " << ring.name() << ")\n";
        if (!modification_matches) os << "  modification factor is not ver of the subfield factor\n";
        for (const auto& e : equivariance_violations) os << "  " << e << "\n";
        for (const auto& f : fixed_terms) os << "  fixed " << f.label << ": residual " << (f.in_T ? "in T" : "NOT in T") << "\n";
        for (const auto& n : hypothesis_notes) os << "  note: " << n << "\n";
        for (const auto& u : unstable) os << "  unstable coefficient at " << u.place << " for " << u.beta << " (j0=" << u.j0 << ", j1=" << u.j1 << ")\n";
        if (verdict_swapped) os << "  swapped distinguished places: " << (*verdict_swapped ? "holds" : "FAILS") << "\n";
        return os.str();
    }
};

namespace detail {

inline std::string gamma_label(const std::string& b, const std::string& a, const std::string& u) { return "(" + b + "," + a + "," + u + ")"; }

struct WFamily {
    FiniteGSet W;
    std::vector<LambdaCyclo> lambda;                        // rec_M(a) A(beta, c(a); u)
    std::vector<std::array<std::size_t, 3>> index;          // (beta, a, u)
};

inline WFamily build_family(const TransferInstance& I, const CycloModPN& R, bool swapped, CoeffContext* ctx) {
    WFamily f;
    const auto& B = I.fiber;
    const auto& Dm = I.F.reps.reps;
    const auto& U = I.F.units.units;
    const std::size_t nb = B.size(), na = Dm.size(), nu = U.size();
    std::vector<std::string> labels;
    std::vector<std::size_t> perm;
    auto at = [&](std::size_t b, std::size_t a, std::size_t u) { return (b * na + a) * nu + u; };
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t u = 0; u < nu; ++u) {
                labels.push_back(gamma_label(B.labels[b], Dm.labels[a], U.labels[u]));
                perm.push_back(at(B.perm[b], Dm.perm[a], U.perm[u]));
                f.index.push_back({b, a, u});
                f.lambda.push_back(assemble_A(I.F, B.labels[b], Dm.labels[a], U.labels[u], R, swapped, ctx).shift(I.F.reps.rec_M[a]));
            }
    f.W = FiniteGSet(std::move(labels), std::move(perm));
    return f;
}

inline LambdaCyclo subfield_lambda(const TransferInstance& I, const std::string& a, const std::string& u, const CycloModPN& R, bool swapped,
                                   CoeffContext* ctx) {
    const auto ai = I.Fsub.reps.reps.find(a);
    return assemble_A(I.Fsub, I.beta_sub, a, u, R, swapped, ctx).shift(I.Fsub.reps.rec_M[*ai]);
}

inline LambdaCyclo transfer_difference(const TransferInstance& I, const CycloModPN& R, const LambdaCyclo& C, const LambdaCyclo& Csub,
                                       const WFamily& f, bool swapped, CoeffContext* ctx) {
    LambdaCyclo sum(I.F.A, R), sub(I.Fsub.A, R);
    for (const auto& l : f.lambda) sum += l;
    for (const auto& a : I.Fsub.reps.reps.labels)
        for (const auto& u : I.Fsub.units.units.labels) sub += subfield_lambda(I, a, u, R, swapped, ctx);
    return C * sum - ver_pushforward(Csub * sub, I.target.ver);
}

}  // namespace detail

// Decides sum_(Tr beta = p beta') B(beta, c) - ver(B'(beta', c')) in T by
// direct membership, and decomposes the difference over the index set
// W = {(beta, a, u)}: free orbits must be equivariant, each fixed point
// (beta', a', u') leaves a residual rec(a)A - ver(rec'(a')A') that is
// tested on its own.
inline TransferReport check_transfer_congruence(const TransferInstance& inst, const TraceIdealBasis& T, const TransferOptions& opt = {}) {
    TransferInstance I = inst;
    I.prepare();
    if (!same_group(T.group(), I.F.A) || T.ring() != I.R) throw MismatchError("check_transfer_congruence: trace ideal over another group ring");
    const i64 p = I.p();
    TransferReport rep;
    rep.ring = CycloModPN(I.R, I.conductor());
    const CycloModPN& R = rep.ring;
    const LambdaCyclo C = modification_factor(I.F.A, R, I.F.sigma_p);
    const LambdaCyclo Csub = modification_factor(I.Fsub.A, R, I.Fsub.sigma_p);
    rep.modification_matches = C == ver_pushforward(Csub, I.target.ver);

    CoeffContext ctx;
    const detail::WFamily fam = detail::build_family(I, R, false, &ctx);
    rep.difference = detail::transfer_difference(I, R, C, Csub, fam, false, &ctx);
    rep.verdict = T.contains(rep.difference);

    // free orbits
    const OrbitDecomposition od = orbit_decomposition(fam.W, p);
    LambdaCyclo pre(I.F.A, R);
    for (const auto& orb : od.orbits) {
        for (std::size_t i = 0; i < orb.size(); ++i) {
            const std::size_t a = orb[i], b = orb[(i + 1) % orb.size()];
            if (act_on(fam.lambda[a], I.target.action) != fam.lambda[b])
                rep.equivariance_violations.push_back("equivariance fails: sigma" + fam.W.labels[a] + " != " + fam.W.labels[b]);
        }
        pre += fam.lambda[orb[0]];
    }
    // fixed points against the subfield terms
    std::map<std::pair<std::string, std::string>, bool> matched;
    LambdaCyclo fixed_sum(I.F.A, R);
    for (std::size_t g : od.fixed) {
        const auto [bi, ai, ui] = fam.index[g];
        const std::string& a = I.F.reps.reps.labels[ai];
        const std::string& u = I.F.units.units.labels[ui];
        LambdaCyclo r = fam.lambda[g];
        if (I.Fsub.reps.reps.find(a) && I.Fsub.units.units.find(u)) {
            r -= ver_pushforward(detail::subfield_lambda(I, a, u, R, false, &ctx), I.target.ver);
            matched[{a, u}] = true;
        }
        r = C * r;
        fixed_sum += r;
        FixedTermDiagnostic d{fam.W.labels[g], T.contains(r), r};
        if (!d.in_T) rep.offending.push_back(d.label);
        rep.fixed_terms.push_back(std::move(d));
    }
    for (const auto& a : I.Fsub.reps.reps.labels) {
        for (const auto& u : I.Fsub.units.units.labels) {
            if (matched.count({a, u})) continue;
            LambdaCyclo r = -(C * ver_pushforward(detail::subfield_lambda(I, a, u, R, false, &ctx), I.target.ver));
            if (r.is_zero()) continue;
            const std::string label = detail::gamma_label(I.beta_sub, a, u) + " (subfield only)";
            fixed_sum += r;
            FixedTermDiagnostic d{label, T.contains(r), r};
            if (!d.in_T) rep.offending.push_back(label);
            rep.fixed_terms.push_back(std::move(d));
        }
    }
    if (rep.modification_matches && rep.equivariance_violations.empty()) {
        // C is fixed by the action, so C trace(pre) = trace(C pre)
        const LambdaCyclo cpre = C * pre;
        if (trace_map(cpre, I.target.action) + fixed_sum != rep.difference) throw Error("check_transfer_congruence: decomposition does not reproduce the difference");
        rep.preimage = cpre;
        if (rep.offending.empty() && !rep.verdict) throw Error("check_transfer_congruence: decomposition in T but difference is not");
    }

    // split-in-F places dividing FFc: exact equality at beta'
    const std::string* fixed_beta = nullptr;
    for (std::size_t b = 0; b < I.fiber.size(); ++b)
        if (I.fiber.perm[b] == b) fixed_beta = &I.fiber.labels[b];
    for (const auto& vs : I.Fsub.places) {
        std::vector<const LocalPlaceSpec*> above;
        for (const auto& v : I.F.places)
            if (v.below == vs.label) above.push_back(&v);
        if (above.empty()) continue;
        if (static_cast<i64>(above.size()) == 1 && vs.divides == PlaceDivides::none) {
            if (above[0]->q != ipow(vs.q, static_cast<int>(p)))
                rep.hypothesis_notes.push_back("inert place " + above[0]->label + " has q != q'^p");
        }
        if (vs.divides == PlaceDivides::FFc && fixed_beta && static_cast<i64>(above.size()) == p) {
            LambdaCyclo prod = LambdaCyclo::one(I.F.A, R);
            for (const auto* v : above) prod = prod * coeff_split_F(*v, *fixed_beta, I.F.A, R);
            if (prod != ver_pushforward(coeff_split_F(vs, I.beta_sub, I.Fsub.A, R), I.target.ver))
                rep.hypothesis_notes.push_back("split place " + vs.label + ": product over places above differs from ver at " + I.beta_sub);
        }
    }

    if (opt.swap_distinguished) {
        const detail::WFamily sf = detail::build_family(I, R, true, &ctx);
        rep.verdict_swapped = T.contains(detail::transfer_difference(I, R, C, Csub, sf, true, &ctx));
    }
    rep.unstable = ctx.unstable;
    return rep;
}

inline TransferReport check_transfer_congruence(const TransferInstance& inst, const TransferOptions& opt = {}) {
    return check_transfer_congruence(inst, TraceIdealBasis(inst.target.action, inst.R), opt);
}

}  // namespace tcong
