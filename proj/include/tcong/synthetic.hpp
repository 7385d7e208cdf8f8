#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tcong/eiscoeff.hpp"
#include "tcong/qexpand.hpp"

namespace tcong {

// Random transfer-congruence instances over Q(zeta_(p^2))^+ / Q(zeta_p)^+
// built so that every datum on the field side is the Galois-equivariant
// lift of the subfield datum: free orbits get arbitrary data moved by
// sigma, fixed points get ver of the subfield value, and split places
// carry sigma^i(y) with the subfield value ver^-1(N_sigma y).
struct SyntheticSettings {
    i64 p = 3;
    bool rotation_target = false;  // (Z/p)^p with the cyclic shift instead of Z/p^2 with x -> (1+p)x
    i64 beta_sub = 2;              // rational integer in the subfield
    bool with_iD = true;
    bool ramified_iD = false;
    bool with_sigma_p = true;
    int fixed_reps = 2, free_rep_orbits = 1;
    int fixed_units = 1, free_unit_orbits = 1;
};

struct SyntheticInstance {
    TransferInstance inst;
    std::string fixed_beta;   // the sigma-fixed element of the fiber
    std::string inert_place;  // field-side place inert over the subfield
};

namespace detail {

inline FiniteGSet cycle_gset(i64 p) {
    std::vector<std::string> l;
    std::vector<std::size_t> pm;
    for (i64 i = 0; i < p; ++i) {
        l.push_back(std::to_string(i));
        pm.push_back(static_cast<std::size_t>((i + 1) % p));
    }
    return FiniteGSet(std::move(l), std::move(pm));
}

// Index x * |Y| + y.
inline FiniteGSet gset_product(const FiniteGSet& X, const FiniteGSet& Y) {
    std::vector<std::string> l;
    std::vector<std::size_t> pm;
    for (std::size_t x = 0; x < X.size(); ++x)
        for (std::size_t y = 0; y < Y.size(); ++y) {
            l.push_back(X.labels[x] + "|" + Y.labels[y]);
            pm.push_back(X.perm[x] * Y.size() + Y.perm[y]);
        }
    return FiniteGSet(std::move(l), std::move(pm));
}

inline Coords to_coords(const QVector& v) {
    Coords c;
    for (const auto& x : v) {
        if (denominator(x) != 1) throw Error("synthetic: non-integral fiber point");
        c.push_back(numerator(x));
    }
    return c;
}

class SyntheticBuilder {
public:
    SyntheticBuilder(const SyntheticSettings& s, std::mt19937_64& rng) : s_(s), rng_(rng), p_(s.p) {
        if (p_ != 3 && p_ != 5 && p_ != 7) throw InputError("synthetic: p must be 3, 5 or 7");
        if (s.fixed_reps < 1 || s.fixed_units < 1) throw InputError("synthetic: need a fixed representative and a fixed unit class");
    }

    SyntheticInstance build() {
        make_groups();
        make_fiber();
        make_index_sets();
        make_betas();
        make_places();
        SyntheticInstance out;
        out.inst.R = ZmodPN(p_, 2);
        out.inst.target = {act_, ver_};
        out.inst.F = std::move(F_);
        out.inst.Fsub = std::move(S_);
        out.inst.fiber = fiber_;
        out.inst.beta_sub = beta_sub_;
        out.fixed_beta = fiber_.labels[fixed_];
        out.inert_place = "N";
        out.inst.prepare();
        return out;
    }

private:
    i64 uniform(i64 lo, i64 hi) { return std::uniform_int_distribution<i64>(lo, hi)(rng_); }
    i64 rand_A() { return uniform(0, A_->order() - 1); }
    i64 rand_S() { return uniform(0, Asub_->order() - 1); }
    i64 rand_prime_to_p(i64 lo, i64 hi) {
        for (;;) {
            const i64 x = uniform(lo, hi);
            if (x % p_ != 0) return x;
        }
    }
    i64 ver(i64 y) const { return ver_.apply(y); }
    i64 norm_down(i64 y) const {
        i64 n = 0;
        for (i64 k = 0; k < p_; ++k) n = A_->add(n, act_.apply(y, k));
        for (i64 x = 0; x < Asub_->order(); ++x)
            if (ver_.apply(x) == n) return x;
        throw Error("synthetic: norm is not in the image of ver");
    }

    void make_groups() {
        Asub_ = make_group({p_});
        if (s_.rotation_target) {
            A_ = make_group(std::vector<i64>(static_cast<std::size_t>(p_), p_));
            std::vector<std::vector<i64>> M(static_cast<std::size_t>(p_), std::vector<i64>(static_cast<std::size_t>(p_), 0));
            for (i64 i = 0; i < p_; ++i) M[static_cast<std::size_t>(i)][static_cast<std::size_t>((i + p_ - 1) % p_)] = 1;
            act_ = CyclicAction(GroupHom(A_, A_, M), p_);
            ver_ = GroupHom(Asub_, A_, std::vector<std::vector<i64>>(static_cast<std::size_t>(p_), std::vector<i64>{1}));
        } else {
            A_ = make_group({p_ * p_});
            act_ = CyclicAction(GroupHom(A_, A_, {{1 + p_}}), p_);
            ver_ = GroupHom(Asub_, A_, {{p_}});
        }
        F_.A = A_;
        S_.A = Asub_;
    }

    void make_fiber() {
        const FieldTower T = real_cyclotomic_tower(p_, 1);
        QVector bs(T.Fsub->degree(), Rational(0));
        bs[0] = s_.beta_sub;
        beta_sub_ = coords_label(to_coords(bs));
        const FieldLattice L = FieldLattice::integers(T.F->degree());
        const auto pts = enumerate_trace_fiber(T, L, bs);
        if (pts.empty()) throw InputError("synthetic: empty fiber");
        std::vector<std::string> labels;
        for (const auto& c : pts) labels.push_back(coords_label(c));
        std::vector<std::size_t> perm;
        for (const auto& c : pts) {
            const std::string img = coords_label(to_coords(T.apply_sigma(L.point(c))));
            auto it = std::find(labels.begin(), labels.end(), img);
            if (it == labels.end()) throw Error("synthetic: fiber is not Galois stable");
            perm.push_back(static_cast<std::size_t>(it - labels.begin()));
        }
        fiber_ = FiniteGSet(labels, perm);
        const auto od = orbit_decomposition(fiber_, p_);
        if (od.fixed.size() != 1) throw Error("synthetic: expected exactly one fixed point in the fiber");
        fixed_ = od.fixed[0];
    }

    static FiniteGSet fixed_and_free(const std::string& fixed_prefix, int nfixed, const std::string& free_prefix, int norbits, i64 p) {
        std::vector<std::string> l;
        std::vector<std::size_t> pm;
        for (int i = 0; i < nfixed; ++i) {
            l.push_back(fixed_prefix + std::to_string(i));
            pm.push_back(l.size() - 1);
        }
        for (int o = 0; o < norbits; ++o) {
            const std::size_t base = l.size();
            for (i64 k = 0; k < p; ++k) {
                l.push_back(free_prefix + std::to_string(o) + "." + std::to_string(k));
                pm.push_back(base + static_cast<std::size_t>((k + 1) % p));
            }
        }
        return FiniteGSet(std::move(l), std::move(pm));
    }

    static FiniteGSet fixed_part(const FiniteGSet& X) {
        std::vector<std::string> l;
        std::vector<std::size_t> pm;
        for (std::size_t i = 0; i < X.size(); ++i)
            if (X.perm[i] == i) {
                l.push_back(X.labels[i]);
                pm.push_back(pm.size());
            }
        return FiniteGSet(std::move(l), std::move(pm));
    }

    void make_index_sets() {
        F_.reps.reps = fixed_and_free("a", s_.fixed_reps, "c", s_.free_rep_orbits, p_);
        F_.units.units = fixed_and_free("u", s_.fixed_units, "w", s_.free_unit_orbits, p_);
        S_.reps.reps = fixed_part(F_.reps.reps);
        S_.units.units = fixed_part(F_.units.units);
        const auto& D = F_.reps.reps;
        F_.reps.rec_M.assign(D.size(), 0);
        for (const auto& orb : orbit_decomposition(D, p_).orbits) {
            const i64 y = rand_A();
            for (std::size_t k = 0; k < orb.size(); ++k) F_.reps.rec_M[orb[k]] = act_.apply(y, static_cast<i64>(k));
        }
        for (std::size_t i = 0; i < D.size(); ++i) {
            if (D.perm[i] != i) continue;
            const i64 y = rand_S();
            F_.reps.rec_M[i] = ver(y);
            S_.reps.rec_M.push_back(y);
        }
    }

    void make_betas() {
        const auto& U = F_.units.units;
        const auto od = orbit_decomposition(fiber_, p_);
        for (const auto& orb : od.orbits) {
            const i64 ri = rand_A(), rs = rand_A(), n = rand_prime_to_p(1, 50);
            const auto u = static_cast<std::size_t>(uniform(0, static_cast<i64>(U.size()) - 1));
            for (std::size_t k = 0; k < orb.size(); ++k) {
                const auto kk = static_cast<i64>(k);
                F_.betas[fiber_.labels[orb[k]]] = {act_.apply(ri, kk), n, act_.apply(rs, kk), U.labels[U.act(u, kk)]};
            }
        }
        const i64 ri = rand_S(), rs = rand_S(), n = rand_prime_to_p(1, 10);
        const auto& fixedU = S_.units.units;
        const std::string u = fixedU.labels[static_cast<std::size_t>(uniform(0, static_cast<i64>(fixedU.size()) - 1))];
        S_.betas[beta_sub_] = {ri, n, rs, u};
        F_.betas[fiber_.labels[fixed_]] = {ver(ri), ipow(n, static_cast<int>(p_)), ver(rs), u};
        if (s_.with_sigma_p) {
            const int k = static_cast<int>(uniform(1, 2));
            for (int i = 0; i < k; ++i) {
                const i64 a = rand_S(), b = rand_S();
                S_.sigma_p.push_back({a, b});
                F_.sigma_p.push_back({ver(a), ver(b)});
            }
        }
    }

    LocalPlaceSpec place(const std::string& label, MSplitting s, PlaceDivides d, i64 q, const std::string& below = "") {
        LocalPlaceSpec v;
        v.label = label;
        v.splitting = s;
        v.divides = d;
        v.q = q;
        v.below = below;
        return v;
    }

    std::vector<LocalPlaceSpec> split_places(const std::string& base, MSplitting s, PlaceDivides d, i64 q) {
        std::vector<LocalPlaceSpec> out;
        for (i64 i = 0; i < p_; ++i) out.push_back(place(base + "." + std::to_string(i), s, d, q, base));
        return out;
    }

    void append(std::vector<LocalPlaceSpec>& ups) {
        for (auto& v : ups) F_.places.push_back(std::move(v));
    }

    void make_places() {
        const FiniteGSet cyc = cycle_gset(p_);
        const auto& D = F_.reps.reps;
        const std::string& bsub = beta_sub_;

        // split in F/F', dividing FFc
        {
            LocalPlaceSpec down = place("f", MSplitting::split_distinguished, PlaceDivides::FFc, 13);
            auto ups = split_places("f", MSplitting::split_distinguished, PlaceDivides::FFc, 13);
            const FiniteGSet X = gset_product(fiber_, cyc);
            for (const auto& orb : orbit_decomposition(X, p_).orbits) {
                const std::size_t b0 = orb[0] / cyc.size();
                const bool diag = b0 == fixed_;
                const bool unit = diag || uniform(0, 4) > 0;
                const i64 y = rand_A();
                for (std::size_t k = 0; k < orb.size(); ++k) {
                    const std::size_t b = orb[k] / cyc.size(), i = orb[k] % cyc.size();
                    ups[i].rec_w[fiber_.labels[b]] = unit ? std::optional<i64>(act_.apply(y, static_cast<i64>(k))) : std::nullopt;
                }
                if (diag) down.rec_w[bsub] = norm_down(y);
            }
            S_.places.push_back(std::move(down));
            append(ups);
        }

        // split in F/F', generic (q = 1 mod p)
        {
            const i64 q = p_ == 3 ? 7 : (p_ == 5 ? 11 : 29);
            LocalPlaceSpec down = place("g", MSplitting::split_distinguished, PlaceDivides::none, q);
            auto ups = split_places("g", MSplitting::split_distinguished, PlaceDivides::none, q);
            const FiniteGSet X = gset_product(gset_product(fiber_, D), cyc);
            for (const auto& orb : orbit_decomposition(X, p_).orbits) {
                const std::size_t ba = orb[0] / cyc.size(), b0 = ba / D.size(), a0 = ba % D.size();
                const bool diag = b0 == fixed_ && D.perm[a0] == a0;
                const int n = diag ? static_cast<int>(uniform(0, 1)) : static_cast<int>(uniform(-1, 2));
                for (std::size_t k = 0; k < orb.size(); ++k) {
                    const std::size_t x = orb[k] / cyc.size(), i = orb[k] % cyc.size();
                    ups[i].val[{fiber_.labels[x / D.size()], D.labels[x % D.size()]}] = n;
                }
                if (diag) down.val[{bsub, D.labels[a0]}] = n;
            }
            const FiniteGSet Y = gset_product(D, cyc);
            for (const auto& orb : orbit_decomposition(Y, p_).orbits) {
                const std::size_t a0 = orb[0] / cyc.size();
                const bool diag = D.perm[a0] == a0;
                for (int j = 0; j <= 3; ++j) {
                    const i64 y = rand_A();
                    for (std::size_t k = 0; k < orb.size(); ++k) {
                        const std::size_t a = orb[k] / cyc.size(), i = orb[k] % cyc.size();
                        const i64 z = act_.apply(y, static_cast<i64>(k));
                        ups[i].rec_c[D.labels[a]].push_back(z);
                        ups[i].rec_c_swapped[D.labels[a]].push_back(A_->neg(z));
                    }
                    if (diag) {
                        const i64 z = norm_down(y);
                        down.rec_c[D.labels[a0]].push_back(z);
                        down.rec_c_swapped[D.labels[a0]].push_back(Asub_->neg(z));
                    }
                }
            }
            S_.places.push_back(std::move(down));
            append(ups);
        }

        // inert in F/F', generic
        {
            LocalPlaceSpec down = place("n", MSplitting::inert, PlaceDivides::none, 2);
            LocalPlaceSpec up = place("N", MSplitting::inert, PlaceDivides::none, ipow(2, static_cast<int>(p_)), "n");
            const FiniteGSet X = gset_product(fiber_, D);
            const auto od = orbit_decomposition(X, p_);
            for (const auto& orb : od.orbits) {
                const int n = static_cast<int>(uniform(-1, 2));
                for (std::size_t x : orb) up.val[{fiber_.labels[x / D.size()], D.labels[x % D.size()]}] = n;
            }
            for (std::size_t x : od.fixed) {
                const int n = static_cast<int>(uniform(0, 1));
                up.val[{fiber_.labels[x / D.size()], D.labels[x % D.size()]}] = n;
                down.val[{bsub, D.labels[x % D.size()]}] = n;
            }
            const auto oa = orbit_decomposition(D, p_);
            for (int j = 0; j <= 3; ++j) {
                for (const auto& orb : oa.orbits) {
                    const i64 y = rand_A();
                    for (std::size_t k = 0; k < orb.size(); ++k) up.rec_c[D.labels[orb[k]]].push_back(act_.apply(y, static_cast<i64>(k)));
                }
                for (std::size_t a : oa.fixed) {
                    const i64 y = rand_S();
                    up.rec_c[D.labels[a]].push_back(ver(y));
                    down.rec_c[D.labels[a]].push_back(y);
                }
            }
            S_.places.push_back(std::move(down));
            F_.places.push_back(std::move(up));
        }

        if (s_.with_iD) make_iD_places(cyc);

        S_.places.push_back(place("p", MSplitting::split_distinguished, PlaceDivides::p, p_));
        F_.places.push_back(place("P", MSplitting::split_distinguished, PlaceDivides::p, p_, "p"));
    }

    // Primitive element of F_(l^2) = F_l[theta], theta^2 = D.
    static std::pair<i64, i64> primitive_element(i64 l, i64 D) {
        const i64 order = l * l - 1;
        for (i64 a = 0; a < l; ++a)
            for (i64 b = 1; b < l; ++b) {
                i64 x = a, y = b, k = 1;
                while (!(x == 1 && y == 0)) {
                    const i64 nx = mod(x * a + mod(y * b, l) * D, l), ny = mod(x * b + y * a, l);
                    x = nx;
                    y = ny;
                    ++k;
                }
                if (k == order) return {a, b};
            }
        throw Error("synthetic: no primitive element");
    }

    // Random image for a generator of order o.
    i64 image_of_order(i64 o) {
        const i64 e = A_->invariant_factors().back();
        return A_->scalar(e / std::gcd(o, e), rand_A());
    }

    void make_iD_places(const FiniteGSet& cyc) {
        const i64 l = p_ == 3 ? 7 : (p_ == 5 ? 11 : 13);
        LocalModel base;
        base.ell = l;
        base.m = 1;
        base.ramified = s_.ramified_iD;
        std::vector<i64> orders;
        if (s_.ramified_iD) {
            base.D = l * 3;
            i64 r = 2;
            while (multiplicative_order(r, l) != l - 1) ++r;
            base.unit_gens = {{r, 0}, {1, 1}};
            orders = {l - 1, l};
        } else {
            base.D = 2;
            while (kronecker(base.D, l) != -1) ++base.D;
            base.unit_gens = {primitive_element(l, base.D)};
            orders = {l * l - 1};
        }
        std::vector<i64> ys;
        for (i64 o : orders) ys.push_back(image_of_order(o));
        const i64 ypi = rand_A();
        const MSplitting ms = s_.ramified_iD ? MSplitting::ramified : MSplitting::inert;
        LocalPlaceSpec down = place("i", ms, PlaceDivides::iD, l);
        auto ups = split_places("i", ms, PlaceDivides::iD, l);
        down.model = base;
        for (i64 y : ys) down.model.unit_images.push_back(norm_down(y));
        down.model.pi_image = norm_down(ypi);
        const i64 dd = uniform(1, l - 1);
        const Rational t(uniform(1, l - 1), l);
        down.d = dd;
        down.t = t;
        for (std::size_t i = 0; i < ups.size(); ++i) {
            ups[i].model = base;
            for (i64 y : ys) ups[i].model.unit_images.push_back(act_.apply(y, static_cast<i64>(i)));
            ups[i].model.pi_image = act_.apply(ypi, static_cast<i64>(i));
            ups[i].d = p_ * dd;
            ups[i].t = t;
        }
        auto local_value = [&] { return uniform(0, 4) > 0 ? rand_prime_to_p_and(l) : l * uniform(1, l - 1); };
        const FiniteGSet X = gset_product(fiber_, cyc);
        for (const auto& orb : orbit_decomposition(X, p_).orbits) {
            const std::size_t b0 = orb[0] / cyc.size();
            const Rational x(local_value());
            for (std::size_t k : orb) ups[k % cyc.size()].beta_local[fiber_.labels[k / cyc.size()]] = x;
            if (b0 == fixed_) down.beta_local[beta_sub_] = x;
        }
        S_.places.push_back(std::move(down));
        append(ups);
    }

    i64 rand_prime_to_p_and(i64 l) {
        for (;;) {
            const i64 x = uniform(1, 3 * l);
            if (x % l != 0) return x;
        }
    }

    static i64 multiplicative_order(i64 r, i64 l) {
        i64 x = r % l, k = 1;
        while (x != 1) {
            x = x * r % l;
            ++k;
        }
        return k;
    }

    SyntheticSettings s_;
    std::mt19937_64& rng_;
    i64 p_;
    GroupPtr A_, Asub_;
    CyclicAction act_;
    GroupHom ver_;
    FiniteGSet fiber_;
    std::size_t fixed_ = 0;
    std::string beta_sub_;
    CoefficientSide F_, S_;
};

}  // namespace detail

inline SyntheticInstance synthetic_transfer_instance(const SyntheticSettings& s, std::mt19937_64& rng) {
    return detail::SyntheticBuilder(s, rng).build();
}

// Raises val_v(beta' c(a')) by one at the inert place for one fixed
// representative a', chosen so that the change has augmentation prime to p
// (hence lies outside the trace ideal). Returns the label of the fixed
// index (beta', a', u) whose residual now fails, or nullopt when no fixed
// representative gives a visible change.
inline std::optional<std::string> perturb_fixed_point(SyntheticInstance& s, std::mt19937_64& rng) {
    TransferInstance& I = s.inst;
    if (!I.F.sigma_p.empty()) throw InputError("perturb_fixed_point: needs an empty Sigma_p (the modification factor kills augmentation)");
    auto vit = std::find_if(I.F.places.begin(), I.F.places.end(), [&](const LocalPlaceSpec& v) { return v.label == s.inert_place; });
    if (vit == I.F.places.end()) throw InputError("perturb_fixed_point: no place " + s.inert_place);
    std::vector<std::string> cands = I.Fsub.reps.reps.labels;
    std::shuffle(cands.begin(), cands.end(), rng);
    const CycloModPN R(I.R, I.conductor());
    const std::string& u = I.F.beta(s.fixed_beta).unit_class;
    for (const auto& a : cands) {
        auto& n = vit->val.at({s.fixed_beta, a});
        if (n + 1 >= static_cast<int>(vit->rec_c.at(a).size())) continue;
        const LambdaCyclo before = assemble_A(I.F, s.fixed_beta, a, u, R);
        ++n;
        const LambdaCyclo delta = assemble_A(I.F, s.fixed_beta, a, u, R) - before;
        const auto aug = delta.augmentation();
        if (std::any_of(aug.begin(), aug.end(), [&](i64 c) { return c % I.p() != 0; })) return detail::gamma_label(s.fixed_beta, a, u);
        --n;
    }
    return std::nullopt;
}

}  // namespace tcong
