#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tcong/eiscoeff.hpp"
#include "tcong/iwalg.hpp"
#include "tcong/k1patch.hpp"
#include "tcong/qexpand.hpp"

namespace tcong {

// Schema or cross-reference failure in a workspace file, with the 1-based
// line of the offending node (0 when unknown).
struct WorkspaceError : InputError {
    int line = 0;
    WorkspaceError(int l, const std::string& what) : InputError(l > 0 ? "line " + std::to_string(l) + ": " + what : what), line(l) {}
};

inline constexpr const char* kWorkspaceFormat = "tcong-workspace/1";

struct TraceTestSpec {
    std::string name, action, element;
    std::optional<bool> expect;
};

struct FamilySpec {
    std::string name, tower;
    MeasureFamily family;
    std::map<std::string, bool> expect;  // condition -> expected verdict
};

struct FiberSpec {
    std::string beta_sub;
    FiniteGSet fiber;
    std::optional<bool> expect;
};

struct TransferSpec {
    TransferInstance base;  // everything except the fiber and beta'
    std::vector<FiberSpec> fibers;

    TransferInstance instance(const FiberSpec& f) const {
        TransferInstance I = base;
        I.fiber = f.fiber;
        I.beta_sub = f.beta_sub;
        return I;
    }
};

struct ExpansionSpec {
    std::string name;
    FieldTower tower;
    FieldLattice lattice, sublattice;
    std::optional<QExpansion<ZmodPN>> f;
    std::optional<std::map<Coords, LambdaElt>> expect;  // restricted coefficients, zero when absent
};

struct Workspace {
    i64 p = 3;
    int N = 1;
    std::uint64_t seed = 0;
    ZmodPN R;
    std::map<std::string, GroupPtr> groups;
    std::map<std::string, GroupHom> homs;
    std::map<std::string, CyclicAction> actions;
    std::map<std::string, LambdaElt> elements;
    std::vector<TraceTestSpec> trace_tests;
    std::map<std::string, TowerData> towers;
    std::vector<FamilySpec> families;
    std::optional<TransferSpec> transfer;
    std::vector<ExpansionSpec> expansions;
};

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

[[noreturn]] inline void fail(const YAML::Node& n, const std::string& what) { throw WorkspaceError(line_of(n), what); }

inline void allow_keys(const YAML::Node& n, const std::string& where, std::initializer_list<const char*> keys) {
    if (!n.IsMap()) fail(n, where + ": expected a mapping");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = n.begin(); it != n.end(); ++it) {
        const std::string k = it->first.as<std::string>();
        if (!ok.count(k)) fail(it->first, where + ": unknown key '" + k + "'");
    }
}

inline YAML::Node need(const YAML::Node& n, const char* key, const std::string& where) {
    const YAML::Node v = n[key];
    if (!v.IsDefined() || v.IsNull()) fail(n, where + ": missing '" + key + "'");
    return v;
}

inline std::string as_str(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + ": expected a scalar");
    return n.Scalar();
}

inline i64 as_int(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + ": expected an integer");
    try {
        std::size_t pos = 0;
        const std::string s = n.Scalar();
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(n, what + ": '" + n.Scalar() + "' is not an integer");
    }
}

inline bool as_bool(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + ": expected true or false");
    const std::string s = n.Scalar();
    if (s == "true") return true;
    if (s == "false") return false;
    fail(n, what + ": expected true or false, got '" + s + "'");
}

inline Rational as_rational(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + ": expected a rational");
    const std::string s = n.Scalar();
    try {
        const auto slash = s.find('/');
        if (slash == std::string::npos) return Rational(BigInt(s));
        const BigInt den(s.substr(slash + 1));
        if (den == 0) fail(n, what + ": zero denominator");
        return Rational(BigInt(s.substr(0, slash)), den);
    } catch (const WorkspaceError&) {
        throw;
    } catch (const std::exception&) {
        fail(n, what + ": '" + s + "' is not a rational");
    }
}

inline std::vector<i64> int_list(const YAML::Node& n, const std::string& what) {
    if (!n.IsSequence()) fail(n, what + ": expected a list");
    std::vector<i64> v;
    for (const auto& x : n) v.push_back(as_int(x, what));
    return v;
}

template <class F>
auto guarded(const YAML::Node& n, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const WorkspaceError&) {
        throw;
    } catch (const Error& e) {
        fail(n, e.what());
    }
}

// An element of G: an integer when G is cyclic, else a coordinate list.
inline i64 as_element(const YAML::Node& n, const GroupPtr& G, const std::string& what) {
    if (n.IsScalar()) {
        if (G->rank() != 1) fail(n, what + ": element of " + G->str() + " needs a coordinate list");
        return mod(as_int(n, what), G->orders()[0]);
    }
    auto c = int_list(n, what);
    if (c.size() != G->rank()) fail(n, what + ": expected " + std::to_string(G->rank()) + " coordinates");
    return G->encode(c);
}

inline LambdaElt as_lambda(const YAML::Node& n, const GroupPtr& G, const ZmodPN& R, const std::string& what) {
    if (!n.IsSequence()) fail(n, what + ": expected a list of [element, coefficient] terms");
    LambdaElt x(G, R);
    for (const auto& t : n) {
        if (!t.IsSequence() || t.size() != 2) fail(t, what + ": each term is [element, coefficient]");
        x.add_term(as_element(t[0], G, what), R.from_int(as_int(t[1], what)));
    }
    return x;
}

template <class T>
const T& lookup(const std::map<std::string, T>& m, const YAML::Node& n, const std::string& kind) {
    const std::string name = as_str(n, kind);
    auto it = m.find(name);
    if (it == m.end()) fail(n, "unknown " + kind + " '" + name + "'");
    return it->second;
}

// Labelled set with the generator action: [{label, sigma}], sigma defaults
// to the label itself.
inline FiniteGSet as_gset(const YAML::Node& n, const std::string& what) {
    if (!n.IsSequence()) fail(n, what + ": expected a list");
    std::vector<std::string> labels, images;
    for (const auto& e : n) {
        allow_keys(e, what, {"label", "sigma", "rec_M"});
        labels.push_back(as_str(need(e, "label", what), what));
        images.push_back(e["sigma"] ? as_str(e["sigma"], what) : labels.back());
    }
    std::vector<std::size_t> perm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = std::find(labels.begin(), labels.end(), images[i]);
        if (it == labels.end()) fail(n[i], what + ": sigma image '" + images[i] + "' is not a label");
        perm.push_back(static_cast<std::size_t>(it - labels.begin()));
    }
    return guarded(n, [&] { return FiniteGSet(labels, perm); });
}

inline MSplitting as_splitting(const YAML::Node& n) {
    const std::string s = as_str(n, "splitting");
    for (auto m : {MSplitting::split_distinguished, MSplitting::split_generic, MSplitting::inert, MSplitting::ramified})
        if (to_string(m) == s) return m;
    fail(n, "splitting: unknown value '" + s + "'");
}

inline PlaceDivides as_divides(const YAML::Node& n) {
    const std::string s = as_str(n, "divides");
    for (auto d : {PlaceDivides::none, PlaceDivides::p, PlaceDivides::FFc, PlaceDivides::iD})
        if (to_string(d) == s) return d;
    fail(n, "divides: unknown value '" + s + "'");
}

inline LocalPlaceSpec parse_place(const YAML::Node& n, const GroupPtr& A) {
    const std::string where = "place";
    allow_keys(n, where, {"label", "below", "splitting", "divides", "q", "rec_w", "rec_products", "rec_c", "rec_c_swapped", "val", "model", "d",
                          "t", "beta_local", "j0", "j1"});
    LocalPlaceSpec v;
    v.label = as_str(need(n, "label", where), where);
    const std::string at = "place " + v.label;
    if (n["below"]) v.below = as_str(n["below"], at);
    v.splitting = as_splitting(need(n, "splitting", at));
    v.divides = as_divides(need(n, "divides", at));
    v.q = as_int(need(n, "q", at), at + ": q");
    if (const auto& r = n["rec_w"]) {
        if (!r.IsMap()) fail(r, at + ": rec_w must map beta labels to elements or null");
        for (auto it = r.begin(); it != r.end(); ++it)
            v.rec_w[it->first.as<std::string>()] = it->second.IsNull() ? std::nullopt : std::optional<i64>(as_element(it->second, A, at + ": rec_w"));
    }
    if (const auto& r = n["rec_products"]) {
        if (!r.IsSequence()) fail(r, at + ": rec_products must be a list of [x, y, z]");
        for (const auto& t : r) {
            if (!t.IsSequence() || t.size() != 3) fail(t, at + ": rec_products entries are [x, y, z]");
            v.rec_products.push_back({as_str(t[0], at), as_str(t[1], at), as_str(t[2], at)});
        }
    }
    for (auto [key, tab] : {std::pair{"rec_c", &v.rec_c}, std::pair{"rec_c_swapped", &v.rec_c_swapped}}) {
        const auto& r = n[key];
        if (!r) continue;
        if (!r.IsMap()) fail(r, at + ": " + key + " must map representatives to element lists");
        for (auto it = r.begin(); it != r.end(); ++it) {
            if (!it->second.IsSequence()) fail(it->second, at + ": " + key + " entries are lists");
            auto& out = (*tab)[it->first.as<std::string>()];
            for (const auto& e : it->second) out.push_back(as_element(e, A, at + ": " + key));
        }
    }
    if (const auto& r = n["val"]) {
        if (!r.IsSequence()) fail(r, at + ": val must be a list of [beta, a, n]");
        for (const auto& t : r) {
            if (!t.IsSequence() || t.size() != 3) fail(t, at + ": val entries are [beta, a, n]");
            v.val[{as_str(t[0], at), as_str(t[1], at)}] = static_cast<int>(as_int(t[2], at + ": val"));
        }
    }
    if (const auto& m = n["model"]) {
        allow_keys(m, at + ": model", {"ell", "D", "ramified", "m", "unit_gens", "unit_images", "pi_image"});
        v.model.ell = as_int(need(m, "ell", at), at + ": ell");
        v.model.D = as_int(need(m, "D", at), at + ": D");
        v.model.ramified = m["ramified"] ? as_bool(m["ramified"], at) : false;
        v.model.m = m["m"] ? static_cast<int>(as_int(m["m"], at)) : 1;
        for (const auto& g : need(m, "unit_gens", at)) {
            if (!g.IsSequence() || g.size() != 2) fail(g, at + ": unit generators are [a, b] for a + b theta");
            v.model.unit_gens.push_back({as_int(g[0], at), as_int(g[1], at)});
        }
        for (const auto& y : need(m, "unit_images", at)) v.model.unit_images.push_back(as_element(y, A, at + ": unit_images"));
        v.model.pi_image = as_element(need(m, "pi_image", at), A, at + ": pi_image");
    }
    if (n["d"]) v.d = as_rational(n["d"], at + ": d");
    if (n["t"]) v.t = as_rational(n["t"], at + ": t");
    if (const auto& r = n["beta_local"]) {
        if (!r.IsMap()) fail(r, at + ": beta_local must map beta labels to rationals");
        for (auto it = r.begin(); it != r.end(); ++it) v.beta_local[it->first.as<std::string>()] = as_rational(it->second, at + ": beta_local");
    }
    if (n["j0"]) v.j0 = static_cast<int>(as_int(n["j0"], at));
    if (n["j1"]) v.j1 = static_cast<int>(as_int(n["j1"], at));
    return v;
}

inline CoefficientSide parse_side(const YAML::Node& n, const GroupPtr& A, const std::string& where) {
    allow_keys(n, where, {"places", "betas", "reps", "units", "sigma_p"});
    CoefficientSide S;
    S.A = A;
    for (const auto& v : need(n, "places", where)) S.places.push_back(parse_place(v, A));
    const auto& b = need(n, "betas", where);
    if (!b.IsMap()) fail(b, where + ": betas must be a mapping");
    for (auto it = b.begin(); it != b.end(); ++it) {
        const std::string at = where + ": beta " + it->first.as<std::string>();
        allow_keys(it->second, at, {"rec_inf", "norm", "rec_sigma_p", "unit_class"});
        BetaData d;
        d.rec_inf = as_element(need(it->second, "rec_inf", at), A, at);
        d.norm = as_int(need(it->second, "norm", at), at);
        d.rec_sigma_p = it->second["rec_sigma_p"] ? as_element(it->second["rec_sigma_p"], A, at) : 0;
        d.unit_class = as_str(need(it->second, "unit_class", at), at);
        S.betas[it->first.as<std::string>()] = d;
    }
    const auto& reps = need(n, "reps", where);
    S.reps.reps = as_gset(reps, where + ": reps");
    for (const auto& r : reps) S.reps.rec_M.push_back(as_element(need(r, "rec_M", where + ": reps"), A, where + ": rec_M"));
    S.units.units = as_gset(need(n, "units", where), where + ": units");
    if (const auto& sp = n["sigma_p"]) {
        for (const auto& f : sp) {
            allow_keys(f, where + ": sigma_p", {"rec_w", "rec_wbar"});
            S.sigma_p.push_back({as_element(need(f, "rec_w", where), A, where), as_element(need(f, "rec_wbar", where), A, where)});
        }
    }
    return S;
}

inline TowerData parse_tower(const YAML::Node& n, const Workspace& W, const std::string& name) {
    const std::string at = "tower " + name;
    allow_keys(n, at, {"builtin", "levels"});
    if (const auto& b = n["builtin"]) {
        allow_keys(b, at + ": builtin", {"kind", "R", "M", "h"});
        const std::string kind = as_str(need(b, "kind", at), at);
        const int R = static_cast<int>(as_int(need(b, "R", at), at + ": R"));
        return guarded(b, [&] {
            if (kind == "abelian_cyclic") return abelian_cyclic_tower(W.p, R, W.N, b["h"] ? static_cast<int>(as_int(b["h"], at)) : 1);
            if (kind == "false_tate") return false_tate_tower(W.p, R, static_cast<int>(as_int(need(b, "M", at), at + ": M")), W.N);
            fail(b, at + ": unknown builtin kind '" + kind + "'");
        });
    }
    std::vector<TowerLevel> levels;
    for (const auto& l : need(n, "levels", at)) {
        allow_keys(l, at + ": level", {"r", "group", "action", "gamma", "ver", "norm", "eta", "kappa"});
        TowerLevel L;
        L.r = static_cast<int>(as_int(need(l, "r", at), at + ": r"));
        L.group = lookup(W.groups, need(l, "group", at), "group");
        const auto& a = l["action"];
        if (!a || (a.IsScalar() && a.Scalar() == "trivial")) L.action = CyclicAction::trivial(L.group, W.p);
        else L.action = lookup(W.actions, a, "action");
        if (const auto& g = l["gamma"])
            for (const auto& h : g) L.gamma.push_back(lookup(W.homs, h, "hom"));
        if (l["ver"]) L.ver = lookup(W.homs, l["ver"], "hom");
        if (const auto& nm = l["norm"]) {
            allow_keys(nm, at + ": norm", {"inclusion"});
            const GroupHom& inc = lookup(W.homs, need(nm, "inclusion", at), "hom");
            L.norm = Subgroup{inc.source(), inc};
        }
        if (const auto& e = l["eta"]) {
            allow_keys(e, at + ": eta", {"conductor", "exponents"});
            L.eta = guarded(e, [&] { return CharacterData(L.group, as_int(need(e, "conductor", at), at), int_list(need(e, "exponents", at), at)); });
        }
        if (l["kappa"]) L.kappa = int_list(l["kappa"], at + ": kappa");
        levels.push_back(std::move(L));
    }
    return guarded(n, [&] { return TowerData(W.R, std::move(levels)); });
}

inline ExpansionSpec parse_expansion(const YAML::Node& n, const Workspace& W, const std::string& name) {
    const std::string at = "expansion " + name;
    allow_keys(n, at, {"tower", "group", "trace_bound", "lattice", "sublattice", "terms", "expect"});
    ExpansionSpec e;
    e.name = name;
    const auto& t = need(n, "tower", at);
    allow_keys(t, at + ": tower", {"kind", "p", "r"});
    if (as_str(need(t, "kind", at), at) != "real_cyclotomic") fail(t, at + ": only real_cyclotomic towers are supported");
    const i64 tp = as_int(need(t, "p", at), at);
    if (tp != W.p) fail(t, at + ": tower prime differs from the workspace prime");
    e.tower = guarded(t, [&] { return real_cyclotomic_tower(tp, static_cast<int>(as_int(need(t, "r", at), at))); });
    auto lattice = [&](const char* key, std::size_t d) {
        if (!n[key]) return FieldLattice::integers(d);
        FieldLattice L;
        for (const auto& row : n[key]) {
            QVector r;
            for (const auto& x : row) r.push_back(as_rational(x, at + ": lattice"));
            if (r.size() != d) fail(row, at + ": lattice rows need " + std::to_string(d) + " entries");
            L.basis.push_back(std::move(r));
        }
        if (L.basis.size() != d) fail(n[key], at + ": lattice needs " + std::to_string(d) + " rows");
        return L;
    };
    e.lattice = lattice("lattice", e.tower.F->degree());
    e.sublattice = lattice("sublattice", e.tower.Fsub->degree());
    const GroupPtr& G = lookup(W.groups, need(n, "group", at), "group");
    const Rational bound = as_rational(need(n, "trace_bound", at), at + ": trace_bound");
    e.f.emplace(guarded(n, [&] { return QExpansion<ZmodPN>(e.tower.F, e.lattice, bound, G, W.R); }));
    auto coords = [&](const YAML::Node& c, std::size_t d) {
        Coords out;
        for (i64 x : int_list(c, at + ": beta")) out.push_back(BigInt(x));
        if (out.size() != d) fail(c, at + ": beta needs " + std::to_string(d) + " coordinates");
        return out;
    };
    for (const auto& term : need(n, "terms", at)) {
        allow_keys(term, at + ": term", {"beta", "coeff"});
        const Coords b = coords(need(term, "beta", at), e.tower.F->degree());
        const LambdaElt c = as_lambda(need(term, "coeff", at), G, W.R, at);
        guarded(term, [&] { e.f->add_term(b, c); });
    }
    if (const auto& ex = n["expect"]) {
        e.expect.emplace();
        for (const auto& term : ex) {
            allow_keys(term, at + ": expect", {"beta", "coeff"});
            (*e.expect)[coords(need(term, "beta", at), e.tower.Fsub->degree())] = as_lambda(need(term, "coeff", at), G, W.R, at);
        }
    }
    return e;
}

}  // namespace detail

// Parses and validates a workspace document. Every cross-reference and
// every table is checked here, before any command runs.
inline Workspace parse_workspace(const std::string& text) {
    using namespace detail;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw WorkspaceError(e.mark.line >= 0 ? e.mark.line + 1 : 0, std::string("YAML syntax: ") + e.msg);
    }
    if (!root.IsMap()) throw WorkspaceError(1, "workspace must be a mapping");
    allow_keys(root, "workspace",
               {"format", "p", "N", "seed", "groups", "homs", "actions", "elements", "trace_tests", "towers", "families", "transfer", "expansions"});
    if (as_str(need(root, "format", "workspace"), "format") != kWorkspaceFormat)
        fail(root["format"], std::string("format: expected '") + kWorkspaceFormat + "'");
    Workspace W;
    W.p = as_int(need(root, "p", "workspace"), "p");
    W.N = static_cast<int>(as_int(need(root, "N", "workspace"), "N"));
    const i64 seed = as_int(need(root, "seed", "workspace"), "seed");
    if (seed < 0) fail(root["seed"], "seed must be nonnegative");
    W.seed = static_cast<std::uint64_t>(seed);
    if (W.p < 3 || !is_prime(W.p)) fail(root["p"], "p must be an odd prime");
    W.R = guarded(root["N"], [&] { return ZmodPN(W.p, W.N); });

    if (const auto& g = root["groups"]) {
        if (!g.IsMap()) fail(g, "groups must be a mapping");
        for (auto it = g.begin(); it != g.end(); ++it) {
            const std::string name = it->first.as<std::string>();
            const auto& v = it->second;
            W.groups[name] = guarded(v, [&] {
                if (v.IsSequence()) return make_group(int_list(v, "group " + name));
                allow_keys(v, "group " + name, {"orders", "labels"});
                std::vector<std::string> labels;
                if (v["labels"])
                    for (const auto& l : v["labels"]) labels.push_back(as_str(l, "group " + name));
                return make_group(int_list(need(v, "orders", name), "group " + name), labels);
            });
        }
    }
    if (const auto& h = root["homs"]) {
        if (!h.IsMap()) fail(h, "homs must be a mapping");
        for (auto it = h.begin(); it != h.end(); ++it) {
            const std::string name = it->first.as<std::string>();
            const auto& v = it->second;
            allow_keys(v, "hom " + name, {"source", "target", "matrix"});
            const GroupPtr& s = lookup(W.groups, need(v, "source", name), "group");
            const GroupPtr& t = lookup(W.groups, need(v, "target", name), "group");
            std::vector<std::vector<i64>> M;
            for (const auto& row : need(v, "matrix", name)) M.push_back(int_list(row, "hom " + name));
            W.homs[name] = guarded(v, [&] { return GroupHom(s, t, M); });
        }
    }
    if (const auto& a = root["actions"]) {
        if (!a.IsMap()) fail(a, "actions must be a mapping");
        for (auto it = a.begin(); it != a.end(); ++it) {
            const std::string name = it->first.as<std::string>();
            allow_keys(it->second, "action " + name, {"sigma"});
            const GroupHom& s = lookup(W.homs, need(it->second, "sigma", name), "hom");
            W.actions[name] = guarded(it->second, [&] { return CyclicAction(s, W.p); });
        }
    }
    if (const auto& e = root["elements"]) {
        if (!e.IsMap()) fail(e, "elements must be a mapping");
        for (auto it = e.begin(); it != e.end(); ++it) {
            const std::string name = it->first.as<std::string>();
            allow_keys(it->second, "element " + name, {"group", "terms"});
            const GroupPtr& G = lookup(W.groups, need(it->second, "group", name), "group");
            W.elements.emplace(name, as_lambda(need(it->second, "terms", name), G, W.R, "element " + name));
        }
    }
    if (const auto& t = root["trace_tests"]) {
        for (const auto& x : t) {
            allow_keys(x, "trace test", {"name", "action", "element", "expect"});
            TraceTestSpec s;
            s.name = as_str(need(x, "name", "trace test"), "trace test");
            s.action = as_str(need(x, "action", s.name), s.name);
            s.element = as_str(need(x, "element", s.name), s.name);
            const CyclicAction& act = lookup(W.actions, x["action"], "action");
            const LambdaElt& el = lookup(W.elements, x["element"], "element");
            if (!same_group(act.group, el.group())) fail(x, "trace test " + s.name + ": element and action live on different groups");
            if (x["expect"]) s.expect = as_bool(x["expect"], s.name);
            W.trace_tests.push_back(std::move(s));
        }
    }
    if (const auto& t = root["towers"]) {
        if (!t.IsMap()) fail(t, "towers must be a mapping");
        for (auto it = t.begin(); it != t.end(); ++it) {
            const std::string name = it->first.as<std::string>();
            W.towers.emplace(name, parse_tower(it->second, W, name));
        }
    }
    if (const auto& f = root["families"]) {
        for (const auto& x : f) {
            allow_keys(x, "family", {"name", "tower", "kind", "elements", "expect"});
            FamilySpec s;
            s.name = as_str(need(x, "name", "family"), "family");
            s.tower = as_str(need(x, "tower", s.name), s.name);
            const TowerData& T = lookup(W.towers, x["tower"], "tower");
            const std::string kind = x["kind"] ? as_str(x["kind"], s.name) : "explicit";
            if (kind == "constant") {
                s.family = constant_family(T);
            } else if (kind == "explicit") {
                for (const auto& e : need(x, "elements", s.name)) s.family.x.push_back(lookup(W.elements, e, "element"));
                guarded(x, [&] { detail::check_family(s.family, T); });
            } else {
                fail(x["kind"], "family " + s.name + ": kind must be explicit or constant");
            }
            if (const auto& ex = x["expect"]) {
                allow_keys(ex, "family " + s.name + ": expect", {"MS1", "MS2", "MS3"});
                for (auto it = ex.begin(); it != ex.end(); ++it) s.expect[it->first.as<std::string>()] = as_bool(it->second, s.name);
            }
            W.families.push_back(std::move(s));
        }
    }
    if (const auto& t = root["transfer"]) {
        allow_keys(t, "transfer", {"action", "ver", "field", "subfield", "fibers"});
        TransferSpec S;
        S.base.R = W.R;
        S.base.target.action = lookup(W.actions, need(t, "action", "transfer"), "action");
        S.base.target.ver = lookup(W.homs, need(t, "ver", "transfer"), "hom");
        S.base.F = parse_side(need(t, "field", "transfer"), S.base.target.action.group, "transfer: field");
        S.base.Fsub = parse_side(need(t, "subfield", "transfer"), S.base.target.ver.source(), "transfer: subfield");
        for (const auto& f : need(t, "fibers", "transfer")) {
            allow_keys(f, "fiber", {"beta_sub", "elements", "expect"});
            FiberSpec fs;
            fs.beta_sub = as_str(need(f, "beta_sub", "fiber"), "fiber");
            fs.fiber = as_gset(need(f, "elements", "fiber " + fs.beta_sub), "fiber " + fs.beta_sub);
            if (f["expect"]) fs.expect = as_bool(f["expect"], "fiber");
            TransferInstance I = S.instance(fs);
            guarded(f, [&] { I.prepare(); });
            S.fibers.push_back(std::move(fs));
        }
        W.transfer = std::move(S);
    }
    if (const auto& e = root["expansions"]) {
        if (!e.IsMap()) fail(e, "expansions must be a mapping");
        for (auto it = e.begin(); it != e.end(); ++it) W.expansions.push_back(parse_expansion(it->second, W, it->first.as<std::string>()));
    }
    return W;
}

inline Workspace load_workspace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw WorkspaceError(0, "cannot open workspace file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_workspace(ss.str());
}

// ---- emission ------------------------------------------------------------

namespace detail {

inline void emit_element(YAML::Emitter& out, const GroupPtr& G, i64 x) {
    if (G->rank() == 1) {
        out << x;
        return;
    }
    out << YAML::Flow << YAML::BeginSeq;
    for (i64 c : G->decode(x)) out << c;
    out << YAML::EndSeq;
}

inline std::string rational_str(const Rational& r) {
    std::ostringstream os;
    os << numerator(r);
    if (denominator(r) != 1) os << "/" << denominator(r);
    return os.str();
}

inline void emit_gset(YAML::Emitter& out, const FiniteGSet& X, const std::vector<i64>* recM, const GroupPtr& G) {
    out << YAML::BeginSeq;
    for (std::size_t i = 0; i < X.size(); ++i) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "label" << YAML::Value << X.labels[i];
        if (X.perm[i] != i) out << YAML::Key << "sigma" << YAML::Value << X.labels[X.perm[i]];
        if (recM) {
            out << YAML::Key << "rec_M" << YAML::Value;
            emit_element(out, G, (*recM)[i]);
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
}

inline void emit_side(YAML::Emitter& out, const CoefficientSide& S) {
    const GroupPtr& A = S.A;
    out << YAML::BeginMap;
    out << YAML::Key << "places" << YAML::Value << YAML::BeginSeq;
    for (const auto& v : S.places) {
        out << YAML::BeginMap;
        out << YAML::Key << "label" << YAML::Value << v.label;
        if (!v.below.empty()) out << YAML::Key << "below" << YAML::Value << v.below;
        out << YAML::Key << "splitting" << YAML::Value << to_string(v.splitting);
        out << YAML::Key << "divides" << YAML::Value << to_string(v.divides);
        out << YAML::Key << "q" << YAML::Value << v.q;
        if (!v.rec_w.empty()) {
            out << YAML::Key << "rec_w" << YAML::Value << YAML::BeginMap;
            for (const auto& [b, r] : v.rec_w) {
                out << YAML::Key << b << YAML::Value;
                if (r) emit_element(out, A, *r);
                else out << YAML::Null;
            }
            out << YAML::EndMap;
        }
        if (!v.rec_products.empty()) {
            out << YAML::Key << "rec_products" << YAML::Value << YAML::BeginSeq;
            for (const auto& t : v.rec_products) out << YAML::Flow << YAML::BeginSeq << t[0] << t[1] << t[2] << YAML::EndSeq;
            out << YAML::EndSeq;
        }
        for (auto [key, tab] : {std::pair{"rec_c", &v.rec_c}, std::pair{"rec_c_swapped", &v.rec_c_swapped}}) {
            if (tab->empty()) continue;
            out << YAML::Key << key << YAML::Value << YAML::BeginMap;
            for (const auto& [a, rs] : *tab) {
                out << YAML::Key << a << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (i64 r : rs) emit_element(out, A, r);
                out << YAML::EndSeq;
            }
            out << YAML::EndMap;
        }
        if (!v.val.empty()) {
            out << YAML::Key << "val" << YAML::Value << YAML::BeginSeq;
            for (const auto& [k, n] : v.val) out << YAML::Flow << YAML::BeginSeq << k.first << k.second << n << YAML::EndSeq;
            out << YAML::EndSeq;
        }
        if (v.divides == PlaceDivides::iD) {
            const LocalModel& m = v.model;
            out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "ell" << YAML::Value << m.ell << YAML::Key << "D" << YAML::Value << m.D;
            out << YAML::Key << "ramified" << YAML::Value << m.ramified << YAML::Key << "m" << YAML::Value << m.m;
            out << YAML::Key << "unit_gens" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (const auto& [a, b] : m.unit_gens) out << YAML::Flow << YAML::BeginSeq << a << b << YAML::EndSeq;
            out << YAML::EndSeq;
            out << YAML::Key << "unit_images" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (i64 y : m.unit_images) emit_element(out, A, y);
            out << YAML::EndSeq;
            out << YAML::Key << "pi_image" << YAML::Value;
            emit_element(out, A, m.pi_image);
            out << YAML::EndMap;
            out << YAML::Key << "d" << YAML::Value << rational_str(v.d);
            out << YAML::Key << "t" << YAML::Value << rational_str(v.t);
            out << YAML::Key << "beta_local" << YAML::Value << YAML::BeginMap;
            for (const auto& [b, x] : v.beta_local) out << YAML::Key << b << YAML::Value << rational_str(x);
            out << YAML::EndMap;
            if (v.j0) out << YAML::Key << "j0" << YAML::Value << *v.j0;
            if (v.j1) out << YAML::Key << "j1" << YAML::Value << *v.j1;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "betas" << YAML::Value << YAML::BeginMap;
    for (const auto& [b, d] : S.betas) {
        out << YAML::Key << b << YAML::Value << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "rec_inf" << YAML::Value;
        emit_element(out, A, d.rec_inf);
        out << YAML::Key << "norm" << YAML::Value << d.norm;
        out << YAML::Key << "rec_sigma_p" << YAML::Value;
        emit_element(out, A, d.rec_sigma_p);
        out << YAML::Key << "unit_class" << YAML::Value << d.unit_class << YAML::EndMap;
    }
    out << YAML::EndMap;
    out << YAML::Key << "reps" << YAML::Value;
    emit_gset(out, S.reps.reps, &S.reps.rec_M, A);
    out << YAML::Key << "units" << YAML::Value;
    emit_gset(out, S.units.units, nullptr, A);
    if (!S.sigma_p.empty()) {
        out << YAML::Key << "sigma_p" << YAML::Value << YAML::BeginSeq;
        for (const auto& f : S.sigma_p) {
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "rec_w" << YAML::Value;
            emit_element(out, A, f.rec_w);
            out << YAML::Key << "rec_wbar" << YAML::Value;
            emit_element(out, A, f.rec_wbar);
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;
}

inline void emit_hom_matrix(YAML::Emitter& out, const GroupHom& h) {
    out << YAML::BeginSeq;
    for (std::size_t i = 0; i < h.target()->rank(); ++i) {
        out << YAML::Flow << YAML::BeginSeq;
        for (std::size_t j = 0; j < h.source()->rank(); ++j) out << h.target()->decode(h.apply(h.source()->generator(j)))[i];
        out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
}

}  // namespace detail

// Workspace text holding one transfer instance (groups A and A1, the
// action G and the map ver), readable back by parse_workspace.
inline std::string transfer_workspace_text(const TransferInstance& I, std::uint64_t seed, const std::optional<bool>& expect = std::nullopt) {
    using namespace detail;
    const GroupPtr& A = I.target.action.group;
    const GroupPtr& A1 = I.target.ver.source();
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "format" << YAML::Value << kWorkspaceFormat;
    out << YAML::Key << "p" << YAML::Value << I.R.p();
    out << YAML::Key << "N" << YAML::Value << I.R.N();
    out << YAML::Key << "seed" << YAML::Value << seed;
    out << YAML::Key << "groups" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "A" << YAML::Value << YAML::Flow << A->orders();
    out << YAML::Key << "A1" << YAML::Value << YAML::Flow << A1->orders();
    out << YAML::EndMap;
    out << YAML::Key << "homs" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "sigma" << YAML::Value << YAML::BeginMap << YAML::Key << "source" << YAML::Value << "A" << YAML::Key << "target" << YAML::Value
        << "A" << YAML::Key << "matrix" << YAML::Value;
    emit_hom_matrix(out, I.target.action.sigma);
    out << YAML::EndMap;
    out << YAML::Key << "ver" << YAML::Value << YAML::BeginMap << YAML::Key << "source" << YAML::Value << "A1" << YAML::Key << "target" << YAML::Value
        << "A" << YAML::Key << "matrix" << YAML::Value;
    emit_hom_matrix(out, I.target.ver);
    out << YAML::EndMap << YAML::EndMap;
    out << YAML::Key << "actions" << YAML::Value << YAML::BeginMap << YAML::Key << "G" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key
        << "sigma" << YAML::Value << "sigma" << YAML::EndMap << YAML::EndMap;
    out << YAML::Key << "transfer" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "action" << YAML::Value << "G";
    out << YAML::Key << "ver" << YAML::Value << "ver";
    out << YAML::Key << "field" << YAML::Value;
    emit_side(out, I.F);
    out << YAML::Key << "subfield" << YAML::Value;
    emit_side(out, I.Fsub);
    out << YAML::Key << "fibers" << YAML::Value << YAML::BeginSeq << YAML::BeginMap;
    out << YAML::Key << "beta_sub" << YAML::Value << I.beta_sub;
    out << YAML::Key << "elements" << YAML::Value;
    emit_gset(out, I.fiber, nullptr, A);
    if (expect) out << YAML::Key << "expect" << YAML::Value << *expect;
    out << YAML::EndMap << YAML::EndSeq;
    out << YAML::EndMap << YAML::EndMap;
    return std::string("# generated by tcong synth\n") + out.c_str() + "\n";
}

}  // namespace tcong
