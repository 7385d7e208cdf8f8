#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "tcong/cmfields.hpp"
#include "tcong/eiscoeff.hpp"
#include "tcong/k1patch.hpp"
#include "tcong/qexpand.hpp"
#include "tcong/report.hpp"
#include "tcong/workspace.hpp"

namespace tcong {

namespace detail {

inline Report report_for(const std::string& command, const Workspace& W) {
    Report r;
    r.command = command;
    r.p = W.p;
    r.N = W.N;
    r.seed = W.seed;
    return r;
}

inline void finish(CheckResult& c, bool outcome, const std::optional<bool>& expect) {
    c.expected = expect;
    c.pass = expect ? outcome == *expect : outcome;
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

inline std::string residual_witness(const TraceIdealBasis& T, const LambdaElt& x) {
    const auto res = T.residual_dense(x.dense());
    for (std::size_t g = 0; g < res.size(); ++g)
        if (res[g]) return "residual mod T at " + T.group()->element_str(static_cast<i64>(g)) + " is " + std::to_string(res[g]);
    return "residual is zero";
}

}  // namespace detail

// Membership of workspace elements in trace ideals.
inline Report cmd_trace_test(const Workspace& W, const std::string& command, const std::optional<std::string>& only = std::nullopt) {
    detail::Stopwatch sw;
    Report rep = detail::report_for(command, W);
    std::map<std::string, TraceIdealBasis> ideals;
    for (const auto& t : W.trace_tests) {
        if (only && t.name != *only) continue;
        auto it = ideals.find(t.action);
        if (it == ideals.end()) it = ideals.emplace(t.action, TraceIdealBasis(W.actions.at(t.action), W.R)).first;
        const LambdaElt& x = W.elements.at(t.element);
        const bool in = it->second.contains(x);
        CheckResult c{"trace/" + t.name, true, in ? "in-T" : "not-in-T", {}, {}, {}};
        c.details.push_back("element " + t.element + " = " + x.str());
        c.details.push_back("action " + t.action + (it->second.image_is_ideal() ? "" : " (trace image is not an ideal)"));
        if (!in) c.witness.push_back(detail::residual_witness(it->second, x));
        detail::finish(c, in, t.expect);
        rep.checks.push_back(std::move(c));
    }
    if (only && rep.checks.empty()) throw InputError("trace-test: no trace test named " + *only);
    rep.seconds = sw.seconds();
    return rep;
}

// MS1-MS3 on every workspace family.
inline Report cmd_k1_check(const Workspace& W, const std::string& command, const std::optional<std::string>& only = std::nullopt) {
    detail::Stopwatch sw;
    Report rep = detail::report_for(command, W);
    for (const auto& f : W.families) {
        if (only && f.name != *only) continue;
        const TowerData& T = W.towers.at(f.tower);
        std::vector<std::pair<std::string, PatchReport>> runs;
        try {
            runs.emplace_back("MS1", check_MS1(f.family, T));
        } catch (const NotUnitError& e) {
            CheckResult c{"k1/" + f.name + "/MS1", false, "not-a-unit", {}, {}, {e.what()}};
            detail::finish(c, false, f.expect.count("MS1") ? std::optional<bool>(f.expect.at("MS1")) : std::nullopt);
            rep.checks.push_back(std::move(c));
        }
        runs.emplace_back("MS2", check_MS2(f.family, T));
        runs.emplace_back("MS3", check_MS3(f.family, T));
        for (const auto& [name, pr] : runs) {
            CheckResult c{"k1/" + f.name + "/" + name, true, !pr.applicable ? "not-applicable" : pr.verdict ? "holds" : "fails", {}, {}, {}};
            for (const auto& l : pr.levels) {
                const std::string line = "r=" + std::to_string(l.r) + " " + (l.ok ? "ok" : "fail") + (l.witness.empty() ? "" : ": " + l.witness);
                (l.ok ? c.details : c.witness).push_back(line);
            }
            auto e = f.expect.find(name);
            detail::finish(c, pr.verdict, e == f.expect.end() ? std::nullopt : std::optional<bool>(e->second));
            rep.checks.push_back(std::move(c));
        }
    }
    if (only && rep.checks.empty()) throw InputError("k1-check: no family named " + *only);
    rep.seconds = sw.seconds();
    return rep;
}

// Which subfield elements beta' to check: explicit labels, or a half-open
// index range into the workspace fiber list; everything when both are empty.
struct BetaSelection {
    std::vector<std::string> labels;
    std::optional<std::pair<std::size_t, std::size_t>> range;
};

inline Report cmd_verify_congruence(const Workspace& W, const std::string& command, const BetaSelection& sel = {}, bool swap = false) {
    detail::Stopwatch sw;
    Report rep = detail::report_for(command, W);
    if (!W.transfer) throw InputError("verify-congruence: workspace has no transfer section");
    const TransferSpec& S = *W.transfer;
    for (const auto& l : sel.labels) {
        if (std::none_of(S.fibers.begin(), S.fibers.end(), [&](const FiberSpec& f) { return f.beta_sub == l; }))
            throw InputError("verify-congruence: no fiber for beta' " + l);
    }
    if (sel.range && (sel.range->first > sel.range->second || sel.range->second > S.fibers.size()))
        throw InputError("verify-congruence: beta' range outside 0.." + std::to_string(S.fibers.size()));
    const TraceIdealBasis T(S.base.target.action, S.base.R);
    for (std::size_t i = 0; i < S.fibers.size(); ++i) {
        const FiberSpec& f = S.fibers[i];
        if (!sel.labels.empty() && std::find(sel.labels.begin(), sel.labels.end(), f.beta_sub) == sel.labels.end()) continue;
        if (sel.range && (i < sel.range->first || i >= sel.range->second)) continue;
        const TransferReport tr = check_transfer_congruence(S.instance(f), T, TransferOptions{swap});
        CheckResult c{"transfer/" + f.beta_sub, true, tr.verdict ? "holds" : "fails", {}, {}, {}};
        c.details.push_back("fiber of " + f.beta_sub + ": " + std::to_string(f.fiber.size()) + " elements, coefficients in " + tr.ring.name());
        if (!tr.modification_matches) c.details.push_back("modification factor is not ver of the subfield factor");
        for (const auto& e : tr.equivariance_violations) c.witness.push_back(e);
        for (const auto& n : tr.hypothesis_notes) c.details.push_back("note: " + n);
        for (const auto& u : tr.unstable)
            c.details.push_back("unstable coefficient at " + u.place + " for " + u.beta + " (j0=" + std::to_string(u.j0) + ", j1=" + std::to_string(u.j1) + ")");
        for (const auto& o : tr.offending) c.witness.push_back("fixed index " + o + " has residual outside T");
        if (tr.verdict && tr.preimage) c.witness.push_back("difference = trace(" + tr.preimage->str() + ") + fixed residuals in T");
        if (tr.verdict_swapped) c.details.push_back(std::string("swapped distinguished places: ") + (*tr.verdict_swapped ? "holds" : "fails"));
        detail::finish(c, tr.verdict, f.expect);
        rep.checks.push_back(std::move(c));
    }
    rep.seconds = sw.seconds();
    return rep;
}

// Diagonal restriction of every (or one) workspace expansion.
inline Report cmd_qexp_restrict(const Workspace& W, const std::string& command, const std::optional<std::string>& only = std::nullopt) {
    detail::Stopwatch sw;
    Report rep = detail::report_for(command, W);
    for (const auto& e : W.expansions) {
        if (only && e.name != *only) continue;
        const auto g = diagonal_restrict(*e.f, e.tower, e.sublattice);
        CheckResult c{"qexp/" + e.name, true, "restricted", {}, {}, {}};
        for (const auto& [beta, a] : g.terms()) c.details.push_back(detail::coords_label(beta) + ": " + a.str());
        if (g.terms().empty()) c.details.push_back("restriction is zero");
        bool ok = true;
        if (e.expect) {
            std::set<Coords> keys;
            for (const auto& [b, a] : g.terms()) keys.insert(b);
            for (const auto& [b, a] : *e.expect) keys.insert(b);
            for (const auto& b : keys) {
                auto it = e.expect->find(b);
                const LambdaElt want = it == e.expect->end() ? LambdaElt(e.f->group(), W.R) : it->second;
                if (!(g.coeff(b) == want)) {
                    ok = false;
                    c.witness.push_back("coefficient at " + detail::coords_label(b) + " is " + g.coeff(b).str() + ", expected " + want.str());
                }
            }
            c.verdict = ok ? "matches" : "differs";
            detail::finish(c, ok, true);
        }
        rep.checks.push_back(std::move(c));
    }
    if (only && rep.checks.empty()) throw InputError("qexp-restrict: no expansion named " + *only);
    rep.seconds = sw.seconds();
    return rep;
}

// Line-per-prime report of the residue-symbol product identity.
inline Report cmd_residue_symbols(i64 p, int r, const BigInt& m, i64 D, i64 bound, const std::string& command, unsigned threads = 1) {
    detail::Stopwatch sw;
    const ImagQuadField K(D, p);
    if (!is_p_split(K)) throw InputError("residue-symbols: p does not split in " + K.str());
    const Report5322 r5 = verify_5322(K, m, r, bound, threads);
    Report rep;
    rep.command = command;
    rep.p = p;
    rep.N = r;
    rep.notices.push_back("exact residue arithmetic; r=" + std::to_string(r) + " m=" + m.str() + " D=" + std::to_string(D) +
                          " bound=" + std::to_string(bound) + " lower primes checked=" + std::to_string(r5.lines.size()));
    for (i64 ell : r5.skipped) rep.notices.push_back("skipped ell=" + std::to_string(ell) + " (divides p m disc)");
    for (std::size_t i = 0; i < r5.lines.size(); ++i) {
        const auto& l = r5.lines[i];
        char key[64];
        std::snprintf(key, sizeof key, "prime/%08lld/%04zu", static_cast<long long>(l.ell), i);
        CheckResult c{key, l.holds, l.holds ? "holds" : "fails", {}, {l.str(p, r)}, {}};
        rep.checks.push_back(std::move(c));
    }
    rep.seconds = sw.seconds();
    return rep;
}

}  // namespace tcong
