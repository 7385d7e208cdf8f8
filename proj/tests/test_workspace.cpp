#include <gtest/gtest.h>

#include <random>

#include "json.hpp"
#include "tcong/tcong.hpp"

using namespace tcong;

namespace {

std::string fixture(const std::string& name) { return std::string(TCONG_FIXTURE_DIR) + "/" + name; }

int error_line(const std::string& text) {
    try {
        parse_workspace(text);
    } catch (const WorkspaceError& e) {
        return e.line;
    }
    return -1;
}

const char* kHeader = "format: tcong-workspace/1\np: 3\nN: 2\nseed: 9\n";

}  // namespace

TEST(Workspace, LoadsExamples) {
    const Workspace W = load_workspace(fixture("examples.yaml"));
    EXPECT_EQ(W.p, 3);
    EXPECT_EQ(W.N, 2);
    EXPECT_EQ(W.seed, 20261015u);
    EXPECT_EQ(W.trace_tests.size(), 5u);
    EXPECT_EQ(W.towers.size(), 3u);
    EXPECT_EQ(W.families.size(), 4u);
    ASSERT_EQ(W.expansions.size(), 1u);
    EXPECT_TRUE(W.expansions[0].expect.has_value());
    EXPECT_FALSE(W.transfer.has_value());
}

TEST(Workspace, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line("format: tcong-workspace/1\np: 3\nN: 2\n"), 1);  // missing seed
    EXPECT_EQ(error_line(std::string(kHeader) + "groups:\n  C: [9]\nactions:\n  s: {sigma: nope}\n"), 8);
    EXPECT_EQ(error_line(std::string(kHeader) + "groups:\n  C: [9]\nextra: 1\n"), 7);
    EXPECT_EQ(error_line(std::string(kHeader) + "groups:\n  C: [9\n"), 7);
    EXPECT_EQ(error_line(std::string(kHeader) + "groups:\n  C: [9]\nelements:\n  x: {group: C, terms: [[1, 2], [3]]}\n"), 8);
    EXPECT_EQ(error_line("format: tcong-workspace/2\np: 3\nN: 2\nseed: 1\n"), 1);
}

TEST(Workspace, RejectsInvalidTables) {
    const std::string base = std::string(kHeader) + "groups:\n  C: [9]\n  D: [3]\n";
    EXPECT_THROW(parse_workspace(base + "homs:\n  h: {source: C, target: C, matrix: [[3]]}\nactions:\n  s: {sigma: h}\n"), WorkspaceError);
    EXPECT_THROW(parse_workspace(base + "homs:\n  h: {source: D, target: C, matrix: [[1]]}\n"), WorkspaceError);
    EXPECT_THROW(parse_workspace(base + "elements:\n  x: {group: C, terms: [[[1, 0], 1]]}\n"), WorkspaceError);
    EXPECT_THROW(parse_workspace(base + "towers:\n  t: {builtin: {kind: false_tate, R: 2, M: 2}}\n"), WorkspaceError);
}

TEST(Workspace, TransferRoundTrip) {
    std::mt19937_64 rng(4);
    for (int it = 0; it < 6; ++it) {
        SyntheticSettings s;
        s.p = it % 3 == 2 ? 5 : 3;
        s.with_iD = s.p == 3 && it % 2 == 0;
        const SyntheticInstance inst = synthetic_transfer_instance(s, rng);
        const TransferReport direct = check_transfer_congruence(inst.inst);
        const Workspace W = parse_workspace(transfer_workspace_text(inst.inst, 100 + it, true));
        ASSERT_TRUE(W.transfer.has_value());
        ASSERT_EQ(W.transfer->fibers.size(), 1u);
        const TransferReport back = check_transfer_congruence(W.transfer->instance(W.transfer->fibers[0]));
        EXPECT_EQ(direct.verdict, back.verdict);
        EXPECT_TRUE(back.verdict) << back.str();
        EXPECT_EQ(direct.difference, back.difference);
    }
}

TEST(Workspace, PerturbedRoundTripKeepsWitness) {
    std::mt19937_64 rng(12);
    int seen = 0;
    for (int it = 0; it < 40 && seen < 3; ++it) {
        SyntheticSettings s;
        s.with_sigma_p = false;
        s.with_iD = false;
        SyntheticInstance inst = synthetic_transfer_instance(s, rng);
        const auto label = perturb_fixed_point(inst, rng);
        if (!label) continue;
        ++seen;
        const Workspace W = parse_workspace(transfer_workspace_text(inst.inst, 1, true));
        const Report r = cmd_verify_congruence(W, "verify-congruence");
        ASSERT_EQ(r.checks.size(), 1u);
        EXPECT_FALSE(r.all_pass());
        const auto& w = r.checks[0].witness;
        EXPECT_NE(std::find(w.begin(), w.end(), "fixed index " + *label + " has residual outside T"), w.end());
    }
    EXPECT_EQ(seen, 3);
}

TEST(Commands, ExamplesMatchEmbeddedVerdicts) {
    const Workspace W = load_workspace(fixture("examples.yaml"));
    for (const Report& r : {cmd_trace_test(W, "t"), cmd_k1_check(W, "k"), cmd_qexp_restrict(W, "q")}) {
        EXPECT_TRUE(r.all_pass()) << r.body_text();
        EXPECT_FALSE(r.checks.empty());
    }
    const Report t = cmd_trace_test(W, "t", std::string("single-point"));
    ASSERT_EQ(t.checks.size(), 1u);
    EXPECT_EQ(t.checks[0].verdict, "not-in-T");
    EXPECT_FALSE(t.checks[0].witness.empty());
    EXPECT_THROW(cmd_k1_check(W, "k", std::string("absent")), InputError);
}

TEST(Commands, ExpectationMismatchFails) {
    std::string text = std::string(kHeader) +
                       "groups:\n  C: [9]\nhoms:\n  m: {source: C, target: C, matrix: [[4]]}\nactions:\n  s: {sigma: m}\n"
                       "elements:\n  x: {group: C, terms: [[1, 1]]}\n"
                       "trace_tests:\n  - {name: a, action: s, element: x, expect: true}\n  - {name: b, action: s, element: x}\n";
    const Report r = cmd_trace_test(parse_workspace(text), "t");
    ASSERT_EQ(r.checks.size(), 2u);
    EXPECT_FALSE(r.checks[0].pass);
    EXPECT_FALSE(r.checks[1].pass);
    EXPECT_EQ(r.failures(), 2u);
}

TEST(Commands, QexpExpectationMismatchNamesCoefficient) {
    std::string text = std::string(kHeader) +
                       "groups:\n  A: [3]\nexpansions:\n  e:\n    tower: {kind: real_cyclotomic, p: 3, r: 1}\n    group: A\n"
                       "    trace_bound: 10\n    terms:\n      - {beta: [1, 0, 0], coeff: [[0, 1]]}\n    expect:\n      - {beta: [1], coeff: [[0, 2]]}\n";
    const Report r = cmd_qexp_restrict(parse_workspace(text), "q");
    ASSERT_EQ(r.checks.size(), 1u);
    EXPECT_FALSE(r.checks[0].pass);
    ASSERT_EQ(r.checks[0].witness.size(), 1u);
    EXPECT_NE(r.checks[0].witness[0].find("[1]"), std::string::npos);
}

TEST(Commands, BetaSelection) {
    const Workspace W = load_workspace(fixture("transfer_pass.yaml"));
    BetaSelection empty;
    empty.range = std::make_pair(std::size_t{0}, std::size_t{0});
    const Report r = cmd_verify_congruence(W, "v", empty);
    EXPECT_TRUE(r.checks.empty());
    EXPECT_TRUE(r.all_pass());
    BetaSelection bad;
    bad.labels = {"[99]"};
    EXPECT_THROW(cmd_verify_congruence(W, "v", bad), InputError);
    BetaSelection out;
    out.range = std::make_pair(std::size_t{0}, std::size_t{5});
    EXPECT_THROW(cmd_verify_congruence(W, "v", out), InputError);
}

TEST(Report, DeterministicAndSorted) {
    const Workspace W = load_workspace(fixture("examples.yaml"));
    const Report a = cmd_k1_check(W, "k1-check"), b = cmd_k1_check(W, "k1-check");
    EXPECT_EQ(a.body_text(), b.body_text());
    EXPECT_EQ(a.body_jsonl(), b.body_jsonl());
    const auto s = a.sorted();
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end(), [](const CheckResult& x, const CheckResult& y) { return x.key < y.key; }));
    std::istringstream in(a.jsonl());
    std::string line, last;
    int n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_TRUE(j.contains("type"));
        last = j["type"];
        ++n;
    }
    EXPECT_EQ(last, "timing");
    EXPECT_EQ(n, static_cast<int>(a.checks.size()) + 3);
}

TEST(Commands, ResidueSymbols) {
    const Report r = cmd_residue_symbols(3, 2, BigInt(2), 23, 80, "rs");
    EXPECT_TRUE(r.all_pass()) << r.body_text();
    EXPECT_FALSE(r.checks.empty());
    EXPECT_FALSE(r.notices.empty());
    EXPECT_THROW(cmd_residue_symbols(3, 2, BigInt(2), 7, 80, "rs"), InputError);
}
