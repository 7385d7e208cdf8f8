#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace tcong {

struct CheckResult {
    std::string key;
    bool pass = true;
    std::string verdict;               // one-word outcome, e.g. "in-T", "holds"
    std::optional<bool> expected;      // embedded expectation, when given
    std::vector<std::string> details;
    std::vector<std::string> witness;  // preimages, offending indices, residuals
};

// Deterministic command report; checks are emitted sorted by key and the
// timing line is kept apart from the body.
struct Report {
    std::string command;
    long long p = 0;
    int N = 0;
    std::optional<unsigned long long> seed;
    std::vector<std::string> notices;
    std::vector<CheckResult> checks;
    double seconds = 0;

    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
    }
    std::size_t failures() const {
        return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.pass; }));
    }

    std::vector<CheckResult> sorted() const {
        auto c = checks;
        std::stable_sort(c.begin(), c.end(), [](const CheckResult& a, const CheckResult& b) { return a.key < b.key; });
        return c;
    }

    std::string body_text() const {
        std::ostringstream os;
        os << "# tcong " << command << "\n";
        os << "p=" << p << " N=" << N;
        if (seed) os << " seed=" << *seed;
        os << "\n";
        for (const auto& n : notices) os << "notice: " << n << "\n";
        for (const auto& c : sorted()) {
            os << (c.pass ? "[PASS] " : "[FAIL] ") << c.key << ": " << c.verdict;
            if (c.expected) os << " (expected " << (*c.expected ? "true" : "false") << ")";
            os << "\n";
            for (const auto& d : c.details) os << "    " << d << "\n";
            for (const auto& w : c.witness) os << "    witness: " << w << "\n";
        }
        os << "summary: " << checks.size() << " checks, " << checks.size() - failures() << " pass, " << failures() << " fail\n";
        return os.str();
    }

    std::string text() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "elapsed: %.3f s\n", seconds);
        return body_text() + buf;
    }

    // One JSON object per line: header, notices, checks, summary, timing.
    std::string body_jsonl() const {
        using nlohmann::json;
        std::ostringstream os;
        json h{{"type", "header"}, {"command", command}, {"p", p}, {"N", N}};
        if (seed) h["seed"] = *seed;
        os << h.dump() << "\n";
        for (const auto& n : notices) os << json{{"type", "notice"}, {"text", n}}.dump() << "\n";
        for (const auto& c : sorted()) {
            json j{{"type", "check"}, {"key", c.key}, {"pass", c.pass}, {"verdict", c.verdict}, {"details", c.details}, {"witness", c.witness}};
            if (c.expected) j["expected"] = *c.expected;
            os << j.dump() << "\n";
        }
        os << json{{"type", "summary"}, {"checks", checks.size()}, {"failures", failures()}, {"all_pass", all_pass()}}.dump() << "\n";
        return os.str();
    }

    std::string jsonl() const { return body_jsonl() + nlohmann::json{{"type", "timing"}, {"seconds", seconds}}.dump() + "\n"; }
};

}  // namespace tcong
