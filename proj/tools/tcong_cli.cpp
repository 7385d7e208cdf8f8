#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "tcong/tcong.hpp"

using namespace tcong;

namespace {

enum Exit { kPass = 0, kFail = 1, kInput = 2 };

unsigned thread_count() {
    const char* s = std::getenv("TCONG_THREADS");
    if (!s) return 1;
    const long v = std::strtol(s, nullptr, 10);
    return v > 0 ? static_cast<unsigned>(v) : 1u;
}

std::string echo(int argc, char** argv) {
    std::string s;
    for (int i = 1; i < argc; ++i) s += (i > 1 ? " " : "") + std::string(argv[i]);
    return s;
}

int emit(const Report& r, const std::string& format, bool timing) {
    if (format == "json") std::cout << (timing ? r.jsonl() : r.body_jsonl());
    else std::cout << (timing ? r.text() : r.body_text());
    return r.all_pass() ? kPass : kFail;
}

std::optional<std::string> opt(const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transfer-congruence and K1-patching checks at finite level"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string format = "text";
    bool no_timing = false;
    app.add_option("--format", format, "report format")->check(CLI::IsMember({"text", "json"}));
    app.add_flag("--no-timing", no_timing, "omit the timing line");

    std::string ws;
    auto* vc = app.add_subcommand("verify-congruence", "check the transfer congruence for each beta' of the workspace");
    std::vector<std::string> betas;
    std::string range;
    bool swap = false;
    vc->add_option("workspace", ws, "workspace file")->required();
    vc->add_option("--beta", betas, "check only these beta' labels");
    vc->add_option("--beta-range", range, "half-open index range a:b into the fiber list");
    vc->add_flag("--swap", swap, "also evaluate with the distinguished places swapped");

    auto* rs = app.add_subcommand("residue-symbols", "line-per-prime check of the residue-symbol product identity");
    i64 p = 3, D = 23, bound = 200;
    int r = 2;
    std::string m = "2";
    rs->add_option("--p", p)->required();
    rs->add_option("--r", r)->required();
    rs->add_option("--m", m)->required();
    rs->add_option("--D", D, "Q(sqrt(-D))")->required();
    rs->add_option("--bound", bound)->required();

    auto* k1 = app.add_subcommand("k1-check", "MS1-MS3 for each family of the workspace");
    std::string family;
    k1->add_option("workspace", ws, "workspace file")->required();
    k1->add_option("--family", family, "check only this family");

    auto* tt = app.add_subcommand("trace-test", "trace-ideal membership of workspace elements");
    std::string element;
    tt->add_option("workspace", ws, "workspace file")->required();
    tt->add_option("--test", element, "run only this trace test");

    auto* qr = app.add_subcommand("qexp-restrict", "diagonal restriction of workspace q-expansions");
    std::string expansion;
    qr->add_option("workspace", ws, "workspace file")->required();
    qr->add_option("--expansion", expansion, "restrict only this expansion");

    auto* sy = app.add_subcommand("synth", "write a generator-built transfer workspace");
    std::uint64_t seed = 1;
    i64 sp = 3;
    std::string out;
    bool perturb = false, with_iD = true, rotation = false, expect_fail = false;
    sy->add_option("--seed", seed)->required();
    sy->add_option("--p", sp);
    sy->add_option("-o,--output", out, "output file")->required();
    sy->add_flag("--perturb", perturb, "raise one fixed-point valuation so the congruence fails (implies --no-iD)");
    sy->add_flag("--rotation", rotation, "use (Z/p)^p with the cyclic shift as coefficient group");
    sy->add_flag("!--no-iD", with_iD, "omit the places dividing iD");
    sy->add_flag("--expect-fail", expect_fail, "embed an expected failing verdict");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPass : kInput;
    }

    const std::string cmd = echo(argc, argv);
    const bool timing = !no_timing;
    try {
        if (*rs) return emit(cmd_residue_symbols(p, r, BigInt(m), D, bound, cmd, thread_count()), format, timing);
        if (*sy) {
            std::mt19937_64 rng(seed);
            SyntheticSettings s;
            s.p = sp;
            s.with_iD = with_iD && sp == 3 && !perturb;
            s.rotation_target = rotation;
            s.with_sigma_p = !perturb;
            for (int attempt = 0; attempt < 100; ++attempt) {
                SyntheticInstance inst = synthetic_transfer_instance(s, rng);
                std::optional<std::string> label;
                if (perturb && !(label = perturb_fixed_point(inst, rng))) continue;
                std::ofstream f(out);
                if (!f) throw InputError("cannot write " + out);
                f << transfer_workspace_text(inst.inst, seed, !expect_fail);
                std::cout << "wrote " << out << (label ? " (perturbed at " + *label + ")" : "") << "\n";
                return kPass;
            }
            throw Error("synth: no visible perturbation in 100 attempts");
        }
        const Workspace W = load_workspace(ws);
        if (*vc) {
            BetaSelection sel;
            sel.labels = betas;
            if (!range.empty()) {
                const auto colon = range.find(':');
                if (colon == std::string::npos) throw InputError("--beta-range must be a:b");
                sel.range = std::make_pair(std::stoul(range.substr(0, colon)), std::stoul(range.substr(colon + 1)));
            }
            return emit(cmd_verify_congruence(W, cmd, sel, swap), format, timing);
        }
        if (*k1) return emit(cmd_k1_check(W, cmd, opt(family)), format, timing);
        if (*tt) return emit(cmd_trace_test(W, cmd, opt(element)), format, timing);
        if (*qr) return emit(cmd_qexp_restrict(W, cmd, opt(expansion)), format, timing);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const MismatchError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition: " << e.what() << "\n";
        return kInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
    return kInput;
}
