// Command-line front end: reproducible scenario runs with plain-text reports.
// Exit codes: 0 success, 1 in-band failure (attack blocked, recovery failed),
// 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sevsim/sevsim.hpp"

namespace {

using namespace sevsim;

struct CommonOpts {
    std::uint64_t seed = 1;
    std::uint32_t page_count = 4096;
    std::string mode = "vulnerable";
    std::string table_path;
    std::string scenario_path;
    std::string report_path;
    bool dump = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_pages = true) {
    cmd->add_option("--seed", o.seed, "scenario seed; determines every pseudorandom choice");
    if (with_pages) cmd->add_option("--pages", o.page_count, "guest size in 4 KiB pages");
    cmd->add_option("--mode", o.mode, "engine mode: vulnerable | mitigated")
        ->check(CLI::IsMember({"vulnerable", "mitigated"}));
    cmd->add_option("--table", o.table_path, "tweak parameter file (default: bundled values)");
    cmd->add_option("--scenario", o.scenario_path, "scenario config file (flags override)");
    cmd->add_option("--report", o.report_path, "write the report to this file");
    cmd->add_flag("--dump", o.dump, "append hex dumps of the victim region to the report");
}

ScenarioConfig scenario_from(const CommonOpts& o, const CLI::App* cmd) {
    ScenarioConfig cfg;
    if (!o.scenario_path.empty()) cfg = ScenarioConfig::load(o.scenario_path);
    if (o.scenario_path.empty() || cmd->count("--seed")) cfg.seed = o.seed;
    if (o.scenario_path.empty() || cmd->count("--pages")) cfg.page_count = o.page_count;
    if (o.scenario_path.empty() || cmd->count("--mode")) cfg.mode = engine_mode_from_string(o.mode);
    cfg.validate();
    return cfg;
}

TweakTable attacker_table(const CommonOpts& o) {
    return o.table_path.empty() ? TweakTable::table1() : TweakTable::load(o.table_path);
}

std::string scenario_header(const std::string& command, const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "command=" << command << '\n'
       << "seed=" << cfg.seed << '\n'
       << "page_count=" << cfg.page_count << '\n'
       << "mode=" << to_string(cfg.mode) << '\n';
    return os.str();
}

void emit_report(const CommonOpts& o, const std::string& text) {
    std::cout << text;
    if (!o.report_path.empty()) {
        std::ofstream out(o.report_path, std::ios::binary);
        if (!out) throw Error("cannot write report file: " + o.report_path);
        out << text;
    }
}

std::string victim_dumps(const GuestImage& guest) {
    std::ostringstream os;
    os << "[victim ciphertext]\n"
       << guest.memory().dump_cipher(guest.victim_address(), kShellcodeSize)
       << "[victim plaintext]\n"
       << guest.memory().dump_plain(guest.victim_address(), kShellcodeSize);
    return os.str();
}

int cmd_probe_randomness(const CommonOpts& o, std::size_t count) {
    Rng rng = Rng(o.seed).fork(0x70726f6265000001ull);
    Aes128::Key vek = rng.block().bytes;
    EngineConfig engine = o.mode == "vulnerable" ? EngineConfig::vulnerable(vek)
                                                 : EngineConfig::mitigated(vek);
    EncryptedMemory mem(engine, 1 << 20);
    PhysAddr p{Block::kSize * rng.below((1 << 20) / Block::kSize)};
    RandomnessReport r = probe_randomness(mem, p, count);

    std::ostringstream os;
    os << "command=probe-randomness\nseed=" << o.seed << "\nmode=" << o.mode
       << "\ncount=" << count << "\nprobe_address=0x" << to_hex_u64(p.value) << '\n'
       << r.to_text();
    emit_report(o, os.str());
    return r.pass() ? 0 : 1;
}

int cmd_recover_tweak(const CommonOpts& o, std::size_t samples, const std::string& table_out) {
    bool truth_from_file = !o.table_path.empty();
    TweakTable truth = truth_from_file ? TweakTable::load(o.table_path)
                                       : TweakTable::random(splitmix64(o.seed ^ 0x7461626c65ull));
    Rng rng = Rng(o.seed).fork(0x7265636f76657201ull);
    Aes128::Key vek = rng.block().bytes;
    EngineConfig engine = o.mode == "vulnerable" ? EngineConfig::vulnerable(vek, truth)
                                                 : EngineConfig::mitigated(vek);
    EncryptedMemory mem(engine, kPhysAddrSpace);

    RecoveryReport report;
    report.probe = probe_randomness(mem, random_block_addresses(rng, 1)[0], 256);
    report.probe_ran = true;

    auto addrs = random_block_addresses(rng, samples);
    SampleSet set = collect_equal_cipher_samples(mem, addrs);
    report.sample_count = set.size();
    Gf2System sys = build_difference_system(set);
    report.rank = sys.rank();
    RecoveryOutcome outcome = recover_tweak(set);

    std::ostringstream os;
    os << "command=recover-tweak\nseed=" << o.seed << "\nmode=" << o.mode << '\n'
       << "ground_truth=" << (truth_from_file ? "file:" + o.table_path : "random") << '\n';

    int rc = 1;
    if (const TweakTable* t = std::get_if<TweakTable>(&outcome)) {
        report.verdict = "recovered";
        os << report.to_text();
        os << "matches_ground_truth=" << (*t == truth ? "yes" : "no") << '\n';
        if (!table_out.empty()) {
            t->save(table_out);
            os << "table_out=" << table_out << '\n';
        }
        rc = 0;
    } else if (const Underdetermined* ud = std::get_if<Underdetermined>(&outcome)) {
        report.verdict = "underdetermined";
        os << report.to_text();
        os << "free_unknowns=0x" << to_hex_u64(ud->free_unknowns) << '\n';
    } else {
        report.verdict = "inconsistent";
        os << report.to_text();
    }
    emit_report(o, os.str());
    return rc;
}

int cmd_find_bridge(const CommonOpts& o, const CLI::App* cmd) {
    ScenarioConfig cfg = scenario_from(o, cmd);
    GuestImage guest(cfg);
    AttackSurface surface(guest);
    auto candidates = find_bridge(surface, attacker_table(o), cfg.bridge_offset);

    std::ostringstream os;
    os << scenario_header("find-bridge", cfg);
    os << "bridge_candidates=" << candidates.size() << '\n';
    for (PhysAddr c : candidates) os << "bpa=0x" << to_hex_u64(c.value) << '\n';
    os << "bpa_truth=0x" << to_hex_u64(guest.bridge_address().value) << '\n';
    bool hit = candidates.size() == 1 && candidates[0] == guest.bridge_address();
    os << "bpa_matches_truth=" << (hit ? "yes" : "no") << '\n';
    emit_report(o, os.str());
    return hit ? 0 : 1;
}

int cmd_find_cc(const CommonOpts& o, const CLI::App* cmd) {
    ScenarioConfig cfg = scenario_from(o, cmd);
    GuestImage guest(cfg);
    AttackSurface surface(guest);
    AttackPlan plan = AttackPlan::from_scenario(cfg, attacker_table(o));

    std::ostringstream os;
    os << scenario_header("find-cc", cfg);
    auto candidates = find_bridge(surface, plan.table, plan.bridge_offset);
    os << "bridge_candidates=" << candidates.size() << '\n';
    if (candidates.empty()) {
        os << "outcome=Failed(BridgeNotFound)\n";
        emit_report(o, os.str());
        return 1;
    }
    CcSearchResult cc = find_cc(surface, plan, candidates[0]);
    os << "bpa=0x" << to_hex_u64(candidates[0].value) << '\n';
    os << "cc_rounds=" << cc.rounds << '\n';
    if (!cc.pcc) {
        os << "outcome=Failed(CcNotFound)\n";
        emit_report(o, os.str());
        return 1;
    }
    os << "pcc=0x" << to_hex_u64(cc.pcc->value) << '\n';
    os << "pcc_truth=0x" << to_hex_u64(guest.victim_address().value) << '\n';
    bool hit = *cc.pcc == guest.victim_address();
    os << "pcc_matches_truth=" << (hit ? "yes" : "no") << '\n';
    emit_report(o, os.str());
    return hit ? 0 : 1;
}

int cmd_inject(const CommonOpts& o, const CLI::App* cmd, const std::string& bpa_opt,
               const std::string& pcc_opt) {
    ScenarioConfig cfg = scenario_from(o, cmd);
    GuestImage guest(cfg);
    AttackSurface surface(guest);
    AttackPlan plan = AttackPlan::from_scenario(cfg, attacker_table(o));

    std::ostringstream os;
    os << scenario_header("inject", cfg);

    auto parse_addr = [](const std::string& s) { return PhysAddr{std::stoull(s, nullptr, 0)}; };
    std::optional<PhysAddr> bpa, pcc;
    if (!bpa_opt.empty()) bpa = parse_addr(bpa_opt);
    if (!pcc_opt.empty()) pcc = parse_addr(pcc_opt);

    if (!bpa) {
        auto candidates = find_bridge(surface, plan.table, plan.bridge_offset);
        if (candidates.empty()) {
            os << "outcome=Failed(BridgeNotFound)\n";
            emit_report(o, os.str());
            return 1;
        }
        bpa = candidates[0];
    }
    os << "bpa=0x" << to_hex_u64(bpa->value) << '\n';
    if (!pcc) {
        CcSearchResult cc = find_cc(surface, plan, *bpa);
        os << "cc_rounds=" << cc.rounds << '\n';
        if (!cc.pcc) {
            os << "outcome=Failed(CcNotFound)\n";
            emit_report(o, os.str());
            return 1;
        }
        pcc = cc.pcc;
    }
    os << "pcc=0x" << to_hex_u64(pcc->value) << '\n';

    inject_shellcode(surface, plan, *bpa, *pcc);
    VictimStatus status = surface.victim_check(plan.shellcode);
    os << "victim_status=" << to_string(status) << '\n';
    if (o.dump) os << victim_dumps(guest);
    emit_report(o, os.str());
    return status == VictimStatus::ShellcodeActive ? 0 : 1;
}

int cmd_attack(const CommonOpts& o, const CLI::App* cmd, std::uint32_t trials) {
    TweakTable table = attacker_table(o);
    std::uint32_t successes = 0;
    std::string body;
    std::string dump_tail;

    for (std::uint32_t t = 0; t < trials; ++t) {
        ScenarioConfig cfg = scenario_from(o, cmd);
        cfg.seed = o.seed + t;
        GuestImage guest(cfg);
        AttackSurface surface(guest);
        AttackPlan plan = AttackPlan::from_scenario(cfg, table);
        AttackReport report = run_attack(surface, plan);
        successes += report.succeeded() ? 1 : 0;

        if (trials == 1) {
            body += scenario_header("attack", cfg) + report.to_text();
        } else {
            std::ostringstream line;
            line << "trial_seed=" << cfg.seed << " outcome="
                 << (report.succeeded() ? "ShellcodeActive" : "Failed(" + report.failure_reason + ")")
                 << " cc_rounds=" << report.cc_rounds << '\n';
            body += line.str();
        }
        if (o.dump && report.succeeded() && dump_tail.empty()) dump_tail = victim_dumps(guest);
        std::cerr << "# trial " << cfg.seed << " timing\n" << report.timing_text();
    }

    std::string text;
    if (trials > 1) {
        std::ostringstream head;
        head << "command=attack\ntrials=" << trials << "\nfirst_seed=" << o.seed << '\n';
        text = head.str() + body + "successes=" + std::to_string(successes) + "/" +
               std::to_string(trials) + '\n';
    } else {
        text = body;
    }
    text += dump_tail;
    emit_report(o, text);
    return successes == trials ? 0 : 1;
}

int cmd_demo_mitigated(const CommonOpts& o, const CLI::App* cmd) {
    CommonOpts local = o;
    local.mode = "mitigated";
    ScenarioConfig cfg = scenario_from(local, cmd);
    cfg.mode = EngineMode::Mitigated;
    GuestImage guest(cfg);
    AttackSurface surface(guest);
    AttackPlan plan = AttackPlan::from_scenario(cfg, attacker_table(o));
    AttackReport report = run_attack(surface, plan);

    // the equal-ciphertext relation the whole attack rests on, checked
    // directly against this guest's engine
    Rng rng = Rng(cfg.seed).fork(0x64656d6f00000001ull);
    const EngineConfig& engine = guest.memory().engine();
    int identity_held = 0;
    const int kTrials = 100;
    for (int i = 0; i < kTrials; ++i) {
        Block m = rng.block();
        PhysAddr p1{Block::kSize * rng.below(guest.size_bytes() / Block::kSize)};
        PhysAddr p2{Block::kSize * rng.below(guest.size_bytes() / Block::kSize)};
        Block shifted = m ^ tweak_of(TweakTable::table1(), PhysAddr{p1.value ^ p2.value});
        if (engine.encrypt_block(shifted, p2) == engine.encrypt_block(m, p1)) ++identity_held;
    }

    std::ostringstream os;
    os << scenario_header("demo-mitigated", cfg) << report.to_text();
    os << "equal_cipher_identity_held=" << identity_held << '/' << kTrials << '\n';
    bool effective = !report.succeeded() && identity_held == 0;
    os << "mitigation_effective=" << (effective ? "yes" : "no") << '\n';
    emit_report(o, os.str());
    return effective ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tweaked-memory-encryption simulator and cryptanalysis toolkit"};
    app.require_subcommand(1);

    CommonOpts probe_o, recover_o, bridge_o, cc_o, inject_o, attack_o, demo_o;
    std::size_t probe_count = 1024;
    std::size_t samples = 64;
    std::string table_out, bpa_opt, pcc_opt;
    std::uint32_t trials = 1;

    auto* probe = app.add_subcommand("probe-randomness",
                                     "write a counter sequence at one address and test the "
                                     "ciphertext stream for randomness");
    add_common(probe, probe_o, false);
    probe->add_option("--count", probe_count, "number of 16-byte probe writes");

    auto* recover = app.add_subcommand("recover-tweak",
                                       "collect equal-ciphertext samples and solve for the "
                                       "tweak parameters");
    add_common(recover, recover_o, false);
    recover->add_option("--samples", samples, "number of sampled addresses");
    recover->add_option("--table-out", table_out, "write the recovered table to this file");

    auto* bridge = app.add_subcommand("find-bridge", "locate the bridge in a guest scenario");
    add_common(bridge, bridge_o);

    auto* cc = app.add_subcommand("find-cc", "locate the victim's Characteristic Code");
    add_common(cc, cc_o);

    auto* inject = app.add_subcommand("inject", "forge the shellcode over the victim");
    add_common(inject, inject_o);
    inject->add_option("--bpa", bpa_opt, "bridge physical address (skip the search)");
    inject->add_option("--pcc", pcc_opt, "victim physical address (skip the search)");

    auto* attack = app.add_subcommand("attack", "full pipeline: bridge, CC search, injection");
    add_common(attack, attack_o);
    attack->add_option("--trials", trials, "run this many consecutively seeded scenarios");

    auto* demo = app.add_subcommand("demo-mitigated",
                                    "run the attack against the key-derivation engine");
    add_common(demo, demo_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (probe->parsed()) return cmd_probe_randomness(probe_o, probe_count);
        if (recover->parsed()) return cmd_recover_tweak(recover_o, samples, table_out);
        if (bridge->parsed()) return cmd_find_bridge(bridge_o, bridge);
        if (cc->parsed()) return cmd_find_cc(cc_o, cc);
        if (inject->parsed()) return cmd_inject(inject_o, inject, bpa_opt, pcc_opt);
        if (attack->parsed()) return cmd_attack(attack_o, attack, trials);
        if (demo->parsed()) return cmd_demo_mitigated(demo_o, demo);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
