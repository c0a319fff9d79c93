#pragma once

#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sevsim/gf2.hpp"
#include "sevsim/memory.hpp"
#include "sevsim/randomness.hpp"
#include "sevsim/rng.hpp"
#include "sevsim/tweak.hpp"

namespace sevsim {

struct Sample {
    PhysAddr addr;
    Block plaintext;
};

/// Plaintexts observed at distinct block addresses that all share one
/// ciphertext value. The first sample is the elimination baseline.
class SampleSet {
public:
    SampleSet(Block cipher, std::vector<Sample> samples)
        : cipher_(cipher), samples_(std::move(samples)) {
        std::set<std::uint64_t> seen;
        for (const Sample& s : samples_) {
            if (!s.addr.block_aligned())
                throw UnalignedAccess("sample address not block aligned");
            if (!seen.insert(s.addr.value).second)
                throw Error("duplicate sample address 0x" + to_hex_u64(s.addr.value));
        }
    }

    const Block& cipher() const { return cipher_; }
    const std::vector<Sample>& samples() const { return samples_; }
    const Sample& reference() const { return samples_.at(0); }
    std::size_t size() const { return samples_.size(); }

private:
    Block cipher_;
    std::vector<Sample> samples_;
};

/// Writes an arithmetic sequence of plaintext blocks at one fixed address and
/// returns the ciphertext observed after each write. A deterministic ECB-like
/// engine maps the counter sequence to a random-looking ciphertext stream.
inline std::vector<Block> probe_same_address(EncryptedMemory& mem, PhysAddr p, std::size_t count) {
    std::vector<Block> out;
    out.reserve(count);
    Block m{};
    for (std::size_t i = 0; i < count; ++i) {
        mem.write_plain(p, m.bytes);
        out.push_back(mem.read_cipher_block(p));
        // 128-bit little-endian increment
        for (std::size_t k = 0; k < Block::kSize && ++m.bytes[k] == 0; ++k) {
        }
    }
    return out;
}

inline RandomnessReport probe_randomness(EncryptedMemory& mem, PhysAddr p, std::size_t count) {
    auto blocks = probe_same_address(mem, p, count);
    std::vector<std::uint8_t> stream;
    stream.reserve(blocks.size() * Block::kSize);
    for (const Block& b : blocks) stream.insert(stream.end(), b.bytes.begin(), b.bytes.end());
    return randomness_battery(stream);
}

/// Writes the same plaintext repeatedly through `encrypt_once` and reports
/// whether every observed ciphertext is identical. Distinguishes a
/// deterministic (ECB-like) engine from a counter-mode one.
template <class EncryptOnce>
bool writes_are_deterministic(EncryptOnce&& encrypt_once, const Block& m, int trials = 8) {
    Block first = encrypt_once(m);
    for (int i = 1; i < trials; ++i)
        if (encrypt_once(m) != first) return false;
    return true;
}

/// Writes ciphertext `c` at every address and reads each plaintext back
/// through the guest view.
inline SampleSet collect_equal_cipher_samples(EncryptedMemory& mem,
                                              std::span<const PhysAddr> addrs,
                                              const Block& c = Block{}) {
    std::vector<Sample> samples;
    samples.reserve(addrs.size());
    for (PhysAddr p : addrs) {
        mem.write_cipher(p, c.bytes);
        if (mem.read_cipher_block(p) != c) throw Error("ciphertext readback mismatch");
        samples.push_back(Sample{p, mem.read_plain_block(p)});
    }
    return SampleSet(c, std::move(samples));
}

using RecoveryOutcome = std::variant<TweakTable, Underdetermined, Inconsistent>;

/// One row per non-reference sample: coefficients are bits 4..33 of
/// addr_i xor addr_0, right-hand side is plaintext_i xor plaintext_0.
inline Gf2System build_difference_system(const SampleSet& set) {
    Gf2System sys;
    if (set.size() < 2) return sys;
    const Sample& ref = set.reference();
    for (std::size_t i = 1; i < set.size(); ++i) {
        const Sample& s = set.samples()[i];
        auto coeffs = static_cast<std::uint32_t>((s.addr.block() ^ ref.addr.block()) >> kTweakLowBit);
        sys.add_row(coeffs & kCoeffMask, s.plaintext ^ ref.plaintext);
    }
    return sys;
}

/// Gaussian elimination over the address-difference rows.
inline RecoveryOutcome recover_tweak(const SampleSet& set) {
    SolveOutcome solved = build_difference_system(set).solve();
    if (auto* sol = std::get_if<Gf2Solution>(&solved)) return TweakTable(*sol);
    if (auto* ud = std::get_if<Underdetermined>(&solved)) return *ud;
    return Inconsistent{};
}

/// Distinct pseudorandom block addresses below `limit_bytes`.
inline std::vector<PhysAddr> random_block_addresses(Rng& rng, std::size_t count,
                                                    std::uint64_t limit_bytes = kPhysAddrSpace) {
    std::uint64_t block_count = limit_bytes / Block::kSize;
    if (count > block_count) throw Error("more addresses requested than blocks available");
    std::set<std::uint64_t> chosen;
    std::vector<PhysAddr> out;
    out.reserve(count);
    while (out.size() < count) {
        std::uint64_t b = rng.below(block_count);
        if (chosen.insert(b).second) out.push_back(PhysAddr{b * Block::kSize});
    }
    return out;
}

struct RecoveryReport {
    std::size_t sample_count = 0;
    int rank = 0;
    std::string verdict;  // recovered | underdetermined | inconsistent
    RandomnessReport probe;
    bool probe_ran = false;

    std::string to_text() const {
        std::ostringstream os;
        os << "samples=" << sample_count << '\n' << "rank=" << rank << '\n';
        if (probe_ran) os << probe.to_text();
        os << "verdict=" << verdict << '\n';
        return os.str();
    }
};

}  // namespace sevsim
