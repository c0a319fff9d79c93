#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sevsim/memory.hpp"
#include "sevsim/rng.hpp"

namespace sevsim {

inline constexpr std::size_t kPageSize = 4096;
/// Groups of 16 injected bytes that survive in the bridge after the server
/// finishes processing a request.
inline constexpr std::size_t kBridgeGroups = 62;
inline constexpr std::size_t kBridgeBytes = kBridgeGroups * Block::kSize;
inline constexpr std::size_t kShellcodeSize = 48;

/// The 48-byte payload that replaces the victim's authentication logic.
struct Shellcode {
    std::array<std::uint8_t, kShellcodeSize> bytes{};

    bool operator==(const Shellcode&) const = default;

    static Shellcode from_hex(std::string_view hex) {
        auto raw = parse_hex(hex);
        if (raw.size() != kShellcodeSize) throw ParseError("shellcode must be 48 bytes");
        Shellcode sc;
        std::copy(raw.begin(), raw.end(), sc.bytes.begin());
        return sc;
    }

    std::string to_hex() const { return sevsim::to_hex(bytes); }
};

namespace detail {

// 48 bytes of victim authentication code; the first 16 bytes are the
// Characteristic Code used to locate it in ciphertext.
inline constexpr std::array<std::uint8_t, 48> kDefaultVictimBlob = {
    0x80, 0x00, 0x00, 0x00, 0x42, 0x8b, 0x3c, 0xb8, 0xe8, 0xc3, 0xd4, 0xff,
    0xff, 0x85, 0xc0, 0x89, 0xc5, 0x0f, 0x88, 0xf4, 0x01, 0x00, 0x00, 0x89,
    0xc7, 0xe3, 0xd2, 0xc3, 0x04, 0x00, 0x83, 0xc0, 0x01, 0x0f, 0x84, 0x43,
    0x02, 0x00, 0x00, 0x44, 0x8b, 0x35, 0x3a, 0xbf, 0x2b, 0x00, 0x45, 0x39,
};

// Inert stand-in payload; victim_check only compares bytes, nothing executes.
inline constexpr std::array<std::uint8_t, 48> kDefaultShellcodeBytes = [] {
    std::array<std::uint8_t, 48> b{'S', 'H', 'E', 'L', 'L', 'S', 'I', 'M'};
    for (std::size_t i = 8; i < b.size(); ++i) b[i] = static_cast<std::uint8_t>(i * 7 + 3);
    return b;
}();

}  // namespace detail

inline const Shellcode kDefaultShellcode{detail::kDefaultShellcodeBytes};

enum class VictimStatus { AuthIntact, ShellcodeActive, Corrupted };

inline std::string_view to_string(VictimStatus s) {
    switch (s) {
        case VictimStatus::AuthIntact: return "AuthIntact";
        case VictimStatus::ShellcodeActive: return "ShellcodeActive";
        case VictimStatus::Corrupted: return "Corrupted";
    }
    return "?";
}

/// Everything that defines one reproducible guest scenario. The seed fully
/// determines the VEK, the filler content and the bridge/victim placement.
struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::uint32_t page_count = 4096;
    EngineMode mode = EngineMode::Vulnerable;
    /// Offset of the bridge within its page; stable across server restarts.
    std::uint16_t bridge_offset = 0x150;
    /// Offset of the Characteristic Code within the victim page; known from
    /// the public OS image.
    std::uint16_t cc_offset = 0xe90;
    /// Victim code; must begin with the Characteristic Code, length a
    /// multiple of 16 and at least 48.
    std::vector<std::uint8_t> victim_blob{detail::kDefaultVictimBlob.begin(),
                                          detail::kDefaultVictimBlob.end()};
    Shellcode shellcode = kDefaultShellcode;
    /// Fraction of filler blocks that repeat an earlier block's plaintext.
    double duplicate_rate = 0.0;
    /// Engine-side tweak parameters (not serialized; tests swap these).
    TweakTable engine_table = TweakTable::table1();

    Block cc() const {
        Block b;
        std::copy(victim_blob.begin(), victim_blob.begin() + 16, b.bytes.begin());
        return b;
    }

    void validate() const {
        if (page_count < 8) throw PageCountTooSmall("need at least 8 pages");
        if (bridge_offset % 16 != 0) throw UnalignedAccess("bridge_offset must be 16-aligned");
        if (bridge_offset + kBridgeBytes > kPageSize)
            throw Error("bridge region does not fit in one page");
        if (cc_offset % 16 != 0) throw UnalignedAccess("cc_offset must be 16-aligned");
        if (victim_blob.size() < kShellcodeSize || victim_blob.size() % 16 != 0)
            throw Error("victim blob must be >= 48 bytes and a multiple of 16");
        if (cc_offset + victim_blob.size() > kPageSize)
            throw Error("victim blob does not fit in one page");
        if (duplicate_rate < 0.0 || duplicate_rate > 1.0)
            throw Error("duplicate_rate must be in [0, 1]");
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "seed=" << seed << '\n'
           << "page_count=" << page_count << '\n'
           << "mode=" << to_string(mode) << '\n'
           << "bridge_offset=0x" << to_hex_u64(bridge_offset) << '\n'
           << "cc_offset=0x" << to_hex_u64(cc_offset) << '\n'
           << "cc=" << cc().to_hex() << '\n'
           << "victim_blob=" << to_hex(victim_blob) << '\n'
           << "shellcode=" << shellcode.to_hex() << '\n'
           << "duplicate_rate=" << duplicate_rate << '\n';
        return os.str();
    }

    static ScenarioConfig from_text(std::string_view text);
    static ScenarioConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw Error("cannot write scenario file: " + path.string());
        out << to_text();
    }
};

/// Simulated guest VM: encrypted memory filled with pseudorandom pages, a
/// bridge region that receives externally injected data, and a victim blob.
/// Bridge and victim placement are drawn per seed and are not exposed through
/// the attack surface.
class GuestImage {
public:
    explicit GuestImage(const ScenarioConfig& cfg)
        : cfg_(cfg), mem_(make_engine(cfg), std::uint64_t{cfg.page_count} * kPageSize) {
        cfg_.validate();

        Rng layout = Rng(cfg_.seed).fork(0x6c61796f75740001ull);
        bridge_page_ = static_cast<std::uint32_t>(layout.below(cfg_.page_count));
        do {
            victim_page_ = static_cast<std::uint32_t>(layout.below(cfg_.page_count));
        } while (victim_page_ == bridge_page_);

        fill_pages();
        mem_.write_plain(victim_address(), cfg_.victim_blob);
    }

    // --- the guest-side injection channel (data arrives via the server and
    // --- is encrypted with the guest's own key)
    void inject(std::span<const std::uint8_t> payload) {
        if (payload.size() > kBridgeBytes)
            throw PayloadTooLarge("payload exceeds " + std::to_string(kBridgeBytes) + " bytes");
        if (payload.size() % Block::kSize != 0)
            throw UnalignedLength("payload length must be a multiple of 16");
        mem_.write_plain(bridge_address(), payload);
    }

    // --- the hypervisor-side ciphertext view
    std::vector<std::uint8_t> hv_read_cipher(PhysAddr p, std::size_t len) const {
        return mem_.read_cipher(p, len);
    }

    void hv_write_cipher(PhysAddr p, std::span<const std::uint8_t> data) {
        mem_.write_cipher(p, data);
    }

    /// Decrypts the victim region through the guest's view and classifies it.
    VictimStatus victim_check(const Shellcode& sc) const {
        auto now = mem_.read_plain(victim_address(), kShellcodeSize);
        if (std::equal(now.begin(), now.end(), sc.bytes.begin())) return VictimStatus::ShellcodeActive;
        if (std::equal(now.begin(), now.end(), cfg_.victim_blob.begin())) return VictimStatus::AuthIntact;
        return VictimStatus::Corrupted;
    }

    // --- scenario facts an attacker legitimately has
    std::uint32_t page_count() const { return cfg_.page_count; }
    std::uint64_t size_bytes() const { return mem_.size_bytes(); }
    const ScenarioConfig& config() const { return cfg_; }

    // --- white-box accessors for tests and ground-truth reporting only;
    // --- attack code must go through AttackSurface
    PhysAddr bridge_address() const {
        return PhysAddr{std::uint64_t{bridge_page_} * kPageSize + cfg_.bridge_offset};
    }
    PhysAddr victim_address() const {
        return PhysAddr{std::uint64_t{victim_page_} * kPageSize + cfg_.cc_offset};
    }
    std::uint32_t bridge_page() const { return bridge_page_; }
    std::uint32_t victim_page() const { return victim_page_; }
    EncryptedMemory& memory() { return mem_; }
    const EncryptedMemory& memory() const { return mem_; }

private:
    static EngineConfig make_engine(const ScenarioConfig& cfg) {
        Aes128::Key vek = Rng(cfg.seed).fork(0x76656b0000000001ull).block().bytes;
        return cfg.mode == EngineMode::Vulnerable
                   ? EngineConfig::vulnerable(vek, cfg.engine_table)
                   : EngineConfig::mitigated(vek);
    }

    void fill_pages() {
        Rng fill = Rng(cfg_.seed).fork(0x66696c6c00000001ull);
        mem_.reserve_blocks(std::size_t{cfg_.page_count} * (kPageSize / Block::kSize));
        std::vector<std::uint8_t> page(kPageSize);
        for (std::uint32_t pg = 0; pg < cfg_.page_count; ++pg) {
            fill.fill(page);
            if (cfg_.duplicate_rate > 0.0) {
                for (std::size_t b = Block::kSize; b < kPageSize; b += Block::kSize) {
                    if (!fill.chance(cfg_.duplicate_rate)) continue;
                    std::size_t src = Block::kSize * fill.below(b / Block::kSize);
                    std::copy_n(page.begin() + static_cast<std::ptrdiff_t>(src), Block::kSize,
                                page.begin() + static_cast<std::ptrdiff_t>(b));
                }
            }
            mem_.write_plain(PhysAddr{std::uint64_t{pg} * kPageSize}, page);
        }
    }

    ScenarioConfig cfg_;
    EncryptedMemory mem_;
    std::uint32_t bridge_page_ = 0;
    std::uint32_t victim_page_ = 0;
};

inline GuestImage new_guest(std::uint64_t seed, std::uint32_t page_count) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.page_count = page_count;
    return GuestImage(cfg);
}

/// The only handle attack code receives: the injection channel, the raw
/// ciphertext view and the victim probe. No plaintext access, no placement.
class AttackSurface {
public:
    explicit AttackSurface(GuestImage& guest) : guest_(&guest) {}

    void inject(std::span<const std::uint8_t> payload) { guest_->inject(payload); }

    std::vector<std::uint8_t> hv_read_cipher(PhysAddr p, std::size_t len) const {
        return guest_->hv_read_cipher(p, len);
    }

    void hv_write_cipher(PhysAddr p, std::span<const std::uint8_t> data) {
        guest_->hv_write_cipher(p, data);
    }

    VictimStatus victim_check(const Shellcode& sc) const { return guest_->victim_check(sc); }

    std::uint32_t page_count() const { return guest_->page_count(); }
    std::uint64_t size_bytes() const { return guest_->size_bytes(); }

private:
    GuestImage* guest_;
};

// --- scenario file parsing (line-oriented key=value)

inline ScenarioConfig ScenarioConfig::from_text(std::string_view text) {
    ScenarioConfig cfg;
    std::istringstream is{std::string(text)};
    std::string line;
    auto parse_u64 = [](const std::string& v) {
        return v.starts_with("0x") ? std::stoull(v.substr(2), nullptr, 16) : std::stoull(v);
    };
    std::string cc_hex;
    std::string victim_hex;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("scenario line missing '=': " + line);
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        try {
            if (key == "seed") cfg.seed = parse_u64(val);
            else if (key == "page_count") cfg.page_count = static_cast<std::uint32_t>(parse_u64(val));
            else if (key == "mode") cfg.mode = engine_mode_from_string(val);
            else if (key == "bridge_offset") cfg.bridge_offset = static_cast<std::uint16_t>(parse_u64(val));
            else if (key == "cc_offset") cfg.cc_offset = static_cast<std::uint16_t>(parse_u64(val));
            else if (key == "cc") cc_hex = val;
            else if (key == "victim_blob") victim_hex = val;
            else if (key == "shellcode") cfg.shellcode = Shellcode::from_hex(val);
            else if (key == "duplicate_rate") cfg.duplicate_rate = std::stod(val);
            else throw ParseError("unknown scenario key: " + key);
        } catch (const std::invalid_argument&) {
            throw ParseError("bad value for scenario key " + key + ": " + val);
        } catch (const std::out_of_range&) {
            throw ParseError("value out of range for scenario key " + key + ": " + val);
        }
    }
    if (!victim_hex.empty()) cfg.victim_blob = parse_hex(victim_hex);
    if (!cc_hex.empty()) {
        Block cc = Block::from_hex(cc_hex);
        if (victim_hex.empty()) {
            // keep the default tail, swap in the configured fingerprint
            std::copy(cc.bytes.begin(), cc.bytes.end(), cfg.victim_blob.begin());
        } else if (cfg.cc() != cc) {
            throw ParseError("cc does not match the first 16 bytes of victim_blob");
        }
    }
    cfg.validate();
    return cfg;
}

inline ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

}  // namespace sevsim
