#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sevsim/aes128.hpp"
#include "sevsim/kdf.hpp"
#include "sevsim/tweak.hpp"

namespace sevsim {

enum class EngineMode { Vulnerable, Mitigated };

inline std::string_view to_string(EngineMode m) {
    return m == EngineMode::Vulnerable ? "vulnerable" : "mitigated";
}

inline EngineMode engine_mode_from_string(std::string_view s) {
    if (s == "vulnerable") return EngineMode::Vulnerable;
    if (s == "mitigated") return EngineMode::Mitigated;
    throw ParseError("unknown engine mode: " + std::string(s));
}

inline constexpr std::string_view kDefaultKdfLabel = "block-key/v1";

/// The memory-encryption engine of one VM. The VEK is fixed for the engine's
/// lifetime. Vulnerable mode XORs the address tweak into the plaintext before
/// AES; mitigated mode folds the block address into the AES key via the KDF.
class EngineConfig {
public:
    static EngineConfig vulnerable(const Aes128::Key& vek, TweakTable table = TweakTable::table1()) {
        return EngineConfig(EngineMode::Vulnerable, vek, std::move(table), {});
    }

    static EngineConfig mitigated(const Aes128::Key& vek, std::string_view kdf_label = kDefaultKdfLabel) {
        return EngineConfig(EngineMode::Mitigated, vek, TweakTable{},
                            std::vector<std::uint8_t>(kdf_label.begin(), kdf_label.end()));
    }

    EngineMode mode() const { return mode_; }
    const TweakTable& table() const { return table_; }
    const Aes128::Key& vek() const { return vek_; }

    Block encrypt_block(const Block& m, PhysAddr p) const {
        check_addr_in_model(p);
        if (mode_ == EngineMode::Vulnerable) return cipher_.encrypt(m ^ tweak_of(table_, p));
        return Aes128(derive_address_key(vek_, kdf_label_, p.block())).encrypt(m);
    }

    Block decrypt_block(const Block& c, PhysAddr p) const {
        check_addr_in_model(p);
        if (mode_ == EngineMode::Vulnerable) return cipher_.decrypt(c) ^ tweak_of(table_, p);
        return Aes128(derive_address_key(vek_, kdf_label_, p.block())).decrypt(c);
    }

private:
    EngineConfig(EngineMode mode, const Aes128::Key& vek, TweakTable table,
                 std::vector<std::uint8_t> kdf_label)
        : mode_(mode), vek_(vek), cipher_(vek), table_(std::move(table)),
          kdf_label_(std::move(kdf_label)) {}

    EngineMode mode_;
    Aes128::Key vek_;
    Aes128 cipher_;
    TweakTable table_;
    std::vector<std::uint8_t> kdf_label_;
};

inline Block encrypt_block(const EngineConfig& engine, const Block& m, PhysAddr p) {
    return engine.encrypt_block(m, p);
}

inline Block decrypt_block(const EngineConfig& engine, const Block& c, PhysAddr p) {
    return engine.decrypt_block(c, p);
}

}  // namespace sevsim
