#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "sevsim/block.hpp"
#include "sevsim/errors.hpp"
#include "sevsim/gf2.hpp"
#include "sevsim/rng.hpp"

namespace sevsim {

/// Byte-granular physical address. The tweak acts on bits 4..33 of the
/// block-aligned address; the modeled physical space is 34 bits.
struct PhysAddr {
    std::uint64_t value = 0;

    constexpr PhysAddr() = default;
    constexpr explicit PhysAddr(std::uint64_t v) : value(v) {}

    constexpr std::uint64_t block() const { return value & ~std::uint64_t{0xf}; }
    constexpr bool block_aligned() const { return (value & 0xf) == 0; }

    constexpr auto operator<=>(const PhysAddr&) const = default;
};

inline constexpr int kTweakLowBit = 4;
inline constexpr int kTweakHighBit = 33;
inline constexpr std::uint64_t kPhysAddrSpace = std::uint64_t{1} << (kTweakHighBit + 1);

inline void check_addr_in_model(PhysAddr p) {
    if (p.value >= kPhysAddrSpace)
        throw AddressOutOfRange("physical address 0x" + to_hex_u64(p.value) +
                                " exceeds the 34-bit model");
}

namespace detail {

// Measured tweak parameters, one row per address bit 4..33. Every row repeats
// a 4-byte word four times; that structure is treated as opaque data.
inline constexpr std::array<std::string_view, 30> kTable1Hex = {
    "82253838822538388225383882253838",  // t4
    "ec09079cec09079cec09079cec09079c",  // t5
    "40000018400000184000001840000018",  // t6
    "8102a23a8102a23a8102a23a8102a23a",  // t7
    "77d9107777d9107777d9107777d91077",  // t8
    "b010b2c0b010b2c0b010b2c0b010b2c0",  // t9
    "536d544d536d544d536d544d536d544d",  // t10
    "1568ee531568ee531568ee531568ee53",  // t11
    "b09230c2b09230c2b09230c2b09230c2",  // t12
    "9670ff8e9670ff8e9670ff8e9670ff8e",  // t13
    "361b90d5361b90d5361b90d5361b90d5",  // t14
    "0400c2360400c2360400c2360400c236",  // t15
    "e8182985e8182985e8182985e8182985",  // t16
    "bd31f92abd31f92abd31f92abd31f92a",  // t17
    "a50d3744a50d3744a50d3744a50d3744",  // t18
    "f431d84cf431d84cf431d84cf431d84c",  // t19
    "02043181020431810204318102043181",  // t20
    "b37132a1b37132a1b37132a1b37132a1",  // t21
    "508ac06c508ac06c508ac06c508ac06c",  // t22
    "168a8020168a8020168a8020168a8020",  // t23
    "7f9bc0077f9bc0077f9bc0077f9bc007",  // t24
    "00db040700db040700db040700db0407",  // t25
    "7f0004047f0004047f0004047f000404",  // t26
    "70fa01be70fa01be70fa01be70fa01be",  // t27
    "bb3d2890bb3d2890bb3d2890bb3d2890",  // t28
    "bd2dd526bd2dd526bd2dd526bd2dd526",  // t29
    "1c5d6ce21c5d6ce21c5d6ce21c5d6ce2",  // t30
    "af4c8fa4af4c8fa4af4c8fa4af4c8fa4",  // t31
    "4f5ce7274f5ce7274f5ce7274f5ce727",  // t32
    "af4c8fa4af4c8fa4af4c8fa4af4c8fa4",  // t33
};

}  // namespace detail

/// Parameters of the physical-address tweak: 30 constant 128-bit vectors,
/// one per address bit 4..33. Immutable in practice; freely shareable.
class TweakTable {
public:
    TweakTable() = default;

    explicit TweakTable(const std::array<Block, kTweakUnknowns>& rows) : rows_(rows) {}

    /// The bundled hardware parameters.
    static const TweakTable& table1() {
        static const TweakTable t = [] {
            TweakTable t;
            for (int j = 0; j < kTweakUnknowns; ++j)
                t.rows_[static_cast<std::size_t>(j)] = Block::from_hex(detail::kTable1Hex[static_cast<std::size_t>(j)]);
            return t;
        }();
        return t;
    }

    /// Reproducible pseudorandom parameters; each row nonzero.
    static TweakTable random(std::uint64_t seed) {
        Rng rng(seed);
        TweakTable t;
        for (auto& row : t.rows_) {
            do {
                row = rng.block();
            } while (row.is_zero());
        }
        return t;
    }

    /// Row for address bit `bit`, bit in [4, 33].
    const Block& row(int bit) const { return rows_.at(static_cast<std::size_t>(bit - kTweakLowBit)); }

    /// Row for unknown index j in [0, 30), i.e. address bit j+4.
    const Block& at(int j) const { return rows_.at(static_cast<std::size_t>(j)); }
    Block& at(int j) { return rows_.at(static_cast<std::size_t>(j)); }

    const std::array<Block, kTweakUnknowns>& rows() const { return rows_; }

    bool operator==(const TweakTable&) const = default;

    /// 30 lines of "t<index>: <32 hex chars>", index 4..33.
    std::string to_text() const {
        std::ostringstream os;
        for (int j = 0; j < kTweakUnknowns; ++j)
            os << 't' << (j + kTweakLowBit) << ": " << rows_[static_cast<std::size_t>(j)].to_hex() << '\n';
        return os.str();
    }

    static TweakTable from_text(std::string_view text) {
        TweakTable t;
        std::array<bool, kTweakUnknowns> seen{};
        std::istringstream is{std::string(text)};
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string key, hex;
            if (!(ls >> key >> hex) || key.size() < 2 || key.front() != 't' || key.back() != ':')
                throw ParseError("tweak table line not of form 't<index>: <hex>': " + line);
            int bit = 0;
            try {
                bit = std::stoi(key.substr(1, key.size() - 2));
            } catch (const std::exception&) {
                throw ParseError("bad tweak row index in: " + line);
            }
            if (bit < kTweakLowBit || bit > kTweakHighBit)
                throw ParseError("tweak row index out of range 4..33: " + key);
            std::size_t j = static_cast<std::size_t>(bit - kTweakLowBit);
            if (seen[j]) throw ParseError("duplicate tweak row: " + key);
            seen[j] = true;
            t.rows_[j] = Block::from_hex(hex);
        }
        for (int j = 0; j < kTweakUnknowns; ++j)
            if (!seen[static_cast<std::size_t>(j)])
                throw ParseError("tweak table missing row t" + std::to_string(j + kTweakLowBit));
        return t;
    }

    static TweakTable load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open tweak table file: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_text(buf.str());
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw Error("cannot write tweak table file: " + path.string());
        out << to_text();
    }

private:
    std::array<Block, kTweakUnknowns> rows_{};
};

/// T(x): XOR of the rows selected by the set bits 4..33 of the block address.
/// Bits 0..3 never select a distinct block and are ignored.
inline Block tweak_of(const TweakTable& table, PhysAddr addr) {
    check_addr_in_model(addr);
    Block out{};
    std::uint64_t bits = addr.block() >> kTweakLowBit;
    for (int j = 0; bits != 0; ++j, bits >>= 1)
        if (bits & 1) out ^= table.at(j);
    return out;
}

}  // namespace sevsim
