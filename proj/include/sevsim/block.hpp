#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sevsim/errors.hpp"

namespace sevsim {

namespace detail {

inline constexpr char kHexDigits[] = "0123456789abcdef";

inline int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace detail

/// A 16-byte value, used both as a memory block and as a vector in F_2^128.
/// Byte k of the canonical serialization is the byte at memory offset k.
struct Block {
    static constexpr std::size_t kSize = 16;

    std::array<std::uint8_t, kSize> bytes{};

    constexpr std::uint8_t& operator[](std::size_t i) { return bytes[i]; }
    constexpr std::uint8_t operator[](std::size_t i) const { return bytes[i]; }

    constexpr bool operator==(const Block&) const = default;

    constexpr Block& operator^=(const Block& other) {
        for (std::size_t i = 0; i < kSize; ++i) bytes[i] ^= other.bytes[i];
        return *this;
    }

    friend constexpr Block operator^(Block a, const Block& b) {
        a ^= b;
        return a;
    }

    constexpr bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }

    /// Bit i of the 128-bit vector: bit i%8 (LSB first) of byte i/8.
    constexpr bool bit(std::size_t i) const { return (bytes[i / 8] >> (i % 8)) & 1; }

    static Block from_bytes(std::span<const std::uint8_t> data) {
        if (data.size() != kSize) throw ParseError("block needs exactly 16 bytes");
        Block b;
        for (std::size_t i = 0; i < kSize; ++i) b.bytes[i] = data[i];
        return b;
    }

    /// 32 lowercase hex characters, byte 0 first, no separators.
    std::string to_hex() const {
        std::string out(2 * kSize, '0');
        for (std::size_t i = 0; i < kSize; ++i) {
            out[2 * i] = detail::kHexDigits[bytes[i] >> 4];
            out[2 * i + 1] = detail::kHexDigits[bytes[i] & 0xf];
        }
        return out;
    }

    /// Space-separated dump style: "82 25 38 38 ...".
    std::string to_dump() const {
        std::string out;
        out.reserve(3 * kSize);
        for (std::size_t i = 0; i < kSize; ++i) {
            if (i) out.push_back(' ');
            out.push_back(detail::kHexDigits[bytes[i] >> 4]);
            out.push_back(detail::kHexDigits[bytes[i] & 0xf]);
        }
        return out;
    }

    static Block from_hex(std::string_view hex) {
        if (hex.size() != 2 * kSize) throw ParseError("block hex must be 32 characters");
        Block b;
        for (std::size_t i = 0; i < kSize; ++i) {
            int hi = detail::hex_nibble(hex[2 * i]);
            int lo = detail::hex_nibble(hex[2 * i + 1]);
            if (hi < 0 || lo < 0) throw ParseError("invalid hex digit in block");
            b.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
        }
        return b;
    }
};

inline std::string to_hex(std::span<const std::uint8_t> data) {
    std::string out;
    out.reserve(2 * data.size());
    for (auto b : data) {
        out.push_back(detail::kHexDigits[b >> 4]);
        out.push_back(detail::kHexDigits[b & 0xf]);
    }
    return out;
}

inline std::string to_hex_u64(std::uint64_t v) {
    char buf[17];
    int n = 0;
    do {
        buf[n++] = detail::kHexDigits[v & 0xf];
        v >>= 4;
    } while (v != 0);
    std::string out;
    out.reserve(static_cast<std::size_t>(n));
    while (n > 0) out.push_back(buf[--n]);
    return out;
}

inline std::vector<std::uint8_t> parse_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw ParseError("hex string has odd length");
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = detail::hex_nibble(hex[2 * i]);
        int lo = detail::hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw ParseError("invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

}  // namespace sevsim
