#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sevsim/aes128.hpp"
#include "sevsim/block.hpp"

namespace sevsim {

namespace detail {

// doubling in GF(2^128) with the CMAC polynomial
inline Block cmac_dbl(const Block& in) {
    Block out;
    std::uint8_t carry = 0;
    for (int i = 15; i >= 0; --i) {
        std::uint8_t b = in.bytes[static_cast<std::size_t>(i)];
        out.bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((b << 1) | carry);
        carry = b >> 7;
    }
    if (carry) out.bytes[15] ^= 0x87;
    return out;
}

}  // namespace detail

/// AES-CMAC (RFC 4493).
inline Block aes_cmac(const Aes128& cipher, std::span<const std::uint8_t> msg) {
    Block k1 = detail::cmac_dbl(cipher.encrypt(Block{}));
    Block k2 = detail::cmac_dbl(k1);

    std::size_t n_blocks = (msg.size() + 15) / 16;
    bool last_complete = !msg.empty() && msg.size() % 16 == 0;
    if (n_blocks == 0) n_blocks = 1;

    Block x{};
    for (std::size_t i = 0; i + 1 < n_blocks; ++i) {
        Block m = Block::from_bytes(msg.subspan(16 * i, 16));
        x = cipher.encrypt(x ^ m);
    }

    Block last{};
    std::size_t tail_off = 16 * (n_blocks - 1);
    if (last_complete) {
        last = Block::from_bytes(msg.subspan(tail_off, 16)) ^ k1;
    } else {
        std::size_t tail_len = msg.size() - tail_off;
        for (std::size_t i = 0; i < tail_len; ++i) last.bytes[i] = msg[tail_off + i];
        last.bytes[tail_len] = 0x80;
        last ^= k2;
    }
    return cipher.encrypt(x ^ last);
}

inline Block aes_cmac(const Aes128::Key& key, std::span<const std::uint8_t> msg) {
    return aes_cmac(Aes128(key), msg);
}

/// Counter-mode key derivation in the SP 800-108 style, PRF = AES-CMAC:
/// K(p) = CMAC(vek, [i=1]_32 || label || 0x00 || [block addr]_64 || [L=128]_32),
/// all integers big-endian. One PRF call yields the full 128-bit key.
inline Aes128::Key derive_address_key(const Aes128::Key& vek,
                                      std::span<const std::uint8_t> label,
                                      std::uint64_t block_addr) {
    std::vector<std::uint8_t> input;
    input.reserve(4 + label.size() + 1 + 8 + 4);
    auto push_be32 = [&](std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) input.push_back(static_cast<std::uint8_t>(v >> s));
    };
    push_be32(1);
    input.insert(input.end(), label.begin(), label.end());
    input.push_back(0x00);
    for (int s = 56; s >= 0; s -= 8) input.push_back(static_cast<std::uint8_t>(block_addr >> s));
    push_be32(128);
    return aes_cmac(vek, input).bytes;
}

}  // namespace sevsim
