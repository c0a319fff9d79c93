#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sevsim/engine.hpp"

namespace sevsim {

/// Block-addressed physical memory holding ciphertext, with a transparent
/// plaintext view (C-bit set) and a raw ciphertext view (C-bit unset).
/// Sparse backing store; an unwritten block reads as the decryption of the
/// all-zero ciphertext block. Single writer at a time.
class EncryptedMemory {
public:
    EncryptedMemory(EngineConfig engine, std::uint64_t size_bytes)
        : engine_(std::move(engine)), size_bytes_(size_bytes) {
        if (size_bytes_ % Block::kSize != 0)
            throw UnalignedLength("memory size must be a multiple of 16");
        if (size_bytes_ > kPhysAddrSpace)
            throw AddressOutOfRange("memory size exceeds the 34-bit physical space");
    }

    const EngineConfig& engine() const { return engine_; }
    std::uint64_t size_bytes() const { return size_bytes_; }

    void write_plain(PhysAddr p, std::span<const std::uint8_t> data) {
        check_access(p, data.size());
        for (std::size_t off = 0; off < data.size(); off += Block::kSize) {
            PhysAddr addr{p.value + off};
            Block m = Block::from_bytes(data.subspan(off, Block::kSize));
            blocks_[addr.value] = engine_.encrypt_block(m, addr);
        }
    }

    std::vector<std::uint8_t> read_plain(PhysAddr p, std::size_t len) const {
        check_access(p, len);
        std::vector<std::uint8_t> out(len);
        for (std::size_t off = 0; off < len; off += Block::kSize) {
            PhysAddr addr{p.value + off};
            Block m = engine_.decrypt_block(stored(addr), addr);
            std::copy(m.bytes.begin(), m.bytes.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
        }
        return out;
    }

    void write_cipher(PhysAddr p, std::span<const std::uint8_t> data) {
        check_access(p, data.size());
        for (std::size_t off = 0; off < data.size(); off += Block::kSize)
            blocks_[p.value + off] = Block::from_bytes(data.subspan(off, Block::kSize));
    }

    std::vector<std::uint8_t> read_cipher(PhysAddr p, std::size_t len) const {
        check_access(p, len);
        std::vector<std::uint8_t> out(len);
        for (std::size_t off = 0; off < len; off += Block::kSize) {
            Block c = stored(PhysAddr{p.value + off});
            std::copy(c.bytes.begin(), c.bytes.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
        }
        return out;
    }

    Block read_cipher_block(PhysAddr p) const {
        check_access(p, Block::kSize);
        return stored(p);
    }

    Block read_plain_block(PhysAddr p) const {
        check_access(p, Block::kSize);
        return engine_.decrypt_block(stored(p), p);
    }

    void reserve_blocks(std::size_t n) { blocks_.reserve(n); }

    /// Hex dump, one 16-byte line per block: "<address>: <b0> <b1> ...".
    std::string dump_cipher(PhysAddr p, std::size_t len) const { return dump(p, len, false); }
    std::string dump_plain(PhysAddr p, std::size_t len) const { return dump(p, len, true); }

private:
    Block stored(PhysAddr p) const {
        auto it = blocks_.find(p.value);
        return it == blocks_.end() ? Block{} : it->second;
    }

    void check_access(PhysAddr p, std::size_t len) const {
        if (!p.block_aligned())
            throw UnalignedAccess("address 0x" + to_hex_u64(p.value) + " is not 16-byte aligned");
        if (len % Block::kSize != 0)
            throw UnalignedAccess("length " + std::to_string(len) + " is not a multiple of 16");
        if (p.value >= size_bytes_ || len > size_bytes_ - p.value)
            throw AddressOutOfRange("access [0x" + to_hex_u64(p.value) + ", +" +
                                    std::to_string(len) + ") exceeds memory of " +
                                    std::to_string(size_bytes_) + " bytes");
    }

    std::string dump(PhysAddr p, std::size_t len, bool plain) const {
        check_access(p, len);
        std::string out;
        out.reserve((len / Block::kSize) * 64);
        char addr_buf[24];
        for (std::size_t off = 0; off < len; off += Block::kSize) {
            PhysAddr addr{p.value + off};
            Block b = plain ? engine_.decrypt_block(stored(addr), addr) : stored(addr);
            std::snprintf(addr_buf, sizeof addr_buf, "%010llx: ",
                          static_cast<unsigned long long>(addr.value));
            out += addr_buf;
            out += b.to_dump();
            out += '\n';
        }
        return out;
    }

    EngineConfig engine_;
    std::uint64_t size_bytes_;
    std::unordered_map<std::uint64_t, Block> blocks_;
};

}  // namespace sevsim
