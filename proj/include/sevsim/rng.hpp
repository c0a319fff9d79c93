#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <span>

#include "sevsim/block.hpp"

namespace sevsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic random source. All sampling avoids std::uniform_int_distribution
/// so that identical seeds give identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

    std::uint64_t next() { return eng_(); }

    /// Unbiased draw from [0, bound) via masked rejection sampling.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(bound - 1);
        for (;;) {
            std::uint64_t v = next() & mask;
            if (v < bound) return v;
        }
    }

    std::uint8_t byte() { return static_cast<std::uint8_t>(next() & 0xff); }

    void fill(std::span<std::uint8_t> out) {
        std::size_t i = 0;
        while (i + 8 <= out.size()) {
            std::uint64_t v = next();
            for (int k = 0; k < 8; ++k) out[i++] = static_cast<std::uint8_t>(v >> (8 * k));
        }
        if (i < out.size()) {
            std::uint64_t v = next();
            for (int k = 0; k < 8 && i < out.size(); ++k)
                out[i++] = static_cast<std::uint8_t>(v >> (8 * k));
        }
    }

    Block block() {
        Block b;
        fill(b.bytes);
        return b;
    }

    bool chance(double p) {
        // 53-bit uniform in [0,1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53 < p;
    }

    /// Independent substream derived from the original seed and a tag.
    Rng fork(std::uint64_t tag) const { return Rng(splitmix64(seed_ ^ splitmix64(tag))); }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

}  // namespace sevsim
