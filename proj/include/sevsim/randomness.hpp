#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "sevsim/block.hpp"

namespace sevsim {

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
/// Series for x < a+1, Lentz continued fraction otherwise.
inline double regularized_gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) return std::nan("");
    if (x == 0.0) return 1.0;
    double log_prefix = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double term = 1.0 / a;
        double sum = term;
        for (int i = 0; i < 10000; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        return 1.0 - sum * std::exp(log_prefix);
    }
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 10000; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(log_prefix) * h;
}

/// Unpack bytes into a bit sequence, MSB of each byte first.
inline std::vector<std::uint8_t> bytes_to_bits(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> bits;
    bits.reserve(bytes.size() * 8);
    for (auto b : bytes)
        for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
    return bits;
}

/// Frequency (monobit) test.
inline double monobit_p(std::span<const std::uint8_t> bits) {
    long long s = 0;
    for (auto b : bits) s += b ? 1 : -1;
    double n = static_cast<double>(bits.size());
    double s_obs = std::fabs(static_cast<double>(s)) / std::sqrt(n);
    return std::erfc(s_obs / std::sqrt(2.0));
}

/// Frequency test within non-overlapping blocks of `block_len` bits.
inline double block_frequency_p(std::span<const std::uint8_t> bits, std::size_t block_len = 128) {
    std::size_t n_blocks = bits.size() / block_len;
    if (n_blocks == 0) return std::nan("");
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n_blocks; ++i) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < block_len; ++j) ones += bits[i * block_len + j];
        double pi = static_cast<double>(ones) / static_cast<double>(block_len);
        chi2 += (pi - 0.5) * (pi - 0.5);
    }
    chi2 *= 4.0 * static_cast<double>(block_len);
    return regularized_gamma_q(static_cast<double>(n_blocks) / 2.0, chi2 / 2.0);
}

/// Runs test. Returns 0 when the prerequisite frequency condition fails.
inline double runs_p(std::span<const std::uint8_t> bits) {
    std::size_t n = bits.size();
    if (n < 2) return std::nan("");
    std::size_t ones = 0;
    for (auto b : bits) ones += b;
    double pi = static_cast<double>(ones) / static_cast<double>(n);
    if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(static_cast<double>(n))) return 0.0;
    std::size_t v = 1;
    for (std::size_t k = 1; k < n; ++k) v += bits[k] != bits[k - 1];
    double dn = static_cast<double>(n);
    double num = std::fabs(static_cast<double>(v) - 2.0 * dn * pi * (1.0 - pi));
    double den = 2.0 * std::sqrt(2.0 * dn) * pi * (1.0 - pi);
    return std::erfc(num / den);
}

struct RandomnessReport {
    static constexpr double kAlpha = 0.01;

    std::size_t bit_count = 0;
    double monobit = 0.0;
    double block_frequency = 0.0;
    double runs = 0.0;

    bool pass() const {
        return monobit >= kAlpha && block_frequency >= kAlpha && runs >= kAlpha;
    }

    std::string to_text() const {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "bits=%zu\nmonobit_p=%.6f\nblock_frequency_p=%.6f\nruns_p=%.6f\n"
                      "randomness_verdict=%s\n",
                      bit_count, monobit, block_frequency, runs, pass() ? "pass" : "fail");
        return buf;
    }
};

inline RandomnessReport randomness_battery(std::span<const std::uint8_t> bytes) {
    auto bits = bytes_to_bits(bytes);
    RandomnessReport r;
    r.bit_count = bits.size();
    r.monobit = monobit_p(bits);
    r.block_frequency = block_frequency_p(bits);
    r.runs = runs_p(bits);
    return r;
}

}  // namespace sevsim
