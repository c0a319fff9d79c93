#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sevsim/aes128.hpp"
#include "sevsim/randomness.hpp"
#include "sevsim/rng.hpp"

using namespace sevsim;

namespace {

std::vector<std::uint8_t> bits_of(const char* s) {
    std::vector<std::uint8_t> v;
    for (; *s; ++s) v.push_back(*s == '1');
    return v;
}

}  // namespace

TEST_CASE("regularized gamma Q identities") {
    // Q(1/2, x) = erfc(sqrt(x))
    for (double x : {0.1, 0.5, 1.0, 2.0, 10.0}) {
        CHECK_THAT(regularized_gamma_q(0.5, x),
                   Catch::Matchers::WithinAbs(std::erfc(std::sqrt(x)), 1e-12));
    }
    // Q(1, x) = exp(-x)
    for (double x : {0.25, 1.0, 3.0, 20.0}) {
        CHECK_THAT(regularized_gamma_q(1.0, x), Catch::Matchers::WithinAbs(std::exp(-x), 1e-12));
    }
    // Q(a+1, x) = Q(a, x) + x^a e^-x / Gamma(a+1)
    for (double a : {0.5, 1.5, 4.0, 12.0}) {
        for (double x : {0.5, 2.0, 8.0}) {
            double lhs = regularized_gamma_q(a + 1.0, x);
            double rhs = regularized_gamma_q(a, x) +
                         std::exp(a * std::log(x) - x - std::lgamma(a + 1.0));
            CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-12));
        }
    }
    CHECK(regularized_gamma_q(0.5, 0.0) == 1.0);
    // large-a path used by the block frequency test
    CHECK_THAT(regularized_gamma_q(512.0, 512.0), Catch::Matchers::WithinAbs(0.5, 0.02));
}

TEST_CASE("monobit on the published example sequence") {
    CHECK_THAT(monobit_p(bits_of("1011010101")), Catch::Matchers::WithinAbs(0.527089, 1e-6));
}

TEST_CASE("block frequency on the published example sequence") {
    CHECK_THAT(block_frequency_p(bits_of("0110011010"), 3),
               Catch::Matchers::WithinAbs(0.801252, 1e-6));
}

TEST_CASE("runs on the published example sequence") {
    CHECK_THAT(runs_p(bits_of("1001101011")), Catch::Matchers::WithinAbs(0.147232, 1e-6));
}

TEST_CASE("degenerate streams fail") {
    std::vector<std::uint8_t> ones(4096, 1);
    CHECK(monobit_p(ones) < 0.01);
    CHECK(runs_p(ones) == 0.0);

    // perfectly alternating bits: balanced but far too many runs
    std::vector<std::uint8_t> alt(4096);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i & 1;
    CHECK(monobit_p(alt) >= 0.01);
    CHECK(runs_p(alt) < 0.01);
}

TEST_CASE("bit extraction is MSB first") {
    std::vector<std::uint8_t> bytes = {0x80, 0x01};
    auto bits = bytes_to_bits(bytes);
    REQUIRE(bits.size() == 16);
    CHECK(bits[0] == 1);
    CHECK(bits[7] == 0);
    CHECK(bits[14] == 0);
    CHECK(bits[15] == 1);
}

TEST_CASE("AES ciphertext stream passes the battery") {
    Aes128 aes(Block::from_hex("2b7e151628aed2a6abf7158809cf4f3c").bytes);
    std::vector<std::uint8_t> stream;
    Block ctr{};
    for (int i = 0; i < 1024; ++i) {
        Block c = aes.encrypt(ctr);
        stream.insert(stream.end(), c.bytes.begin(), c.bytes.end());
        for (std::size_t k = 0; k < Block::kSize && ++ctr.bytes[k] == 0; ++k) {
        }
    }
    RandomnessReport r = randomness_battery(stream);
    INFO(r.to_text());
    CHECK(r.pass());
}

TEST_CASE("report text is stable key=value") {
    RandomnessReport r;
    r.bit_count = 16;
    r.monobit = 0.5;
    r.block_frequency = 0.25;
    r.runs = 0.125;
    CHECK(r.to_text() ==
          "bits=16\nmonobit_p=0.500000\nblock_frequency_p=0.250000\nruns_p=0.125000\n"
          "randomness_verdict=pass\n");
}
