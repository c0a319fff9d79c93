#include <catch_amalgamated.hpp>

#include <set>

#include "sevsim/kdf.hpp"
#include "sevsim/rng.hpp"

using namespace sevsim;

// RFC 4493 test vectors, key 2b7e1516 28aed2a6 abf71588 09cf4f3c
namespace {

const Aes128::Key kRfcKey = Block::from_hex("2b7e151628aed2a6abf7158809cf4f3c").bytes;

const std::vector<std::uint8_t> kRfcMsg = parse_hex(
    "6bc1bee22e409f96e93d7e117393172a"
    "ae2d8a571e03ac9c9eb76fac45af8e51"
    "30c81c46a35ce411e5fbc1191a0a52ef"
    "f69f2445df4f9b17ad2b417be66c3710");

}  // namespace

TEST_CASE("cmac of the empty message") {
    CHECK(aes_cmac(kRfcKey, {}).to_hex() == "bb1d6929e95937287fa37d129b756746");
}

TEST_CASE("cmac of one full block") {
    CHECK(aes_cmac(kRfcKey, std::span(kRfcMsg).first(16)).to_hex() ==
          "070a16b46b4d4144f79bdd9dd04a287c");
}

TEST_CASE("cmac of 40 bytes") {
    CHECK(aes_cmac(kRfcKey, std::span(kRfcMsg).first(40)).to_hex() ==
          "dfa66747de9ae63030ca32611497c827");
}

TEST_CASE("cmac of 64 bytes") {
    CHECK(aes_cmac(kRfcKey, kRfcMsg).to_hex() == "51f0bebf7e3b9d92fc49741779363cfe");
}

TEST_CASE("derived keys are deterministic") {
    Aes128::Key vek = Block::from_hex("000102030405060708090a0b0c0d0e0f").bytes;
    std::vector<std::uint8_t> label = {'k', 'e', 'y'};
    CHECK(derive_address_key(vek, label, 0x1230) == derive_address_key(vek, label, 0x1230));
}

TEST_CASE("derived keys differ per address, label and vek") {
    Rng rng(31);
    Aes128::Key vek = rng.block().bytes;
    std::vector<std::uint8_t> label = {'a'};

    std::set<Aes128::Key> keys;
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t addr = Block::kSize * rng.below(std::uint64_t{1} << 30);
        keys.insert(derive_address_key(vek, label, addr));
    }
    CHECK(keys.size() >= 999);  // distinct addresses may repeat, keys must not collide otherwise

    std::vector<std::uint8_t> label2 = {'b'};
    CHECK(derive_address_key(vek, label, 0x40) != derive_address_key(vek, label2, 0x40));
    Aes128::Key vek2 = rng.block().bytes;
    CHECK(derive_address_key(vek, label, 0x40) != derive_address_key(vek2, label, 0x40));
}
