#include <catch_amalgamated.hpp>

#include "sevsim/block.hpp"
#include "sevsim/rng.hpp"

using namespace sevsim;

TEST_CASE("xor is self-inverse and has identity") {
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        Block v = rng.block();
        CHECK((v ^ v).is_zero());
        CHECK((v ^ Block{}) == v);
    }
}

TEST_CASE("xor is associative and commutative") {
    Rng rng(43);
    for (int i = 0; i < 200; ++i) {
        Block a = rng.block(), b = rng.block(), c = rng.block();
        CHECK((a ^ b) == (b ^ a));
        CHECK(((a ^ b) ^ c) == (a ^ (b ^ c)));
    }
}

TEST_CASE("xor of the first two tweak rows") {
    Block t4 = Block::from_hex("82253838822538388225383882253838");
    Block t5 = Block::from_hex("ec09079cec09079cec09079cec09079c");
    CHECK((t4 ^ t5) == Block::from_hex("6e2c3fa46e2c3fa46e2c3fa46e2c3fa4"));
}

TEST_CASE("hex serialization round trips") {
    Rng rng(44);
    for (int i = 0; i < 200; ++i) {
        Block v = rng.block();
        CHECK(Block::from_hex(v.to_hex()) == v);
    }
    CHECK(Block{}.to_hex() == "00000000000000000000000000000000");
}

TEST_CASE("serialization is memory order, lowest-addressed byte first") {
    Block b;
    for (std::size_t i = 0; i < Block::kSize; ++i) b[i] = static_cast<std::uint8_t>(i);
    CHECK(b.to_hex() == "000102030405060708090a0b0c0d0e0f");
    CHECK(b.to_dump() == "00 01 02 03 04 05 06 07 08 09 0a 0b 0c 0d 0e 0f");
}

TEST_CASE("from_hex rejects malformed input") {
    CHECK_THROWS_AS(Block::from_hex("00"), ParseError);
    CHECK_THROWS_AS(Block::from_hex("zz253838822538388225383882253838"), ParseError);
    CHECK_THROWS_AS(Block::from_hex(""), ParseError);
}

TEST_CASE("byte span helpers") {
    auto v = parse_hex("8225");
    REQUIRE(v.size() == 2);
    CHECK(v[0] == 0x82);
    CHECK(v[1] == 0x25);
    CHECK(to_hex(v) == "8225");
    CHECK_THROWS_AS(parse_hex("123"), ParseError);
    CHECK(to_hex_u64(0) == "0");
    CHECK(to_hex_u64(0x3ffffffffull) == "3ffffffff");
}
