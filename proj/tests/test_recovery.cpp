#include <catch_amalgamated.hpp>

#include <map>
#include <set>
#include <vector>

#include "sevsim/recovery.hpp"

using namespace sevsim;

namespace {

EncryptedMemory vulnerable_mem(std::uint64_t seed, TweakTable table = TweakTable::table1()) {
    Rng rng(seed);
    return EncryptedMemory(EngineConfig::vulnerable(rng.block().bytes, std::move(table)),
                           kPhysAddrSpace);
}

EncryptedMemory mitigated_mem(std::uint64_t seed) {
    Rng rng(seed);
    return EncryptedMemory(EngineConfig::mitigated(rng.block().bytes), kPhysAddrSpace);
}

// counter-mode test double: same plaintext never encrypts the same way twice
struct CtrOracle {
    Aes128 aes{Block::from_hex("2b7e151628aed2a6abf7158809cf4f3c").bytes};
    std::uint64_t counter = 0;

    Block operator()(const Block& m) {
        Block ctr{};
        for (int k = 0; k < 8; ++k) ctr.bytes[static_cast<std::size_t>(k)] =
            static_cast<std::uint8_t>(counter >> (8 * k));
        ++counter;
        return aes.encrypt(ctr) ^ m;
    }
};

}  // namespace

TEST_CASE("rewriting the same plaintext at one address is deterministic") {
    auto mem = vulnerable_mem(1);
    PhysAddr p{0x4000};
    Block m = Rng(2).block();
    mem.write_plain(p, m.bytes);
    Block c1 = mem.read_cipher_block(p);
    mem.write_plain(p, m.bytes);
    CHECK(mem.read_cipher_block(p) == c1);

    auto ecb_like = [&](const Block& pt) {
        mem.write_plain(p, pt.bytes);
        return mem.read_cipher_block(p);
    };
    CHECK(writes_are_deterministic(ecb_like, m));
}

TEST_CASE("counter-mode oracle is flagged as non-deterministic") {
    CtrOracle ctr;
    CHECK_FALSE(writes_are_deterministic(ctr, Block{}));
}

TEST_CASE("probe stream at one address passes the randomness battery") {
    auto mem = vulnerable_mem(3);
    RandomnessReport r = probe_randomness(mem, PhysAddr{0x10000}, 1024);
    INFO(r.to_text());
    CHECK(r.bit_count == 1024 * 128);
    CHECK(r.monobit >= 0.01);
    CHECK(r.runs >= 0.01);
    CHECK(r.pass());
}

TEST_CASE("probe emits one ciphertext per counter value") {
    auto mem = vulnerable_mem(4);
    auto blocks = probe_same_address(mem, PhysAddr{0x200}, 130);
    CHECK(blocks.size() == 130);
    // deterministic engine, distinct plaintexts: all ciphertexts distinct
    std::map<std::string, int> seen;
    for (const Block& b : blocks) ++seen[b.to_hex()];
    CHECK(seen.size() == blocks.size());
}

TEST_CASE("two-address sample plaintexts differ by the tweak of the address difference") {
    auto mem = vulnerable_mem(5);
    const TweakTable& t = mem.engine().table();
    std::vector<PhysAddr> addrs = {PhysAddr{0x7000}, PhysAddr{0x93240}};
    SampleSet set = collect_equal_cipher_samples(mem, addrs);
    REQUIRE(set.size() == 2);
    Block diff = set.samples()[0].plaintext ^ set.samples()[1].plaintext;
    CHECK(diff == tweak_of(t, PhysAddr{addrs[0].value ^ addrs[1].value}));
}

TEST_CASE("single-address sample set is trivially underdetermined") {
    auto mem = vulnerable_mem(6);
    std::vector<PhysAddr> addrs = {PhysAddr{0x7000}};
    SampleSet set = collect_equal_cipher_samples(mem, addrs);
    CHECK(set.size() == 1);
    auto outcome = recover_tweak(set);
    auto* ud = std::get_if<Underdetermined>(&outcome);
    REQUIRE(ud != nullptr);
    CHECK(ud->rank == 0);
}

TEST_CASE("sample sets reject unaligned or duplicate addresses") {
    CHECK_THROWS_AS(SampleSet(Block{}, {Sample{PhysAddr{8}, Block{}}}), UnalignedAccess);
    CHECK_THROWS_AS(SampleSet(Block{}, {Sample{PhysAddr{16}, Block{}},
                                        Sample{PhysAddr{16}, Block{}}}),
                    Error);
}

TEST_CASE("recovery from the bundled-table engine reproduces it exactly") {
    auto mem = vulnerable_mem(7);
    Rng rng(8);
    auto addrs = random_block_addresses(rng, 64);
    SampleSet set = collect_equal_cipher_samples(mem, addrs);
    auto outcome = recover_tweak(set);
    auto* table = std::get_if<TweakTable>(&outcome);
    REQUIRE(table != nullptr);
    CHECK(*table == TweakTable::table1());
}

TEST_CASE("recovery reproduces arbitrary ground-truth tables") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TweakTable truth = TweakTable::random(seed * 31 + 5);
        auto mem = vulnerable_mem(seed, truth);
        Rng rng(seed ^ 0xabcdef);
        auto addrs = random_block_addresses(rng, 64);
        auto outcome = recover_tweak(collect_equal_cipher_samples(mem, addrs));
        auto* table = std::get_if<TweakTable>(&outcome);
        REQUIRE(table != nullptr);
        CHECK(*table == truth);
    }
}

TEST_CASE("recovery against the mitigated engine is inconsistent") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto mem = mitigated_mem(seed);
        Rng rng(seed ^ 0x5555);
        auto addrs = random_block_addresses(rng, 64);
        auto outcome = recover_tweak(collect_equal_cipher_samples(mem, addrs));
        CHECK(std::holds_alternative<Inconsistent>(outcome));
    }
}

TEST_CASE("64 sampled addresses give a full-rank system across 10k seeded runs") {
    int full = 0;
    const int kRuns = 10000;
    TweakTable truth = TweakTable::random(1234);
    for (int run = 0; run < kRuns; ++run) {
        auto mem = vulnerable_mem(static_cast<std::uint64_t>(run), truth);
        Rng rng(static_cast<std::uint64_t>(run) * 2654435761u + 1);
        auto addrs = random_block_addresses(rng, 64);
        auto sys = build_difference_system(collect_equal_cipher_samples(mem, addrs));
        full += sys.rank() == kTweakUnknowns ? 1 : 0;
    }
    CHECK(full == kRuns);
}

TEST_CASE("adding samples never loses a solution") {
    auto mem = vulnerable_mem(9);
    Rng rng(10);
    auto addrs = random_block_addresses(rng, 96);
    SampleSet all = collect_equal_cipher_samples(mem, addrs);

    Gf2System sys;
    const Sample& ref = all.reference();
    int last_rank = 0;
    for (std::size_t i = 1; i < all.size(); ++i) {
        const Sample& s = all.samples()[i];
        auto coeffs = static_cast<std::uint32_t>((s.addr.block() ^ ref.addr.block()) >> kTweakLowBit);
        sys.add_row(coeffs & kCoeffMask, s.plaintext ^ ref.plaintext);
        CHECK(sys.rank() >= last_rank);
        last_rank = sys.rank();
    }
    CHECK(last_rank == kTweakUnknowns);
    CHECK_FALSE(sys.inconsistent());
}

TEST_CASE("every sample pair is a linearity witness under the recovered table") {
    auto mem = vulnerable_mem(11);
    Rng rng(12);
    auto addrs = random_block_addresses(rng, 48);
    SampleSet set = collect_equal_cipher_samples(mem, addrs);
    auto outcome = recover_tweak(set);
    auto* table = std::get_if<TweakTable>(&outcome);
    REQUIRE(table != nullptr);
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            const Sample& a = set.samples()[i];
            const Sample& b = set.samples()[j];
            CHECK((a.plaintext ^ b.plaintext) ==
                  tweak_of(*table, PhysAddr{a.addr.value ^ b.addr.value}));
        }
    }
}

TEST_CASE("random block addresses are distinct aligned and bounded") {
    Rng rng(13);
    auto addrs = random_block_addresses(rng, 500, 1 << 20);
    std::set<std::uint64_t> seen;
    for (PhysAddr p : addrs) {
        CHECK(p.value % 16 == 0);
        CHECK(p.value < (1 << 20));
        CHECK(seen.insert(p.value).second);
    }
    CHECK_THROWS_AS(random_block_addresses(rng, 100, 16 * 50), Error);
}
