#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sevsim/gf2.hpp"
#include "sevsim/rng.hpp"
#include "sevsim/tweak.hpp"

using namespace sevsim;

TEST_CASE("first nonzero row always pivots") {
    Gf2System sys;
    Rng rng(1);
    CHECK(sys.add_row(1u << 0, rng.block()) == AddRowOutcome::NewPivot);
    CHECK(sys.rank() == 1);
}

TEST_CASE("duplicate row reduces to zero equals zero") {
    Gf2System sys;
    Rng rng(2);
    std::uint32_t coeffs = 0x2081;
    Block rhs = rng.block();
    CHECK(sys.add_row(coeffs, rhs) == AddRowOutcome::NewPivot);
    CHECK(sys.add_row(coeffs, rhs) == AddRowOutcome::Redundant);
    CHECK(sys.rank() == 1);
    CHECK_FALSE(sys.inconsistent());
}

TEST_CASE("linear combination of existing rows never changes rank") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Gf2System sys;
        std::vector<std::pair<std::uint32_t, Block>> rows;
        for (int i = 0; i < 12; ++i) {
            std::uint32_t c = static_cast<std::uint32_t>(rng.below(kCoeffMask)) + 1;
            Block r = rng.block();
            sys.add_row(c, r);
            rows.push_back({c, r});
        }
        int rank_before = sys.rank();
        std::uint32_t combo_c = 0;
        Block combo_r{};
        for (auto& [c, r] : rows) {
            if (rng.below(2)) continue;
            combo_c ^= c;
            combo_r ^= r;
        }
        sys.add_row(combo_c, combo_r);
        CHECK(sys.rank() == rank_before);
        CHECK_FALSE(sys.inconsistent());
    }
}

TEST_CASE("contradicting row flags the system inconsistent") {
    Gf2System sys;
    Rng rng(4);
    std::uint32_t coeffs = 0b1010;
    Block rhs = rng.block();
    Block other = rng.block();
    REQUIRE(rhs != other);
    sys.add_row(coeffs, rhs);
    CHECK(sys.add_row(coeffs, other) == AddRowOutcome::Inconsistent);
    CHECK(sys.inconsistent());
    CHECK(std::holds_alternative<Inconsistent>(sys.solve()));
}

TEST_CASE("rejects rows with coefficients beyond the 30 unknowns") {
    Gf2System sys;
    CHECK_THROWS_AS(sys.add_row(1u << 30, Block{}), std::invalid_argument);
}

TEST_CASE("unit rows reproduce the bundled table") {
    Gf2System sys;
    const TweakTable& t1 = TweakTable::table1();
    for (int j = 0; j < kTweakUnknowns; ++j) sys.add_row(1u << j, t1.at(j));
    auto outcome = sys.solve();
    auto* sol = std::get_if<Gf2Solution>(&outcome);
    REQUIRE(sol != nullptr);
    for (int j = 0; j < kTweakUnknowns; ++j) CHECK((*sol)[static_cast<std::size_t>(j)] == t1.at(j));
}

TEST_CASE("29 independent rows are underdetermined") {
    Gf2System sys;
    Rng rng(5);
    for (int j = 0; j < 29; ++j) sys.add_row(1u << j, rng.block());
    auto outcome = sys.solve();
    auto* ud = std::get_if<Underdetermined>(&outcome);
    REQUIRE(ud != nullptr);
    CHECK(ud->rank == 29);
    CHECK(ud->free_unknowns == (1u << 29));
}

TEST_CASE("rows from random address pairs recover the generating table") {
    Rng rng(6);
    TweakTable truth = TweakTable::random(99);
    Gf2System sys;
    for (int i = 0; i < 60; ++i) {
        PhysAddr a{Block::kSize * rng.below(kPhysAddrSpace / Block::kSize)};
        PhysAddr b{Block::kSize * rng.below(kPhysAddrSpace / Block::kSize)};
        auto coeffs = static_cast<std::uint32_t>((a.block() ^ b.block()) >> kTweakLowBit);
        sys.add_row(coeffs, tweak_of(truth, a) ^ tweak_of(truth, b));
    }
    auto outcome = sys.solve();
    auto* sol = std::get_if<Gf2Solution>(&outcome);
    REQUIRE(sol != nullptr);
    CHECK(TweakTable(*sol) == truth);
}

TEST_CASE("full-rank probability of 40 random rows matches theory") {
    // P(rank 30) = prod_{i=0}^{29} (1 - 2^(i-40)) ~= 0.999023
    const int kTrials = 100000;
    Rng rng(7);
    int full_rank = 0;
    for (int t = 0; t < kTrials; ++t) {
        Gf2System sys;
        for (int i = 0; i < 40 && sys.rank() < kTweakUnknowns; ++i)
            sys.add_row(static_cast<std::uint32_t>(rng.next()) & kCoeffMask, Block{});
        full_rank += sys.rank() == kTweakUnknowns ? 1 : 0;
    }
    double theory = 1.0;
    for (int i = 0; i < 30; ++i) theory *= 1.0 - std::ldexp(1.0, i - 40);
    double emp = static_cast<double>(full_rank) / kTrials;
    double sigma = std::sqrt(theory * (1.0 - theory) / kTrials);
    INFO("theory=" << theory << " empirical=" << emp);
    CHECK(std::fabs(emp - theory) < 5.0 * sigma);
    CHECK(emp > 0.998);
}

TEST_CASE("adding rows never decreases rank") {
    Rng rng(8);
    Gf2System sys;
    int last = 0;
    for (int i = 0; i < 200; ++i) {
        sys.add_row(static_cast<std::uint32_t>(rng.next()) & kCoeffMask, rng.block());
        CHECK(sys.rank() >= last);
        CHECK(sys.rank() <= std::min(i + 1, kTweakUnknowns));
        last = sys.rank();
    }
}
