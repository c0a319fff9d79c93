#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "sevsim/block.hpp"

namespace sevsim {

/// Unknowns of the address-tweak system: one per address bit 4..33.
inline constexpr int kTweakUnknowns = 30;
inline constexpr std::uint32_t kCoeffMask = (1u << kTweakUnknowns) - 1;

enum class AddRowOutcome { NewPivot, Redundant, Inconsistent };

struct Underdetermined {
    int rank = 0;
    std::uint32_t free_unknowns = 0;  // bit j set => unknown j is free
};

struct Inconsistent {};

using Gf2Solution = std::array<Block, kTweakUnknowns>;
using SolveOutcome = std::variant<Gf2Solution, Underdetermined, Inconsistent>;

/// Accumulating linear system over F_2 with 30 unknowns and 128-bit right-hand
/// sides. Rows are kept fully reduced (Gauss-Jordan, pivot at the lowest set
/// coordinate), so rank is maintained incrementally and a full-rank solution
/// reads off directly.
class Gf2System {
public:
    AddRowOutcome add_row(std::uint32_t coeffs, Block rhs) {
        if (coeffs > kCoeffMask)
            throw std::invalid_argument("gf2 row has more than 30 coefficients");
        ++rows_seen_;
        for (const Row& row : rows_) {
            if ((coeffs >> row.pivot) & 1u) {
                coeffs ^= row.coeffs;
                rhs ^= row.rhs;
            }
        }
        if (coeffs == 0) {
            if (rhs.is_zero()) return AddRowOutcome::Redundant;
            inconsistent_ = true;
            return AddRowOutcome::Inconsistent;
        }
        int pivot = std::countr_zero(coeffs);
        for (Row& row : rows_) {
            if ((row.coeffs >> pivot) & 1u) {
                row.coeffs ^= coeffs;
                row.rhs ^= rhs;
            }
        }
        rows_.push_back(Row{coeffs, rhs, pivot});
        pivots_ |= 1u << pivot;
        return AddRowOutcome::NewPivot;
    }

    int rank() const noexcept { return static_cast<int>(rows_.size()); }
    bool inconsistent() const noexcept { return inconsistent_; }
    std::uint32_t pivot_mask() const noexcept { return pivots_; }
    std::size_t rows_seen() const noexcept { return rows_seen_; }

    SolveOutcome solve() const {
        if (inconsistent_) return Inconsistent{};
        if (rank() < kTweakUnknowns)
            return Underdetermined{rank(), ~pivots_ & kCoeffMask};
        Gf2Solution sol{};
        for (const Row& row : rows_) sol[static_cast<std::size_t>(row.pivot)] = row.rhs;
        return sol;
    }

private:
    struct Row {
        std::uint32_t coeffs;
        Block rhs;
        int pivot;
    };

    std::vector<Row> rows_;
    std::uint32_t pivots_ = 0;
    std::size_t rows_seen_ = 0;
    bool inconsistent_ = false;
};

}  // namespace sevsim
