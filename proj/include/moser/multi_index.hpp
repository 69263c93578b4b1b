#pragma once

#include "moser/core.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

namespace moser {

/// Largest chart dimension supported by the basis tables.
inline constexpr int kMaxDim = 12;

/// Strictly increasing axes (0-based) naming the basis element dx_{i1}∧…∧dx_{ik}.
class MultiIndex {
public:
    MultiIndex() = default;

    /// Accepts 0-based axes; throws IndexError unless strictly increasing and < dim.
    MultiIndex(std::vector<int> axes, int dim) : axes_(std::move(axes)) {
        for (std::size_t i = 0; i < axes_.size(); ++i) {
            if (axes_[i] < 0 || axes_[i] >= dim)
                throw IndexError("axis " + std::to_string(axes_[i] + 1) + " outside [1, " +
                                 std::to_string(dim) + "]");
            if (i > 0 && axes_[i] <= axes_[i - 1])
                throw IndexError("multi-index is not strictly increasing");
        }
        for (int a : axes_) mask_ |= (1u << a);
    }

    static MultiIndex from_mask(std::uint32_t mask) {
        MultiIndex mi;
        mi.mask_ = mask;
        for (int a = 0; a < 32; ++a)
            if (mask & (1u << a)) mi.axes_.push_back(a);
        return mi;
    }

    const std::vector<int>& axes() const { return axes_; }
    int degree() const { return static_cast<int>(axes_.size()); }
    std::uint32_t mask() const { return mask_; }

    bool operator==(const MultiIndex& o) const { return mask_ == o.mask_; }

private:
    std::vector<int> axes_;
    std::uint32_t mask_ = 0;
};

inline constexpr std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    return r;
}

/// Lexicographically ordered basis of k-forms on R^m, with mask → rank lookup.
struct BasisTable {
    int dim = 0;
    int degree = 0;
    std::vector<std::uint32_t> masks;   // rank → mask
    std::vector<int> rank_of;           // mask → rank, -1 when the mask has another popcount

    std::size_t size() const { return masks.size(); }
    int rank(std::uint32_t mask) const { return rank_of[mask]; }
};

namespace detail {

inline BasisTable make_basis(int m, int k) {
    BasisTable t;
    t.dim = m;
    t.degree = k;
    t.rank_of.assign(std::size_t{1} << m, -1);
    // Lexicographic order on sorted axis tuples: generate combinations in order.
    std::vector<int> c(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
    while (true) {
        std::uint32_t mask = 0;
        for (int a : c) mask |= (1u << a);
        t.rank_of[mask] = static_cast<int>(t.masks.size());
        t.masks.push_back(mask);
        int i = k - 1;
        while (i >= 0 && c[static_cast<std::size_t>(i)] == m - k + i) --i;
        if (i < 0) break;
        ++c[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
    return t;
}

} // namespace detail

/// Shared, immutable basis table for (m, k); 0 ≤ k ≤ m ≤ kMaxDim.
inline const BasisTable& basis(int m, int k) {
    static const auto tables = [] {
        std::vector<std::vector<BasisTable>> all(kMaxDim + 1);
        for (int mm = 1; mm <= kMaxDim; ++mm)
            for (int kk = 0; kk <= mm; ++kk) all[static_cast<std::size_t>(mm)].push_back(detail::make_basis(mm, kk));
        return all;
    }();
    if (m < 1 || m > kMaxDim) throw DimensionMismatch("chart dimension must lie in [1, 12]");
    if (k < 0 || k > m) throw DegreeError("form degree " + std::to_string(k) + " outside [0, " + std::to_string(m) + "]");
    return tables[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
}

/// Sign of dx_I ∧ dx_J relative to dx_{I∪J}; 0 when I and J overlap.
inline int merge_sign(std::uint32_t I, std::uint32_t J) {
    if (I & J) return 0;
    int inversions = 0;
    // For each j in J count the elements of I that are larger.
    for (std::uint32_t rest = J; rest; rest &= rest - 1) {
        const int j = std::countr_zero(rest);
        inversions += std::popcount(I >> (j + 1));
    }
    return (inversions & 1) ? -1 : 1;
}

/// Sign that sorts an arbitrary list of distinct axes; 0 if an axis repeats.
inline int permutation_sign(std::vector<int> axes) {
    int sign = 1;
    for (std::size_t i = 0; i < axes.size(); ++i)
        for (std::size_t j = i + 1; j < axes.size(); ++j) {
            if (axes[i] == axes[j]) return 0;
            if (axes[i] > axes[j]) sign = -sign;
        }
    return sign;
}

} // namespace moser
