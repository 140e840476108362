// hypothesis_set.hpp
#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace elimtas {

// Subset of at most 64 hypotheses, stored as a bitmask. Iteration is in
// increasing index order.
class HypothesisSet {
public:
    constexpr HypothesisSet() = default;
    constexpr explicit HypothesisSet(std::uint64_t bits) : bits_(bits) {}
    HypothesisSet(std::initializer_list<std::size_t> members) {
        for (auto m : members) insert(m);
    }

    // {0, ..., k-1} \ {excluded}
    static constexpr HypothesisSet all_but(std::size_t k, std::size_t excluded) {
        const std::uint64_t full = k >= 64 ? ~0ULL : ((1ULL << k) - 1ULL);
        return HypothesisSet(full & ~(1ULL << excluded));
    }
    static HypothesisSet from_indices(const std::vector<std::size_t>& indices) {
        HypothesisSet s;
        for (auto i : indices) s.insert(i);
        return s;
    }

    constexpr bool contains(std::size_t i) const { return i < 64 && ((bits_ >> i) & 1ULL) != 0; }
    constexpr void insert(std::size_t i) { bits_ |= (1ULL << i); }
    constexpr void erase(std::size_t i) { bits_ &= ~(1ULL << i); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
    constexpr std::uint64_t bits() const { return bits_; }
    constexpr bool is_subset_of(HypothesisSet other) const { return (bits_ & ~other.bits_) == 0; }
    constexpr HypothesisSet minus(HypothesisSet other) const { return HypothesisSet(bits_ & ~other.bits_); }

    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        out.reserve(size());
        for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
            out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
        }
        return out;
    }

    template <class F>
    constexpr void for_each(F&& f) const {
        for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
            f(static_cast<std::size_t>(std::countr_zero(b)));
        }
    }

    friend constexpr bool operator==(HypothesisSet, HypothesisSet) = default;

private:
    std::uint64_t bits_ = 0;
};

}  // namespace elimtas
