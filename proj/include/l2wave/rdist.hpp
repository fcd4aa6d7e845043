#pragma once

// LRU stack (reuse) distances.
//
// The distance of an access is the number of distinct sectors touched since
// the previous access to the same sector; first touches have infinite
// distance. An access hits in a fully associative LRU cache of c sectors
// iff its distance is < c, so the histogram predicts misses at every
// capacity at once.

#include <cstdint>
#include <span>
#include <vector>

#include "l2wave/trace.hpp"

namespace l2wave {

struct DistanceHistogram {
    // counts[d] = reuses at distance d, for d < exact_limit.
    std::vector<std::uint64_t> counts;
    // Reuses at distance >= exact_limit.
    std::uint64_t overflow = 0;
    // First touches (distance infinity); equals the distinct sector count.
    std::uint64_t infinite = 0;
    std::uint64_t exact_limit = 0;

    std::uint64_t total() const;
    bool operator==(const DistanceHistogram&) const = default;
};

inline constexpr std::uint64_t kDefaultDistanceLimit = 1ull << 26;

// O(n log n): Fenwick tree over access positions, marking the latest
// access of each sector.
DistanceHistogram stack_distances(std::span<const std::uint64_t> sectors,
                                  std::uint64_t exact_limit = kDefaultDistanceLimit);
DistanceHistogram stack_distances(std::span<const SectorAccess> trace,
                                  std::uint64_t exact_limit = kDefaultDistanceLimit);

// O(n^2) reference: walks back to the previous access collecting distinct
// sectors.
DistanceHistogram stack_distances_naive(std::span<const std::uint64_t> sectors,
                                        std::uint64_t exact_limit = kDefaultDistanceLimit);

// infinite + sum over d >= capacity. Throws std::domain_error when the
// answer depends on reuses binned into the overflow bucket.
std::uint64_t misses_at_capacity(const DistanceHistogram& hist, std::uint64_t capacity_sectors);

}  // namespace l2wave
