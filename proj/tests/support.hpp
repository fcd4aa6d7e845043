#pragma once

// Test-only oracles, written independently of the library's code paths.

#include <algorithm>
#include <cstdint>
#include <list>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "l2wave/config.hpp"
#include "l2wave/trace.hpp"

namespace l2wave::test {

// Textbook LRU: std::list per set, most recent at the front.
class ReferenceLru {
public:
    ReferenceLru(std::uint64_t sets, std::uint64_t ways) : sets_(sets), ways_(ways), lists_(sets) {}

    bool access(std::uint64_t sector) {
        if (sets_ == 0 || ways_ == 0) return false;
        auto& lst = lists_[sector % sets_];
        auto it = std::find(lst.begin(), lst.end(), sector);
        if (it != lst.end()) {
            lst.erase(it);
            lst.push_front(sector);
            return true;
        }
        lst.push_front(sector);
        if (lst.size() > ways_) lst.pop_back();
        return false;
    }

private:
    std::uint64_t sets_;
    std::uint64_t ways_;
    std::vector<std::list<std::uint64_t>> lists_;
};

struct RefCounts {
    std::uint64_t accesses = 0, hits = 0, misses = 0, compulsory = 0;
};

inline RefCounts reference_simulate(const std::vector<std::uint64_t>& trace, std::uint64_t sets, std::uint64_t ways) {
    ReferenceLru lru(sets, ways);
    std::set<std::uint64_t> seen;
    RefCounts c;
    for (auto s : trace) {
        ++c.accesses;
        if (lru.access(s)) {
            ++c.hits;
        } else {
            ++c.misses;
            if (!seen.count(s)) ++c.compulsory;
        }
        seen.insert(s);
    }
    return c;
}

inline std::vector<std::uint64_t> sectors_of(const AccessTrace& t) {
    std::vector<std::uint64_t> out;
    out.reserve(t.events.size());
    for (const auto& e : t.events) out.push_back(e.sector);
    return out;
}

// Multiset of (tensor, sector) pairs from straight nested loops over every
// Q tile: Q_i, then (K_j, V_j) for each visited j, then O_i. Sector ranges
// come from byte offsets of rows laid out contiguously per slice.
inline std::map<std::pair<int, std::uint64_t>, std::uint64_t> brute_force_multiset(const AttentionConfig& c,
                                                                                    std::uint64_t sector_bytes) {
    const std::uint64_t row = c.head_dim * c.elem_bytes;
    const std::uint64_t slice = (c.seq_len * row + sector_bytes - 1) / sector_bytes;
    const std::uint64_t nq = (c.seq_len + c.tile - 1) / c.tile;
    std::map<std::pair<int, std::uint64_t>, std::uint64_t> m;
    auto touch = [&](int tensor, std::uint64_t b, std::uint64_t h, std::uint64_t tile) {
        const std::uint64_t base = ((tensor * c.batch + b) * c.heads + h) * slice;
        const std::uint64_t lo = tile * c.tile * row;
        const std::uint64_t hi = std::min((tile + 1) * c.tile, c.seq_len) * row;
        for (std::uint64_t s = lo / sector_bytes; s < (hi + sector_bytes - 1) / sector_bytes; ++s)
            ++m[{tensor, base + s}];
    };
    for (std::uint64_t b = 0; b < c.batch; ++b)
        for (std::uint64_t h = 0; h < c.heads; ++h)
            for (std::uint64_t i = 0; i < nq; ++i) {
                touch(0, b, h, i);
                for (std::uint64_t j = 0; j < nq; ++j) {
                    if (c.causal && j > i) continue;
                    touch(1, b, h, j);
                    touch(2, b, h, j);
                }
                touch(3, b, h, i);
            }
    return m;
}

inline std::map<std::pair<int, std::uint64_t>, std::uint64_t> multiset_of(const AccessTrace& t) {
    std::map<std::pair<int, std::uint64_t>, std::uint64_t> m;
    for (const auto& e : t.events) ++m[{static_cast<int>(e.tensor), e.sector}];
    return m;
}

inline const std::vector<ScheduleVariant>& all_schedules() {
    static const std::vector<ScheduleVariant> v{ScheduleVariant::PersistentRoundRobin, ScheduleVariant::NonPersistent,
                                                ScheduleVariant::PersistentContiguous, ScheduleVariant::TileStep2};
    return v;
}

// Small random workload whose tiles may or may not be sector aligned.
inline Workload random_workload(std::mt19937_64& rng, bool aligned) {
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
    };
    Workload w;
    w.config.tile = pick(1, 6);
    w.config.seq_len = w.config.tile * pick(1, 9) + pick(0, w.config.tile - 1);
    w.config.head_dim = aligned ? 8 * pick(1, 3) : pick(1, 12);
    w.config.elem_bytes = std::vector<std::uint64_t>{1, 2, 4}[pick(0, 2)];
    w.config.batch = pick(1, 2);
    w.config.heads = pick(1, 2);
    w.config.causal = pick(0, 1) == 1;
    w.cache.sector_bytes = aligned ? 8 : 32;
    if (aligned) w.config.head_dim = 8;  // tile bytes = T * 8 * E, a multiple of 8
    w.cache.n_sm = pick(1, 6);
    w.cache.capacity_bytes = w.cache.sector_bytes * pick(0, 200);
    w.sched.variant = all_schedules()[pick(0, 3)];
    w.scan = pick(0, 1) ? ScanOrder::Sawtooth : ScanOrder::Cyclic;
    return w;
}

}  // namespace l2wave::test
