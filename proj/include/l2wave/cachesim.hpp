#pragma once

// Trace-driven L2 sector cache with LRU replacement.
//
// Fully associative mode keeps one LRU stack over all sectors; ways(k) mode
// maps sector -> set by modulo and keeps an LRU stack per set. Misses on the
// first touch of a sector (over the whole run) are compulsory; all others
// are non-compulsory.
//
// TileBlock fidelity treats each tile access as one block event weighted by
// its sector count. On traces where every tile is an atomic, ascending run
// of sectors owned by no other tile, every sector of a tile shares the same
// stack distance, so the block model reproduces SectorExact counts exactly.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "l2wave/config.hpp"
#include "l2wave/trace.hpp"

namespace l2wave {

enum class SimFidelity { SectorExact, TileBlock };

std::string_view to_string(SimFidelity f);
SimFidelity parse_fidelity(std::string_view name);

struct AccessCounters {
    std::uint64_t accesses = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t compulsory = 0;
    std::uint64_t non_compulsory = 0;

    double hit_rate() const { return accesses ? static_cast<double>(hits) / accesses : 0.0; }
    AccessCounters& operator+=(const AccessCounters& o);
    bool operator==(const AccessCounters&) const = default;
};

struct WaveSample {
    std::uint64_t accesses = 0;
    std::uint64_t hits = 0;
    std::uint64_t kv_accesses = 0;
    std::uint64_t kv_hits = 0;

    bool operator==(const WaveSample&) const = default;
};

struct CacheStats {
    std::array<AccessCounters, kNumTensors> per_tensor{};
    AccessCounters total;
    // Indexed by lockstep step; filled only when requested.
    std::vector<WaveSample> waves;

    const AccessCounters& operator[](Tensor t) const { return per_tensor[static_cast<int>(t)]; }
    AccessCounters kv() const;
    double hit_rate() const { return total.hit_rate(); }
    double kv_hit_rate() const { return kv().hit_rate(); }

    bool operator==(const CacheStats&) const = default;
};

struct SimOptions {
    SimFidelity fidelity = SimFidelity::SectorExact;
    bool wave_series = false;
    TraceLimits limits;
};

class BlockAtomicityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Generates and simulates a workload without materializing its trace.
CacheStats simulate(const Workload& w, const SimOptions& opts = {});

// Replays an existing sector trace (generated or loaded from a dump).
CacheStats simulate(std::span<const SectorAccess> trace, const CacheModel& cache,
                    const SimOptions& opts = {});

// Sector-granular LRU over dense indices [0, universe).
class SectorLru {
public:
    SectorLru(std::uint64_t universe, const CacheModel& cache);

    // Returns true on hit. `set_key` selects the set (sector id for ways(k)).
    bool access(std::uint64_t index, std::uint64_t set_key);

private:
    static constexpr std::uint32_t kNil = 0xffffffffu;

    void unlink(std::uint32_t i, std::uint64_t set);
    void push_front(std::uint32_t i, std::uint64_t set);

    std::uint64_t num_sets_;
    std::uint64_t set_capacity_;
    std::vector<std::uint32_t> prev_;
    std::vector<std::uint32_t> next_;
    std::vector<std::uint8_t> resident_;
    std::vector<std::uint32_t> head_;
    std::vector<std::uint32_t> tail_;
    std::vector<std::uint64_t> count_;
};

// Fully associative LRU over variable-size blocks with capacity in sectors.
// A block is resident iff the blocks above it in the stack plus itself fit.
class BlockLru {
public:
    BlockLru(std::uint64_t universe, std::uint64_t capacity_sectors);

    bool access(std::uint64_t block, std::uint64_t size);

private:
    static constexpr std::uint32_t kNil = 0xffffffffu;

    std::uint64_t capacity_;
    std::uint64_t used_ = 0;
    std::vector<std::uint32_t> prev_;
    std::vector<std::uint32_t> next_;
    std::vector<std::uint64_t> size_;
    std::vector<std::uint8_t> resident_;
    std::uint32_t head_ = kNil;
    std::uint32_t tail_ = kNil;
};

struct ReductionReport {
    std::uint64_t non_compulsory_a = 0;
    std::uint64_t non_compulsory_b = 0;
    std::int64_t non_compulsory_delta = 0;  // a - b
    std::uint64_t misses_a = 0;
    std::uint64_t misses_b = 0;
    std::int64_t misses_delta = 0;
    // Fractions of a's count removed by b; absent when a has nothing to reduce.
    std::optional<double> non_compulsory_reduction;
    std::optional<double> miss_reduction;

    std::string summary() const;
};

// Compares two runs of the same workload (equal access and compulsory
// counts per tensor); throws std::invalid_argument otherwise.
ReductionReport classify(const CacheStats& a, const CacheStats& b);

}  // namespace l2wave
