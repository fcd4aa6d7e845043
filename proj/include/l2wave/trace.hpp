#pragma once

// Memory-side emulation of a split-Q tiled attention kernel.
//
// Every Q tile is processed by one CTA: load Q_i, stream (K_j, V_j) for each
// visited KV tile, store O_i. CTAs advance in lockstep: at every step each
// active CTA, in ascending CTA order, issues one K tile and one V tile (plus
// the Q load when it enters a tile and the O store when it leaves one).
// Each tile access is a contiguous, ascending run of sectors.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "l2wave/config.hpp"

namespace l2wave {

enum class AccessKind : std::uint8_t { Read = 0, Write = 1 };

struct SectorAccess {
    Tensor tensor = Tensor::Q;
    AccessKind kind = AccessKind::Read;
    std::uint32_t cta = 0;
    std::uint32_t wave = 0;  // lockstep step index
    std::uint64_t sector = 0;

    bool operator==(const SectorAccess&) const = default;
};

// One whole-tile access; expands to n_sectors consecutive SectorAccess events.
struct TileAccess {
    Tensor tensor = Tensor::Q;
    AccessKind kind = AccessKind::Read;
    std::uint32_t cta = 0;
    std::uint32_t wave = 0;
    std::uint64_t block = 0;  // dense tile id, unique per (tensor, batch, head, tile)
    std::uint64_t first_sector = 0;
    std::uint64_t n_sectors = 0;
};

struct TensorTotals {
    std::array<std::uint64_t, kNumTensors> sectors{};

    std::uint64_t& operator[](Tensor t) { return sectors[static_cast<int>(t)]; }
    std::uint64_t operator[](Tensor t) const { return sectors[static_cast<int>(t)]; }
    std::uint64_t total() const { return sectors[0] + sectors[1] + sectors[2] + sectors[3]; }
    bool operator==(const TensorTotals&) const = default;
};

struct Workload {
    AttentionConfig config;
    CacheModel cache;
    SchedulePolicy sched;
    ScanOrder scan = ScanOrder::Cyclic;

    bool operator==(const Workload&) const = default;
};

// Address map: tensor-major, then batch, then head; each (tensor, batch, head)
// slice is a contiguous sector-aligned range of ceil(S*D*E / C) sectors and
// rows are contiguous within it.
class TileLayout {
public:
    TileLayout(const AttentionConfig& cfg, std::uint64_t sector_bytes);

    struct Range {
        std::uint64_t first = 0;
        std::uint64_t count = 0;
    };

    Range tile(Tensor t, std::uint64_t batch, std::uint64_t head, std::uint64_t q_tile) const;
    std::uint64_t block_id(Tensor t, std::uint64_t batch, std::uint64_t head, std::uint64_t q_tile) const;
    // Sectors touched by tile i of any slice (all slices share the same shape).
    std::uint64_t tile_sectors(std::uint64_t q_tile) const;

    std::uint64_t slice_sectors() const { return slice_sectors_; }
    std::uint64_t universe_sectors() const { return slice_sectors_ * kNumTensors * cfg_.slices(); }
    std::uint64_t universe_blocks() const { return cfg_.num_q_tiles() * kNumTensors * cfg_.slices(); }
    // True when no sector is shared by two tiles (T*D*E divisible by C).
    bool tiles_disjoint() const { return cfg_.tile_bytes() % sector_bytes_ == 0; }

private:
    std::uint64_t slice_index(Tensor t, std::uint64_t batch, std::uint64_t head) const;

    AttentionConfig cfg_;
    std::uint64_t sector_bytes_;
    std::uint64_t slice_sectors_;
};

struct WorkItem {
    std::uint64_t batch = 0;
    std::uint64_t head = 0;
    std::uint64_t q_tile = 0;

    bool operator==(const WorkItem&) const = default;
};

// Maps a linear Q-tile index (batch-major, then head, then tile) to its item.
WorkItem work_item(const AttentionConfig& cfg, std::uint64_t linear);

struct QTileAssignment {
    // per_cta[c] is CTA c's ordered work list.
    std::vector<std::vector<WorkItem>> per_cta;
    // NonPersistent only: CTAs launch in barrier-separated waves of this many
    // consecutive CTA indices. Zero for persistent grids (all CTAs resident).
    std::uint64_t dispatch_width = 0;
};

QTileAssignment assign_q_tiles(const AttentionConfig& cfg, const CacheModel& cache,
                               const SchedulePolicy& sched);

// KV tile indices visited by one Q tile. Sawtooth reverses on odd local
// iterations; a causal bound restricts the visited set to 0..bound.
std::vector<std::uint64_t> kv_visit_order(std::uint64_t local_iter, std::uint64_t n_kv, ScanOrder scan,
                                          std::optional<std::uint64_t> causal_bound = std::nullopt);

class TileVisitor {
public:
    virtual ~TileVisitor() = default;
    virtual void on_tile(const TileAccess& access) = 0;
};

struct TraceLimits {
    // Hard cap on sector events for any sector-granular consumer.
    std::uint64_t max_events = 1'000'000'000;
};

class TraceCapExceeded : public std::length_error {
public:
    TraceCapExceeded(std::uint64_t events, std::uint64_t cap);
    std::uint64_t events() const { return events_; }

private:
    std::uint64_t events_;
};

// Streams the deterministic tile-granular trace of a workload.
void generate(const Workload& w, TileVisitor& visitor);

// Throws TraceCapExceeded when the workload's sector count exceeds the cap.
void check_trace_cap(const Workload& w, const TraceLimits& limits);

struct AccessTrace {
    std::vector<SectorAccess> events;
    TensorTotals totals;
};

AccessTrace materialize(const Workload& w, const TraceLimits& limits = {});

// Closed-form per-tensor sector counts of a workload's trace.
TensorTotals exact_totals(const AttentionConfig& cfg, std::uint64_t sector_bytes);

// Counts of an existing trace.
TensorTotals trace_totals(std::span<const SectorAccess> events);

// Counts obtained by streaming the generator (no sector expansion).
TensorTotals count_generated(const Workload& w);

}  // namespace l2wave
