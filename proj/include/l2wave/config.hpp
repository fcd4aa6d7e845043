#pragma once

// Workload and machine parameters for the tiled attention L2 model.
//
// All byte quantities are plain integers. A workload is one attention
// forward pass (B batches x H heads of an S x D problem) tiled into square
// T x T tiles, run on a GPU with n_sm streaming multiprocessors sharing one
// L2 cache.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace l2wave {

enum class Tensor : std::uint8_t { Q = 0, K = 1, V = 2, O = 3 };
inline constexpr int kNumTensors = 4;

std::string_view to_string(Tensor t);

struct AttentionConfig {
    std::uint64_t seq_len = 32768;   // S
    std::uint64_t head_dim = 64;     // D
    std::uint64_t tile = 80;         // T, square tiles
    std::uint64_t elem_bytes = 2;    // E
    std::uint64_t batch = 1;         // B
    std::uint64_t heads = 1;         // H
    bool causal = false;

    std::uint64_t num_q_tiles() const { return (seq_len + tile - 1) / tile; }
    // Rows in the last Q tile, in [1, T].
    std::uint64_t trailing_rows() const { return seq_len - (num_q_tiles() - 1) * tile; }
    std::uint64_t slices() const { return batch * heads; }
    std::uint64_t total_q_tiles() const { return slices() * num_q_tiles(); }
    std::uint64_t tile_bytes() const { return tile * head_dim * elem_bytes; }
    // Bytes of one tensor for one (batch, head) slice.
    std::uint64_t slice_bytes() const { return seq_len * head_dim * elem_bytes; }

    bool operator==(const AttentionConfig&) const = default;
};

struct CacheModel {
    std::uint64_t sector_bytes = 32;
    std::uint64_t capacity_bytes = 24ull << 20;
    // nullopt means fully associative.
    std::optional<std::uint64_t> ways;
    std::uint64_t n_sm = 48;

    std::uint64_t capacity_sectors() const { return capacity_bytes / sector_bytes; }
    std::uint64_t num_sets() const;
    bool fully_associative() const { return !ways.has_value(); }

    bool operator==(const CacheModel&) const = default;
};

enum class ScheduleVariant { PersistentRoundRobin, NonPersistent, PersistentContiguous, TileStep2 };

struct SchedulePolicy {
    ScheduleVariant variant = ScheduleVariant::NonPersistent;
    // Persistent grid size; unset resolves to min(total Q tiles, n_sm).
    std::optional<std::uint64_t> grid_size;

    bool persistent() const { return variant != ScheduleVariant::NonPersistent; }
    std::uint64_t resolved_grid(const AttentionConfig& cfg, const CacheModel& cache) const;

    bool operator==(const SchedulePolicy&) const = default;
};

enum class ScanOrder { Cyclic, Sawtooth };

std::string_view to_string(ScheduleVariant v);
std::string_view to_string(ScanOrder s);
ScheduleVariant parse_schedule(std::string_view name);
ScanOrder parse_scan(std::string_view name);

// Thrown with every violated invariant when a configuration is rejected.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

// Collects all violated invariants; empty means valid.
std::vector<std::string> validate(const AttentionConfig& cfg);
std::vector<std::string> validate(const CacheModel& cache);
std::vector<std::string> validate(const AttentionConfig& cfg, const CacheModel& cache,
                                  const SchedulePolicy& sched);

void require_valid(const AttentionConfig& cfg, const CacheModel& cache, const SchedulePolicy& sched);

// ceil(T*D*E / C)
std::uint64_t sectors_per_tile(std::uint64_t tile, std::uint64_t head_dim, std::uint64_t elem_bytes,
                               std::uint64_t sector_bytes);

// K plus V footprint of one (batch, head) slice: 2*S*D*E.
std::uint64_t kv_bytes(const AttentionConfig& cfg);
// K plus V footprint over all slices.
std::uint64_t kv_bytes_total(const AttentionConfig& cfg);

}  // namespace l2wave
