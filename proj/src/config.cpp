#include "l2wave/config.hpp"

#include <algorithm>
#include <sstream>

namespace l2wave {

std::string_view to_string(Tensor t) {
    switch (t) {
    case Tensor::Q: return "Q";
    case Tensor::K: return "K";
    case Tensor::V: return "V";
    case Tensor::O: return "O";
    }
    return "?";
}

std::string_view to_string(ScheduleVariant v) {
    switch (v) {
    case ScheduleVariant::PersistentRoundRobin: return "persistent";
    case ScheduleVariant::NonPersistent: return "nonpersistent";
    case ScheduleVariant::PersistentContiguous: return "contiguous";
    case ScheduleVariant::TileStep2: return "tilestep2";
    }
    return "?";
}

std::string_view to_string(ScanOrder s) {
    return s == ScanOrder::Cyclic ? "cyclic" : "sawtooth";
}

ScheduleVariant parse_schedule(std::string_view name) {
    if (name == "persistent") return ScheduleVariant::PersistentRoundRobin;
    if (name == "nonpersistent") return ScheduleVariant::NonPersistent;
    if (name == "contiguous") return ScheduleVariant::PersistentContiguous;
    if (name == "tilestep2") return ScheduleVariant::TileStep2;
    throw std::invalid_argument("unknown schedule '" + std::string(name) + "'");
}

ScanOrder parse_scan(std::string_view name) {
    if (name == "cyclic") return ScanOrder::Cyclic;
    if (name == "sawtooth") return ScanOrder::Sawtooth;
    throw std::invalid_argument("unknown scan order '" + std::string(name) + "'");
}

namespace {

std::string join(const std::vector<std::string>& errors) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& e : errors) os << "\n  - " << e;
    return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument(join(errors)), errors_(std::move(errors)) {}

std::uint64_t CacheModel::num_sets() const {
    if (!ways) return capacity_bytes == 0 ? 0 : 1;
    const std::uint64_t set_bytes = sector_bytes * *ways;
    return set_bytes == 0 ? 0 : capacity_bytes / set_bytes;
}

std::uint64_t SchedulePolicy::resolved_grid(const AttentionConfig& cfg, const CacheModel& cache) const {
    const std::uint64_t natural = std::min(cfg.total_q_tiles(), cache.n_sm);
    if (variant == ScheduleVariant::NonPersistent) return natural;
    return grid_size.value_or(natural);
}

std::vector<std::string> validate(const AttentionConfig& cfg) {
    std::vector<std::string> errors;
    if (cfg.tile < 1 || cfg.seq_len < cfg.tile) errors.emplace_back("S >= T >= 1 violated");
    if (cfg.head_dim < 1) errors.emplace_back("D >= 1 violated");
    if (cfg.elem_bytes != 1 && cfg.elem_bytes != 2 && cfg.elem_bytes != 4)
        errors.emplace_back("E in {1, 2, 4} violated");
    if (cfg.batch < 1) errors.emplace_back("B >= 1 violated");
    if (cfg.heads < 1) errors.emplace_back("H >= 1 violated");
    return errors;
}

std::vector<std::string> validate(const CacheModel& cache) {
    std::vector<std::string> errors;
    if (cache.sector_bytes < 1) {
        errors.emplace_back("sector size >= 1 violated");
    } else {
        if (cache.capacity_bytes % cache.sector_bytes != 0)
            errors.emplace_back("capacity multiple of sector violated");
        if (cache.ways) {
            if (*cache.ways < 1)
                errors.emplace_back("associativity >= 1 violated");
            else if (cache.capacity_bytes % (cache.sector_bytes * *cache.ways) != 0)
                errors.emplace_back("capacity / (sector * ways) whole number of sets violated");
        }
    }
    if (cache.n_sm < 1) errors.emplace_back("n_sm >= 1 violated");
    return errors;
}

std::vector<std::string> validate(const AttentionConfig& cfg, const CacheModel& cache,
                                  const SchedulePolicy& sched) {
    auto errors = validate(cfg);
    auto cache_errors = validate(cache);
    errors.insert(errors.end(), cache_errors.begin(), cache_errors.end());
    if (!errors.empty() || !sched.grid_size) return errors;

    const std::uint64_t total = cfg.total_q_tiles();
    const std::uint64_t grid = *sched.grid_size;
    switch (sched.variant) {
    case ScheduleVariant::PersistentRoundRobin:
        if (grid != std::min(total, cache.n_sm))
            errors.emplace_back("persistent grid G = min(total Q tiles, n_sm) violated");
        break;
    case ScheduleVariant::PersistentContiguous:
    case ScheduleVariant::TileStep2:
        if (grid < 1 || grid > total) errors.emplace_back("grid 1 <= G <= total Q tiles violated");
        break;
    case ScheduleVariant::NonPersistent:
        break;
    }
    return errors;
}

void require_valid(const AttentionConfig& cfg, const CacheModel& cache, const SchedulePolicy& sched) {
    auto errors = validate(cfg, cache, sched);
    if (!errors.empty()) throw ConfigError(std::move(errors));
}

std::uint64_t sectors_per_tile(std::uint64_t tile, std::uint64_t head_dim, std::uint64_t elem_bytes,
                               std::uint64_t sector_bytes) {
    const std::uint64_t bytes = tile * head_dim * elem_bytes;
    return (bytes + sector_bytes - 1) / sector_bytes;
}

std::uint64_t kv_bytes(const AttentionConfig& cfg) { return 2 * cfg.slice_bytes(); }

std::uint64_t kv_bytes_total(const AttentionConfig& cfg) { return kv_bytes(cfg) * cfg.slices(); }

}  // namespace l2wave
