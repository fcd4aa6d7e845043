#include "l2wave/cachesim.hpp"

#include <limits>
#include <sstream>
#include <unordered_map>

namespace l2wave {

std::string_view to_string(SimFidelity f) {
    return f == SimFidelity::SectorExact ? "sector" : "tileblock";
}

SimFidelity parse_fidelity(std::string_view name) {
    if (name == "sector") return SimFidelity::SectorExact;
    if (name == "tileblock") return SimFidelity::TileBlock;
    throw std::invalid_argument("unknown fidelity '" + std::string(name) + "'");
}

AccessCounters& AccessCounters::operator+=(const AccessCounters& o) {
    accesses += o.accesses;
    hits += o.hits;
    misses += o.misses;
    compulsory += o.compulsory;
    non_compulsory += o.non_compulsory;
    return *this;
}

AccessCounters CacheStats::kv() const {
    AccessCounters kv = (*this)[Tensor::K];
    kv += (*this)[Tensor::V];
    return kv;
}

// --- SectorLru -------------------------------------------------------------

namespace {

std::uint64_t checked_universe(std::uint64_t universe) {
    if (universe >= std::numeric_limits<std::uint32_t>::max())
        throw std::length_error("address universe exceeds 2^32 - 1 entries");
    return universe;
}

}  // namespace

SectorLru::SectorLru(std::uint64_t universe, const CacheModel& cache)
    : num_sets_(cache.num_sets()),
      set_capacity_(cache.ways ? *cache.ways : cache.capacity_sectors()),
      prev_(checked_universe(universe), kNil),
      next_(universe, kNil),
      resident_(universe, 0),
      head_(num_sets_, kNil),
      tail_(num_sets_, kNil),
      count_(num_sets_, 0) {}

void SectorLru::unlink(std::uint32_t i, std::uint64_t set) {
    const std::uint32_t p = prev_[i];
    const std::uint32_t n = next_[i];
    if (p != kNil) next_[p] = n; else head_[set] = n;
    if (n != kNil) prev_[n] = p; else tail_[set] = p;
}

void SectorLru::push_front(std::uint32_t i, std::uint64_t set) {
    prev_[i] = kNil;
    next_[i] = head_[set];
    if (head_[set] != kNil) prev_[head_[set]] = i; else tail_[set] = i;
    head_[set] = i;
}

bool SectorLru::access(std::uint64_t index, std::uint64_t set_key) {
    if (num_sets_ == 0 || set_capacity_ == 0) return false;
    const auto i = static_cast<std::uint32_t>(index);
    const std::uint64_t set = num_sets_ == 1 ? 0 : set_key % num_sets_;
    if (resident_[i]) {
        if (head_[set] != i) {
            unlink(i, set);
            push_front(i, set);
        }
        return true;
    }
    if (count_[set] == set_capacity_) {
        const std::uint32_t victim = tail_[set];
        unlink(victim, set);
        resident_[victim] = 0;
        --count_[set];
    }
    push_front(i, set);
    resident_[i] = 1;
    ++count_[set];
    return false;
}

// --- BlockLru --------------------------------------------------------------

BlockLru::BlockLru(std::uint64_t universe, std::uint64_t capacity_sectors)
    : capacity_(capacity_sectors),
      prev_(checked_universe(universe), kNil),
      next_(universe, kNil),
      size_(universe, 0),
      resident_(universe, 0) {}

bool BlockLru::access(std::uint64_t block, std::uint64_t size) {
    const auto b = static_cast<std::uint32_t>(block);
    const bool hit = resident_[b] != 0;
    if (hit) {
        if (head_ == b) return true;
        const std::uint32_t p = prev_[b];
        const std::uint32_t n = next_[b];
        next_[p] = n;
        if (n != kNil) prev_[n] = p; else tail_ = p;
    } else {
        resident_[b] = 1;
        size_[b] = size;
        used_ += size;
    }
    prev_[b] = kNil;
    next_[b] = head_;
    if (head_ != kNil) prev_[head_] = b; else tail_ = b;
    head_ = b;

    while (used_ > capacity_) {
        const std::uint32_t victim = tail_;
        tail_ = prev_[victim];
        if (tail_ != kNil) next_[tail_] = kNil; else head_ = kNil;
        resident_[victim] = 0;
        used_ -= size_[victim];
    }
    return hit;
}

// --- statistics ------------------------------------------------------------

namespace {

class Recorder {
public:
    Recorder(std::uint64_t universe, bool wave_series) : seen_(universe, 0), wave_series_(wave_series) {}

    // `index` names the unit (sector or block) whose first touch is tracked.
    void record(Tensor t, std::uint32_t wave, std::uint64_t index, std::uint64_t n, bool hit) {
        AccessCounters& c = stats_.per_tensor[static_cast<int>(t)];
        c.accesses += n;
        if (hit) {
            c.hits += n;
        } else {
            c.misses += n;
            if (!seen_[index]) c.compulsory += n; else c.non_compulsory += n;
        }
        seen_[index] = 1;
        if (wave_series_) {
            if (wave >= stats_.waves.size()) stats_.waves.resize(wave + 1);
            WaveSample& s = stats_.waves[wave];
            s.accesses += n;
            if (hit) s.hits += n;
            if (t == Tensor::K || t == Tensor::V) {
                s.kv_accesses += n;
                if (hit) s.kv_hits += n;
            }
        }
    }

    CacheStats finish() {
        stats_.total = {};
        for (const auto& c : stats_.per_tensor) stats_.total += c;
        return std::move(stats_);
    }

private:
    std::vector<std::uint8_t> seen_;
    bool wave_series_;
    CacheStats stats_;
};

class SectorSim : public TileVisitor {
public:
    SectorSim(std::uint64_t universe, const CacheModel& cache, bool waves)
        : lru_(universe, cache), rec_(universe, waves) {}

    void on_tile(const TileAccess& a) override {
        for (std::uint64_t s = a.first_sector; s < a.first_sector + a.n_sectors; ++s)
            rec_.record(a.tensor, a.wave, s, 1, lru_.access(s, s));
    }

    CacheStats finish() { return rec_.finish(); }

private:
    SectorLru lru_;
    Recorder rec_;
};

class BlockSim : public TileVisitor {
public:
    BlockSim(std::uint64_t universe, const CacheModel& cache, bool waves)
        : lru_(universe, cache.capacity_sectors()), rec_(universe, waves) {}

    void on_tile(const TileAccess& a) override {
        rec_.record(a.tensor, a.wave, a.block, a.n_sectors, lru_.access(a.block, a.n_sectors));
    }

    CacheStats finish() { return rec_.finish(); }

private:
    BlockLru lru_;
    Recorder rec_;
};

void require_cache(const CacheModel& cache) {
    auto errors = validate(cache);
    if (!errors.empty()) throw ConfigError(std::move(errors));
}

void require_block_cache(const CacheModel& cache) {
    if (!cache.fully_associative())
        throw std::invalid_argument("tile-block fidelity requires a fully associative cache");
}

}  // namespace

CacheStats simulate(const Workload& w, const SimOptions& opts) {
    require_valid(w.config, w.cache, w.sched);
    const TileLayout layout(w.config, w.cache.sector_bytes);

    if (opts.fidelity == SimFidelity::TileBlock) {
        require_block_cache(w.cache);
        if (!layout.tiles_disjoint())
            throw BlockAtomicityError("tile-block fidelity needs T*D*E divisible by the sector size "
                                      "(tiles share sectors otherwise)");
        BlockSim sim(layout.universe_blocks(), w.cache, opts.wave_series);
        generate(w, sim);
        return sim.finish();
    }

    check_trace_cap(w, opts.limits);
    SectorSim sim(layout.universe_sectors(), w.cache, opts.wave_series);
    generate(w, sim);
    return sim.finish();
}

CacheStats simulate(std::span<const SectorAccess> trace, const CacheModel& cache, const SimOptions& opts) {
    require_cache(cache);
    if (trace.size() > opts.limits.max_events) throw TraceCapExceeded(trace.size(), opts.limits.max_events);

    // Dense renumbering of sector ids in first-touch order.
    std::unordered_map<std::uint64_t, std::uint32_t> dense;
    std::vector<std::uint32_t> index(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i)
        index[i] = dense.try_emplace(trace[i].sector, static_cast<std::uint32_t>(dense.size())).first->second;

    if (opts.fidelity == SimFidelity::SectorExact) {
        SectorLru lru(dense.size(), cache);
        Recorder rec(dense.size(), opts.wave_series);
        for (std::size_t i = 0; i < trace.size(); ++i)
            rec.record(trace[i].tensor, trace[i].wave, index[i], 1, lru.access(index[i], trace[i].sector));
        return rec.finish();
    }

    require_block_cache(cache);
    // Split into maximal ascending runs from one (tensor, kind, cta, wave);
    // each run must always cover the same sectors and no sector may belong
    // to two different runs.
    struct Run {
        std::size_t begin;
        std::size_t length;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const SectorAccess& e = trace[i];
        if (!runs.empty()) {
            const SectorAccess& p = trace[i - 1];
            if (p.tensor == e.tensor && p.kind == e.kind && p.cta == e.cta && p.wave == e.wave &&
                e.sector == p.sector + 1) {
                ++runs.back().length;
                continue;
            }
        }
        runs.push_back({i, 1});
    }

    std::vector<std::uint32_t> owner(dense.size(), std::numeric_limits<std::uint32_t>::max());
    std::unordered_map<std::uint64_t, std::uint32_t> block_of_first;
    std::vector<std::uint64_t> block_len;
    std::vector<std::uint32_t> run_block(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& run = runs[r];
        const std::uint64_t first = trace[run.begin].sector;
        auto [it, inserted] = block_of_first.try_emplace(first, static_cast<std::uint32_t>(block_len.size()));
        if (inserted) block_len.push_back(run.length);
        const std::uint32_t block = it->second;
        if (block_len[block] != run.length)
            throw BlockAtomicityError("sector " + std::to_string(first) + " starts runs of different lengths");
        for (std::size_t i = run.begin; i < run.begin + run.length; ++i) {
            if (owner[index[i]] == std::numeric_limits<std::uint32_t>::max())
                owner[index[i]] = block;
            else if (owner[index[i]] != block)
                throw BlockAtomicityError("sector " + std::to_string(trace[i].sector) +
                                          " belongs to more than one tile run");
        }
        run_block[r] = block;
    }

    BlockLru lru(block_len.size(), cache.capacity_sectors());
    Recorder rec(block_len.size(), opts.wave_series);
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const SectorAccess& e = trace[runs[r].begin];
        rec.record(e.tensor, e.wave, run_block[r], runs[r].length, lru.access(run_block[r], runs[r].length));
    }
    return rec.finish();
}

// --- A/B comparison --------------------------------------------------------

namespace {

std::optional<double> reduction(std::uint64_t a, std::uint64_t b) {
    if (a == 0) return std::nullopt;
    return (static_cast<double>(a) - static_cast<double>(b)) / static_cast<double>(a);
}

}  // namespace

ReductionReport classify(const CacheStats& a, const CacheStats& b) {
    for (int t = 0; t < kNumTensors; ++t) {
        if (a.per_tensor[t].accesses != b.per_tensor[t].accesses ||
            a.per_tensor[t].compulsory != b.per_tensor[t].compulsory)
            throw std::invalid_argument("cannot compare runs of different workloads: " +
                                        std::string(to_string(static_cast<Tensor>(t))) +
                                        " access or compulsory counts differ");
    }
    ReductionReport r;
    r.non_compulsory_a = a.total.non_compulsory;
    r.non_compulsory_b = b.total.non_compulsory;
    r.non_compulsory_delta = static_cast<std::int64_t>(r.non_compulsory_a) -
                             static_cast<std::int64_t>(r.non_compulsory_b);
    r.misses_a = a.total.misses;
    r.misses_b = b.total.misses;
    r.misses_delta = static_cast<std::int64_t>(r.misses_a) - static_cast<std::int64_t>(r.misses_b);
    r.non_compulsory_reduction = reduction(r.non_compulsory_a, r.non_compulsory_b);
    r.miss_reduction = reduction(r.misses_a, r.misses_b);
    return r;
}

std::string ReductionReport::summary() const {
    std::ostringstream os;
    if (!non_compulsory_reduction) {
        os << "no non-compulsory misses to reduce";
        if (non_compulsory_b != 0) os << " (B has " << non_compulsory_b << ")";
        return os.str();
    }
    os.precision(4);
    os << "non-compulsory misses " << non_compulsory_a << " -> " << non_compulsory_b << " ("
       << 100.0 * *non_compulsory_reduction << "% reduction); total misses " << misses_a << " -> "
       << misses_b;
    if (miss_reduction) os << " (" << 100.0 * *miss_reduction << "% reduction)";
    return os.str();
}

}  // namespace l2wave
