#include "l2wave/trace.hpp"

#include <algorithm>
#include <string>

namespace l2wave {

TileLayout::TileLayout(const AttentionConfig& cfg, std::uint64_t sector_bytes)
    : cfg_(cfg),
      sector_bytes_(sector_bytes),
      slice_sectors_((cfg.slice_bytes() + sector_bytes - 1) / sector_bytes) {}

std::uint64_t TileLayout::slice_index(Tensor t, std::uint64_t batch, std::uint64_t head) const {
    return (static_cast<std::uint64_t>(t) * cfg_.batch + batch) * cfg_.heads + head;
}

std::uint64_t TileLayout::tile_sectors(std::uint64_t q_tile) const {
    const std::uint64_t row_bytes = cfg_.head_dim * cfg_.elem_bytes;
    const std::uint64_t begin = q_tile * cfg_.tile * row_bytes;
    const std::uint64_t end = std::min((q_tile + 1) * cfg_.tile, cfg_.seq_len) * row_bytes;
    return (end + sector_bytes_ - 1) / sector_bytes_ - begin / sector_bytes_;
}

TileLayout::Range TileLayout::tile(Tensor t, std::uint64_t batch, std::uint64_t head,
                                   std::uint64_t q_tile) const {
    const std::uint64_t row_bytes = cfg_.head_dim * cfg_.elem_bytes;
    const std::uint64_t begin = q_tile * cfg_.tile * row_bytes;
    return {slice_index(t, batch, head) * slice_sectors_ + begin / sector_bytes_, tile_sectors(q_tile)};
}

std::uint64_t TileLayout::block_id(Tensor t, std::uint64_t batch, std::uint64_t head,
                                   std::uint64_t q_tile) const {
    return slice_index(t, batch, head) * cfg_.num_q_tiles() + q_tile;
}

WorkItem work_item(const AttentionConfig& cfg, std::uint64_t linear) {
    const std::uint64_t nq = cfg.num_q_tiles();
    return {linear / (cfg.heads * nq), (linear / nq) % cfg.heads, linear % nq};
}

QTileAssignment assign_q_tiles(const AttentionConfig& cfg, const CacheModel& cache,
                               const SchedulePolicy& sched) {
    require_valid(cfg, cache, sched);
    const std::uint64_t total = cfg.total_q_tiles();
    QTileAssignment out;

    if (sched.variant == ScheduleVariant::NonPersistent) {
        // One logical CTA per Q tile, blockIdx order = linear tile order.
        out.per_cta.resize(total);
        for (std::uint64_t k = 0; k < total; ++k) out.per_cta[k].push_back(work_item(cfg, k));
        out.dispatch_width = cache.n_sm;
        return out;
    }

    const std::uint64_t grid = sched.resolved_grid(cfg, cache);
    out.per_cta.resize(grid);
    switch (sched.variant) {
    case ScheduleVariant::PersistentRoundRobin:
        for (std::uint64_t c = 0; c < grid; ++c)
            for (std::uint64_t k = c; k < total; k += grid) out.per_cta[c].push_back(work_item(cfg, k));
        break;
    case ScheduleVariant::PersistentContiguous: {
        const std::uint64_t chunk = (total + grid - 1) / grid;
        for (std::uint64_t c = 0; c < grid; ++c)
            for (std::uint64_t k = c * chunk; k < std::min((c + 1) * chunk, total); ++k)
                out.per_cta[c].push_back(work_item(cfg, k));
        break;
    }
    case ScheduleVariant::TileStep2:
        // Outer loop takes two grid-strided tiles per step; the pair position
        // is the local parity that drives the scan direction.
        for (std::uint64_t c = 0; c < grid; ++c) {
            for (std::uint64_t k = c; k < total; k += 2 * grid) {
                out.per_cta[c].push_back(work_item(cfg, k));
                if (k + grid < total) out.per_cta[c].push_back(work_item(cfg, k + grid));
            }
        }
        break;
    case ScheduleVariant::NonPersistent:
        break;
    }
    return out;
}

std::vector<std::uint64_t> kv_visit_order(std::uint64_t local_iter, std::uint64_t n_kv, ScanOrder scan,
                                          std::optional<std::uint64_t> causal_bound) {
    const std::uint64_t count = causal_bound ? std::min(*causal_bound, n_kv - 1) + 1 : n_kv;
    std::vector<std::uint64_t> order(count);
    const bool forward = scan == ScanOrder::Cyclic || local_iter % 2 == 0;
    for (std::uint64_t p = 0; p < count; ++p) order[p] = forward ? p : count - 1 - p;
    return order;
}

TraceCapExceeded::TraceCapExceeded(std::uint64_t events, std::uint64_t cap)
    : std::length_error("trace has " + std::to_string(events) + " sector events, cap is " +
                        std::to_string(cap) + "; use tile-block fidelity or raise the cap"),
      events_(events) {}

namespace {

struct Lane {
    std::uint32_t cta = 0;
    const std::vector<WorkItem>* items = nullptr;
    std::size_t next = 0;
    bool busy = false;
    WorkItem cur;
    std::uint64_t visits = 0;  // KV tiles this Q tile visits
    std::uint64_t pos = 0;
    bool forward = true;
};

class LockstepRunner {
public:
    LockstepRunner(const Workload& w, TileVisitor& visitor)
        : w_(w), layout_(w.config, w.cache.sector_bytes), visitor_(visitor) {}

    // Runs lanes until all have drained their work lists.
    void run(std::vector<Lane>& lanes) {
        for (;;) {
            bool any = false;
            for (auto& lane : lanes) any |= advance(lane);
            if (!any) return;
            ++step_;
        }
    }

private:
    void emit(Tensor t, AccessKind kind, std::uint32_t cta, const WorkItem& item, std::uint64_t tile) {
        const auto range = layout_.tile(t, item.batch, item.head, tile);
        visitor_.on_tile({t, kind, cta, static_cast<std::uint32_t>(step_),
                          layout_.block_id(t, item.batch, item.head, tile), range.first, range.count});
    }

    bool advance(Lane& lane) {
        if (!lane.busy) {
            if (lane.next >= lane.items->size()) return false;
            lane.cur = (*lane.items)[lane.next];
            const std::uint64_t nq = w_.config.num_q_tiles();
            lane.visits = w_.config.causal ? lane.cur.q_tile + 1 : nq;
            lane.pos = 0;
            lane.forward = w_.scan == ScanOrder::Cyclic || lane.next % 2 == 0;
            lane.busy = true;
            emit(Tensor::Q, AccessKind::Read, lane.cta, lane.cur, lane.cur.q_tile);
        }
        const std::uint64_t j = lane.forward ? lane.pos : lane.visits - 1 - lane.pos;
        emit(Tensor::K, AccessKind::Read, lane.cta, lane.cur, j);
        emit(Tensor::V, AccessKind::Read, lane.cta, lane.cur, j);
        if (++lane.pos == lane.visits) {
            emit(Tensor::O, AccessKind::Write, lane.cta, lane.cur, lane.cur.q_tile);
            lane.busy = false;
            ++lane.next;
        }
        return true;
    }

    const Workload& w_;
    TileLayout layout_;
    TileVisitor& visitor_;
    std::uint64_t step_ = 0;
};

}  // namespace

void generate(const Workload& w, TileVisitor& visitor) {
    const auto assignment = assign_q_tiles(w.config, w.cache, w.sched);
    LockstepRunner runner(w, visitor);

    if (assignment.dispatch_width == 0) {
        std::vector<Lane> lanes(assignment.per_cta.size());
        for (std::size_t c = 0; c < lanes.size(); ++c) {
            lanes[c].cta = static_cast<std::uint32_t>(c);
            lanes[c].items = &assignment.per_cta[c];
        }
        runner.run(lanes);
        return;
    }

    // Non-persistent: waves of dispatch_width consecutive CTAs; a wave starts
    // once the previous one has fully retired.
    const std::size_t n = assignment.per_cta.size();
    for (std::size_t first = 0; first < n; first += assignment.dispatch_width) {
        const std::size_t last = std::min<std::size_t>(first + assignment.dispatch_width, n);
        std::vector<Lane> lanes(last - first);
        for (std::size_t c = first; c < last; ++c) {
            lanes[c - first].cta = static_cast<std::uint32_t>(c);
            lanes[c - first].items = &assignment.per_cta[c];
        }
        runner.run(lanes);
    }
}

void check_trace_cap(const Workload& w, const TraceLimits& limits) {
    const std::uint64_t events = exact_totals(w.config, w.cache.sector_bytes).total();
    if (events > limits.max_events) throw TraceCapExceeded(events, limits.max_events);
}

AccessTrace materialize(const Workload& w, const TraceLimits& limits) {
    check_trace_cap(w, limits);

    struct Collector : TileVisitor {
        AccessTrace trace;
        void on_tile(const TileAccess& a) override {
            for (std::uint64_t s = 0; s < a.n_sectors; ++s)
                trace.events.push_back({a.tensor, a.kind, a.cta, a.wave, a.first_sector + s});
            trace.totals[a.tensor] += a.n_sectors;
        }
    } collector;
    collector.trace.events.reserve(exact_totals(w.config, w.cache.sector_bytes).total());
    generate(w, collector);
    return std::move(collector.trace);
}

TensorTotals exact_totals(const AttentionConfig& cfg, std::uint64_t sector_bytes) {
    const TileLayout layout(cfg, sector_bytes);
    const std::uint64_t nq = cfg.num_q_tiles();
    std::uint64_t per_slice_once = 0;
    std::uint64_t per_slice_kv = 0;
    for (std::uint64_t j = 0; j < nq; ++j) {
        const std::uint64_t ts = layout.tile_sectors(j);
        per_slice_once += ts;
        // KV tile j is visited by every Q tile, or by Q tiles j..nq-1 when causal.
        per_slice_kv += ts * (cfg.causal ? nq - j : nq);
    }
    TensorTotals totals;
    totals[Tensor::Q] = per_slice_once * cfg.slices();
    totals[Tensor::O] = per_slice_once * cfg.slices();
    totals[Tensor::K] = per_slice_kv * cfg.slices();
    totals[Tensor::V] = per_slice_kv * cfg.slices();
    return totals;
}

TensorTotals trace_totals(std::span<const SectorAccess> events) {
    TensorTotals totals;
    for (const auto& e : events) ++totals[e.tensor];
    return totals;
}

TensorTotals count_generated(const Workload& w) {
    struct Counter : TileVisitor {
        TensorTotals totals;
        void on_tile(const TileAccess& a) override { totals[a.tensor] += a.n_sectors; }
    } counter;
    generate(w, counter);
    return counter.totals;
}

}  // namespace l2wave
