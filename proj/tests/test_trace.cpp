#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "l2wave/trace.hpp"
#include "support.hpp"

using namespace l2wave;
using l2wave::test::all_schedules;

namespace {

Workload small(std::uint64_t s, std::uint64_t t, std::uint64_t n_sm, ScheduleVariant v, ScanOrder scan,
               bool causal = false) {
    Workload w;
    w.config = {s, 8, t, 4, 1, 1, causal};
    w.cache.n_sm = n_sm;
    w.sched.variant = v;
    w.scan = scan;
    return w;
}

}  // namespace

TEST_CASE("single tile workload emits Q, K, V, O once") {
    Workload w;
    w.config = {16, 1, 16, 2, 1, 1, false};
    const auto t = materialize(w);
    REQUIRE(t.events.size() == 4);
    CHECK(t.events[0].tensor == Tensor::Q);
    CHECK(t.events[1].tensor == Tensor::K);
    CHECK(t.events[2].tensor == Tensor::V);
    CHECK(t.events[3].tensor == Tensor::O);
    CHECK(t.events[3].kind == AccessKind::Write);
    CHECK(t.totals.total() == 4);
}

TEST_CASE("exact totals at 32K") {
    AttentionConfig cfg{32768, 64, 80, 2, 1, 1, false};
    const auto t = exact_totals(cfg, 32);
    CHECK(t[Tensor::Q] == 131072);
    CHECK(t[Tensor::K] == 53'739'520);
    CHECK(t[Tensor::V] == 53'739'520);
    CHECK(t[Tensor::O] == 131072);
    CHECK(t.total() == 107'741'184);
}

TEST_CASE("exact totals at 128K") {
    AttentionConfig cfg{131072, 64, 80, 2, 1, 1, false};
    CHECK(exact_totals(cfg, 32).total() == 1'719'664'640);
}

TEST_CASE("generator totals equal the closed form for every schedule and scan") {
    std::mt19937_64 rng(7);
    for (int it = 0; it < 200; ++it) {
        auto w = test::random_workload(rng, it % 2 == 0);
        CAPTURE(it);
        CHECK(count_generated(w) == exact_totals(w.config, w.cache.sector_bytes));
    }
}

TEST_CASE("trace multiset equals straight nested loops") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 120; ++it) {
        auto w = test::random_workload(rng, it % 2 == 0);
        CAPTURE(it);
        const auto t = materialize(w);
        CHECK(test::multiset_of(t) == test::brute_force_multiset(w.config, w.cache.sector_bytes));
        CHECK(trace_totals(t.events) == t.totals);
    }
}

TEST_CASE("causal S = 2T visits three KV tiles") {
    Workload w;
    w.config = {32, 1, 16, 2, 1, 1, true};
    const auto t = materialize(w);
    std::uint64_t k = 0;
    for (const auto& e : t.events) k += e.tensor == Tensor::K;
    CHECK(k == 3);
}

TEST_CASE("batch and heads scale totals linearly") {
    std::mt19937_64 rng(3);
    for (int it = 0; it < 100; ++it) {
        auto w = test::random_workload(rng, false);
        w.config.batch = 1;
        w.config.heads = 1;
        const auto one = exact_totals(w.config, w.cache.sector_bytes);
        w.config.batch = 1 + it % 4;
        w.config.heads = 1 + it % 3;
        const auto many = count_generated(w);
        for (int tz = 0; tz < kNumTensors; ++tz)
            CHECK(many.sectors[tz] == one.sectors[tz] * w.config.slices());
    }
}

TEST_CASE("kv_visit_order") {
    using V = std::vector<std::uint64_t>;
    CHECK(kv_visit_order(0, 4, ScanOrder::Cyclic) == V{0, 1, 2, 3});
    CHECK(kv_visit_order(1, 4, ScanOrder::Cyclic) == V{0, 1, 2, 3});
    CHECK(kv_visit_order(0, 4, ScanOrder::Sawtooth) == V{0, 1, 2, 3});
    CHECK(kv_visit_order(1, 4, ScanOrder::Sawtooth) == V{3, 2, 1, 0});
    CHECK(kv_visit_order(2, 4, ScanOrder::Sawtooth) == V{0, 1, 2, 3});
    CHECK(kv_visit_order(1, 4, ScanOrder::Sawtooth, 2) == V{2, 1, 0});
    CHECK(kv_visit_order(0, 4, ScanOrder::Cyclic, 0) == V{0});
}

TEST_CASE("kv_visit_order is a permutation of the visited set") {
    for (std::uint64_t n = 1; n < 12; ++n)
        for (std::uint64_t it = 0; it < 4; ++it)
            for (auto scan : {ScanOrder::Cyclic, ScanOrder::Sawtooth})
                for (std::uint64_t bound = 0; bound < n; ++bound) {
                    auto order = kv_visit_order(it, n, scan, bound);
                    std::set<std::uint64_t> seen(order.begin(), order.end());
                    CHECK(order.size() == bound + 1);
                    CHECK(seen.size() == bound + 1);
                    CHECK(*seen.rbegin() == bound);
                }
}

TEST_CASE("assign_q_tiles covers every Q tile exactly once") {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 200; ++it) {
        auto w = test::random_workload(rng, false);
        const auto a = assign_q_tiles(w.config, w.cache, w.sched);
        std::map<std::uint64_t, int> seen;
        for (const auto& list : a.per_cta)
            for (const auto& item : list)
                ++seen[(item.batch * w.config.heads + item.head) * w.config.num_q_tiles() + item.q_tile];
        CHECK(seen.size() == w.config.total_q_tiles());
        for (const auto& [k, n] : seen) CHECK(n == 1);
        if (w.sched.persistent()) CHECK(a.per_cta.size() == w.sched.resolved_grid(w.config, w.cache));
        else CHECK(a.per_cta.size() == w.config.total_q_tiles());
    }
}

TEST_CASE("schedule assignments") {
    AttentionConfig cfg{80, 8, 10, 4, 1, 1, false};  // 8 tiles
    CacheModel cache;
    cache.n_sm = 3;
    auto tiles = [&](ScheduleVariant v) {
        std::vector<std::vector<std::uint64_t>> out;
        for (const auto& list : assign_q_tiles(cfg, cache, {v, std::nullopt}).per_cta) {
            out.emplace_back();
            for (const auto& i : list) out.back().push_back(i.q_tile);
        }
        return out;
    };
    using VV = std::vector<std::vector<std::uint64_t>>;
    CHECK(tiles(ScheduleVariant::PersistentRoundRobin) == VV{{0, 3, 6}, {1, 4, 7}, {2, 5}});
    CHECK(tiles(ScheduleVariant::PersistentContiguous) == VV{{0, 1, 2}, {3, 4, 5}, {6, 7}});
    CHECK(tiles(ScheduleVariant::TileStep2) == VV{{0, 3, 6}, {1, 4, 7}, {2, 5}});
    const auto np = assign_q_tiles(cfg, cache, {ScheduleVariant::NonPersistent, std::nullopt});
    CHECK(np.per_cta.size() == 8);
    CHECK(np.dispatch_width == 3);
}

TEST_CASE("work_item is batch-major") {
    AttentionConfig cfg{30, 8, 10, 4, 2, 3, false};
    CHECK(work_item(cfg, 0) == WorkItem{0, 0, 0});
    CHECK(work_item(cfg, 4) == WorkItem{0, 1, 1});
    CHECK(work_item(cfg, 9) == WorkItem{1, 0, 0});
    CHECK(work_item(cfg, 17) == WorkItem{1, 2, 2});
}

TEST_CASE("lockstep: CTAs on the same iteration read the same KV tile in a step") {
    // 8 Q tiles, 8 SMs, one wave; every step carries 8 reads of one K tile.
    for (auto v : all_schedules()) {
        auto w = small(64, 8, 8, v, ScanOrder::Cyclic);
        const auto t = materialize(w);
        std::map<std::uint32_t, std::set<std::uint64_t>> k_by_wave;
        std::map<std::uint32_t, std::set<std::uint32_t>> ctas_by_wave;
        for (const auto& e : t.events)
            if (e.tensor == Tensor::K) {
                k_by_wave[e.wave].insert(e.sector);
                ctas_by_wave[e.wave].insert(e.cta);
            }
        CHECK(k_by_wave.size() == 8);
        for (const auto& [wave, sectors] : k_by_wave) {
            CHECK(ctas_by_wave[wave].size() == 8);
            CHECK(sectors.size() == 8);  // one tile of 8 sectors (8 rows * 32 B / 32 B)
        }
    }
}

TEST_CASE("lockstep: ascending CTA order inside a step, tile runs ascending") {
    auto w = small(200, 10, 4, ScheduleVariant::PersistentRoundRobin, ScanOrder::Sawtooth);
    const auto t = materialize(w);
    for (std::size_t i = 1; i < t.events.size(); ++i) {
        const auto& a = t.events[i - 1];
        const auto& b = t.events[i];
        CHECK(a.wave <= b.wave);
        if (a.wave == b.wave) CHECK(a.cta <= b.cta);
    }
}

TEST_CASE("sawtooth reverses on odd local iterations of a persistent CTA") {
    auto w = small(40, 10, 1, ScheduleVariant::PersistentRoundRobin, ScanOrder::Sawtooth);
    const auto t = materialize(w);
    TileLayout layout(w.config, 32);
    std::vector<std::uint64_t> k_tiles;
    for (const auto& e : t.events)
        if (e.tensor == Tensor::K) {
            const auto off = e.sector - layout.slice_sectors();
            if (off % layout.tile_sectors(0) == 0) k_tiles.push_back(off / layout.tile_sectors(0));
        }
    const std::vector<std::uint64_t> expect{0, 1, 2, 3, 3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0};
    CHECK(k_tiles == expect);
}

TEST_CASE("non-persistent sawtooth equals cyclic") {
    auto a = small(120, 10, 5, ScheduleVariant::NonPersistent, ScanOrder::Cyclic);
    auto b = a;
    b.scan = ScanOrder::Sawtooth;
    CHECK(materialize(a).events == materialize(b).events);
}

TEST_CASE("non-persistent waves are barrier separated") {
    auto w = small(120, 10, 5, ScheduleVariant::NonPersistent, ScanOrder::Cyclic);  // 12 tiles, 3 waves
    const auto t = materialize(w);
    std::map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> wave_range;  // cta -> [first, last] step
    for (const auto& e : t.events) {
        auto [it, fresh] = wave_range.try_emplace(e.cta, e.wave, e.wave);
        if (!fresh) it->second.second = std::max(it->second.second, e.wave);
    }
    for (std::uint32_t c = 5; c < 12; ++c) CHECK(wave_range[c].first > wave_range[c - 5].second);
}

TEST_CASE("generation is deterministic") {
    std::mt19937_64 rng(21);
    for (int it = 0; it < 30; ++it) {
        auto w = test::random_workload(rng, it % 2 == 0);
        CHECK(materialize(w).events == materialize(w).events);
    }
}

TEST_CASE("tile layout") {
    AttentionConfig cfg{32768, 64, 80, 2, 1, 1, false};
    TileLayout layout(cfg, 32);
    CHECK(layout.tiles_disjoint());
    CHECK(layout.slice_sectors() == 131072);
    CHECK(layout.tile_sectors(0) == 320);
    CHECK(layout.tile_sectors(409) == 192);
    CHECK(layout.tile(Tensor::K, 0, 0, 1).first == 131072 + 320);

    AttentionConfig odd{10, 1, 3, 2, 1, 1, false};  // 6-byte tiles share sectors
    TileLayout l2(odd, 32);
    CHECK_FALSE(l2.tiles_disjoint());
    CHECK(l2.tile(Tensor::Q, 0, 0, 0).first == 0);
    CHECK(l2.tile(Tensor::Q, 0, 0, 3).count == 1);
}

TEST_CASE("trace cap") {
    AttentionConfig cfg{32768, 64, 80, 2, 1, 1, false};
    Workload w{cfg, CacheModel{}, SchedulePolicy{}, ScanOrder::Cyclic};
    CHECK_THROWS_AS(check_trace_cap(w, TraceLimits{1000}), TraceCapExceeded);
    CHECK_NOTHROW(check_trace_cap(w, TraceLimits{107'741'184}));
    try {
        materialize(w, TraceLimits{10});
        FAIL("expected cap");
    } catch (const TraceCapExceeded& e) {
        CHECK(e.events() == 107'741'184);
    }
}
