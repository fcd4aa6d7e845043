#include <doctest.h>

#include <algorithm>

#include "l2wave/config.hpp"

using namespace l2wave;

namespace {

bool has_error(const std::vector<std::string>& errors, const std::string& needle) {
    return std::any_of(errors.begin(), errors.end(), [&](const auto& e) { return e.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("default geometry") {
    AttentionConfig cfg;
    CacheModel cache;
    CHECK(cfg.head_dim == 64);
    CHECK(cfg.tile == 80);
    CHECK(cfg.elem_bytes == 2);
    CHECK(cache.sector_bytes == 32);
    CHECK(cache.capacity_bytes == 25'165'824);
    CHECK(cache.n_sm == 48);
    CHECK(cache.fully_associative());
}

TEST_CASE("validate accepts the 32K single-head configuration") {
    AttentionConfig cfg{32768, 64, 80, 2, 1, 1, false};
    CHECK(validate(cfg, CacheModel{}, SchedulePolicy{}).empty());
    CHECK(cfg.num_q_tiles() == 410);
    CHECK(cfg.trailing_rows() == 48);
}

TEST_CASE("validate aggregates every violation") {
    AttentionConfig cfg;
    cfg.seq_len = 0;
    cfg.elem_bytes = 3;
    cfg.batch = 0;
    CacheModel cache;
    cache.capacity_bytes = 100;
    cache.n_sm = 0;
    const auto errors = validate(cfg, cache, SchedulePolicy{});
    CHECK(errors.size() == 5);
    CHECK(has_error(errors, "S >= T >= 1"));
    CHECK(has_error(errors, "E in {1, 2, 4}"));
    CHECK(has_error(errors, "B >= 1"));
    CHECK(has_error(errors, "capacity multiple of sector"));
    CHECK(has_error(errors, "n_sm"));
    CHECK_THROWS_AS(require_valid(cfg, cache, SchedulePolicy{}), ConfigError);
}

TEST_CASE("set-associative geometry needs whole sets") {
    CacheModel cache;
    cache.capacity_bytes = 32 * 12;
    cache.ways = 5;
    CHECK(has_error(validate(cache), "whole number of sets"));
    cache.ways = 4;
    CHECK(validate(cache).empty());
    CHECK(cache.num_sets() == 3);
}

TEST_CASE("schedule grid constraints") {
    AttentionConfig cfg{320, 8, 80, 2, 1, 1, false};  // 4 Q tiles
    CacheModel cache;
    SchedulePolicy rr{ScheduleVariant::PersistentRoundRobin, 48};
    CHECK(has_error(validate(cfg, cache, rr), "min(total Q tiles, n_sm)"));
    rr.grid_size = 4;
    CHECK(validate(cfg, cache, rr).empty());
    SchedulePolicy contiguous{ScheduleVariant::PersistentContiguous, 5};
    CHECK(has_error(validate(cfg, cache, contiguous), "G <= total Q tiles"));
    contiguous.grid_size = 2;
    CHECK(validate(cfg, cache, contiguous).empty());
    CHECK(SchedulePolicy{}.resolved_grid(cfg, cache) == 4);
}

TEST_CASE("sectors_per_tile") {
    CHECK(sectors_per_tile(80, 64, 2, 32) == 320);
    CHECK(sectors_per_tile(48, 64, 2, 32) == 192);
    CHECK(sectors_per_tile(16, 1, 2, 32) == 1);
    CHECK(sectors_per_tile(3, 1, 2, 32) == 1);
    CHECK(sectors_per_tile(17, 1, 2, 32) == 2);
}

TEST_CASE("sectors_per_tile is monotone in T, D, E and antitone in C") {
    for (std::uint64_t t = 1; t < 40; ++t)
        for (std::uint64_t d = 1; d < 20; ++d)
            for (std::uint64_t e : {1, 2, 4})
                for (std::uint64_t c : {8, 16, 32, 64}) {
                    const auto base = sectors_per_tile(t, d, e, c);
                    CHECK(sectors_per_tile(t + 1, d, e, c) >= base);
                    CHECK(sectors_per_tile(t, d + 1, e, c) >= base);
                    CHECK(sectors_per_tile(t, d, e * 2, c) >= base);
                    CHECK(sectors_per_tile(t, d, e, c * 2) <= base);
                }
}

TEST_CASE("kv_bytes") {
    AttentionConfig cfg;
    cfg.seq_len = 81920;
    CHECK(kv_bytes(cfg) == 20'971'520);
    cfg.seq_len = 98304;
    CHECK(kv_bytes(cfg) == CacheModel{}.capacity_bytes);
    AttentionConfig tiny{1, 1, 1, 1, 1, 1, false};
    CHECK(kv_bytes(tiny) == 2);
    cfg.batch = 3;
    cfg.heads = 2;
    CHECK(kv_bytes_total(cfg) == 6 * kv_bytes(cfg));
}

TEST_CASE("Q-tile count brackets the sequence") {
    for (std::uint64_t t = 1; t <= 33; ++t)
        for (std::uint64_t s = t; s <= 300; ++s) {
            AttentionConfig cfg{s, 8, t, 2, 1, 1, false};
            CHECK(cfg.num_q_tiles() * t >= s);
            CHECK((cfg.num_q_tiles() - 1) * t < s);
            CHECK(cfg.trailing_rows() >= 1);
            CHECK(cfg.trailing_rows() <= t);
        }
}

TEST_CASE("kv_bytes is linear in S, D and E") {
    AttentionConfig cfg{1000, 16, 10, 2, 1, 1, false};
    const auto base = kv_bytes(cfg);
    cfg.seq_len *= 3;
    CHECK(kv_bytes(cfg) == 3 * base);
    cfg.head_dim *= 2;
    CHECK(kv_bytes(cfg) == 6 * base);
    cfg.elem_bytes = 4;
    CHECK(kv_bytes(cfg) == 12 * base);
}

TEST_CASE("name parsing") {
    CHECK(parse_schedule("tilestep2") == ScheduleVariant::TileStep2);
    CHECK(parse_scan("sawtooth") == ScanOrder::Sawtooth);
    CHECK(to_string(ScheduleVariant::PersistentContiguous) == "contiguous");
    CHECK_THROWS_AS(parse_scan("zigzag"), std::invalid_argument);
}
