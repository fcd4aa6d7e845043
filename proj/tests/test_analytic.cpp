#include <doctest.h>

#include <vector>

#include "l2wave/analytic.hpp"
#include "l2wave/trace.hpp"

using namespace l2wave;

TEST_CASE("non-causal model at the default geometry") {
    const auto m = sectors_noncausal_approx(32768, 64, 2, 32, 80);
    CHECK(m.sectors() == doctest::Approx(8.0 * 32768 * (1 + 32768.0 / 80)));
    CHECK(m.qo == doctest::Approx(2.0 * 32768 * 4));
    // 8 * 131072 * (1 + 1638.4)
    CHECK(sectors_noncausal_approx(131072, 64, 2, 32, 80).sectors() == doctest::Approx(1'719'035'494.4));
}

TEST_CASE("causal model") {
    const auto m = sectors_causal_approx(32768, 64, 2, 32, 80);
    CHECK(m.sectors() == doctest::Approx(8.0 * 32768 * (32768.0 / 160 + 0.5)));
    CHECK(m.qo == doctest::Approx(32768.0 * 4));
}

TEST_CASE("non-causal model is exact when T divides S and C divides T*D*E") {
    for (std::uint64_t t : {4, 8, 16, 80})
        for (std::uint64_t k = 1; k < 30; ++k) {
            AttentionConfig cfg{t * k, 64, t, 2, 1, 1, false};
            CHECK(sectors_approx(cfg, 32).sectors() == doctest::Approx(double(exact_totals(cfg, 32).total())));
        }
}

TEST_CASE("causal model undercounts by exactly one Q plus one O pass when T divides S") {
    // Exact: 2 SDE/C for Q and O, n(n+1)/2 tiles each of K and V.
    for (std::uint64_t k = 1; k < 40; ++k) {
        AttentionConfig cfg{16 * k, 64, 16, 2, 1, 1, true};
        const double gap = double(exact_totals(cfg, 32).total()) - sectors_approx(cfg, 32).sectors();
        CHECK(gap == doctest::Approx(2.0 * cfg.seq_len * 64 * 2 / 32));
    }
}

TEST_CASE("causal count is about half the non-causal one") {
    AttentionConfig cfg{131072, 64, 80, 2, 1, 1, false};
    const double full = double(exact_totals(cfg, 32).total());
    cfg.causal = true;
    const double half = double(exact_totals(cfg, 32).total());
    CHECK(half / full == doctest::Approx(0.5).epsilon(0.002));
}

TEST_CASE("cold sectors") {
    CHECK(cold_sectors(32768, 64, 2, 32) == doctest::Approx(524288));
    AttentionConfig cfg;
    CHECK(cold_sectors(32768, 64, 2, 32) == doctest::Approx(double(TileLayout(cfg, 32).universe_sectors())));
}

TEST_CASE("hit rate model") {
    CHECK(hit_rate_model(1) == 0.0);
    CHECK(hit_rate_model(48) == doctest::Approx(47.0 / 48.0));
    for (std::uint64_t n = 1; n < 200; ++n) CHECK(hit_rate_model(n + 1) > hit_rate_model(n));
    CHECK_THROWS_AS(hit_rate_model(0), std::invalid_argument);
}

TEST_CASE("divergence length") {
    const auto d = divergence_length(CacheModel{}, AttentionConfig{});
    CHECK(d.capacity_bound == doctest::Approx(98304));
    CHECK(d.expected_onset == doctest::Approx(81920));
    // (24 MiB - 98 tiles of 10240 B) / 256 B per row
    CHECK(d.overhead_adjusted == doctest::Approx((25165824.0 - 98 * 10240.0) / 256.0));
}

TEST_CASE("mape") {
    const std::vector<std::pair<double, double>> p{{100, 101}, {200, 190}};
    CHECK(mape(p) == doctest::Approx(3.0));
    CHECK_THROWS_AS(mape({}), std::invalid_argument);
    const std::vector<std::pair<double, double>> bad{{0, 1}};
    CHECK_THROWS_AS(mape(bad), std::invalid_argument);
}
