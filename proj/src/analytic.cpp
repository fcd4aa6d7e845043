#include "l2wave/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace l2wave {

ModelPrediction sectors_noncausal_approx(double S, double D, double E, double C, double T) {
    return {2.0 * S * D * E / C, 2.0 * S * S * D * E / (T * C)};
}

ModelPrediction sectors_causal_approx(double S, double D, double E, double C, double T) {
    return {S * D * E / C, S * S * D * E / (T * C)};
}

double cold_sectors(double S, double D, double E, double C) { return 4.0 * S * D * E / C; }

double hit_rate_model(std::uint64_t n_sm) {
    if (n_sm == 0) throw std::invalid_argument("hit_rate_model: n_sm must be >= 1");
    return 1.0 - 1.0 / static_cast<double>(n_sm);
}

DivergenceEstimate divergence_length(const CacheModel& cache, const AttentionConfig& cfg) {
    const double row_bytes = static_cast<double>(cfg.head_dim * cfg.elem_bytes);
    const double capacity = static_cast<double>(cache.capacity_bytes);
    DivergenceEstimate est;
    est.capacity_bound = capacity / (2.0 * row_bytes);
    est.expected_onset = est.capacity_bound * kObservedOnsetRatio;
    const double resident = static_cast<double>(2 * cache.n_sm + 2) * static_cast<double>(cfg.tile_bytes());
    est.overhead_adjusted = std::max(0.0, capacity - resident) / (2.0 * row_bytes);
    return est;
}

double mape(std::span<const std::pair<double, double>> pairs) {
    if (pairs.empty()) throw std::invalid_argument("mape: empty series");
    double sum = 0.0;
    for (const auto& [observed, predicted] : pairs) {
        if (!(observed > 0.0)) throw std::invalid_argument("mape: observed values must be positive");
        sum += std::abs(observed - predicted) / observed;
    }
    return 100.0 * sum / static_cast<double>(pairs.size());
}

}  // namespace l2wave
