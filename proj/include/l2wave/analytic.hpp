#pragma once

// Closed-form L2 sector models for split-Q tiled attention.
//
// Model values stay fractional: they ignore the trailing partial tile and
// are compared to exact integer trace counts through MAPE.

#include <cstdint>
#include <span>
#include <utility>

#include "l2wave/config.hpp"

namespace l2wave {

struct ModelPrediction {
    double qo = 0.0;  // Q loads + O stores
    double kv = 0.0;  // K + V streaming

    double sectors() const { return qo + kv; }
};

// M = 2 (SDE/C + S^2 DE / (TC)); 8S(1 + S/T) at D=64, E=2, C=32.
ModelPrediction sectors_noncausal_approx(double S, double D, double E, double C, double T);

// M = 2 (DE/C) S (S/(2T) + 1/2); 8S(S/(2T) + 1/2) at D=64, E=2, C=32.
// Split as qo = SDE/C and kv = S^2 DE / (TC).
ModelPrediction sectors_causal_approx(double S, double D, double E, double C, double T);

inline ModelPrediction sectors_approx(const AttentionConfig& cfg, std::uint64_t sector_bytes) {
    const auto f = cfg.causal ? sectors_causal_approx : sectors_noncausal_approx;
    auto m = f(double(cfg.seq_len), double(cfg.head_dim), double(cfg.elem_bytes), double(sector_bytes),
               double(cfg.tile));
    m.qo *= double(cfg.slices());
    m.kv *= double(cfg.slices());
    return m;
}

// Compulsory footprint of Q, K, V and O: 4 SDE / C.
double cold_sectors(double S, double D, double E, double C);

// Wavefront L2 hit rate when n_sm CTAs stream the same KV tiles in lockstep.
double hit_rate_model(std::uint64_t n_sm);

struct DivergenceEstimate {
    // S with 2 S D E = capacity; misses cannot exceed cold misses below it.
    double capacity_bound = 0.0;
    // capacity_bound scaled by the observed 20 MiB / 24 MiB onset ratio.
    double expected_onset = 0.0;
    // Capacity less one wavefront's resident tiles: a Q and an O tile per
    // CTA plus the shared K and V tiles.
    double overhead_adjusted = 0.0;
};

inline constexpr double kObservedOnsetRatio = 20.0 / 24.0;

DivergenceEstimate divergence_length(const CacheModel& cache, const AttentionConfig& cfg);

// Mean absolute percentage error over (observed, predicted) pairs, in percent.
// Throws std::invalid_argument on an empty list or a non-positive observation.
double mape(std::span<const std::pair<double, double>> pairs);

}  // namespace l2wave
