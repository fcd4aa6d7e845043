#pragma once

// Experiment files, sweeps and reports behind the l2wave command line tool.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "l2wave/analytic.hpp"
#include "l2wave/cachesim.hpp"
#include "l2wave/config.hpp"
#include "l2wave/trace.hpp"

namespace l2wave {

inline constexpr const char* kToolVersion = "1.0.0";

struct SweepAxes {
    std::optional<std::vector<std::uint64_t>> seq_len;
    std::optional<std::vector<std::uint64_t>> n_sm;
    std::optional<std::vector<std::uint64_t>> batch;
    std::optional<std::vector<ScanOrder>> scan;

    bool any() const { return seq_len || n_sm || batch || scan; }
};

struct ExperimentSpec {
    AttentionConfig config;
    CacheModel cache;
    SchedulePolicy sched;
    ScanOrder scan = ScanOrder::Cyclic;
    SimFidelity fidelity = SimFidelity::SectorExact;
    SweepAxes sweep;
    std::uint64_t max_points = 4096;
    TraceLimits limits;
    std::uint64_t seed = 1;

    Workload workload() const { return {config, cache, sched, scan}; }
};

nlohmann::json to_json(const ExperimentSpec& spec);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentSpec spec_from_json(const nlohmann::json& j);
ExperimentSpec load_spec(const std::string& path);

// FNV-1a over the canonical JSON of the resolved spec.
std::string spec_hash(const ExperimentSpec& spec);

// Aggregates workload errors of every sweep point plus sweep-shape errors.
std::vector<std::string> validate(const ExperimentSpec& spec);

// Cross product of the sweep axes (seq_len outermost, scan innermost); a
// spec without sweep axes expands to itself.
std::vector<ExperimentSpec> expand(const ExperimentSpec& spec);

// Parses "a,b,c" or "start:stop:step" (inclusive stop).
std::vector<std::uint64_t> parse_u64_list(const std::string& text);

// Runs fn(i) for i in [0, n) on up to `jobs` threads; results are written by
// index so report order never depends on completion order.
void run_indexed(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

// --- model ---------------------------------------------------------------

struct ModelRow {
    ExperimentSpec point;
    ModelPrediction model;
    std::optional<std::uint64_t> exact;
    std::optional<double> mape_running;
};

std::vector<ModelRow> run_model(const ExperimentSpec& spec, bool with_exact);

// --- simulate ------------------------------------------------------------

struct SimPoint {
    ExperimentSpec point;
    CacheStats stats;
    ModelPrediction model;
    TensorTotals exact;
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::vector<SimPoint> points;
    double wall_seconds = 0.0;
};

ExperimentReport run_simulate(const ExperimentSpec& spec, unsigned jobs = 1, bool wave_series = false);

// --- compare -------------------------------------------------------------

struct ComparePoint {
    SimPoint a;
    SimPoint b;
    ReductionReport reduction;
};

struct CompareReport {
    ExperimentSpec spec_a;
    ExperimentSpec spec_b;
    std::vector<ComparePoint> points;
    double threshold = 0.45;
    double wall_seconds = 0.0;

    // Every point with non-compulsory misses to reduce meets the threshold.
    bool meets_threshold() const;
};

// Throws std::invalid_argument when the specs differ in anything other than
// scan order and schedule.
void require_comparable(const ExperimentSpec& a, const ExperimentSpec& b);

CompareReport run_compare(const ExperimentSpec& a, const ExperimentSpec& b, double threshold, unsigned jobs = 1);

// --- oracle --------------------------------------------------------------

struct OracleOptions {
    std::uint64_t seed = 1;
    std::uint64_t traces = 100;
    std::uint64_t max_events = 10'000;
    std::uint64_t max_sectors = 256;
};

struct OracleFailure {
    std::string check;
    std::uint64_t trace_index = 0;
    std::uint64_t capacity = 0;
    std::uint64_t expected = 0;
    std::uint64_t actual = 0;
    std::vector<std::uint64_t> trace;
};

struct OracleReport {
    OracleOptions options;
    std::uint64_t traces_checked = 0;
    std::uint64_t capacities_checked = 0;
    std::optional<OracleFailure> failure;

    bool passed() const { return !failure.has_value(); }
};

// Random sector trace mixing uniform, cyclic and sawtooth segments.
std::vector<std::uint64_t> random_trace(std::mt19937_64& rng, std::uint64_t max_events, std::uint64_t max_sectors);

// Simulated fully associative LRU misses at `capacity` sectors.
std::uint64_t lru_misses(std::span<const std::uint64_t> trace, std::uint64_t capacity);

// Checks simulation vs. histogram tail at capacities 0..max_capacity and
// naive vs. fast histograms. Returns the first disagreement.
std::optional<OracleFailure> check_oracle(std::span<const std::uint64_t> trace, std::uint64_t max_capacity);

OracleReport run_oracle(const OracleOptions& opts);

// --- report emission -----------------------------------------------------

nlohmann::json to_json(const CacheStats& stats, bool with_waves = false);
nlohmann::json to_json(const ModelPrediction& m);
nlohmann::json to_json(const TensorTotals& t);

nlohmann::json model_json(const ExperimentSpec& spec, const std::vector<ModelRow>& rows);
std::string model_csv(const ExperimentSpec& spec, const std::vector<ModelRow>& rows);

nlohmann::json report_json(const ExperimentReport& report, bool with_waves = false);
std::string report_csv(const ExperimentReport& report);

nlohmann::json compare_json(const CompareReport& report);
std::string compare_csv(const CompareReport& report);

nlohmann::json oracle_json(const OracleReport& report);

}  // namespace l2wave
