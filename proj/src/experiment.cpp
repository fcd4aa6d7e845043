#include "l2wave/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "l2wave/rdist.hpp"

namespace l2wave {

using nlohmann::json;

// --- spec (de)serialization ----------------------------------------------

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end())
            throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

json to_json(const ExperimentSpec& s) {
    json j;
    j["config"] = {{"seq_len", s.config.seq_len},     {"head_dim", s.config.head_dim},
                   {"tile", s.config.tile},           {"elem_bytes", s.config.elem_bytes},
                   {"batch", s.config.batch},         {"heads", s.config.heads},
                   {"causal", s.config.causal}};
    j["cache"] = {{"sector_bytes", s.cache.sector_bytes},
                  {"capacity_bytes", s.cache.capacity_bytes},
                  {"associativity", s.cache.ways ? json(*s.cache.ways) : json("full")},
                  {"n_sm", s.cache.n_sm}};
    j["schedule"] = {{"variant", to_string(s.sched.variant)},
                     {"grid_size", s.sched.grid_size ? json(*s.sched.grid_size) : json(nullptr)}};
    j["scan"] = to_string(s.scan);
    j["fidelity"] = to_string(s.fidelity);
    json sweep = json::object();
    if (s.sweep.seq_len) sweep["seq_len"] = *s.sweep.seq_len;
    if (s.sweep.n_sm) sweep["n_sm"] = *s.sweep.n_sm;
    if (s.sweep.batch) sweep["batch"] = *s.sweep.batch;
    if (s.sweep.scan) {
        json scans = json::array();
        for (auto sc : *s.sweep.scan) scans.push_back(to_string(sc));
        sweep["scan"] = scans;
    }
    j["sweep"] = sweep;
    j["max_points"] = s.max_points;
    j["max_events"] = s.limits.max_events;
    j["seed"] = s.seed;
    return j;
}

ExperimentSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("experiment file must be a JSON object");
    reject_unknown(j, {"config", "cache", "schedule", "scan", "fidelity", "sweep", "max_points", "max_events", "seed"},
                   "experiment");
    ExperimentSpec s;
    if (j.contains("config")) {
        const json& c = j.at("config");
        reject_unknown(c, {"seq_len", "head_dim", "tile", "elem_bytes", "batch", "heads", "causal"}, "config");
        read_if(c, "seq_len", s.config.seq_len);
        read_if(c, "head_dim", s.config.head_dim);
        read_if(c, "tile", s.config.tile);
        read_if(c, "elem_bytes", s.config.elem_bytes);
        read_if(c, "batch", s.config.batch);
        read_if(c, "heads", s.config.heads);
        read_if(c, "causal", s.config.causal);
    }
    if (j.contains("cache")) {
        const json& c = j.at("cache");
        reject_unknown(c, {"sector_bytes", "capacity_bytes", "associativity", "n_sm"}, "cache");
        read_if(c, "sector_bytes", s.cache.sector_bytes);
        read_if(c, "capacity_bytes", s.cache.capacity_bytes);
        read_if(c, "n_sm", s.cache.n_sm);
        if (c.contains("associativity")) {
            const json& a = c.at("associativity");
            if (a.is_string()) {
                if (a.get<std::string>() != "full")
                    throw std::invalid_argument("associativity must be \"full\" or a way count");
                s.cache.ways.reset();
            } else {
                s.cache.ways = a.get<std::uint64_t>();
            }
        }
    }
    if (j.contains("schedule")) {
        const json& c = j.at("schedule");
        reject_unknown(c, {"variant", "grid_size"}, "schedule");
        if (c.contains("variant")) s.sched.variant = parse_schedule(c.at("variant").get<std::string>());
        if (c.contains("grid_size") && !c.at("grid_size").is_null())
            s.sched.grid_size = c.at("grid_size").get<std::uint64_t>();
    }
    if (j.contains("scan")) s.scan = parse_scan(j.at("scan").get<std::string>());
    if (j.contains("fidelity")) s.fidelity = parse_fidelity(j.at("fidelity").get<std::string>());
    if (j.contains("sweep")) {
        const json& c = j.at("sweep");
        reject_unknown(c, {"seq_len", "n_sm", "batch", "scan"}, "sweep");
        if (c.contains("seq_len")) s.sweep.seq_len = c.at("seq_len").get<std::vector<std::uint64_t>>();
        if (c.contains("n_sm")) s.sweep.n_sm = c.at("n_sm").get<std::vector<std::uint64_t>>();
        if (c.contains("batch")) s.sweep.batch = c.at("batch").get<std::vector<std::uint64_t>>();
        if (c.contains("scan")) {
            std::vector<ScanOrder> scans;
            for (const auto& name : c.at("scan")) scans.push_back(parse_scan(name.get<std::string>()));
            s.sweep.scan = scans;
        }
    }
    read_if(j, "max_points", s.max_points);
    read_if(j, "max_events", s.limits.max_events);
    read_if(j, "seed", s.seed);
    return s;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open experiment file '" + path + "'");
    return spec_from_json(json::parse(in));
}

std::string spec_hash(const ExperimentSpec& spec) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : to_json(spec).dump()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --- sweeps ----------------------------------------------------------------

namespace {

std::uint64_t sweep_size(const SweepAxes& s) {
    std::uint64_t n = 1;
    if (s.seq_len) n *= s.seq_len->size();
    if (s.n_sm) n *= s.n_sm->size();
    if (s.batch) n *= s.batch->size();
    if (s.scan) n *= s.scan->size();
    return n;
}

}  // namespace

std::vector<std::string> validate(const ExperimentSpec& spec) {
    std::vector<std::string> errors;
    const auto& sw = spec.sweep;
    if ((sw.seq_len && sw.seq_len->empty()) || (sw.n_sm && sw.n_sm->empty()) || (sw.batch && sw.batch->empty()) ||
        (sw.scan && sw.scan->empty())) {
        errors.emplace_back("sweep axes non-empty violated");
        return errors;
    }
    if (sweep_size(sw) > spec.max_points) {
        errors.emplace_back("sweep has " + std::to_string(sweep_size(sw)) + " points, cap is " +
                            std::to_string(spec.max_points));
        return errors;
    }
    std::set<std::string> seen;
    for (const auto& p : expand(spec)) {
        auto point_errors = validate(p.config, p.cache, p.sched);
        if (p.fidelity == SimFidelity::TileBlock) {
            if (!p.cache.fully_associative())
                point_errors.emplace_back("tile-block fidelity requires a fully associative cache");
            if (p.cache.sector_bytes && p.config.tile_bytes() % p.cache.sector_bytes != 0)
                point_errors.emplace_back("tile-block fidelity requires T*D*E divisible by the sector size");
        }
        for (auto& e : point_errors)
            if (seen.insert(e).second) errors.push_back(std::move(e));
    }
    return errors;
}

std::vector<ExperimentSpec> expand(const ExperimentSpec& spec) {
    const auto& sw = spec.sweep;
    const std::vector<std::uint64_t> seqs = sw.seq_len.value_or(std::vector{spec.config.seq_len});
    const std::vector<std::uint64_t> sms = sw.n_sm.value_or(std::vector{spec.cache.n_sm});
    const std::vector<std::uint64_t> batches = sw.batch.value_or(std::vector{spec.config.batch});
    const std::vector<ScanOrder> scans = sw.scan.value_or(std::vector{spec.scan});

    std::vector<ExperimentSpec> points;
    for (auto s : seqs)
        for (auto n : sms)
            for (auto b : batches)
                for (auto sc : scans) {
                    ExperimentSpec p = spec;
                    p.sweep = {};
                    p.config.seq_len = s;
                    p.cache.n_sm = n;
                    p.config.batch = b;
                    p.scan = sc;
                    points.push_back(std::move(p));
                }
    return points;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
    auto number = [&](const std::string& tok) {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(tok, &used);
        if (used != tok.size() || tok.empty() || tok[0] == '-')
            throw std::invalid_argument("bad integer '" + tok + "' in list '" + text + "'");
        return static_cast<std::uint64_t>(v);
    };
    std::vector<std::uint64_t> out;
    if (text.empty()) return out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
        if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step, got '" + text + "'");
        const auto start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
        if (step == 0) throw std::invalid_argument("range step must be positive");
        for (std::uint64_t v = start; v <= stop; v += step) out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) out.push_back(number(tok));
    return out;
}

void run_indexed(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

void require_spec(const ExperimentSpec& spec) {
    auto errors = validate(spec);
    if (!errors.empty()) throw ConfigError(std::move(errors));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// --- model / simulate / compare ----------------------------------------------

std::vector<ModelRow> run_model(const ExperimentSpec& spec, bool with_exact) {
    require_spec(spec);
    std::vector<ModelRow> rows;
    std::vector<std::pair<double, double>> pairs;
    for (auto& p : expand(spec)) {
        ModelRow row{p, sectors_approx(p.config, p.cache.sector_bytes), std::nullopt, std::nullopt};
        if (with_exact) {
            row.exact = exact_totals(p.config, p.cache.sector_bytes).total();
            pairs.emplace_back(static_cast<double>(*row.exact), row.model.sectors());
            row.mape_running = mape(pairs);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

SimPoint simulate_point(const ExperimentSpec& p, bool wave_series) {
    SimOptions opts{p.fidelity, wave_series, p.limits};
    return {p, simulate(p.workload(), opts), sectors_approx(p.config, p.cache.sector_bytes),
            exact_totals(p.config, p.cache.sector_bytes)};
}

}  // namespace

ExperimentReport run_simulate(const ExperimentSpec& spec, unsigned jobs, bool wave_series) {
    require_spec(spec);
    const auto t0 = std::chrono::steady_clock::now();
    const auto points = expand(spec);
    ExperimentReport report{spec, std::vector<SimPoint>(points.size()), 0.0};
    run_indexed(points.size(), jobs, [&](std::size_t i) { report.points[i] = simulate_point(points[i], wave_series); });
    report.wall_seconds = seconds_since(t0);
    return report;
}

void require_comparable(const ExperimentSpec& a, const ExperimentSpec& b) {
    if (a.sweep.scan || b.sweep.scan) throw std::invalid_argument("compare sweeps cannot include the scan axis");
    json ja = to_json(a), jb = to_json(b);
    for (json* j : {&ja, &jb}) {
        j->erase("scan");
        j->erase("schedule");
    }
    if (ja != jb) throw std::invalid_argument("specs differ in more than scan/sched");
}

bool CompareReport::meets_threshold() const {
    return std::all_of(points.begin(), points.end(), [&](const ComparePoint& p) {
        return !p.reduction.non_compulsory_reduction || *p.reduction.non_compulsory_reduction >= threshold;
    });
}

CompareReport run_compare(const ExperimentSpec& a, const ExperimentSpec& b, double threshold, unsigned jobs) {
    require_comparable(a, b);
    require_spec(a);
    require_spec(b);
    const auto t0 = std::chrono::steady_clock::now();
    const auto pa = expand(a);
    const auto pb = expand(b);
    CompareReport report{a, b, std::vector<ComparePoint>(pa.size()), threshold, 0.0};
    run_indexed(pa.size() * 2, jobs, [&](std::size_t i) {
        auto& slot = i % 2 == 0 ? report.points[i / 2].a : report.points[i / 2].b;
        slot = simulate_point(i % 2 == 0 ? pa[i / 2] : pb[i / 2], false);
    });
    for (auto& p : report.points) p.reduction = classify(p.a.stats, p.b.stats);
    report.wall_seconds = seconds_since(t0);
    return report;
}

// --- oracle ----------------------------------------------------------------

std::vector<std::uint64_t> random_trace(std::mt19937_64& rng, std::uint64_t max_events, std::uint64_t max_sectors) {
    auto uniform = [&](std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
    };
    const std::uint64_t length = uniform(0, max_events);
    const std::uint64_t distinct = uniform(1, std::max<std::uint64_t>(1, max_sectors));
    // Sparse, non-contiguous ids so the simulator's renumbering is exercised.
    const std::uint64_t stride = uniform(1, 1000);
    std::vector<std::uint64_t> trace;
    trace.reserve(length);
    while (trace.size() < length) {
        const std::uint64_t lo = uniform(0, distinct - 1);
        const std::uint64_t hi = uniform(lo, distinct - 1);
        const std::uint64_t passes = uniform(1, 4);
        switch (uniform(0, 2)) {
        case 0:  // uniform random
            for (std::uint64_t n = uniform(1, 4 * distinct); n-- > 0;) trace.push_back(uniform(0, distinct - 1) * stride);
            break;
        case 1:  // cyclic passes over [lo, hi]
            for (std::uint64_t p = 0; p < passes; ++p)
                for (std::uint64_t s = lo; s <= hi; ++s) trace.push_back(s * stride);
            break;
        default:  // sawtooth passes over [lo, hi]
            for (std::uint64_t p = 0; p < passes; ++p)
                for (std::uint64_t k = 0; k <= hi - lo; ++k) trace.push_back((p % 2 == 0 ? lo + k : hi - k) * stride);
            break;
        }
    }
    trace.resize(length);
    return trace;
}

std::uint64_t lru_misses(std::span<const std::uint64_t> trace, std::uint64_t capacity) {
    std::vector<SectorAccess> events(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) events[i].sector = trace[i];
    CacheModel cache;
    cache.capacity_bytes = capacity * cache.sector_bytes;
    SimOptions opts;
    opts.limits.max_events = std::max<std::uint64_t>(opts.limits.max_events, trace.size());
    return simulate(events, cache, opts).total.misses;
}

std::optional<OracleFailure> check_oracle(std::span<const std::uint64_t> trace, std::uint64_t max_capacity) {
    const auto fast = stack_distances(trace);
    const auto naive = stack_distances_naive(trace);
    if (fast != naive) {
        return OracleFailure{"naive vs fast stack distances", 0, 0, naive.total(), fast.total(),
                             {trace.begin(), trace.end()}};
    }
    for (std::uint64_t c = 0; c <= max_capacity; ++c) {
        const std::uint64_t predicted = misses_at_capacity(fast, c);
        const std::uint64_t simulated = lru_misses(trace, c);
        if (predicted != simulated)
            return OracleFailure{"lru simulation vs histogram tail", 0, c, predicted, simulated,
                                 {trace.begin(), trace.end()}};
    }
    return std::nullopt;
}

OracleReport run_oracle(const OracleOptions& opts) {
    OracleReport report{opts, 0, 0, std::nullopt};

    // Fixed cases with hand-computed miss tables.
    const std::vector<std::uint64_t> empty;
    std::vector<std::uint64_t> sawtooth, cyclic;
    for (std::uint64_t s = 0; s < 8; ++s) sawtooth.push_back(s), cyclic.push_back(s);
    for (std::uint64_t s = 8; s-- > 0;) sawtooth.push_back(s);
    for (std::uint64_t s = 0; s < 8; ++s) cyclic.push_back(s);
    struct Fixed {
        const char* name;
        const std::vector<std::uint64_t>* trace;
        std::vector<std::uint64_t> misses;  // by capacity 0..8
    };
    const Fixed fixed[] = {
        {"empty trace", &empty, {0, 0, 0, 0, 0, 0, 0, 0, 0}},
        {"sawtooth two-pass N=8", &sawtooth, {16, 15, 14, 13, 12, 11, 10, 9, 8}},
        {"cyclic two-pass N=8", &cyclic, {16, 16, 16, 16, 16, 16, 16, 16, 8}},
    };
    for (const auto& f : fixed) {
        for (std::uint64_t c = 0; c < f.misses.size(); ++c) {
            const auto simulated = lru_misses(*f.trace, c);
            const auto predicted = misses_at_capacity(stack_distances(*f.trace), c);
            ++report.capacities_checked;
            if (simulated != f.misses[c] || predicted != f.misses[c]) {
                report.failure = OracleFailure{f.name, 0, c, f.misses[c], simulated != f.misses[c] ? simulated : predicted,
                                               *f.trace};
                return report;
            }
        }
    }

    std::mt19937_64 rng(opts.seed);
    for (std::uint64_t i = 0; i < opts.traces; ++i) {
        const auto trace = random_trace(rng, opts.max_events, opts.max_sectors);
        if (auto failure = check_oracle(trace, opts.max_sectors)) {
            failure->trace_index = i;
            report.failure = std::move(failure);
            return report;
        }
        ++report.traces_checked;
        report.capacities_checked += opts.max_sectors + 1;
    }
    return report;
}

// --- report emission ---------------------------------------------------------

namespace {

json counters_json(const AccessCounters& c) {
    return {{"accesses", c.accesses},     {"hits", c.hits},
            {"misses", c.misses},         {"compulsory_misses", c.compulsory},
            {"non_compulsory_misses", c.non_compulsory}, {"hit_rate", c.hit_rate()}};
}

json metadata(const ExperimentSpec& spec, double wall) {
    return {{"tool_version", kToolVersion}, {"spec_hash", spec_hash(spec)}, {"wall_seconds", wall}};
}

std::string csv_preamble(const ExperimentSpec& spec) {
    return std::string("# l2wave ") + kToolVersion + " spec_hash=" + spec_hash(spec) + " spec=" + to_json(spec).dump() +
           "\n";
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

json reduction_json(const ReductionReport& r) {
    json j = {{"non_compulsory_a", r.non_compulsory_a}, {"non_compulsory_b", r.non_compulsory_b},
              {"non_compulsory_delta", r.non_compulsory_delta}, {"misses_a", r.misses_a},
              {"misses_b", r.misses_b}, {"misses_delta", r.misses_delta}, {"summary", r.summary()}};
    j["non_compulsory_reduction"] = r.non_compulsory_reduction ? json(*r.non_compulsory_reduction) : json(nullptr);
    j["miss_reduction"] = r.miss_reduction ? json(*r.miss_reduction) : json(nullptr);
    return j;
}

json point_json(const SimPoint& p, bool with_waves) {
    return {{"spec", to_json(p.point)},
            {"stats", to_json(p.stats, with_waves)},
            {"model", to_json(p.model)},
            {"exact_totals", to_json(p.exact)}};
}

}  // namespace

json to_json(const CacheStats& stats, bool with_waves) {
    json j;
    j["total"] = counters_json(stats.total);
    for (int t = 0; t < kNumTensors; ++t)
        j["per_tensor"][std::string(to_string(static_cast<Tensor>(t)))] = counters_json(stats.per_tensor[t]);
    j["kv"] = counters_json(stats.kv());
    if (with_waves) {
        json waves = json::array();
        for (const auto& w : stats.waves)
            waves.push_back({w.accesses, w.hits, w.kv_accesses, w.kv_hits});
        j["waves"] = {{"columns", {"accesses", "hits", "kv_accesses", "kv_hits"}}, {"rows", waves}};
    }
    return j;
}

json to_json(const ModelPrediction& m) { return {{"M", m.sectors()}, {"qo", m.qo}, {"kv", m.kv}}; }

json to_json(const TensorTotals& t) {
    return {{"Q", t[Tensor::Q]}, {"K", t[Tensor::K]}, {"V", t[Tensor::V]}, {"O", t[Tensor::O]}, {"total", t.total()}};
}

json model_json(const ExperimentSpec& spec, const std::vector<ModelRow>& rows) {
    json j = {{"metadata", metadata(spec, 0.0)}, {"spec", to_json(spec)}};
    json arr = json::array();
    for (const auto& r : rows) {
        json row = {{"S", r.point.config.seq_len}, {"T", r.point.config.tile}, {"model_M", r.model.sectors()}};
        row["exact_M"] = r.exact ? json(*r.exact) : json(nullptr);
        row["mape_running"] = r.mape_running ? json(*r.mape_running) : json(nullptr);
        arr.push_back(row);
    }
    j["rows"] = arr;
    return j;
}

std::string model_csv(const ExperimentSpec& spec, const std::vector<ModelRow>& rows) {
    std::string out = csv_preamble(spec) + "S,T,model_M,exact_M,mape_running\n";
    for (const auto& r : rows) {
        out += std::to_string(r.point.config.seq_len) + "," + std::to_string(r.point.config.tile) + "," +
               fixed(r.model.sectors(), 2) + "," + (r.exact ? std::to_string(*r.exact) : "") + "," +
               (r.mape_running ? fixed(*r.mape_running, 6) : "") + "\n";
    }
    return out;
}

json report_json(const ExperimentReport& report, bool with_waves) {
    json j = {{"metadata", metadata(report.spec, report.wall_seconds)}, {"spec", to_json(report.spec)}};
    json arr = json::array();
    for (const auto& p : report.points) arr.push_back(point_json(p, with_waves));
    j["points"] = arr;
    return j;
}

namespace {

const char* kSimColumns =
    "S,T,D,E,B,H,causal,n_sm,l2_bytes,schedule,scan,fidelity,accesses,hits,misses,compulsory,non_compulsory,"
    "hit_rate,kv_hit_rate,model_M,exact_M";

std::string sim_row(const SimPoint& p) {
    const auto& c = p.point.config;
    const auto& s = p.stats.total;
    std::ostringstream os;
    os << c.seq_len << ',' << c.tile << ',' << c.head_dim << ',' << c.elem_bytes << ',' << c.batch << ','
       << c.heads << ',' << (c.causal ? 1 : 0) << ',' << p.point.cache.n_sm << ',' << p.point.cache.capacity_bytes
       << ',' << to_string(p.point.sched.variant) << ',' << to_string(p.point.scan) << ','
       << to_string(p.point.fidelity) << ',' << s.accesses << ',' << s.hits << ',' << s.misses << ','
       << s.compulsory << ',' << s.non_compulsory << ',' << fixed(s.hit_rate(), 6) << ','
       << fixed(p.stats.kv_hit_rate(), 6) << ',' << fixed(p.model.sectors(), 2) << ',' << p.exact.total();
    return os.str();
}

}  // namespace

std::string report_csv(const ExperimentReport& report) {
    std::string out = csv_preamble(report.spec) + kSimColumns + "\n";
    for (const auto& p : report.points) out += sim_row(p) + "\n";
    return out;
}

json compare_json(const CompareReport& report) {
    json j = {{"metadata", metadata(report.spec_a, report.wall_seconds)},
              {"spec_a", to_json(report.spec_a)},
              {"spec_b", to_json(report.spec_b)},
              {"threshold", report.threshold},
              {"meets_threshold", report.meets_threshold()}};
    j["metadata"]["spec_hash_b"] = spec_hash(report.spec_b);
    json arr = json::array();
    for (const auto& p : report.points)
        arr.push_back({{"a", point_json(p.a, false)}, {"b", point_json(p.b, false)},
                       {"reduction", reduction_json(p.reduction)}});
    j["points"] = arr;
    return j;
}

std::string compare_csv(const CompareReport& report) {
    std::string out = csv_preamble(report.spec_a);
    out += std::string("# spec_b=") + to_json(report.spec_b).dump() + "\n";
    out += "S,B,n_sm,schedule_a,scan_a,schedule_b,scan_b,non_compulsory_a,non_compulsory_b,"
           "non_compulsory_reduction,misses_a,misses_b,miss_reduction\n";
    for (const auto& p : report.points) {
        const auto& r = p.reduction;
        std::ostringstream os;
        os << p.a.point.config.seq_len << ',' << p.a.point.config.batch << ',' << p.a.point.cache.n_sm << ','
           << to_string(p.a.point.sched.variant) << ',' << to_string(p.a.point.scan) << ','
           << to_string(p.b.point.sched.variant) << ',' << to_string(p.b.point.scan) << ',' << r.non_compulsory_a
           << ',' << r.non_compulsory_b << ','
           << (r.non_compulsory_reduction ? fixed(*r.non_compulsory_reduction, 6) : "") << ',' << r.misses_a << ','
           << r.misses_b << ',' << (r.miss_reduction ? fixed(*r.miss_reduction, 6) : "");
        out += os.str() + "\n";
    }
    return out;
}

json oracle_json(const OracleReport& report) {
    json j = {{"tool_version", kToolVersion},
              {"seed", report.options.seed},
              {"traces", report.options.traces},
              {"max_events", report.options.max_events},
              {"max_sectors", report.options.max_sectors},
              {"traces_checked", report.traces_checked},
              {"capacities_checked", report.capacities_checked},
              {"passed", report.passed()}};
    if (report.failure) {
        const auto& f = *report.failure;
        j["failure"] = {{"check", f.check},       {"trace_index", f.trace_index}, {"capacity", f.capacity},
                        {"expected", f.expected}, {"actual", f.actual},           {"trace_length", f.trace.size()}};
    }
    return j;
}

}  // namespace l2wave
