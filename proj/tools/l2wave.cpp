// l2wave: trace-driven L2 experiments for tiled attention kernels.
//
//   l2wave model     analytic sector counts over a sweep
//   l2wave simulate  trace generation + L2 simulation
//   l2wave compare   A/B of scan orders / schedules with a reduction gate
//   l2wave oracle    stack-distance vs. LRU simulation cross-check
//   l2wave trace     binary trace dump with JSON sidecar and CSV totals
//   l2wave replay    simulate / histogram a binary trace dump

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "l2wave/experiment.hpp"
#include "l2wave/rdist.hpp"
#include "l2wave/trace_io.hpp"

namespace fs = std::filesystem;
using namespace l2wave;

namespace {

constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 2;

struct CommonFlags {
    std::string spec_file;
    std::optional<std::uint64_t> seq_len, tile, head_dim, elem_bytes, batch, heads;
    bool causal = false;
    bool no_causal = false;
    std::optional<std::uint64_t> sm, l2_bytes, sector_bytes, ways, grid;
    std::optional<std::string> schedule, scan, fidelity;
    std::optional<std::uint64_t> seed, max_events;
    std::string sweep_seq_len, sweep_sm, sweep_batch, sweep_scan;

    void add_to(CLI::App* app, bool with_sweeps = true) {
        app->add_option("--spec", spec_file, "JSON experiment file (flags override it)");
        app->add_option("--seq-len", seq_len, "sequence length S");
        app->add_option("--tile", tile, "square tile size T");
        app->add_option("--head-dim", head_dim, "head dimension D");
        app->add_option("--elem-bytes", elem_bytes, "bytes per element E (1, 2 or 4)");
        app->add_option("--batch", batch, "batch size B");
        app->add_option("--heads", heads, "number of heads H");
        app->add_flag("--causal", causal, "causal masking");
        app->add_flag("--no-causal", no_causal, "disable causal masking");
        app->add_option("--sm", sm, "number of SMs");
        app->add_option("--l2-bytes", l2_bytes, "L2 capacity in bytes");
        app->add_option("--sector-bytes", sector_bytes, "L2 sector size in bytes");
        app->add_option("--ways", ways, "set associativity (0 = fully associative)");
        app->add_option("--grid", grid, "persistent grid size");
        app->add_option("--schedule", schedule, "persistent|nonpersistent|contiguous|tilestep2")
            ->check(CLI::IsMember({"persistent", "nonpersistent", "contiguous", "tilestep2"}));
        app->add_option("--scan", scan, "cyclic|sawtooth")->check(CLI::IsMember({"cyclic", "sawtooth"}));
        app->add_option("--fidelity", fidelity, "sector|tileblock")->check(CLI::IsMember({"sector", "tileblock"}));
        app->add_option("--seed", seed, "random seed");
        app->add_option("--max-events", max_events, "hard cap on sector events per trace");
        if (with_sweeps) {
            app->add_option("--sweep-seq-len", sweep_seq_len, "S values: a,b,c or start:stop:step");
            app->add_option("--sweep-sm", sweep_sm, "SM counts: a,b,c or start:stop:step");
            app->add_option("--sweep-batch", sweep_batch, "batch sizes: a,b,c or start:stop:step");
            app->add_option("--sweep-scan", sweep_scan, "scan orders: cyclic,sawtooth");
        }
    }

    ExperimentSpec resolve(const CLI::App* app) const {
        ExperimentSpec s = spec_file.empty() ? ExperimentSpec{} : load_spec(spec_file);
        if (seq_len) s.config.seq_len = *seq_len;
        if (tile) s.config.tile = *tile;
        if (head_dim) s.config.head_dim = *head_dim;
        if (elem_bytes) s.config.elem_bytes = *elem_bytes;
        if (batch) s.config.batch = *batch;
        if (heads) s.config.heads = *heads;
        if (causal) s.config.causal = true;
        if (no_causal) s.config.causal = false;
        if (sm) s.cache.n_sm = *sm;
        if (l2_bytes) s.cache.capacity_bytes = *l2_bytes;
        if (sector_bytes) s.cache.sector_bytes = *sector_bytes;
        if (ways) s.cache.ways = *ways == 0 ? std::nullopt : std::optional(*ways);
        if (grid) s.sched.grid_size = *grid;
        if (schedule) s.sched.variant = parse_schedule(*schedule);
        if (scan) s.scan = parse_scan(*scan);
        if (fidelity) s.fidelity = parse_fidelity(*fidelity);
        if (seed) s.seed = *seed;
        if (max_events) s.limits.max_events = *max_events;
        // An explicitly empty list is kept so validation reports it.
        auto given = [app](const char* name) {
            const auto* opt = app->get_option_no_throw(name);
            return opt && opt->count() > 0;
        };
        if (given("--sweep-seq-len")) s.sweep.seq_len = parse_u64_list(sweep_seq_len);
        if (given("--sweep-sm")) s.sweep.n_sm = parse_u64_list(sweep_sm);
        if (given("--sweep-batch")) s.sweep.batch = parse_u64_list(sweep_batch);
        if (given("--sweep-scan")) {
            std::vector<ScanOrder> scans;
            std::stringstream ss(sweep_scan);
            for (std::string tok; std::getline(ss, tok, ',');) scans.push_back(parse_scan(tok));
            s.sweep.scan = scans;
        }
        return s;
    }
};

struct OutputFlags {
    std::string out;
    std::string format = "csv";

    void add_to(CLI::App* app) {
        app->add_option("--out", out, "output path (default: stdout, or $L2WAVE_OUT_DIR/<command>.<format>)");
        app->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    }

    std::optional<fs::path> path(const std::string& command) const {
        const char* dir = std::getenv("L2WAVE_OUT_DIR");
        if (out.empty()) {
            if (!dir || !*dir) return std::nullopt;
            return fs::path(dir) / (command + "." + format);
        }
        fs::path p(out);
        if (p.is_relative() && dir && *dir) p = fs::path(dir) / p;
        return p;
    }

    void emit(const std::string& command, const std::string& text) const {
        const auto p = path(command);
        if (!p) {
            std::cout << text;
            if (!text.empty() && text.back() != '\n') std::cout << '\n';
            return;
        }
        if (p->has_parent_path()) fs::create_directories(p->parent_path());
        std::ofstream f(*p);
        if (!f) throw std::runtime_error("cannot write '" + p->string() + "'");
        f << text;
        if (!text.empty() && text.back() != '\n') f << '\n';
        std::cerr << "wrote " << p->string() << "\n";
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace-driven L2 cache laboratory for tiled attention kernels"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    CommonFlags model_flags, sim_flags, cmp_flags, trace_flags;
    OutputFlags model_out, sim_out, cmp_out, oracle_out;

    auto* model = app.add_subcommand("model", "evaluate the analytic sector models over a sweep");
    model_flags.add_to(model);
    model_out.add_to(model);
    bool model_exact = false;
    model->add_flag("--exact", model_exact, "also compute exact trace counts and running MAPE");

    auto* sim = app.add_subcommand("simulate", "generate traces and simulate the L2");
    sim_flags.add_to(sim);
    sim_out.add_to(sim);
    unsigned sim_jobs = 1;
    bool wave_series = false;
    sim->add_option("--jobs", sim_jobs, "sweep points simulated concurrently");
    sim->add_flag("--wave-series", wave_series, "include per-step hit-rate series (JSON only)");

    auto* cmp = app.add_subcommand("compare", "A/B scan orders or schedules");
    cmp_flags.add_to(cmp);
    cmp_out.add_to(cmp);
    std::string scan_a = "cyclic", scan_b = "sawtooth";
    std::optional<std::string> sched_a, sched_b;
    std::string spec_b_file;
    double min_reduction = 0.45;
    unsigned cmp_jobs = 1;
    cmp->add_option("--scan-a", scan_a, "scan order of side A")->check(CLI::IsMember({"cyclic", "sawtooth"}));
    cmp->add_option("--scan-b", scan_b, "scan order of side B")->check(CLI::IsMember({"cyclic", "sawtooth"}));
    cmp->add_option("--schedule-a", sched_a, "schedule of side A (default: --schedule)");
    cmp->add_option("--schedule-b", sched_b, "schedule of side B (default: --schedule)");
    cmp->add_option("--spec-b", spec_b_file, "experiment file for side B instead of overrides");
    cmp->add_option("--min-reduction", min_reduction, "required non-compulsory miss reduction (fraction)");
    cmp->add_option("--jobs", cmp_jobs, "simulations run concurrently");

    auto* oracle = app.add_subcommand("oracle", "cross-check LRU simulation against stack distances");
    oracle_out.add_to(oracle);
    OracleOptions oracle_opts;
    std::string failure_dump;
    oracle->add_option("--seed", oracle_opts.seed, "random seed");
    oracle->add_option("--traces", oracle_opts.traces, "number of random traces");
    oracle->add_option("--max-events", oracle_opts.max_events, "maximum events per trace");
    oracle->add_option("--max-sectors", oracle_opts.max_sectors, "maximum distinct sectors (and capacity range)");
    oracle->add_option("--failure-dump", failure_dump, "where to dump an offending trace");

    auto* trace = app.add_subcommand("trace", "write a binary trace dump, JSON sidecar and CSV totals");
    trace_flags.add_to(trace, false);
    std::string dump_path;
    trace->add_option("--out", dump_path, "dump path (sidecar: <out>.json, totals: <out>.totals.csv)")->required();

    auto* replay = app.add_subcommand("replay", "simulate and/or histogram a binary trace dump");
    std::string replay_path, histogram_path;
    CacheModel replay_cache;
    std::uint64_t replay_ways = 0;
    std::string replay_fidelity = "sector";
    OutputFlags replay_out;
    replay_out.format = "json";
    replay->add_option("--trace", replay_path, "dump to replay")->required();
    replay->add_option("--l2-bytes", replay_cache.capacity_bytes, "L2 capacity in bytes");
    replay->add_option("--sector-bytes", replay_cache.sector_bytes, "L2 sector size in bytes");
    replay->add_option("--ways", replay_ways, "set associativity (0 = fully associative)");
    replay->add_option("--fidelity", replay_fidelity, "sector|tileblock")->check(CLI::IsMember({"sector", "tileblock"}));
    replay->add_option("--histogram", histogram_path, "also write the stack-distance histogram (.csv or .json)");
    replay_out.add_to(replay);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*model) {
            const auto spec = model_flags.resolve(model);
            const auto rows = run_model(spec, model_exact);
            model_out.emit("model", model_out.format == "json" ? model_json(spec, rows).dump(2) : model_csv(spec, rows));
            return 0;
        }
        if (*sim) {
            const auto spec = sim_flags.resolve(sim);
            try {
                const auto report = run_simulate(spec, sim_jobs, wave_series);
                sim_out.emit("simulate",
                             sim_out.format == "json" ? report_json(report, wave_series).dump(2) : report_csv(report));
            } catch (const TraceCapExceeded& e) {
                std::cerr << "error: " << e.what() << " (pass --fidelity tileblock)\n";
                return kExitError;
            }
            return 0;
        }
        if (*cmp) {
            const auto base = cmp_flags.resolve(cmp);
            ExperimentSpec a = base;
            a.scan = parse_scan(scan_a);
            if (sched_a) a.sched.variant = parse_schedule(*sched_a);
            ExperimentSpec b;
            if (!spec_b_file.empty()) {
                b = load_spec(spec_b_file);
            } else {
                b = base;
                b.scan = parse_scan(scan_b);
                if (sched_b) b.sched.variant = parse_schedule(*sched_b);
            }
            const auto report = run_compare(a, b, min_reduction, cmp_jobs);
            cmp_out.emit("compare", cmp_out.format == "json" ? compare_json(report).dump(2) : compare_csv(report));
            for (const auto& p : report.points) std::cerr << p.reduction.summary() << "\n";
            if (!report.meets_threshold()) {
                std::cerr << "reduction below threshold " << min_reduction << "\n";
                return kExitCheckFailed;
            }
            return 0;
        }
        if (*oracle) {
            const auto report = run_oracle(oracle_opts);
            oracle_out.emit("oracle", oracle_json(report).dump(2));
            if (!report.passed()) {
                const auto& f = *report.failure;
                const std::string path =
                    failure_dump.empty() ? "oracle_failure_seed" + std::to_string(oracle_opts.seed) + ".bin" : failure_dump;
                std::vector<SectorAccess> events(f.trace.size());
                for (std::size_t i = 0; i < f.trace.size(); ++i) events[i].sector = f.trace[i];
                std::ofstream dump(path, std::ios::binary);
                write_dump(dump, events);
                std::cerr << "oracle mismatch (" << f.check << ") at trace " << f.trace_index << ", capacity "
                          << f.capacity << ": expected " << f.expected << ", got " << f.actual
                          << "; repro: l2wave oracle --seed " << oracle_opts.seed << "; trace dumped to " << path
                          << "\n";
                return kExitCheckFailed;
            }
            return 0;
        }
        if (*trace) {
            const auto spec = trace_flags.resolve(trace);
            require_valid(spec.config, spec.cache, spec.sched);
            const auto w = spec.workload();
            check_trace_cap(w, spec.limits);
            std::ofstream out(dump_path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write '" + dump_path + "'");
            DumpWriter writer(out);
            generate(w, writer);
            const auto totals = exact_totals(spec.config, spec.cache.sector_bytes);
            std::ofstream(dump_path + ".json") << sidecar_json(spec, totals).dump(2) << "\n";
            std::ofstream(dump_path + ".totals.csv") << totals_csv(totals);
            std::cerr << "wrote " << writer.records() << " records to " << dump_path << "\n";
            return 0;
        }
        if (*replay) {
            const auto events = read_dump_file(replay_path);
            if (replay_ways) replay_cache.ways = replay_ways;
            SimOptions opts;
            opts.fidelity = parse_fidelity(replay_fidelity);
            opts.limits.max_events = std::max<std::uint64_t>(opts.limits.max_events, events.size());
            const auto stats = simulate(events, replay_cache, opts);
            nlohmann::json j = {{"tool_version", kToolVersion},
                                {"trace", replay_path},
                                {"events", events.size()},
                                {"cache",
                                 {{"capacity_bytes", replay_cache.capacity_bytes},
                                  {"sector_bytes", replay_cache.sector_bytes},
                                  {"associativity", replay_ways ? nlohmann::json(replay_ways) : nlohmann::json("full")}}},
                                {"fidelity", replay_fidelity},
                                {"stats", to_json(stats)}};
            replay_out.emit("replay", j.dump(2));
            if (!histogram_path.empty()) {
                const auto hist = stack_distances(std::span<const SectorAccess>(events));
                std::ofstream h(histogram_path);
                if (fs::path(histogram_path).extension() == ".json")
                    h << histogram_json(hist).dump(2) << "\n";
                else
                    h << histogram_csv(hist);
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return 0;
}
