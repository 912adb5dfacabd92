#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

#include "rsketch/analytics.hpp"
#include "rsketch/count_min.hpp"
#include "rsketch/datasets.hpp"
#include "rsketch/reliable_sketch.hpp"
#include "rsketch/space_saving.hpp"

namespace rsketch::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kAlgos = {"reliable", "reliable_raw", "cm_fast", "cm_acc", "cu_fast", "cu_acc", "ss"};

/// Raised for bad flag combinations; maps to exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TraceSource {
    std::string path;
    std::string format;  // "", "text" or "binary"
    std::uint64_t zipf_items = 0;
    std::uint64_t zipf_keys = 0;
    double zipf_skew = 1.0;
    std::optional<std::uint64_t> zipf_seed;

    void add_options(CLI::App& app) {
        app.add_option("--trace", path, "Trace file to read");
        app.add_option("--format", format, "Trace format (text|binary); default from extension")
            ->check(CLI::IsMember({"text", "binary"}));
        app.add_option("--zipf-items", zipf_items, "Generate a Zipf trace with this many items");
        app.add_option("--zipf-keys", zipf_keys, "Distinct keys of the generated trace");
        app.add_option("--zipf-skew", zipf_skew, "Skew of the generated trace")->check(CLI::NonNegativeNumber);
        app.add_option("--zipf-seed", zipf_seed, "Seed of the generated trace (default: --seed)");
    }

    Trace load(std::uint64_t default_seed) const {
        const bool from_file = !path.empty();
        const bool from_zipf = zipf_items > 0 || zipf_keys > 0;
        if (from_file == from_zipf) throw UsageError("give exactly one trace source: --trace or --zipf-items/--zipf-keys");
        if (from_file) {
            const TraceFormat fmt = format.empty() ? format_for_path(path)
                                                   : (format == "binary" ? TraceFormat::binary : TraceFormat::text);
            return load_trace(path, fmt);
        }
        if (zipf_items == 0 || zipf_keys == 0) throw UsageError("--zipf-items and --zipf-keys must both be positive");
        return gen_zipf(zipf_items, zipf_keys, zipf_skew, zipf_seed.value_or(default_seed));
    }
};

struct SketchOptions {
    std::string algo = "reliable";
    std::uint64_t memory = 0;
    std::optional<Count> lambda;
    double r_w = 2.0;
    double r_lambda = 2.5;
    unsigned depth = 7;
    std::uint64_t seed = 0;
    std::uint32_t stash = 64;
    double filter_fraction = 0.2;

    void add_options(CLI::App& app, bool memory_required) {
        app.add_option("--algo", algo, "Algorithm")->check(CLI::IsMember(kAlgos));
        auto* mem = app.add_option("--memory", memory, "Memory budget in bytes");
        if (memory_required) mem->required();
        app.add_option("--lambda", lambda, "Error threshold (derived from memory when omitted)");
        app.add_option("--rw", r_w, "Layer width ratio");
        app.add_option("--rlambda", r_lambda, "Layer threshold ratio");
        app.add_option("--depth", depth, "Number of layers");
        app.add_option("--seed", seed, "Master seed");
        app.add_option("--stash", stash, "Emergency stash capacity (0 disables)");
        app.add_option("--filter-fraction", filter_fraction, "Memory share of the mice filter for 'reliable'");
    }
};

struct CellParams {
    std::string algo;
    std::uint64_t memory = 0;
    std::optional<Count> lambda;
    double r_w = 2.0;
    double r_lambda = 2.5;
    unsigned depth = 7;
    std::uint64_t seed = 0;
    std::uint32_t stash = 64;
    double filter_fraction = 0.2;
};

CellParams cell_from(const SketchOptions& o) {
    return {o.algo, o.memory, o.lambda, o.r_w, o.r_lambda, o.depth, o.seed, o.stash, o.filter_fraction};
}

bool is_reliable(const std::string& algo) {
    return algo == "reliable" || algo == "reliable_raw";
}

SketchConfig sketch_config(const CellParams& p, std::uint64_t n_hint, bool with_filter) {
    if (p.memory == 0) throw UsageError("--memory must be positive");
    SketchConfig c;
    c.memory_bytes = p.memory;
    c.lambda_cap = p.lambda;
    c.r_w = p.r_w;
    c.r_lambda = p.r_lambda;
    c.depth = p.depth;
    c.n_hint = n_hint;
    c.seed = p.seed;
    c.stash_capacity = p.stash;
    c.mice_filter_fraction = with_filter ? p.filter_fraction : 0.0;
    return c;
}

Count total_value(const Trace& trace) {
    return std::accumulate(trace.begin(), trace.end(), Count{0},
                           [](Count acc, const TraceRecord& r) { return acc + r.value; });
}

struct BenchResult {
    ReportRow row;
    bool overflow = false;
};

template <typename InsertFn>
double timed_mops(const Trace& trace, InsertFn&& insert) {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& rec : trace) insert(rec);
    const std::chrono::duration<double> secs = std::chrono::steady_clock::now() - start;
    return secs.count() > 0 ? static_cast<double>(trace.size()) / secs.count() / 1e6 : 0.0;
}

BenchResult run_cell(const CellParams& p, const Trace& trace, const Truth& truth) {
    const Count n = total_value(trace);
    if (n == 0) throw UsageError("trace is empty");
    BenchResult out;
    out.row.algo = p.algo;
    out.row.memory_bytes = p.memory;
    out.row.seed = p.seed;

    if (is_reliable(p.algo)) {
        ReliableSketch sketch(sketch_config(p, n, p.algo == "reliable"));
        const double mops = timed_mops(trace, [&](const TraceRecord& r) { sketch.insert(r.key, r.value); });
        out.row.lambda = sketch.lambda_cap();
        out.row.report = evaluate(truth, [&](Key k) { return sketch.query(k).upper; }, out.row.lambda);
        out.row.report.insert_mops = mops;
        const auto& st = sketch.stats();
        out.row.report.avg_layers =
            st.inserts ? static_cast<double>(st.bucket_layer_visits) / static_cast<double>(st.inserts) : 0.0;
        out.overflow = sketch.overflowed();
        return out;
    }

    // Baselines are judged against the threshold a raw sketch of equal memory would get.
    out.row.lambda = p.lambda ? *p.lambda : resolve_layout(sketch_config(p, n, false)).lambda_cap;

    if (p.algo == "ss") {
        const std::uint64_t entry_bytes = SketchConfig{}.stash_entry_bytes();
        if (p.memory < entry_bytes) throw UsageError("--memory too small for one SpaceSaving entry");
        SpaceSaving ss(p.memory / entry_bytes);
        const double mops = timed_mops(trace, [&](const TraceRecord& r) { ss.insert(r.key, r.value); });
        out.row.report = evaluate(truth, [&](Key k) { return ss.query(k).estimate; }, out.row.lambda);
        out.row.report.insert_mops = mops;
        out.row.report.avg_layers = 1.0;
        return out;
    }

    const bool accurate = p.algo.ends_with("_acc");
    const unsigned rows = accurate ? CounterMatrix::kAccurateRows : CounterMatrix::kFastRows;
    const auto update = p.algo.starts_with("cu") ? CounterMatrix::Update::conservative : CounterMatrix::Update::count_min;
    auto m = CounterMatrix::with_memory(rows, p.memory, p.seed, update);
    const double mops = timed_mops(trace, [&](const TraceRecord& r) { m.insert(r.key, r.value); });
    out.row.report = evaluate(truth, [&](Key k) { return m.query(k); }, out.row.lambda);
    out.row.report.insert_mops = mops;
    out.row.report.avg_layers = rows;
    return out;
}

void append_report(const std::string& path, const std::string& header, const std::vector<std::string>& rows) {
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream f(path, std::ios::app);
    if (!f) throw std::runtime_error("cannot open report " + path);
    if (fresh) f << header << '\n';
    for (const auto& r : rows) f << r << '\n';
}

unsigned worker_count(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RSKETCH_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

template <typename Job>
void parallel_for(std::size_t jobs, Job&& job) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs; i = next++) {
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    const unsigned n = worker_count(jobs);
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path);
}

void print_summary(const ReliableSketch& s, std::ostream& out) {
    const auto& layout = s.layout();
    out << "lambda=" << layout.lambda_cap << " effective_depth=" << layout.effective_depth
        << " total_buckets=" << layout.total_buckets << " filter_width=" << layout.filter_width
        << " stash=" << (s.stash() ? s.stash()->size() : 0) << '/' << s.config().stash_capacity
        << " overflow=" << (s.overflowed() ? 1 : 0) << '\n';
    out << "layers:";
    for (std::size_t i = 0; i < s.bucket_layer_count(); ++i) {
        out << ' ' << s.layer_buckets(i).size() << '@' << s.bucket_layer_threshold(i);
    }
    out << '\n';
}

// ---- subcommands ------------------------------------------------------------

struct GenCommand {
    std::uint64_t items = 0;
    std::uint64_t keys = 0;
    double skew = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t max_value = 1;
    std::string out;
    std::string format;

    void attach(CLI::App& app) {
        auto* sub = app.add_subcommand("gen", "Generate a Zipf trace file");
        sub->add_option("--items", items, "Number of records")->required()->check(CLI::PositiveNumber);
        sub->add_option("--keys", keys, "Number of distinct keys")->required()->check(CLI::PositiveNumber);
        sub->add_option("--skew", skew, "Zipf skew")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", seed, "Seed");
        sub->add_option("--max-value", max_value, "Draw values uniformly from [1, max-value]")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "Output path")->required();
        sub->add_option("--format", format, "text|binary; default from extension")
            ->check(CLI::IsMember({"text", "binary"}));
    }

    int run(std::ostream& os) const {
        ZipfGenerator gen(keys, skew, seed);
        std::mt19937_64 values(seed ^ 0x7a1e5eedULL);
        const TraceFormat fmt = format.empty() ? format_for_path(out)
                                               : (format == "binary" ? TraceFormat::binary : TraceFormat::text);
        TraceWriter writer(out, fmt);
        for (std::uint64_t i = 0; i < items; ++i) {
            const Key k = gen.next();
            const Count v = max_value > 1 ? 1 + values() % max_value : 1;
            writer.write({k, v});
        }
        writer.close();
        os << "wrote " << items << " records to " << out << '\n';
        return kOk;
    }
};

struct BenchCommand {
    SketchOptions sketch;
    TraceSource source;
    std::string report;

    void attach(CLI::App& app) {
        auto* sub = app.add_subcommand("bench", "Run one algorithm on a trace and report accuracy");
        sketch.add_options(*sub, true);
        source.add_options(*sub);
        sub->add_option("--report", report, "Append the CSV row to this file");
    }

    int run(std::ostream& os) const {
        const Trace trace = source.load(sketch.seed);
        const Truth truth = exact_oracle(trace);
        const BenchResult r = run_cell(cell_from(sketch), trace, truth);
        const std::string line = format_report_row(r.row);
        os << kReportHeader << '\n' << line << '\n';
        if (!report.empty()) append_report(report, kReportHeader, {line});
        return r.overflow ? kOverflow : kOk;
    }
};

struct SweepCommand {
    SketchOptions base;
    TraceSource source;
    std::vector<double> r_ws;
    std::vector<double> r_lambdas;
    std::vector<Count> lambdas;
    std::vector<std::uint64_t> memories;
    std::vector<std::uint64_t> search;
    std::uint64_t search_step = 1024;
    std::string report;

    static constexpr const char* kHeaderPrefix = "r_w,r_lambda,";

    void attach(CLI::App& app) {
        auto* sub = app.add_subcommand("sweep", "Run a grid of benchmarks");
        base.add_options(*sub, false);
        source.add_options(*sub);
        sub->add_option("--rw-list", r_ws, "R_w values")->delimiter(',');
        sub->add_option("--rlambda-list", r_lambdas, "R_lambda values")->delimiter(',');
        sub->add_option("--lambda-list", lambdas, "Lambda values (derived when omitted)")->delimiter(',');
        sub->add_option("--memory-list", memories, "Memory budgets in bytes")->delimiter(',');
        sub->add_option("--search-memory", search, "LO,HI: report the smallest zero-outlier memory per cell")
            ->delimiter(',')
            ->expected(2);
        sub->add_option("--search-step", search_step, "Memory granularity of the search")->check(CLI::PositiveNumber);
        sub->add_option("--report", report, "Append the CSV table to this file");
    }

    int run(std::ostream& os) const {
        const bool searching = !search.empty();
        std::vector<std::uint64_t> mems = memories;
        if (mems.empty() && !searching && base.memory > 0) mems.push_back(base.memory);
        if (searching && !mems.empty()) throw UsageError("--search-memory cannot be combined with a memory list");
        if (searching && (search[0] == 0 || search[0] > search[1])) throw UsageError("--search-memory needs 0 < LO <= HI");
        if (!searching && mems.empty()) throw UsageError("empty grid: give --memory-list or --search-memory");

        const std::vector<double> rws = r_ws.empty() ? std::vector<double>{base.r_w} : r_ws;
        const std::vector<double> rls = r_lambdas.empty() ? std::vector<double>{base.r_lambda} : r_lambdas;
        std::vector<std::optional<Count>> lams;
        if (lambdas.empty()) {
            lams.push_back(base.lambda);
        } else {
            lams.assign(lambdas.begin(), lambdas.end());
        }
        if (searching) mems = {0};

        std::vector<CellParams> cells;
        for (double rw : rws) {
            for (double rl : rls) {
                for (const auto& lam : lams) {
                    for (std::uint64_t mem : mems) {
                        CellParams c = cell_from(base);
                        c.r_w = rw;
                        c.r_lambda = rl;
                        c.lambda = lam;
                        c.memory = mem;
                        cells.push_back(c);
                    }
                }
            }
        }

        const Trace trace = source.load(base.seed);
        const Truth truth = exact_oracle(trace);
        std::vector<BenchResult> results(cells.size());
        parallel_for(cells.size(), [&](std::size_t i) {
            results[i] = searching ? search_cell(cells[i], trace, truth) : run_cell(cells[i], trace, truth);
        });

        const std::string header = std::string(kHeaderPrefix) + kReportHeader;
        std::vector<std::string> lines;
        bool overflow = false;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            char prefix[64];
            std::snprintf(prefix, sizeof prefix, "%g,%g,", cells[i].r_w, cells[i].r_lambda);
            lines.push_back(prefix + format_report_row(results[i].row));
            overflow = overflow || results[i].overflow;
        }
        os << header << '\n';
        for (const auto& l : lines) os << l << '\n';
        if (!report.empty()) append_report(report, header, lines);
        return overflow && !searching ? kOverflow : kOk;
    }

    // Binary search over memory (in multiples of search_step) for the smallest
    // budget with zero outliers. Reports the HI cell if even that fails.
    BenchResult search_cell(CellParams cell, const Trace& trace, const Truth& truth) const {
        const std::uint64_t step = search_step;
        std::uint64_t lo = std::max<std::uint64_t>(1, search[0] / step);
        std::uint64_t hi = std::max(lo, search[1] / step);
        auto attempt = [&](std::uint64_t units) -> std::optional<BenchResult> {
            cell.memory = units * step;
            try {
                return run_cell(cell, trace, truth);
            } catch (const ConfigError&) {
                return std::nullopt;  // too small to build at all
            }
        };
        cell.memory = hi * step;
        std::optional<BenchResult> best = attempt(hi);
        if (!best) throw UsageError("search upper bound too small to build the sketch");
        if (best->row.report.outliers > 0) return *best;
        while (lo < hi) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            auto r = attempt(mid);
            if (r && r->row.report.outliers == 0) {
                hi = mid;
                best = std::move(r);
            } else {
                lo = mid + 1;
            }
        }
        return *best;
    }
};

struct SnapshotCommand {
    SketchOptions sketch;
    TraceSource source;
    std::string out;

    void attach(CLI::App& app) {
        auto* sub = app.add_subcommand("snapshot", "Build a sketch from a trace and save it");
        sketch.add_options(*sub, true);
        source.add_options(*sub);
        sub->add_option("--out", out, "Snapshot path")->required();
    }

    int run(std::ostream& os) const {
        if (!is_reliable(sketch.algo)) throw UsageError("snapshot supports reliable and reliable_raw");
        const Trace trace = source.load(sketch.seed);
        ReliableSketch s(sketch_config(cell_from(sketch), std::max<Count>(1, total_value(trace)),
                                       sketch.algo == "reliable"));
        for (const auto& r : trace) s.insert(r.key, r.value);
        write_file(out, s.snapshot());
        print_summary(s, os);
        return s.overflowed() ? kOverflow : kOk;
    }
};

struct RestoreCommand {
    std::string in;
    std::string out;
    TraceSource source;

    void attach(CLI::App& app) {
        auto* sub = app.add_subcommand("restore", "Load a snapshot, optionally ingest more data and save it");
        sub->add_option("--in", in, "Snapshot to load")->required();
        sub->add_option("--out", out, "Write the (updated) snapshot here");
        source.add_options(*sub);
    }

    int run(std::ostream& os) const {
        ReliableSketch s = ReliableSketch::restore(read_file(in));
        if (!source.path.empty() || source.zipf_items > 0 || source.zipf_keys > 0) {
            for (const auto& r : source.load(s.config().seed)) s.insert(r.key, r.value);
        }
        if (!out.empty()) write_file(out, s.snapshot());
        print_summary(s, os);
        return s.overflowed() ? kOverflow : kOk;
    }
};

struct QueryCommand {
    std::string snapshot;
    std::vector<Key> keys;

    void attach(CLI::App& app) {
        auto* sub = app.add_subcommand("query", "Print the interval of keys in a snapshot");
        sub->add_option("--snapshot", snapshot, "Snapshot path")->required();
        sub->add_option("--key", keys, "Key(s) to query")->required()->delimiter(',');
    }

    int run(std::ostream& os) const {
        const ReliableSketch s = ReliableSketch::restore(read_file(snapshot));
        os << "key,upper,lower,mpe,stash_consulted,overflow_tainted\n";
        for (Key k : keys) {
            const auto iv = s.query(k);
            os << k << ',' << iv.upper << ',' << iv.lower << ',' << iv.mpe << ',' << (iv.stash_consulted ? 1 : 0)
               << ',' << (iv.overflow_tainted ? 1 : 0) << '\n';
        }
        return kOk;
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"ReliableSketch benchmark and inspection tool", args.empty() ? "rsketch" : args.front()};
    app.require_subcommand(1);

    GenCommand gen;
    BenchCommand bench;
    SweepCommand sweep;
    SnapshotCommand snap;
    RestoreCommand restore;
    QueryCommand query;
    gen.attach(app);
    bench.attach(app);
    sweep.attach(app);
    snap.attach(app);
    restore.attach(app);
    query.attach(app);

    try {
        std::vector<std::string> rest(args.rbegin(), args.rend());
        if (!rest.empty()) rest.pop_back();  // program name
        app.parse(std::move(rest));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (app.got_subcommand("gen")) return gen.run(out);
        if (app.got_subcommand("bench")) return bench.run(out);
        if (app.got_subcommand("sweep")) return sweep.run(out);
        if (app.got_subcommand("snapshot")) return snap.run(out);
        if (app.got_subcommand("restore")) return restore.run(out);
        if (app.got_subcommand("query")) return query.run(out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

}  // namespace rsketch::cli
