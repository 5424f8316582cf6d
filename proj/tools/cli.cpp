#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "tinycore/tinycore.hpp"

namespace tinycore::cli {
namespace {

std::shared_ptr<spdlog::logger> logger() {
    auto log = spdlog::get("tinycore");
    if (!log) {
        log = spdlog::stderr_logger_mt("tinycore");
        log->set_pattern("[%l] %v");
        log->set_level(spdlog::level::warn);
        if (const char* env = std::getenv("TINYCORE_LOG")) log->set_level(spdlog::level::from_str(env));
    }
    return log;
}

// Raised for flag combinations the parser cannot express.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
};

struct InputFlags {
    std::string path = "-";
    bool header = false;
    bool weighted = false;
};

PointSet load_points(const InputFlags& f, std::istream& in) {
    const CsvOptions opt{f.header, f.weighted};
    if (f.path == "-") return read_points_csv(in, opt);
    return read_points_csv(f.path, opt);
}

void emit(const CoresetFile& file, const std::string& output, const std::string& format) {
    if (output.empty()) return;
    write_coreset(output, file, format == "binary");
}

void print_summary(std::ostream& out, const CoresetFile& f) {
    fmt::print(out, "construction={} kind={} n={} m={} d={} delta={} eps={} seed={}\n", f.header.construction,
               f.header.kind, f.header.n, f.coreset.size(), f.coreset.dim(), f.coreset.delta, f.header.eps,
               f.header.seed);
}

// ---- coreset ---------------------------------------------------------------

struct CoresetArgs {
    std::string method;
    InputFlags input;
    std::string output;
    std::string format = "binary";
    int k = 0;
    int j = 0;
    double eps = 0.0;
    double delta = 0.1;
    std::optional<std::uint64_t> seed;
    SensitivityConstants constants;
};

int cmd_coreset(const CoresetArgs& a, std::istream& in, std::ostream& out) {
    const bool sampling = a.method == "kmeans" || a.method == "small-kmeans";
    if (sampling && a.k < 1) throw UsageError("--k is required for " + a.method);
    if (sampling && !a.seed) throw UsageError("--seed is required for randomized constructions");
    if (!sampling && a.j < 1) throw UsageError("--j is required for " + a.method);

    const PointSet points = load_points(a.input, in);
    Timer timer;
    CoresetFile file;
    file.header.n = static_cast<std::uint64_t>(points.size());
    file.header.eps = a.eps;
    file.header.seed = a.seed.value_or(0);
    file.header.construction = a.method;
    std::optional<std::int64_t> sample_size;
    if (a.method == "subspace") {
        file.header.kind = "subspace";
        file.coreset = linear_subspace_coreset(points, a.j, a.eps);
    } else if (a.method == "affine") {
        file.header.kind = "affine";
        file.coreset = affine_subspace_coreset_weighted(points, a.j, a.eps);
    } else {
        file.header.kind = "kmeans";
        const KmeansCoresetReport rep =
            a.method == "kmeans" ? kmeans_coreset_report(points, a.k, a.eps, a.delta, *a.seed, a.constants)
                                 : small_kmeans_coreset_report(points, a.k, a.eps, a.delta, *a.seed, a.constants);
        file.coreset = rep.coreset;
        sample_size = rep.sample_size;
    }
    logger()->info("coreset {}: {} -> {} rows in {:.1f} ms", a.method, points.size(), file.coreset.size(), timer.ms());
    emit(file, a.output, a.format);
    print_summary(out, file);
    if (sample_size) fmt::print(out, "sample_size={}\n", *sample_size);
    return kExitOk;
}

// ---- stream ----------------------------------------------------------------

struct StreamArgs {
    std::string kind = "subspace";
    std::string input = "-";
    std::string output;
    std::string format = "binary";
    std::string on_error = "abort";
    bool header = false;
    int k = 0;
    int j = 0;
    double eps = 0.0;
    double delta = 0.1;
    std::optional<std::uint64_t> seed;
    std::int64_t checkpoint = 0;
    SensitivityConstants constants;
};

CoresetFile stream_file(const MergeReduceStream& s, const StreamArgs& a) {
    CoresetFile f;
    f.header.n = static_cast<std::uint64_t>(s.stats().points_seen);
    f.header.eps = a.eps;
    f.header.seed = a.seed.value_or(0);
    f.header.kind = a.kind;
    f.header.construction = "stream-" + a.kind;
    f.coreset = s.query();
    return f;
}

int cmd_stream(const StreamArgs& a, std::istream& in, std::ostream& out) {
    StreamConfig cfg;
    if (a.kind == "kmeans") {
        if (a.k < 1) throw UsageError("--k is required for --kind kmeans");
        if (!a.seed) throw UsageError("--seed is required for randomized constructions");
        cfg.kind = StreamKind::kmeans;
        cfg.k = a.k;
    } else {
        if (a.j < 1) throw UsageError("--j is required for --kind " + a.kind);
        cfg.kind = a.kind == "affine" ? StreamKind::affine : StreamKind::linear;
        cfg.j = a.j;
    }
    cfg.eps = a.eps;
    cfg.delta = a.delta;
    cfg.seed = a.seed.value_or(0);
    cfg.constants = a.constants;
    MergeReduceStream stream(cfg);

    std::ifstream file;
    std::istream* src = &in;
    if (a.input != "-") {
        file.open(a.input);
        if (!file) throw InvalidInput("cannot open " + a.input);
        src = &file;
    }
    std::string line;
    std::int64_t line_no = 0, skipped = 0;
    std::size_t cols = 0;
    if (a.header && std::getline(*src, line)) ++line_no;
    while (std::getline(*src, line)) {
        ++line_no;
        if (blank_line(line)) continue;
        try {
            CsvRow row = parse_csv_row(line, line_no, cols, false);
            if (cols == 0) cols = static_cast<std::size_t>(row.point.size());
            stream.insert(row.point);
        } catch (const InvalidInput& e) {
            if (a.on_error == "abort") throw;
            ++skipped;
            logger()->warn("skipping {}", e.what());
            continue;
        }
        const std::int64_t seen = stream.stats().points_seen;
        if (a.checkpoint > 0 && seen % a.checkpoint == 0) {
            const CoresetFile f = stream_file(stream, a);
            if (!a.output.empty()) emit(f, fmt::format("{}.ckpt-{}", a.output, seen), a.format);
            fmt::print(out, "checkpoint n={} m={} delta={} live={}\n", seen, f.coreset.size(), f.coreset.delta,
                       stream.stats().live_points);
        }
    }
    if (stream.stats().points_seen == 0) throw InvalidInput("empty input");
    const CoresetFile f = stream_file(stream, a);
    emit(f, a.output, a.format);
    print_summary(out, f);
    const StreamStats& st = stream.stats();
    fmt::print(out, "peak_live={} reduces={} max_depth={} epochs={} skipped={}\n", st.peak_live_points, st.reduces,
               st.max_depth, stream.epoch(), skipped);
    logger()->info("stream: peak live points {} (bound reference {} per level)", st.peak_live_points,
                   stream.coreset_size());
    return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
    std::string coreset;
    InputFlags data;
    int queries = 200;
    int j = 1;
    int k = 3;
    std::optional<double> eps;
    std::optional<std::uint64_t> seed;
};

int cmd_eval(const EvalArgs& a, std::istream& in, std::ostream& out) {
    if (!a.seed) throw UsageError("--seed is required for randomized query generation");
    const CoresetFile file = read_coreset(a.coreset);
    const PointSet data = load_points(a.data, in);
    if (data.dim() != file.coreset.dim())
        throw InvalidInput(fmt::format("dimension mismatch: coreset has d={}, data has d={}", file.coreset.dim(), data.dim()));
    const double eps = a.eps.value_or(file.header.eps);
    const double tolerance = file.streamed() ? 3.0 * eps : eps;
    const Index d = data.dim();

    std::vector<QueryShape> shapes;
    Rng rng(*a.seed);
    const std::string& kind = file.header.kind;
    if (kind == "kmeans") {
        for (auto& c : center_grid(data, std::min<Index>(a.k, data.size()), a.queries, *a.seed)) shapes.emplace_back(std::move(c));
    } else if (kind == "subspace" || kind == "affine") {
        if (a.j < 1 || a.j > d - 1) throw UsageError("--j must lie in [1, d - 1]");
        const Vector mu = data.total_weight() > 0.0 ? data.mean() : Vector::Zero(d);
        const double spread = std::sqrt(std::max(1e-300, weighted_fold(data.rows().rowwise() - mu.transpose(),
                                                                       data.weight_vector()).squaredNorm() /
                                                            std::max(data.total_weight(), 1e-300) / static_cast<double>(d)));
        for (int q = 0; q < a.queries; ++q) {
            if (kind == "subspace") shapes.emplace_back(random_subspace(d, a.j, rng));
            else shapes.emplace_back(random_affine_subspace(d, a.j, rng, mu, spread));
        }
    } else {
        throw InvalidInput("unknown problem kind '" + kind + "' in coreset file");
    }

    double max_ratio = -std::numeric_limits<double>::infinity();
    double min_ratio = std::numeric_limits<double>::infinity();
    double sum_ratio = 0.0, max_dev = 0.0;
    for (std::size_t q = 0; q < shapes.size(); ++q) {
        const double truth = dist2(data, shapes[q]);
        const double approx = cost(file.coreset, shapes[q]);
        double ratio = 1.0;
        if (truth > 0.0) ratio = approx / truth;
        else if (approx > 0.0) ratio = std::numeric_limits<double>::infinity();
        max_ratio = std::max(max_ratio, ratio);
        min_ratio = std::min(min_ratio, ratio);
        sum_ratio += ratio;
        max_dev = std::max(max_dev, std::abs(ratio - 1.0));
        fmt::print(out, "query {} true={} coreset={} ratio={}\n", q, truth, approx, ratio);
    }
    const bool pass = max_dev <= tolerance;
    fmt::print(out, "max_ratio={} min_ratio={} mean_ratio={} max_deviation={} tolerance={} result={}\n", max_ratio,
               min_ratio, sum_ratio / static_cast<double>(shapes.size()), max_dev, tolerance, pass ? "pass" : "fail");
    return pass ? kExitOk : kExitData;
}

// ---- solve -----------------------------------------------------------------

struct SolveArgs {
    std::string problem = "kmeans";
    InputFlags input;
    std::string output;
    int k = 0;
    int j = 1;
    double eps = 0.5;
    std::optional<std::uint64_t> seed;
};

void write_solution(std::ostream& out, const QueryShape& shape, const std::string& problem, double cost) {
    auto row = [&](const auto& v) {
        for (Index i = 0; i < v.size(); ++i) fmt::print(out, "{}{}", i ? "," : "", v(i));
        out << '\n';
    };
    fmt::print(out, "# problem={} cost={}\n", problem, cost);
    if (const auto* c = std::get_if<CenterSet>(&shape)) {
        for (Index i = 0; i < c->size(); ++i) row(c->centers.row(i));
        return;
    }
    const auto& flats = std::get<SubspaceSet>(shape).flats;
    for (std::size_t f = 0; f < flats.size(); ++f) {
        fmt::print(out, "# flat {} offset\n", f);
        row(flats[f].offset.value_or(Vector::Zero(flats[f].dim())));
        fmt::print(out, "# flat {} directions\n", f);
        for (Index c = 0; c < flats[f].rank(); ++c) row(flats[f].basis.col(c));
    }
}

int cmd_solve(const SolveArgs& a, std::istream& in, std::ostream& out) {
    if (a.k < 1) throw UsageError("--k is required");
    if (!a.seed) throw UsageError("--seed is required for randomized solving");
    const PointSet points = load_points(a.input, in);
    Problem problem = KMeansProblem{a.k};
    if (a.problem == "affine") problem = AffineProblem{a.j, a.k};
    Timer timer;
    const QueryShape shape = approx_solution(points, problem, a.eps, default_solver(), *a.seed);
    const double c = dist2(points, shape);
    logger()->info("solve {}: cost {} in {:.1f} ms", a.problem, c, timer.ms());
    if (!a.output.empty()) {
        std::ofstream f(a.output);
        if (!f) throw InvalidInput("cannot write " + a.output);
        write_solution(f, shape, a.problem, c);
    }
    fmt::print(out, "problem={} n={} d={} cost={}\n", a.problem, points.size(), points.dim(), c);
    if (a.output.empty()) write_solution(out, shape, a.problem, c);
    return kExitOk;
}

void add_input_flags(CLI::App* app, InputFlags& f) {
    app->add_option("input", f.path, "CSV file of points ('-' for stdin)")->required();
    app->add_flag("--header", f.header, "Skip the first line");
    app->add_flag("--weighted", f.weighted, "Last column holds the point weight");
}

void add_constants(CLI::App* app, SensitivityConstants& c) {
    app->add_option("--c-s", c.c_s, "Sensitivity scale")->check(CLI::PositiveNumber);
    app->add_option("--c-vc", c.c_vc, "Sample size multiplier")->check(CLI::PositiveNumber);
    app->add_option("--c-dim", c.c_dim, "VC dimension multiplier")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"tinycore: coresets for k-means and subspace approximation", "tinycore"};
    app.require_subcommand(1);
    const std::vector<std::string> formats{"binary", "csv"};

    CoresetArgs ca;
    auto* coreset = app.add_subcommand("coreset", "Build a coreset of a CSV point set");
    coreset->add_option("method", ca.method, "kmeans | small-kmeans | subspace | affine")
        ->required()
        ->check(CLI::IsMember({"kmeans", "small-kmeans", "subspace", "affine"}));
    add_input_flags(coreset, ca.input);
    coreset->add_option("-o,--output", ca.output, "Coreset file to write");
    coreset->add_option("--format", ca.format, "Output format")->check(CLI::IsMember(formats));
    coreset->add_option("--k", ca.k, "Number of centers")->check(CLI::PositiveNumber);
    coreset->add_option("--j", ca.j, "Subspace dimension")->check(CLI::PositiveNumber);
    coreset->add_option("--epsilon", ca.eps, "Approximation parameter")->required()->check(CLI::Range(1e-9, 1.0));
    coreset->add_option("--delta", ca.delta, "Failure probability")->check(CLI::Range(1e-12, 0.999999));
    coreset->add_option("--seed", ca.seed, "Random seed");
    add_constants(coreset, ca.constants);

    StreamArgs sa;
    auto* stream = app.add_subcommand("stream", "Merge-and-reduce a point stream");
    stream->add_option("input", sa.input, "CSV file of points ('-' for stdin)");
    stream->add_option("--kind", sa.kind, "subspace | affine | kmeans")->check(CLI::IsMember({"subspace", "affine", "kmeans"}));
    stream->add_option("-o,--output", sa.output, "Coreset file to write");
    stream->add_option("--format", sa.format, "Output format")->check(CLI::IsMember(formats));
    stream->add_option("--k", sa.k, "Number of centers")->check(CLI::PositiveNumber);
    stream->add_option("--j", sa.j, "Subspace dimension")->check(CLI::PositiveNumber);
    stream->add_option("--epsilon", sa.eps, "Approximation parameter")->required()->check(CLI::Range(1e-9, 1.0));
    stream->add_option("--delta", sa.delta, "Failure probability")->check(CLI::Range(1e-12, 0.999999));
    stream->add_option("--seed", sa.seed, "Random seed");
    stream->add_option("--checkpoint", sa.checkpoint, "Emit an intermediate summary every N points")->check(CLI::PositiveNumber);
    stream->add_option("--on-error", sa.on_error, "Malformed lines: skip | abort")->check(CLI::IsMember({"skip", "abort"}));
    stream->add_flag("--header", sa.header, "Skip the first line");
    add_constants(stream, sa.constants);

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "Compare coreset cost with full-data cost on random queries");
    eval->add_option("coreset", ea.coreset, "Coreset file")->required();
    eval->add_option("data", ea.data.path, "CSV data file ('-' for stdin)")->required();
    eval->add_flag("--header", ea.data.header, "Skip the first data line");
    eval->add_flag("--weighted", ea.data.weighted, "Last data column holds the weight");
    eval->add_option("--queries", ea.queries, "Number of random queries")->check(CLI::PositiveNumber);
    eval->add_option("--j", ea.j, "Subspace dimension of the queries")->check(CLI::PositiveNumber);
    eval->add_option("--k", ea.k, "Centers per query")->check(CLI::PositiveNumber);
    eval->add_option("--epsilon", ea.eps, "Override the declared epsilon");
    eval->add_option("--seed", ea.seed, "Random seed");

    SolveArgs va;
    auto* solve = app.add_subcommand("solve", "Approximate k-means or affine flat clustering");
    solve->add_option("--problem", va.problem, "kmeans | affine")->check(CLI::IsMember({"kmeans", "affine"}));
    add_input_flags(solve, va.input);
    solve->add_option("-o,--output", va.output, "Solution file to write");
    solve->add_option("--k", va.k, "Number of centers or flats")->check(CLI::PositiveNumber);
    solve->add_option("--j", va.j, "Flat dimension")->check(CLI::PositiveNumber);
    solve->add_option("--epsilon", va.eps, "Approximation parameter")->check(CLI::Range(1e-9, 0.5));
    solve->add_option("--seed", va.seed, "Random seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*coreset) return cmd_coreset(ca, in, out);
        if (*stream) return cmd_stream(sa, in, out);
        if (*eval) return cmd_eval(ea, in, out);
        if (*solve) return cmd_solve(va, in, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace tinycore::cli
