#include "wta/cli.hpp"

#include "wta/analysis.hpp"
#include "wta/io.hpp"
#include "wta/parallel.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace wta::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw DomainError("gate '" + key + "': cannot parse value '" + text + "'");
    return value;
}

} // namespace

Gates parse_gates(std::string_view text) {
    Gates gates;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        const std::string body = trim(std::string_view(line).substr(0, comment));
        if (body.empty() || body.front() == '[') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw DomainError("gates line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key == "rel_err_finite_max")
            gates.rel_err_finite_max = parse_number<double>(value, key);
        else if (key == "rel_err_limit_max")
            gates.rel_err_limit_max = parse_number<double>(value, key);
        else if (key == "min_decreasing_steps")
            gates.min_decreasing_steps = parse_number<int>(value, key);
        else
            throw DomainError("gates line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    return gates;
}

namespace {

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Every flag of every command; each subcommand binds the subset it uses.
struct Options {
    std::int64_t n = 1000;
    double alpha = 1.0;
    std::string semantics = "remove";
    std::string engine = "unitwise";
    std::uint64_t seed = 0;
    int replicates = 1;
    int threads = 1;
    std::string out_dir = "out";
    bool degrees = false;

    std::string kind = "mu";
    std::optional<double> eps_exponent;
    Eigen::Index top = 3;
    std::string graphs_dir;
    bool full_spectrum = false;

    std::string what = "k-spectrum";
    int count = 10;
    std::int64_t trunc_n = 1000;
    std::int64_t grid = 4000;
    double cutoff = 200.0;

    std::string oracle_semantics;
    std::int64_t m_trunc = 0;
    std::string gates_file;
    std::vector<std::int64_t> n_grid;

    std::string manifest;
};

void add_simulation_flags(CLI::App& cmd, Options& o) {
    cmd.add_option("--n", o.n, "number of vertices")->check(CLI::PositiveNumber);
    cmd.add_option("--alpha", o.alpha, "units per vertex, m = floor(alpha n)")->check(CLI::PositiveNumber);
    cmd.add_option("--semantics", o.semantics)->check(CLI::IsMember({"remove", "stay", "freeze"}));
    cmd.add_option("--engine", o.engine)->check(CLI::IsMember({"unitwise", "global", "poisson"}));
    cmd.add_option("--seed", o.seed);
    cmd.add_option("--replicates", o.replicates)->check(CLI::PositiveNumber);
    cmd.add_option("--threads", o.threads)->check(CLI::PositiveNumber);
}

void add_out_flag(CLI::App& cmd, Options& o) { cmd.add_option("--out", o.out_dir, "output directory"); }

SimulationConfig simulation_config(const Options& o) {
    SimulationConfig c;
    c.n = o.n;
    c.alpha = o.alpha;
    c.semantics = parse_semantics(o.semantics);
    c.engine = parse_engine(o.engine);
    c.seed = o.seed;
    c.replicates = o.replicates;
    c.threads = o.threads;
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    return c;
}

EpsSchedule schedule_from(const Options& o) {
    if (!o.eps_exponent) return {};
    const EpsSchedule schedule = EpsSchedule::with_exponent(*o.eps_exponent);
    if (!schedule.valid()) throw UsageError("--eps-exponent must lie in (1/2, 1)");
    return schedule;
}

std::vector<std::string> simulation_args(const Options& o) {
    return {"--n",        std::to_string(o.n),          "--alpha",   io::format_real(o.alpha),
            "--semantics", o.semantics,                 "--engine",  o.engine,
            "--seed",     std::to_string(o.seed),       "--replicates", std::to_string(o.replicates),
            "--threads",  std::to_string(o.threads)};
}

void append(std::vector<std::string>& to, std::initializer_list<std::string> more) { to.insert(to.end(), more); }

// Fully explicit argument list of the command, without --out, for the manifest.
std::vector<std::string> canonical_args(const std::string& command, const Options& o) {
    std::vector<std::string> args{command};
    auto sim = simulation_args(o);
    if (command == "simulate") {
        args.insert(args.end(), sim.begin(), sim.end());
        if (o.degrees) args.push_back("--degrees");
    } else if (command == "spectrum") {
        if (o.graphs_dir.empty())
            args.insert(args.end(), sim.begin(), sim.end());
        else
            append(args, {"--graphs", o.graphs_dir, "--threads", std::to_string(o.threads)});
        append(args, {"--kind", o.kind, "--top", std::to_string(o.top)});
        if (o.eps_exponent) append(args, {"--eps-exponent", io::format_real(*o.eps_exponent)});
    } else if (command == "oracle") {
        append(args, {"--what", o.what, "--count", std::to_string(o.count), "--trunc-N", std::to_string(o.trunc_n),
                      "--grid", std::to_string(o.grid), "--T", io::format_real(o.cutoff), "--n", std::to_string(o.n),
                      "--semantics", o.semantics});
    } else {
        args.insert(args.end(), sim.begin(), sim.end());
        append(args, {"--kind", o.kind, "--top", std::to_string(o.top)});
        if (o.eps_exponent) append(args, {"--eps-exponent", io::format_real(*o.eps_exponent)});
        if (!o.oracle_semantics.empty()) append(args, {"--oracle-semantics", o.oracle_semantics});
        if (o.m_trunc > 0) append(args, {"--m-trunc", std::to_string(o.m_trunc)});
        if (o.full_spectrum) args.push_back("--full-spectrum");
        if (!o.gates_file.empty()) append(args, {"--gates", o.gates_file});
        if (command == "sweep") {
            std::string grid;
            for (std::size_t k = 0; k < o.n_grid.size(); ++k) grid += (k ? "," : "") + std::to_string(o.n_grid[k]);
            append(args, {"--n-grid", grid});
        }
    }
    return args;
}

struct Context {
    std::string command;
    Options options;
    fs::path out_dir;
    std::vector<std::string> outputs;
    std::ostream& out;
    std::ostream& err;

    void emit(const std::string& name, const std::string& text) {
        io::write_file(out_dir / name, text);
        outputs.push_back(name);
    }
};

void write_manifest(Context& ctx, double seconds) {
    const Options& o = ctx.options;
    nlohmann::ordered_json j;
    j["tool"] = "wta";
    j["version"] = std::string(version);
    j["command"] = ctx.command;
    j["args"] = canonical_args(ctx.command, o);
    nlohmann::ordered_json config;
    config["n"] = o.n;
    config["alpha"] = o.alpha;
    config["m"] = static_cast<std::int64_t>(std::floor(o.alpha * static_cast<double>(o.n)));
    config["semantics"] = o.semantics;
    config["engine"] = o.engine;
    config["seed"] = o.seed;
    config["replicates"] = o.replicates;
    config["threads"] = o.threads;
    j["config"] = config;
    const EpsSchedule schedule = o.eps_exponent ? EpsSchedule::with_exponent(*o.eps_exponent) : EpsSchedule{};
    j["eps_schedule"] = {{"exponent", schedule.exponent}, {"delta", schedule.delta}};
    j["outputs"] = ctx.outputs;
    j["wall_clock_seconds"] = seconds;
    io::write_file(ctx.out_dir / "manifest.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Commands

std::vector<ChargeFlowGraph> simulate_replicates(SimulationConfig config) {
    std::vector<ChargeFlowGraph> graphs(static_cast<std::size_t>(config.replicates));
    const int workers = config.threads;
    config.threads = 1;
    parallel_for(config.replicates, workers, [&](std::int64_t r) {
        graphs[static_cast<std::size_t>(r)] = simulate(config, static_cast<std::uint64_t>(r));
    });
    return graphs;
}

int cmd_simulate(Context& ctx) {
    const SimulationConfig config = simulation_config(ctx.options);
    const auto graphs = simulate_replicates(config);
    for (std::size_t r = 0; r < graphs.size(); ++r) {
        const std::string stem = "graph_r" + std::to_string(r);
        std::ostringstream csv;
        io::write_graph_csv(csv, graphs[r]);
        ctx.emit(stem + ".csv", csv.str());
        ctx.emit(stem + ".json", io::graph_sidecar_json({graphs[r].n(), graphs[r].m(), graphs[r].alpha(),
                                                         graphs[r].semantics(), config.seed, r}));
        if (ctx.options.degrees) {
            const DegreeSummary summary = degrees(graphs[r]);
            std::ostringstream deg;
            io::write_degrees_csv(deg, summary);
            ctx.emit("degrees_r" + std::to_string(r) + ".csv", deg.str());
            try {
                std::ostringstream fit;
                io::write_fit_csv(fit, fit_power_law(summary));
                ctx.emit("fit_r" + std::to_string(r) + ".csv", fit.str());
            } catch (const DomainError& e) {
                ctx.err << "warning: replicate " << r << ": no degree fit (" << e.what() << ")\n";
            }
        }
    }
    ctx.out << "wrote " << graphs.size() << " graph(s) to " << ctx.out_dir.string() << "\n";
    return pass;
}

std::vector<ChargeFlowGraph> load_graphs(const fs::path& dir) {
    std::vector<ChargeFlowGraph> graphs;
    for (std::size_t r = 0;; ++r) {
        const fs::path csv = dir / ("graph_r" + std::to_string(r) + ".csv");
        if (!fs::exists(csv)) break;
        graphs.push_back(io::read_graph(csv, dir / ("graph_r" + std::to_string(r) + ".json")));
    }
    if (graphs.empty()) throw UsageError("no graph_r0.csv in " + dir.string());
    return graphs;
}

int cmd_spectrum(Context& ctx) {
    const Options& o = ctx.options;
    const MeasureKind kind = parse_measure_kind(o.kind);
    if (kind == MeasureKind::kappa && !o.eps_exponent) throw UsageError("--kind kappa requires --eps-exponent");
    const EpsSchedule schedule = schedule_from(o);
    const auto graphs = o.graphs_dir.empty() ? simulate_replicates(simulation_config(o)) : load_graphs(o.graphs_dir);
    const std::optional<Eigen::Index> top = o.top > 0 ? std::optional(o.top) : std::nullopt;

    std::vector<SpectralMeasure> measures(graphs.size());
    parallel_for(static_cast<std::int64_t>(graphs.size()), o.threads, [&](std::int64_t r) {
        const auto& g = graphs[static_cast<std::size_t>(r)];
        measures[static_cast<std::size_t>(r)] =
            kind == MeasureKind::mu ? spectral_measure_mu(g, top) : spectral_measure_kappa(g, schedule.eps(g.n()), top);
    });
    std::ostringstream csv;
    io::write_spectra_header(csv);
    for (std::size_t r = 0; r < measures.size(); ++r) io::write_spectra_rows(csv, measures[r], static_cast<std::int64_t>(r));
    ctx.emit("spectra.csv", csv.str());
    ctx.out << "wrote spectra of " << measures.size() << " graph(s)\n";
    return pass;
}

int cmd_oracle(Context& ctx) {
    const Options& o = ctx.options;
    if (o.count < 1) throw UsageError("--count must be >= 1");
    std::vector<io::OracleRow> rows;
    if (o.what == "edge-prob") {
        std::ostringstream csv;
        io::write_edge_probability_csv(csv, exact_edge_probability(o.n, parse_semantics(o.semantics)));
        ctx.emit("edge_prob.csv", csv.str());
        return pass;
    }
    if (o.what == "k-spectrum") {
        const auto zeros = j1_zeros(o.count);
        const auto m_count = std::min<Eigen::Index>(o.count, o.trunc_n);
        const auto m = m_spectrum_truncated(o.trunc_n, m_count);
        for (int k = 1; k <= o.count; ++k) {
            const double x = zeros[static_cast<std::size_t>(k - 1)].location;
            rows.push_back({k, x, 8.0 / (x * x), k <= m_count ? std::optional(m.eigenvalues(k - 1)) : std::nullopt,
                            "bessel_closed_form"});
        }
    } else if (o.what == "m-spectrum") {
        const auto m = m_spectrum_truncated(o.trunc_n, std::min<Eigen::Index>(o.count, o.trunc_n));
        for (Eigen::Index k = 0; k < m.eigenvalues.size(); ++k)
            rows.push_back({static_cast<int>(k + 1), std::nullopt, std::nullopt, m.eigenvalues(k), "m_truncated"});
    } else if (o.what == "nystrom") {
        const auto spectrum = k_spectrum_nystrom(o.cutoff, o.grid, o.count);
        const auto zeros = j1_zeros(o.count);
        for (int k = 1; k <= o.count; ++k)
            rows.push_back({k, zeros[static_cast<std::size_t>(k - 1)].location, spectrum.eigenvalues(k - 1),
                            std::nullopt, "nystrom"});
    } else {
        throw UsageError("unknown oracle target '" + o.what + "'");
    }
    std::ostringstream csv;
    io::write_oracle_csv(csv, rows);
    ctx.emit("oracle.csv", csv.str());
    ctx.out << "wrote " << rows.size() << " oracle row(s)\n";
    return pass;
}

ComparisonConfig comparison_config(const Options& o) {
    const SimulationConfig sim = simulation_config(o);
    ComparisonConfig c;
    c.kind = parse_measure_kind(o.kind);
    c.n = sim.n;
    c.alpha = sim.alpha;
    c.semantics = sim.semantics;
    c.schedule = schedule_from(o);
    c.replicates = sim.replicates;
    c.seed = sim.seed;
    c.top = o.top;
    c.threads = sim.threads;
    c.engine = sim.engine;
    if (!o.oracle_semantics.empty()) c.oracle_semantics = parse_semantics(o.oracle_semantics);
    if (o.m_trunc > 0) c.m_truncation = o.m_trunc;
    c.full_spectrum = o.full_spectrum;
    if (c.top < 1) throw UsageError("--top must be >= 1");
    return c;
}

std::optional<Gates> load_gates(const Options& o) {
    if (o.gates_file.empty()) return std::nullopt;
    try {
        return parse_gates(io::read_file(o.gates_file));
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

// Prints one line per configured gate; returns whether all passed.
class GateReport {
public:
    explicit GateReport(std::ostream& out) : out_(out) {}
    void max_gate(const std::string& name, double value, double limit) {
        const bool ok = value <= limit;
        out_ << "gate " << name << ": " << io::format_real(value) << " <= " << io::format_real(limit)
             << (ok ? "  PASS\n" : "  FAIL\n");
        passed_ = passed_ && ok;
    }
    void min_gate(const std::string& name, double value, double limit) {
        const bool ok = value >= limit;
        out_ << "gate " << name << ": " << io::format_real(value) << " >= " << io::format_real(limit)
             << (ok ? "  PASS\n" : "  FAIL\n");
        passed_ = passed_ && ok;
    }
    bool passed() const noexcept { return passed_; }

private:
    std::ostream& out_;
    bool passed_ = true;
};

int cmd_compare(Context& ctx) {
    const auto gates = load_gates(ctx.options);
    if (gates && gates->min_decreasing_steps) throw UsageError("min_decreasing_steps is a sweep gate");
    const ComparisonReport report = run_comparison(comparison_config(ctx.options));
    std::ostringstream csv;
    io::write_comparison_header(csv);
    io::write_comparison_rows(csv, report);
    ctx.emit("comparison.csv", csv.str());
    if (!gates) return pass;
    GateReport gate(ctx.out);
    if (gates->rel_err_finite_max) gate.max_gate("rel_err_finite_max", report.max_abs_rel_err_finite(), *gates->rel_err_finite_max);
    if (gates->rel_err_limit_max) gate.max_gate("rel_err_limit_max", report.max_abs_rel_err_limit(), *gates->rel_err_limit_max);
    return gate.passed() ? pass : gate_failure;
}

int cmd_sweep(Context& ctx) {
    const auto gates = load_gates(ctx.options);
    if (ctx.options.n_grid.empty()) throw UsageError("sweep requires --n-grid");
    ComparisonConfig base = comparison_config(ctx.options);
    SweepTable table;
    try {
        table = convergence_sweep(ctx.options.n_grid, base);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    std::ostringstream csv;
    io::write_comparison_header(csv);
    for (const auto& row : table.rows) io::write_comparison_rows(csv, row);
    ctx.emit("sweep.csv", csv.str());
    if (!gates) return pass;
    GateReport gate(ctx.out);
    if (gates->rel_err_finite_max) {
        double worst = 0;
        for (const auto& row : table.rows) worst = std::max(worst, row.max_abs_rel_err_finite());
        gate.max_gate("rel_err_finite_max", worst, *gates->rel_err_finite_max);
    }
    if (gates->rel_err_limit_max)
        gate.max_gate("rel_err_limit_max", table.rows.back().max_abs_rel_err_limit(), *gates->rel_err_limit_max);
    if (gates->min_decreasing_steps)
        gate.min_gate("min_decreasing_steps", table.decreasing_steps(1), *gates->min_decreasing_steps);
    return gate.passed() ? pass : gate_failure;
}

int dispatch(const std::string& command, Context& ctx) {
    if (command == "simulate") return cmd_simulate(ctx);
    if (command == "spectrum") return cmd_spectrum(ctx);
    if (command == "oracle") return cmd_oracle(ctx);
    if (command == "compare") return cmd_compare(ctx);
    return cmd_sweep(ctx);
}

int run_impl(std::span<const std::string> args, std::ostream& out, std::ostream& err, int depth);

int replay(const Options& o, const std::optional<std::string>& out_flag, std::optional<int> threads, std::ostream& out,
           std::ostream& err, int depth) {
    if (depth > 0) throw UsageError("a manifest cannot replay another manifest");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(io::read_file(o.manifest));
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("manifest: ") + e.what());
    }
    if (!manifest.contains("args") || !manifest["args"].is_array()) throw UsageError("manifest has no 'args' array");
    auto args = manifest["args"].get<std::vector<std::string>>();
    if (threads) {
        const auto it = std::find(args.begin(), args.end(), "--threads");
        if (it != args.end() && it + 1 != args.end()) *(it + 1) = std::to_string(*threads);
    }
    if (out_flag) {
        args.push_back("--out");
        args.push_back(*out_flag);
    }
    return run_impl(args, out, err, depth + 1);
}

int run_impl(std::span<const std::string> args, std::ostream& out, std::ostream& err, int depth) {
    CLI::App app{"Winner-take-all charge-flow networks: simulation, spectra and oracles", "wta"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));
    Options o;

    auto* simulate = app.add_subcommand("simulate", "simulate charge-flow graphs");
    add_simulation_flags(*simulate, o);
    add_out_flag(*simulate, o);
    simulate->add_flag("--degrees", o.degrees, "also write degree tables and power-law fits");

    auto* spectrum = app.add_subcommand("spectrum", "empirical spectral measures");
    add_simulation_flags(*spectrum, o);
    add_out_flag(*spectrum, o);
    spectrum->add_option("--kind", o.kind)->check(CLI::IsMember({"mu", "kappa"}));
    spectrum->add_option("--eps-exponent", o.eps_exponent, "eps = n^-a (kappa only)");
    spectrum->add_option("--top", o.top, "top atoms by Lanczos; 0 = full dense spectrum");
    spectrum->add_option("--graphs", o.graphs_dir, "read graph_r*.csv from this directory");

    auto* oracle = app.add_subcommand("oracle", "theory-side tables");
    add_out_flag(*oracle, o);
    oracle->add_option("--what", o.what)->required();
    oracle->add_option("--count", o.count);
    oracle->add_option("--trunc-N", o.trunc_n)->check(CLI::PositiveNumber);
    oracle->add_option("--grid", o.grid);
    oracle->add_option("--T", o.cutoff);
    oracle->add_option("--n", o.n)->check(CLI::PositiveNumber);
    oracle->add_option("--semantics", o.semantics)->check(CLI::IsMember({"remove", "stay", "freeze"}));

    std::vector<CLI::App*> comparisons;
    for (const char* name : {"compare", "sweep"}) {
        auto* cmd = app.add_subcommand(name, name == std::string("compare") ? "empirical vs oracle spectra"
                                                                            : "compare over an n grid");
        add_simulation_flags(*cmd, o);
        add_out_flag(*cmd, o);
        cmd->add_option("--kind", o.kind)->check(CLI::IsMember({"mu", "kappa"}));
        cmd->add_option("--eps-exponent", o.eps_exponent, "eps = n^-a (default 0.75)");
        cmd->add_option("--top", o.top);
        cmd->add_option("--oracle-semantics", o.oracle_semantics)->check(CLI::IsMember({"remove", "stay", "freeze"}));
        cmd->add_option("--m-trunc", o.m_trunc, "truncation of M for the mu limit oracle (default n)");
        cmd->add_flag("--full-spectrum", o.full_spectrum);
        cmd->add_option("--gates", o.gates_file, "plain-text gate config");
        comparisons.push_back(cmd);
    }
    comparisons.back()->add_option("--n-grid", o.n_grid)->delimiter(',');

    std::optional<std::string> replay_out;
    std::optional<int> replay_threads;
    auto* replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    replay_cmd->add_option("--manifest", o.manifest)->required();
    replay_cmd->add_option("--out", replay_out);
    replay_cmd->add_option("--threads", replay_threads)->check(CLI::PositiveNumber);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? pass : usage_error;
    }

    if (replay_cmd->parsed()) return replay(o, replay_out, replay_threads, out, err, depth);

    const std::string command = app.get_subcommands().front()->get_name();
    if (o.engine == "poisson" && o.semantics != "stay")
        throw UsageError("--engine poisson requires --semantics stay");
    fs::path out_dir = o.out_dir;
    if (const char* env = std::getenv("WTA_OUT_DIR"); env && *env) out_dir = env;

    Context ctx{command, o, out_dir, {}, out, err};
    const auto start = std::chrono::steady_clock::now();
    const int code = dispatch(command, ctx);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    write_manifest(ctx, elapsed.count());
    return code;
}

} // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    try {
        return run_impl(args, out, err, 0);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return usage_error;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << "\n";
        return usage_error;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return numeric_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return numeric_error;
    }
}

} // namespace wta::cli
