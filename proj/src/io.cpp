#include "wta/io.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wta::io {

std::string format_real(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
}

std::string format_real(const std::optional<double>& value) { return value ? format_real(*value) : std::string(); }

void write_graph_csv(std::ostream& out, const ChargeFlowGraph& graph) {
    out << "i,j,multiplicity\n";
    for (const auto& e : graph.entries()) out << e.i << ',' << e.j << ',' << e.multiplicity << '\n';
}

std::string graph_sidecar_json(const GraphSidecar& meta) {
    nlohmann::ordered_json j;
    j["n"] = meta.n;
    j["m"] = meta.m;
    j["alpha"] = meta.alpha;
    j["semantics"] = std::string(to_string(meta.semantics));
    j["seed"] = meta.seed;
    if (meta.replicate) j["replicate"] = *meta.replicate;
    return j.dump(2) + "\n";
}

GraphSidecar parse_graph_sidecar(const std::string& json) {
    try {
        const auto j = nlohmann::json::parse(json);
        GraphSidecar meta;
        meta.n = j.at("n").get<std::int64_t>();
        meta.m = j.at("m").get<std::int64_t>();
        meta.alpha = j.at("alpha").get<double>();
        meta.semantics = parse_semantics(j.at("semantics").get<std::string>());
        meta.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("replicate")) meta.replicate = j.at("replicate").get<std::uint64_t>();
        return meta;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("graph sidecar: ") + e.what());
    }
}

namespace {

template <typename T>
T parse_int(std::string_view text, const std::string& where) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw DomainError(where + ": cannot parse integer '" + std::string(text) + "'");
    return value;
}

} // namespace

ChargeFlowGraph read_graph(const std::filesystem::path& csv, const std::filesystem::path& sidecar) {
    const GraphSidecar meta = parse_graph_sidecar(read_file(sidecar));
    std::istringstream in(read_file(csv));
    std::string line;
    if (!std::getline(in, line) || line != "i,j,multiplicity")
        throw DomainError(csv.string() + ": expected header 'i,j,multiplicity'");
    std::vector<GraphEntry> entries;
    std::int64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        const std::string where = csv.string() + ":" + std::to_string(line_no);
        if (c2 == std::string::npos) throw DomainError(where + ": expected three columns");
        const std::string_view view(line);
        entries.push_back({parse_int<Rank>(view.substr(0, c1), where),
                           parse_int<Rank>(view.substr(c1 + 1, c2 - c1 - 1), where),
                           parse_int<std::int64_t>(view.substr(c2 + 1), where)});
    }
    return ChargeFlowGraph(meta.n, meta.m, meta.alpha, meta.semantics, std::move(entries));
}

void write_spectra_header(std::ostream& out) { out << "kind,n,alpha,eps,semantics,replicate,rank,atom\n"; }

void write_spectra_rows(std::ostream& out, const SpectralMeasure& measure, std::int64_t replicate) {
    const std::string prefix = std::string(to_string(measure.kind)) + ',' + std::to_string(measure.n) + ',' +
                               format_real(measure.alpha) + ',' + format_real(measure.eps) + ',' +
                               std::string(to_string(measure.semantics)) + ',' + std::to_string(replicate) + ',';
    for (Eigen::Index r = 0; r < measure.atoms.size(); ++r)
        out << prefix << (r + 1) << ',' << format_real(measure.atoms(r)) << '\n';
}

void write_oracle_csv(std::ostream& out, std::span<const OracleRow> rows) {
    out << "k,j1_zero,lambda_K,lambda_M_truncN,provenance\n";
    for (const auto& row : rows)
        out << row.k << ',' << format_real(row.j1_zero) << ',' << format_real(row.lambda_k) << ','
            << format_real(row.lambda_m) << ',' << row.provenance << '\n';
}

void write_edge_probability_csv(std::ostream& out, const EdgeProbabilities& law) {
    out << "u,visit,edge_offdiag,edge_diag,semantics\n";
    const std::string semantics(to_string(law.semantics));
    for (std::int64_t u = 1; u <= law.n; ++u) {
        const auto k = static_cast<Eigen::Index>(u - 1);
        out << u << ',' << format_real(law.visit(k)) << ',' << format_real(law.edge.offdiag()(k)) << ','
            << format_real(law.edge.diag()(k)) << ',' << semantics << '\n';
    }
}

void write_comparison_header(std::ostream& out) {
    out << "kind,n,alpha,eps,semantics,rank,emp_mean,emp_std,oracle_finite,oracle_limit,rel_err_finite,rel_err_limit\n";
}

void write_comparison_rows(std::ostream& out, const ComparisonReport& report) {
    for (const auto& r : report.ranks)
        out << to_string(report.kind) << ',' << report.n << ',' << format_real(report.alpha) << ','
            << format_real(report.eps) << ',' << to_string(report.semantics) << ',' << r.rank << ','
            << format_real(r.emp_mean) << ',' << format_real(r.emp_std) << ',' << format_real(r.oracle_finite) << ','
            << format_real(r.oracle_limit) << ',' << format_real(r.rel_err_finite) << ','
            << format_real(r.rel_err_limit) << '\n';
}

void write_degrees_csv(std::ostream& out, const DegreeSummary& degrees) {
    out << "rank,out,in,total\n";
    for (std::size_t k = 0; k < degrees.total.size(); ++k)
        out << (k + 1) << ',' << degrees.out[k] << ',' << degrees.in[k] << ',' << degrees.total[k] << '\n';
}

void write_fit_csv(std::ostream& out, const PowerLawFit& fit) {
    out << "method,exponent,std_error,lower,upper,points,hill_exponent,hill_std_error\n";
    out << (fit.method == FitMethod::hill ? "hill" : "ccdf_regression") << ',' << format_real(fit.exponent) << ','
        << format_real(fit.std_error) << ',' << format_real(fit.lower) << ',' << format_real(fit.upper) << ','
        << fit.points << ',' << format_real(fit.hill_exponent) << ',' << format_real(fit.hill_std_error) << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace wta::io
