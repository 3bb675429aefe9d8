#pragma once

#include "wta/analysis.hpp"
#include "wta/graph.hpp"
#include "wta/oracle.hpp"
#include "wta/spectra.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

namespace wta::io {

/// Locale-independent shortest-safe text for a real: 17 significant digits.
std::string format_real(double value);
std::string format_real(const std::optional<double>& value);  ///< empty cell when unset

/// Graph metadata stored next to the CSV.
struct GraphSidecar {
    std::int64_t n = 0;
    std::int64_t m = 0;
    double alpha = 0.0;
    LeakSemantics semantics = LeakSemantics::remove;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> replicate;
};

/// Header `i,j,multiplicity`, lower triangle only, sorted.
void write_graph_csv(std::ostream& out, const ChargeFlowGraph& graph);
std::string graph_sidecar_json(const GraphSidecar& meta);
GraphSidecar parse_graph_sidecar(const std::string& json);
/// Throws DomainError on a malformed file.
ChargeFlowGraph read_graph(const std::filesystem::path& csv, const std::filesystem::path& sidecar);

/// Header `kind,n,alpha,eps,semantics,replicate,rank,atom`.
void write_spectra_header(std::ostream& out);
void write_spectra_rows(std::ostream& out, const SpectralMeasure& measure, std::int64_t replicate);

/// Header `k,j1_zero,lambda_K,lambda_M_truncN,provenance`. Columns with no value stay empty.
struct OracleRow {
    int k = 0;
    std::optional<double> j1_zero;
    std::optional<double> lambda_k;
    std::optional<double> lambda_m;
    std::string provenance;
};
void write_oracle_csv(std::ostream& out, std::span<const OracleRow> rows);

/// Header `u,visit,edge_offdiag,edge_diag,semantics`: P(visit u), P(edge u -> j) for any j < u,
/// P(recorded leak at u).
void write_edge_probability_csv(std::ostream& out, const EdgeProbabilities& law);

/// Header `kind,n,alpha,eps,semantics,rank,emp_mean,emp_std,oracle_finite,oracle_limit,rel_err_finite,rel_err_limit`.
void write_comparison_header(std::ostream& out);
void write_comparison_rows(std::ostream& out, const ComparisonReport& report);

/// Header `rank,out,in,total`.
void write_degrees_csv(std::ostream& out, const DegreeSummary& degrees);
/// Header `method,exponent,std_error,lower,upper,points,hill_exponent,hill_std_error`.
void write_fit_csv(std::ostream& out, const PowerLawFit& fit);

/// Writes `text` to `path` (creating parent directories); throws std::runtime_error on failure.
void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

} // namespace wta::io
