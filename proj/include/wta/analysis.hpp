#pragma once

#include "wta/dynamics.hpp"
#include "wta/graph.hpp"
#include "wta/oracle.hpp"
#include "wta/spectra.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace wta {

/// eps_n = n^{-exponent}. Valid iff n eps_n -> inf and n^{1+delta} eps_n^2 -> 0,
/// i.e. 1/2 < exponent < 1 and 0 < delta < 2 exponent - 1.
struct EpsSchedule {
    double exponent = 0.75;
    double delta = 0.25;

    static EpsSchedule with_exponent(double exponent) { return {exponent, exponent - 0.5}; }

    double eps(std::int64_t n) const { return std::pow(static_cast<double>(n), -exponent); }
    bool valid() const noexcept { return exponent > 0.5 && exponent < 1.0 && delta > 0.0 && delta < 2 * exponent - 1; }
};

struct RankComparison {
    int rank = 0;  ///< 1-based
    double emp_mean = 0.0;
    double emp_std = 0.0;  ///< NaN with fewer than two replicates
    double oracle_finite = 0.0;
    double oracle_limit = 0.0;
    double rel_err_finite = 0.0;  ///< (emp_mean - oracle) / oracle; NaN when the oracle is 0
    double rel_err_limit = 0.0;
};

struct ComparisonReport {
    MeasureKind kind = MeasureKind::mu;
    std::int64_t n = 0;
    double alpha = 0.0;
    std::optional<double> eps;
    LeakSemantics semantics = LeakSemantics::remove;
    int replicates = 0;
    std::uint64_t seed = 0;
    std::vector<RankComparison> ranks;

    double max_abs_rel_err_finite() const;
    double max_abs_rel_err_limit() const;
};

/// Rank-matched comparison of the top `top` atoms across replicates with two
/// oracle spectra (already scaled to the measure's units).
/// Throws DomainError on mixed metadata, too few atoms or too few oracle values.
ComparisonReport compare_spectra(std::span<const SpectralMeasure> measures, const OracleSpectrum& oracle_finite,
                                 const OracleSpectrum& oracle_limit, Eigen::Index top, std::uint64_t seed = 0);

/// Top eigenvalues of E[A] (exact kernel for `semantics`) scaled like the measure:
/// 1/n for mu, eps after truncation for kappa.
OracleSpectrum finite_oracle(MeasureKind kind, std::int64_t n, std::int64_t m, LeakSemantics semantics,
                             std::optional<double> eps, Eigen::Index count);

/// alpha * spectrum of M (truncated at `m_truncation`) for mu; alpha * 8/x_k^2 for kappa.
OracleSpectrum limit_oracle(MeasureKind kind, double alpha, Eigen::Index count, std::int64_t m_truncation);

enum class FitMethod { ccdf_regression, hill };

struct PowerLawFit {
    double exponent = 0.0;  ///< density exponent (CCDF slope s gives 1 - s)
    double std_error = 0.0;
    double lower = 0.0;     ///< fit range in degree units
    double upper = 0.0;
    std::int64_t points = 0;  ///< samples inside [lower, upper]
    FitMethod method = FitMethod::ccdf_regression;
    double hill_exponent = 0.0;  ///< secondary estimate on samples >= lower
    double hill_std_error = 0.0;
};

/// Log-log regression of the empirical CCDF over a degree range. `quantiles`
/// picks the range as sample quantiles; by default the middle two decades of the
/// positive samples. Throws DomainError for fewer than 100 samples in range or a
/// degenerate (constant) range.
PowerLawFit fit_power_law(std::span<const double> samples,
                          std::optional<std::pair<double, double>> quantiles = {});
PowerLawFit fit_power_law(const DegreeSummary& degrees,
                          std::optional<std::pair<double, double>> quantiles = {});

struct VisitFrequency {
    Rank rank = 0;
    double frequency = 0.0;
    double oracle = 0.0;
    double z = 0.0;
};

/// Monte Carlo visit frequencies under `semantics` against the exact visit law of
/// `oracle_semantics` (equal to `semantics` unless deliberately mismatched).
std::vector<VisitFrequency> visit_frequency_test(std::int64_t n, LeakSemantics semantics, std::int64_t samples,
                                                 std::optional<LeakSemantics> oracle_semantics = {},
                                                 std::uint64_t seed = 0, int threads = 1);

struct EdgeFrequency {
    Rank i = 0;
    Rank j = 0;
    double frequency = 0.0;  ///< per-unit traversal frequency
    double oracle = 0.0;
    double z = 0.0;
};

/// Per-trajectory edge-traversal frequencies for the probe pairs (i >= j).
std::vector<EdgeFrequency> edge_frequency_test(std::int64_t n, LeakSemantics semantics, std::int64_t samples,
                                               std::span<const std::pair<Rank, Rank>> probes,
                                               std::uint64_t seed = 0, int threads = 1);

struct ComparisonConfig {
    MeasureKind kind = MeasureKind::kappa;
    std::int64_t n = 1000;
    double alpha = 1.0;
    LeakSemantics semantics = LeakSemantics::remove;
    EpsSchedule schedule{};
    int replicates = 10;
    std::uint64_t seed = 0;
    Eigen::Index top = 3;
    int threads = 1;
    Engine engine = Engine::unitwise;
    /// Semantics of the finite-n oracle kernel; defaults to `semantics`.
    std::optional<LeakSemantics> oracle_semantics;
    /// Truncation of M for the mu limit oracle; defaults to n.
    std::optional<std::int64_t> m_truncation;
    /// Full dense spectra instead of top-k Lanczos.
    bool full_spectrum = false;
};

/// simulate -> spectral measure -> oracles -> compare, replicate-parallel.
ComparisonReport run_comparison(const ComparisonConfig& config);

/// Spectral measures of the configured replicates (top-k unless full_spectrum).
std::vector<SpectralMeasure> simulate_measures(const ComparisonConfig& config);

struct RobustnessReport {
    ComparisonReport kappa_remove;
    ComparisonReport kappa_stay;
    ComparisonReport mu_remove;
    ComparisonReport mu_stay;
    double kappa_top_gap = 0.0;      ///< |mean_remove - mean_stay| of the top kappa atom
    double kappa_pooled_std = 0.0;   ///< sqrt((s_remove^2 + s_stay^2) / 2)
    double mu_max_rel_gap = 0.0;     ///< max over ranks of |remove - stay| / stay, mu atoms

    bool kappa_agrees(double sigmas = 3.0) const noexcept { return kappa_top_gap <= sigmas * kappa_pooled_std; }
};

/// Runs remove and stay with the same seed (and thus the same unit streams).
RobustnessReport robustness_experiment(std::int64_t n, double alpha, const EpsSchedule& schedule, int replicates,
                                       std::uint64_t seed = 0, Eigen::Index top = 3, int threads = 1);

struct SweepTable {
    std::vector<ComparisonReport> rows;  ///< one report per n, ascending

    /// Consecutive steps in which |rel_err_limit| at `rank` strictly decreases.
    int decreasing_steps(int rank = 1) const;
};

/// run_comparison over an ascending n grid; `base.n` is ignored.
SweepTable convergence_sweep(std::span<const std::int64_t> n_grid, const ComparisonConfig& base);

} // namespace wta
