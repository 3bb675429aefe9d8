#include "wta/analysis.hpp"

#include "wta/parallel.hpp"
#include "wta/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace wta {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double relative_error(double value, double reference) {
    return reference == 0.0 ? kNaN : (value - reference) / reference;
}

double max_abs_ignoring_nan(const std::vector<RankComparison>& ranks, double RankComparison::*field) {
    double worst = 0.0;
    for (const auto& r : ranks)
        if (!std::isnan(r.*field)) worst = std::max(worst, std::abs(r.*field));
    return worst;
}

} // namespace

double ComparisonReport::max_abs_rel_err_finite() const {
    return max_abs_ignoring_nan(ranks, &RankComparison::rel_err_finite);
}

double ComparisonReport::max_abs_rel_err_limit() const {
    return max_abs_ignoring_nan(ranks, &RankComparison::rel_err_limit);
}

ComparisonReport compare_spectra(std::span<const SpectralMeasure> measures, const OracleSpectrum& oracle_finite,
                                 const OracleSpectrum& oracle_limit, Eigen::Index top, std::uint64_t seed) {
    if (measures.empty()) throw DomainError("compare_spectra: no measures");
    if (top < 1) throw DomainError("compare_spectra: need at least one rank");
    const auto& head = measures.front();
    for (const auto& m : measures) {
        if (m.kind != head.kind || m.n != head.n || m.m != head.m || m.alpha != head.alpha || m.eps != head.eps ||
            m.semantics != head.semantics)
            throw DomainError("compare_spectra: measures disagree on (kind, n, alpha, eps, semantics)");
        if (m.atoms.size() < top) throw DomainError("compare_spectra: a measure has fewer than the requested atoms");
    }
    if (oracle_finite.eigenvalues.size() < top || oracle_limit.eigenvalues.size() < top)
        throw DomainError("compare_spectra: oracle spectra provide fewer than the requested ranks");

    ComparisonReport report;
    report.kind = head.kind;
    report.n = head.n;
    report.alpha = head.alpha;
    report.eps = head.eps;
    report.semantics = head.semantics;
    report.replicates = static_cast<int>(measures.size());
    report.seed = seed;

    std::vector<double> values(measures.size());
    for (Eigen::Index r = 0; r < top; ++r) {
        for (std::size_t k = 0; k < measures.size(); ++k) values[k] = measures[k].atoms(r);
        // Sorted summation keeps the report independent of replicate order.
        std::sort(values.begin(), values.end());
        const double count = static_cast<double>(values.size());
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
        double std_dev = kNaN;
        if (values.size() >= 2) {
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            std_dev = std::sqrt(ss / (count - 1));
        }
        RankComparison row;
        row.rank = static_cast<int>(r + 1);
        row.emp_mean = mean;
        row.emp_std = std_dev;
        row.oracle_finite = oracle_finite.eigenvalues(r);
        row.oracle_limit = oracle_limit.eigenvalues(r);
        row.rel_err_finite = relative_error(mean, row.oracle_finite);
        row.rel_err_limit = relative_error(mean, row.oracle_limit);
        report.ranks.push_back(row);
    }
    return report;
}

OracleSpectrum finite_oracle(MeasureKind kind, std::int64_t n, std::int64_t m, LeakSemantics semantics,
                             std::optional<double> eps, Eigen::Index count) {
    auto kernel = expected_kernel(n, m, exact_kernel_for(semantics));
    double factor = 1.0 / static_cast<double>(n);
    if (kind == MeasureKind::kappa) {
        if (!eps) throw DomainError("finite_oracle: kappa needs eps");
        kernel = kernel.truncated(truncation_rank(n, *eps));
        factor = *eps;
    }
    OracleSpectrum out;
    out.provenance = Provenance::exact_kernel_matrix;
    out.n = n;
    out.semantics = semantics;
    out.eigenvalues = factor * top_eigenvalues_iterative(kernel, std::min<Eigen::Index>(count, n), {.tol = 1e-12});
    return out;
}

OracleSpectrum limit_oracle(MeasureKind kind, double alpha, Eigen::Index count, std::int64_t m_truncation) {
    if (kind == MeasureKind::mu) return scaled(m_spectrum_truncated(m_truncation, count), alpha);
    return scaled(k_spectrum(static_cast<int>(count)), alpha);
}

// ---------------------------------------------------------------------------
// Power-law fits

namespace {

struct CcdfLine {
    double slope = 0.0;
    double residual_ss = 0.0;
    double sxx = 0.0;
    std::size_t distinct = 0;
    std::int64_t points = 0;
};

// OLS of log P(X >= d) on log d over the distinct sample values d in [lower, upper].
CcdfLine ccdf_line(const std::vector<double>& sorted, double lower, double upper) {
    const double total = static_cast<double>(sorted.size());
    std::vector<double> xs, ys;
    CcdfLine line;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        if (sorted[i] >= lower && sorted[i] <= upper) {
            xs.push_back(std::log(sorted[i]));
            ys.push_back(std::log(static_cast<double>(sorted.size() - i) / total));
            line.points += static_cast<std::int64_t>(j - i);
        }
        i = j;
    }
    line.distinct = xs.size();
    if (xs.size() < 2) return line;
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        line.sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    line.slope = sxy / line.sxx;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double fit = my + line.slope * (xs[k] - mx);
        line.residual_ss += (ys[k] - fit) * (ys[k] - fit);
    }
    return line;
}

// CCDF points are cumulative and strongly correlated, so the OLS formula understates
// the uncertainty. The reported error is the spread over bootstrap resamples.
constexpr int kBootstrapResamples = 200;
constexpr std::uint64_t kBootstrapSeed = 0xB007;

} // namespace

PowerLawFit fit_power_law(std::span<const double> samples, std::optional<std::pair<double, double>> quantiles) {
    std::vector<double> positive;
    positive.reserve(samples.size());
    for (double s : samples)
        if (s > 0) positive.push_back(s);
    if (positive.empty()) throw DomainError("fit_power_law: no positive samples");
    std::sort(positive.begin(), positive.end());

    double lower = 0, upper = 0;
    if (quantiles) {
        const auto [q_lo, q_hi] = *quantiles;
        if (!(0 <= q_lo && q_lo < q_hi && q_hi <= 1)) throw DomainError("fit_power_law: need 0 <= q_lo < q_hi <= 1");
        const auto at = [&](double q) {
            return positive[static_cast<std::size_t>(std::floor(q * static_cast<double>(positive.size() - 1)))];
        };
        lower = at(q_lo);
        upper = at(q_hi);
    } else {
        // Middle two decades of the positive range.
        const double lo = std::log10(positive.front());
        const double hi = std::log10(positive.back());
        const double mid = 0.5 * (lo + hi);
        lower = std::pow(10.0, std::max(lo, mid - 1.0));
        upper = std::pow(10.0, std::min(hi, mid + 1.0));
    }

    const CcdfLine line = ccdf_line(positive, lower, upper);
    if (line.points < 100) throw DomainError("fit_power_law: fewer than 100 samples in the fit range");
    if (line.distinct < 3) throw DomainError("fit_power_law: degenerate fit range (fewer than 3 distinct values)");

    PowerLawFit out;
    out.method = FitMethod::ccdf_regression;
    out.exponent = 1.0 - line.slope;
    out.lower = lower;
    out.upper = upper;
    out.points = line.points;
    if (!(out.exponent > 1.0) || std::abs(line.slope) < 1e-12)
        throw DomainError("fit_power_law: fitted exponent " + std::to_string(out.exponent) + " is not a power-law tail");

    CounterRng rng(kBootstrapSeed, positive.size());
    std::vector<double> resample(positive.size());
    double sum = 0, sum_sq = 0;
    int used = 0;
    for (int b = 0; b < kBootstrapResamples; ++b) {
        for (auto& x : resample) x = positive[rng.below(positive.size())];
        std::sort(resample.begin(), resample.end());
        const CcdfLine boot = ccdf_line(resample, lower, upper);
        if (boot.distinct < 3) continue;
        sum += 1.0 - boot.slope;
        sum_sq += (1.0 - boot.slope) * (1.0 - boot.slope);
        ++used;
    }
    out.std_error = used > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / used) / (used - 1)))
                             : std::sqrt(line.residual_ss / std::max(static_cast<double>(line.distinct) - 2.0, 1.0) / line.sxx);

    double log_sum = 0;
    std::int64_t tail = 0;
    for (double s : positive)
        if (s >= lower) {
            log_sum += std::log(s / lower);
            ++tail;
        }
    if (log_sum > 0) {
        out.hill_exponent = 1.0 + static_cast<double>(tail) / log_sum;
        out.hill_std_error = (out.hill_exponent - 1.0) / std::sqrt(static_cast<double>(tail));
    }
    return out;
}

PowerLawFit fit_power_law(const DegreeSummary& degrees, std::optional<std::pair<double, double>> quantiles) {
    std::vector<double> values(degrees.total.begin(), degrees.total.end());
    return fit_power_law(values, quantiles);
}

// ---------------------------------------------------------------------------
// Single-unit frequency tests

std::vector<VisitFrequency> visit_frequency_test(std::int64_t n, LeakSemantics semantics, std::int64_t samples,
                                                 std::optional<LeakSemantics> oracle_semantics, std::uint64_t seed,
                                                 int threads) {
    if (samples < 1) throw DomainError("visit_frequency_test: samples must be >= 1");
    const auto oracle = exact_edge_probability(n, oracle_semantics.value_or(semantics));
    const int workers = std::max(1, threads);
    std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(workers),
                                                  std::vector<std::int64_t>(static_cast<std::size_t>(n) + 1, 0));
    parallel_chunks(samples, workers, [&](std::int64_t begin, std::int64_t end, int worker) {
        auto& local = counts[static_cast<std::size_t>(worker)];
        for (std::int64_t s = begin; s < end; ++s) {
            CounterRng rng = unit_stream(seed, 0, static_cast<std::uint64_t>(s));
            for (Rank v : sample_trajectory(n, std::nullopt, semantics, rng).visits) ++local[static_cast<std::size_t>(v)];
        }
    });
    std::vector<VisitFrequency> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t u = 1; u <= n; ++u) {
        std::int64_t hits = 0;
        for (const auto& local : counts) hits += local[static_cast<std::size_t>(u)];
        const double freq = static_cast<double>(hits) / static_cast<double>(samples);
        const double p = oracle.visit(u - 1);
        out.push_back({static_cast<Rank>(u), freq, p, binomial_z(freq, p, samples)});
    }
    return out;
}

std::vector<EdgeFrequency> edge_frequency_test(std::int64_t n, LeakSemantics semantics, std::int64_t samples,
                                               std::span<const std::pair<Rank, Rank>> probes, std::uint64_t seed,
                                               int threads) {
    if (samples < 1) throw DomainError("edge_frequency_test: samples must be >= 1");
    std::vector<std::pair<Rank, Rank>> keys(probes.begin(), probes.end());
    for (auto& [i, j] : keys) {
        if (i < j) std::swap(i, j);
        if (j < 1 || i > n) throw DomainError("edge_frequency_test: probe outside 1..n");
    }
    const auto oracle = exact_edge_probability(n, semantics);
    const int workers = std::max(1, threads);
    std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(workers),
                                                  std::vector<std::int64_t>(keys.size(), 0));
    parallel_chunks(samples, workers, [&](std::int64_t begin, std::int64_t end, int worker) {
        auto& local = counts[static_cast<std::size_t>(worker)];
        for (std::int64_t s = begin; s < end; ++s) {
            CounterRng rng = unit_stream(seed, 0, static_cast<std::uint64_t>(s));
            const Trajectory path = sample_trajectory(n, std::nullopt, semantics, rng);
            auto mark = [&](Rank a, Rank b) {
                for (std::size_t p = 0; p < keys.size(); ++p)
                    if (keys[p].first == a && keys[p].second == b) ++local[p];
            };
            for (std::size_t k = 0; k + 1 < path.visits.size(); ++k) mark(path.visits[k], path.visits[k + 1]);
            if (records_leaks(semantics)) mark(path.terminal, path.terminal);
        }
    });
    std::vector<EdgeFrequency> out;
    for (std::size_t p = 0; p < keys.size(); ++p) {
        std::int64_t hits = 0;
        for (const auto& local : counts) hits += local[p];
        const double freq = static_cast<double>(hits) / static_cast<double>(samples);
        const double prob = oracle.edge_probability(keys[p].first, keys[p].second);
        out.push_back({keys[p].first, keys[p].second, freq, prob, binomial_z(freq, prob, samples)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pipelines

std::vector<SpectralMeasure> simulate_measures(const ComparisonConfig& config) {
    SimulationConfig sim{.n = config.n, .alpha = config.alpha, .semantics = config.semantics, .seed = config.seed,
                         .engine = config.engine, .replicates = config.replicates, .threads = 1};
    sim.validate();
    std::vector<SpectralMeasure> measures(static_cast<std::size_t>(config.replicates));
    const std::optional<Eigen::Index> top = config.full_spectrum ? std::nullopt : std::optional(config.top);
    parallel_for(config.replicates, config.threads, [&](std::int64_t r) {
        const ChargeFlowGraph graph = simulate(sim, static_cast<std::uint64_t>(r));
        measures[static_cast<std::size_t>(r)] = config.kind == MeasureKind::mu
                                                    ? spectral_measure_mu(graph, top)
                                                    : spectral_measure_kappa(graph, config.schedule.eps(config.n), top);
    });
    return measures;
}

ComparisonReport run_comparison(const ComparisonConfig& config) {
    const auto measures = simulate_measures(config);
    const std::int64_t m = measures.front().m;
    const std::optional<double> eps =
        config.kind == MeasureKind::kappa ? std::optional(config.schedule.eps(config.n)) : std::nullopt;
    const auto finite = finite_oracle(config.kind, config.n, m, config.oracle_semantics.value_or(config.semantics),
                                      eps, config.top);
    const auto limit = limit_oracle(config.kind, config.alpha, config.top, config.m_truncation.value_or(config.n));
    return compare_spectra(measures, finite, limit, config.top, config.seed);
}

RobustnessReport robustness_experiment(std::int64_t n, double alpha, const EpsSchedule& schedule, int replicates,
                                       std::uint64_t seed, Eigen::Index top, int threads) {
    ComparisonConfig base;
    base.n = n;
    base.alpha = alpha;
    base.schedule = schedule;
    base.replicates = replicates;
    base.seed = seed;
    base.top = top;
    base.threads = threads;
    auto run = [&](MeasureKind kind, LeakSemantics semantics) {
        ComparisonConfig c = base;
        c.kind = kind;
        c.semantics = semantics;
        return run_comparison(c);
    };
    RobustnessReport out;
    out.kappa_remove = run(MeasureKind::kappa, LeakSemantics::remove);
    out.kappa_stay = run(MeasureKind::kappa, LeakSemantics::stay);
    out.mu_remove = run(MeasureKind::mu, LeakSemantics::remove);
    out.mu_stay = run(MeasureKind::mu, LeakSemantics::stay);

    const auto& kr = out.kappa_remove.ranks.front();
    const auto& ks = out.kappa_stay.ranks.front();
    out.kappa_top_gap = std::abs(kr.emp_mean - ks.emp_mean);
    out.kappa_pooled_std = std::sqrt(0.5 * (kr.emp_std * kr.emp_std + ks.emp_std * ks.emp_std));
    for (std::size_t r = 0; r < out.mu_remove.ranks.size(); ++r) {
        const double a = out.mu_remove.ranks[r].emp_mean;
        const double b = out.mu_stay.ranks[r].emp_mean;
        out.mu_max_rel_gap = std::max(out.mu_max_rel_gap, std::abs(a - b) / std::abs(b));
    }
    return out;
}

int SweepTable::decreasing_steps(int rank) const {
    int steps = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double before = std::abs(rows[k - 1].ranks.at(static_cast<std::size_t>(rank - 1)).rel_err_limit);
        const double after = std::abs(rows[k].ranks.at(static_cast<std::size_t>(rank - 1)).rel_err_limit);
        if (after < before) ++steps;
    }
    return steps;
}

SweepTable convergence_sweep(std::span<const std::int64_t> n_grid, const ComparisonConfig& base) {
    if (n_grid.empty()) throw DomainError("convergence_sweep: empty n grid");
    for (std::size_t k = 1; k < n_grid.size(); ++k)
        if (n_grid[k] <= n_grid[k - 1]) throw DomainError("convergence_sweep: n grid must be ascending");
    SweepTable table;
    for (const std::int64_t n : n_grid) {
        ComparisonConfig c = base;
        c.n = n;
        table.rows.push_back(run_comparison(c));
    }
    return table;
}

} // namespace wta
