#pragma once

#include "wta/graph.hpp"
#include "wta/lanczos.hpp"
#include "wta/max_kernel.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <optional>
#include <string_view>

namespace wta {

struct DenseOptions {
    Eigen::Index cap = 4000;       ///< largest dimension accepted by the dense solver
    double symmetry_tol = 1e-12;   ///< max |A - A^T| relative to max |A|
};

/// Full spectrum of a symmetric matrix, descending.
/// Throws DomainError for asymmetric or oversized input, NumericError on non-convergence.
Eigen::VectorXd eigenvalues_dense(const Eigen::MatrixXd& matrix, const DenseOptions& options = {});

struct EigenPairs {
    Eigen::VectorXd values;   ///< descending
    Eigen::MatrixXd vectors;  ///< column i pairs with values(i)
};

EigenPairs eigenpairs_dense(const Eigen::MatrixXd& matrix, const DenseOptions& options = {});

/// max over the first `count` pairs of ||A v - lambda v||.
double max_residual(const Eigen::MatrixXd& matrix, const EigenPairs& pairs, Eigen::Index count);

/// k largest eigenvalues, descending, by Lanczos.
Eigen::VectorXd top_eigenvalues_iterative(const Eigen::SparseMatrix<double>& matrix, Eigen::Index k,
                                          const LanczosOptions& options = {});
Eigen::VectorXd top_eigenvalues_iterative(const MaxKernel<double>& kernel, Eigen::Index k,
                                          const LanczosOptions& options = {});
Eigen::VectorXd top_eigenvalues_iterative(const Eigen::MatrixXd& matrix, Eigen::Index k,
                                          const LanczosOptions& options = {});

enum class MeasureKind { mu, kappa };

std::string_view to_string(MeasureKind kind) noexcept;
MeasureKind parse_measure_kind(std::string_view text);

/// Empirical spectral measure: mu atoms are lambda_i / n of A^{n,m}; kappa atoms
/// are eps * lambda_i of the eps-truncated matrix. Atoms are descending.
/// A complete measure has exactly n atoms; a partial one holds only the top ranks.
struct SpectralMeasure {
    MeasureKind kind = MeasureKind::mu;
    Eigen::VectorXd atoms;
    std::int64_t n = 0;
    std::int64_t m = 0;
    double alpha = 0.0;
    std::optional<double> eps;
    LeakSemantics semantics = LeakSemantics::remove;
    bool complete = true;
};

/// `top_k` empty: dense full spectrum. Otherwise the top_k atoms by Lanczos.
SpectralMeasure spectral_measure_mu(const ChargeFlowGraph& graph, std::optional<Eigen::Index> top_k = {},
                                    const DenseOptions& dense = {});
SpectralMeasure spectral_measure_kappa(const ChargeFlowGraph& graph, double eps,
                                       std::optional<Eigen::Index> top_k = {},
                                       const DenseOptions& dense = {});

enum class MomentEstimator { exact, stochastic };

struct MomentEstimate {
    int order = 1;
    double value = 0.0;
    double std_error = 0.0;  ///< zero for the exact estimator
    MomentEstimator estimator = MomentEstimator::exact;
};

/// Sum of atoms^k of a complete measure.
MomentEstimate trace_moment(const SpectralMeasure& measure, int k);

struct HutchinsonOptions {
    int probes = 64;
    std::uint64_t seed = 0x4a7c;
};

/// Hutchinson estimate of tr((A/n)^k) with Rademacher probes.
MomentEstimate trace_moment(const ChargeFlowGraph& graph, int k, const HutchinsonOptions& options = {});

} // namespace wta
