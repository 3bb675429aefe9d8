#include "wta/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace wta {

std::string_view to_string(MeasureKind kind) noexcept { return kind == MeasureKind::mu ? "mu" : "kappa"; }

MeasureKind parse_measure_kind(std::string_view text) {
    if (text == "mu") return MeasureKind::mu;
    if (text == "kappa") return MeasureKind::kappa;
    throw DomainError("unknown measure kind '" + std::string(text) + "' (expected mu or kappa)");
}

namespace {

void check_dense_input(const Eigen::MatrixXd& matrix, const DenseOptions& options) {
    if (matrix.rows() != matrix.cols()) throw DomainError("eigenvalues_dense: matrix is not square");
    if (matrix.rows() > options.cap)
        throw DomainError("eigenvalues_dense: dimension " + std::to_string(matrix.rows()) + " exceeds dense cap " +
                          std::to_string(options.cap));
    const double scale = matrix.cwiseAbs().maxCoeff();
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (asym > options.symmetry_tol * std::max(scale, 1e-300))
        throw DomainError("eigenvalues_dense: matrix is not symmetric (max |A - A^T| = " + std::to_string(asym) + ")");
}

} // namespace

Eigen::VectorXd eigenvalues_dense(const Eigen::MatrixXd& matrix, const DenseOptions& options) {
    if (matrix.size() == 0) return {};
    check_dense_input(matrix, options);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigenvalues_dense: QR iteration did not converge (dimension " +
                           std::to_string(matrix.rows()) + ")");
    return solver.eigenvalues().reverse();
}

EigenPairs eigenpairs_dense(const Eigen::MatrixXd& matrix, const DenseOptions& options) {
    check_dense_input(matrix, options);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericError("eigenpairs_dense: QR iteration did not converge");
    return {solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
}

double max_residual(const Eigen::MatrixXd& matrix, const EigenPairs& pairs, Eigen::Index count) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < std::min(count, pairs.values.size()); ++i) {
        const Eigen::VectorXd v = pairs.vectors.col(i);
        worst = std::max(worst, (matrix * v - pairs.values(i) * v).norm());
    }
    return worst;
}

Eigen::VectorXd top_eigenvalues_iterative(const Eigen::SparseMatrix<double>& matrix, Eigen::Index k,
                                          const LanczosOptions& options) {
    return lanczos_top<double>([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = matrix * x; },
                               matrix.rows(), k, options);
}

Eigen::VectorXd top_eigenvalues_iterative(const MaxKernel<double>& kernel, Eigen::Index k,
                                          const LanczosOptions& options) {
    return lanczos_top<double>([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { kernel.apply(x, y); },
                               kernel.size(), k, options);
}

Eigen::VectorXd top_eigenvalues_iterative(const Eigen::MatrixXd& matrix, Eigen::Index k,
                                          const LanczosOptions& options) {
    return lanczos_top<double>([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = matrix * x; },
                               matrix.rows(), k, options);
}

namespace {

Eigen::VectorXd graph_spectrum(const ChargeFlowGraph& graph, std::optional<Eigen::Index> top_k,
                               const DenseOptions& dense) {
    if (!top_k) return eigenvalues_dense(graph.dense(), dense);
    const Eigen::Index k = std::min<Eigen::Index>(*top_k, graph.n());
    return top_eigenvalues_iterative(graph.sparse(), k);
}

} // namespace

SpectralMeasure spectral_measure_mu(const ChargeFlowGraph& graph, std::optional<Eigen::Index> top_k,
                                    const DenseOptions& dense) {
    SpectralMeasure out;
    out.kind = MeasureKind::mu;
    out.n = graph.n();
    out.m = graph.m();
    out.alpha = graph.alpha();
    out.semantics = graph.semantics();
    out.atoms = graph_spectrum(graph, top_k, dense) / static_cast<double>(graph.n());
    out.complete = out.atoms.size() == graph.n();
    return out;
}

SpectralMeasure spectral_measure_kappa(const ChargeFlowGraph& graph, double eps, std::optional<Eigen::Index> top_k,
                                       const DenseOptions& dense) {
    const ChargeFlowGraph cut = truncate(graph, eps);
    SpectralMeasure out;
    out.kind = MeasureKind::kappa;
    out.n = graph.n();
    out.m = graph.m();
    out.alpha = graph.alpha();
    out.eps = eps;
    out.semantics = graph.semantics();
    if (top_k) {
        out.atoms = eps * graph_spectrum(cut, top_k, dense);
    } else {
        // Rows and columns 1..r are zero: solve the trailing block and add r exact zeros.
        const Eigen::Index r = truncation_rank(graph.n(), eps);
        const Eigen::Index rest = graph.n() - r;
        Eigen::VectorXd all = Eigen::VectorXd::Zero(graph.n());
        if (rest > 0) all.head(rest) = eps * eigenvalues_dense(cut.dense().bottomRightCorner(rest, rest), dense);
        std::sort(all.data(), all.data() + all.size(), std::greater<>());
        out.atoms = std::move(all);
    }
    out.complete = out.atoms.size() == graph.n();
    return out;
}

MomentEstimate trace_moment(const SpectralMeasure& measure, int k) {
    if (k < 1) throw DomainError("trace_moment: order must be >= 1");
    if (!measure.complete) throw DomainError("trace_moment: exact moments need a complete measure");
    return {k, measure.atoms.array().pow(k).sum(), 0.0, MomentEstimator::exact};
}

MomentEstimate trace_moment(const ChargeFlowGraph& graph, int k, const HutchinsonOptions& options) {
    if (k < 1) throw DomainError("trace_moment: order must be >= 1");
    if (options.probes < 2) throw DomainError("trace_moment: need at least two probes");
    const Eigen::SparseMatrix<double> scaled = graph.sparse() / static_cast<double>(graph.n());
    CounterRng rng(options.seed, static_cast<std::uint64_t>(graph.n()), static_cast<std::uint64_t>(k));
    Eigen::VectorXd samples(options.probes);
    Eigen::VectorXd z(graph.n()), y(graph.n());
    for (int p = 0; p < options.probes; ++p) {
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.sign();
        y = z;
        for (int power = 0; power < k; ++power) y = scaled * y;
        samples(p) = z.dot(y);
    }
    const double mean = samples.mean();
    const double var = (samples.array() - mean).square().sum() / (options.probes - 1);
    return {k, mean, std::sqrt(var / options.probes), MomentEstimator::stochastic};
}

} // namespace wta
