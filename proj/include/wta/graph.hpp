#pragma once

#include "wta/max_kernel.hpp"
#include "wta/types.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace wta {

/// One stored multiplicity of the charge-flow matrix, lower triangle (i >= j), 1-based ranks.
struct GraphEntry {
    Rank i = 0;
    Rank j = 0;
    std::int64_t multiplicity = 0;

    friend bool operator==(const GraphEntry&, const GraphEntry&) = default;
};

/// Symmetric integer multiplicity matrix A^{n,m} of a charge-flow (spike-flow) network.
///
/// Storage is sparse, keyed by (max, min) rank pair and sorted row-major over
/// the lower triangle. Diagonal entries count leak events. Immutable once built.
class ChargeFlowGraph {
public:
    ChargeFlowGraph() = default;
    ChargeFlowGraph(std::int64_t n, std::int64_t m, double alpha, LeakSemantics semantics,
                    std::vector<GraphEntry> entries);

    std::int64_t n() const noexcept { return n_; }
    std::int64_t m() const noexcept { return m_; }
    double alpha() const noexcept { return alpha_; }
    LeakSemantics semantics() const noexcept { return semantics_; }
    std::span<const GraphEntry> entries() const noexcept { return entries_; }

    /// A_ij for 1-based ranks, either order.
    std::int64_t at(Rank i, Rank j) const;

    std::int64_t trace() const noexcept;
    /// Sum over i > j of A_ij (total downward moves).
    std::int64_t off_diagonal_mass() const noexcept;

    Eigen::SparseMatrix<double> sparse() const;
    Eigen::MatrixXd dense() const;

    friend bool operator==(const ChargeFlowGraph&, const ChargeFlowGraph&) = default;

private:
    std::int64_t n_ = 0;
    std::int64_t m_ = 0;
    double alpha_ = 0.0;
    LeakSemantics semantics_ = LeakSemantics::remove;
    std::vector<GraphEntry> entries_;
};

/// Accumulates edge events; merging builders is additive and order independent.
class GraphBuilder {
public:
    void add(Rank i, Rank j, std::int64_t count = 1);
    void merge(const GraphBuilder& other);
    ChargeFlowGraph build(std::int64_t n, std::int64_t m, double alpha,
                          LeakSemantics semantics) const;

private:
    std::unordered_map<std::uint64_t, std::int64_t> counts_;
};

/// Number of leading ranks removed by epsilon truncation, ceil(eps * n).
std::int64_t truncation_rank(std::int64_t n, double eps);

/// Zero all rows and columns of rank <= ceil(eps * n); n and m are unchanged.
ChargeFlowGraph truncate(const ChargeFlowGraph& graph, double eps);

/// Per-vertex degrees, index 0 is rank 1. A leak at i counts toward both
/// out- and in-degree of i.
struct DegreeSummary {
    std::vector<std::int64_t> out;
    std::vector<std::int64_t> in;
    std::vector<std::int64_t> total;
};

DegreeSummary degrees(const ChargeFlowGraph& graph);

enum class KernelKind { limit, exact_remove, exact_stay };

/// Kernel matching the law of a graph simulated under `s` (freeze behaves as remove).
constexpr KernelKind exact_kernel_for(LeakSemantics s) noexcept {
    return s == LeakSemantics::stay ? KernelKind::exact_stay : KernelKind::exact_remove;
}

/// E[A^{n,m}] in structured form. `limit` is m / (i v j)^2 including the
/// diagonal; the exact kinds are m times the finite-n edge probabilities.
MaxKernel<double> expected_kernel(std::int64_t n, std::int64_t m, KernelKind kind);

/// Dense E[A^{n,m}]; n <= 5000.
Eigen::MatrixXd expected_adjacency(std::int64_t n, std::int64_t m, KernelKind kind);

} // namespace wta
