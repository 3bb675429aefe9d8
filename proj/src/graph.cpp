#include "wta/graph.hpp"

#include "wta/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wta {

std::string_view to_string(LeakSemantics s) noexcept {
    switch (s) {
    case LeakSemantics::remove: return "remove";
    case LeakSemantics::stay: return "stay";
    case LeakSemantics::freeze: return "freeze";
    }
    return "remove";
}

LeakSemantics parse_semantics(std::string_view text) {
    if (text == "remove") return LeakSemantics::remove;
    if (text == "stay") return LeakSemantics::stay;
    if (text == "freeze") return LeakSemantics::freeze;
    throw DomainError("unknown semantics '" + std::string(text) + "' (expected remove, stay or freeze)");
}

namespace {

constexpr std::uint64_t pack(Rank i, Rank j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) | static_cast<std::uint32_t>(j);
}

bool entry_less(const GraphEntry& a, const GraphEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
}

} // namespace

ChargeFlowGraph::ChargeFlowGraph(std::int64_t n, std::int64_t m, double alpha, LeakSemantics semantics,
                                 std::vector<GraphEntry> entries)
    : n_(n), m_(m), alpha_(alpha), semantics_(semantics), entries_(std::move(entries)) {
    if (n < 1) throw DomainError("ChargeFlowGraph: n must be >= 1");
    for (auto& e : entries_) {
        if (e.i < e.j) std::swap(e.i, e.j);
        if (e.j < 1 || e.i > n) throw DomainError("ChargeFlowGraph: rank out of range");
        if (e.multiplicity < 0) throw DomainError("ChargeFlowGraph: negative multiplicity");
    }
    std::sort(entries_.begin(), entries_.end(), entry_less);
    // Coalesce duplicates and drop zeros.
    std::vector<GraphEntry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (!merged.empty() && merged.back().i == e.i && merged.back().j == e.j)
            merged.back().multiplicity += e.multiplicity;
        else
            merged.push_back(e);
    }
    std::erase_if(merged, [](const GraphEntry& e) { return e.multiplicity == 0; });
    entries_ = std::move(merged);
}

std::int64_t ChargeFlowGraph::at(Rank i, Rank j) const {
    if (i < j) std::swap(i, j);
    const GraphEntry probe{i, j, 0};
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), probe, entry_less);
    return (it != entries_.end() && it->i == i && it->j == j) ? it->multiplicity : 0;
}

std::int64_t ChargeFlowGraph::trace() const noexcept {
    std::int64_t total = 0;
    for (const auto& e : entries_)
        if (e.i == e.j) total += e.multiplicity;
    return total;
}

std::int64_t ChargeFlowGraph::off_diagonal_mass() const noexcept {
    std::int64_t total = 0;
    for (const auto& e : entries_)
        if (e.i != e.j) total += e.multiplicity;
    return total;
}

Eigen::SparseMatrix<double> ChargeFlowGraph::sparse() const {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * entries_.size());
    for (const auto& e : entries_) {
        const auto value = static_cast<double>(e.multiplicity);
        triplets.emplace_back(e.i - 1, e.j - 1, value);
        if (e.i != e.j) triplets.emplace_back(e.j - 1, e.i - 1, value);
    }
    Eigen::SparseMatrix<double> out(n_, n_);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

Eigen::MatrixXd ChargeFlowGraph::dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& e : entries_) {
        out(e.i - 1, e.j - 1) = static_cast<double>(e.multiplicity);
        out(e.j - 1, e.i - 1) = static_cast<double>(e.multiplicity);
    }
    return out;
}

void GraphBuilder::add(Rank i, Rank j, std::int64_t count) {
    if (i < j) std::swap(i, j);
    counts_[pack(i, j)] += count;
}

void GraphBuilder::merge(const GraphBuilder& other) {
    for (const auto& [key, count] : other.counts_) counts_[key] += count;
}

ChargeFlowGraph GraphBuilder::build(std::int64_t n, std::int64_t m, double alpha, LeakSemantics semantics) const {
    std::vector<GraphEntry> entries;
    entries.reserve(counts_.size());
    for (const auto& [key, count] : counts_)
        entries.push_back({static_cast<Rank>(key >> 32), static_cast<Rank>(key & 0xffffffffU), count});
    return ChargeFlowGraph(n, m, alpha, semantics, std::move(entries));
}

std::int64_t truncation_rank(std::int64_t n, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("truncation: eps must lie in (0, 1), got " + std::to_string(eps));
    return std::min<std::int64_t>(n, static_cast<std::int64_t>(std::ceil(eps * static_cast<double>(n))));
}

ChargeFlowGraph truncate(const ChargeFlowGraph& graph, double eps) {
    const std::int64_t cut = truncation_rank(graph.n(), eps);
    std::vector<GraphEntry> kept;
    for (const auto& e : graph.entries())
        if (e.j > cut) kept.push_back(e);  // e.j is the smaller rank
    return ChargeFlowGraph(graph.n(), graph.m(), graph.alpha(), graph.semantics(), std::move(kept));
}

DegreeSummary degrees(const ChargeFlowGraph& graph) {
    const auto n = static_cast<std::size_t>(graph.n());
    DegreeSummary out{std::vector<std::int64_t>(n, 0), std::vector<std::int64_t>(n, 0),
                      std::vector<std::int64_t>(n, 0)};
    for (const auto& e : graph.entries()) {
        out.out[e.i - 1] += e.multiplicity;  // transfers away from the higher rank
        out.in[e.j - 1] += e.multiplicity;
    }
    for (std::size_t v = 0; v < n; ++v) out.total[v] = out.out[v] + out.in[v];
    return out;
}

MaxKernel<double> expected_kernel(std::int64_t n, std::int64_t m, KernelKind kind) {
    if (n < 1 || m < 1) throw DomainError("expected_kernel: need n >= 1 and m >= 1");
    const auto mass = static_cast<double>(m);
    if (kind == KernelKind::limit) {
        Eigen::VectorXd g(n);
        for (std::int64_t u = 1; u <= n; ++u) g(u - 1) = mass / (static_cast<double>(u) * static_cast<double>(u));
        return MaxKernel<double>::from_max_law(g);
    }
    const auto semantics = kind == KernelKind::exact_stay ? LeakSemantics::stay : LeakSemantics::remove;
    return mass * exact_edge_probability(n, semantics).edge;
}

Eigen::MatrixXd expected_adjacency(std::int64_t n, std::int64_t m, KernelKind kind) {
    if (n > 5000) throw DomainError("expected_adjacency: dense output limited to n <= 5000");
    return expected_kernel(n, m, kind).dense();
}

} // namespace wta
