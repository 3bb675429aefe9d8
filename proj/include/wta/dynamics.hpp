#pragma once

#include "wta/graph.hpp"
#include "wta/rng.hpp"
#include "wta/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace wta {

/// Path of one charge unit: strictly decreasing ranks, ending at the rank where
/// the unit terminated. An empty path means the unit never entered the system
/// (only produced by restriction).
struct Trajectory {
    std::vector<Rank> visits;
    Rank terminal = 0;

    bool empty() const noexcept { return visits.empty(); }
    /// Number of downward moves (edge traversals).
    std::size_t moves() const noexcept { return visits.empty() ? 0 : visits.size() - 1; }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

enum class Engine { unitwise, global, poisson };

std::string_view to_string(Engine e) noexcept;
Engine parse_engine(std::string_view text);

struct SimulationConfig {
    std::int64_t n = 1;
    double alpha = 1.0;
    LeakSemantics semantics = LeakSemantics::remove;
    std::uint64_t seed = 0;
    Engine engine = Engine::unitwise;
    int replicates = 1;
    int threads = 1;

    /// m = floor(alpha * n).
    std::int64_t units() const;
    /// Throws DomainError for n < 1, alpha <= 0, m < 1, replicates/threads < 1,
    /// or the poisson engine under a semantics other than stay.
    void validate() const;
};

/// Random stream of unit `unit` in replicate `replicate`.
inline CounterRng unit_stream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t unit) {
    return CounterRng(seed, replicate, unit);
}

/// Simulates the effective events of one unit: at v the next pick is uniform on
/// {1..v}; a self-pick terminates under remove/freeze and is a no-op under stay
/// (except at v = 1, where the unit terminates). `start` empty = uniform on {1..n}.
Trajectory sample_trajectory(std::int64_t n, std::optional<std::int64_t> start,
                             LeakSemantics semantics, CounterRng& rng);

/// How duplicate Poisson points inside one rank interval are handled.
///  - collapse: keep one visit per interval (distinct-visit chain of `stay`).
///  - reject:   resample the whole path (literal conditioning; different law).
enum class PoissonConditioning { collapse, reject };

/// Record representation: visits are ceil(n * exp(-eta_i)) for the points eta_i of a
/// unit-intensity Poisson process on the positive half-line, stopping at rank 1.
Trajectory sample_trajectory_poisson(std::int64_t n, CounterRng& rng,
                                     PoissonConditioning mode = PoissonConditioning::collapse);

/// Adds the edges of one trajectory: one (v_k, v_{k+1}) per move, plus a
/// diagonal entry at the terminal rank when the semantics records leaks.
void record(const Trajectory& trajectory, LeakSemantics semantics, GraphBuilder& builder);

/// m independent unit trajectories with uniform starts. Unit l of replicate r
/// draws from unit_stream(seed, r, l), so the result does not depend on threads.
ChargeFlowGraph simulate_units(const SimulationConfig& config, std::uint64_t replicate = 0);

/// As simulate_units but trajectories come from the Poisson representation (stay only).
ChargeFlowGraph simulate_poisson(const SimulationConfig& config, std::uint64_t replicate = 0);

struct GlobalRun {
    ChargeFlowGraph graph;
    std::int64_t effective_events = 0;  ///< transfers + terminations
    std::int64_t steps = 0;             ///< all (source, target) draws
};

/// Literal event loop over uniform (source, target) pairs. Transfers move the
/// lowest-numbered unit stored at the source. Single threaded.
/// Throws NumericError when `step_cap` draws pass without all units terminating.
GlobalRun simulate_global(const SimulationConfig& config, std::uint64_t replicate = 0,
                          std::int64_t step_cap = std::int64_t{1} << 40);

/// Dispatches on config.engine.
ChargeFlowGraph simulate(const SimulationConfig& config, std::uint64_t replicate = 0);

/// Suffix of the trajectory from its first visit <= n_small; empty when the
/// unit terminated above n_small.
Trajectory restrict_trajectory(const Trajectory& trajectory, std::int64_t n_small);

/// Coupled graphs for ascending sizes: units are simulated once on the largest
/// size, the graph for n_i uses the first floor(alpha * n_i) units restricted to
/// {1..n_i}. Entries are elementwise nondecreasing along the list.
std::vector<ChargeFlowGraph> coupled_family(std::span<const std::int64_t> sizes, double alpha,
                                            LeakSemantics semantics, std::uint64_t seed,
                                            std::uint64_t replicate = 0, int threads = 1);

} // namespace wta
