#include "wta/dynamics.hpp"

#include "wta/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace wta {

std::string_view to_string(Engine e) noexcept {
    switch (e) {
    case Engine::unitwise: return "unitwise";
    case Engine::global: return "global";
    case Engine::poisson: return "poisson";
    }
    return "unitwise";
}

Engine parse_engine(std::string_view text) {
    if (text == "unitwise") return Engine::unitwise;
    if (text == "global") return Engine::global;
    if (text == "poisson") return Engine::poisson;
    throw DomainError("unknown engine '" + std::string(text) + "' (expected unitwise, global or poisson)");
}

std::int64_t SimulationConfig::units() const {
    return static_cast<std::int64_t>(std::floor(alpha * static_cast<double>(n)));
}

void SimulationConfig::validate() const {
    if (n < 1) throw DomainError("n must be >= 1");
    if (n > std::numeric_limits<Rank>::max()) throw DomainError("n exceeds the rank range");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
    if (units() < 1) throw DomainError("floor(alpha * n) must be >= 1");
    if (replicates < 1) throw DomainError("replicates must be >= 1");
    if (threads < 1) throw DomainError("threads must be >= 1");
    if (engine == Engine::poisson && semantics != LeakSemantics::stay)
        throw DomainError("the poisson engine realizes the stay chain only; use --semantics stay");
}

Trajectory sample_trajectory(std::int64_t n, std::optional<std::int64_t> start, LeakSemantics semantics,
                             CounterRng& rng) {
    if (n < 1) throw DomainError("sample_trajectory: n must be >= 1");
    std::int64_t v = start ? *start : rng.rank(n);
    if (v < 1 || v > n)
        throw DomainError("sample_trajectory: start rank " + std::to_string(v) + " outside 1.." + std::to_string(n));

    Trajectory out;
    out.visits.push_back(static_cast<Rank>(v));
    for (;;) {
        if (semantics == LeakSemantics::stay) {
            if (v == 1) break;
            // Self-picks above rank 1 are no-ops: the next effective pick is uniform on {1..v-1}.
            v = rng.rank(v - 1);
        } else {
            const std::int64_t next = rng.rank(v);
            if (next == v) break;
            v = next;
        }
        out.visits.push_back(static_cast<Rank>(v));
    }
    out.terminal = out.visits.back();
    return out;
}

Trajectory sample_trajectory_poisson(std::int64_t n, CounterRng& rng, PoissonConditioning mode) {
    if (n < 1) throw DomainError("sample_trajectory_poisson: n must be >= 1");
    const double log_n = std::log(static_cast<double>(n));
    for (;;) {
        Trajectory out;
        bool duplicate = false;
        double eta = 0.0;
        for (;;) {
            eta -= std::log(rng.uniform());
            // Points beyond log n all map to rank 1, where the chain stops.
            const auto rank = eta >= log_n
                                  ? std::int64_t{1}
                                  : std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * std::exp(-eta))), 1, n);
            if (!out.visits.empty() && out.visits.back() == rank) {
                duplicate = rank > 1;
                if (duplicate && mode == PoissonConditioning::reject) break;
                if (rank == 1) break;
                continue;
            }
            out.visits.push_back(static_cast<Rank>(rank));
            if (rank == 1) break;
        }
        if (duplicate && mode == PoissonConditioning::reject) continue;
        out.terminal = out.visits.back();
        return out;
    }
}

void record(const Trajectory& trajectory, LeakSemantics semantics, GraphBuilder& builder) {
    if (trajectory.empty()) return;
    for (std::size_t k = 0; k + 1 < trajectory.visits.size(); ++k)
        builder.add(trajectory.visits[k], trajectory.visits[k + 1]);
    if (records_leaks(semantics)) builder.add(trajectory.terminal, trajectory.terminal);
}

namespace {

template <typename Sampler>
ChargeFlowGraph accumulate_units(const SimulationConfig& config, std::uint64_t replicate, Sampler&& sampler) {
    config.validate();
    const std::int64_t m = config.units();
    std::vector<GraphBuilder> local(static_cast<std::size_t>(std::max(1, config.threads)));
    parallel_chunks(m, config.threads, [&](std::int64_t begin, std::int64_t end, int worker) {
        auto& builder = local[static_cast<std::size_t>(worker)];
        for (std::int64_t unit = begin; unit < end; ++unit) {
            CounterRng rng = unit_stream(config.seed, replicate, static_cast<std::uint64_t>(unit));
            record(sampler(rng), config.semantics, builder);
        }
    });
    for (std::size_t w = 1; w < local.size(); ++w) local[0].merge(local[w]);
    return local[0].build(config.n, m, config.alpha, config.semantics);
}

} // namespace

ChargeFlowGraph simulate_units(const SimulationConfig& config, std::uint64_t replicate) {
    return accumulate_units(config, replicate, [&](CounterRng& rng) {
        return sample_trajectory(config.n, std::nullopt, config.semantics, rng);
    });
}

ChargeFlowGraph simulate_poisson(const SimulationConfig& config, std::uint64_t replicate) {
    SimulationConfig checked = config;
    checked.engine = Engine::poisson;
    return accumulate_units(checked, replicate, [&](CounterRng& rng) {
        return sample_trajectory_poisson(config.n, rng);
    });
}

GlobalRun simulate_global(const SimulationConfig& config, std::uint64_t replicate, std::int64_t step_cap) {
    config.validate();
    const std::int64_t n = config.n;
    const std::int64_t m = config.units();
    CounterRng rng(config.seed, replicate, CounterRng::sequential);

    // Units stored at each vertex, ordered so the lowest-numbered one moves first.
    std::vector<std::set<std::int64_t>> stored(static_cast<std::size_t>(n + 1));
    for (std::int64_t unit = 0; unit < m; ++unit) stored[static_cast<std::size_t>(rng.rank(n))].insert(unit);

    GraphBuilder builder;
    GlobalRun run;
    std::int64_t active = m;
    while (active > 0) {
        if (run.steps >= step_cap)
            throw NumericError("simulate_global: step cap " + std::to_string(step_cap) + " reached with " +
                               std::to_string(active) + " units still active");
        ++run.steps;
        const auto source = rng.rank(n);
        const auto target = rng.rank(n);
        auto& here = stored[static_cast<std::size_t>(source)];
        if (here.empty() || target > source) continue;
        if (target < source) {
            const auto unit = *here.begin();
            here.erase(here.begin());
            stored[static_cast<std::size_t>(target)].insert(unit);
            builder.add(static_cast<Rank>(source), static_cast<Rank>(target));
            ++run.effective_events;
            continue;
        }
        // Self-pick.
        if (config.semantics == LeakSemantics::stay && source > 1) continue;
        here.erase(here.begin());
        --active;
        ++run.effective_events;
        if (records_leaks(config.semantics)) builder.add(static_cast<Rank>(source), static_cast<Rank>(source));
    }
    run.graph = builder.build(n, m, config.alpha, config.semantics);
    return run;
}

ChargeFlowGraph simulate(const SimulationConfig& config, std::uint64_t replicate) {
    switch (config.engine) {
    case Engine::unitwise: return simulate_units(config, replicate);
    case Engine::global: return simulate_global(config, replicate).graph;
    case Engine::poisson: return simulate_poisson(config, replicate);
    }
    return simulate_units(config, replicate);
}

Trajectory restrict_trajectory(const Trajectory& trajectory, std::int64_t n_small) {
    const auto first = std::find_if(trajectory.visits.begin(), trajectory.visits.end(),
                                    [&](Rank v) { return v <= n_small; });
    Trajectory out;
    if (first == trajectory.visits.end()) return out;
    out.visits.assign(first, trajectory.visits.end());
    out.terminal = trajectory.terminal;
    return out;
}

std::vector<ChargeFlowGraph> coupled_family(std::span<const std::int64_t> sizes, double alpha,
                                            LeakSemantics semantics, std::uint64_t seed, std::uint64_t replicate,
                                            int threads) {
    if (sizes.empty()) throw DomainError("coupled_family: empty size list");
    for (std::size_t k = 1; k < sizes.size(); ++k)
        if (sizes[k] <= sizes[k - 1]) throw DomainError("coupled_family: sizes must be strictly ascending");

    SimulationConfig largest{.n = sizes.back(), .alpha = alpha, .semantics = semantics, .seed = seed};
    largest.threads = threads;
    largest.validate();

    std::vector<std::int64_t> units(sizes.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        units[k] = static_cast<std::int64_t>(std::floor(alpha * static_cast<double>(sizes[k])));
        if (units[k] < 1) throw DomainError("coupled_family: floor(alpha * n) must be >= 1 for every size");
    }

    const int workers = std::max(1, threads);
    std::vector<std::vector<GraphBuilder>> local(static_cast<std::size_t>(workers),
                                                 std::vector<GraphBuilder>(sizes.size()));
    parallel_chunks(units.back(), workers, [&](std::int64_t begin, std::int64_t end, int worker) {
        auto& builders = local[static_cast<std::size_t>(worker)];
        for (std::int64_t unit = begin; unit < end; ++unit) {
            CounterRng rng = unit_stream(seed, replicate, static_cast<std::uint64_t>(unit));
            const Trajectory path = sample_trajectory(sizes.back(), std::nullopt, semantics, rng);
            for (std::size_t k = 0; k < sizes.size(); ++k) {
                if (unit >= units[k]) continue;
                record(k + 1 == sizes.size() ? path : restrict_trajectory(path, sizes[k]), semantics, builders[k]);
            }
        }
    });

    std::vector<ChargeFlowGraph> out;
    out.reserve(sizes.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        for (int w = 1; w < workers; ++w) local[0][k].merge(local[static_cast<std::size_t>(w)][k]);
        out.push_back(local[0][k].build(sizes[k], units[k], alpha, semantics));
    }
    return out;
}

} // namespace wta
