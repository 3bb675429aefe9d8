#include "doctest.h"

#include "wta/dynamics.hpp"
#include "wta/oracle.hpp"
#include "wta/stats.hpp"

#include <cmath>
#include <map>
#include <string>

using namespace wta;

namespace {

SimulationConfig config(std::int64_t n, double alpha, LeakSemantics s, std::uint64_t seed = 1,
                        Engine engine = Engine::unitwise) {
    SimulationConfig c;
    c.n = n;
    c.alpha = alpha;
    c.semantics = s;
    c.seed = seed;
    c.engine = engine;
    return c;
}

std::string outcome_key(const ChargeFlowGraph& g) {
    std::string key;
    for (const auto& e : g.entries())
        key += std::to_string(e.i) + ',' + std::to_string(e.j) + ':' + std::to_string(e.multiplicity) + ';';
    return key;
}

} // namespace

TEST_CASE("counter-keyed streams") {
    CounterRng a(7, 3, 11), b(7, 3, 11), c(7, 3, 12);
    for (int k = 0; k < 10; ++k) {
        const auto x = a();
        CHECK(x == b());
        CHECK(x != c());
    }
    CounterRng r(1);
    std::map<std::int64_t, std::int64_t> counts;
    for (int k = 0; k < 60000; ++k) ++counts[r.rank(6)];
    CHECK(counts.size() == 6);
    for (const auto& [face, count] : counts) {
        CHECK(face >= 1);
        CHECK(face <= 6);
        CHECK(std::abs(binomial_z(count / 60000.0, 1.0 / 6, 60000)) < 4.5);
    }
    for (int k = 0; k < 1000; ++k) {
        const double u = r.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("single trajectories") {
    CounterRng rng(3);
    for (LeakSemantics s : {LeakSemantics::remove, LeakSemantics::stay, LeakSemantics::freeze}) {
        const auto forced = sample_trajectory(5, 1, s, rng);
        CHECK(forced.visits == std::vector<Rank>{1});
        CHECK(forced.terminal == 1);
    }

    int leak_at_two = 0;
    const int samples = 40000;
    for (int k = 0; k < samples; ++k) {
        CounterRng unit = unit_stream(5, 0, static_cast<std::uint64_t>(k));
        const auto path = sample_trajectory(2, 2, LeakSemantics::remove, unit);
        if (path.visits == std::vector<Rank>{2}) {
            ++leak_at_two;
        } else {
            CHECK(path.visits == std::vector<Rank>{2, 1});
        }
    }
    CHECK(std::abs(binomial_z(double(leak_at_two) / samples, 0.5, samples)) < 4.0);

    for (int k = 0; k < 2000; ++k) {
        CounterRng unit = unit_stream(6, 0, static_cast<std::uint64_t>(k));
        const auto path = sample_trajectory(50, std::nullopt, LeakSemantics::stay, unit);
        CHECK(path.terminal == 1);
        for (std::size_t v = 1; v < path.visits.size(); ++v) CHECK(path.visits[v] < path.visits[v - 1]);
    }
    CHECK_THROWS_AS(sample_trajectory(5, 6, LeakSemantics::remove, rng), DomainError);
    CHECK_THROWS_AS(sample_trajectory(0, std::nullopt, LeakSemantics::remove, rng), DomainError);
}

TEST_CASE("visit probability of rank 2 under remove") {
    const int n = 1000, samples = 200000;
    int hits = 0;
    for (int k = 0; k < samples; ++k) {
        CounterRng unit = unit_stream(8, 0, static_cast<std::uint64_t>(k));
        for (Rank v : sample_trajectory(n, std::nullopt, LeakSemantics::remove, unit).visits) hits += v == 2;
    }
    const double expected = (n + 1.0) / (n * 3.0);
    CHECK(std::abs(binomial_z(double(hits) / samples, expected, samples)) < 3.0);
}

TEST_CASE("Poisson record representation") {
    const int n = 100, samples = 100000;
    std::map<int, std::int64_t> visits;
    std::map<std::size_t, std::int64_t> length_poisson, length_stay;
    for (int k = 0; k < samples; ++k) {
        CounterRng a = unit_stream(9, 0, static_cast<std::uint64_t>(k));
        CounterRng b = unit_stream(9, 1, static_cast<std::uint64_t>(k));
        const auto path = sample_trajectory_poisson(n, a);
        for (Rank v : path.visits) ++visits[v];
        CHECK(path.terminal == 1);
        ++length_poisson[path.visits.size()];
        ++length_stay[sample_trajectory(n, std::nullopt, LeakSemantics::stay, b).visits.size()];
    }
    CHECK(visits[1] == samples);
    for (int u : {2, 4, 10, 50}) {
        INFO("U = " << u);
        CHECK(std::abs(binomial_z(double(visits[u]) / samples, 1.0 / u, samples)) < 3.0);
    }
    CHECK_FALSE(chi_square_homogeneity(length_poisson, length_stay).rejects(0.01));

    // Literal conditioning on at most one point per rank interval changes the law:
    // P(visit U) = mu / (1 + mu) with mu = log(U / (U - 1)).
    int hits = 0;
    const int reject_samples = 100000;
    for (int k = 0; k < reject_samples; ++k) {
        CounterRng rng = unit_stream(10, 0, static_cast<std::uint64_t>(k));
        for (Rank v : sample_trajectory_poisson(10, rng, PoissonConditioning::reject).visits) hits += v == 4;
    }
    const double mu = std::log(4.0 / 3.0);
    const double freq = double(hits) / reject_samples;
    CHECK(mu / (1 + mu) == doctest::Approx(0.2234).epsilon(1e-3));
    CHECK(std::abs(binomial_z(freq, mu / (1 + mu), reject_samples)) < 3.0);
    CHECK(std::abs(binomial_z(freq, 0.25, reject_samples)) > 5.0);
}

TEST_CASE("unit-wise simulation") {
    const auto tiny = simulate_units(config(1, 3, LeakSemantics::remove));
    CHECK(tiny.at(1, 1) == 3);
    CHECK(tiny.entries().size() == 1);

    for (LeakSemantics s : {LeakSemantics::remove, LeakSemantics::freeze}) {
        const auto g = simulate_units(config(300, 1.5, s, 4));
        CHECK(g.m() == 450);
        CHECK(g.trace() == 450);
    }
    const auto stay = simulate_units(config(300, 1.0, LeakSemantics::stay, 4));
    CHECK(stay.trace() == 0);

    // Freeze follows the same law, and with the same streams the same graph, as remove.
    auto removed = simulate_units(config(200, 1.0, LeakSemantics::remove, 5));
    auto frozen = simulate_units(config(200, 1.0, LeakSemantics::freeze, 5));
    CHECK(std::equal(removed.entries().begin(), removed.entries().end(), frozen.entries().begin(),
                     frozen.entries().end()));

    auto threaded = config(500, 1.0, LeakSemantics::remove, 6);
    const auto serial = simulate_units(threaded);
    threaded.threads = 4;
    CHECK(simulate_units(threaded) == serial);
    CHECK_FALSE(simulate_units(threaded, 1) == serial);
}

TEST_CASE("mean edge multiplicity matches the exact law") {
    const int n = 1000, replicates = 200;
    double sum = 0, sum_sq = 0;
    for (int r = 0; r < replicates; ++r) {
        const double x = static_cast<double>(simulate_units(config(n, 1.0, LeakSemantics::remove, 11), r).at(10, 3));
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / replicates;
    const double se = std::sqrt((sum_sq / replicates - mean * mean) / (replicates - 1));
    const double expected = 1000.0 * (n + 1.0) / (n * 10.0 * 11.0);
    CHECK(expected == doctest::Approx(9.10).epsilon(1e-3));
    CHECK(std::abs(mean - expected) < 3.5 * se);
}

TEST_CASE("global event loop") {
    const auto tiny = simulate_global(config(1, 2, LeakSemantics::remove));
    CHECK(tiny.graph.at(1, 1) == 2);
    CHECK(tiny.effective_events == 2);

    // Cross-engine equivalence on the finite outcome set of n = 3.
    std::map<std::string, std::int64_t> global, unitwise;
    const int runs = 20000;
    for (int r = 0; r < runs; ++r) {
        ++global[outcome_key(simulate_global(config(3, 1, LeakSemantics::remove, 12), r).graph)];
        ++unitwise[outcome_key(simulate_units(config(3, 1, LeakSemantics::remove, 13), r))];
    }
    CHECK(global.size() > 10);
    CHECK_FALSE(chi_square_homogeneity(global, unitwise).rejects(0.01));

    // Effective events = transfers + terminations = sum over units of the path length.
    const auto law = exact_edge_probability(20, LeakSemantics::remove);
    const double expected = 20 * law.visit.sum();
    double sum = 0, sum_sq = 0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
        const double x = static_cast<double>(simulate_global(config(20, 1, LeakSemantics::remove, 14), r).effective_events);
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sum_sq / reps - mean * mean) / (reps - 1));
    CHECK(std::abs(mean - expected) < 3.5 * se);

    CHECK_THROWS_AS(simulate_global(config(50, 1, LeakSemantics::remove), 0, 10), NumericError);
}

TEST_CASE("configuration validation") {
    CHECK_THROWS_AS(config(0, 1, LeakSemantics::remove).validate(), DomainError);
    CHECK_THROWS_AS(config(10, 0.05, LeakSemantics::remove).validate(), DomainError);
    CHECK_THROWS_AS(config(10, 1, LeakSemantics::remove, 0, Engine::poisson).validate(), DomainError);
    CHECK_NOTHROW(config(10, 1, LeakSemantics::stay, 0, Engine::poisson).validate());
    CHECK(config(10, 1.55, LeakSemantics::stay).units() == 15);
    CHECK(parse_engine("global") == Engine::global);
    CHECK_THROWS_AS(parse_engine("bogus"), DomainError);
    CHECK(parse_semantics("freeze") == LeakSemantics::freeze);
}

TEST_CASE("restriction and coupling") {
    const Trajectory path{{9, 4, 2}, 2};
    CHECK(restrict_trajectory(path, 5).visits == std::vector<Rank>{4, 2});
    CHECK(restrict_trajectory(path, 10) == path);
    CHECK(restrict_trajectory(Trajectory{{9}, 9}, 5).empty());

    const std::int64_t single[] = {400};
    const auto one = coupled_family(single, 1.0, LeakSemantics::remove, 21);
    CHECK(one.front() == simulate_units(config(400, 1.0, LeakSemantics::remove, 21)));

    const std::int64_t sizes[] = {500, 1000};
    for (int r = 0; r < 3; ++r) {
        const auto family = coupled_family(sizes, 1.0, LeakSemantics::remove, 22, r);
        CHECK(family[0].m() == 500);
        for (const auto& e : family[0].entries()) CHECK(e.multiplicity <= family[1].at(e.i, e.j));
    }
    const std::int64_t unsorted[] = {1000, 500};
    CHECK_THROWS_AS(coupled_family(unsorted, 1.0, LeakSemantics::remove, 0), DomainError);
}
