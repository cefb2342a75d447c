#pragma once

// Shared test fixtures: the benchmark six-prosumer market and a random-game
// generator for property tests.

#include "dpnash/analysis.hpp"
#include "dpnash/game.hpp"
#include "dpnash/graph.hpp"
#include "dpnash/types.hpp"

#include <random>
#include <vector>

namespace testutil {

// Benchmark market: six prosumers, a = 100, omega = 0.1.
inline std::vector<dpnash::ProsumerParams> bench_prosumers() {
    return {{0.015, 15.0}, {0.03, 18.0}, {0.02, 25.0},
            {0.015, 20.0}, {0.025, 18.0}, {0.03, 20.0}};
}

inline dpnash::MarketParams bench_market() { return {100.0, 6}; }

struct RandomGame {
    std::vector<dpnash::ProsumerParams> prosumers;
    dpnash::MarketParams market;
    dpnash::CommGraph graph;  // complete graph, random admissible weight
    dpnash::GameCoefficients coeffs;
};

// Complete-graph game with c in [0.005, 0.05], d in [5, 30], a in [20, 200].
inline RandomGame random_game(std::mt19937_64& rng, int min_count = 2, int max_count = 10) {
    std::uniform_int_distribution<int> count_dist(min_count, max_count);
    std::uniform_real_distribution<double> c_dist(0.005, 0.05), d_dist(5.0, 30.0),
        a_dist(20.0, 200.0), u_dist(0.2, 1.0);
    RandomGame g;
    const int count = count_dist(rng);
    for (int i = 0; i < count; ++i) g.prosumers.push_back({c_dist(rng), d_dist(rng)});
    g.market = {a_dist(rng), count};
    g.graph = dpnash::fully_connected(count, u_dist(rng) / static_cast<double>(count));
    g.coeffs = dpnash::derive_coefficients(g.prosumers, g.market);
    return g;
}

// Step size drawn from the middle of the admissible range, away from both the
// tiny-alpha regime (slow mixing inflates the post-convergence envelope) and
// the bound itself.
inline double admissible_alpha(const RandomGame& game, std::mt19937_64& rng) {
    const double bound = dpnash::step_size_bound(game.coeffs, dpnash::spectrum(game.graph));
    std::uniform_real_distribution<double> u(0.25, 0.9);
    return u(rng) * bound;
}

}  // namespace testutil
