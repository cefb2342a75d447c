#pragma once

// Batch experiment runner: seeded Monte Carlo campaigns for the privacy
// (attack), convergence and fidelity studies, persisting per-run CSV records,
// aggregate CSVs and a JSON report.
//
// Seeding: per-run seed = derive_seed(root, cell, run) where `cell` indexes
// the non-noise grid dimension (attack budget for privacy, market sensitivity
// for fidelity, 0 for convergence). The noise scale sigma multiplies a
// unit-scale Laplace draw, so runs are paired across sigma values.

#include "dpnash/attack.hpp"
#include "dpnash/game.hpp"
#include "dpnash/graph.hpp"
#include "dpnash/laplace.hpp"
#include "dpnash/seek.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dpnash {

inline constexpr const char* kToolVersion = "dpnash 0.1.0";

struct GraphConfig {
    std::string type = "fully_connected";  // or "edges"
    std::vector<std::pair<int, int>> edges;
    double omega = 0.1;
};

struct NoiseConfig {
    std::vector<double> sigmas;  // explicit scales; wins over (epsilon, mu_adj)
    std::optional<double> epsilon;
    std::optional<double> mu_adj;
};

struct AttackRunConfig {
    int victim = 0;
    std::vector<int> budgets;  // window lengths B; window is [start, start+B-1]
    long start = 100;
};

struct FidelityRunConfig {
    std::vector<double> a_values{10.0};
    std::string baseline = "oracle";  // "oracle" (direct NE solve) or "seek" (exact-mode run)
};

struct ExperimentConfig {
    std::string kind;  // privacy | convergence | fidelity
    std::vector<ProsumerParams> prosumers;
    MarketParams market;
    GraphConfig graph;
    SeekConfig seek;
    NoiseConfig noise;
    AttackRunConfig attack;
    FidelityRunConfig fidelity;
    int runs = 1;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    int threads = 0;  // 0 = runtime default
    nlohmann::json echo;  // original config document, echoed into the report
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Builds the configured CommGraph for the configured prosumer count.
CommGraph build_graph(const ExperimentConfig& cfg);

// Resolves the sigma grid; records a warning when both sigma and (epsilon,
// mu_adj) are present (sigma wins).
std::vector<double> resolve_sigmas(const ExperimentConfig& cfg, std::string* warning);

struct ExperimentReport {
    nlohmann::json summary;          // aggregates, failure counts, config echo, tool version
    std::vector<std::string> files;  // paths written
};

ExperimentReport run_privacy_experiment(const ExperimentConfig& cfg);
ExperimentReport run_convergence_experiment(const ExperimentConfig& cfg);
ExperimentReport run_fidelity_experiment(const ExperimentConfig& cfg);

// Dispatches on cfg.kind.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace dpnash
