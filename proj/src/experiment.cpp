#include "dpnash/experiment.hpp"

#include "dpnash/csv.hpp"
#include "dpnash/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dpnash {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd unit_noise(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = unit_laplace(rng);
    return g;
}

void apply_threads(const ExperimentConfig& cfg) {
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#else
    (void)cfg;
#endif
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_report_json(const ExperimentConfig& cfg, nlohmann::json& summary,
                       ExperimentReport& report) {
    summary["tool_version"] = kToolVersion;
    summary["config"] = cfg.echo;
    const std::string path = out_path(cfg, "report.json");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << summary.dump(2) << "\n";
    report.summary = summary;
    report.files.push_back(path);
}

void audit_close(double got, double expect, const char* what) {
    const double scale = std::max({1.0, std::abs(got), std::abs(expect)});
    const bool both_nan = std::isnan(got) && std::isnan(expect);
    if (!both_nan && std::abs(got - expect) > 1e-9 * scale)
        throw std::logic_error(std::string("self-audit mismatch for ") + what);
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.echo = j;
    cfg.kind = j.value("kind", std::string{});

    const auto& game = j.at("game");
    cfg.market.a = game.at("a").get<double>();
    for (const auto& p : game.at("prosumers"))
        cfg.prosumers.push_back({p.at("c").get<double>(), p.at("d").get<double>()});
    cfg.market.count = static_cast<int>(cfg.prosumers.size());
    if (game.contains("count"))
        require(game.at("count").get<int>() == cfg.market.count,
                "config: game.count != prosumer list length");

    if (j.contains("graph")) {
        const auto& g = j.at("graph");
        cfg.graph.type = g.value("type", std::string("fully_connected"));
        cfg.graph.omega = g.value("omega", 0.1);
        if (g.contains("edges"))
            for (const auto& e : g.at("edges"))
                cfg.graph.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }

    if (j.contains("seek")) {
        const auto& s = j.at("seek");
        cfg.seek.alpha = s.value("alpha", 0.0);
        cfg.seek.tau = s.value("tau", 0.0);
        cfg.seek.max_iter = s.value("max_iter", 200000L);
        cfg.seek.record_every = s.value("record_every", 10);
    }

    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        if (n.contains("sigmas"))
            for (const auto& v : n.at("sigmas")) cfg.noise.sigmas.push_back(v.get<double>());
        if (n.contains("epsilon")) cfg.noise.epsilon = n.at("epsilon").get<double>();
        if (n.contains("mu_adj")) cfg.noise.mu_adj = n.at("mu_adj").get<double>();
    }
    for (double sg : cfg.noise.sigmas) require(sg >= 0.0, "config: sigma values must be >= 0");

    if (j.contains("attack")) {
        const auto& a = j.at("attack");
        cfg.attack.victim = a.value("victim", 0);
        cfg.attack.start = a.value("start", 100L);
        if (a.contains("budgets"))
            for (const auto& b : a.at("budgets")) cfg.attack.budgets.push_back(b.get<int>());
        require(cfg.attack.victim >= 0 && cfg.attack.victim < cfg.market.count,
                "config: attack.victim out of range");
        require(cfg.attack.start >= 0, "config: attack.start must be >= 0");
        for (int b : cfg.attack.budgets) require(b >= 2, "config: attack budgets must be >= 2");
    }

    if (j.contains("fidelity")) {
        const auto& fj = j.at("fidelity");
        if (fj.contains("a_values")) {
            cfg.fidelity.a_values.clear();
            for (const auto& v : fj.at("a_values")) cfg.fidelity.a_values.push_back(v.get<double>());
        }
        cfg.fidelity.baseline = fj.value("baseline", std::string("oracle"));
        require(cfg.fidelity.baseline == "oracle" || cfg.fidelity.baseline == "seek",
                "config: fidelity.baseline must be 'oracle' or 'seek'");
    }

    cfg.runs = j.value("runs", 1);
    require(cfg.runs >= 1, "config: runs must be >= 1");
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.out_dir = j.value("out", std::string("out"));
    cfg.threads = j.value("threads", 0);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    f >> j;
    return parse_config(j);
}

CommGraph build_graph(const ExperimentConfig& cfg) {
    if (cfg.graph.type == "fully_connected")
        return fully_connected(cfg.market.count, cfg.graph.omega);
    if (cfg.graph.type == "edges")
        return from_edges(cfg.market.count, cfg.graph.edges, cfg.graph.omega);
    throw std::invalid_argument("config: unknown graph type '" + cfg.graph.type + "'");
}

std::vector<double> resolve_sigmas(const ExperimentConfig& cfg, std::string* warning) {
    if (!cfg.noise.sigmas.empty()) {
        if (cfg.noise.epsilon && warning)
            *warning = "both sigma list and (epsilon, mu_adj) given: sigma wins";
        return cfg.noise.sigmas;
    }
    if (cfg.noise.epsilon) {
        require(cfg.noise.mu_adj.has_value(), "config: epsilon given without mu_adj");
        const double A = sensitivity(cfg.prosumers, cfg.market);
        return {calibrate(PrivacyBudget{*cfg.noise.epsilon, *cfg.noise.mu_adj}, A).sigma};
    }
    throw std::invalid_argument("config: noise section needs sigmas or (epsilon, mu_adj)");
}

// --------------------------------- privacy ----------------------------------

ExperimentReport run_privacy_experiment(const ExperimentConfig& cfg) {
    require(!cfg.attack.budgets.empty(), "privacy experiment: attack.budgets must be present");
    apply_threads(cfg);
    std::string warning;
    const std::vector<double> sigmas = resolve_sigmas(cfg, &warning);
    const GameCoefficients coeffs = derive_coefficients(cfg.prosumers, cfg.market);
    const CommGraph graph = build_graph(cfg);
    const int I = cfg.market.count;
    const int victim = cfg.attack.victim;
    const double true_d = cfg.prosumers[victim].d;
    const long nb = static_cast<long>(cfg.attack.budgets.size());
    const long ns = static_cast<long>(sigmas.size());
    const long R = cfg.runs;

    std::vector<double> d_hat(nb * ns * R, kNaN);
    std::vector<char> failed(nb * ns * R, 0);
    auto slot = [&](long bi, long si, long run) { return (bi * ns + si) * R + run; };

    for (long bi = 0; bi < nb; ++bi) {
        const int B = cfg.attack.budgets[bi];
        const long k1 = cfg.attack.start, k2 = k1 + B - 1;
        // The system matrix is observation independent: factorize once per budget.
        const AttackSystem sys(coeffs, graph, cfg.seek.alpha, victim, B, coeffs.beta);
        for (long si = 0; si < ns; ++si) {
            const double sigma = sigmas[si];
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
            for (long run = 0; run < R; ++run) {
                SeekConfig sc = cfg.seek;
                sc.record_every = 1;
                // The attacker observes a prefix; iterations past k2 cannot
                // change it, so cap the run there.
                sc.max_iter = std::min(sc.max_iter, k2);
                NoiseRealization noise{sigma * unit_noise(derive_seed(cfg.seed, bi, run), I), sigma};
                try {
                    const Trajectory traj = seek(coeffs, graph, sc, noise);
                    if (traj.iterations < k2) {
                        failed[slot(bi, si, run)] = 1;  // run stopped inside the window
                        continue;
                    }
                    Eigen::MatrixXd obs(B, I);
                    for (int t = 0; t < B; ++t) obs.row(t) = traj.states[k1 + t].row(victim);
                    const InferenceResult res = sys.solve_beta(obs);
                    d_hat[slot(bi, si, run)] =
                        beta_to_demand(res.beta_hat, cfg.prosumers[victim].c, cfg.market);
                } catch (const divergence_error&) {
                    failed[slot(bi, si, run)] = 1;
                }
            }
        }
    }

    // per-run records, sorted by (sigma, budget, run)
    CsvWriter runs_csv(out_path(cfg, "privacy_runs.csv"), "privacy-runs", 1,
                       {"sigma", "budget", "run", "d_hat", "abs_error"});
    for (long si = 0; si < ns; ++si)
        for (long bi = 0; bi < nb; ++bi)
            for (long run = 0; run < R; ++run) {
                const double dh = d_hat[slot(bi, si, run)];
                runs_csv.row({fmt_g(sigmas[si]), std::to_string(cfg.attack.budgets[bi]),
                              std::to_string(run), fmt_g(dh), fmt_g(std::abs(dh - true_d))});
            }
    runs_csv.close();

    CsvWriter heat_csv(out_path(cfg, "privacy_heatmap.csv"), "privacy-heatmap", 1,
                       {"sigma", "budget", "mse", "hit_rate"});
    nlohmann::json cells = nlohmann::json::array();
    for (long si = 0; si < ns; ++si)
        for (long bi = 0; bi < nb; ++bi) {
            std::vector<double> ok;
            long nfail = 0;
            for (long run = 0; run < R; ++run)
                if (failed[slot(bi, si, run)]) ++nfail;
                else ok.push_back(d_hat[slot(bi, si, run)]);
            double mse = kNaN, hit = kNaN;
            nlohmann::json cell{{"sigma", sigmas[si]},
                                {"budget", cfg.attack.budgets[bi]},
                                {"failed_runs", nfail}};
            if (!ok.empty()) {
                const AttackStats st = attack_statistics(ok, true_d);
                mse = st.mse;
                hit = st.hit_rate;
                cell["mse"] = st.mse;
                cell["hit_rate"] = st.hit_rate;
                cell["min"] = st.min;
                cell["max"] = st.max;
                cell["mean"] = st.mean;
                cell["median"] = st.median;
                // self-audit: recompute from the records in reverse order
                double se = 0.0;
                long hits = 0, n = 0;
                for (auto it = ok.rbegin(); it != ok.rend(); ++it, ++n) {
                    se += (*it - true_d) * (*it - true_d);
                    if (std::abs(*it - true_d) <= 0.1 * true_d) ++hits;
                }
                audit_close(se / static_cast<double>(n), mse, "privacy mse");
                audit_close(static_cast<double>(hits) / static_cast<double>(n), hit,
                            "privacy hit_rate");
            }
            heat_csv.row({fmt_g(sigmas[si]), std::to_string(cfg.attack.budgets[bi]), fmt_g(mse),
                          fmt_g(hit)});
            cells.push_back(cell);
        }
    heat_csv.close();

    nlohmann::json summary{{"kind", "privacy"}, {"cells", cells}, {"true_d", true_d}};
    if (!warning.empty()) summary["warning"] = warning;
    ExperimentReport report;
    report.files = {out_path(cfg, "privacy_runs.csv"), out_path(cfg, "privacy_heatmap.csv")};
    write_report_json(cfg, summary, report);
    return report;
}

// ------------------------------- convergence --------------------------------

ExperimentReport run_convergence_experiment(const ExperimentConfig& cfg) {
    apply_threads(cfg);
    std::string warning;
    const std::vector<double> sigmas = resolve_sigmas(cfg, &warning);
    const GameCoefficients coeffs = derive_coefficients(cfg.prosumers, cfg.market);
    const CommGraph graph = build_graph(cfg);
    const int I = cfg.market.count;
    const long ns = static_cast<long>(sigmas.size());
    const long R = cfg.runs;

    std::vector<long> iters(ns * R, -1);
    std::vector<char> conv(ns * R, 0);
    std::vector<std::vector<std::pair<long, double>>> series(ns * R);
    auto slot = [&](long si, long run) { return si * R + run; };

    for (long si = 0; si < ns; ++si) {
        const double sigma = sigmas[si];
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (long run = 0; run < R; ++run) {
            // cell index 0: the sigma grid shares unit draws (paired runs)
            NoiseRealization noise{sigma * unit_noise(derive_seed(cfg.seed, 0, run), I), sigma};
            try {
                const Trajectory traj = seek(coeffs, graph, cfg.seek, noise);
                iters[slot(si, run)] = traj.iterations;
                conv[slot(si, run)] = traj.converged ? 1 : 0;
                auto& out = series[slot(si, run)];
                const auto full = residual_log(traj);
                for (const auto& [k, lr] : full)
                    if (k % cfg.seek.record_every == 0 || k == traj.iterations)
                        out.emplace_back(k, lr);
            } catch (const divergence_error&) {
                // slot stays failed (-1)
            }
        }
    }

    CsvWriter res_csv(out_path(cfg, "convergence_residuals.csv"), "convergence-residuals", 1,
                      {"sigma", "run", "iteration", "log_residual"});
    for (long si = 0; si < ns; ++si)
        for (long run = 0; run < R; ++run)
            for (const auto& [k, lr] : series[slot(si, run)])
                res_csv.row({fmt_g(sigmas[si]), std::to_string(run), std::to_string(k), fmt_g(lr)});
    res_csv.close();

    CsvWriter it_csv(out_path(cfg, "convergence_iterations.csv"), "convergence-iterations", 1,
                     {"sigma", "run", "iterations"});
    nlohmann::json cells = nlohmann::json::array();
    for (long si = 0; si < ns; ++si) {
        double sum = 0.0;
        long n = 0, nfail = 0, nconv = 0;
        long lo = std::numeric_limits<long>::max(), hi = -1;
        for (long run = 0; run < R; ++run) {
            it_csv.row({fmt_g(sigmas[si]), std::to_string(run),
                        std::to_string(iters[slot(si, run)])});
            const long it = iters[slot(si, run)];
            if (it < 0) {
                ++nfail;
                continue;
            }
            sum += static_cast<double>(it);
            ++n;
            nconv += conv[slot(si, run)];
            lo = std::min(lo, it);
            hi = std::max(hi, it);
        }
        const double mean = n ? sum / static_cast<double>(n) : kNaN;
        // self-audit in reverse order
        double sum2 = 0.0;
        long n2 = 0;
        for (long run = R - 1; run >= 0; --run)
            if (iters[slot(si, run)] >= 0) {
                sum2 += static_cast<double>(iters[slot(si, run)]);
                ++n2;
            }
        audit_close(n2 ? sum2 / static_cast<double>(n2) : kNaN, mean, "convergence mean iterations");
        cells.push_back({{"sigma", sigmas[si]},
                         {"mean_iterations", mean},
                         {"min_iterations", n ? lo : -1},
                         {"max_iterations", n ? hi : -1},
                         {"converged_runs", nconv},
                         {"failed_runs", nfail}});
    }
    it_csv.close();

    nlohmann::json summary{{"kind", "convergence"}, {"cells", cells}};
    if (!warning.empty()) summary["warning"] = warning;
    ExperimentReport report;
    report.files = {out_path(cfg, "convergence_residuals.csv"),
                    out_path(cfg, "convergence_iterations.csv")};
    write_report_json(cfg, summary, report);
    return report;
}

// --------------------------------- fidelity ---------------------------------

ExperimentReport run_fidelity_experiment(const ExperimentConfig& cfg) {
    apply_threads(cfg);
    std::string warning;
    const std::vector<double> sigmas = resolve_sigmas(cfg, &warning);
    const CommGraph graph = build_graph(cfg);
    const int I = cfg.market.count;
    const long na = static_cast<long>(cfg.fidelity.a_values.size());
    const long ns = static_cast<long>(sigmas.size());
    const long R = cfg.runs;

    std::vector<double> cost(na * ns * R, kNaN), gap(na * ns * R, kNaN);
    std::vector<Eigen::VectorXd> bids(na * ns * R);
    std::vector<char> failed(na * ns * R, 0);
    auto slot = [&](long ai, long si, long run) { return (ai * ns + si) * R + run; };
    std::vector<double> baseline_cost(na, kNaN);

    for (long ai = 0; ai < na; ++ai) {
        MarketParams market{cfg.fidelity.a_values[ai], I};
        const GameCoefficients coeffs = derive_coefficients(cfg.prosumers, market);
        if (cfg.fidelity.baseline == "oracle") {
            const BidProfile bstar = nash_equilibrium(coeffs);
            baseline_cost[ai] = total_cost(recover_dispatch(bstar, cfg.prosumers, market),
                                           cfg.prosumers);
        } else {  // seek baseline: exact-mode run under the same seek config
            const Trajectory t0 = seek(coeffs, graph, cfg.seek);
            const BidProfile b0 = t0.final_state().diagonal();
            baseline_cost[ai] = total_cost(recover_dispatch(b0, cfg.prosumers, market),
                                           cfg.prosumers);
        }
        for (long si = 0; si < ns; ++si) {
            const double sigma = sigmas[si];
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
            for (long run = 0; run < R; ++run) {
                NoiseRealization noise{sigma * unit_noise(derive_seed(cfg.seed, ai, run), I), sigma};
                try {
                    const Trajectory traj = seek(coeffs, graph, cfg.seek, noise);
                    // submitted bid of prosumer i is its own coordinate y_i(i)
                    const BidProfile b = traj.final_state().diagonal();
                    const double c = total_cost(recover_dispatch(b, cfg.prosumers, market),
                                                cfg.prosumers);
                    cost[slot(ai, si, run)] = c;
                    gap[slot(ai, si, run)] = c - baseline_cost[ai];
                    bids[slot(ai, si, run)] = b;
                } catch (const divergence_error&) {
                    failed[slot(ai, si, run)] = 1;
                }
            }
        }
    }

    CsvWriter runs_csv(out_path(cfg, "fidelity_runs.csv"), "fidelity-runs", 1,
                       {"sigma", "a", "run", "cost", "cost_gap"});
    CsvWriter bids_csv(out_path(cfg, "fidelity_bids.csv"), "fidelity-bids", 1,
                       {"sigma", "a", "run", "coord", "bid"});
    for (long si = 0; si < ns; ++si)
        for (long ai = 0; ai < na; ++ai)
            for (long run = 0; run < R; ++run) {
                const long s = slot(ai, si, run);
                runs_csv.row({fmt_g(sigmas[si]), fmt_g(cfg.fidelity.a_values[ai]),
                              std::to_string(run), fmt_g(cost[s]), fmt_g(gap[s])});
                if (!failed[s])
                    for (int i = 0; i < I; ++i)
                        bids_csv.row({fmt_g(sigmas[si]), fmt_g(cfg.fidelity.a_values[ai]),
                                      std::to_string(run), std::to_string(i), fmt_g(bids[s](i))});
            }
    runs_csv.close();
    bids_csv.close();

    CsvWriter agg_csv(out_path(cfg, "fidelity_aggregate.csv"), "fidelity-aggregate", 1,
                      {"sigma", "a", "mean_gap", "negative_gap_pct"});
    nlohmann::json cells = nlohmann::json::array();
    for (long si = 0; si < ns; ++si)
        for (long ai = 0; ai < na; ++ai) {
            double gsum = 0.0;
            long n = 0, neg = 0, nfail = 0;
            Eigen::VectorXd bid_sum = Eigen::VectorXd::Zero(I);
            for (long run = 0; run < R; ++run) {
                const long s = slot(ai, si, run);
                if (failed[s]) {
                    ++nfail;
                    continue;
                }
                gsum += gap[s];
                if (gap[s] < 0.0) ++neg;
                bid_sum += bids[s];
                ++n;
            }
            const double mean_gap = n ? gsum / static_cast<double>(n) : kNaN;
            const double neg_pct = n ? 100.0 * static_cast<double>(neg) / static_cast<double>(n)
                                     : kNaN;
            // self-audit in reverse order
            double gsum2 = 0.0;
            long neg2 = 0, n2 = 0;
            for (long run = R - 1; run >= 0; --run) {
                const long s = slot(ai, si, run);
                if (failed[s]) continue;
                gsum2 += gap[s];
                if (gap[s] < 0.0) ++neg2;
                ++n2;
            }
            audit_close(n2 ? gsum2 / static_cast<double>(n2) : kNaN, mean_gap, "fidelity mean_gap");
            audit_close(n2 ? 100.0 * static_cast<double>(neg2) / static_cast<double>(n2) : kNaN,
                        neg_pct, "fidelity negative_gap_pct");
            agg_csv.row({fmt_g(sigmas[si]), fmt_g(cfg.fidelity.a_values[ai]), fmt_g(mean_gap),
                         fmt_g(neg_pct)});
            nlohmann::json cell{{"sigma", sigmas[si]},
                                {"a", cfg.fidelity.a_values[ai]},
                                {"mean_gap", mean_gap},
                                {"negative_gap_pct", neg_pct},
                                {"baseline_cost", baseline_cost[ai]},
                                {"failed_runs", nfail}};
            if (n) {
                std::vector<double> means(I);
                for (int i = 0; i < I; ++i) means[i] = bid_sum(i) / static_cast<double>(n);
                cell["mean_bids"] = means;
            }
            cells.push_back(cell);
        }
    agg_csv.close();

    nlohmann::json summary{{"kind", "fidelity"},
                           {"cells", cells},
                           {"baseline", cfg.fidelity.baseline}};
    if (!warning.empty()) summary["warning"] = warning;
    ExperimentReport report;
    report.files = {out_path(cfg, "fidelity_runs.csv"), out_path(cfg, "fidelity_bids.csv"),
                    out_path(cfg, "fidelity_aggregate.csv")};
    write_report_json(cfg, summary, report);
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    if (cfg.kind == "privacy") return run_privacy_experiment(cfg);
    if (cfg.kind == "convergence") return run_convergence_experiment(cfg);
    if (cfg.kind == "fidelity") return run_fidelity_experiment(cfg);
    throw std::invalid_argument("config: unknown experiment kind '" + cfg.kind + "'");
}

}  // namespace dpnash
