// dpnash command-line front end.
//
// Subcommands: equilibrium, seek, attack, experiment, check.
// Exit codes: 0 success, 1 numerical/runtime failure, 2 bad usage or config,
// 3 file I/O failure.

#include "dpnash/analysis.hpp"
#include "dpnash/attack.hpp"
#include "dpnash/csv.hpp"
#include "dpnash/experiment.hpp"
#include "dpnash/game.hpp"
#include "dpnash/graph.hpp"
#include "dpnash/laplace.hpp"
#include "dpnash/rng.hpp"
#include "dpnash/seek.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using nlohmann::json;
using namespace dpnash;

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("DPNASH_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 0;
}

void apply_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

void print_kv(const std::string& key, const std::string& value) {
    std::cout << key << ": " << value << "\n";
}

std::string vec_str(const Eigen::VectorXd& v) {
    std::string s = "[";
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt_g(v(i));
    }
    return s + "]";
}

int cmd_equilibrium(const std::string& config_path, bool as_json) {
    const ExperimentConfig cfg = load_config(config_path);
    const GameCoefficients coeffs = derive_coefficients(cfg.prosumers, cfg.market);
    const BidProfile bstar = nash_equilibrium(coeffs);
    const Dispatch dispatch = recover_dispatch(bstar, cfg.prosumers, cfg.market);
    const double cost = total_cost(dispatch, cfg.prosumers);
    const Dispatch opt = social_optimum(cfg.prosumers, cfg.market);
    const double opt_cost = total_cost(opt, cfg.prosumers);

    if (as_json) {
        json out{{"beta", to_vec(coeffs.beta)},
                 {"bids", to_vec(bstar)},
                 {"lambda", dispatch.lambda},
                 {"q", to_vec(dispatch.q)},
                 {"p", to_vec(dispatch.p)},
                 {"total_cost", cost},
                 {"social_optimum", {{"lambda", opt.lambda}, {"p", to_vec(opt.p)},
                                     {"total_cost", opt_cost}}}};
        std::cout << out.dump(2) << "\n";
    } else {
        print_kv("beta", vec_str(coeffs.beta));
        print_kv("nash bids b*", vec_str(bstar));
        print_kv("clearing price lambda", fmt_g(dispatch.lambda));
        print_kv("traded energy q", vec_str(dispatch.q));
        print_kv("local generation p", vec_str(dispatch.p));
        print_kv("total cost", fmt_g(cost));
        print_kv("social optimum cost", fmt_g(opt_cost));
    }
    return 0;
}

struct SeekArgs {
    std::string config_path;
    std::string out_csv;
    std::string obs_out;
    double sigma = -1.0;  // < 0: exact mode
    std::uint64_t noise_seed = 0;
    int record_every = 0;  // 0: keep config value
    int victim = 0;
    long k1 = -1, k2 = -1;
};

int cmd_seek(const SeekArgs& args, bool as_json) {
    const ExperimentConfig cfg = load_config(args.config_path);
    const GameCoefficients coeffs = derive_coefficients(cfg.prosumers, cfg.market);
    const CommGraph graph = build_graph(cfg);
    SeekConfig sc = cfg.seek;
    if (args.record_every > 0) sc.record_every = args.record_every;
    const bool want_obs = !args.obs_out.empty();
    if (want_obs) {
        require(args.k1 >= 0 && args.k2 > args.k1, "seek: --obs-out needs 0 <= k1 < k2");
        sc.record_every = 1;  // the observation needs every iterate in the window
    }

    std::optional<NoiseRealization> noise;
    if (args.sigma >= 0.0) {
        noise = NoiseRealization{sample_laplace({args.sigma, args.noise_seed}, cfg.market.count),
                                 args.sigma};
    }
    const Trajectory traj = seek(coeffs, graph, sc, noise);
    const BidProfile bids = traj.final_state().diagonal();

    if (!args.out_csv.empty()) {
        const int I = cfg.market.count;
        std::vector<std::string> cols{"iteration", "residual_sum", "residual_fro"};
        for (int i = 0; i < I; ++i)
            for (int j = 0; j < I; ++j)
                cols.push_back("y" + std::to_string(i) + "_" + std::to_string(j));
        CsvWriter w(args.out_csv, "seek-trajectory", 1, cols);
        for (std::size_t s = 0; s < traj.states.size(); ++s) {
            const long k = traj.record_iters[s];
            std::vector<std::string> row{std::to_string(k)};
            if (k == 0) {
                row.push_back("nan");
                row.push_back("nan");
            } else {
                row.push_back(fmt_g(traj.residuals[k - 1]));
                row.push_back(fmt_g(traj.residuals_fro[k - 1]));
            }
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < I; ++j) row.push_back(fmt_g(traj.states[s](i, j)));
            w.row(row);
        }
        w.close();
    }

    if (want_obs) {
        require(traj.iterations >= args.k2,
                "seek: run ended at iteration " + std::to_string(traj.iterations) +
                    ", before k2 = " + std::to_string(args.k2));
        const int I = cfg.market.count;
        const long K = args.k2 - args.k1 + 1;
        AttackObservation obs;
        obs.victim = args.victim;
        obs.k1 = args.k1;
        obs.k2 = args.k2;
        obs.observed.resize(K, I);
        for (long t = 0; t < K; ++t)
            obs.observed.row(t) = traj.states[static_cast<std::size_t>(args.k1 + t)].row(args.victim);
        obs.known_beta = coeffs.beta;
        obs.graph = graph;
        obs.alpha = sc.alpha;
        obs.omega = graph.omega;
        write_observation_artifact(args.obs_out, {obs, cfg.prosumers, cfg.market});
    }

    if (as_json) {
        json out{{"converged", traj.converged},
                 {"iterations", traj.iterations},
                 {"final_residual", traj.residuals.empty() ? 0.0 : traj.residuals.back()},
                 {"bids", to_vec(bids)},
                 {"private_mode", noise.has_value()}};
        if (noise) out["gamma"] = to_vec(noise->gamma);
        if (!args.out_csv.empty()) out["trajectory_csv"] = args.out_csv;
        if (want_obs) out["observation"] = args.obs_out;
        std::cout << out.dump(2) << "\n";
    } else {
        print_kv("mode", noise ? "private (sigma = " + fmt_g(args.sigma) + ")" : "exact");
        print_kv("converged", traj.converged ? "yes" : "no");
        print_kv("iterations", std::to_string(traj.iterations));
        print_kv("final residual", traj.residuals.empty() ? "0" : fmt_g(traj.residuals.back()));
        print_kv("bids (diagonal of final state)", vec_str(bids));
    }
    return 0;
}

int cmd_attack(const std::string& obs_path, bool as_json) {
    const ObservationArtifact art = read_observation_artifact(obs_path);
    const GameCoefficients coeffs = derive_coefficients(art.prosumers, art.market);
    const InferenceResult res = infer(art.obs, coeffs, art.prosumers, art.market);
    const double true_d = art.prosumers[static_cast<std::size_t>(art.obs.victim)].d;

    if (as_json) {
        json out{{"victim", art.obs.victim},
                 {"window", {art.obs.k1, art.obs.k2}},
                 {"beta_hat", res.beta_hat},
                 {"d_hat", res.d_hat},
                 {"true_d", true_d},
                 {"abs_error", std::abs(res.d_hat - true_d)},
                 {"residual", res.residual},
                 {"determined", res.determined},
                 {"ill_conditioned", res.ill_conditioned},
                 {"cond_estimate", res.cond_estimate}};
        std::cout << out.dump(2) << "\n";
    } else {
        print_kv("victim", std::to_string(art.obs.victim));
        print_kv("window", "[" + std::to_string(art.obs.k1) + ", " + std::to_string(art.obs.k2) + "]");
        print_kv("beta_hat", fmt_g(res.beta_hat));
        print_kv("d_hat", fmt_g(res.d_hat));
        print_kv("true d", fmt_g(true_d));
        print_kv("abs error", fmt_g(std::abs(res.d_hat - true_d)));
        print_kv("determined", res.determined ? "yes" : "no");
        print_kv("ill conditioned", res.ill_conditioned ? "yes" : "no");
    }
    return 0;
}

struct ExperimentArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int runs = 0;
    int threads = 0;
};

int cmd_experiment(const ExperimentArgs& args, bool as_json) {
    ExperimentConfig cfg = load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_given) cfg.seed = args.seed;
    if (args.runs > 0) cfg.runs = args.runs;
    cfg.threads = resolve_threads(args.threads);

    const ExperimentReport report = run_experiment(cfg);
    if (as_json) {
        json out = report.summary;
        out["files"] = report.files;
        std::cout << out.dump(2) << "\n";
    } else {
        print_kv("experiment", cfg.kind);
        print_kv("runs per cell", std::to_string(cfg.runs));
        print_kv("root seed", std::to_string(cfg.seed));
        if (report.summary.contains("warning"))
            print_kv("warning", report.summary["warning"].get<std::string>());
        for (const auto& f : report.files) print_kv("wrote", f);
        print_kv("wrote", (std::filesystem::path(cfg.out_dir) / "report.json").string());
    }
    return 0;
}

int cmd_check(const std::string& config_path, double epsilon, double mu, bool as_json) {
    const ExperimentConfig cfg = load_config(config_path);
    const GameCoefficients coeffs = derive_coefficients(cfg.prosumers, cfg.market);
    const CommGraph graph = build_graph(cfg);
    const GraphSpectrum spec = spectrum(graph);
    const double A = sensitivity(cfg.prosumers, cfg.market);
    const double alpha_max = step_size_bound(coeffs, spec);

    json out{{"sensitivity_A", A},
             {"lambda_bar", spec.lambda_bar()},
             {"lambda_under", spec.lambda_under()},
             {"alpha_max", alpha_max},
             {"omega", graph.omega}};
    if (epsilon > 0.0) {
        require(mu > 0.0, "check: --epsilon needs --mu > 0");
        out["epsilon"] = epsilon;
        out["mu_adj"] = mu;
        out["calibrated_sigma"] = calibrate({epsilon, mu}, A).sigma;
    }
    if (cfg.seek.alpha > 0.0) {
        const IterationMatrix im = build_iteration_matrix(coeffs, graph, cfg.seek.alpha);
        out["alpha"] = cfg.seek.alpha;
        out["spectral_radius_m"] = im.m;
        out["alpha_admissible"] = cfg.seek.alpha < alpha_max;
        std::string warning;
        std::vector<double> sigmas;
        if (!cfg.noise.sigmas.empty() || cfg.noise.epsilon)
            sigmas = resolve_sigmas(cfg, &warning);
        if (!warning.empty()) out["warning"] = warning;
        if (!sigmas.empty() && im.m < 1.0) {
            json vb = json::array();
            for (double s : sigmas)
                vb.push_back({{"sigma", s},
                              {"variance_bound", variance_bound(coeffs, im.m, cfg.seek.alpha, s)}});
            out["variance_bounds"] = vb;
        }
    }

    if (as_json) {
        std::cout << out.dump(2) << "\n";
    } else {
        print_kv("sensitivity A", fmt_g(A));
        if (out.contains("calibrated_sigma"))
            print_kv("calibrated sigma (epsilon=" + fmt_g(epsilon) + ", mu=" + fmt_g(mu) + ")",
                     fmt_g(out["calibrated_sigma"].get<double>()));
        print_kv("graph eigenvalue range", "[" + fmt_g(spec.lambda_under()) + ", " +
                                               fmt_g(spec.lambda_bar()) + "]");
        print_kv("step size bound alpha_max", fmt_g(alpha_max));
        if (out.contains("spectral_radius_m")) {
            print_kv("configured alpha", fmt_g(cfg.seek.alpha));
            print_kv("spectral radius m", fmt_g(out["spectral_radius_m"].get<double>()));
            print_kv("alpha admissible", out["alpha_admissible"].get<bool>() ? "yes" : "no");
        }
        if (out.contains("warning")) print_kv("warning", out["warning"].get<std::string>());
        if (out.contains("variance_bounds"))
            for (const auto& vb : out["variance_bounds"])
                print_kv("variance bound at sigma=" + fmt_g(vb["sigma"].get<double>()),
                         fmt_g(vb["variance_bound"].get<double>()));
    }
    return 0;
}

int fail(const std::exception& e, bool as_json, int code) {
    if (as_json) {
        std::cout << json{{"error", e.what()}, {"exit_code", code}}.dump(2) << "\n";
    }
    std::cerr << "error: " << e.what() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentially private distributed Nash equilibrium seeking for "
                 "peer-to-peer energy trading"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable JSON on stdout");

    std::string eq_config;
    auto* eq = app.add_subcommand("equilibrium", "solve the game directly and print the outcome");
    eq->add_option("--config", eq_config, "game config (JSON)")->required();

    SeekArgs sk;
    auto* seek_cmd = app.add_subcommand("seek", "run the distributed iteration once");
    seek_cmd->add_option("--config", sk.config_path, "game + seek config (JSON)")->required();
    seek_cmd->add_option("--sigma", sk.sigma, "Laplace scale; enables private mode (>= 0)")
        ->check(CLI::NonNegativeNumber);
    seek_cmd->add_option("--noise-seed", sk.noise_seed, "seed for the noise draw");
    seek_cmd->add_option("--record-every", sk.record_every, "trajectory sampling stride");
    seek_cmd->add_option("--out", sk.out_csv, "write the sampled trajectory as CSV");
    seek_cmd->add_option("--obs-out", sk.obs_out, "write an attack observation artifact (JSON)");
    seek_cmd->add_option("--victim", sk.victim, "victim index for --obs-out");
    seek_cmd->add_option("--k1", sk.k1, "window start for --obs-out");
    seek_cmd->add_option("--k2", sk.k2, "window end for --obs-out");

    std::string obs_path;
    auto* atk = app.add_subcommand("attack", "replay the inference attack on a stored observation");
    atk->add_option("--obs", obs_path, "observation artifact (JSON)")->required();

    ExperimentArgs ex;
    auto* exp = app.add_subcommand("experiment", "run a Monte Carlo campaign from a config");
    exp->add_option("--config", ex.config_path, "campaign config (JSON)")->required();
    exp->add_option("--out", ex.out_dir, "output directory (overrides config)");
    exp->add_option("--seed", ex.seed, "root seed (overrides config)");
    exp->add_option("--runs", ex.runs, "runs per cell (overrides config)");
    exp->add_option("--threads", ex.threads, "worker threads (DPNASH_THREADS as fallback)");

    std::string ck_config;
    double ck_eps = 0.0, ck_mu = 0.0;
    auto* ck = app.add_subcommand("check", "print analytic constants for a config");
    ck->add_option("--config", ck_config, "game config (JSON)")->required();
    ck->add_option("--epsilon", ck_eps, "privacy budget for sigma calibration");
    ck->add_option("--mu", ck_mu, "adjacency radius for sigma calibration");

    for (auto* sub : {eq, seek_cmd, atk, exp, ck})
        sub->add_flag("--json", as_json, "machine-readable JSON on stdout");
    CLI11_PARSE(app, argc, argv);

    try {
        apply_threads(resolve_threads(ex.threads));
        if (eq->parsed()) return cmd_equilibrium(eq_config, as_json);
        if (seek_cmd->parsed()) return cmd_seek(sk, as_json);
        if (atk->parsed()) return cmd_attack(obs_path, as_json);
        if (exp->parsed()) return cmd_experiment(ex, as_json);
        if (ck->parsed()) return cmd_check(ck_config, ck_eps, ck_mu, as_json);
    } catch (const std::invalid_argument& e) {
        return fail(e, as_json, 2);
    } catch (const std::runtime_error& e) {
        const bool io = std::string(e.what()).rfind("cannot open", 0) == 0;
        return fail(e, as_json, io ? 3 : 1);
    } catch (const std::exception& e) {
        return fail(e, as_json, 1);
    }
    return 0;
}
