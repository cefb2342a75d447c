#include "dpnash/seek.hpp"

#include "dpnash/analysis.hpp"
#include "dpnash/laplace.hpp"
#include "dpnash/rng.hpp"
#include "util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dpnash;

namespace {

GameCoefficients bench_coeffs() {
    return derive_coefficients(testutil::bench_prosumers(), testutil::bench_market());
}

const SeekConfig kBenchSeek{0.4, 1e-5, 200000, 10, StepKernel::fused};

Eigen::MatrixXd stacked(const BidProfile& b) {
    Eigen::MatrixXd y(b.size(), b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) y.row(i) = b.transpose();
    return y;
}

// mean squared deviation of the submitted bids (state diagonal) from b*
double bid_msd(const GameCoefficients& coeffs, const CommGraph& graph, const SeekConfig& sc,
               double sigma, int runs, std::uint64_t root, Eigen::VectorXd* mean_out = nullptr,
               Eigen::MatrixXd* samples_out = nullptr) {
    const BidProfile bstar = nash_equilibrium(coeffs);
    const int I = graph.count;
    Eigen::MatrixXd samples(runs, I);
    double msd = 0.0;
    for (int run = 0; run < runs; ++run) {
        std::mt19937_64 rng(derive_seed(root, 0, run));
        Eigen::VectorXd gamma(I);
        for (int i = 0; i < I; ++i) gamma(i) = sigma * unit_laplace(rng);
        const Trajectory traj = seek(coeffs, graph, sc, NoiseRealization{gamma, sigma});
        const BidProfile b = traj.final_state().diagonal();
        samples.row(run) = b.transpose();
        msd += (b - bstar).squaredNorm();
    }
    if (mean_out) *mean_out = samples.colwise().mean().transpose();
    if (samples_out) *samples_out = samples;
    return msd / runs;
}

}  // namespace

TEST_CASE("exact iteration reaches the equilibrium") {
    const GameCoefficients g = bench_coeffs();
    const CommGraph graph = fully_connected(6, 0.1);
    const Trajectory traj = seek(g, graph, kBenchSeek);
    CHECK(traj.converged);
    CHECK(traj.iterations < 20000);

    const BidProfile bstar = nash_equilibrium(g);
    for (int i = 0; i < 6; ++i)
        CHECK((traj.final_state().row(i).transpose() - bstar).cwiseAbs().maxCoeff() <
              100 * kBenchSeek.tau);
    CHECK(traj.residuals.back() < kBenchSeek.tau);
    CHECK(traj.residuals.size() == static_cast<std::size_t>(traj.iterations));
}

TEST_CASE("equilibrium start is a fixed point") {
    const GameCoefficients g = bench_coeffs();
    const CommGraph graph = fully_connected(6, 0.1);
    const Eigen::MatrixXd y0 = stacked(nash_equilibrium(g));
    const Trajectory traj = seek(g, graph, kBenchSeek, std::nullopt, y0);
    CHECK(traj.converged);
    CHECK(traj.iterations == 1);
    CHECK((traj.final_state() - y0).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("zero noise draw reproduces the exact run bitwise") {
    const GameCoefficients g = bench_coeffs();
    const CommGraph graph = fully_connected(6, 0.1);
    const Trajectory exact = seek(g, graph, kBenchSeek);
    const Trajectory zero =
        seek(g, graph, kBenchSeek, NoiseRealization{Eigen::VectorXd::Zero(6), 0.0});
    CHECK(exact.iterations == zero.iterations);
    CHECK((exact.final_state() - zero.final_state()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("private runs settle on the perturbed equilibrium") {
    const GameCoefficients g = bench_coeffs();
    const CommGraph graph = fully_connected(6, 0.1);
    SeekConfig sc = kBenchSeek;
    sc.tau = 1e-10;
    const Eigen::VectorXd gamma = sample_laplace({5.0, 2024}, 6);

    const Trajectory traj = seek(g, graph, sc, NoiseRealization{gamma, 5.0});
    CHECK(traj.converged);

    GameCoefficients shifted = g;
    shifted.beta += gamma;
    const BidProfile target = nash_equilibrium(shifted);
    for (int i = 0; i < 6; ++i)
        CHECK((traj.final_state().row(i).transpose() - target).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("inadmissible step diverges") {
    SeekConfig sc = kBenchSeek;
    sc.alpha = 2.0;  // ~5x the admissible bound
    CHECK_THROWS_AS(seek(bench_coeffs(), fully_connected(6, 0.1), sc), divergence_error);
}

TEST_CASE("config validation") {
    const GameCoefficients g = bench_coeffs();
    const CommGraph graph = fully_connected(6, 0.1);
    SeekConfig sc = kBenchSeek;
    sc.alpha = 0.0;
    CHECK_THROWS_AS(seek(g, graph, sc), std::invalid_argument);
    sc = kBenchSeek;
    sc.tau = 0.0;
    CHECK_THROWS_AS(seek(g, graph, sc), std::invalid_argument);
    sc = kBenchSeek;
    sc.max_iter = 0;
    CHECK_THROWS_AS(seek(g, graph, sc), std::invalid_argument);
    sc = kBenchSeek;
    sc.record_every = 0;
    CHECK_THROWS_AS(seek(g, graph, sc), std::invalid_argument);
    sc = kBenchSeek;
    CHECK_THROWS_AS(seek(g, graph, sc, NoiseRealization{Eigen::VectorXd::Zero(5), 1.0}),
                    std::invalid_argument);
}

TEST_CASE("iteration cap") {
    SeekConfig sc = kBenchSeek;
    sc.max_iter = 50;
    const Trajectory traj = seek(bench_coeffs(), fully_connected(6, 0.1), sc);
    CHECK_FALSE(traj.converged);
    CHECK(traj.iterations == 50);
}

TEST_CASE("record stride") {
    SeekConfig sc = kBenchSeek;
    sc.record_every = 7;
    const Trajectory traj = seek(bench_coeffs(), fully_connected(6, 0.1), sc);
    REQUIRE(traj.record_iters.size() >= 3);
    CHECK(traj.record_iters.front() == 0);
    CHECK(traj.record_iters.back() == traj.iterations);
    for (std::size_t s = 0; s + 1 < traj.record_iters.size(); ++s)
        CHECK(traj.record_iters[s] == static_cast<long>(7 * s));
    CHECK(traj.states.size() == traj.record_iters.size());
}

TEST_CASE("fused and reference kernels agree") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        const auto game = testutil::random_game(rng, 2, 10);
        const double alpha = testutil::admissible_alpha(game, rng);
        const int I = game.market.count;

        // single step from a random state
        Eigen::MatrixXd y = Eigen::MatrixXd::NullaryExpr(
            I, I, [&]() { return std::uniform_real_distribution<double>(-50, 50)(rng); });
        Eigen::MatrixXd a(I, I), b(I, I);
        const auto [s1, f1] = step_fused(y, a, game.coeffs, game.graph, alpha, game.coeffs.beta);
        const auto [s2, f2] = step_reference(y, b, game.coeffs, game.graph, alpha, game.coeffs.beta);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(s1 == doctest::Approx(s2).epsilon(1e-9));
        CHECK(f1 == doctest::Approx(f2).epsilon(1e-9));

        // full runs land on the same answer
        SeekConfig sc{alpha, 1e-6, 200000, 25, StepKernel::fused};
        const Trajectory fused = seek(game.coeffs, game.graph, sc);
        sc.kernel = StepKernel::reference;
        const Trajectory ref = seek(game.coeffs, game.graph, sc);
        CHECK(fused.converged);
        CHECK(ref.converged);
        CHECK((fused.final_state() - ref.final_state()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("residual decay rate matches the spectral radius") {
    const GameCoefficients g = bench_coeffs();
    const CommGraph graph = fully_connected(6, 0.1);
    const double m = build_iteration_matrix(g, graph, 0.4).m;
    const double expected_slope = std::log10(m);

    auto fitted_slope = [](const Trajectory& traj, long k_lo, long k_hi) {
        // least-squares line through (k, log10 r_k)
        double sk = 0, sk2 = 0, sy = 0, sky = 0;
        long n = 0;
        for (const auto& [k, lr] : residual_log(traj)) {
            if (k < k_lo || k > k_hi) continue;
            sk += k;
            sk2 += static_cast<double>(k) * k;
            sy += lr;
            sky += k * lr;
            ++n;
        }
        return (n * sky - sk * sy) / (n * sk2 - sk * sk);
    };

    SeekConfig sc = kBenchSeek;
    sc.tau = 1e-9;
    const Trajectory exact = seek(g, graph, sc);
    REQUIRE(exact.iterations > 4000);
    CHECK(fitted_slope(exact, 1000, 4000) == doctest::Approx(expected_slope).epsilon(0.05));

    const Eigen::VectorXd gamma = sample_laplace({5.0, 77}, 6);
    const Trajectory noisy = seek(g, graph, sc, NoiseRealization{gamma, 5.0});
    REQUIRE(noisy.iterations > 4000);
    CHECK(fitted_slope(noisy, 1000, 4000) == doctest::Approx(expected_slope).epsilon(0.05));
}

TEST_CASE("steady-state deviation sits under the variance bound at alpha = 0.4") {
    const GameCoefficients g = bench_coeffs();
    const CommGraph graph = fully_connected(6, 0.1);
    const double m = build_iteration_matrix(g, graph, 0.4).m;
    const double bound = variance_bound(g, m, 0.4, 0.1);
    const double msd = bid_msd(g, graph, kBenchSeek, 0.1, 400, 515);
    CHECK(msd <= bound * 1.05);
    CHECK(msd > 0.0);
}

TEST_CASE("known limitation: variance bound is not honored at alpha = 0.05") {
    // The steady-state deviation of the noise-once iteration is
    // 2 sigma^2 ||(Identity - mu)^{-1}||_F^2 independent of alpha, which
    // exceeds the advertised bound once alpha is small. Regression-pin both
    // facts so any change in this behavior is flagged.
    const GameCoefficients g = bench_coeffs();
    const CommGraph graph = fully_connected(6, 0.1);
    SeekConfig sc = kBenchSeek;
    sc.alpha = 0.05;
    const double m = build_iteration_matrix(g, graph, 0.05).m;
    const double bound = variance_bound(g, m, 0.05, 0.1);

    const double msd = bid_msd(g, graph, sc, 0.1, 400, 616);
    CHECK(msd == doctest::Approx(0.3650603188265963).epsilon(0.15));  // 2 sigma^2 ||J||_F^2
    CHECK(msd > bound * 1.05);
}

TEST_CASE("residual log") {
    Trajectory traj;
    traj.states = {Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
    traj.record_iters = {0, 2};
    traj.residuals = {1e-20, 1e-3};
    traj.residuals_fro = {1e-20, 1e-3};
    traj.iterations = 2;

    const auto log = residual_log(traj);
    REQUIRE(log.size() == 2);
    CHECK(log[0].first == 1);
    CHECK(log[0].second == -16.0);  // clamped
    CHECK(log[1].first == 2);
    CHECK(log[1].second == doctest::Approx(-3.0).epsilon(1e-12));

    Trajectory empty;
    empty.states = {Eigen::MatrixXd::Zero(2, 2)};
    CHECK_THROWS_AS(residual_log(empty), std::invalid_argument);
}
