#include "dpnash/laplace.hpp"

#include "util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace dpnash;

TEST_CASE("sensitivity") {
    // benchmark market: max at c = 0.03, A = 3*6 / (3*5 + 1) = 18/16
    CHECK(sensitivity(testutil::bench_prosumers(), testutil::bench_market()) ==
          doctest::Approx(1.125).epsilon(1e-14));

    // two players with a c = 1: A = 1*2 / (1*1 + 1) = 1
    CHECK(sensitivity({{0.02, 5.0}, {0.01, 5.0}}, {50.0, 2}) == doctest::Approx(1.0).epsilon(1e-14));

    // increasing the largest cost coefficient can only increase A
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        auto game = testutil::random_game(rng);
        const double before = sensitivity(game.prosumers, game.market);
        auto& cmax = *std::max_element(game.prosumers.begin(), game.prosumers.end(),
                                       [](auto& l, auto& r) { return l.c < r.c; });
        cmax.c *= 1.5;
        CHECK(sensitivity(game.prosumers, game.market) >= before);
    }
}

TEST_CASE("calibration") {
    const LaplaceSpec spec = calibrate({2.0, 3.0}, 1.125);
    CHECK(spec.sigma == doctest::Approx(1.125 * 3.0 / 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(calibrate({0.0, 1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(calibrate({1.0, -1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("sampling") {
    SUBCASE("zero scale is exactly zero") {
        const Eigen::VectorXd z = sample_laplace({0.0, 7}, 32);
        CHECK(z.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("deterministic per seed") {
        const Eigen::VectorXd x = sample_laplace({2.5, 99}, 64);
        const Eigen::VectorXd y = sample_laplace({2.5, 99}, 64);
        const Eigen::VectorXd z = sample_laplace({2.5, 100}, 64);
        CHECK((x - y).cwiseAbs().maxCoeff() == 0.0);
        CHECK((x - z).cwiseAbs().maxCoeff() > 0.0);
    }

    SUBCASE("moments: mean 0, variance 2 sigma^2") {
        const double sigma = 5.0;
        const int n = 1000000;
        const Eigen::VectorXd x = sample_laplace({sigma, 1234}, n);
        CHECK(std::abs(x.mean()) < 0.05);
        const double var = (x.array() - x.mean()).square().sum() / (n - 1);
        CHECK(var == doctest::Approx(2 * sigma * sigma).epsilon(0.02));
    }

    SUBCASE("Kolmogorov-Smirnov against the Laplace CDF") {
        const double sigma = 1.5;
        const int n = 100000;
        Eigen::VectorXd x = sample_laplace({sigma, 4321}, n);
        std::sort(x.data(), x.data() + n);
        double ks = 0.0;
        for (int i = 0; i < n; ++i) {
            const double cdf = x(i) < 0 ? 0.5 * std::exp(x(i) / sigma)
                                        : 1.0 - 0.5 * std::exp(-x(i) / sigma);
            ks = std::max(ks, std::abs(cdf - (i + 1.0) / n));
            ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
        }
        CHECK(ks < 0.0062);  // ~0.1% critical value at n = 1e5
    }
}

TEST_CASE("adjacency predicate") {
    Eigen::VectorXd d(4), e(4);
    d << 10, 12, 14, 16;
    e = d;
    CHECK(adjacent(d, e, 1.0));  // identical profiles
    e(2) += 0.8;
    CHECK(adjacent(d, e, 1.0));
    CHECK_FALSE(adjacent(d, e, 0.5));  // gap above radius
    e(0) += 0.1;
    CHECK_FALSE(adjacent(d, e, 1.0));  // two coordinates differ

    Eigen::VectorXd short_vec(3);
    short_vec << 10, 12, 14;
    CHECK_THROWS_AS(adjacent(d, short_vec, 1.0), std::invalid_argument);
}

TEST_CASE("density ratio check") {
    Eigen::VectorXd beta(3), beta2(3);
    beta << 10, 11, 12;

    SUBCASE("identical outputs at sigma 0") {
        const DpRatioCheck r = dp_ratio_check(beta, beta, 0.0, 1.0);
        CHECK(r.pass);
        CHECK(r.ratio == doctest::Approx(1.0));
    }

    SUBCASE("distinguishable outputs at sigma 0") {
        beta2 = beta;
        beta2(0) += 0.5;
        const DpRatioCheck r = dp_ratio_check(beta, beta2, 0.0, 1.0);
        CHECK_FALSE(r.pass);
        CHECK(std::isinf(r.ratio));
    }

    SUBCASE("boundary scale passes, half scale fails") {
        beta2 = beta;
        beta2(1) += 0.9;
        const double epsilon = 1.2;
        const double sigma = 0.9 / epsilon;  // l1 gap / epsilon
        const DpRatioCheck at = dp_ratio_check(beta, beta2, sigma, epsilon);
        CHECK(at.pass);
        CHECK(at.log_ratio == doctest::Approx(epsilon).epsilon(1e-12));
        const DpRatioCheck below = dp_ratio_check(beta, beta2, sigma / 2, epsilon);
        CHECK_FALSE(below.pass);
        CHECK(below.log_ratio == doctest::Approx(2 * epsilon).epsilon(1e-12));
    }
}
