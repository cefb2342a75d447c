#include "dpnash/game.hpp"

#include "util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dpnash;

TEST_CASE("coefficient fractions on the benchmark market") {
    const GameCoefficients g = derive_coefficients(testutil::bench_prosumers(),
                                                   testutil::bench_market());
    // prosumer 0: a c = 1.5, so beta = 1.5*15*6 / (1.5*5 + 1) = 270/17 and the
    // off-diagonal coupling is (2*1.5*5 - 4) / (2*5*(1.5*5 + 1)) = 11/85
    CHECK(g.beta(0) == doctest::Approx(270.0 / 17).epsilon(1e-14));
    for (int j = 1; j < 6; ++j) CHECK(g.mu(0, j) == doctest::Approx(11.0 / 85).epsilon(1e-14));
    CHECK(g.beta(4) == doctest::Approx(20.0).epsilon(1e-14));

    const double reference[6] = {15.88, 20.25, 27.27, 21.18, 20.00, 22.50};
    for (int i = 0; i < 6; ++i) CHECK(std::abs(g.beta(i) - reference[i]) < 0.005);

    for (int i = 0; i < 6; ++i) {
        CHECK(g.mu(i, i) == 0.0);
        CHECK(g.f(i, i) == 1.0);
        for (int j = 0; j < 6; ++j)
            if (j != i) CHECK(g.f(i, j) == -g.mu(i, j));
    }
}

TEST_CASE("beta/demand round trip") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const auto game = testutil::random_game(rng);
        const GameCoefficients g = game.coeffs;
        for (int i = 0; i < game.market.count; ++i) {
            const double d = beta_to_demand(g.beta(i), game.prosumers[i].c, game.market);
            CHECK(d == doctest::Approx(game.prosumers[i].d).epsilon(1e-12));
        }
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(derive_coefficients({{0.02, 10.0}}, {100.0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(derive_coefficients({{0.02, 10.0}, {0.02, 10.0}}, {100.0, 3}),
                    std::invalid_argument);
    CHECK_THROWS_AS(derive_coefficients({{0.02, 10.0}, {0.02, 10.0}}, {0.0, 2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(derive_coefficients({{-0.01, 10.0}, {0.02, 10.0}}, {100.0, 2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(derive_coefficients({{0.02, -1.0}, {0.02, 10.0}}, {100.0, 2}),
                    std::invalid_argument);
}

TEST_CASE("equilibrium of the benchmark market") {
    const GameCoefficients g = derive_coefficients(testutil::bench_prosumers(),
                                                   testutil::bench_market());
    const BidProfile b = nash_equilibrium(g);

    const double expected[6] = {69.29460816, 84.79928738, 85.01913286,
                                73.98210816, 82.19576344, 86.73477125};
    for (int i = 0; i < 6; ++i) CHECK(b(i) == doctest::Approx(expected[i]).epsilon(1e-8));

    // stationarity: f_i . b = beta_i for every player
    for (int i = 0; i < 6; ++i)
        CHECK(g.f.row(i).dot(b) == doctest::Approx(g.beta(i)).epsilon(1e-12));
}

TEST_CASE("equilibrium is a mutual best response") {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const auto game = testutil::random_game(rng, 2, 6);
        const BidProfile b = nash_equilibrium(game.coeffs);
        for (int i = 0; i < game.market.count; ++i) {
            const double at_eq = payoff(i, b, game.coeffs);
            for (double delta : {-2.0, -0.1, 0.1, 2.0}) {
                BidProfile dev = b;
                dev(i) += delta;
                const double moved = payoff(i, dev, game.coeffs);
                CHECK(moved < at_eq);
                // payoffs are quadratic with curvature -1/2 in the own bid
                CHECK(moved - at_eq == doctest::Approx(-0.5 * delta * delta).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("singular interaction matrix is reported") {
    // mu with constant off-diagonal 1/(I-1) makes I - mu singular (row sums 0)
    const int I = 4;
    GameCoefficients g;
    g.beta = Eigen::VectorXd::Ones(I);
    g.mu = Eigen::MatrixXd::Constant(I, I, 1.0 / (I - 1));
    g.mu.diagonal().setZero();
    g.f = Eigen::MatrixXd::Identity(I, I) - g.mu;
    CHECK_THROWS_AS(nash_equilibrium(g), singular_system_error);
}

TEST_CASE("dispatch identities") {
    const auto prosumers = testutil::bench_prosumers();
    const auto market = testutil::bench_market();
    const GameCoefficients g = derive_coefficients(prosumers, market);
    const BidProfile b = nash_equilibrium(g);
    const Dispatch dis = recover_dispatch(b, prosumers, market);

    CHECK(dis.lambda == doctest::Approx(0.8033761187630634).epsilon(1e-9));
    CHECK(dis.q.sum() == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));  // market clears
    for (int i = 0; i < 6; ++i) {
        CHECK(dis.q(i) == doctest::Approx(-market.a * dis.lambda + b(i)).epsilon(1e-12));
        CHECK(dis.p(i) + dis.q(i) == doctest::Approx(prosumers[i].d).epsilon(1e-12));
    }
    CHECK(total_cost(dis, prosumers) == doctest::Approx(46.41325793689818).epsilon(1e-10));
}

TEST_CASE("social optimum") {
    const auto prosumers = testutil::bench_prosumers();
    const auto market = testutil::bench_market();
    const Dispatch opt = social_optimum(prosumers, market);

    CHECK(opt.p.sum() == doctest::Approx(116.0).epsilon(1e-12));
    for (int i = 1; i < 6; ++i)  // equal marginal costs
        CHECK(2 * prosumers[i].c * opt.p(i) ==
              doctest::Approx(2 * prosumers[0].c * opt.p(0)).epsilon(1e-12));
    CHECK(opt.lambda == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(total_cost(opt, prosumers) == doctest::Approx(46.4).epsilon(1e-10));

    // no dispatch meeting total demand is cheaper
    const GameCoefficients g = derive_coefficients(prosumers, market);
    CHECK(total_cost(opt, prosumers) <
          total_cost(recover_dispatch(nash_equilibrium(g), prosumers, market), prosumers));
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 30; ++rep) {
        const auto game = testutil::random_game(rng);
        const Dispatch o = social_optimum(game.prosumers, game.market);
        const Dispatch ne = recover_dispatch(nash_equilibrium(game.coeffs), game.prosumers,
                                             game.market);
        CHECK(total_cost(o, game.prosumers) <= total_cost(ne, game.prosumers) + 1e-9);
    }
}
