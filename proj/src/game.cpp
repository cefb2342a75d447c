#include "dpnash/game.hpp"

#include <cmath>

namespace dpnash {

GameCoefficients derive_coefficients(const std::vector<ProsumerParams>& prosumers,
                                     const MarketParams& market) {
    const int I = market.count;
    require(I >= 2, "derive_coefficients: need at least 2 prosumers");
    require(static_cast<int>(prosumers.size()) == I,
            "derive_coefficients: prosumer list length != market.count");
    require(market.a > 0.0, "derive_coefficients: market sensitivity a must be > 0");

    GameCoefficients g;
    g.beta.resize(I);
    g.mu = Eigen::MatrixXd::Zero(I, I);
    g.f = Eigen::MatrixXd::Zero(I, I);
    const double a = market.a;
    for (int i = 0; i < I; ++i) {
        const double c = prosumers[i].c;
        require(c > 0.0, "derive_coefficients: cost coefficient c must be > 0");
        require(prosumers[i].d >= 0.0, "derive_coefficients: demand d must be >= 0");
        const double denom = a * c * (I - 1) + 1.0;
        g.beta(i) = a * c * prosumers[i].d * I / denom;
        const double mu_i = (2.0 * a * c * (I - 1) - (I - 2)) / (2.0 * (I - 1) * denom);
        for (int j = 0; j < I; ++j) {
            if (j == i) continue;
            g.mu(i, j) = mu_i;
            g.f(i, j) = -mu_i;
        }
        g.f(i, i) = 1.0;
    }
    return g;
}

double beta_to_demand(double beta_i, double c_i, const MarketParams& market) {
    const double a = market.a;
    const int I = market.count;
    return beta_i * (a * c_i * (I - 1) + 1.0) / (a * c_i * I);
}

BidProfile nash_equilibrium(const GameCoefficients& coeffs) {
    const Eigen::Index I = coeffs.beta.size();
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(I, I) - coeffs.mu;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible())
        throw singular_system_error("nash_equilibrium: (Identity - mu) is singular");
    return lu.solve(coeffs.beta);
}

double payoff(int i, const BidProfile& bids, const GameCoefficients& coeffs) {
    require(i >= 0 && i < bids.size(), "payoff: prosumer index out of range");
    const double bi = bids(i);
    double cross = 0.0;
    for (Eigen::Index j = 0; j < bids.size(); ++j)
        if (j != i) cross += coeffs.mu(i, j) * bids(j);
    return -0.5 * bi * bi + coeffs.beta(i) * bi + bi * cross;
}

Dispatch recover_dispatch(const BidProfile& bids, const std::vector<ProsumerParams>& prosumers,
                          const MarketParams& market) {
    const int I = market.count;
    Dispatch out;
    out.lambda = bids.sum() / (I * market.a);
    out.q = bids.array() - market.a * out.lambda;
    out.p.resize(I);
    for (int i = 0; i < I; ++i) out.p(i) = prosumers[i].d - out.q(i);
    return out;
}

double total_cost(const Dispatch& dispatch, const std::vector<ProsumerParams>& prosumers) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < dispatch.p.size(); ++i)
        cost += prosumers[i].c * dispatch.p(i) * dispatch.p(i);
    return cost;
}

Dispatch social_optimum(const std::vector<ProsumerParams>& prosumers, const MarketParams& market) {
    const int I = market.count;
    double total_d = 0.0, inv_sum = 0.0;
    for (const auto& pr : prosumers) {
        require(pr.c > 0.0, "social_optimum: cost coefficient c must be > 0");
        total_d += pr.d;
        inv_sum += 1.0 / pr.c;
    }
    Dispatch out;
    out.p.resize(I);
    out.q.resize(I);
    for (int i = 0; i < I; ++i) {
        out.p(i) = total_d * (1.0 / prosumers[i].c) / inv_sum;
        out.q(i) = prosumers[i].d - out.p(i);
    }
    out.lambda = 2.0 * prosumers[0].c * out.p(0);  // identical across i at the optimum
    return out;
}

}  // namespace dpnash
