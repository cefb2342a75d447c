#pragma once

// Reduced P2P trading game: coefficient derivation, exact Nash equilibrium,
// payoffs, market dispatch and the social-optimum benchmark.

#include "dpnash/types.hpp"

namespace dpnash {

// beta_i = a*c_i*d_i*I / (a*c_i*(I-1) + 1)
// mu_ij  = (2*a*c_i*(I-1) - (I-2)) / (2*(I-1)*(a*c_i*(I-1) + 1)), j != i; 0 on the diagonal
// f_i    = e_i - mu.row(i)
GameCoefficients derive_coefficients(const std::vector<ProsumerParams>& prosumers,
                                     const MarketParams& market);

// Exact inverse of the beta formula: d = beta * (a*c*(I-1) + 1) / (a*c*I).
double beta_to_demand(double beta_i, double c_i, const MarketParams& market);

// Solves (Identity - mu) b* = beta directly; throws singular_system_error on
// a degenerate game.
BidProfile nash_equilibrium(const GameCoefficients& coeffs);

// Gamma_i(b) = -1/2 b_i^2 + beta_i b_i + sum_{j != i} mu_ij b_i b_j
double payoff(int i, const BidProfile& bids, const GameCoefficients& coeffs);

// lambda = sum(b) / (I*a); q_i = -a*lambda + b_i; p_i = d_i - q_i
Dispatch recover_dispatch(const BidProfile& bids, const std::vector<ProsumerParams>& prosumers,
                          const MarketParams& market);

// Total production cost sum_i c_i p_i^2.
double total_cost(const Dispatch& dispatch, const std::vector<ProsumerParams>& prosumers);

// Minimizes total cost subject to sum(p) = sum(d): p_i proportional to 1/c_i.
// lambda is the (uniform) shadow price 2*c_i*p_i.
Dispatch social_optimum(const std::vector<ProsumerParams>& prosumers, const MarketParams& market);

}  // namespace dpnash
