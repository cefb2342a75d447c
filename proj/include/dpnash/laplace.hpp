#pragma once

// Laplace mechanism: sensitivity of the d -> beta map, epsilon-calibrated
// noise scale, seeded sampling, mu-adjacency, and the analytic density-ratio
// verification of the privacy inequality.

#include "dpnash/types.hpp"

#include <cstdint>

namespace dpnash {

struct PrivacyBudget {
    double epsilon = 0.0;  // > 0
    double mu_adj = 0.0;   // adjacency radius (kWh), > 0
};

struct LaplaceSpec {
    double sigma = 0.0;  // scale parameter (kWh, variance 2 sigma^2), >= 0
    std::uint64_t seed = 0;
};

// A = max_i a*c_i*I / (a*c_i*(I-1) + 1): per-coordinate Lipschitz constant of
// the demand -> beta map.
double sensitivity(const std::vector<ProsumerParams>& prosumers, const MarketParams& market);

// Minimal compliant scale sigma = A * mu_adj / epsilon.
LaplaceSpec calibrate(const PrivacyBudget& budget, double A);

// n i.i.d. draws with density (1/2 sigma) exp(-|x|/sigma), deterministic given seed.
Eigen::VectorXd sample_laplace(const LaplaceSpec& spec, int n);

// True iff at most one coordinate differs and that difference is <= mu_adj.
bool adjacent(const Eigen::VectorXd& d, const Eigen::VectorXd& d_prime, double mu_adj);

struct DpRatioCheck {
    bool pass = false;
    double ratio = 0.0;      // analytic supremum exp(sum |delta beta| / sigma); inf when sigma==0
    double log_ratio = 0.0;  // sum |delta beta| / sigma
};

// Supremum of the output density ratio between the mechanisms run on beta and
// beta_prime; passes when it is <= exp(epsilon) (compared in log space).
DpRatioCheck dp_ratio_check(const Eigen::VectorXd& beta, const Eigen::VectorXd& beta_prime,
                            double sigma, double epsilon);

}  // namespace dpnash
