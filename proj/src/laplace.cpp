#include "dpnash/laplace.hpp"

#include "dpnash/rng.hpp"

#include <cmath>
#include <limits>

namespace dpnash {

double sensitivity(const std::vector<ProsumerParams>& prosumers, const MarketParams& market) {
    const double a = market.a;
    const int I = market.count;
    double A = 0.0;
    for (const auto& pr : prosumers)
        A = std::max(A, a * pr.c * I / (a * pr.c * (I - 1) + 1.0));
    return A;
}

LaplaceSpec calibrate(const PrivacyBudget& budget, double A) {
    require(budget.epsilon > 0.0, "calibrate: epsilon must be > 0");
    require(budget.mu_adj > 0.0, "calibrate: mu_adj must be > 0");
    return LaplaceSpec{A * budget.mu_adj / budget.epsilon, 0};
}

Eigen::VectorXd sample_laplace(const LaplaceSpec& spec, int n) {
    require(n >= 1, "sample_laplace: need n >= 1");
    require(spec.sigma >= 0.0, "sample_laplace: sigma must be >= 0");
    std::mt19937_64 rng(spec.seed);
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out(i) = spec.sigma * unit_laplace(rng);
    return out;
}

bool adjacent(const Eigen::VectorXd& d, const Eigen::VectorXd& d_prime, double mu_adj) {
    require(d.size() == d_prime.size(), "adjacent: demand vectors differ in length");
    int differing = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double gap = std::abs(d(i) - d_prime(i));
        if (gap == 0.0) continue;
        if (gap > mu_adj) return false;
        if (++differing > 1) return false;
    }
    return true;
}

DpRatioCheck dp_ratio_check(const Eigen::VectorXd& beta, const Eigen::VectorXd& beta_prime,
                            double sigma, double epsilon) {
    require(beta.size() == beta_prime.size(), "dp_ratio_check: beta vectors differ in length");
    const double l1 = (beta - beta_prime).cwiseAbs().sum();
    DpRatioCheck out;
    if (sigma == 0.0) {
        if (l1 == 0.0) {
            out.ratio = 1.0;
            out.log_ratio = 0.0;
            out.pass = true;
        } else {
            out.ratio = std::numeric_limits<double>::infinity();
            out.log_ratio = std::numeric_limits<double>::infinity();
            out.pass = false;
        }
        return out;
    }
    out.log_ratio = l1 / sigma;
    out.ratio = std::exp(out.log_ratio);
    out.pass = out.log_ratio <= epsilon + 1e-12;  // log-space compare; tiny slack for the exact boundary
    return out;
}

}  // namespace dpnash
