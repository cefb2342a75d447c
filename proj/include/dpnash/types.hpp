#pragma once

// Core domain types and error taxonomy shared by every module.
//
// Units: demands, bids and traded quantities in kWh; production cost
// coefficients in $/kWh^2; prices in $/kWh. No conversion layer.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace dpnash {

struct ProsumerParams {
    double c = 0.0;  // self-production cost coefficient ($/kWh^2), > 0
    double d = 0.0;  // electricity demand (kWh), >= 0
};

struct MarketParams {
    double a = 0.0;  // market sensitivity of the generalized demand function (kWh/$), > 0
    int count = 0;   // number of prosumers I, >= 2
};

// Intercept bids b_i of the generalized demand functions q_i = -a*lambda + b_i.
using BidProfile = Eigen::VectorXd;

// Market-clearing outcome. Invariants: sum(q) == 0 and p + q == d (up to roundoff).
struct Dispatch {
    double lambda = 0.0;  // clearing price ($/kWh)
    Eigen::VectorXd q;    // traded quantities (kWh), positive = bought from the market
    Eigen::VectorXd p;    // self-production (kWh)
};

// Reduced-game coefficients. mu has a zero diagonal and row-constant
// off-diagonal entries; row i of f is f_i = e_i - mu.row(i), so f(i,i) == 1.
struct GameCoefficients {
    Eigen::VectorXd beta;  // beta_i (kWh)
    Eigen::MatrixXd mu;    // I x I, dimensionless
    Eigen::MatrixXd f;     // I x I, row i is f_i
};

// The algorithm iterate: row i is prosumer i's local estimate y_i of all bids.
using EstimateState = Eigen::MatrixXd;

// Thrown when an iteration exceeds the |entry| > 1e12 guard (step size
// outside the contraction regime, i.e. an A1 violation).
struct divergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when (Identity - mu) is rank deficient and the game has no
// well-defined equilibrium.
struct singular_system_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace dpnash
