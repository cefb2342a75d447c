#pragma once

// Step-size admissibility (assumption A1), the compact iteration matrix Q of
// the stacked dynamics, and the steady-state variance bound.

#include "dpnash/graph.hpp"
#include "dpnash/types.hpp"

namespace dpnash {

struct IterationMatrix {
    Eigen::MatrixXd Q;  // I^2 x I^2, symmetric
    double m = 0.0;     // spectral radius
};

// min{ (2 - lambda_bar) / (3 fbar^2), lambda_under * funder^2 / (2 (fbar^4 - funder^4)) }
// with fbar = max_i ||f_i|| and funder = min_i ||f_i||; the second term is
// +infinity when fbar == funder. Throws when lambda_bar >= 2 (no valid step).
double step_size_bound(const GameCoefficients& coeffs, const GraphSpectrum& spec);

// Q = Identity - kron(Wtilde, Identity_I) - alpha * F F^T with F the I^2 x I
// block-diagonal stacking of the f_i columns. m via a symmetric eigensolve.
IterationMatrix build_iteration_matrix(const GameCoefficients& coeffs, const CommGraph& graph,
                                       double alpha);

// Steady-state mean-squared-deviation bound 2 alpha^2 I sigma^2 max||f_i||^2 / (1 - m^2).
// Throws when m >= 1.
double variance_bound(const GameCoefficients& coeffs, double m, double alpha, double sigma);

// Diagnostic variant using the trace: 2 alpha^2 sigma^2 Tr(F^T F) / (1 - m^2).
double variance_bound_trace(const GameCoefficients& coeffs, double m, double alpha, double sigma);

}  // namespace dpnash
