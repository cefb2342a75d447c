#pragma once

// Distributed Nash-equilibrium seeking: the exact iteration and its
// privacy-preserving variant (identical update with beta replaced by
// beta + gamma, gamma drawn once per run).
//
//   y_i(k+1) = y_i(k) - omega * sum_{j in N_i} (y_i(k) - y_j(k))
//                     - alpha * f_i * (f_i^T y_i(k) - (beta_i + gamma_i))
//
// Updates are synchronous (all rows advance from the same y(k)); the run
// stops when sum_i ||y_i(k+1) - y_i(k)|| drops below tau.

#include "dpnash/graph.hpp"
#include "dpnash/types.hpp"

#include <optional>
#include <utility>

namespace dpnash {

// The fused kernel is the production path (fixed operation order per row, so
// results are identical no matter how rows are scheduled); the reference
// kernel is a plain Eigen transcription kept for differential testing.
enum class StepKernel { fused, reference };

struct SeekConfig {
    double alpha = 0.0;        // step size, > 0
    double tau = 0.0;          // stopping tolerance on the summed residual, > 0
    long max_iter = 200000;    // iteration cap, >= 1
    int record_every = 10;     // trajectory sampling stride, >= 1
    StepKernel kernel = StepKernel::fused;
};

struct NoiseRealization {
    Eigen::VectorXd gamma;  // one Laplace draw per prosumer, fixed for the whole run
    double sigma = 0.0;     // scale the draws came from
};

struct Trajectory {
    std::vector<EstimateState> states;  // sampled states: iteration 0, every record_every, final
    std::vector<long> record_iters;     // iteration index of each sampled state
    std::vector<double> residuals;      // per-iteration sum_i ||y_i(k+1) - y_i(k)||_2
    std::vector<double> residuals_fro;  // per-iteration Frobenius norm of the step difference
    bool converged = false;
    long iterations = 0;  // update steps performed
    std::optional<NoiseRealization> noise;

    const EstimateState& final_state() const { return states.back(); }
};

// One synchronous update step; exposed for differential tests and benchmarks.
// Returns (residual_sum, residual_fro) and writes the next state into `next`.
std::pair<double, double> step_reference(const EstimateState& y, EstimateState& next,
                                         const GameCoefficients& coeffs, const CommGraph& graph,
                                         double alpha, const Eigen::VectorXd& beta_eff);
std::pair<double, double> step_fused(const EstimateState& y, EstimateState& next,
                                     const GameCoefficients& coeffs, const CommGraph& graph,
                                     double alpha, const Eigen::VectorXd& beta_eff);

// Runs the iteration from y0 (all zeros by default). Private mode when noise
// is present. Throws divergence_error when any entry exceeds 1e12.
Trajectory seek(const GameCoefficients& coeffs, const CommGraph& graph, const SeekConfig& config,
                const std::optional<NoiseRealization>& noise = std::nullopt,
                const std::optional<EstimateState>& y0 = std::nullopt);

// Per-iteration (k, log10 ||y(k) - y(k-1)||_F), clamped below at -16.
std::vector<std::pair<long, double>> residual_log(const Trajectory& trajectory);

}  // namespace dpnash
