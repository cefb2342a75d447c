#pragma once

// Adversarial inference: recover a victim prosumer's beta (hence demand) from
// an observed window of its coordination variable.
//
// Pinning the victim's own trajectory variables to the observations makes the
// remaining dynamics constraints linear in the unknowns
//   x = [beta_hat, z_j(k) for j != victim, k in window],
// so the whole attack is one linear least-squares solve. The stacked matrix
// is structurally rank deficient for window lengths >= 3 (the deficiency
// lives entirely in the z-blocks), but the beta coordinate is determined
// whenever no null-space vector has a beta component; `determined` reports
// exactly that, via a solve against the synthetic right-hand side A e_beta.

#include "dpnash/game.hpp"
#include "dpnash/graph.hpp"
#include "dpnash/types.hpp"

#include <Eigen/Sparse>

#include <memory>

namespace dpnash {

struct AttackObservation {
    int victim = 0;
    long k1 = 0, k2 = 0;        // window bounds, inclusive; k2 - k1 + 1 observed iterates
    Eigen::MatrixXd observed;   // (k2-k1+1) x I, row t is y_victim(k1 + t)
    Eigen::VectorXd known_beta; // beta_j for all j != victim (victim entry ignored)
    CommGraph graph;
    double alpha = 0.0;
    double omega = 0.0;
};

struct InferenceResult {
    double beta_hat = 0.0;
    double d_hat = 0.0;
    double residual = 0.0;        // squared norm of the least-squares defect
    bool determined = false;      // beta coordinate uniquely determined by the system
    bool ill_conditioned = false; // condition estimate above 1e12
    double cond_estimate = 0.0;
};

struct AttackStats {
    double mse = 0.0;
    double hit_rate = 0.0;  // fraction within +-10% of the true demand
    double min = 0.0, max = 0.0, mean = 0.0, median = 0.0;
};

// Prefactored attack system for a fixed (game, graph, alpha, victim, window
// length). The matrix does not depend on the observed values, so Monte Carlo
// campaigns factorize once per cell and solve per run. Small systems use a
// dense complete orthogonal decomposition (minimum-norm least squares);
// larger windows switch to damped normal equations with a sparse LDLT.
class AttackSystem {
  public:
    AttackSystem(const GameCoefficients& coeffs, const CommGraph& graph, double alpha, int victim,
                 int window_len, const Eigen::VectorXd& known_beta, int dense_col_limit = 800);
    ~AttackSystem();
    AttackSystem(AttackSystem&&) noexcept;

    // observed: window_len x I matrix of victim iterates. Thread-safe.
    InferenceResult solve_beta(const Eigen::MatrixXd& observed) const;

    bool determined() const;
    double cond_estimate() const;
    long rows() const;
    long cols() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot attack on an observation. prosumers/market supply the public c_i
// and a needed to map beta_hat back to a demand.
InferenceResult infer(const AttackObservation& obs, const GameCoefficients& coeffs_known,
                      const std::vector<ProsumerParams>& prosumers, const MarketParams& market);

AttackStats attack_statistics(const std::vector<double>& samples, double true_d);

// JSON artifact so attacks can be replayed on stored trajectories.
struct ObservationArtifact {
    AttackObservation obs;
    std::vector<ProsumerParams> prosumers;
    MarketParams market;
};
void write_observation_artifact(const std::string& path, const ObservationArtifact& artifact);
ObservationArtifact read_observation_artifact(const std::string& path);

}  // namespace dpnash
