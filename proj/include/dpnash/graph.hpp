#pragma once

// Prosumer communication graph and the spectrum of the weighted Laplacian-like
// matrix Wtilde = omega * (diag(degrees) - adjacency).

#include "dpnash/types.hpp"

namespace dpnash {

struct CommGraph {
    int count = 0;                            // I
    Eigen::MatrixXi adjacency;                // symmetric 0/1, zero diagonal
    double omega = 0.0;                       // consensus weight, 0 <= omega <= 1/(1+max degree)
    std::vector<std::vector<int>> neighbors;  // adjacency lists (derived)
    std::vector<int> degree;                  // per-node degree (derived)

    Eigen::MatrixXd wtilde() const;  // omega * (diag(degree) - adjacency)
};

struct GraphSpectrum {
    Eigen::VectorXd eigenvalues;  // of Wtilde, sorted ascending; eigenvalues(0) == 0

    // max / min over lambda_2..lambda_I (the nonzero modes of a connected graph)
    double lambda_bar() const { return eigenvalues(eigenvalues.size() - 1); }
    double lambda_under() const { return eigenvalues(1); }
};

// Complete graph on `count` nodes. Throws on a weight-bound violation.
CommGraph fully_connected(int count, double omega);

// Arbitrary connected graph from an undirected edge list. Throws on self
// loops, invalid indices, disconnected graphs, or weight-bound violations.
CommGraph from_edges(int count, const std::vector<std::pair<int, int>>& edges, double omega);

// Eigenvalues of Wtilde via a symmetric eigensolver.
GraphSpectrum spectrum(const CommGraph& graph);

}  // namespace dpnash
