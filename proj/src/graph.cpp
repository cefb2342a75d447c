#include "dpnash/graph.hpp"

#include <algorithm>
#include <queue>

namespace dpnash {

namespace {

// Fills neighbor lists / degrees from the adjacency matrix and validates the
// connectivity and weight-bound invariants shared by both constructors.
void finalize(CommGraph& g) {
    const int I = g.count;
    g.neighbors.assign(I, {});
    g.degree.assign(I, 0);
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < I; ++j)
            if (g.adjacency(i, j)) {
                g.neighbors[i].push_back(j);
                ++g.degree[i];
            }

    // connectivity (BFS)
    std::vector<char> seen(I, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : g.neighbors[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                q.push(v);
            }
    }
    require(reached == I, "comm graph must be connected");

    const int max_deg = *std::max_element(g.degree.begin(), g.degree.end());
    const double bound = 1.0 / (1.0 + max_deg);
    require(g.omega >= 0.0 && g.omega <= bound,
            "consensus weight omega violates 0 <= omega <= 1/(1+max degree) = " +
                std::to_string(bound));
}

}  // namespace

Eigen::MatrixXd CommGraph::wtilde() const {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(count, count);
    for (int i = 0; i < count; ++i) {
        W(i, i) = omega * degree[i];
        for (int j : neighbors[i]) W(i, j) = -omega;
    }
    return W;
}

CommGraph fully_connected(int count, double omega) {
    require(count >= 2, "fully_connected: need at least 2 nodes");
    CommGraph g;
    g.count = count;
    g.omega = omega;
    g.adjacency = Eigen::MatrixXi::Ones(count, count);
    g.adjacency.diagonal().setZero();
    finalize(g);
    return g;
}

CommGraph from_edges(int count, const std::vector<std::pair<int, int>>& edges, double omega) {
    require(count >= 2, "from_edges: need at least 2 nodes");
    CommGraph g;
    g.count = count;
    g.omega = omega;
    g.adjacency = Eigen::MatrixXi::Zero(count, count);
    for (const auto& [u, v] : edges) {
        require(u >= 0 && u < count && v >= 0 && v < count, "from_edges: edge index out of range");
        require(u != v, "from_edges: self loops are not allowed");
        g.adjacency(u, v) = 1;
        g.adjacency(v, u) = 1;
    }
    finalize(g);
    return g;
}

GraphSpectrum spectrum(const CommGraph& graph) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(graph.wtilde(), Eigen::EigenvaluesOnly);
    GraphSpectrum s;
    s.eigenvalues = es.eigenvalues();  // ascending
    return s;
}

}  // namespace dpnash
