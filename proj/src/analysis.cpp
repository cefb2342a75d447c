#include "dpnash/analysis.hpp"

#include <cmath>
#include <limits>

namespace dpnash {

namespace {

void f_norm_extremes(const GameCoefficients& coeffs, double& fbar2, double& funder2) {
    fbar2 = 0.0;
    funder2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < coeffs.f.rows(); ++i) {
        const double n2 = coeffs.f.row(i).squaredNorm();
        fbar2 = std::max(fbar2, n2);
        funder2 = std::min(funder2, n2);
    }
}

}  // namespace

double step_size_bound(const GameCoefficients& coeffs, const GraphSpectrum& spec) {
    const double lbar = spec.lambda_bar();
    if (lbar >= 2.0)
        throw std::invalid_argument(
            "step_size_bound: lambda_bar >= 2 leaves no admissible step size");
    double fbar2, funder2;
    f_norm_extremes(coeffs, fbar2, funder2);
    const double first = (2.0 - lbar) / (3.0 * fbar2);
    if (fbar2 - funder2 < 1e-15 * fbar2) return first;  // homogeneous ||f_i||: second term infinite
    const double second = spec.lambda_under() * funder2 / (2.0 * (fbar2 * fbar2 - funder2 * funder2));
    return std::min(first, second);
}

IterationMatrix build_iteration_matrix(const GameCoefficients& coeffs, const CommGraph& graph,
                                       double alpha) {
    const int I = graph.count;
    require(coeffs.beta.size() == I, "build_iteration_matrix: game/graph size mismatch");
    const Eigen::MatrixXd W = graph.wtilde();
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(I * I, I * I);
    // kron(Wtilde, Identity_I): block (i,j) is W(i,j) * Identity
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < I; ++j)
            if (W(i, j) != 0.0)
                Q.block(i * I, j * I, I, I).diagonal().array() -= W(i, j);
    // alpha * F F^T: block-diagonal alpha * f_i f_i^T
    for (int i = 0; i < I; ++i) {
        const Eigen::VectorXd fi = coeffs.f.row(i).transpose();
        Q.block(i * I, i * I, I, I) -= alpha * fi * fi.transpose();
    }
    IterationMatrix out;
    out.Q = std::move(Q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.Q, Eigen::EigenvaluesOnly);
    out.m = es.eigenvalues().cwiseAbs().maxCoeff();
    return out;
}

double variance_bound(const GameCoefficients& coeffs, double m, double alpha, double sigma) {
    if (m >= 1.0) throw std::invalid_argument("variance_bound: spectral radius m must be < 1");
    double fbar2, funder2;
    f_norm_extremes(coeffs, fbar2, funder2);
    const double I = static_cast<double>(coeffs.beta.size());
    return 2.0 * alpha * alpha * I * sigma * sigma * fbar2 / (1.0 - m * m);
}

double variance_bound_trace(const GameCoefficients& coeffs, double m, double alpha, double sigma) {
    if (m >= 1.0) throw std::invalid_argument("variance_bound_trace: spectral radius m must be < 1");
    const double tr = coeffs.f.squaredNorm();  // Tr(F^T F) = sum_i ||f_i||^2
    return 2.0 * alpha * alpha * sigma * sigma * tr / (1.0 - m * m);
}

}  // namespace dpnash
