#include "dpnash/seek.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dpnash {

namespace {
constexpr double kDivergenceGuard = 1e12;
// Row-parallel threshold: the per-row OpenMP split only pays off on large
// instances; the I=6 case studies always run a row serially.
constexpr int kParallelRows = 64;
}  // namespace

std::pair<double, double> step_reference(const EstimateState& y, EstimateState& next,
                                         const GameCoefficients& coeffs, const CommGraph& graph,
                                         double alpha, const Eigen::VectorXd& beta_eff) {
    const int I = graph.count;
    double fro2 = 0.0, sum = 0.0;
    for (int i = 0; i < I; ++i) {
        Eigen::RowVectorXd consensus = Eigen::RowVectorXd::Zero(I);
        for (int j : graph.neighbors[i]) consensus += y.row(i) - y.row(j);
        const double grad = coeffs.f.row(i).dot(y.row(i)) - beta_eff(i);
        next.row(i) = y.row(i) - graph.omega * consensus - alpha * grad * coeffs.f.row(i);
        const double row2 = (next.row(i) - y.row(i)).squaredNorm();
        fro2 += row2;
        sum += std::sqrt(row2);
    }
    return {sum, std::sqrt(fro2)};
}

std::pair<double, double> step_fused(const EstimateState& y, EstimateState& next,
                                     const GameCoefficients& coeffs, const CommGraph& graph,
                                     double alpha, const Eigen::VectorXd& beta_eff) {
    const int I = graph.count;
    const double omega = graph.omega;
    double fro2 = 0.0, sum = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : fro2, sum) \
    if (I >= kParallelRows && !omp_in_parallel())
#endif
    for (int i = 0; i < I; ++i) {
        const double deg = static_cast<double>(graph.degree[i]);
        double dot = 0.0;
        for (int r = 0; r < I; ++r) dot += coeffs.f(i, r) * y(i, r);
        const double gcoef = alpha * (dot - beta_eff(i));
        double row2 = 0.0;
        for (int r = 0; r < I; ++r) {
            double nsum = 0.0;
            for (int j : graph.neighbors[i]) nsum += y(j, r);
            const double v = y(i, r) - omega * (deg * y(i, r) - nsum) - gcoef * coeffs.f(i, r);
            next(i, r) = v;
            const double delta = v - y(i, r);
            row2 += delta * delta;
        }
        fro2 += row2;
        sum += std::sqrt(row2);
    }
    return {sum, std::sqrt(fro2)};
}

Trajectory seek(const GameCoefficients& coeffs, const CommGraph& graph, const SeekConfig& config,
                const std::optional<NoiseRealization>& noise,
                const std::optional<EstimateState>& y0) {
    const int I = graph.count;
    require(coeffs.beta.size() == I, "seek: game/graph size mismatch");
    require(config.alpha > 0.0, "seek: alpha must be > 0");
    require(config.tau > 0.0, "seek: tau must be > 0");
    require(config.max_iter >= 1, "seek: max_iter must be >= 1");
    require(config.record_every >= 1, "seek: record_every must be >= 1");

    Eigen::VectorXd beta_eff = coeffs.beta;
    if (noise) {
        require(noise->gamma.size() == I, "seek: noise vector length != prosumer count");
        beta_eff += noise->gamma;
    }

    EstimateState y = y0 ? *y0 : EstimateState::Zero(I, I);
    require(y.rows() == I && y.cols() == I, "seek: y0 must be I x I");
    EstimateState next(I, I);

    Trajectory traj;
    traj.noise = noise;
    traj.residuals.reserve(1024);
    traj.residuals_fro.reserve(1024);
    traj.states.push_back(y);
    traj.record_iters.push_back(0);

    const bool fused = config.kernel == StepKernel::fused;
    for (long k = 1; k <= config.max_iter; ++k) {
        const auto [rsum, rfro] = fused ? step_fused(y, next, coeffs, graph, config.alpha, beta_eff)
                                        : step_reference(y, next, coeffs, graph, config.alpha, beta_eff);
        if (!(next.cwiseAbs().maxCoeff() <= kDivergenceGuard))
            throw divergence_error("seek: iterate exceeded 1e12 at iteration " + std::to_string(k) +
                                   " (step size violates A1?)");
        y.swap(next);
        traj.residuals.push_back(rsum);
        traj.residuals_fro.push_back(rfro);
        traj.iterations = k;
        if (k % config.record_every == 0) {
            traj.states.push_back(y);
            traj.record_iters.push_back(k);
        }
        if (rsum < config.tau) {
            traj.converged = true;
            break;
        }
    }
    if (traj.record_iters.back() != traj.iterations) {
        traj.states.push_back(y);
        traj.record_iters.push_back(traj.iterations);
    }
    return traj;
}

std::vector<std::pair<long, double>> residual_log(const Trajectory& trajectory) {
    require(trajectory.states.size() >= 2, "residual_log: trajectory has fewer than 2 recorded states");
    std::vector<std::pair<long, double>> out;
    out.reserve(trajectory.residuals_fro.size());
    for (std::size_t k = 0; k < trajectory.residuals_fro.size(); ++k) {
        const double r = trajectory.residuals_fro[k];
        out.emplace_back(static_cast<long>(k) + 1, r > 1e-16 ? std::log10(r) : -16.0);
    }
    return out;
}

}  // namespace dpnash
