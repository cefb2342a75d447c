#include "dpnash/attack.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace dpnash {

namespace {

// Unknown layout: column 0 is beta_hat; then for window offset t and each
// non-victim j (ascending), an I-block of z_j(k1+t) coordinates.
struct Layout {
    int I, K, victim;
    long cols() const { return 1 + static_cast<long>(K) * (I - 1) * I; }
    long rows() const { return static_cast<long>(K - 1) * I * I; }
    long col(int t, int j, int r) const {  // j != victim
        const int oj = j < victim ? j : j - 1;
        return 1 + (static_cast<long>(t) * (I - 1) + oj) * I + r;
    }
    long row(int t, int l, int r) const { return (static_cast<long>(t) * I + l) * I + r; }
};

}  // namespace

struct AttackSystem::Impl {
    Layout lay;
    GameCoefficients coeffs;
    CommGraph graph;
    double alpha;
    Eigen::VectorXd known_beta;

    bool dense = true;
    Eigen::MatrixXd A;  // dense path
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    Eigen::SparseMatrix<double> As, N;  // sparse path; N = A^T A (undamped)
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

    bool determined = false;
    double cond_estimate = 0.0;

    void fill_triplets(std::vector<Eigen::Triplet<double>>& trip) const {
        const int I = lay.I, v = lay.victim;
        const double omega = graph.omega;
        for (int t = 0; t + 1 < lay.K; ++t) {
            for (int r = 0; r < I; ++r) {  // victim rows
                const long row = lay.row(t, v, r);
                trip.emplace_back(row, 0, alpha * coeffs.f(v, r));
                for (int j : graph.neighbors[v]) trip.emplace_back(row, lay.col(t, j, r), omega);
            }
            for (int l = 0; l < I; ++l) {  // non-victim rows
                if (l == v) continue;
                const double diag = -(1.0 - omega * graph.degree[l]);
                for (int r = 0; r < I; ++r) {
                    const long row = lay.row(t, l, r);
                    trip.emplace_back(row, lay.col(t + 1, l, r), 1.0);
                    trip.emplace_back(row, lay.col(t, l, r), diag);
                    const double fr = alpha * coeffs.f(l, r);
                    for (int s = 0; s < I; ++s)
                        trip.emplace_back(row, lay.col(t, l, s), fr * coeffs.f(l, s));
                    for (int j : graph.neighbors[l])
                        if (j != v) trip.emplace_back(row, lay.col(t, j, r), -omega);
                }
            }
        }
    }

    Eigen::VectorXd build_rhs(const Eigen::MatrixXd& y) const {
        const int I = lay.I, v = lay.victim;
        const double omega = graph.omega;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(lay.rows());
        for (int t = 0; t + 1 < lay.K; ++t) {
            const double fv_dot = coeffs.f.row(v).dot(y.row(t));
            for (int r = 0; r < I; ++r)
                b(lay.row(t, v, r)) = y(t + 1, r) - (1.0 - omega * graph.degree[v]) * y(t, r) +
                                      alpha * coeffs.f(v, r) * fv_dot;
            for (int l = 0; l < I; ++l) {
                if (l == v) continue;
                const bool sees_victim = graph.adjacency(l, v) != 0;
                for (int r = 0; r < I; ++r)
                    b(lay.row(t, l, r)) = (sees_victim ? omega * y(t, r) : 0.0) +
                                          alpha * coeffs.f(l, r) * known_beta(l);
            }
        }
        return b;
    }
};

AttackSystem::AttackSystem(const GameCoefficients& coeffs, const CommGraph& graph, double alpha,
                           int victim, int window_len, const Eigen::VectorXd& known_beta,
                           int dense_col_limit)
    : impl_(std::make_unique<Impl>()) {
    const int I = graph.count;
    require(window_len >= 2, "attack window too short: need at least 2 observed iterations");
    require(victim >= 0 && victim < I, "attack: victim index out of range");
    require(known_beta.size() == I, "attack: known_beta length != prosumer count");
    impl_->lay = Layout{I, window_len, victim};
    impl_->coeffs = coeffs;
    impl_->graph = graph;
    impl_->alpha = alpha;
    impl_->known_beta = known_beta;

    const Layout& lay = impl_->lay;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(lay.rows()) * (I + 4));
    impl_->fill_triplets(trip);

    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(lay.cols());
    e0(0) = 1.0;

    impl_->dense = lay.cols() <= dense_col_limit;
    if (impl_->dense) {
        impl_->A = Eigen::MatrixXd::Zero(lay.rows(), lay.cols());
        for (const auto& tr : trip) impl_->A(tr.row(), tr.col()) += tr.value();
        impl_->cod.setThreshold(1e-8);
        impl_->cod.compute(impl_->A);
        const Eigen::VectorXd xt = impl_->cod.solve(impl_->A * e0);
        impl_->determined = (xt - e0).cwiseAbs().maxCoeff() <= 1e-8;
        // condition estimate from the triangular factor's diagonal
        const auto Tdiag = impl_->cod.matrixT().diagonal().cwiseAbs();
        const long rank = impl_->cod.rank();
        double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
        for (long i = 0; i < rank; ++i) {
            dmax = std::max(dmax, Tdiag(i));
            dmin = std::min(dmin, Tdiag(i));
        }
        impl_->cond_estimate = dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity();
    } else {
        impl_->As.resize(lay.rows(), lay.cols());
        impl_->As.setFromTriplets(trip.begin(), trip.end());
        impl_->N = impl_->As.transpose() * impl_->As;
        Eigen::SparseMatrix<double> damped = impl_->N;
        // Tikhonov floor: keeps the factorization definite on the structural
        // null space; the induced bias on beta_hat is ~1e-9 kWh.
        constexpr double kDamping = 1e-12;
        Eigen::SparseMatrix<double> ident(lay.cols(), lay.cols());
        ident.setIdentity();
        damped += kDamping * ident;
        impl_->ldlt.compute(damped);
        require(impl_->ldlt.info() == Eigen::Success, "attack: sparse factorization failed");
        const Eigen::VectorXd xt = impl_->ldlt.solve(impl_->N * e0);
        impl_->determined = (xt - e0).cwiseAbs().maxCoeff() <= 1e-8;
        const Eigen::VectorXd D = impl_->ldlt.vectorD().cwiseAbs();
        const double dmax = D.maxCoeff();
        double dmin = dmax;
        for (long i = 0; i < D.size(); ++i)  // skip damping-dominated null modes
            if (D(i) > 1e-6) dmin = std::min(dmin, D(i));
        impl_->cond_estimate = dmin > 0.0 ? std::sqrt(dmax / dmin) : std::numeric_limits<double>::infinity();
    }
}

AttackSystem::~AttackSystem() = default;
AttackSystem::AttackSystem(AttackSystem&&) noexcept = default;

InferenceResult AttackSystem::solve_beta(const Eigen::MatrixXd& observed) const {
    const Layout& lay = impl_->lay;
    require(observed.rows() == lay.K && observed.cols() == lay.I,
            "attack: observation shape does not match the prepared window");
    const Eigen::VectorXd b = impl_->build_rhs(observed);
    Eigen::VectorXd x;
    double resid = 0.0;
    if (impl_->dense) {
        x = impl_->cod.solve(b);
        resid = (impl_->A * x - b).squaredNorm();
    } else {
        x = impl_->ldlt.solve(impl_->As.transpose() * b);
        resid = (impl_->As * x - b).squaredNorm();
    }
    InferenceResult out;
    out.beta_hat = x(0);
    out.residual = resid;
    out.determined = impl_->determined;
    out.cond_estimate = impl_->cond_estimate;
    out.ill_conditioned = impl_->cond_estimate > 1e12;
    return out;
}

bool AttackSystem::determined() const { return impl_->determined; }
double AttackSystem::cond_estimate() const { return impl_->cond_estimate; }
long AttackSystem::rows() const { return impl_->lay.rows(); }
long AttackSystem::cols() const { return impl_->lay.cols(); }

InferenceResult infer(const AttackObservation& obs, const GameCoefficients& coeffs_known,
                      const std::vector<ProsumerParams>& prosumers, const MarketParams& market) {
    const long K = obs.k2 - obs.k1 + 1;
    require(K >= 2, "infer: window too short, need at least 2 observed iterations");
    require(obs.observed.rows() == K, "infer: observed length != k2 - k1 + 1");
    CommGraph graph = obs.graph;
    graph.omega = obs.omega;  // observation's omega is authoritative for the dynamics
    AttackSystem sys(coeffs_known, graph, obs.alpha, obs.victim, static_cast<int>(K),
                     obs.known_beta);
    InferenceResult res = sys.solve_beta(obs.observed);
    res.d_hat = beta_to_demand(res.beta_hat, prosumers[obs.victim].c, market);
    return res;
}

AttackStats attack_statistics(const std::vector<double>& samples, double true_d) {
    require(!samples.empty(), "attack_statistics: empty sample list");
    AttackStats s;
    s.min = *std::min_element(samples.begin(), samples.end());
    s.max = *std::max_element(samples.begin(), samples.end());
    double se = 0.0;
    long hits = 0;
    for (double v : samples) {
        const double err = v - true_d;
        se += err * err;
        if (std::abs(err) <= 0.1 * true_d) ++hits;
    }
    s.mse = se / static_cast<double>(samples.size());
    s.hit_rate = static_cast<double>(hits) / static_cast<double>(samples.size());
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    s.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return s;
}

void write_observation_artifact(const std::string& path, const ObservationArtifact& artifact) {
    nlohmann::json j;
    j["victim"] = artifact.obs.victim;
    j["k1"] = artifact.obs.k1;
    j["k2"] = artifact.obs.k2;
    j["alpha"] = artifact.obs.alpha;
    j["omega"] = artifact.obs.omega;
    std::vector<std::vector<double>> rows;
    for (long t = 0; t < artifact.obs.observed.rows(); ++t) {
        std::vector<double> r(artifact.obs.observed.cols());
        for (long c = 0; c < artifact.obs.observed.cols(); ++c) r[c] = artifact.obs.observed(t, c);
        rows.push_back(std::move(r));
    }
    j["observed"] = rows;
    j["known_beta"] = std::vector<double>(artifact.obs.known_beta.data(),
                                          artifact.obs.known_beta.data() + artifact.obs.known_beta.size());
    std::vector<std::vector<int>> edges;
    for (int i = 0; i < artifact.obs.graph.count; ++i)
        for (int jn : artifact.obs.graph.neighbors[i])
            if (jn > i) edges.push_back({i, jn});
    j["graph"] = {{"count", artifact.obs.graph.count}, {"omega", artifact.obs.graph.omega}, {"edges", edges}};
    nlohmann::json pros = nlohmann::json::array();
    for (const auto& p : artifact.prosumers) pros.push_back({{"c", p.c}, {"d", p.d}});
    j["game"] = {{"a", artifact.market.a}, {"prosumers", pros}};
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
}

ObservationArtifact read_observation_artifact(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j;
    f >> j;
    ObservationArtifact art;
    art.obs.victim = j.at("victim").get<int>();
    art.obs.k1 = j.at("k1").get<long>();
    art.obs.k2 = j.at("k2").get<long>();
    art.obs.alpha = j.at("alpha").get<double>();
    art.obs.omega = j.at("omega").get<double>();
    const auto& rows = j.at("observed");
    const long K = static_cast<long>(rows.size());
    const long I = static_cast<long>(rows.at(0).size());
    art.obs.observed.resize(K, I);
    for (long t = 0; t < K; ++t)
        for (long c = 0; c < I; ++c) art.obs.observed(t, c) = rows[t][c].get<double>();
    const auto& kb = j.at("known_beta");
    art.obs.known_beta.resize(static_cast<long>(kb.size()));
    for (long i = 0; i < art.obs.known_beta.size(); ++i) art.obs.known_beta(i) = kb[i].get<double>();
    const auto& gj = j.at("graph");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : gj.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    art.obs.graph = from_edges(gj.at("count").get<int>(), edges, gj.at("omega").get<double>());
    art.market.a = j.at("game").at("a").get<double>();
    for (const auto& p : j.at("game").at("prosumers"))
        art.prosumers.push_back({p.at("c").get<double>(), p.at("d").get<double>()});
    art.market.count = static_cast<int>(art.prosumers.size());
    return art;
}

}  // namespace dpnash
