#ifndef NETREC_SYNTH_HPP
#define NETREC_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "netrec/common.hpp"
#include "netrec/random.hpp"
#include "netrec/sample_matrix.hpp"
#include "netrec/sparse_weights.hpp"

namespace netrec {

/// Erdos-Renyi precision-matrix generator. Off-diagonal weights are normal
/// (weight_mu, weight_sigma); diagonals W_ii = sum_j |W_ij| / (1-epsilon)^2
/// make the matrix strictly diagonally dominant, hence positive definite.
struct GeneratorSpec {
    NodeId n = 100;
    double mean_deg = 5.0;
    double weight_mu = -1e3;
    double weight_sigma = 10.0;
    double epsilon = 1e-3;
    std::uint64_t seed = 0;
};

/// Ground-truth network for the synthetic experiments. The diagonal is stored
/// as theta_i = 1 / sqrt(W_ii), the parameterization the Gaussian model uses.
/// Isolated nodes (zero row sum) get W_ii = 1.
inline SparseWeights gen_er_precision(const GeneratorSpec& spec) {
    if (spec.n < 2) throw std::invalid_argument("gen_er_precision: need n >= 2");
    if (!(spec.mean_deg >= 0.0) || spec.mean_deg >= spec.n - 1)
        throw std::invalid_argument("gen_er_precision: mean_deg must be in [0, n-1)");
    if (!(spec.epsilon > 0.0) || !(spec.epsilon < 1.0))
        throw std::invalid_argument("gen_er_precision: epsilon must be in (0,1)");

    const NodeId n = spec.n;
    SparseWeights w(n, 0);
    SampleMatrix empty(n, 0);
    const double p = spec.mean_deg / static_cast<double>(n - 1);
    std::vector<double> absrow(static_cast<std::size_t>(n), 0.0);
    SplitRng rng(spec.seed);

    if (p > 0.0) {
        // geometric skip over the upper-triangle linear index: O(E) expected
        const double log1mp = std::log1p(-p);
        const std::uint64_t total =
            static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
        std::uint64_t idx = 0;
        bool first = true;
        for (;;) {
            double u = rng.uniform();
            while (u >= 1.0) u = rng.uniform();
            const double skip = std::floor(std::log1p(-u) / log1mp);
            idx += first ? static_cast<std::uint64_t>(skip)
                         : static_cast<std::uint64_t>(skip) + 1;
            first = false;
            if (idx >= total) break;
            // linear index -> (i, j), row-major upper triangle
            NodeId i = static_cast<NodeId>(
                n - 2 -
                static_cast<NodeId>(std::floor(
                    (std::sqrt(8.0 * static_cast<double>(total - 1 - idx) + 1.0) - 1.0) / 2.0)));
            // fix up float rounding
            auto row_start = [&](NodeId a) {
                return static_cast<std::uint64_t>(a) * (2 * n - a - 1) / 2;
            };
            while (i > 0 && row_start(i) > idx) --i;
            while (row_start(i + 1) <= idx) ++i;
            const NodeId j = static_cast<NodeId>(i + 1 + (idx - row_start(i)));
            const double weight = spec.weight_mu + spec.weight_sigma * rng.normal();
            w.set_edge(i, j, weight, empty);
            absrow[static_cast<std::size_t>(i)] += std::fabs(weight);
            absrow[static_cast<std::size_t>(j)] += std::fabs(weight);
        }
    }
    const double denom = (1.0 - spec.epsilon) * (1.0 - spec.epsilon);
    for (NodeId i = 0; i < n; ++i) {
        const double diag = absrow[static_cast<std::size_t>(i)] > 0.0
                                ? absrow[static_cast<std::size_t>(i)] / denom
                                : 1.0;
        w.set_theta(i, 1.0 / std::sqrt(diag));
    }
    return w;
}

/// M i.i.d. draws x ~ Normal(0, W^-1), where W is the precision matrix held
/// by `truth` (diagonal from theta). Solves L^T x = z on the sparse Cholesky
/// factorization W = L L^T.
inline SampleMatrix sample_gaussian(const SparseWeights& truth, int M, std::uint64_t seed) {
    const NodeId n = truth.num_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(truth.edge_count() * 2 + static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i) {
        const double th = truth.theta(i);
        if (!(th > 0.0)) throw std::invalid_argument("sample_gaussian: theta must be > 0");
        trip.emplace_back(i, i, 1.0 / (th * th));
    }
    truth.for_each_edge([&](NodeId i, NodeId j, double v) {
        trip.emplace_back(i, j, v);
        trip.emplace_back(j, i, v);
    });
    Eigen::SparseMatrix<double> W(n, n);
    W.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(W);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("sample_gaussian: precision matrix is not positive definite");

    SampleMatrix x(n, M);
    SplitRng rng(seed);
    Eigen::VectorXd z(n);
    for (int m = 0; m < M; ++m) {
        for (NodeId i = 0; i < n; ++i) z[i] = rng.normal();
        Eigen::VectorXd y = llt.matrixU().solve(z);
        Eigen::VectorXd v = llt.permutationPinv() * y;
        for (NodeId i = 0; i < n; ++i) x.set(i, m, v[i]);
    }
    return x;
}

struct GibbsParams {
    int burn_in = 1000;  // sweeps discarded before recording
    int thin = 10;       // sweeps between recorded samples
};

/// Gibbs sampler for the Ising model defined by `truth`: sequential
/// single-site updates with P(x_i = +1 | rest) = sigmoid(2 (m_i + theta_i)).
inline SampleMatrix sample_ising(const SparseWeights& truth, int M, const GibbsParams& gp,
                                 std::uint64_t seed) {
    if (gp.burn_in < 0 || gp.thin < 1) throw std::invalid_argument("sample_ising: bad Gibbs params");
    const NodeId n = truth.num_nodes();
    const auto adj = truth.neighbor_lists();
    std::vector<double> spin(static_cast<std::size_t>(n));
    SplitRng rng(seed);
    for (auto& s : spin) s = rng.uniform() < 0.5 ? -1.0 : 1.0;

    auto sweep = [&] {
        for (NodeId i = 0; i < n; ++i) {
            double field = truth.theta(i);
            for (const auto& [j, wij] : adj[static_cast<std::size_t>(i)])
                field += wij * spin[static_cast<std::size_t>(j)];
            spin[static_cast<std::size_t>(i)] = rng.uniform() < sigmoid(2.0 * field) ? 1.0 : -1.0;
        }
    };

    for (int s = 0; s < gp.burn_in; ++s) sweep();
    SampleMatrix x(n, M);
    for (int m = 0; m < M; ++m) {
        for (int s = 0; s < gp.thin; ++s) sweep();
        for (NodeId i = 0; i < n; ++i) x.set(i, m, spin[static_cast<std::size_t>(i)]);
    }
    return x;
}

}  // namespace netrec

#endif
