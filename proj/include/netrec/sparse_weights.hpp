#ifndef NETREC_SPARSE_WEIGHTS_HPP
#define NETREC_SPARSE_WEIGHTS_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "netrec/common.hpp"
#include "netrec/sample_matrix.hpp"

namespace netrec {

/// Reconstruction state: a sparse symmetric weight matrix W (only nonzero
/// entries are stored, each unordered pair once under the (min,max) key),
/// per-node parameters theta, and the cached neighbor sums
/// m_i^(m) = sum_j W_ij X_jm kept consistent across edge updates.
///
/// Writing an exact zero removes the entry: sparsity of the stored graph is
/// the reconstruction result itself.
class SparseWeights {
public:
    explicit SparseWeights(NodeId n, int samples = 0)
        : n_(n), samples_(samples) {
        if (n < 1 || samples < 0) throw std::invalid_argument("SparseWeights: bad dimensions");
        rows_.resize(static_cast<std::size_t>(n));
        theta_.assign(static_cast<std::size_t>(n), 0.0);
        sums_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(samples), 0.0);
    }

    NodeId num_nodes() const { return n_; }
    int num_samples() const { return samples_; }
    std::size_t edge_count() const { return edges_; }

    double weight(NodeId i, NodeId j) const {
        check_pair(i, j);
        if (i > j) std::swap(i, j);
        const auto& row = rows_[static_cast<std::size_t>(i)];
        auto it = row.find(j);
        return it == row.end() ? 0.0 : it->second;
    }

    bool has_edge(NodeId i, NodeId j) const {
        if (i > j) std::swap(i, j);
        const auto& row = rows_[static_cast<std::size_t>(i)];
        return row.find(j) != row.end();
    }

    /// Sets W_ij = w and adjusts the cached sums of rows i and j in O(M).
    /// w = 0 deletes the entry. The diagonal lives in theta, so i == j is an error.
    void set_edge(NodeId i, NodeId j, double w, const SampleMatrix& X) {
        check_pair(i, j);
        if (i == j) throw std::invalid_argument("set_edge: diagonal entries live in theta");
        if (X.num_nodes() != n_ || X.num_samples() != samples_)
            throw std::invalid_argument("set_edge: sample matrix shape mismatch");
        if (i > j) std::swap(i, j);
        auto& row = rows_[static_cast<std::size_t>(i)];
        auto it = row.find(j);
        const double old = it == row.end() ? 0.0 : it->second;
        const double delta = w - old;
        if (delta != 0.0) {
            double* si = sums_.data() + static_cast<std::size_t>(i) * samples_;
            double* sj = sums_.data() + static_cast<std::size_t>(j) * samples_;
            const auto xi = X.row(i);
            const auto xj = X.row(j);
            for (int m = 0; m < samples_; ++m) {
                si[m] += delta * xj[m];
                sj[m] += delta * xi[m];
            }
        }
        if (w == 0.0) {
            if (it != row.end()) {
                row.erase(it);
                --edges_;
            }
        } else if (it == row.end()) {
            row.emplace(j, w);
            ++edges_;
        } else {
            it->second = w;
        }
    }

    double theta(NodeId i) const { return theta_[static_cast<std::size_t>(i)]; }
    void set_theta(NodeId i, double v) { theta_[static_cast<std::size_t>(i)] = v; }

    /// Cached m_i^(m); valid whenever edges were only modified through set_edge.
    double sum(NodeId i, int m) const {
        return sums_[static_cast<std::size_t>(i) * samples_ + static_cast<std::size_t>(m)];
    }
    std::span<const double> sums_row(NodeId i) const {
        return {sums_.data() + static_cast<std::size_t>(i) * samples_,
                static_cast<std::size_t>(samples_)};
    }

    template <class Fn>
    void for_each_edge(Fn&& fn) const {
        for (NodeId i = 0; i < n_; ++i)
            for (const auto& [j, w] : rows_[static_cast<std::size_t>(i)]) fn(i, j, w);
    }

    /// Edges as canonical (i<j) triples sorted by (i, j); used for serialization
    /// and anywhere a stable order matters.
    std::vector<CandidateEdge> sorted_edges() const {
        std::vector<CandidateEdge> out;
        out.reserve(edges_);
        for (NodeId i = 0; i < n_; ++i) {
            const auto& row = rows_[static_cast<std::size_t>(i)];
            std::vector<std::pair<NodeId, double>> r(row.begin(), row.end());
            std::sort(r.begin(), r.end());
            for (const auto& [j, w] : r) out.push_back({i, j, w});
        }
        return out;
    }

    /// Symmetric adjacency view (both directions), for samplers.
    std::vector<std::vector<std::pair<NodeId, double>>> neighbor_lists() const {
        std::vector<std::vector<std::pair<NodeId, double>>> adj(static_cast<std::size_t>(n_));
        for_each_edge([&](NodeId i, NodeId j, double w) {
            adj[static_cast<std::size_t>(i)].emplace_back(j, w);
            adj[static_cast<std::size_t>(j)].emplace_back(i, w);
        });
        return adj;
    }

    /// Recomputes all cached sums from the stored edges (O(E*M)).
    void rebuild_sums(const SampleMatrix& X) {
        if (X.num_nodes() != n_ || X.num_samples() != samples_)
            throw std::invalid_argument("rebuild_sums: sample matrix shape mismatch");
        std::fill(sums_.begin(), sums_.end(), 0.0);
        for_each_edge([&](NodeId i, NodeId j, double w) {
            double* si = sums_.data() + static_cast<std::size_t>(i) * samples_;
            double* sj = sums_.data() + static_cast<std::size_t>(j) * samples_;
            const auto xi = X.row(i);
            const auto xj = X.row(j);
            for (int m = 0; m < samples_; ++m) {
                si[m] += w * xj[m];
                sj[m] += w * xi[m];
            }
        });
    }

    /// Resizes the cached-sums buffer for a new sample count (entries zeroed);
    /// callers must rebuild_sums against the matching data.
    void resize_samples(int samples) {
        if (samples < 0) throw std::invalid_argument("resize_samples: negative");
        samples_ = samples;
        sums_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(samples), 0.0);
    }

private:
    void check_pair(NodeId i, NodeId j) const {
        if (i < 0 || j < 0 || i >= n_ || j >= n_)
            throw std::out_of_range("node id out of range");
    }

    NodeId n_;
    int samples_;
    std::vector<std::unordered_map<NodeId, double>> rows_;  // rows_[i][j] with i < j
    std::vector<double> theta_;
    std::vector<double> sums_;
    std::size_t edges_ = 0;
};

}  // namespace netrec

#endif
